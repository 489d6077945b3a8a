// Copyright 2026 The ABF Authors
// SPDX-License-Identifier: Apache-2.0

#include "abf/serialize.hpp"

#include <array>
#include <fstream>
#include <iterator>
#include <system_error>

namespace abf {

namespace {

constexpr std::array<char, 4> kMagic = {'A', 'B', 'F', '1'};
constexpr std::size_t kHeaderSize = 4 + 1 + 8 + 4 + 8 + 4 + 8;

template <typename T>
void put_le(std::vector<std::byte>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::byte>((value >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  template <typename T>
  T get_le() {
    if (bytes_.size() - pos_ < sizeof(T)) {
      throw FormatError("truncated filter data");
    }
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(T);
    return value;
  }

  [[nodiscard]] std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::byte> serialize(const CountingFilter& filter) {
  const FilterParams& p = filter.params();
  std::vector<std::byte> out;
  out.reserve(kHeaderSize + 4 * p.m);
  for (char c : kMagic) {
    out.push_back(static_cast<std::byte>(c));
  }
  out.push_back(static_cast<std::byte>(kFormatVersion));
  put_le<std::uint64_t>(out, p.m);
  put_le<std::uint32_t>(out, p.k);
  put_le<std::uint64_t>(out, p.seed);
  put_le<std::uint32_t>(out, p.counter_max);
  put_le<std::uint64_t>(out, filter.n_stored());
  for (std::uint32_t c : filter.counters()) {
    put_le<std::uint32_t>(out, c);
  }
  return out;
}

CountingFilter deserialize(std::span<const std::byte> bytes) {
  if (bytes.size() < kHeaderSize) {
    throw FormatError("filter data shorter than header");
  }
  for (std::size_t i = 0; i < kMagic.size(); ++i) {
    if (bytes[i] != static_cast<std::byte>(kMagic[i])) {
      throw FormatError("bad magic, not an ABF1 filter");
    }
  }
  Reader r(bytes.subspan(4));
  if (const auto version = r.get_le<std::uint8_t>(); version != kFormatVersion) {
    throw FormatError("unsupported format version " + std::to_string(version));
  }
  FilterParams p;
  p.m = r.get_le<std::uint64_t>();
  p.k = r.get_le<std::uint32_t>();
  p.seed = r.get_le<std::uint64_t>();
  p.counter_max = r.get_le<std::uint32_t>();
  const auto n_stored = r.get_le<std::uint64_t>();
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid parameters in header: ") + e.what());
  }
  if (r.remaining() != 4 * p.m) {
    throw FormatError("counter section has " + std::to_string(r.remaining()) + " bytes, expected " +
                      std::to_string(4 * p.m));
  }
  std::vector<std::uint32_t> counters(p.m);
  for (auto& c : counters) {
    c = r.get_le<std::uint32_t>();
  }
  try {
    return CountingFilter::from_state(p, std::move(counters), n_stored);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("inconsistent filter state: ") + e.what());
  }
}

CountingFilter load_filter(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  }
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(std::as_bytes(std::span(raw)));
}

void save_filter_atomic(const CountingFilter& filter, const std::filesystem::path& path) {
  const auto bytes = serialize(filter);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::system_error(errno, std::generic_category(), "cannot write " + tmp.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      throw std::system_error(errno, std::generic_category(), "write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace abf
