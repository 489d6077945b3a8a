// Copyright 2026 The ABF Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include "abf/filter.hpp"
#include "abf/harness.hpp"
#include "abf/model.hpp"
#include "abf/serialize.hpp"
#include "abf/tuner.hpp"

namespace abf::cli {

namespace {

std::string fmt10(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      throw std::invalid_argument("empty element on input line " + std::to_string(lines.size() + 1));
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

void print_rates(std::ostream& out, const model::RateEstimate& r) {
  out << "p1=" << fmt10(r.p1) << '\n'
      << "P0=" << fmt10(r.P0) << '\n'
      << "P1=" << fmt10(r.P1) << '\n'
      << "dbar_x=" << fmt10(r.dbar_x) << '\n'
      << "dbar_y=" << fmt10(r.dbar_y) << '\n'
      << "p_x=" << fmt10(r.p_x) << '\n'
      << "p_y=" << fmt10(r.p_y) << '\n'
      << "TPR=" << fmt10(r.tpr) << '\n'
      << "FPR=" << fmt10(r.fpr) << '\n'
      << "ACC=" << fmt10(r.acc) << '\n';
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw std::system_error(errno, std::generic_category(), "cannot write " + path);
  }
  return f;
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Autoscaling Bloom filter: counting filter, binarized views, tuning and experiments", "abf"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI/TOML file with default flag values");

  // build
  FilterParams build_params;
  std::string build_out;
  auto* build = app.add_subcommand("build", "Write an empty counting filter");
  build->add_option("--m", build_params.m, "Filter length")->required();
  build->add_option("--k", build_params.k, "Indices per element")->required();
  build->add_option("--seed", build_params.seed, "Hash seed")->default_val(0);
  build->add_option("--counter-max", build_params.counter_max, "Counter saturation bound")
      ->default_val(kDefaultCounterMax);
  build->add_option("--out", build_out, "Output filter file")->required();

  // insert / remove
  std::string mutate_filter;
  auto* insert = app.add_subcommand("insert", "Insert elements read from stdin, one per line");
  insert->add_option("--filter", mutate_filter, "Filter file")->required();
  auto* remove = app.add_subcommand("remove", "Remove elements read from stdin, one per line");
  remove->add_option("--filter", mutate_filter, "Filter file")->required();

  // query
  std::string query_filter;
  std::uint32_t query_theta = 0;
  std::optional<std::uint32_t> query_T;
  auto* query = app.add_subcommand("query", "Print 1/0 membership for each stdin line");
  query->add_option("--filter", query_filter, "Filter file")->required();
  query->add_option("--theta", query_theta, "Binarization threshold")->default_val(0);
  query->add_option("--T", query_T, "Decision threshold (default k)");

  // tune
  std::string tune_filter;
  std::optional<std::uint64_t> tune_m;
  std::optional<std::uint64_t> tune_n;
  std::optional<std::uint32_t> tune_k;
  double tune_l_tpr = 0.0;
  std::optional<std::uint32_t> tune_theta;
  std::optional<std::uint32_t> tune_theta_max;
  auto* tune_cmd = app.add_subcommand("tune", "Choose theta and T maximizing predicted accuracy");
  auto* tune_file_opt = tune_cmd->add_option("--filter", tune_filter, "Take m, k and n from a filter file");
  auto* tune_m_opt = tune_cmd->add_option("--m", tune_m, "Filter length");
  tune_cmd->add_option("--n", tune_n, "Stored elements");
  tune_cmd->add_option("--k", tune_k, "Indices per element");
  tune_cmd->add_option("--l-tpr", tune_l_tpr, "Lowest acceptable TPR")->required();
  tune_cmd->add_option("--theta", tune_theta, "Fix theta and tune T only");
  tune_cmd->add_option("--theta-max", tune_theta_max, "Upper end of the theta sweep");
  tune_file_opt->excludes(tune_m_opt);

  // analyze
  model::ModelPoint point;
  auto* analyze = app.add_subcommand("analyze", "Evaluate the analytic model at one point");
  analyze->add_option("--m", point.m)->required();
  analyze->add_option("--n", point.n)->required();
  analyze->add_option("--k", point.k)->required();
  analyze->add_option("--theta", point.theta)->default_val(0);
  analyze->add_option("--T", point.T)->required();

  // sweep-theta
  harness::ThresholdSweepConfig sweep_cfg;
  std::string sweep_out;
  std::string sweep_pmf_out;
  auto* sweep = app.add_subcommand("sweep-theta", "Per-theta tuned rates at fixed m, n, k (CSV)");
  sweep->add_option("--m", sweep_cfg.m)->capture_default_str();
  sweep->add_option("--n", sweep_cfg.n)->capture_default_str();
  sweep->add_option("--k", sweep_cfg.k)->capture_default_str();
  sweep->add_option("--theta-max", sweep_cfg.theta_max)->capture_default_str();
  sweep->add_option("--l-tpr", sweep_cfg.l_tpr)->capture_default_str();
  sweep->add_option("--queries", sweep_cfg.query_count, "Absent queries per trial")->capture_default_str();
  sweep->add_option("--trials", sweep_cfg.trials)->capture_default_str();
  sweep->add_option("--seed", sweep_cfg.base_seed)->capture_default_str();
  sweep->add_option("--out", sweep_out, "CSV output")->required();
  sweep->add_option("--pmf-out", sweep_pmf_out, "Optional CSV of dot-product pmfs and histograms");

  // compare-growth
  harness::GrowthConfig growth_cfg;
  std::string growth_out;
  auto* growth = app.add_subcommand("compare-growth", "ABF vs optimized, plain and retouched BFs over n (CSV)");
  growth->add_option("--m", growth_cfg.m)->capture_default_str();
  growth->add_option("--k", growth_cfg.k)->capture_default_str();
  growth->add_option("--n-start", growth_cfg.n_start)->capture_default_str();
  growth->add_option("--n-stop", growth_cfg.n_stop)->capture_default_str();
  growth->add_option("--n-step", growth_cfg.n_step)->capture_default_str();
  growth->add_option("--l-tpr", growth_cfg.l_tpr)->capture_default_str();
  growth->add_option("--erase", growth_cfg.erase_fraction, "Retouched BF erase fraction")->capture_default_str();
  growth->add_option("--queries", growth_cfg.query_count)->capture_default_str();
  growth->add_option("--trials", growth_cfg.trials)->capture_default_str();
  growth->add_option("--seed", growth_cfg.base_seed)->capture_default_str();
  growth->add_option("--out", growth_out, "CSV output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build) {
      build_params.validate();
      save_filter_atomic(CountingFilter(build_params), build_out);
      out << "m=" << build_params.m << " k=" << build_params.k << " seed=" << build_params.seed << " n_stored=0\n";
    } else if (*insert || *remove) {
      const bool inserting = static_cast<bool>(*insert);
      auto filter = load_filter(mutate_filter);
      const auto lines = read_lines(in);
      std::size_t line_no = 0;
      try {
        for (const auto& line : lines) {
          ++line_no;
          const auto d = digest(line, filter.params());
          if (inserting) {
            filter.insert(d);
          } else {
            filter.remove(d);
          }
        }
      } catch (const DomainError& e) {
        err << e.what() << " (line " << line_no << "); filter left unchanged\n";
        return kExitDomainError;
      }
      save_filter_atomic(filter, mutate_filter);
      for (std::size_t i = 0; i < lines.size(); ++i) {
        out << (inserting ? "inserted\n" : "removed\n");
      }
      err << "n_stored=" << filter.n_stored() << '\n';
    } else if (*query) {
      const auto filter = load_filter(query_filter);
      const auto view = binarize(filter, query_theta, query_T.value_or(filter.params().k));
      std::string line;
      while (std::getline(in, line)) {
        out << (view.query(digest(line, filter.params())) ? '1' : '0') << '\n';
      }
    } else if (*tune_cmd) {
      std::uint64_t m = 0;
      std::uint64_t n = 0;
      std::uint32_t k = 0;
      if (!tune_filter.empty()) {
        const auto filter = load_filter(tune_filter);
        m = filter.params().m;
        k = filter.params().k;
        n = tune_n.value_or(filter.n_stored());
      } else {
        if (!tune_m || !tune_n || !tune_k) {
          throw std::invalid_argument("tune needs --filter or all of --m, --n, --k");
        }
        m = *tune_m;
        n = *tune_n;
        k = *tune_k;
      }
      FilterParams{m, k, 0}.validate();
      if (n == 0) {
        throw std::invalid_argument("tune needs n >= 1");
      }
      const tune::TuneConstraint constraint{tune_l_tpr};
      const auto result = tune_theta ? tune::optimize_T(m, n, k, *tune_theta, constraint)
                                     : tune::optimize_theta_T(m, n, k, constraint, tune_theta_max);
      out << "theta=" << result.theta << '\n'
          << "T=" << result.T << '\n'
          << "TPR=" << fmt10(result.predicted.tpr) << '\n'
          << "FPR=" << fmt10(result.predicted.fpr) << '\n'
          << "ACC=" << fmt10(result.predicted.acc) << '\n'
          << "feasible=" << (result.feasible ? 1 : 0) << '\n'
          << "candidates=" << result.candidates_evaluated << '\n';
    } else if (*analyze) {
      print_rates(out, model::rates(point));
    } else if (*sweep) {
      const auto result = harness::run_threshold_sweep(sweep_cfg);
      auto csv = open_output(sweep_out);
      const auto records = result.records();
      harness::write_csv(csv, records);
      if (!sweep_pmf_out.empty()) {
        auto pmf = open_output(sweep_pmf_out);
        harness::write_pmf_csv(pmf, result);
      }
      out << "best_theta=" << result.best_theta << '\n';
    } else if (*growth) {
      const auto result = harness::run_growth_comparison(growth_cfg);
      auto csv = open_output(growth_out);
      harness::write_csv(csv, result.records);
      out << "rebuilds=" << result.rebuild_count << '\n';
    }
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << e.what() << '\n';
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace abf::cli
