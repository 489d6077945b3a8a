// Copyright 2026 The ABF Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return abf::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
