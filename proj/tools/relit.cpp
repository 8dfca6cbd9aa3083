// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "relit/cli/cli.hpp"

int main(int argc, char** argv) { return relit::cli::run(argc, argv, std::cout, std::cerr); }
