// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "lapkit/cli.hpp"

int main(int argc, char** argv) { return lapkit::run_cli(argc, argv); }
