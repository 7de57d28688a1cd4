// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lapkit/experiment/runner.hpp"

namespace lapkit {

/// Entry point of the `lapkit` executable. Returns the process exit code:
/// 0 success, 1 invalid configuration, 2 inconclusive probe, 3 failed run.
inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace experiment;
  CLI::App app{"lapkit: limiting absorption experiments on finite-dimensional fixtures", "lapkit"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kToolkitVersion);

  std::string config_path;
  std::string output_dir;
  bool canonical = false;
  unsigned jobs = 1;
  app.add_option("--config", config_path, "experiment configuration (JSON)")->required();
  app.add_option("--output", output_dir, "output directory (overrides the config)");
  app.add_flag("--canonical", canonical, "omit wall_time and generated_at from report.json");
  app.add_option("--jobs", jobs, "worker thread cap")->check(CLI::Range(1u, 1024u));

  const std::pair<const char*, Command> commands[] = {
      {"probe", Command::probe},       {"resonances", Command::resonances},
      {"solve-ls", Command::solve_ls}, {"verify", Command::verify},
      {"sweep", Command::sweep},
  };
  const char* help[] = {
      "probe the boundary value of the sandwiched resolvent per lambda",
      "coupling resonances and a non-resonant coupling per lambda",
      "solve the homogeneous Lippmann-Schwinger equation per lambda",
      "full verification pipeline per lambda",
      "empirical sup-norm profile over the lambda grid",
  };
  for (std::size_t k = 0; k < std::size(commands); ++k) {
    app.add_subcommand(commands[k].first, help[k])->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  Command cmd = Command::probe;
  for (const auto& [name, c] : commands) {
    if (app.got_subcommand(name)) cmd = c;
  }

  ExperimentConfig config;
  try {
    config = load_config(config_path, seed_override_from_env());
  } catch (const Error& e) {
    err << "lapkit: invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  }

  RunOptions opts;
  if (!output_dir.empty()) opts.output_dir = output_dir;
  opts.canonical = canonical;
  opts.jobs = jobs;
  try {
    const RunResult r = execute(cmd, config, opts);
    const std::string dir = opts.output_dir ? *opts.output_dir : config.output_dir;
    out << to_string(cmd) << ": " << r.report["records"].size() << " lambda(s), exit " << r.exit_code
        << ", report in " << dir << "/report.json\n";
    return r.exit_code;
  } catch (const Error& e) {
    err << "lapkit: " << e.what() << '\n';
    return e.kind() == ErrorKind::ConfigInvalid ? kExitConfig : kExitFailure;
  } catch (const std::exception& e) {
    err << "lapkit: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace lapkit
