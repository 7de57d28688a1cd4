// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "lapkit/experiment/config.hpp"
#include "lapkit/lapkit.hpp"

namespace lapkit::experiment {

inline constexpr const char* kToolkitVersion = "0.1.0";

enum class Command { probe, resonances, solve_ls, verify, sweep };

inline std::string to_string(Command c) {
  switch (c) {
    case Command::probe: return "probe";
    case Command::resonances: return "resonances";
    case Command::solve_ls: return "solve-ls";
    case Command::verify: return "verify";
    case Command::sweep: return "sweep";
  }
  return "unknown";
}

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitFailure = 3;

struct RunOptions {
  std::optional<std::string> output_dir;  // overrides the config
  bool canonical = false;                 // drop wall_time and generated_at
  unsigned jobs = 1;
};

/// A CSV artifact held in memory until the assembler writes it.
struct CsvFile {
  std::string name;
  std::string content;
};

struct RunResult {
  int exit_code = kExitOk;
  json report;
  std::vector<CsvFile> csv;
};

// ---- formatting and hashing -------------------------------------------------

/// 17 significant digits in scientific notation.
inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) { row_strings(header); }

  void row(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double c : cells) s.push_back(fmt(c));
    row_strings(s);
  }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

inline json error_json(const Error& e) { return {{"kind", to_string(e.kind())}, {"message", e.what()}}; }

// ---- per-command drivers ----------------------------------------------------

namespace detail {

struct Fixture {
  HermitianOperator h0;
  Rigging f;
  std::optional<DirectionOperator> j;
};

inline Fixture materialise(const ExperimentConfig& c) {
  try {
    Fixture fx{build_model(c), Rigging::identity(1), std::nullopt};
    fx.f = build_config_rigging(c, fx.h0.dimension());
    fx.j = build_direction(c, fx.h0.dimension());
    return fx;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    throw Error(ErrorKind::ConfigInvalid, std::string("model/rigging: ") + e.what());
  }
}

inline LSProblemOptions ls_options(const ExperimentConfig& c) {
  return {c.ladder, c.tolerances.probe_tol, c.tolerances.rank_tol};
}

inline std::string indexed_name(const std::string& stem, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%03zu", i);
  return stem + buf + ".csv";
}

inline json classification_json(const Classification& c) {
  return {{"point_class", to_string(c.point_class)},
          {"regular_r", c.regular_r ? json(*c.regular_r) : json(nullptr)},
          {"inconclusive_warning", c.inconclusive_warning}};
}

/// The coupling a pipeline uses: the configured override, else the first
/// non-resonant candidate the probe resolves.
inline double choose_r(const ExperimentConfig& c, const Fixture& fx, double lambda) {
  if (c.forced_r) return *c.forced_r;
  return pick_regular_r(fx.h0, fx.f, lambda, c.tolerances.margin, c.ladder, c.tolerances.probe_tol);
}

/// Up to `count` further couplings, other than p.r, at which the boundary
/// value exists in p's direction (and that are non-resonant when J = 1).
inline std::vector<double> alternative_couplings(const LSProblem& p, const ResonanceSet& set,
                                                 double margin, int count) {
  std::vector<double> out;
  for (int k = 0; k < kMaxCandidates && static_cast<int>(out.size()) < count; ++k) {
    const double r = nonresonant_candidate(k);
    if (r == p.r) continue;
    if (p.direction.is_identity() && distance_to_resonance(set, r) < margin * set.scale) continue;
    const HermitianOperator hr = perturbed_operator(p.h0, p.rigging, p.direction, r);
    if (probe_limit(hr, p.rigging, p.lambda, p.ladder, p.probe_tol).verdict == ProbeVerdict::LimitExists) {
      out.push_back(r);
    }
  }
  return out;
}

/// Identity, a seeded positive diagonal, and the configured direction (or a
/// second seeded diagonal when none is configured).
inline std::vector<DirectionOperator> independence_directions(const Fixture& fx, std::uint64_t seed) {
  const Index n = fx.h0.dimension();
  const rng::Stream s(seed, rng::kStreamDirection);
  const auto seeded = [&](std::uint64_t offset) {
    CMatrix j = CMatrix::Zero(n, n);
    for (Index k = 0; k < n; ++k) j(k, k) = s.uniform(offset + static_cast<std::uint64_t>(k), 0.5, 1.5);
    return DirectionOperator(j);
  };
  std::vector<DirectionOperator> out{DirectionOperator::identity(n), seeded(0)};
  out.push_back(fx.j ? *fx.j : seeded(static_cast<std::uint64_t>(n)));
  return out;
}

inline constexpr double kIndependenceTol = 1e-6;
inline constexpr double kBoundStateTol = 1e-7;

}  // namespace detail

inline RunResult run_probe(const ExperimentConfig& c, const RunOptions& o) {
  const auto fx = detail::materialise(c);
  std::vector<LapProbeResult> results(c.lambdas.size());
  fx.h0.spectrum();
  parallel_for(c.lambdas.size(), o.jobs, [&](std::size_t i) {
    results[i] = probe_limit(fx.h0, fx.f, c.lambdas[i], c.ladder, c.tolerances.probe_tol);
  });
  RunResult out;
  CsvWriter csv({"lambda", "y", "norm", "cauchy_diff"});
  json records = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (r.verdict == ProbeVerdict::Inconclusive) out.exit_code = kExitInconclusive;
    records.push_back({{"lambda", c.lambdas[i]}, {"probe", io::probe_summary_to_json(r)}});
    for (std::size_t k = 0; k < r.norm_profile.size(); ++k) {
      std::vector<std::string> row{fmt(c.lambdas[i]), fmt(r.norm_profile[k].y), fmt(r.norm_profile[k].value),
                                   k < r.cauchy_profile.size() ? fmt(r.cauchy_profile[k].value) : ""};
      csv.row_strings(row);
    }
  }
  out.report["records"] = records;
  out.csv.push_back({"probe.csv", csv.str()});
  return out;
}

inline RunResult run_resonances(const ExperimentConfig& c, const RunOptions& o) {
  const auto fx = detail::materialise(c);
  std::vector<ResonanceSet> sets(c.lambdas.size());
  parallel_for(c.lambdas.size(), o.jobs,
               [&](std::size_t i) { sets[i] = resonance_set(fx.h0, fx.f, c.lambdas[i]); });
  RunResult out;
  CsvWriter csv({"lambda", "r", "residual"});
  json records = json::array();
  for (std::size_t i = 0; i < sets.size(); ++i) {
    json rec{{"lambda", c.lambdas[i]}, {"resonance_set", io::resonance_to_json(sets[i])}};
    try {
      rec["chosen_r"] = pick_nonresonant_r(sets[i], c.tolerances.margin);
    } catch (const Error& e) {
      rec["chosen_r"] = nullptr;
      rec["error"] = error_json(e);
      out.exit_code = kExitFailure;
    }
    records.push_back(rec);
    for (std::size_t k = 0; k < sets[i].values.size(); ++k) {
      csv.row({c.lambdas[i], sets[i].values[k], sets[i].residual_norms[k]});
    }
  }
  out.report["records"] = records;
  out.csv.push_back({"resonances.csv", csv.str()});
  return out;
}

inline RunResult run_solve_ls(const ExperimentConfig& c, const RunOptions& o) {
  const auto fx = detail::materialise(c);
  std::vector<json> records(c.lambdas.size());
  std::vector<std::vector<std::vector<double>>> rows(c.lambdas.size());
  std::vector<char> failed(c.lambdas.size(), 0);
  fx.h0.spectrum();
  parallel_for(c.lambdas.size(), o.jobs, [&](std::size_t i) {
    const double lambda = c.lambdas[i];
    json rec{{"lambda", lambda}};
    try {
      const double r = detail::choose_r(c, fx, lambda);
      rec["chosen_r"] = r;
      const LSProblem p = make_ls_problem(fx.h0, fx.f, lambda, r, fx.j, detail::ls_options(c));
      const LSSolution sol = solve_ls(p);
      rec["probe"] = io::probe_summary_to_json(sol.probe);
      rec["upsilon"] = io::subspace_to_json(sol.upsilon);
      json residuals = json::array();
      double worst = 0.0;
      for (Index k = 0; k < sol.upsilon.dimension(); ++k) {
        const BoundState b = extract_bound_state(sol.upsilon.vectors.col(k), p, sol.matrix);
        residuals.push_back(b.eigen_residual);
        worst = std::max(worst, b.eigen_residual);
      }
      rec["bound_state_residuals"] = residuals;
      rec["passed"] = worst <= detail::kBoundStateTol;
      if (worst > detail::kBoundStateTol) failed[i] = 1;
      for (Index k = 0; k < sol.upsilon.singular_values.size(); ++k) {
        rows[i].push_back({lambda, static_cast<double>(k), sol.upsilon.singular_values(k)});
      }
    } catch (const Error& e) {
      rec["error"] = error_json(e);
      rec["passed"] = false;
      failed[i] = 1;
    }
    records[i] = rec;
  });
  RunResult out;
  CsvWriter csv({"lambda", "index", "singular_value"});
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (failed[i]) out.exit_code = kExitFailure;
    for (const auto& row : rows[i]) csv.row(row);
  }
  out.report["records"] = records;
  out.csv.push_back({"ls_singular_values.csv", csv.str()});
  return out;
}

/// Full pipeline per lambda: classification, resonances, coupling choice,
/// solution space, r- and J-independence, both inclusions of the
/// concentration theorem and the bound-state residuals.
inline RunResult run_verify(const ExperimentConfig& c, const RunOptions& o) {
  const auto fx = detail::materialise(c);
  fx.h0.spectrum();
  RunResult out;
  json records = json::array();
  std::vector<double> first_candidates;
  for (int k = 0; k < 8; ++k) first_candidates.push_back(nonresonant_candidate(k));

  for (std::size_t i = 0; i < c.lambdas.size(); ++i) {
    const double lambda = c.lambdas[i];
    json rec{{"lambda", lambda}};
    json verdicts = json::object();
    bool pass = true;
    try {
      rec["classification"] = detail::classification_json(
          classify_point(fx.h0, fx.f, lambda, first_candidates, c.ladder, c.tolerances.probe_tol));
      const ResonanceSet set = resonance_set(fx.h0, fx.f, lambda);
      rec["resonance_set"] = io::resonance_to_json(set);
      const double r = detail::choose_r(c, fx, lambda);
      rec["chosen_r"] = r;
      const LSProblem p = make_ls_problem(fx.h0, fx.f, lambda, r, fx.j, detail::ls_options(c));
      const LSSolution sol = solve_ls(p);
      rec["upsilon_dimension"] = sol.upsilon.dimension();
      rec["rank_gap"] = io::finite_or_null(sol.upsilon.rank_gap);

      json angles = json::object();
      const auto alts = detail::alternative_couplings(p, set, c.tolerances.margin, 2);
      angles["r_values"] = alts;
      const double r_angle = check_r_independence(p, alts);
      angles["r"] = r_angle;
      verdicts["r_independence"] = alts.size() == 2 && r_angle <= detail::kIndependenceTol;
      const double j_angle = check_J_independence(p, detail::independence_directions(fx, c.seed));
      angles["J"] = j_angle;
      verdicts["J_independence"] = j_angle <= detail::kIndependenceTol;
      rec["independence_angles"] = angles;

      Theorem1Options topts;
      topts.deltas = c.deltas;
      topts.ladder = c.ladder;
      topts.seed = c.seed;
      topts.jobs = o.jobs;
      const Theorem1Report t1 = verify_theorem1(p, topts);
      rec["theorem1"] = {{"subset_pass", t1.subset_pass},
                         {"superset_pass", t1.superset_pass},
                         {"superset_angle", t1.superset_angle},
                         {"eigenspace_dimension", t1.eigenspace_dimension},
                         {"deltas", t1.deltas},
                         {"diagnostics", t1.diagnostics}};
      verdicts["theorem1_subset"] = t1.subset_pass;
      verdicts["theorem1_superset"] = t1.superset_pass;

      double worst = 0.0;
      for (Index k = 0; k < sol.upsilon.dimension(); ++k) {
        worst = std::max(worst, extract_bound_state(sol.upsilon.vectors.col(k), p, sol.matrix).eigen_residual);
      }
      rec["bound_state_residual"] = worst;
      verdicts["bound_states"] = worst <= detail::kBoundStateTol;

      const std::string name = detail::indexed_name("theorem1", i);
      CsvWriter csv({"u_index", "delta", "y", "chi_norm", "concentration_out", "approx_residual", "tail_integral"});
      for (const auto& t : t1.records) {
        csv.row({static_cast<double>(t.u_index), t.delta, t.y, t.chi_norm, t.concentration_out,
                 t.approx_residual, t.tail_integral});
      }
      out.csv.push_back({name, csv.str()});
      rec["profile"] = name;
      for (const auto& [k, v] : verdicts.items()) pass = pass && v.get<bool>();
    } catch (const Error& e) {
      rec["error"] = error_json(e);
      pass = false;
    }
    rec["verdicts"] = verdicts;
    rec["passed"] = pass;
    if (!pass) out.exit_code = kExitFailure;
    records.push_back(rec);
  }
  out.report["records"] = records;
  return out;
}

inline RunResult run_sweep(const ExperimentConfig& c, const RunOptions& o) {
  const auto fx = detail::materialise(c);
  const auto pts = sup_norm_profile(fx.h0, fx.f, c.lambdas, c.ladder, o.jobs);
  RunResult out;
  CsvWriter csv({"lambda", "sup_norm", "argmax_y"});
  json records = json::array();
  for (const auto& p : pts) {
    records.push_back({{"lambda", p.lambda}, {"sup_norm", p.sup_norm}, {"argmax_y", p.argmax_y}});
    csv.row({p.lambda, p.sup_norm, p.argmax_y});
  }
  out.report["records"] = records;
  out.csv.push_back({"sweep.csv", csv.str()});
  return out;
}

// ---- assembly -----------------------------------------------------------------

inline RunResult run_command(Command cmd, const ExperimentConfig& c, const RunOptions& o) {
  switch (cmd) {
    case Command::probe: return run_probe(c, o);
    case Command::resonances: return run_resonances(c, o);
    case Command::solve_ls: return run_solve_ls(c, o);
    case Command::verify: return run_verify(c, o);
    case Command::sweep: return run_sweep(c, o);
  }
  throw Error(ErrorKind::ConfigInvalid, "unknown command");
}

/// Adds the envelope fields shared by every report.
inline void finish_report(RunResult& r, Command cmd, const ExperimentConfig& c, const RunOptions& o,
                          double wall_seconds) {
  json& rep = r.report;
  rep["schema_version"] = kSchemaVersion;
  rep["toolkit_version"] = kToolkitVersion;
  rep["command"] = to_string(cmd);
  rep["run_label"] = c.run_label;
  rep["config_echo"] = c.source;
  rep["effective_seed"] = c.seed;
  rep["exit_code"] = r.exit_code;
  json names = json::array();
  for (const auto& f : r.csv) names.push_back(f.name);
  rep["artifacts"] = names;
  if (!o.canonical) {
    rep["wall_time"] = wall_seconds;
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    rep["generated_at"] = buf;
  }
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigInvalid, "cannot write '" + p.string() + "'");
  out << content;
}

/// Writes every CSV, report.json and manifest.json (sorted artifact list
/// with SHA-256 digests) into `dir`.
inline void write_outputs(const RunResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& f : r.csv) files.emplace_back(f.name, f.content);
  files.emplace_back("report.json", r.report.dump(2) + "\n");
  std::sort(files.begin(), files.end());
  json artifacts = json::array();
  for (const auto& [name, content] : files) {
    write_file(dir / name, content);
    artifacts.push_back({{"path", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
  }
  const json manifest{{"schema_version", kSchemaVersion}, {"toolkit_version", kToolkitVersion},
                      {"artifacts", artifacts}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

/// Runs one command end to end. Configuration problems surface as
/// ConfigInvalid errors; everything else is recorded in the report.
inline RunResult execute(Command cmd, const ExperimentConfig& c, const RunOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult r = run_command(cmd, c, o);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  finish_report(r, cmd, c, o, wall);
  write_outputs(r, o.output_dir ? *o.output_dir : c.output_dir);
  return r;
}

}  // namespace lapkit::experiment
