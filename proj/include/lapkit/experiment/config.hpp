// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lapkit/io/json_io.hpp"
#include "lapkit/io/matrix_market.hpp"
#include "lapkit/lap_probe.hpp"
#include "lapkit/models.hpp"

namespace lapkit::experiment {

using nlohmann::json;
using io::ObjectReader;

inline constexpr int kSchemaVersion = 1;

/// Where H0 comes from: a generated model, a Matrix Market file or an
/// inline JSON matrix.
struct OperatorSource {
  enum class Kind { generated, matrix_market, inline_matrix } kind = Kind::generated;
  ModelSpec spec;
  std::string path;
  CMatrix matrix;
};

struct RiggingSource {
  enum class Kind { generated, matrix_market, inline_matrix } kind = Kind::generated;
  RiggingSpec spec;
  std::string path;
  CMatrix matrix;
};

struct DirectionSource {
  enum class Kind { identity, diagonal, inline_matrix } kind = Kind::identity;
  std::vector<double> weights;
  CMatrix matrix;
};

struct Tolerances {
  double probe_tol = 1e-7;
  std::optional<double> rank_tol;
  double margin = 1e-2;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string run_label = "run";
  OperatorSource model;
  RiggingSource rigging;
  std::optional<DirectionSource> direction;
  std::vector<double> lambdas;
  YLadder ladder;
  std::vector<double> deltas;
  Tolerances tolerances;
  std::optional<double> forced_r;
  std::uint64_t seed = 0;
  std::string output_dir = "lapkit-out";
  json source;  // the parsed document, echoed into reports
};

namespace detail {

inline std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty()) return path;
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base_dir) / p).string();
}

inline OperatorSource parse_model(const json& j, const std::string& base_dir,
                                  std::optional<std::uint64_t> seed_override) {
  if (!j.is_object()) ObjectReader::fail("model", "must be an object");
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    ObjectReader::fail("model.kind", "is required and must be a string");
  }
  const std::string kind = j.at("kind").get<std::string>();
  OperatorSource out;
  if (kind == "matrix_market") {
    ObjectReader r(j, "model");
    r.string("kind");
    out.kind = OperatorSource::Kind::matrix_market;
    out.path = resolve(r.string("path"), base_dir);
    r.finish();
  } else if (kind == "inline") {
    ObjectReader r(j, "model");
    r.string("kind");
    out.kind = OperatorSource::Kind::inline_matrix;
    out.matrix = io::matrix_from_json(r.raw("matrix"), "model.matrix");
    r.finish();
  } else {
    out.spec = io::model_spec_from_json(j, "model");
    if (seed_override) out.spec.seed = *seed_override;
  }
  return out;
}

inline RiggingSource parse_rigging(const json* j, const std::string& base_dir,
                                   std::optional<std::uint64_t> seed_override) {
  RiggingSource out;
  out.spec.kind = RiggingKind::identity;
  if (!j) return out;
  ObjectReader r(*j, "rigging");
  const std::string kind = r.string("kind");
  if (kind == "matrix_market") {
    out.kind = RiggingSource::Kind::matrix_market;
    out.path = resolve(r.string("path"), base_dir);
  } else if (kind == "inline") {
    out.kind = RiggingSource::Kind::inline_matrix;
    out.matrix = io::matrix_from_json(r.raw("matrix"), "rigging.matrix");
  } else {
    const auto rk = rigging_kind_from_string(kind);
    if (!rk) ObjectReader::fail("rigging.kind", "unknown rigging kind '" + kind + "'");
    out.spec.kind = *rk;
    if (*rk == RiggingKind::diagonal_weights) {
      out.spec.weights = r.numbers("weights");
      if (out.spec.weights.empty()) ObjectReader::fail("rigging.weights", "is required");
    }
    if (*rk == RiggingKind::random_well_conditioned) {
      if (auto b = r.optional_number("condition_bound")) {
        if (!(*b >= 1.0)) ObjectReader::fail("rigging.condition_bound", "must be >= 1");
        out.spec.condition_bound = *b;
      }
      out.spec.seed = r.unsigned_integer("seed", 0);
      if (seed_override) out.spec.seed = *seed_override;
    }
  }
  r.finish();
  return out;
}

inline DirectionSource parse_direction(const json& j) {
  ObjectReader r(j, "direction");
  DirectionSource out;
  const std::string kind = r.string("kind");
  if (kind == "identity") {
    out.kind = DirectionSource::Kind::identity;
  } else if (kind == "diagonal") {
    out.kind = DirectionSource::Kind::diagonal;
    out.weights = r.numbers("weights");
    if (out.weights.empty()) ObjectReader::fail("direction.weights", "is required");
  } else if (kind == "inline") {
    out.kind = DirectionSource::Kind::inline_matrix;
    out.matrix = io::matrix_from_json(r.raw("matrix"), "direction.matrix");
  } else {
    ObjectReader::fail("direction.kind", "unknown direction kind '" + kind + "'");
  }
  r.finish();
  return out;
}

inline std::vector<double> parse_lambdas(const json& j) {
  if (j.is_array()) {
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      out.push_back(ObjectReader::as_number(j[i], "lambdas[" + std::to_string(i) + "]"));
    }
    if (out.empty()) ObjectReader::fail("lambdas", "must not be empty");
    return out;
  }
  ObjectReader r(j, "lambdas");
  const double start = r.number("start");
  const double stop = r.number("stop");
  const auto count = r.integer("count");
  r.finish();
  if (count < 1) ObjectReader::fail("lambdas.count", "must be positive");
  if (count > 1 && !(stop > start)) ObjectReader::fail("lambdas.stop", "must exceed lambdas.start");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (std::int64_t k = 0; k < count; ++k) {
    out[static_cast<std::size_t>(k)] =
        count == 1 ? start : start + (stop - start) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  return out;
}

inline YLadder parse_ladder(const json& j) {
  ObjectReader r(j, "ladder");
  YLadder l;
  if (auto v = r.optional_number("y0")) {
    if (!(*v > 0.0)) ObjectReader::fail("ladder.y0", "must be > 0");
    l.y0 = *v;
  }
  if (auto v = r.optional_number("factor")) {
    if (!(*v > 0.0 && *v < 1.0)) ObjectReader::fail("ladder.factor", "must lie in (0,1)");
    l.factor = *v;
  }
  if (const json* c = r.optional_raw("count")) {
    const auto n = ObjectReader::as_integer(*c, "ladder.count");
    if (n < 2) ObjectReader::fail("ladder.count", "must be at least 2");
    l.count = static_cast<int>(n);
  }
  r.finish();
  return l;
}

inline Tolerances parse_tolerances(const json& j) {
  ObjectReader r(j, "tolerances");
  Tolerances t;
  const auto positive = [&](const std::string& key) -> std::optional<double> {
    auto v = r.optional_number(key);
    if (v && !(*v > 0.0)) ObjectReader::fail("tolerances." + key, "must be > 0");
    return v;
  };
  if (auto v = positive("probe_tol")) t.probe_tol = *v;
  t.rank_tol = positive("rank_tol");
  if (auto v = positive("margin")) t.margin = *v;
  r.finish();
  return t;
}

}  // namespace detail

/// Reads LAPKIT_SEED_OVERRIDE; an unparsable value is a configuration error.
inline std::optional<std::uint64_t> seed_override_from_env() {
  const char* v = std::getenv("LAPKIT_SEED_OVERRIDE");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long s = std::stoull(v, &used, 10);
    if (used != std::string(v).size()) throw std::invalid_argument(v);
    return static_cast<std::uint64_t>(s);
  } catch (const std::exception&) {
    throw Error(ErrorKind::ConfigInvalid, std::string("LAPKIT_SEED_OVERRIDE: not an integer '") + v + "'");
  }
}

/// Validates and decodes a configuration document. Relative matrix paths
/// resolve against `base_dir`.
inline ExperimentConfig parse_config(const json& doc, const std::string& base_dir = "",
                                     std::optional<std::uint64_t> seed_override = std::nullopt) {
  ExperimentConfig c;
  c.source = doc;
  if (!doc.is_object()) ObjectReader::fail("$", "configuration must be a JSON object");
  ObjectReader r(doc, "$");
  const auto version = ObjectReader::as_integer(r.raw("schema_version"), "schema_version");
  if (version != kSchemaVersion) {
    ObjectReader::fail("schema_version", "unsupported version " + std::to_string(version));
  }
  if (auto s = r.optional_string("run_label")) c.run_label = *s;
  c.model = detail::parse_model(r.raw("model"), base_dir, seed_override);
  c.rigging = detail::parse_rigging(r.optional_raw("rigging"), base_dir, seed_override);
  if (const json* d = r.optional_raw("direction")) c.direction = detail::parse_direction(*d);
  c.lambdas = detail::parse_lambdas(r.raw("lambdas"));
  if (const json* l = r.optional_raw("ladder")) c.ladder = detail::parse_ladder(*l);
  c.deltas = r.numbers("deltas");
  for (std::size_t i = 0; i < c.deltas.size(); ++i) {
    if (!(c.deltas[i] > 0.0)) ObjectReader::fail("deltas[" + std::to_string(i) + "]", "must be > 0");
  }
  if (const json* t = r.optional_raw("tolerances")) c.tolerances = detail::parse_tolerances(*t);
  c.forced_r = r.optional_number("forced_r");
  c.seed = r.unsigned_integer("seed", 0);
  if (seed_override) c.seed = *seed_override;
  if (auto s = r.optional_string("output_dir")) c.output_dir = *s;
  r.finish();
  return c;
}

inline ExperimentConfig load_config(const std::string& path,
                                    std::optional<std::uint64_t> seed_override = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigInvalid, path + ": cannot open");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigInvalid, path + ": " + e.what());
  }
  const std::string base = std::filesystem::path(path).parent_path().string();
  return parse_config(doc, base, seed_override);
}

// ---- materialisation ------------------------------------------------------

inline HermitianOperator build_model(const ExperimentConfig& c) {
  switch (c.model.kind) {
    case OperatorSource::Kind::generated: return build_operator(c.model.spec);
    case OperatorSource::Kind::matrix_market: return io::load_operator(c.model.path);
    case OperatorSource::Kind::inline_matrix: return HermitianOperator(c.model.matrix);
  }
  throw Error(ErrorKind::ConfigInvalid, "model: unknown source");
}

/// Size-free rigging kinds take the operator dimension.
inline Rigging build_config_rigging(const ExperimentConfig& c, Index n) {
  Rigging f = [&] {
    switch (c.rigging.kind) {
      case RiggingSource::Kind::matrix_market: return io::load_rigging(c.rigging.path);
      case RiggingSource::Kind::inline_matrix: return Rigging(c.rigging.matrix);
      case RiggingSource::Kind::generated: break;
    }
    RiggingSpec spec = c.rigging.spec;
    spec.size = n;
    return build_rigging(spec);
  }();
  if (f.dimension() != n) {
    throw Error(ErrorKind::ConfigInvalid, "rigging: dimension " + std::to_string(f.dimension()) +
                                              " does not match the operator (" + std::to_string(n) + ")");
  }
  return f;
}

inline std::optional<DirectionOperator> build_direction(const ExperimentConfig& c, Index n) {
  if (!c.direction) return std::nullopt;
  CMatrix j;
  switch (c.direction->kind) {
    case DirectionSource::Kind::identity: j = CMatrix::Identity(n, n); break;
    case DirectionSource::Kind::diagonal: {
      if (static_cast<Index>(c.direction->weights.size()) != n) {
        throw Error(ErrorKind::ConfigInvalid, "direction.weights: length must equal the operator dimension");
      }
      j = CMatrix::Zero(n, n);
      for (Index k = 0; k < n; ++k) j(k, k) = c.direction->weights[static_cast<std::size_t>(k)];
      break;
    }
    case DirectionSource::Kind::inline_matrix: j = c.direction->matrix; break;
  }
  if (j.rows() != n || j.cols() != n) {
    throw Error(ErrorKind::ConfigInvalid, "direction: dimension does not match the operator");
  }
  return DirectionOperator(j);
}

}  // namespace lapkit::experiment
