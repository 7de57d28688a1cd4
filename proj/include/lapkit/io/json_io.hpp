// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lapkit/lap_probe.hpp"
#include "lapkit/ls_solver.hpp"
#include "lapkit/models.hpp"
#include "lapkit/resonance.hpp"

namespace lapkit::io {

using nlohmann::json;

/// Strict reader over one JSON object: every access is recorded and
/// finish() rejects keys nobody asked for. Errors name the dotted path.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "must be an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::ConfigInvalid, path + ": " + what);
  }

  std::string child(const std::string& key) const { return path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(child(key), "is required");
    return j_.at(key);
  }

  const json* optional_raw(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  double number(const std::string& key) { return as_number(raw(key), child(key)); }

  std::optional<double> optional_number(const std::string& key) {
    const json* v = optional_raw(key);
    if (!v) return std::nullopt;
    return as_number(*v, child(key));
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) fail(child(key), "must be a string");
    return v.get<std::string>();
  }

  std::optional<std::string> optional_string(const std::string& key) {
    const json* v = optional_raw(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) fail(child(key), "must be a string");
    return v->get<std::string>();
  }

  std::int64_t integer(const std::string& key) { return as_integer(raw(key), child(key)); }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    const json* v = optional_raw(key);
    if (!v) return fallback;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
      fail(child(key), "must be a nonnegative integer");
    }
    return v->get<std::uint64_t>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json* v = optional_raw(key);
    if (!v) return {};
    if (!v->is_array()) fail(child(key), "must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.push_back(as_number((*v)[i], child(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(child(it.key()), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "must be finite");
    return d;
  }

  static std::int64_t as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "must be an integer");
    return v.get<std::int64_t>();
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// ---- matrices -------------------------------------------------------------

/// {rows, cols, entries: [[re, im], ...]} in row-major order.
inline json matrix_to_json(const CMatrix& m) {
  json entries = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) entries.push_back({m(i, j).real(), m(i, j).imag()});
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

inline CMatrix matrix_from_json(const json& j, const std::string& path = "matrix") {
  ObjectReader r(j, path);
  const auto rows = r.integer("rows");
  const auto cols = r.integer("cols");
  if (rows <= 0 || cols <= 0) ObjectReader::fail(path, "rows and cols must be positive");
  const json& entries = r.raw("entries");
  r.finish();
  if (!entries.is_array() || entries.size() != static_cast<std::size_t>(rows * cols)) {
    ObjectReader::fail(path + ".entries", "must hold rows*cols [re, im] pairs");
  }
  CMatrix m(rows, cols);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const json& e = entries[k];
    const std::string ep = path + ".entries[" + std::to_string(k) + "]";
    if (!e.is_array() || e.size() != 2) ObjectReader::fail(ep, "must be [re, im]");
    m(static_cast<Index>(k) / cols, static_cast<Index>(k) % cols) =
        cplx(ObjectReader::as_number(e[0], ep), ObjectReader::as_number(e[1], ep));
  }
  return m;
}

/// Interleaved [re0, im0, re1, im1, ...].
inline json vector_to_json(const CVector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    out.push_back(v(i).real());
    out.push_back(v(i).imag());
  }
  return out;
}

inline CVector vector_from_json(const json& j) {
  if (!j.is_array() || j.size() % 2 != 0) {
    throw Error(ErrorKind::ParseError, "vector must be an interleaved re/im array");
  }
  CVector v(static_cast<Index>(j.size() / 2));
  for (Index i = 0; i < v.size(); ++i) {
    v(i) = cplx(j[2 * static_cast<std::size_t>(i)].get<double>(),
                j[2 * static_cast<std::size_t>(i) + 1].get<double>());
  }
  return v;
}

/// Non-finite doubles (an infinite rank gap) become null.
inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json subspace_to_json(const SubspaceBasis& b) {
  json vectors = json::array();
  for (Index c = 0; c < b.vectors.cols(); ++c) vectors.push_back(vector_to_json(b.vectors.col(c)));
  json sv = json::array();
  for (Index k = 0; k < b.singular_values.size(); ++k) sv.push_back(b.singular_values(k));
  return {{"dimension_ambient", b.dimension_ambient},
          {"dimension", b.dimension()},
          {"vectors", vectors},
          {"singular_values", sv},
          {"rank_gap", finite_or_null(b.rank_gap)},
          {"threshold", b.threshold},
          {"defining_residual", b.defining_residual},
          {"ill_conditioned", b.ill_conditioned}};
}

inline json resonance_to_json(const ResonanceSet& s) {
  return {{"lambda", s.lambda},
          {"values", s.values},
          {"residual_norms", s.residual_norms},
          {"scale", s.scale},
          {"discarded", s.discarded}};
}

inline json probe_summary_to_json(const LapProbeResult& p) {
  json out{{"verdict", to_string(p.verdict)},
           {"extrapolated", p.extrapolated},
           {"final_norm", p.norm_profile.empty() ? 0.0 : p.norm_profile.back().value},
           {"final_cauchy", p.cauchy_profile.empty() ? json(nullptr) : json(p.cauchy_profile.back().value)},
           {"divergence_exponent", p.divergence_exponent ? json(*p.divergence_exponent) : json(nullptr)}};
  if (p.limit_estimate) out["limit_estimate_norm"] = operator_norm(*p.limit_estimate);
  return out;
}

// ---- model specs ----------------------------------------------------------

inline json model_spec_to_json(const ModelSpec& s) {
  json params = json::object();
  for (const auto& [k, v] : s.params) params[k] = v;
  json out{{"kind", to_string(s.kind)}, {"size", s.size}, {"seed", s.seed}};
  if (!s.params.empty()) out["params"] = params;
  if (!s.values.empty()) out["values"] = s.values;
  return out;
}

/// Parses a generated-model object (kind already known to be a ModelKind).
inline ModelSpec model_spec_from_json(const json& j, const std::string& path = "model") {
  ObjectReader r(j, path);
  ModelSpec s;
  const std::string kind = r.string("kind");
  const auto mk = model_kind_from_string(kind);
  if (!mk) ObjectReader::fail(r.child("kind"), "unknown model kind '" + kind + "'");
  s.kind = *mk;
  s.size = r.integer("size");
  if (s.size < 1) ObjectReader::fail(r.child("size"), "must be positive");
  s.seed = r.unsigned_integer("seed", 0);
  s.values = r.numbers("values");
  if (const json* params = r.optional_raw("params")) {
    if (!params->is_object()) ObjectReader::fail(r.child("params"), "must be an object");
    static const std::set<std::string> allowed{"scale", "W", "lambda", "multiplicity", "gap", "spread"};
    for (auto it = params->begin(); it != params->end(); ++it) {
      const std::string p = r.child("params") + "." + it.key();
      if (!allowed.count(it.key())) ObjectReader::fail(p, "unknown parameter");
      s.params[it.key()] = ObjectReader::as_number(it.value(), p);
    }
  }
  r.finish();
  try {
    validate(s);
  } catch (const Error& e) {
    ObjectReader::fail(path, e.what());
  }
  return s;
}

inline json rigging_spec_to_json(const RiggingSpec& s) {
  json out{{"kind", to_string(s.kind)}};
  if (s.kind == RiggingKind::diagonal_weights) out["weights"] = s.weights;
  if (s.kind == RiggingKind::random_well_conditioned) {
    out["condition_bound"] = s.condition_bound;
    out["seed"] = s.seed;
  }
  return out;
}

}  // namespace lapkit::io
