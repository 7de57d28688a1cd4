// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lapkit/operator_core.hpp"

namespace lapkit {

/// Coupling values r at which lambda is an eigenvalue of H0 + r F*F.
struct ResonanceSet {
  double lambda = 0.0;
  std::vector<double> values;          // ascending, deduplicated
  std::vector<double> residual_norms;  // ||(H_r - lambda) chi|| / ||chi|| per value
  double scale = 1.0;                  // max(1, spectral radius of H0)
  int discarded = 0;                   // non-finite pencil eigenvalues dropped
};

/// Solves (H0 - lambda) chi = mu F*F chi and returns r = -mu.
///
/// With w = F chi the pencil becomes the standard Hermitian problem
/// F^{-*} (H0 - lambda) F^{-1} w = mu w, which avoids forming F*F and its
/// squared condition number.
inline ResonanceSet resonance_set(const HermitianOperator& h0, const Rigging& f, double lambda) {
  const Index n = h0.dimension();
  if (f.dimension() != n) throw Error(ErrorKind::DimensionMismatch, "rigging and operator differ");
  ResonanceSet out;
  out.lambda = lambda;
  out.scale = h0.scale();

  CMatrix shifted = h0.entries();
  shifted.diagonal().array() -= lambda;
  const CMatrix left = f.adjoint_solve(shifted);                     // F^{-*} (H0 - lambda)
  const CMatrix pencil = hermitian_part(f.adjoint_solve(left.adjoint()).adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(pencil);

  struct Entry {
    double r;
    CVector chi;
  };
  std::vector<Entry> raw;
  for (Index k = 0; k < n; ++k) {
    const double mu = es.eigenvalues()(k);
    if (!std::isfinite(mu)) {
      ++out.discarded;
      continue;
    }
    raw.push_back({-mu, f.solve(CVector(es.eigenvectors().col(k)))});
  }
  std::sort(raw.begin(), raw.end(), [](const Entry& a, const Entry& b) { return a.r < b.r; });

  double max_abs = 0.0;
  for (const auto& e : raw) max_abs = std::max(max_abs, std::abs(e.r));
  const double dedup = 1e-10 * (1.0 + max_abs);
  const CMatrix gram = f.gram();
  for (const auto& e : raw) {
    if (!out.values.empty() && std::abs(e.r - out.values.back()) <= dedup) continue;
    const CVector resid = shifted * e.chi + e.r * (gram * e.chi);
    out.values.push_back(e.r);
    out.residual_norms.push_back(resid.norm() / e.chi.norm());
  }
  return out;
}

inline double distance_to_resonance(const ResonanceSet& set, double r) {
  double d = kInf;
  for (double v : set.values) d = std::min(d, std::abs(r - v));
  return d;
}

inline bool is_resonant(const ResonanceSet& set, double r, double margin) {
  if (!(margin > 0.0)) throw Error(ErrorKind::InvalidSpec, "margin must be positive");
  return distance_to_resonance(set, r) < margin * set.scale;
}

inline bool is_resonant(const HermitianOperator& h0, const Rigging& f, double lambda, double r,
                        double margin) {
  return is_resonant(resonance_set(h0, f, lambda), r, margin);
}

/// k-th element (0-based) of 1, -1, 2, -2, 1/2, -1/2, 3, -3, 1/3, -1/3, ...
inline double nonresonant_candidate(int k) {
  if (k < 2) return k == 0 ? 1.0 : -1.0;
  const int group = (k - 2) / 4;  // 0 -> {2, -2, 1/2, -1/2}, 1 -> {3, -3, 1/3, -1/3}
  const int pos = (k - 2) % 4;
  const double m = static_cast<double>(group + 2);
  switch (pos) {
    case 0: return m;
    case 1: return -m;
    case 2: return 1.0 / m;
    default: return -1.0 / m;
  }
}

inline constexpr int kMaxCandidates = 64;

inline double pick_nonresonant_r(const ResonanceSet& set, double margin) {
  if (!(margin > 0.0)) throw Error(ErrorKind::InvalidSpec, "margin must be positive");
  for (int k = 0; k < kMaxCandidates; ++k) {
    const double r = nonresonant_candidate(k);
    if (distance_to_resonance(set, r) >= margin * set.scale) return r;
  }
  throw Error(ErrorKind::ExhaustedCandidates,
              "no non-resonant coupling among the first 64 candidates");
}

inline double pick_nonresonant_r(const HermitianOperator& h0, const Rigging& f, double lambda,
                                 double margin) {
  return pick_nonresonant_r(resonance_set(h0, f, lambda), margin);
}

/// First `count` non-resonant candidates, in sequence order.
inline std::vector<double> nonresonant_values(const ResonanceSet& set, double margin, int count) {
  std::vector<double> out;
  for (int k = 0; k < kMaxCandidates && static_cast<int>(out.size()) < count; ++k) {
    const double r = nonresonant_candidate(k);
    if (distance_to_resonance(set, r) >= margin * set.scale) out.push_back(r);
  }
  if (static_cast<int>(out.size()) < count) {
    throw Error(ErrorKind::ExhaustedCandidates, "not enough non-resonant candidates");
  }
  return out;
}

}  // namespace lapkit
