// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "lapkit/lap_probe.hpp"
#include "lapkit/resonance.hpp"

namespace lapkit {

/// Default relative rank tolerance: 100 * n * machine epsilon.
inline double default_rank_tol(Index n) { return 100.0 * static_cast<double>(n) * kEps; }

/// Homogeneous Lippmann-Schwinger problem (1 - r T_{lambda+i0}(H0 + r F*JF) J) u = 0.
struct LSProblem {
  HermitianOperator h0;
  Rigging rigging;
  double lambda = 0.0;
  double r = 1.0;
  DirectionOperator direction;
  YLadder ladder;          // its smallest rung is the y_min of the limit surrogate
  double probe_tol = 1e-7;
  double rank_tol = 0.0;   // relative to sigma_max of the LS matrix

  double y_min() const { return ladder.y_min(); }
};

struct LSProblemOptions {
  YLadder ladder{};
  double probe_tol = 1e-7;
  std::optional<double> rank_tol;
};

/// Builds a problem and checks the identity-direction coupling is not
/// resonant at margin rank_tol. Other directions are checked by the probe
/// when the LS matrix is formed.
inline LSProblem make_ls_problem(const HermitianOperator& h0, const Rigging& f, double lambda, double r,
                                 std::optional<DirectionOperator> direction = std::nullopt,
                                 const LSProblemOptions& opts = {}) {
  LSProblem p;
  p.h0 = h0;
  p.rigging = f;
  p.lambda = lambda;
  p.r = r;
  p.direction = direction ? *direction : DirectionOperator::identity(h0.dimension());
  p.ladder = opts.ladder;
  p.probe_tol = opts.probe_tol;
  p.rank_tol = opts.rank_tol ? *opts.rank_tol : default_rank_tol(h0.dimension());
  if (p.direction.dimension() != h0.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "direction operator has the wrong dimension");
  }
  if (p.direction.is_identity() && is_resonant(h0, f, lambda, r, p.rank_tol)) {
    throw Error(ErrorKind::ResonantCoupling, "coupling r = " + std::to_string(r) + " is resonant");
  }
  return p;
}

/// First non-resonant candidate (at `margin`) whose boundary value the
/// probe actually resolves on `ladder`. A coupling can sit outside the
/// margin yet close enough to a resonance that the ladder never reaches the
/// asymptotic regime; those are skipped.
inline double pick_regular_r(const HermitianOperator& h0, const Rigging& f, double lambda,
                             double margin, const YLadder& ladder, double probe_tol) {
  const ResonanceSet set = resonance_set(h0, f, lambda);
  for (int k = 0; k < kMaxCandidates; ++k) {
    const double r = nonresonant_candidate(k);
    if (distance_to_resonance(set, r) < margin * set.scale) continue;
    const LapProbeResult pr = probe_limit(perturbed_operator(h0, f, r), f, lambda, ladder, probe_tol);
    if (pr.verdict == ProbeVerdict::LimitExists) return r;
  }
  throw Error(ErrorKind::ExhaustedCandidates, "no resolvable non-resonant coupling among 64 candidates");
}

/// First `count` couplings accepted by pick_regular_r's rule, in order.
inline std::vector<double> regular_r_values(const HermitianOperator& h0, const Rigging& f,
                                            double lambda, double margin, const YLadder& ladder,
                                            double probe_tol, int count) {
  const ResonanceSet set = resonance_set(h0, f, lambda);
  std::vector<double> out;
  for (int k = 0; k < kMaxCandidates && static_cast<int>(out.size()) < count; ++k) {
    const double r = nonresonant_candidate(k);
    if (distance_to_resonance(set, r) < margin * set.scale) continue;
    const LapProbeResult pr = probe_limit(perturbed_operator(h0, f, r), f, lambda, ladder, probe_tol);
    if (pr.verdict == ProbeVerdict::LimitExists) out.push_back(r);
  }
  if (static_cast<int>(out.size()) < count) {
    throw Error(ErrorKind::ExhaustedCandidates, "not enough resolvable non-resonant couplings");
  }
  return out;
}

struct LSMatrix {
  CMatrix matrix;
  LapProbeResult probe;
};

/// M = 1 - r T_{lambda+i0}(H0 + r F*JF) J with the boundary value taken from
/// the probe's (extrapolated) limit estimate.
inline LSMatrix ls_matrix_with_probe(const LSProblem& p) {
  const HermitianOperator hr = perturbed_operator(p.h0, p.rigging, p.direction, p.r);
  LapProbeResult probe = probe_limit(hr, p.rigging, p.lambda, p.ladder, p.probe_tol);
  if (probe.verdict != ProbeVerdict::LimitExists) {
    throw Error(ErrorKind::ResonantCoupling, "boundary value does not exist at r = " +
                                                 std::to_string(p.r) + " (" +
                                                 to_string(probe.verdict) + ")");
  }
  const Index n = p.h0.dimension();
  CMatrix m = CMatrix::Identity(n, n) - p.r * (*probe.limit_estimate) * p.direction.entries();
  return {std::move(m), std::move(probe)};
}

inline CMatrix ls_matrix(const LSProblem& p) { return ls_matrix_with_probe(p).matrix; }

/// Numerical kernel of `m`: right singular vectors with sigma <= rank_tol * sigma_max.
inline SubspaceBasis null_space(const CMatrix& m, double rank_tol) {
  SubspaceBasis out;
  const Index n = m.cols();
  out.dimension_ambient = n;
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  const RVector& s = out.singular_values;
  const double smax = s.size() ? s(0) : 0.0;
  out.threshold = rank_tol * smax;
  Index rank = 0;
  while (rank < s.size() && s(rank) > out.threshold) ++rank;
  const Index k = n - rank;
  out.vectors = svd.matrixV().rightCols(k);
  if (k == 0 || rank == 0) {
    out.rank_gap = kInf;
  } else {
    const double kept_in = s(rank);
    out.rank_gap = kept_in == 0.0 ? kInf : s(rank - 1) / kept_in;
  }
  out.ill_conditioned = out.rank_gap < 10.0;
  for (Index c = 0; c < k; ++c) {
    out.defining_residual = std::max(out.defining_residual, (m * out.vectors.col(c)).norm());
  }
  return out;
}

struct LSSolution {
  CMatrix matrix;
  SubspaceBasis upsilon;
  LapProbeResult probe;
};

inline LSSolution solve_ls(const LSProblem& p) {
  LSMatrix lm = ls_matrix_with_probe(p);
  SubspaceBasis basis = null_space(lm.matrix, p.rank_tol);
  return {std::move(lm.matrix), std::move(basis), std::move(lm.probe)};
}

/// Orthonormal basis of the solution space of the homogeneous equation.
/// `ill_conditioned` is set when the singular-value gap around the cut is
/// below 10, i.e. the kernel dimension is ambiguous.
inline SubspaceBasis upsilon_space(const LSProblem& p) { return solve_ls(p).upsilon; }

inline double max_pairwise_angle(const std::vector<SubspaceBasis>& spaces) {
  double worst = 0.0;
  for (std::size_t a = 0; a < spaces.size(); ++a) {
    for (std::size_t b = a + 1; b < spaces.size(); ++b) {
      if (spaces[a].dimension() != spaces[b].dimension()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "kernel dimensions differ: " + std::to_string(spaces[a].dimension()) + " vs " +
                        std::to_string(spaces[b].dimension()));
      }
      worst = std::max(worst, max_principal_angle(spaces[a].vectors, spaces[b].vectors));
    }
  }
  return worst;
}

/// Largest principal angle between the kernels at p.r and at each alternative.
inline double check_r_independence(const LSProblem& p, const std::vector<double>& r_alternatives) {
  std::vector<SubspaceBasis> spaces{upsilon_space(p)};
  for (double r : r_alternatives) {
    LSProblem q = p;
    q.r = r;
    spaces.push_back(upsilon_space(q));
  }
  return max_pairwise_angle(spaces);
}

/// First coupling (p.r, then the candidate sequence) at which the boundary
/// value exists in direction `j`.
inline std::optional<double> regular_coupling_for(const LSProblem& p, const DirectionOperator& j) {
  std::vector<double> tries{p.r};
  for (int k = 0; k < kMaxCandidates; ++k) tries.push_back(nonresonant_candidate(k));
  for (double r : tries) {
    const HermitianOperator hr = perturbed_operator(p.h0, p.rigging, j, r);
    if (probe_limit(hr, p.rigging, p.lambda, p.ladder, p.probe_tol).verdict ==
        ProbeVerdict::LimitExists) {
      return r;
    }
  }
  return std::nullopt;
}

/// Largest principal angle between the kernel in direction p.direction and
/// the kernels in each alternative direction. Each direction uses the first
/// coupling from regular_coupling_for.
inline double check_J_independence(const LSProblem& p, const std::vector<DirectionOperator>& js) {
  std::vector<SubspaceBasis> spaces{upsilon_space(p)};
  for (const auto& j : js) {
    const std::optional<double> r = regular_coupling_for(p, j);
    if (!r) {
      throw Error(ErrorKind::NotRegularDirection,
                  "boundary value fails for every candidate coupling in this direction");
    }
    LSProblem q = p;
    q.direction = j;
    q.r = *r;
    spaces.push_back(upsilon_space(q));
  }
  return max_pairwise_angle(spaces);
}

struct BoundState {
  CVector chi;
  double eigen_residual = 0.0;  // ||H0 chi - lambda chi|| / ||chi||
};

/// chi = F^{-1} u for a kernel vector u, with its eigen-residual.
inline BoundState extract_bound_state(const CVector& u, const LSProblem& p, const CMatrix& m) {
  const double un = u.norm();
  if (un == 0.0) throw Error(ErrorKind::NotInKernel, "zero vector");
  const double smax = operator_norm(m);
  const double resid = (m * u).norm() / un;
  if (resid > p.rank_tol * std::max(smax, 1.0)) {
    throw Error(ErrorKind::NotInKernel, "||M u|| / ||u|| = " + std::to_string(resid));
  }
  BoundState out;
  out.chi = p.rigging.solve(u);
  const CVector hchi = p.h0.entries() * out.chi - p.lambda * out.chi;
  out.eigen_residual = hchi.norm() / out.chi.norm();
  return out;
}

inline BoundState extract_bound_state(const CVector& u, const LSProblem& p) {
  return extract_bound_state(u, p, ls_matrix(p));
}

}  // namespace lapkit
