// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lapkit/ls_solver.hpp"
#include "lapkit/rng.hpp"

namespace lapkit {

/// One vector u of the solution space followed along a y-ladder, watched
/// through the spectral window (lambda - delta, lambda + delta) of H0.
struct Thm1Run {
  LSProblem problem;
  CVector u;
  double delta = 0.1;
  YLadder ladder;
};

struct Thm1Record {
  int u_index = 0;
  double delta = 0.0;
  double y = 0.0;
  double chi_norm = 0.0;           // ||u - F f||
  double concentration_out = 0.0;  // ||(1 - E_window) f|| / ||f||
  double approx_residual = 0.0;    // ||u - F E_window f|| / ||u||
  double tail_integral = 0.0;      // integral of Im<f, R_{x+iy}(H0) f> off the window
  double f_norm = 0.0;
  double triangle_bound = 0.0;     // chi/||u|| + ||F|| ||(1 - E) f|| / ||u||
};

namespace detail {

inline HermitianOperator coupled_operator(const LSProblem& p) {
  return perturbed_operator(p.h0, p.rigging, p.direction, p.r);
}

/// ∫_{-inf}^{a} y / ((x - e)^2 + y^2) dx, free of cancellation for small y.
inline double lorentz_mass_below(double a, double e, double y) { return std::atan2(y, e - a); }
/// ∫_{b}^{inf} y / ((x - e)^2 + y^2) dx
inline double lorentz_mass_above(double b, double e, double y) { return std::atan2(y, b - e); }

/// |<q_k, v>|^2 for every eigenvector q_k of h.
inline RVector spectral_weights(const HermitianOperator& h, const CVector& v) {
  return (h.spectrum().eigenvectors.adjoint() * v).cwiseAbs2();
}

inline void require_kernel_vector(const LSProblem& p, const CMatrix& m, const CVector& u) {
  const double un = u.norm();
  const double smax = operator_norm(m);
  if (un == 0.0 || (m * u).norm() > p.rank_tol * std::max(smax, 1.0) * un) {
    throw Error(ErrorKind::PreconditionFailed,
                "u does not solve the homogeneous Lippmann-Schwinger equation");
  }
}

}  // namespace detail

/// f_{lambda+iy} = r R_{lambda+iy}(H_r) F* J u, with H_r = H0 + r F*JF.
/// For r = 1 and J = 1 this is R_{lambda+iy}(H_1) F* u; the factor r J makes
/// F f -> u along the ladder for any admissible coupling.
inline CVector f_vector(const Thm1Run& run, double y) {
  if (!(y > 0.0)) throw Error(ErrorKind::InvalidSpec, "y must be positive");
  const LSProblem& p = run.problem;
  const CVector src = p.r * (p.rigging.entries().adjoint() * (p.direction.entries() * run.u));
  return resolvent_apply(detail::coupled_operator(p), ComplexEnergy{p.lambda, y}, src);
}

/// ∫ over R minus (lambda - delta, lambda + delta) of Im<f, R_{x+iy}(H0) f> dx,
/// summed in closed form over the eigencomponents of f.
inline double tail_integral_of(const HermitianOperator& h0, const CVector& f, double lambda,
                               double delta, double y) {
  const RVector w = detail::spectral_weights(h0, f);
  const RVector& ev = h0.eigenvalues();
  double total = 0.0;
  for (Index k = 0; k < ev.size(); ++k) {
    total += w(k) * (detail::lorentz_mass_below(lambda - delta, ev(k), y) +
                     detail::lorentz_mass_above(lambda + delta, ev(k), y));
  }
  return total;
}

inline double tail_integral(const Thm1Run& run, double y) {
  return tail_integral_of(run.problem.h0, f_vector(run, y), run.problem.lambda, run.delta, y);
}

/// Per-ladder records for one run. Throws PreconditionFailed when u is not
/// a kernel vector.
inline std::vector<Thm1Record> theorem1_profile(const Thm1Run& run, int u_index = 0) {
  const LSProblem& p = run.problem;
  const CMatrix m = ls_matrix(p);
  detail::require_kernel_vector(p, m, run.u);
  const HermitianOperator h1 = detail::coupled_operator(p);
  const CMatrix window = spectral_projector(p.h0, Interval{p.lambda - run.delta, p.lambda + run.delta});
  const CVector src = p.r * (p.rigging.entries().adjoint() * (p.direction.entries() * run.u));
  const double un = run.u.norm();
  std::vector<Thm1Record> out;
  for (double y : run.ladder.values()) {
    const CVector f = resolvent_apply(h1, ComplexEnergy{p.lambda, y}, src);
    const CVector inside = window * f;
    const CVector outside = f - inside;
    Thm1Record rec;
    rec.u_index = u_index;
    rec.delta = run.delta;
    rec.y = y;
    rec.f_norm = f.norm();
    rec.chi_norm = (run.u - p.rigging.entries() * f).norm();
    rec.concentration_out = rec.f_norm == 0.0 ? 0.0 : outside.norm() / rec.f_norm;
    rec.approx_residual = (run.u - p.rigging.entries() * inside).norm() / un;
    rec.tail_integral = tail_integral_of(p.h0, f, p.lambda, run.delta, y);
    rec.triangle_bound = rec.chi_norm / un + p.rigging.norm() * outside.norm() / un;
    out.push_back(rec);
  }
  return out;
}

inline std::vector<double> concentration_profile(const Thm1Run& run) {
  std::vector<double> out;
  for (const auto& rec : theorem1_profile(run)) out.push_back(rec.concentration_out);
  return out;
}

/// ||u - F E_(lambda-delta, lambda+delta)(H0) f_{lambda+iy}|| / ||u||
inline double approx_residual(const Thm1Run& run, double y) {
  const LSProblem& p = run.problem;
  detail::require_kernel_vector(p, ls_matrix(p), run.u);
  const CVector f = f_vector(run, y);
  const CMatrix window = spectral_projector(p.h0, Interval{p.lambda - run.delta, p.lambda + run.delta});
  return (run.u - p.rigging.entries() * (window * f)).norm() / run.u.norm();
}

struct IdentityCheck {
  double residual = 0.0;
  bool near_singular = false;
};

/// Both sides of the imaginary-part identity for
/// f = R_{lambda+iy}(H1) F* u on the unit coupling H1 = H0 + F*F:
///
///   Im<f, R_{x+iy}(H0) f>
///     = (x-lambda)^{-1} Im[(x-lambda-2iy)^{-1} <B u, u - T_{lambda+iy}(H1) u>],
///   B = -T_{lambda+iy}(H1) + T_{x-iy}(H0) (1 - T_{lambda+iy}(H1)),
///
/// with <a, b> = sum a_i conj(b_i). The identity holds for every u.
/// Returns |LHS - RHS| / (|LHS| + |RHS|); points with |x - lambda| < 1e-8
/// are flagged near_singular and not evaluated.
inline IdentityCheck check_lemma2_identity(const Thm1Run& run, double x, double y) {
  const LSProblem& p = run.problem;
  IdentityCheck out;
  if (std::abs(x - p.lambda) < 1e-8) {
    out.near_singular = true;
    out.residual = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const CMatrix& fm = p.rigging.entries();
  const HermitianOperator h1(p.h0.entries() + p.rigging.gram());
  const CVector& u = run.u;
  const CVector f = resolvent_apply(h1, ComplexEnergy{p.lambda, y}, CVector(fm.adjoint() * u));
  const auto inner = [](const CVector& a, const CVector& b) { return b.dot(a); };  // b* a

  const cplx lhs_c = inner(f, resolvent_apply(p.h0, ComplexEnergy{x, y}, f));
  const CMatrix t1 = sandwiched_resolvent(h1, p.rigging, ComplexEnergy{p.lambda, y});
  const CMatrix t0 = sandwiched_resolvent(p.h0, p.rigging, ComplexEnergy{x, -y});
  const CVector chi = u - t1 * u;
  const CVector bu = -(t1 * u) + t0 * chi;
  const cplx c = 1.0 / cplx(x - p.lambda, -2.0 * y);
  const double rhs = std::imag(c * inner(bu, chi)) / (x - p.lambda);
  const double lhs = std::imag(lhs_c);
  out.residual = std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + 1e-300);
  return out;
}

/// Relative residual of
///   (x - lambda) R_{x+iy}(H0) f = -f + R_{x+iy}(H0) F* [u - T_{lambda+iy}(H1) u]
/// on the unit coupling H1 = H0 + F*F.
inline double check_resolvent_step_identity(const Thm1Run& run, double x, double y) {
  const LSProblem& p = run.problem;
  const CMatrix& fm = p.rigging.entries();
  const HermitianOperator h1(p.h0.entries() + p.rigging.gram());
  const CVector f = resolvent_apply(h1, ComplexEnergy{p.lambda, y}, CVector(fm.adjoint() * run.u));
  const ComplexEnergy w{x, y};
  const CVector lhs = (x - p.lambda) * resolvent_apply(p.h0, w, f);
  const CVector t1u = fm * f;  // T_{lambda+iy}(H1) u
  const CVector second = resolvent_apply(p.h0, w, CVector(fm.adjoint() * (run.u - t1u)));
  const CVector rhs = -f + second;
  const double scale = lhs.norm() + f.norm() + second.norm();
  return scale == 0.0 ? 0.0 : (lhs - rhs).norm() / scale;
}

/// (1/pi) ∫_interval Im<phi, R_{x+iy}(H) phi> dx for each ladder y, in closed
/// form per eigencomponent. Converges to ||E_interval(H) phi||^2.
inline std::vector<double> stone_quadrature_check(const HermitianOperator& h, const CVector& phi,
                                                  Interval interval, const YLadder& ladder) {
  const RVector& ev = h.eigenvalues();
  for (Index k = 0; k < ev.size(); ++k) {
    if (std::abs(ev(k) - interval.lo) < 1e-6 || std::abs(ev(k) - interval.hi) < 1e-6) {
      throw Error(ErrorKind::EndpointOnSpectrum, "interval endpoint within 1e-6 of an eigenvalue");
    }
  }
  const RVector w = detail::spectral_weights(h, phi);
  std::vector<double> out;
  for (double y : ladder.values()) {
    double total = 0.0;
    for (Index k = 0; k < ev.size(); ++k) {
      const double inside = kPi - detail::lorentz_mass_below(interval.lo, ev(k), y) -
                            detail::lorentz_mass_above(interval.hi, ev(k), y);
      total += w(k) * inside;
    }
    out.push_back(total / kPi);
  }
  return out;
}

struct Theorem1Options {
  std::vector<double> deltas;  // empty: {0.5, 0.1, 0.02} x local spectral gap
  YLadder ladder{};
  std::uint64_t seed = 0;      // random unit combination of the kernel basis
  double concentration_tol = 1e-4;
  double approx_tol = 1e-4;
  double tail_tol = 1e-3;      // relative to ||f||^2
  double angle_tol = 1e-6;
  unsigned jobs = 1;
};

struct Theorem1Report {
  bool subset_pass = false;    // Upsilon inside every closure of F E_O H
  bool superset_pass = false;  // F V(lambda) inside Upsilon
  Index upsilon_dimension = 0;
  Index eigenspace_dimension = 0;
  double superset_angle = 0.0;
  double rank_gap = kInf;
  std::vector<double> deltas;
  std::vector<Thm1Record> records;  // sorted by (u_index, delta, y)
  std::vector<std::string> diagnostics;

  bool passed() const { return subset_pass && superset_pass; }
};

inline std::vector<double> default_deltas(const HermitianOperator& h0, double lambda) {
  double gap = local_spectral_gap(h0, lambda);
  if (!std::isfinite(gap)) gap = h0.scale();
  return {0.5 * gap, 0.1 * gap, 0.02 * gap};
}

namespace detail {

inline bool tail_non_increasing(const std::vector<double>& v, std::size_t tail, double floor) {
  if (v.size() < 2) return true;
  const std::size_t start = v.size() > tail ? v.size() - tail : 0;
  for (std::size_t k = start; k + 1 < v.size(); ++k) {
    if (v[k + 1] > v[k] + floor) return false;
  }
  return true;
}

}  // namespace detail

/// Checks both inclusions at finite dimension:
///  - every kernel basis vector, and one seeded random unit combination,
///    concentrates in each spectral window as y -> 0 (profile contracts);
///  - F V(lambda, H0) lies inside the computed kernel.
inline Theorem1Report verify_theorem1(const LSProblem& p, const Theorem1Options& opts = {}) {
  Theorem1Report rep;
  rep.deltas = opts.deltas.empty() ? default_deltas(p.h0, p.lambda) : opts.deltas;

  LSSolution sol;
  try {
    sol = solve_ls(p);
  } catch (const Error& e) {
    rep.diagnostics.push_back(e.what());
    return rep;
  }
  const SubspaceBasis& ups = sol.upsilon;
  rep.upsilon_dimension = ups.dimension();
  rep.rank_gap = ups.rank_gap;
  if (ups.ill_conditioned) rep.diagnostics.push_back("IllConditionedKernel: rank gap below 10");

  // Superset direction against the eigendecomposition of H0.
  const SubspaceBasis v = eigenspace(p.h0, p.lambda);
  rep.eigenspace_dimension = v.dimension();
  const CMatrix fv = orthonormal_basis(p.rigging.entries() * v.vectors);
  rep.superset_angle = std::asin(containment_sine(ups.vectors, fv));
  rep.superset_pass = rep.superset_angle <= opts.angle_tol;
  if (!rep.superset_pass) {
    rep.diagnostics.push_back("superset: angle " + std::to_string(rep.superset_angle));
  }

  // Subset direction.
  std::vector<CVector> us;
  for (Index c = 0; c < ups.dimension(); ++c) us.emplace_back(ups.vectors.col(c));
  if (ups.dimension() > 0) {
    const rng::Stream s(opts.seed, rng::kStreamCombination);
    CVector coeff(ups.dimension());
    for (Index c = 0; c < coeff.size(); ++c) {
      const auto k = static_cast<std::uint64_t>(c);
      coeff(c) = cplx(s.normal(2 * k), s.normal(2 * k + 1));
    }
    CVector comb = ups.vectors * coeff;
    us.push_back(comb / comb.norm());
  }

  const std::size_t nd = rep.deltas.size();
  std::vector<std::vector<Thm1Record>> cells(us.size() * nd);
  std::vector<std::string> cell_errors(cells.size());
  p.h0.spectrum();
  parallel_for(cells.size(), opts.jobs, [&](std::size_t i) {
    Thm1Run run{p, us[i / nd], rep.deltas[i % nd], opts.ladder};
    try {
      cells[i] = theorem1_profile(run, static_cast<int>(i / nd));
    } catch (const Error& e) {
      cell_errors[i] = e.what();
    }
  });

  bool ok = true;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string tag = "u" + std::to_string(i / nd) + " delta=" + std::to_string(rep.deltas[i % nd]);
    if (!cell_errors[i].empty()) {
      ok = false;
      rep.diagnostics.push_back(tag + ": " + cell_errors[i]);
      continue;
    }
    const auto& recs = cells[i];
    std::vector<double> conc, tail;
    for (const auto& r : recs) {
      conc.push_back(r.concentration_out);
      tail.push_back(r.tail_integral);
      if (r.approx_residual > r.triangle_bound + 1e-12) {
        ok = false;
        rep.diagnostics.push_back(tag + ": triangle bound violated at y=" + std::to_string(r.y));
      }
    }
    const Thm1Record& last = recs.back();
    const double f2 = last.f_norm * last.f_norm;
    if (!detail::tail_non_increasing(conc, 5, 64 * kEps)) {
      ok = false;
      rep.diagnostics.push_back(tag + ": concentration not decreasing");
    }
    if (last.concentration_out > opts.concentration_tol) {
      ok = false;
      rep.diagnostics.push_back(tag + ": final concentration " + std::to_string(last.concentration_out));
    }
    if (last.approx_residual > opts.approx_tol) {
      ok = false;
      rep.diagnostics.push_back(tag + ": approximation residual " + std::to_string(last.approx_residual));
    }
    if (!detail::tail_non_increasing(tail, 5, 64 * kEps * std::max(1.0, f2))) {
      ok = false;
      rep.diagnostics.push_back(tag + ": tail integral not decreasing");
    }
    if (last.tail_integral > opts.tail_tol * f2) {
      ok = false;
      rep.diagnostics.push_back(tag + ": tail integral " + std::to_string(last.tail_integral));
    }
    rep.records.insert(rep.records.end(), recs.begin(), recs.end());
  }
  rep.subset_pass = ok;
  return rep;
}

}  // namespace lapkit
