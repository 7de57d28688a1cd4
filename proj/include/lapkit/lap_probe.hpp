// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lapkit/operator_core.hpp"

namespace lapkit {

/// Geometric sequence y_k = y0 * factor^k, k = 0..count-1.
struct YLadder {
  double y0 = 1.0;
  double factor = 0.5;
  int count = 30;

  void validate() const {
    if (!(y0 > 0.0) || !std::isfinite(y0)) throw Error(ErrorKind::InvalidSpec, "ladder.y0 must be > 0");
    if (!(factor > 0.0 && factor < 1.0)) {
      throw Error(ErrorKind::InvalidSpec, "ladder.factor must lie in (0,1)");
    }
    if (count < 1) throw Error(ErrorKind::InvalidSpec, "ladder.count must be positive");
  }

  std::vector<double> values() const {
    validate();
    std::vector<double> ys(static_cast<std::size_t>(count));
    double y = y0;
    for (auto& v : ys) {
      v = y;
      y *= factor;
    }
    return ys;
  }

  double y_min() const { return y0 * std::pow(factor, count - 1); }

  bool operator==(const YLadder&) const = default;
};

enum class ProbeVerdict { LimitExists, Diverges, Inconclusive };

inline std::string to_string(ProbeVerdict v) {
  switch (v) {
    case ProbeVerdict::LimitExists: return "LimitExists";
    case ProbeVerdict::Diverges: return "Diverges";
    case ProbeVerdict::Inconclusive: return "Inconclusive";
  }
  return "unknown";
}

struct ProfilePoint {
  double y = 0.0;
  double value = 0.0;
};

struct LapProbeResult {
  ProbeVerdict verdict = ProbeVerdict::Inconclusive;
  std::optional<CMatrix> limit_estimate;       // iff LimitExists
  std::vector<ProfilePoint> cauchy_profile;    // (y_k, ||T_k - T_{k+1}||)
  std::vector<ProfilePoint> norm_profile;      // (y_k, ||T_k||)
  std::optional<double> divergence_exponent;   // iff Diverges
  bool extrapolated = false;
};

namespace detail {

/// Length of the ladder tail used for the monotonicity and slope tests.
inline constexpr std::size_t kProbeTail = 5;
inline constexpr std::size_t kSlopeWindow = 10;

inline double fitted_loglog_slope(const std::vector<ProfilePoint>& pts, std::size_t window) {
  const std::size_t n = pts.size();
  const std::size_t w = std::min(window, n);
  if (w < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = n - w; k < n; ++k) {
    const double x = std::log(pts[k].y);
    const double y = std::log(pts[k].value);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(w);
  const double denom = m * sxx - sx * sx;
  return denom == 0.0 ? 0.0 : (m * sxy - sx * sy) / denom;
}

}  // namespace detail

/// Decides whether T_{lambda+iy}(H) has a norm limit as y -> 0+.
///
/// LimitExists: the last five Cauchy differences are non-increasing (or at
/// round-off level) and the final one is below tol * max(1, ||T||). The
/// estimate is T at the smallest y, corrected by the geometric tail sum
/// when the last three differences decay at a common ratio (relative
/// spread < 0.1).
/// Diverges: ||T|| is non-decreasing over the last ten rungs with log-log
/// slope below -0.5.
/// Anything else is Inconclusive.
inline LapProbeResult probe_limit(const HermitianOperator& h, const Rigging& f, double lambda,
                                  const YLadder& ladder, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidSpec, "probe tolerance must be positive");
  const std::vector<double> ys = ladder.values();
  const std::size_t count = ys.size();

  const SandwichedResolventFamily family(h, f);
  std::vector<CMatrix> t(count);
  LapProbeResult out;
  out.norm_profile.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    t[k] = family.at(ComplexEnergy{lambda, ys[k]});
    out.norm_profile[k] = {ys[k], operator_norm(t[k])};
  }
  double max_norm = 0.0;
  for (const auto& p : out.norm_profile) max_norm = std::max(max_norm, p.value);
  for (std::size_t k = 0; k + 1 < count; ++k) {
    out.cauchy_profile.push_back({ys[k], operator_norm(t[k] - t[k + 1])});
  }

  const double noise = 64.0 * kEps * std::max(1.0, max_norm);
  const auto& d = out.cauchy_profile;
  const std::size_t nd = d.size();

  if (nd >= 1) {
    const std::size_t tail = std::min(detail::kProbeTail, nd);
    bool decreasing = true;
    for (std::size_t k = nd - tail; k + 1 < nd; ++k) {
      if (!(d[k + 1].value <= d[k].value || d[k + 1].value <= noise)) decreasing = false;
    }
    const double final_norm = out.norm_profile.back().value;
    if (decreasing && d.back().value < tol * std::max(1.0, final_norm)) {
      out.verdict = ProbeVerdict::LimitExists;
      CMatrix estimate = t.back();
      if (nd >= 3) {
        const double d1 = d[nd - 3].value, d2 = d[nd - 2].value, d3 = d[nd - 1].value;
        if (d1 > noise && d2 > noise && d3 > noise) {
          const double rho_a = d2 / d1;
          const double rho_b = d3 / d2;
          if (rho_b < 1.0 && std::abs(rho_a - rho_b) < 0.1 * rho_b) {
            estimate += (t[count - 1] - t[count - 2]) * (rho_b / (1.0 - rho_b));
            out.extrapolated = true;
          }
        }
      }
      out.limit_estimate = std::move(estimate);
      return out;
    }
  }

  const std::size_t window = std::min(detail::kSlopeWindow, count);
  if (window >= 2) {
    bool growing = true;
    for (std::size_t k = count - window; k + 1 < count; ++k) {
      const double a = out.norm_profile[k].value;
      const double b = out.norm_profile[k + 1].value;
      if (!(b >= a * (1.0 - 1e-12))) growing = false;
    }
    const double slope = detail::fitted_loglog_slope(out.norm_profile, window);
    if (growing && slope < -0.5) {
      out.verdict = ProbeVerdict::Diverges;
      out.divergence_exponent = slope;
      return out;
    }
  }
  out.verdict = ProbeVerdict::Inconclusive;
  return out;
}

struct SupNormPoint {
  double lambda = 0.0;
  double sup_norm = 0.0;
  double argmax_y = 0.0;
};

/// Empirical sup over the ladder of ||T_{lambda+iy}(H)|| for each lambda.
/// The lambda cells are independent and may be split across `jobs` threads;
/// the output is always in grid order.
inline std::vector<SupNormPoint> sup_norm_profile(const HermitianOperator& h, const Rigging& f,
                                                  const std::vector<double>& lambda_grid,
                                                  const YLadder& ladder, unsigned jobs = 1) {
  const std::vector<double> ys = ladder.values();
  const SandwichedResolventFamily family(h, f);  // fills the shared spectral cache
  std::vector<SupNormPoint> out(lambda_grid.size());
  parallel_for(lambda_grid.size(), jobs, [&](std::size_t i) {
    SupNormPoint p{lambda_grid[i], 0.0, ys.front()};
    for (double y : ys) {
      const double nrm = operator_norm(family.at(ComplexEnergy{lambda_grid[i], y}));
      if (nrm > p.sup_norm) {
        p.sup_norm = nrm;
        p.argmax_y = y;
      }
    }
    out[i] = p;
  });
  return out;
}

enum class PointClass { Regular, SemiRegular, EssentiallySingular };

inline std::string to_string(PointClass c) {
  switch (c) {
    case PointClass::Regular: return "Regular";
    case PointClass::SemiRegular: return "SemiRegular";
    case PointClass::EssentiallySingular: return "EssentiallySingular";
  }
  return "unknown";
}

struct Classification {
  PointClass point_class = PointClass::EssentiallySingular;
  std::optional<double> regular_r;  // coupling at which the limit was found
  bool inconclusive_warning = false;
};

/// Regular if the limit exists for H0 itself, SemiRegular if it exists for
/// some H0 + r F*F with r among the candidates, EssentiallySingular
/// otherwise. r = 0 is always tried first whether or not it is listed.
inline Classification classify_point(const HermitianOperator& h0, const Rigging& f, double lambda,
                                     const std::vector<double>& r_candidates, const YLadder& ladder,
                                     double tol) {
  Classification out;
  const LapProbeResult base = probe_limit(h0, f, lambda, ladder, tol);
  if (base.verdict == ProbeVerdict::LimitExists) {
    out.point_class = PointClass::Regular;
    out.regular_r = 0.0;
    return out;
  }
  out.inconclusive_warning = base.verdict == ProbeVerdict::Inconclusive;
  for (double r : r_candidates) {
    if (r == 0.0) continue;
    const LapProbeResult pr = probe_limit(perturbed_operator(h0, f, r), f, lambda, ladder, tol);
    if (pr.verdict == ProbeVerdict::LimitExists) {
      out.point_class = PointClass::SemiRegular;
      out.regular_r = r;
      out.inconclusive_warning = false;
      return out;
    }
    if (pr.verdict == ProbeVerdict::Inconclusive) out.inconclusive_warning = true;
  }
  out.point_class = PointClass::EssentiallySingular;
  return out;
}

}  // namespace lapkit
