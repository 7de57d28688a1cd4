// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "../fixtures.hpp"
#include "../oracles.hpp"
#include "lapkit/experiment/runner.hpp"

namespace lapkit::acceptance {
namespace {

namespace fs = std::filesystem;

inline constexpr std::uint64_t kDrawStream = 100;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

void fail(Outcome& o, const std::string& why) {
  if (o.pass) o.detail = why;
  o.pass = false;
}

/// Planted fixtures shared by AC4-AC7: m in {1,2,3}, n in {20,50}, 5 seeds.
struct Planted {
  std::string tag;
  int m = 0;
  HermitianOperator h;
  Rigging f;
  LSProblem problem;
};

const std::vector<Planted>& planted_fixtures() {
  static const std::vector<Planted> all = [] {
    std::vector<Planted> out;
    for (int m = 1; m <= 3; ++m) {
      for (Index n : {20, 50}) {
        for (std::uint64_t s = 0; s < 5; ++s) {
          const std::uint64_t seed = 1000 * static_cast<std::uint64_t>(m) + 100 * static_cast<std::uint64_t>(n) + s;
          Planted p;
          p.tag = "m=" + std::to_string(m) + " n=" + std::to_string(n) + " seed=" + std::to_string(seed);
          p.m = m;
          p.h = build_operator(test::planted_spec(n, m, seed));
          p.f = test::random_rigging(n, seed + 7, 10.0);
          const double r = pick_regular_r(p.h, p.f, 0.0, 1e-2, YLadder{}, 1e-7);
          p.problem = make_ls_problem(p.h, p.f, 0.0, r);
          out.push_back(std::move(p));
        }
      }
    }
    return out;
  }();
  return all;
}

// AC1: second-resolvent identity on 100 seeded n = 50 fixtures.
Outcome ac1() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const HermitianOperator h = test::random_hermitian(50, seed);
    const Rigging f = test::random_rigging(50, 5000 + seed);
    const rng::Stream s(seed, kDrawStream);
    const ComplexEnergy w{s.uniform(0, -3, 3), s.uniform(1, 0.01, 1.0) * (s.uniform(2) < 0.5 ? -1 : 1)};
    const ComplexEnergy z{s.uniform(3, -3, 3), s.uniform(4, 0.01, 1.0)};
    const double res = check_tricky_equality(h, f, w, z);
    worst = std::max(worst, res);
    if (!(res <= 1e-9)) fail(o, "seed " + std::to_string(seed) + " residual " + sci(res));
  }
  if (o.pass) o.detail = "max relative residual " + sci(worst) + " over 100 fixtures (n=50)";
  return o;
}

// AC2: imaginary-part identity and the intermediate resolvent step, 50 draws.
Outcome ac2() {
  Outcome o;
  double worst_im = 0.0, worst_step = 0.0;
  for (std::uint64_t d = 0; d < 50; ++d) {
    const rng::Stream s(d, kDrawStream);
    const Index n = 10 + static_cast<Index>(d % 3) * 10;
    Thm1Run run;
    run.problem.h0 = test::random_hermitian(n, 7000 + d);
    run.problem.rigging = test::random_rigging(n, 8000 + d);
    run.problem.lambda = s.uniform(0, -2, 2);
    run.problem.direction = DirectionOperator::identity(n);
    run.u = CVector(n);
    for (Index k = 0; k < n; ++k) {
      const auto c = static_cast<std::uint64_t>(10 + 2 * k);
      run.u(k) = cplx(s.normal(c), s.normal(c + 1));
    }
    double x = s.uniform(1, -3, 3);
    if (std::abs(x - run.problem.lambda) < 1e-3) x += 0.5;
    const double y = std::pow(10.0, s.uniform(2, -4, 0));
    const IdentityCheck im = check_lemma2_identity(run, x, y);
    const double step = check_resolvent_step_identity(run, x, y);
    worst_im = std::max(worst_im, im.residual);
    worst_step = std::max(worst_step, step);
    if (im.near_singular || !(im.residual <= 1e-9) || !(step <= 1e-9)) {
      fail(o, "draw " + std::to_string(d) + ": identity " + sci(im.residual) + ", step " + sci(step));
    }
  }
  if (o.pass) o.detail = "max residual " + sci(worst_im) + " (identity), " + sci(worst_step) + " (step) over 50 draws";
  return o;
}

// AC3: resonance set against a brute-force scan; distance certificate.
Outcome ac3() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index n = 8 + static_cast<Index>(seed % 3) * 4;
    const HermitianOperator h = test::random_hermitian(n, 9000 + seed);
    const Rigging f = test::random_rigging(n, 9100 + seed);
    const double lambda = rng::Stream(seed, kDrawStream).uniform(0, -1, 1);
    const ResonanceSet set = resonance_set(h, f, lambda);
    double lo = -1.0, hi = 1.0;
    for (double r : set.values) {
      lo = std::min(lo, r - 1.0);
      hi = std::max(hi, r + 1.0);
    }
    const auto scan = oracle::scan_resonances(h.entries(), f.entries(), lambda, lo, hi, (hi - lo) / 20000.0);
    const std::string tag = "fixture " + std::to_string(seed);
    if (scan.size() != set.values.size()) {
      fail(o, tag + ": " + std::to_string(set.values.size()) + " values vs " + std::to_string(scan.size()) +
                  " from the scan");
      continue;
    }
    for (std::size_t k = 0; k < scan.size(); ++k) {
      const double err = std::abs(scan[k] - set.values[k]);
      worst = std::max(worst, err);
      if (!(err <= 1e-8)) fail(o, tag + ": resonance " + std::to_string(k) + " off by " + sci(err));
    }
    const double margin = 1e-2;
    const double r = pick_nonresonant_r(set, margin);
    // H_r - lambda = F* (F^{-*}(H0 - lambda) F^{-1} + r) F, so its smallest
    // eigenvalue modulus is at least smin(F)^2 * dist(r, resonances).
    const double smin = f.min_singular_value();
    const double bound = smin * smin * margin * set.scale;
    const double dist = oracle::eigen_distance(h.entries(), f.entries(), lambda, r);
    if (!(dist >= bound * (1.0 - 1e-9))) fail(o, tag + ": picked r=" + std::to_string(r) + " distance " + sci(dist));
  }
  if (o.pass) o.detail = "max deviation from scan " + sci(worst) + " over 10 fixtures; certificates hold";
  return o;
}

// AC4: dim Upsilon = m and Upsilon = F V(lambda).
Outcome ac4() {
  Outcome o;
  double worst = 0.0;
  for (const auto& p : planted_fixtures()) {
    if (!(p.f.condition_number() <= 10.0)) fail(o, p.tag + ": rigging condition " + sci(p.f.condition_number()));
    const SubspaceBasis ups = solve_ls(p.problem).upsilon;
    const SubspaceBasis v = eigenspace(p.h, 0.0);
    const CMatrix fv = orthonormal_basis(p.f.entries() * v.vectors);
    if (ups.dimension() != p.m || fv.cols() != p.m) {
      fail(o, p.tag + ": dimension " + std::to_string(ups.dimension()));
      continue;
    }
    const double angle = max_principal_angle(ups.vectors, fv);
    worst = std::max(worst, angle);
    if (!(angle <= 1e-6)) fail(o, p.tag + ": angle " + sci(angle));
  }
  if (o.pass) o.detail = "30 fixtures, max principal angle " + sci(worst);
  return o;
}

std::vector<DirectionOperator> alternative_directions(Index n, std::uint64_t seed) {
  const rng::Stream s(seed, rng::kStreamDirection);
  CMatrix d1 = CMatrix::Zero(n, n), d2 = CMatrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    const auto c = static_cast<std::uint64_t>(k);
    d1(k, k) = s.uniform(c, 0.5, 1.5);
    d2(k, k) = s.uniform(static_cast<std::uint64_t>(n) + c, -1.5, 1.5);
  }
  const CMatrix g = test::random_hermitian(n, seed + 1).entries();
  CMatrix dense = CMatrix::Identity(n, n) + (0.25 / operator_norm(g)) * g;
  return {DirectionOperator(d1), DirectionOperator(d2), DirectionOperator(dense)};
}

// AC5: independence of the coupling and of the direction.
Outcome ac5() {
  Outcome o;
  double worst_r = 0.0, worst_j = 0.0;
  std::uint64_t k = 0;
  for (const auto& p : planted_fixtures()) {
    const LSProblem& q = p.problem;
    const auto rs = regular_r_values(p.h, p.f, q.lambda, 1e-2, q.ladder, q.probe_tol, 3);
    std::vector<double> alts;
    for (double r : rs) {
      if (r != q.r) alts.push_back(r);
    }
    const double ra = check_r_independence(q, alts);
    const double ja = check_J_independence(q, alternative_directions(p.h.dimension(), 77 + k++));
    worst_r = std::max(worst_r, ra);
    worst_j = std::max(worst_j, ja);
    if (!(ra <= 1e-6)) fail(o, p.tag + ": r angle " + sci(ra));
    if (!(ja <= 1e-6)) fail(o, p.tag + ": J angle " + sci(ja));
  }
  if (o.pass) o.detail = "30 fixtures, max angle " + sci(worst_r) + " (r), " + sci(worst_j) + " (J)";
  return o;
}

std::vector<LSProblem> dynamics_problems() {
  std::vector<LSProblem> out;
  for (const auto& p : planted_fixtures()) out.push_back(p.problem);
  RVector d(3);
  d << 1, 1, 3;
  out.push_back(make_ls_problem(HermitianOperator::diagonal(d), Rigging::identity(3), 1.0, 1.0));
  return out;
}

// AC6: concentration dynamics for every kernel vector on every fixture.
Outcome ac6() {
  Outcome o;
  std::size_t records = 0;
  double worst_conc = 0.0, worst_approx = 0.0;
  for (const LSProblem& q : dynamics_problems()) {
    const Theorem1Report rep = verify_theorem1(q);
    records += rep.records.size();
    for (const auto& r : rep.records) {
      if (r.y <= q.ladder.y_min() * (1.0 + 1e-9)) {
        worst_conc = std::max(worst_conc, r.concentration_out);
        worst_approx = std::max(worst_approx, r.approx_residual);
      }
    }
    if (!rep.passed()) {
      fail(o, "n=" + std::to_string(q.h0.dimension()) + ": " +
                  (rep.diagnostics.empty() ? std::string("failed") : rep.diagnostics.front()));
    }
  }
  if (o.pass) {
    o.detail = std::to_string(records) + " ladder records; final concentration <= " + sci(worst_conc) +
               ", approximation residual <= " + sci(worst_approx);
  }
  return o;
}

// AC7: every kernel basis vector is a bound state.
Outcome ac7() {
  Outcome o;
  double worst = 0.0;
  std::size_t count = 0;
  for (const LSProblem& q : dynamics_problems()) {
    const LSSolution sol = solve_ls(q);
    for (Index c = 0; c < sol.upsilon.dimension(); ++c) {
      const double res = extract_bound_state(sol.upsilon.vectors.col(c), q, sol.matrix).eigen_residual;
      worst = std::max(worst, res);
      ++count;
      if (!(res <= 1e-7)) fail(o, "n=" + std::to_string(q.h0.dimension()) + ": residual " + sci(res));
    }
  }
  if (o.pass) o.detail = std::to_string(count) + " basis vectors, max eigen-residual " + sci(worst);
  return o;
}

// AC8: 1/y divergence on the spectrum, limit existence away from it.
Outcome ac8() {
  Outcome o;
  int diverging = 0, converging = 0;
  double worst_slope = 0.0, worst_err = 0.0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Index n = 12;
    const HermitianOperator h = test::random_hermitian(n, 11000 + seed);
    const Rigging f = test::random_rigging(n, 11100 + seed);
    const RVector ev = h.eigenvalues();
    const std::string tag = "fixture " + std::to_string(seed);
    for (Index k = 0; k < n; k += 3) {
      const LapProbeResult r = probe_limit(h, f, ev(k), YLadder{}, 1e-7);
      ++diverging;
      if (r.verdict != ProbeVerdict::Diverges || !r.divergence_exponent) {
        fail(o, tag + ": eigenvalue " + std::to_string(k) + " gave " + to_string(r.verdict));
        continue;
      }
      const double dev = std::abs(*r.divergence_exponent + 1.0);
      worst_slope = std::max(worst_slope, dev);
      if (!(dev <= 0.1)) fail(o, tag + ": exponent " + sci(*r.divergence_exponent));
    }
    std::vector<double> off{ev(0) - 0.1, ev(n - 1) + 0.1, ev(n - 1) + 1.0};
    for (Index k = 0; k + 1 < n; ++k) {
      if (ev(k + 1) - ev(k) >= 0.2) off.push_back(0.5 * (ev(k) + ev(k + 1)));
    }
    for (double lambda : off) {
      const LapProbeResult r = probe_limit(h, f, lambda, YLadder{}, 1e-7);
      ++converging;
      if (r.verdict != ProbeVerdict::LimitExists || !r.limit_estimate) {
        fail(o, tag + ": lambda " + std::to_string(lambda) + " gave " + to_string(r.verdict));
        continue;
      }
      const double err = operator_norm(*r.limit_estimate - sandwiched_resolvent(h, f, ComplexEnergy{lambda, 0.0}));
      worst_err = std::max(worst_err, err);
      if (!(err <= 1e-7)) fail(o, tag + ": lambda " + std::to_string(lambda) + " error " + sci(err));
    }
  }
  if (o.pass) {
    o.detail = std::to_string(diverging) + " eigenvalues (max |slope+1| " + sci(worst_slope) + "), " +
               std::to_string(converging) + " regular points (max error " + sci(worst_err) + ")";
  }
  return o;
}

// AC9: Stone quadrature against the spectral projection.
Outcome ac9() {
  Outcome o;
  const YLadder scalar_ladder{1.0, 0.5, 30};
  RVector zero = RVector::Zero(1);
  const auto scalar = stone_quadrature_check(HermitianOperator::diagonal(zero), CVector::Ones(1),
                                             Interval{-1.0, 1.0}, scalar_ladder);
  const auto ys = scalar_ladder.values();
  double worst_scalar = 0.0;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    worst_scalar = std::max(worst_scalar, std::abs(scalar[k] - 2.0 / kPi * std::atan(1.0 / ys[k])));
  }
  if (!(worst_scalar <= 1e-12)) fail(o, "scalar case error " + sci(worst_scalar));

  double worst_ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index n = 30;
    const HermitianOperator h = test::random_hermitian(n, 12000 + seed);
    const RVector ev = h.eigenvalues();
    const Index a = 3 + static_cast<Index>(seed % 5), b = a + 10;
    const Interval iv{0.5 * (ev(a - 1) + ev(a)), 0.5 * (ev(b) + ev(b + 1))};
    const rng::Stream s(seed, kDrawStream);
    CVector phi(n);
    for (Index k = 0; k < n; ++k) {
      const auto c = static_cast<std::uint64_t>(2 * k);
      phi(k) = cplx(s.normal(c), s.normal(c + 1));
    }
    const auto vals = stone_quadrature_check(h, phi, iv, YLadder{1.0, 0.5, 30});
    const double exact = (spectral_projector(h, iv) * phi).squaredNorm();
    double gap = kInf;
    for (Index k = 0; k < n; ++k) gap = std::min({gap, std::abs(ev(k) - iv.lo), std::abs(ev(k) - iv.hi)});
    const auto yv = YLadder{1.0, 0.5, 30}.values();
    for (std::size_t k = 0; k < yv.size(); ++k) {
      const double bound = 5.0 * yv[k] * (1.0 + phi.squaredNorm()) / gap;
      const double err = std::abs(vals[k] - exact);
      worst_ratio = std::max(worst_ratio, err / bound);
      if (!(err <= bound)) fail(o, "fixture " + std::to_string(seed) + ": error " + sci(err) + " > " + sci(bound));
    }
  }
  if (o.pass) {
    o.detail = "scalar error " + sci(worst_scalar) + "; 10 fixtures, max error/bound " + sci(worst_ratio);
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// AC10: two canonical verify runs give byte-identical reports.
Outcome ac10(const fs::path& workdir) {
  Outcome o;
  const std::string source = LAPKIT_SOURCE_DIR;
  int compared = 0;
  for (const char* name : {"diag113_verify.json", "planted_verify.json"}) {
    const auto config = experiment::load_config(source + "/configs/" + name);
    std::vector<fs::path> dirs;
    for (const char* run : {"a", "b"}) {
      experiment::RunOptions opts;
      opts.canonical = true;
      opts.jobs = run[0] == 'a' ? 1 : 2;
      dirs.push_back(workdir / (std::string(name) + "." + run));
      fs::remove_all(dirs.back());
      opts.output_dir = dirs.back().string();
      experiment::execute(experiment::Command::verify, config, opts);
    }
    for (const auto& e : fs::directory_iterator(dirs[0])) {
      ++compared;
      if (slurp(e.path()) != slurp(dirs[1] / e.path().filename())) {
        fail(o, std::string(name) + ": " + e.path().filename().string() + " differs");
      }
    }
    if (slurp(dirs[0] / "report.json").empty()) fail(o, std::string(name) + ": empty report");
  }
  if (o.pass) o.detail = std::to_string(compared) + " artifacts byte-identical across paired runs";
  return o;
}

}  // namespace
}  // namespace lapkit::acceptance

int main(int argc, char** argv) {
  using namespace lapkit::acceptance;
  fs::path workdir = fs::temp_directory_path() / "lapkit_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--workdir" && i + 1 < argc) {
      workdir = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--workdir DIR]\n", argv[0]);
      return 2;
    }
  }
  fs::create_directories(workdir);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9},
      {"AC10", [&] { return ac10(workdir); }},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s (%.1fs) %s\n", name, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
