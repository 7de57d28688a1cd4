// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include "lapkit/error.hpp"

namespace lapkit {

using cplx = std::complex<double>;
using Index = Eigen::Index;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

/// Open real interval (lo, hi).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool empty() const { return !(lo < hi); }
  double width() const { return hi - lo; }
};

namespace detail {

/// Largest eigenvalue of the Gram matrix of `a` from its Hermitian
/// eigensolver; exact to relative machine accuracy, O(n^3).
inline double dense_norm(const CMatrix& a) {
  CMatrix gram = a.rows() <= a.cols() ? CMatrix(a * a.adjoint()) : CMatrix(a.adjoint() * a);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// Lanczos on a* a with full reorthogonalisation. Returns a negative value
/// when the Ritz estimate has not settled, so the caller can fall back.
inline double lanczos_norm(const CMatrix& a, int max_steps) {
  const Index n = a.cols();
  CMatrix q(n, max_steps + 1);
  std::vector<double> alpha, beta;
  // Fixed, dense start vector: deterministic and with no exact zero components.
  CVector v(n);
  for (Index i = 0; i < n; ++i) {
    v(i) = cplx(1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i) + 0.3),
                0.25 * std::cos(0.9 * static_cast<double>(i)));
  }
  q.col(0) = v / v.norm();
  double theta_prev = -1.0;
  int settled = 0;
  for (int k = 0; k < max_steps; ++k) {
    CVector w = a.adjoint() * (a * q.col(k));
    alpha.push_back(std::real(q.col(k).dot(w)));
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(k + 1) * (q.leftCols(k + 1).adjoint() * w);
    const double b = w.norm();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    RVector diag = Eigen::Map<RVector>(alpha.data(), static_cast<Index>(alpha.size()));
    RVector off = beta.empty() ? RVector() : RVector(Eigen::Map<RVector>(beta.data(), static_cast<Index>(beta.size())));
    es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    const Index top = es.eigenvalues().size() - 1;
    const double theta = es.eigenvalues()(top);
    const double resid = b * std::abs(es.eigenvectors()(top, top));
    if (theta <= 0.0) return theta == 0.0 && b == 0.0 ? 0.0 : -1.0;
    if (b <= 1e-14 * theta || static_cast<Index>(k + 1) == n) return std::sqrt(theta);
    const bool small_step = theta_prev > 0.0 && theta - theta_prev <= 4.0 * kEps * theta;
    settled = small_step ? settled + 1 : 0;
    if (settled >= 2 && resid <= 1e-9 * theta) return std::sqrt(theta);
    theta_prev = theta;
    beta.push_back(b);
    q.col(k + 1) = w / b;
  }
  return -1.0;
}

}  // namespace detail

/// Spectral norm (largest singular value).
///
/// Small matrices use the largest eigenvalue of the Gram matrix. Larger
/// ones run Lanczos on the Gram operator first, which needs only
/// matrix-vector products, and fall back to the dense eigensolver when the
/// Ritz value does not settle.
inline double operator_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  const CMatrix scaled = a / scale;
  if (std::min(a.rows(), a.cols()) > 48) {
    const int steps = static_cast<int>(std::min<Index>(a.cols(), 120));
    const double est = detail::lanczos_norm(scaled, steps);
    if (est >= 0.0) return scale * est;
  }
  return scale * detail::dense_norm(scaled);
}

/// Hermitian part (A + A*)/2.
inline CMatrix hermitian_part(const CMatrix& a) { return (a + a.adjoint()) * 0.5; }

inline double relative_hermitian_defect(const CMatrix& a) {
  const double n = a.norm();
  if (n == 0.0) return 0.0;
  return (a - a.adjoint()).norm() / n;
}

/// Orthonormal basis of the column span of `a`, dropping directions whose
/// singular value falls below rel_tol * sigma_max.
inline CMatrix orthonormal_basis(const CMatrix& a, double rel_tol = 1e-12) {
  if (a.cols() == 0) return CMatrix(a.rows(), 0);
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU);
  const RVector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return CMatrix(a.rows(), 0);
  Index keep = 0;
  while (keep < s.size() && s(keep) > rel_tol * s(0)) ++keep;
  return svd.matrixU().leftCols(keep);
}

/// Sine of the largest angle between span(w) and its projection onto
/// span(u), for orthonormal column sets. Zero iff span(w) lies in span(u).
inline double containment_sine(const CMatrix& u, const CMatrix& w) {
  if (w.cols() == 0) return 0.0;
  if (u.cols() == 0) return 1.0;
  const CMatrix residual = w - u * (u.adjoint() * w);
  return std::min(1.0, operator_norm(residual));
}

/// Largest principal angle between two subspaces given by orthonormal
/// bases. Uses the sine form, which stays accurate for tiny angles where
/// acos of the cosines would lose everything below ~1e-8.
/// Subspaces of different dimension are at angle pi/2; two empty
/// subspaces are at angle 0.
inline double max_principal_angle(const CMatrix& u, const CMatrix& w) {
  if (u.rows() != w.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "principal angles between different ambient spaces");
  }
  if (u.cols() != w.cols()) return kPi / 2;
  if (u.cols() == 0) return 0.0;
  const double s = std::max(containment_sine(u, w), containment_sine(w, u));
  return std::asin(std::min(1.0, s));
}

/// An orthonormal basis of a computed subspace together with the diagnostics
/// of the computation that produced it.
struct SubspaceBasis {
  Index dimension_ambient = 0;
  CMatrix vectors;             // orthonormal columns, possibly zero of them
  RVector singular_values;     // full descending list from a null-space solve
  double rank_gap = kInf;      // smallest kept-out / largest kept-in singular value
  double threshold = 0.0;      // absolute singular-value cutoff used
  double defining_residual = 0.0;  // max ||M v|| over basis vectors
  bool ill_conditioned = false;    // rank_gap < 10

  Index dimension() const { return vectors.cols(); }
};

inline double orthonormality_defect(const CMatrix& q) {
  if (q.cols() == 0) return 0.0;
  return (q.adjoint() * q - CMatrix::Identity(q.cols(), q.cols())).norm();
}

/// Runs body(i) for i in [0, count) on at most `jobs` threads. Results must
/// be written into per-index slots so ordering never depends on scheduling.
/// The first exception thrown by any body is rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t count, unsigned jobs, Body&& body) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace lapkit
