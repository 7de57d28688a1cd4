// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Sparse>

#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "lapkit/error.hpp"
#include "lapkit/linalg.hpp"

namespace lapkit {

enum class StorageKind { dense, sparse };

using SparseCMatrix = Eigen::SparseMatrix<cplx>;

/// Point of the complex plane used as a resolvent argument.
struct ComplexEnergy {
  double re = 0.0;
  double im = 0.0;

  constexpr ComplexEnergy() = default;
  constexpr ComplexEnergy(double re_, double im_) : re(re_), im(im_) {}
  explicit ComplexEnergy(cplx z) : re(z.real()), im(z.imag()) {}

  cplx value() const { return {re, im}; }
  ComplexEnergy conj() const { return {re, -im}; }
};

struct SpectralDecomposition {
  RVector eigenvalues;   // ascending
  CMatrix eigenvectors;  // unitary, columns match eigenvalues
};

/// Finite-dimensional self-adjoint operator.
///
/// Entries are symmetrized on construction. The eigendecomposition is
/// computed at most once, on first use, and shared between copies; the
/// matrix itself is immutable, so copies may be used from several threads.
class HermitianOperator {
 public:
  HermitianOperator() : HermitianOperator(CMatrix(0, 0)) {}

  explicit HermitianOperator(const CMatrix& entries, StorageKind storage = StorageKind::dense)
      : state_(std::make_shared<State>()) {
    if (entries.rows() != entries.cols()) {
      throw Error(ErrorKind::DimensionMismatch, "Hermitian operator must be square, got " +
                                                    std::to_string(entries.rows()) + "x" +
                                                    std::to_string(entries.cols()));
    }
    state_->dense = hermitian_part(entries);
    state_->storage = storage;
    if (storage == StorageKind::sparse) {
      state_->sparse = state_->dense.sparseView();
      state_->sparse.makeCompressed();
    }
  }

  static HermitianOperator from_sparse(const SparseCMatrix& m) {
    if (m.rows() != m.cols()) {
      throw Error(ErrorKind::DimensionMismatch, "Hermitian operator must be square");
    }
    SparseCMatrix sym = (m + SparseCMatrix(m.adjoint())) * cplx(0.5);
    sym.makeCompressed();
    HermitianOperator op;
    op.state_ = std::make_shared<State>();
    op.state_->dense = CMatrix(sym);
    op.state_->sparse = std::move(sym);
    op.state_->storage = StorageKind::sparse;
    return op;
  }

  static HermitianOperator diagonal(const RVector& values) {
    return HermitianOperator(CMatrix(values.cast<cplx>().asDiagonal()));
  }

  Index dimension() const { return state_->dense.rows(); }
  const CMatrix& entries() const { return state_->dense; }
  StorageKind storage_kind() const { return state_->storage; }
  const SparseCMatrix& sparse_entries() const { return state_->sparse; }

  bool has_spectral_cache() const {
    std::lock_guard lock(state_->mutex);
    return state_->spectrum.has_value();
  }

  const SpectralDecomposition& spectrum() const {
    std::lock_guard lock(state_->mutex);
    if (!state_->spectrum) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(state_->dense);
      if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::PreconditionFailed, "eigendecomposition did not converge");
      }
      state_->spectrum = SpectralDecomposition{es.eigenvalues(), es.eigenvectors()};
    }
    return *state_->spectrum;
  }

  const RVector& eigenvalues() const { return spectrum().eigenvalues; }

  double spectral_radius() const {
    const RVector& ev = eigenvalues();
    return ev.size() == 0 ? 0.0 : ev.cwiseAbs().maxCoeff();
  }

  /// max(1, spectral radius), the scale used for all absolute tolerances.
  double scale() const { return std::max(1.0, spectral_radius()); }

 private:
  struct State {
    CMatrix dense;
    SparseCMatrix sparse;
    StorageKind storage = StorageKind::dense;
    mutable std::mutex mutex;
    mutable std::optional<SpectralDecomposition> spectrum;
  };
  std::shared_ptr<State> state_;
};

/// The bounded factor F. In finite dimensions zero kernel and cokernel means
/// square and invertible; the LU factorization and singular values are kept.
class Rigging {
 public:
  Rigging() = default;

  explicit Rigging(const CMatrix& entries) {
    if (entries.rows() != entries.cols() || entries.rows() == 0) {
      throw Error(ErrorKind::InvalidSpec, "rigging must be a nonempty square matrix");
    }
    auto data = std::make_shared<Data>();
    data->entries = entries;
    Eigen::JacobiSVD<CMatrix> svd(entries);
    data->singular_values = svd.singularValues();
    const double smax = data->singular_values(0);
    const double smin = data->singular_values(data->singular_values.size() - 1);
    if (!(smin > static_cast<double>(entries.rows()) * kEps * smax)) {
      throw Error(ErrorKind::InvalidSpec, "rigging is singular (zero kernel/cokernel required)");
    }
    data->condition = smax / smin;
    data->lu = Eigen::PartialPivLU<CMatrix>(entries);
    data->lu_adjoint = Eigen::PartialPivLU<CMatrix>(CMatrix(entries.adjoint()));
    data_ = std::move(data);
  }

  static Rigging identity(Index n) { return Rigging(CMatrix::Identity(n, n)); }

  static Rigging diagonal(const RVector& weights) {
    return Rigging(CMatrix(weights.cast<cplx>().asDiagonal()));
  }

  Index dimension() const { return data_->entries.rows(); }
  const CMatrix& entries() const { return data_->entries; }
  const RVector& singular_values() const { return data_->singular_values; }
  double condition_number() const { return data_->condition; }
  double norm() const { return data_->singular_values(0); }
  double min_singular_value() const {
    return data_->singular_values(data_->singular_values.size() - 1);
  }

  /// F^{-1} b by LU solve.
  CMatrix solve(const CMatrix& b) const { return data_->lu.solve(b); }
  CVector solve(const CVector& b) const { return data_->lu.solve(b); }

  /// F^{-*} b.
  CMatrix adjoint_solve(const CMatrix& b) const {
    return data_->lu_adjoint.solve(b);
  }

  /// F* F
  CMatrix gram() const { return data_->entries.adjoint() * data_->entries; }

 private:
  struct Data {
    CMatrix entries;
    RVector singular_values;
    double condition = 1.0;
    Eigen::PartialPivLU<CMatrix> lu;
    Eigen::PartialPivLU<CMatrix> lu_adjoint;
  };
  std::shared_ptr<const Data> data_;
};

/// Hermitian operator J on the auxiliary space selecting the coupling
/// direction H0 + r F* J F.
class DirectionOperator {
 public:
  DirectionOperator() = default;
  explicit DirectionOperator(const CMatrix& entries) {
    if (entries.rows() != entries.cols()) {
      throw Error(ErrorKind::DimensionMismatch, "direction operator must be square");
    }
    entries_ = hermitian_part(entries);
    is_identity_ = entries_.isIdentity(0.0);
  }

  static DirectionOperator identity(Index n) { return DirectionOperator(CMatrix::Identity(n, n)); }

  Index dimension() const { return entries_.rows(); }
  const CMatrix& entries() const { return entries_; }
  bool is_identity() const { return is_identity_; }

 private:
  CMatrix entries_;
  bool is_identity_ = false;
};

namespace detail {

inline void require_resolvent_point(const HermitianOperator& h, ComplexEnergy z) {
  if (z.im != 0.0) return;
  const RVector& ev = h.eigenvalues();
  if (ev.size() == 0) return;
  const double dist = (ev.array() - z.re).abs().minCoeff();
  if (dist <= 1e-12) {
    throw Error(ErrorKind::SingularShift,
                "real shift " + std::to_string(z.re) + " lies in the spectrum");
  }
}

}  // namespace detail

/// Factorization of H - z, reused across right-hand sides.
///
/// Dense storage uses partial-pivot LU and applies iterative refinement when
/// the reciprocal condition estimate drops below 1e-10. Sparse storage uses
/// SparseLU with one refinement sweep.
class ShiftedSolver {
 public:
  ShiftedSolver(const HermitianOperator& h, ComplexEnergy z) : h_(h), z_(z.value()) {
    detail::require_resolvent_point(h, z);
    const Index n = h.dimension();
    if (h.storage_kind() == StorageKind::sparse) {
      SparseCMatrix shifted = h.sparse_entries();
      SparseCMatrix eye(n, n);
      eye.setIdentity();
      shifted -= z_ * eye;
      shifted.makeCompressed();
      sparse_ = std::make_shared<Eigen::SparseLU<SparseCMatrix>>();
      sparse_->analyzePattern(shifted);
      sparse_->factorize(shifted);
      if (sparse_->info() != Eigen::Success) {
        throw Error(ErrorKind::SingularShift, "sparse factorization of H - z failed");
      }
      condition_ = std::numeric_limits<double>::quiet_NaN();
    } else {
      shifted_ = h.entries();
      shifted_.diagonal().array() -= z_;
      dense_ = Eigen::PartialPivLU<CMatrix>(shifted_);
      const double rc = dense_.rcond();
      condition_ = rc > 0.0 ? 1.0 / rc : kInf;
    }
  }

  /// Reciprocal of the LU condition estimate; NaN for sparse storage.
  double condition_estimate() const { return condition_; }

  CMatrix solve(const CMatrix& rhs) const {
    if (rhs.rows() != h_.dimension()) {
      throw Error(ErrorKind::DimensionMismatch, "right-hand side has " +
                                                    std::to_string(rhs.rows()) + " rows, expected " +
                                                    std::to_string(h_.dimension()));
    }
    CMatrix x;
    if (sparse_) {
      x = sparse_->solve(rhs);
      const CMatrix residual = rhs - apply_shifted(x);
      x += sparse_->solve(residual);
    } else {
      x = dense_.solve(rhs);
      if (condition_ > 1e10) {
        for (int sweep = 0; sweep < 3; ++sweep) {
          const CMatrix residual = rhs - shifted_ * x;
          x += dense_.solve(residual);
        }
      }
    }
    if (!x.allFinite()) {
      throw Error(ErrorKind::SingularShift, "resolvent solve produced non-finite values");
    }
    return x;
  }

  /// (H - z) x
  CMatrix apply_shifted(const CMatrix& x) const {
    if (h_.storage_kind() == StorageKind::sparse) {
      return CMatrix(h_.sparse_entries() * x) - z_ * x;
    }
    return h_.entries() * x - z_ * x;
  }

 private:
  HermitianOperator h_;
  cplx z_;
  CMatrix shifted_;
  Eigen::PartialPivLU<CMatrix> dense_;
  std::shared_ptr<Eigen::SparseLU<SparseCMatrix>> sparse_;
  double condition_ = 1.0;
};

/// R_z(H) v = (H - z)^{-1} v.
inline CVector resolvent_apply(const HermitianOperator& h, ComplexEnergy z, const CVector& v) {
  if (v.size() != h.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "vector length does not match operator dimension");
  }
  return ShiftedSolver(h, z).solve(v);
}

/// R_z(H) as a matrix, from a solve against the identity.
inline CMatrix resolvent_matrix(const HermitianOperator& h, ComplexEnergy z) {
  const Index n = h.dimension();
  return ShiftedSolver(h, z).solve(CMatrix::Identity(n, n));
}

/// T_z(H) = F (H - z)^{-1} F*, one factorization applied to the columns of F*.
inline CMatrix sandwiched_resolvent(const HermitianOperator& h, const Rigging& f, ComplexEnergy z) {
  if (f.dimension() != h.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "rigging and operator dimensions differ");
  }
  const CMatrix x = ShiftedSolver(h, z).solve(f.entries().adjoint());
  return f.entries() * x;
}

/// T_z(H) for many z on one operator: with H = Q diag(e) Q* and G = F Q,
/// T_z = G diag(1 / (e - z)) G*. One eigendecomposition (shared through the
/// operator's cache) replaces a factorization per point.
class SandwichedResolventFamily {
 public:
  SandwichedResolventFamily(const HermitianOperator& h, const Rigging& f) : h_(h) {
    if (f.dimension() != h.dimension()) {
      throw Error(ErrorKind::DimensionMismatch, "rigging and operator dimensions differ");
    }
    g_ = f.entries() * h.spectrum().eigenvectors;
  }

  CMatrix at(ComplexEnergy z) const {
    detail::require_resolvent_point(h_, z);
    const RVector& e = h_.eigenvalues();
    CVector d(e.size());
    for (Index k = 0; k < e.size(); ++k) d(k) = 1.0 / (e(k) - z.value());
    return g_ * d.asDiagonal() * g_.adjoint();
  }

 private:
  HermitianOperator h_;
  CMatrix g_;
};

/// H0 + r F* J F
inline HermitianOperator perturbed_operator(const HermitianOperator& h0, const Rigging& f,
                                            const DirectionOperator& j, double r) {
  if (f.dimension() != h0.dimension() || j.dimension() != f.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "operator, rigging and direction dimensions differ");
  }
  if (r == 0.0) return h0;
  const CMatrix v = j.is_identity() ? f.gram() : CMatrix(f.entries().adjoint() * j.entries() * f.entries());
  return HermitianOperator(h0.entries() + r * v);
}

/// H_r = H0 + r F* F
inline HermitianOperator perturbed_operator(const HermitianOperator& h0, const Rigging& f, double r) {
  return perturbed_operator(h0, f, DirectionOperator::identity(f.dimension()), r);
}

/// Orthonormal basis of the range of E_(lo,hi)(H).
///
/// Eigenvalues within 1e-10 * spectral radius of an endpoint count as lying
/// on it and are excluded.
inline SubspaceBasis spectral_projection(const HermitianOperator& h, Interval interval) {
  SubspaceBasis out;
  const Index n = h.dimension();
  out.dimension_ambient = n;
  out.vectors = CMatrix(n, 0);
  if (interval.empty() || n == 0) return out;
  const SpectralDecomposition& sd = h.spectrum();
  const double snap = 1e-10 * h.spectral_radius();
  std::vector<Index> inside;
  for (Index k = 0; k < n; ++k) {
    const double e = sd.eigenvalues(k);
    if (e > interval.lo + snap && e < interval.hi - snap) inside.push_back(k);
  }
  out.vectors = CMatrix(n, static_cast<Index>(inside.size()));
  for (std::size_t c = 0; c < inside.size(); ++c) {
    out.vectors.col(static_cast<Index>(c)) = sd.eigenvectors.col(inside[c]);
  }
  return out;
}

/// Projector onto the spectral subspace of an interval, as a matrix.
inline CMatrix spectral_projector(const HermitianOperator& h, Interval interval) {
  const SubspaceBasis b = spectral_projection(h, interval);
  return b.vectors * b.vectors.adjoint();
}

/// Eigenspace V(lambda, H): eigenvectors with |E - lambda| <= rel_tol * max(1, rho).
inline SubspaceBasis eigenspace(const HermitianOperator& h, double lambda, double rel_tol = 1e-8) {
  const double tol = rel_tol * h.scale();
  return spectral_projection(h, Interval{lambda - tol, lambda + tol});
}

/// Distance from lambda to the nearest eigenvalue not in lambda's own
/// cluster (|E - lambda| > rel_tol * max(1, rho)); +inf if there is none.
inline double local_spectral_gap(const HermitianOperator& h, double lambda, double rel_tol = 1e-8) {
  const double tol = rel_tol * h.scale();
  double gap = kInf;
  for (double e : h.eigenvalues()) {
    const double d = std::abs(e - lambda);
    if (d > tol) gap = std::min(gap, d);
  }
  return gap;
}

/// Relative Frobenius residual of
///   (w - z) R_w(H0) R_z(H1) = -R_z(H1) + R_w(H0) [1 - V R_z(H1)],
/// with V = F*F and H1 = H0 + V. The residual is scaled by the sum of the
/// Frobenius norms of the three terms.
inline double check_tricky_equality(const HermitianOperator& h0, const Rigging& f,
                                    ComplexEnergy w, ComplexEnergy z) {
  const Index n = h0.dimension();
  const CMatrix v = f.gram();
  const HermitianOperator h1(h0.entries() + v);
  const CMatrix rw = resolvent_matrix(h0, w);
  const CMatrix rz = resolvent_matrix(h1, z);
  const CMatrix lhs = (w.value() - z.value()) * (rw * rz);
  const CMatrix bracket = rw * (CMatrix::Identity(n, n) - v * rz);
  const CMatrix rhs = -rz + bracket;
  const double scale = lhs.norm() + rz.norm() + bracket.norm();
  if (scale == 0.0) return 0.0;
  return (lhs - rhs).norm() / scale;
}

}  // namespace lapkit
