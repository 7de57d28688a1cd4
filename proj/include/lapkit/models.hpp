// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lapkit/operator_core.hpp"
#include "lapkit/rng.hpp"

namespace lapkit {

enum class ModelKind { diagonal, random_hermitian, jacobi, anderson, planted_eigenvalue };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::diagonal: return "diagonal";
    case ModelKind::random_hermitian: return "random_hermitian";
    case ModelKind::jacobi: return "jacobi";
    case ModelKind::anderson: return "anderson";
    case ModelKind::planted_eigenvalue: return "planted_eigenvalue";
  }
  return "unknown";
}

inline std::optional<ModelKind> model_kind_from_string(const std::string& s) {
  for (ModelKind k : {ModelKind::diagonal, ModelKind::random_hermitian, ModelKind::jacobi,
                      ModelKind::anderson, ModelKind::planted_eigenvalue}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

/// Recipe for a test operator.
///
/// Scalar parameters by kind:
///   random_hermitian    scale (1)
///   anderson            W (disorder width, 1)
///   planted_eigenvalue  lambda (0), multiplicity (1), gap (0.5), spread (2)
/// `values` holds the diagonal for `diagonal` and the on-site potential for
/// `jacobi` (empty means zero potential).
struct ModelSpec {
  ModelKind kind = ModelKind::diagonal;
  Index size = 1;
  std::map<std::string, double> params;
  std::vector<double> values;
  std::uint64_t seed = 0;

  double param(const std::string& name, double fallback) const {
    auto it = params.find(name);
    return it == params.end() ? fallback : it->second;
  }

  bool operator==(const ModelSpec&) const = default;
};

enum class RiggingKind { identity, diagonal_weights, random_well_conditioned };

inline std::string to_string(RiggingKind k) {
  switch (k) {
    case RiggingKind::identity: return "identity";
    case RiggingKind::diagonal_weights: return "diagonal_weights";
    case RiggingKind::random_well_conditioned: return "random_well_conditioned";
  }
  return "unknown";
}

inline std::optional<RiggingKind> rigging_kind_from_string(const std::string& s) {
  for (RiggingKind k : {RiggingKind::identity, RiggingKind::diagonal_weights,
                        RiggingKind::random_well_conditioned}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

struct RiggingSpec {
  RiggingKind kind = RiggingKind::identity;
  Index size = 1;
  std::vector<double> weights;   // diagonal_weights
  double condition_bound = 10.0; // random_well_conditioned
  std::uint64_t seed = 0;

  bool operator==(const RiggingSpec&) const = default;
};

/// Haar-distributed unitary from QR of a complex Gaussian matrix, with the
/// phases of R's diagonal folded back into Q. Entry (i, j) of the Gaussian
/// matrix uses normals 2(i n + j) and 2(i n + j) + 1 of the stream.
inline CMatrix random_unitary(Index n, std::uint64_t seed, std::uint64_t stream_id) {
  const rng::Stream s(seed, stream_id);
  CMatrix g(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const auto e = static_cast<std::uint64_t>(i * n + j);
      g(i, j) = cplx(s.normal(2 * e), s.normal(2 * e + 1)) / std::sqrt(2.0);
    }
  }
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  const CMatrix& r = qr.matrixQR();
  for (Index k = 0; k < n; ++k) {
    const double a = std::abs(r(k, k));
    if (a > 0.0) q.col(k) *= r(k, k) / a;
  }
  return q;
}

namespace detail {

inline void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::InvalidSpec, message);
}

inline CMatrix jacobi_matrix(const std::vector<double>& potential) {
  const auto n = static_cast<Index>(potential.size());
  CMatrix m = CMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    m(i, i) = potential[static_cast<std::size_t>(i)];
    if (i + 1 < n) {
      m(i, i + 1) = 1.0;
      m(i + 1, i) = 1.0;
    }
  }
  return m;
}

}  // namespace detail

inline void validate(const ModelSpec& spec) {
  detail::require(spec.size >= 1, "model size must be positive");
  const auto n = static_cast<std::size_t>(spec.size);
  switch (spec.kind) {
    case ModelKind::diagonal:
      detail::require(spec.values.size() == n, "diagonal model needs exactly `size` values");
      break;
    case ModelKind::jacobi:
      detail::require(spec.values.empty() || spec.values.size() == n,
                      "jacobi potential must be empty or have `size` entries");
      break;
    case ModelKind::anderson:
      detail::require(spec.param("W", 1.0) >= 0.0, "anderson disorder W must be nonnegative");
      break;
    case ModelKind::random_hermitian:
      detail::require(spec.param("scale", 1.0) > 0.0, "random_hermitian scale must be positive");
      break;
    case ModelKind::planted_eigenvalue: {
      const double m = spec.param("multiplicity", 1.0);
      detail::require(m >= 1.0 && m == std::floor(m), "multiplicity must be a positive integer");
      detail::require(m <= static_cast<double>(spec.size), "multiplicity exceeds size");
      detail::require(spec.param("gap", 0.5) > 0.0, "gap must be positive");
      detail::require(spec.param("spread", 2.0) >= 0.0, "spread must be nonnegative");
      break;
    }
  }
}

/// Builds the operator described by `spec`; equal specs give bit-identical
/// matrices.
inline HermitianOperator build_operator(const ModelSpec& spec) {
  validate(spec);
  const Index n = spec.size;
  switch (spec.kind) {
    case ModelKind::diagonal: {
      RVector v = Eigen::Map<const RVector>(spec.values.data(), n);
      return HermitianOperator::diagonal(v);
    }
    case ModelKind::jacobi: {
      std::vector<double> pot = spec.values;
      if (pot.empty()) pot.assign(static_cast<std::size_t>(n), 0.0);
      return HermitianOperator(detail::jacobi_matrix(pot));
    }
    case ModelKind::anderson: {
      const double w = spec.param("W", 1.0);
      const rng::Stream s(spec.seed, rng::kStreamPotential);
      std::vector<double> pot(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) {
        pot[static_cast<std::size_t>(i)] = s.uniform(static_cast<std::uint64_t>(i), -w / 2, w / 2);
      }
      return HermitianOperator(detail::jacobi_matrix(pot));
    }
    case ModelKind::random_hermitian: {
      // GUE-like: (G + G*)/2 scaled so the spectrum is O(scale).
      const double scale = spec.param("scale", 1.0);
      const rng::Stream s(spec.seed, rng::kStreamHermitian);
      CMatrix g(n, n);
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
          const auto e = static_cast<std::uint64_t>(i * n + j);
          g(i, j) = cplx(s.normal(2 * e), s.normal(2 * e + 1));
        }
      }
      const double norm = scale / (2.0 * std::sqrt(2.0 * static_cast<double>(n)));
      return HermitianOperator((g + g.adjoint()) * norm);
    }
    case ModelKind::planted_eigenvalue: {
      const double lambda = spec.param("lambda", 0.0);
      const auto m = static_cast<Index>(spec.param("multiplicity", 1.0));
      const double gap = spec.param("gap", 0.5);
      const double spread = spec.param("spread", 2.0);
      const rng::Stream s(spec.seed, rng::kStreamSpectrum);
      RVector d(n);
      for (Index k = 0; k < n; ++k) {
        if (k < m) {
          d(k) = lambda;
        } else {
          const auto c = static_cast<std::uint64_t>(2 * k);
          const double sign = s.uniform(c) < 0.5 ? -1.0 : 1.0;
          d(k) = lambda + sign * (gap + spread * s.uniform(c + 1));
        }
      }
      const CMatrix q = random_unitary(n, spec.seed, rng::kStreamUnitary);
      return HermitianOperator(q * d.cast<cplx>().asDiagonal() * q.adjoint());
    }
  }
  throw Error(ErrorKind::InvalidSpec, "unknown model kind");
}

/// Eigenvectors of a planted_eigenvalue model that span the planted
/// eigenspace (the first `multiplicity` columns of the hidden unitary).
inline CMatrix planted_eigenvectors(const ModelSpec& spec) {
  if (spec.kind != ModelKind::planted_eigenvalue) {
    throw Error(ErrorKind::InvalidSpec, "planted_eigenvectors needs a planted_eigenvalue spec");
  }
  validate(spec);
  const auto m = static_cast<Index>(spec.param("multiplicity", 1.0));
  return random_unitary(spec.size, spec.seed, rng::kStreamUnitary).leftCols(m);
}

inline Rigging build_rigging(const RiggingSpec& spec) {
  detail::require(spec.size >= 1, "rigging size must be positive");
  const Index n = spec.size;
  switch (spec.kind) {
    case RiggingKind::identity:
      return Rigging::identity(n);
    case RiggingKind::diagonal_weights: {
      detail::require(spec.weights.size() == static_cast<std::size_t>(n),
                      "diagonal_weights needs exactly `size` weights");
      for (double w : spec.weights) detail::require(w > 0.0, "rigging weights must be positive");
      return Rigging::diagonal(Eigen::Map<const RVector>(spec.weights.data(), n));
    }
    case RiggingKind::random_well_conditioned: {
      // U diag(s) V* with s in [1, bound]: the condition number is at most
      // the bound and the smallest singular value is at least one.
      detail::require(spec.condition_bound >= 1.0, "condition bound must be >= 1");
      const rng::Stream s(spec.seed, rng::kStreamRiggingSingular);
      RVector sv(n);
      for (Index k = 0; k < n; ++k) {
        sv(k) = std::pow(spec.condition_bound, s.uniform(static_cast<std::uint64_t>(k)));
      }
      const CMatrix u = random_unitary(n, spec.seed, rng::kStreamRiggingLeft);
      const CMatrix v = random_unitary(n, spec.seed, rng::kStreamRiggingRight);
      return Rigging(u * sv.cast<cplx>().asDiagonal() * v.adjoint());
    }
  }
  throw Error(ErrorKind::InvalidSpec, "unknown rigging kind");
}

}  // namespace lapkit
