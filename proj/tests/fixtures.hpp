// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

// Seeded fixtures shared by the unit and acceptance suites.

#pragma once

#include <Eigen/Dense>

#include "lapkit/lapkit.hpp"

namespace lapkit::test {

inline HermitianOperator diag(std::initializer_list<double> v) {
  RVector d(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) d(k++) = x;
  return HermitianOperator::diagonal(d);
}

inline Rigging rig_diag(std::initializer_list<double> v) {
  RVector d(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) d(k++) = x;
  return Rigging::diagonal(d);
}

inline HermitianOperator random_hermitian(Index n, std::uint64_t seed) {
  ModelSpec s;
  s.kind = ModelKind::random_hermitian;
  s.size = n;
  s.seed = seed;
  return build_operator(s);
}

inline Rigging random_rigging(Index n, std::uint64_t seed, double bound = 10.0) {
  RiggingSpec s;
  s.kind = RiggingKind::random_well_conditioned;
  s.size = n;
  s.condition_bound = bound;
  s.seed = seed;
  return build_rigging(s);
}

inline ModelSpec planted_spec(Index n, int m, std::uint64_t seed, double lambda = 0.0) {
  ModelSpec s;
  s.kind = ModelKind::planted_eigenvalue;
  s.size = n;
  s.seed = seed;
  s.params = {{"lambda", lambda}, {"multiplicity", m}, {"gap", 0.5}};
  return s;
}

/// Oracle from an independent eigendecomposition: Q diag(1/(e - z)) Q*.
inline CMatrix oracle_resolvent(const CMatrix& h, cplx z) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  CVector d = (es.eigenvalues().cast<cplx>().array() - z).inverse();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

inline CVector unit(Index n, Index k) {
  CVector v = CVector::Zero(n);
  v(k) = 1.0;
  return v;
}

}  // namespace lapkit::test
