// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace lapkit {
namespace {

using test::diag;
using test::unit;

LSProblem diag113(double r, std::optional<DirectionOperator> j = std::nullopt) {
  return make_ls_problem(diag({1, 1, 3}), Rigging::identity(3), 1.0, r, j);
}

CMatrix span12() {
  CMatrix s = CMatrix::Zero(3, 2);
  s(0, 0) = 1.0;
  s(1, 1) = 1.0;
  return s;
}

TEST(LsMatrix, DiagonalExamples) {
  CMatrix m = ls_matrix(diag113(1.0));
  CMatrix expect = CMatrix::Zero(3, 3);
  expect(2, 2) = 2.0 / 3.0;
  EXPECT_LE((m - expect).norm(), 1e-7);
  m = ls_matrix(diag113(2.0));
  expect(2, 2) = 0.5;
  EXPECT_LE((m - expect).norm(), 1e-7);
}

TEST(LsMatrix, OffSpectrumIsInvertible) {
  const LSProblem p = make_ls_problem(diag({1, 1, 3}), Rigging::identity(3), 2.5, 1.0);
  const SubspaceBasis b = null_space(ls_matrix(p), p.rank_tol);
  EXPECT_EQ(b.dimension(), 0);
  EXPECT_GT(b.singular_values.minCoeff(), p.rank_tol * b.singular_values(0));
}

TEST(LsMatrix, ResonantCouplingRejected) {
  try {
    diag113(0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ResonantCoupling);
  }
  EXPECT_THROW(diag113(-2.0), Error);
  // A direction that puts the coupling on a resonance surfaces at the probe.
  CMatrix j = CMatrix::Identity(3, 3);
  j(0, 0) = 0.0;
  j(1, 1) = 0.0;
  const LSProblem p = diag113(1.0, DirectionOperator(j));
  try {
    ls_matrix(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ResonantCoupling);
  }
}

TEST(LsMatrix, ScalingConsistency) {
  for (double c : {2.0, 0.5, 3.0}) {
    const CMatrix a = ls_matrix(diag113(1.0));
    const CMatrix b = ls_matrix(diag113(1.0 / c, DirectionOperator(c * CMatrix::Identity(3, 3))));
    EXPECT_LE((a - b).norm(), 1e-12);
  }
  const HermitianOperator h = build_operator(test::planted_spec(12, 1, 4));
  const Rigging f = test::random_rigging(12, 5);
  CMatrix jm = CMatrix::Identity(12, 12);
  for (Index k = 0; k < 12; ++k) jm(k, k) = 1.0 + 0.05 * k;
  const LSProblem p = make_ls_problem(h, f, 0.0, 1.0, DirectionOperator(jm));
  const LSProblem q = make_ls_problem(h, f, 0.0, 0.5, DirectionOperator(2.0 * jm));
  EXPECT_LE((ls_matrix(p) - ls_matrix(q)).norm(), 1e-12);
}

TEST(UpsilonSpace, Examples) {
  const SubspaceBasis b = upsilon_space(diag113(1.0));
  ASSERT_EQ(b.dimension(), 2);
  EXPECT_LE(max_principal_angle(b.vectors, span12()), 1e-10);
  EXPECT_LE(orthonormality_defect(b.vectors), 1e-10);
  EXPECT_LE(b.defining_residual, b.threshold);
  EXPECT_FALSE(b.ill_conditioned);

  const LSProblem off = make_ls_problem(diag({1, 1, 3}), Rigging::identity(3), 5.0, 1.0);
  EXPECT_EQ(upsilon_space(off).dimension(), 0);
}

TEST(UpsilonSpace, PlantedFixtureMatchesEigenspaceImage) {
  const ModelSpec spec = test::planted_spec(20, 2, 11);
  const HermitianOperator h = build_operator(spec);
  const Rigging f = test::random_rigging(20, 3);
  const double r = pick_regular_r(h, f, 0.0, 1e-2, {}, 1e-7);
  EXPECT_FALSE(is_resonant(h, f, 0.0, r, 1e-2));
  const SubspaceBasis b = upsilon_space(make_ls_problem(h, f, 0.0, r));
  ASSERT_EQ(b.dimension(), 2);
  const CMatrix fv = orthonormal_basis(f.entries() * planted_eigenvectors(spec));
  EXPECT_LE(max_principal_angle(b.vectors, fv), 1e-7);
}

TEST(NullSpace, IllConditionedFlag) {
  CMatrix m = CMatrix::Zero(3, 3);
  m(0, 0) = 1.0;
  m(1, 1) = 2e-12;
  m(2, 2) = 1e-12;
  const SubspaceBasis b = null_space(m, 1.5e-12);
  EXPECT_EQ(b.dimension(), 1);
  EXPECT_NEAR(b.rank_gap, 2.0, 1e-9);
  EXPECT_TRUE(b.ill_conditioned);
}

TEST(Independence, RValues) {
  EXPECT_LE(check_r_independence(diag113(1.0), {2.0, 3.0}), 1e-10);
  const LSProblem off = make_ls_problem(diag({1, 1, 3}), Rigging::identity(3), 5.0, 1.0);
  EXPECT_EQ(check_r_independence(off, {0.5, 3.0}), 0.0);

  const ModelSpec spec = test::planted_spec(20, 2, 11);
  const HermitianOperator h = build_operator(spec);
  const Rigging f = test::random_rigging(20, 3);
  const auto rs = regular_r_values(h, f, 0.0, 1e-2, {}, 1e-7, 3);
  const LSProblem p = make_ls_problem(h, f, 0.0, rs[0]);
  EXPECT_LE(check_r_independence(p, {rs[1], rs[2]}), 1e-6);
}

TEST(Independence, Directions) {
  // (r, J) -> (r/2, 2J) leaves the equation unchanged.
  const LSProblem half = diag113(0.5, DirectionOperator(2.0 * CMatrix::Identity(3, 3)));
  const double a = max_principal_angle(upsilon_space(diag113(1.0)).vectors, upsilon_space(half).vectors);
  EXPECT_LE(a, 1e-10);

  CMatrix j = CMatrix::Identity(3, 3);
  j(2, 2) = 2.0;
  EXPECT_LE(check_J_independence(diag113(1.0), {DirectionOperator(j)}), 1e-6);

  const LSProblem off = make_ls_problem(diag({1, 1, 3}), Rigging::identity(3), 5.0, 1.0);
  EXPECT_EQ(check_J_independence(off, {DirectionOperator(j)}), 0.0);
}

TEST(Independence, DimensionMismatchReported) {
  SubspaceBasis a, b;
  a.dimension_ambient = b.dimension_ambient = 3;
  a.vectors = span12();
  b.vectors = span12().leftCols(1);
  try {
    max_pairwise_angle({a, b});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(BoundState, Examples) {
  const LSProblem p = diag113(1.0);
  BoundState b = extract_bound_state(unit(3, 0), p);
  EXPECT_LE((b.chi - unit(3, 0)).norm(), 1e-7);
  EXPECT_LE(b.eigen_residual, 1e-12);

  const Rigging f = test::rig_diag({1, 2, 1});
  const LSProblem q = make_ls_problem(diag({1, 1, 3}), f, 1.0, 1.0);
  const CVector u = f.entries() * unit(3, 1);
  b = extract_bound_state(u / u.norm(), q);
  EXPECT_LE(std::abs(b.chi(0)) + std::abs(b.chi(2)), 1e-12 * b.chi.norm());
  EXPECT_LE(b.eigen_residual, 1e-12);

  try {
    extract_bound_state(unit(3, 2), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotInKernel);
  }
}

TEST(BoundState, PlantedBasisVectors) {
  for (int m = 1; m <= 3; ++m) {
    const ModelSpec spec = test::planted_spec(20, m, 11);
    const HermitianOperator h = build_operator(spec);
    const Rigging f = test::random_rigging(20, 3);
    const LSProblem p = make_ls_problem(h, f, 0.0, pick_regular_r(h, f, 0.0, 1e-2, {}, 1e-7));
    const LSSolution sol = solve_ls(p);
    ASSERT_EQ(sol.upsilon.dimension(), m);
    for (Index c = 0; c < m; ++c) {
      EXPECT_LE(extract_bound_state(sol.upsilon.vectors.col(c), p, sol.matrix).eigen_residual, 1e-7);
    }
  }
}

}  // namespace
}  // namespace lapkit
