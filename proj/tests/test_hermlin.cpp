// Copyright 2026 The qprog Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qprog/channels.hpp"
#include "qprog/hermlin.hpp"
#include "qprog/random.hpp"

namespace qprog {
namespace {

CMatrix diag(std::initializer_list<double> v) {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(v.size()),
                            static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) {
    m(i, i) = x;
    ++i;
  }
  return m;
}

TEST(HermEig, IdentityHasUnitSpectrum) {
  SpectralDecomposition e = herm_eig(identity(4));
  EXPECT_LT((e.eigenvalues - RVector::Ones(4)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(HermEig, DiagonalSortedDescendingWithStandardBasis) {
  SpectralDecomposition e = herm_eig(diag({-1.0, 3.0}));
  EXPECT_NEAR(e.eigenvalues[0], 3.0, 1e-14);
  EXPECT_NEAR(e.eigenvalues[1], -1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.eigenvectors(1, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.eigenvectors(0, 1)), 1.0, 1e-14);

  e = herm_eig(diag({3.0, -1.0}));
  EXPECT_NEAR(std::abs(e.eigenvectors(0, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.eigenvectors(1, 1)), 1.0, 1e-14);
}

TEST(HermEig, ReconstructionAndUnitarityAcrossSizes) {
  Rng rng(8);
  for (Eigen::Index n : {2, 8, 64, 256, 1024}) {
    CMatrix m = random_hermitian(n, rng);
    SpectralDecomposition e = herm_eig(m);
    double rec = (e.reconstruct() - m).norm();
    EXPECT_LE(rec, 1e-10 * (1.0 + m.norm())) << "n=" << n;
    double unit = max_abs(e.eigenvectors.adjoint() * e.eigenvectors - identity(n));
    EXPECT_LE(unit, 1e-10) << "n=" << n;
    for (Eigen::Index i = 1; i < n; ++i) {
      ASSERT_GE(e.eigenvalues[i - 1], e.eigenvalues[i]);
    }
  }
}

TEST(HermEig, RejectsNonHermitianInput) {
  CMatrix m(2, 2);
  m << 1, 2, 0, 1;
  EXPECT_THROW(herm_eig(m), SymmetryError);
  try {
    herm_eig(m);
  } catch (const SymmetryError& e) {
    EXPECT_NE(std::string(e.what()).find("herm_eig"), std::string::npos);
  }
}

TEST(Hermitian, RelativeTolerance) {
  CMatrix m = diag({1e6, 2.0});
  m(0, 1) = 1e-7;  // relative asymmetry 1e-13
  EXPECT_TRUE(is_hermitian(m));
  m(0, 1) = 1e-5;  // 1e-11
  EXPECT_FALSE(is_hermitian(m));
}

TEST(MatrixFunction, SqrtOfScaledIdentity) {
  CMatrix r = matrix_function(4.0 * identity(3), [](double x) { return std::sqrt(x); });
  EXPECT_LT(max_abs(r - 2.0 * identity(3)), 1e-14);
}

TEST(MatrixFunction, SignWithZeroConvention) {
  CMatrix s = matrix_sign(diag({2.0, 0.0, -3.0}));
  EXPECT_LT(max_abs(s - diag({1.0, 0.0, -1.0})), 1e-14);
}

TEST(MatrixFunction, SignTreatsRoundoffZerosAsZero) {
  Rng rng(3);
  CMatrix u = random_unitary(3, rng);
  CMatrix m = u * diag({1.0, 1e-16, -1e-16}) * u.adjoint();
  CMatrix expect = u * diag({1.0, 0.0, 0.0}) * u.adjoint();
  EXPECT_LT(max_abs(matrix_sign(hermitian_part(m)) - expect), 1e-10);
}

TEST(MatrixFunction, ExpiOfDiagonal) {
  CMatrix r = expi(diag({std::numbers::pi, 0.0}));
  CMatrix expect = diag({-1.0, 1.0});
  EXPECT_LT(max_abs(r - expect), 1e-14);
}

TEST(MatrixFunction, SqrtSquaresBackOnRandomPsd) {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    CMatrix g = random_ginibre(6, 6, rng);
    CMatrix m = g * g.adjoint();
    CMatrix s = sqrt_psd(m);
    EXPECT_LE(max_abs(s * s - m), 1e-9);
  }
}

TEST(MatrixFunction, UndefinedValueIsDomainError) {
  EXPECT_THROW(matrix_function(diag({1.0, -1.0}), [](double x) { return std::sqrt(x); }),
               DomainError);
  EXPECT_THROW(sqrt_psd(diag({1.0, -0.5})), DomainError);
}

TEST(MatrixFunction, InverseSqrtUsesPseudoInverse) {
  CMatrix r = inv_sqrt_psd(diag({4.0, 1e-14, 0.0}));
  EXPECT_LT(max_abs(r - diag({0.5, 0.0, 0.0})), 1e-14);
}

TEST(Kron, IdentityTimesIdentity) {
  EXPECT_EQ(max_abs(kron(identity(2), identity(2)) - identity(4)), 0.0);
}

TEST(Kron, XXFlipsBothQubits) {
  CVector v = CVector::Zero(4);
  v[0] = 1.0;
  CVector w = kron(pauli::X(), pauli::X()) * v;
  EXPECT_EQ(w[3], Complex(1.0, 0.0));
  EXPECT_EQ(w.head(3).norm(), 0.0);
}

TEST(Kron, IndexLayoutAndTraceFactorizes) {
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    CMatrix a = random_ginibre(2, 3, rng);
    CMatrix b = random_ginibre(4, 2, rng);
    CMatrix k = kron(a, b);
    ASSERT_EQ(k.rows(), 8);
    ASSERT_EQ(k.cols(), 6);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j)
        for (int p = 0; p < 4; ++p)
          for (int q = 0; q < 2; ++q) EXPECT_EQ(k(i * 4 + p, j * 2 + q), a(i, j) * b(p, q));
    CMatrix sa = random_ginibre(3, 3, rng), sb = random_ginibre(4, 4, rng);
    EXPECT_LT(std::abs(kron(sa, sb).trace() - sa.trace() * sb.trace()), 1e-12);
  }
}

TEST(PartialTrace, MaximallyEntangledMarginal) {
  CMatrix phi = max_entangled(2).matrix();
  EXPECT_LT(max_abs(partial_trace(phi, {2, 2}, {0}) - identity(2) / 2.0), 1e-15);
  EXPECT_LT(max_abs(partial_trace(phi, {2, 2}, {1}) - identity(2) / 2.0), 1e-15);
}

TEST(PartialTrace, ProductState) {
  Rng rng(6);
  CMatrix rho = random_density(3, rng).matrix();
  CMatrix sigma = 2.5 * random_density(2, rng).matrix();
  EXPECT_LT(max_abs(partial_trace(kron(rho, sigma), {3, 2}, {0}) - rho * 2.5), 1e-14);
}

TEST(PartialTrace, TracePreservingAndLinear) {
  Rng rng(7);
  SubsystemShape shape{2, 3, 2};
  for (int t = 0; t < 10; ++t) {
    CMatrix a = random_ginibre(12, 12, rng);
    CMatrix b = random_ginibre(12, 12, rng);
    Complex c(0.3, -1.2);
    EXPECT_LT(std::abs(partial_trace(a, shape, {}).trace() - a.trace()), 1e-12);
    EXPECT_LT(std::abs(partial_trace(a, shape, {1}).trace() - a.trace()), 1e-12);
    EXPECT_LT(std::abs(partial_trace(a, shape, {0, 2}).trace() - a.trace()), 1e-12);
    CMatrix lhs = partial_trace(a + c * b, shape, {0, 2});
    CMatrix rhs = partial_trace(a, shape, {0, 2}) + c * partial_trace(b, shape, {0, 2});
    EXPECT_LT(max_abs(lhs - rhs), 1e-12);
  }
}

TEST(PartialTrace, InconsistentShapeIsDimensionError) {
  EXPECT_THROW(partial_trace(identity(6), {2, 2}, {0}), DimensionError);
}

TEST(Permute, SwapOfProduct) {
  Rng rng(9);
  CMatrix rho = random_density(2, rng).matrix();
  CMatrix sigma = random_density(3, rng).matrix();
  CMatrix out = permute_subsystems(kron(rho, sigma), {2, 3}, {1, 0});
  EXPECT_LT(max_abs(out - kron(sigma, rho)), 1e-15);
}

TEST(Permute, SwapTwiceIsIdentityAndIdentityPermutationIsNoop) {
  Rng rng(10);
  CMatrix m = random_ginibre(9, 9, rng);
  CMatrix once = permute_subsystems(m, {3, 3}, {1, 0});
  EXPECT_EQ(max_abs(permute_subsystems(once, {3, 3}, {1, 0}) - m), 0.0);
  EXPECT_EQ(max_abs(permute_subsystems(m, {3, 3}, {0, 1}) - m), 0.0);
}

TEST(Permute, CompositionComposes) {
  Rng rng(11);
  SubsystemShape shape{2, 3, 4};
  CMatrix m = random_ginibre(24, 24, rng);
  std::vector<int> p{2, 0, 1}, q{1, 2, 0};
  CMatrix once = permute_subsystems(m, shape, p);
  CMatrix twice = permute_subsystems(once, shape.permuted(p), q);
  // output j of the composition is input p[q[j]].
  std::vector<int> pq{p[1], p[2], p[0]};
  EXPECT_EQ(max_abs(twice - permute_subsystems(m, shape, pq)), 0.0);
}

TEST(Permute, CyclicShiftOfBasisProjectorFollowsBitPermutation) {
  // Qubits (b0 b1 b2), b0 most significant. Output qubit j is input qubit
  // perm[j], so basis state |b0 b1 b2> goes to |b_perm[0] b_perm[1] b_perm[2]>.
  std::vector<int> perm{1, 2, 0};
  for (int idx = 0; idx < 8; ++idx) {
    CMatrix proj = CMatrix::Zero(8, 8);
    proj(idx, idx) = 1.0;
    int bits[3] = {(idx >> 2) & 1, (idx >> 1) & 1, idx & 1};
    int out = (bits[perm[0]] << 2) | (bits[perm[1]] << 1) | bits[perm[2]];
    CMatrix expect = CMatrix::Zero(8, 8);
    expect(out, out) = 1.0;
    EXPECT_EQ(max_abs(permute_subsystems(proj, {2, 2, 2}, perm) - expect), 0.0)
        << "idx=" << idx;
  }
}

TEST(Permute, InvalidPermutationRejected) {
  EXPECT_THROW(permute_subsystems(identity(4), {2, 2}, {0, 0}), DimensionError);
  EXPECT_THROW(permute_subsystems(identity(4), {2, 2}, {0}), DimensionError);
  EXPECT_THROW(permute_subsystems(identity(4), {2, 2}, {0, 2}), DimensionError);
}

TEST(Norms, DiagonalExample) {
  Norms n = norms(diag({1.0, -2.0}));
  EXPECT_NEAR(n.trace_norm, 3.0, 1e-14);
  EXPECT_NEAR(n.spectral_norm, 2.0, 1e-14);
  EXPECT_NEAR(n.frobenius_norm, std::sqrt(5.0), 1e-14);
}

TEST(Norms, DensityMatrixHasUnitTraceNorm) {
  Rng rng(12);
  EXPECT_NEAR(trace_norm(random_density(5, rng).matrix()), 1.0, 1e-12);
}

TEST(Norms, SchattenMonotonicityOnRandomHermitian) {
  Rng rng(13);
  for (int t = 0; t < 100; ++t) {
    CMatrix m = random_hermitian(2 + t % 7, rng);
    Norms n = norms(m);
    EXPECT_GE(n.spectral_norm, 0.0);
    EXPECT_LE(n.spectral_norm, n.frobenius_norm + 1e-12);
    EXPECT_LE(n.frobenius_norm, n.trace_norm + 1e-12);
    EXPECT_NEAR(schatten_norm(m, 1.0), n.trace_norm, 1e-10);
    EXPECT_NEAR(schatten_norm(m, 2.0), n.frobenius_norm, 1e-10);
    EXPECT_NEAR(schatten_norm(m, std::numeric_limits<double>::infinity()),
                n.spectral_norm, 1e-12);
  }
}

TEST(Norms, GeneralMatrixUsesSingularValues) {
  CMatrix m(2, 2);
  m << 0, 1, 0, 0;
  Norms n = norms(m);
  EXPECT_NEAR(n.trace_norm, 1.0, 1e-14);
  EXPECT_NEAR(n.spectral_norm, 1.0, 1e-14);
}

TEST(Vec, RowMajorRoundTrip) {
  Rng rng(14);
  CMatrix m = random_ginibre(3, 4, rng);
  CVector v = vec_rowmajor(m);
  EXPECT_EQ(v[1], m(0, 1));
  EXPECT_EQ(unvec_rowmajor(v, 3, 4), m);
}

}  // namespace
}  // namespace qprog
