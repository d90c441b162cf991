// hmimo: DFT-based channel estimation for holographic MIMO uniform linear arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "hmimo/linalg.hpp"
#include "hmimo/rng.hpp"

namespace {

using namespace hmimo;

CMatrix random_hermitian(Eigen::Index n, std::uint64_t seed) {
    RngStream rng(seed);
    CMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rng.complex_gaussian();
    return 0.5 * (m + m.adjoint().eval());
}

TEST(HermitianEvdTest, IdentityHasUnitEigenvalues) {
    const auto evd = hermitian_evd(CMatrix::Identity(3, 3));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(evd.eigenvalues(i), 1.0, 1e-12);
}

TEST(HermitianEvdTest, TwoByTwoClosedForm) {
    CMatrix m(2, 2);
    m << 2.0, 1.0, 1.0, 2.0;
    const auto evd = hermitian_evd(m);
    // a +- b for [[a, b], [b, a]]
    EXPECT_NEAR(evd.eigenvalues(0), 3.0, 1e-12);
    EXPECT_NEAR(evd.eigenvalues(1), 1.0, 1e-12);
}

TEST(HermitianEvdTest, DiagonalPassesThroughSorted) {
    CMatrix m = CMatrix::Zero(3, 3);
    m(0, 0) = 5.0;
    m(1, 1) = 0.0;
    m(2, 2) = -1.0;
    const auto evd = hermitian_evd(m);
    EXPECT_NEAR(evd.eigenvalues(0), 5.0, 1e-12);
    EXPECT_NEAR(evd.eigenvalues(1), 0.0, 1e-12);
    EXPECT_NEAR(evd.eigenvalues(2), -1.0, 1e-12);
}

TEST(HermitianEvdTest, ReconstructionAndUnitarityOnRandomInputs) {
    for (Eigen::Index n : {2, 3, 5, 8, 16, 33, 64}) {
        const CMatrix m = random_hermitian(n, 100 + static_cast<std::uint64_t>(n));
        const auto evd = hermitian_evd(m);
        for (Eigen::Index i = 0; i + 1 < n; ++i)
            EXPECT_GE(evd.eigenvalues(i), evd.eigenvalues(i + 1));
        const CMatrix recon =
            evd.eigenvectors * evd.eigenvalues.asDiagonal() * evd.eigenvectors.adjoint();
        EXPECT_LT((recon - m).norm(), 1e-10 * m.norm()) << "n=" << n;
        const CMatrix gram = evd.eigenvectors.adjoint() * evd.eigenvectors;
        EXPECT_LT((gram - CMatrix::Identity(n, n)).norm(), 1e-10) << "n=" << n;
    }
}

TEST(HermitianEvdTest, RejectsNonSquareAndNonHermitian) {
    EXPECT_THROW(hermitian_evd(CMatrix::Zero(2, 3)), std::invalid_argument);
    CMatrix m(2, 2);
    m << 1.0, Complex(0.0, 1.0), Complex(0.0, 1.0), 1.0;  // skew in the off-diagonal
    EXPECT_THROW(hermitian_evd(m), std::invalid_argument);
}

TEST(DftUnitaryTest, ImpulseAndConstant) {
    CVector impulse = CVector::Zero(4);
    impulse(0) = 1.0;
    const CVector f = dft_unitary(impulse, DftDirection::forward);
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(f(i).real(), 0.5, 1e-14);
        EXPECT_NEAR(f(i).imag(), 0.0, 1e-14);
    }
    const CVector c = dft_unitary(CVector::Ones(4), DftDirection::forward);
    EXPECT_NEAR(c(0).real(), 2.0, 1e-14);
    for (int i = 1; i < 4; ++i) EXPECT_NEAR(std::abs(c(i)), 0.0, 1e-14);
}

TEST(DftUnitaryTest, HandEvaluatedFourPoint) {
    CVector v(4);
    v << 1.0, 0.4, 0.2, 0.4;
    const CVector f = 2.0 * dft_unitary(v, DftDirection::forward);  // sqrt(4) * unitary = plain DFT
    const double want[4] = {2.0, 0.8, 0.4, 0.8};
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(f(i).real(), want[i], 1e-13);
        EXPECT_NEAR(f(i).imag(), 0.0, 1e-13);
    }
}

TEST(DftUnitaryTest, RoundTripAndParseval) {
    for (Eigen::Index n : {1, 2, 3, 4, 8, 64}) {
        RngStream rng(static_cast<std::uint64_t>(n) * 17 + 5);
        CVector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.complex_gaussian();
        const CVector f = dft_unitary(v, DftDirection::forward);
        EXPECT_NEAR(f.norm(), v.norm(), 1e-12 * v.norm()) << "n=" << n;
        const CVector back = dft_unitary(f, DftDirection::inverse);
        EXPECT_LT((back - v).norm(), 1e-12 * v.norm()) << "n=" << n;
    }
}

TEST(PsdFactorTest, IdentityAndDiagonal) {
    const CMatrix s1 = psd_factor(CMatrix::Identity(2, 2));
    EXPECT_LT((s1 * s1.adjoint() - CMatrix::Identity(2, 2)).norm(), 1e-12);
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 1.0;
    const CMatrix s2 = psd_factor(d);
    EXPECT_LT((s2 * s2.adjoint() - d).norm(), 1e-12);
}

TEST(PsdFactorTest, RankOneOuterProduct) {
    CVector a(2);
    a << Complex(1.0, 0.0), Complex(0.0, 1.0);
    const CMatrix m = a * a.adjoint();
    const CMatrix s = psd_factor(m);
    const CMatrix back = s * s.adjoint();
    EXPECT_NEAR(back.real().trace(), 2.0, 1e-12);
    EXPECT_LT((back - m).norm(), 1e-12);
    // numerical rank 1: second singular value of S vanishes
    Eigen::JacobiSVD<CMatrix> svd(s);
    EXPECT_LT(svd.singularValues()(1), 1e-10);
}

TEST(PsdFactorTest, ClampsTinyNegativesRejectsLargeOnes) {
    CMatrix m = CMatrix::Identity(2, 2);
    m(1, 1) = -1e-12;  // within the clamp window relative to lambda_max = 1
    const CMatrix s = psd_factor(m, 1e-10);
    CMatrix clamped = CMatrix::Zero(2, 2);
    clamped(0, 0) = 1.0;
    EXPECT_LT((s * s.adjoint() - clamped).norm(), 1e-10);
    m(1, 1) = -0.5;
    EXPECT_THROW(psd_factor(m, 1e-10), NotPsdError);
}

TEST(SolveHermitianTest, IdentityAndScaledIdentity) {
    CMatrix b(2, 1);
    b << 3.0, 3.0;
    EXPECT_LT((solve_hermitian(CMatrix::Identity(2, 2), b) - b).norm(), 1e-14);
    EXPECT_LT((solve_hermitian(2.0 * CMatrix::Identity(2, 2), b) - 0.5 * b).norm(), 1e-14);
}

TEST(SolveHermitianTest, TwoByTwoHandSolution) {
    CMatrix m(2, 2);
    m << 2.0, 1.0, 1.0, 2.0;
    CMatrix b(2, 1);
    b << 3.0, 3.0;
    const CMatrix x = solve_hermitian(m, b);
    EXPECT_NEAR(x(0, 0).real(), 1.0, 1e-12);
    EXPECT_NEAR(x(1, 0).real(), 1.0, 1e-12);
}

TEST(SolveHermitianTest, ResidualPropertyOnRandomWellConditioned) {
    for (Eigen::Index n : {4, 16, 48}) {
        CMatrix m = random_hermitian(n, 1234 + static_cast<std::uint64_t>(n));
        m += static_cast<double>(n) * 2.0 * CMatrix::Identity(n, n);  // push eigenvalues positive-ish
        RngStream rng(99);
        CMatrix rhs(n, 3);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < 3; ++j) rhs(i, j) = rng.complex_gaussian();
        const CMatrix x = solve_hermitian(m, rhs);
        EXPECT_LT((m * x - rhs).norm(), 1e-8 * rhs.norm()) << "n=" << n;
    }
}

TEST(SolveHermitianTest, IndefiniteHermitianStillSolves) {
    CMatrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;  // indefinite: LLT fails, LU path takes over
    CMatrix b(2, 1);
    b << 2.0, 2.0;
    const CMatrix x = solve_hermitian(m, b);
    EXPECT_LT((m * x - b).norm(), 1e-12);
}

TEST(SolveHermitianTest, SingularRaisesWithConditionEstimate) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = 1.0;  // exactly singular
    CMatrix b(2, 1);
    b << 1.0, 1.0;
    try {
        solve_hermitian(m, b);
        FAIL() << "expected SingularMatrixError";
    } catch (const SingularMatrixError& e) {
        EXPECT_LE(e.rcond(), 1e-14);
    }
}

}  // namespace
