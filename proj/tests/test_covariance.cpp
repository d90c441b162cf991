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

#include <sstream>

#include "hmimo/covariance.hpp"
#include "hmimo/rng.hpp"

namespace {

using namespace hmimo;

SpatialCovariance standard_cov(int n, double beta = 1.0) {
    return build_covariance(UlaGeometry(n, 0.025, 0.1, 10.0),
                            ScatteringProfile(deg_to_rad(-30.0), deg_to_rad(10.0), beta));
}

SnapshotBatch model_snapshots(const SpatialCovariance& cov, int m, double gamma,
                              std::uint64_t seed) {
    RngStream rng(seed);
    ChannelSampler sampler(cov);
    return draw_snapshots(sampler, cov.dim(), m, gamma, 1.0, rng);
}

CMatrix random_hermitian(Eigen::Index n, std::uint64_t seed) {
    RngStream rng(seed);
    CMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rng.complex_gaussian();
    return 0.5 * (m + m.adjoint().eval());
}

TEST(SampleCorrelationTest, SingleBasisSnapshot) {
    SnapshotBatch batch;
    batch.snapshots = CMatrix::Zero(3, 1);
    batch.snapshots(0, 0) = 1.0;
    const CovarianceEstimate est = sample_correlation(batch);
    CMatrix want = CMatrix::Zero(3, 3);
    want(0, 0) = 1.0;
    EXPECT_LT((est.q - want).norm(), 1e-15);
    EXPECT_EQ(est.method, CovMethod::sample);
}

TEST(SampleCorrelationTest, IdenticalSnapshotsGiveRankOne) {
    RngStream rng(15);
    CVector v(4);
    for (int i = 0; i < 4; ++i) v(i) = rng.complex_gaussian();
    SnapshotBatch batch;
    batch.snapshots.resize(4, 7);
    for (int m = 0; m < 7; ++m) batch.snapshots.col(m) = v;
    const CovarianceEstimate est = sample_correlation(batch);
    EXPECT_LT((est.q - v * v.adjoint()).norm(), 1e-12 * v.squaredNorm());
    Eigen::JacobiSVD<CMatrix> svd(est.q);
    EXPECT_LT(svd.singularValues()(1), 1e-12 * svd.singularValues()(0));
}

TEST(SampleCorrelationTest, ConvergesWithSnapshotCount) {
    // single-batch error norms fluctuate a lot at N=8, so compare means
    const SpatialCovariance cov = standard_cov(8);
    const double gamma = 100.0;
    const CMatrix q_true = cov.matrix + CMatrix::Identity(8, 8) / gamma;
    double prev = 1e9;
    for (int m : {100, 1000, 10000}) {
        double err = 0.0;
        const int batches = 8;
        for (int b = 0; b < batches; ++b) {
            const CovarianceEstimate est =
                sample_correlation(model_snapshots(cov, m, gamma, 88 + 100 * b));
            err += (est.q - q_true).norm() / q_true.norm();
        }
        err /= batches;
        EXPECT_LT(err, prev) << "M=" << m;
        prev = err;
    }
    EXPECT_LT(prev, 0.05);
}

TEST(ShrinkageTest, EndpointsAndMidpoint) {
    CovarianceEstimate sample;
    sample.q = random_hermitian(4, 3);
    EXPECT_LT((shrinkage_combination(sample, 1.0).q - sample.q).norm(), 1e-15);
    const CovarianceEstimate diag = shrinkage_combination(sample, 0.0);
    EXPECT_LT((diag.q - CMatrix(sample.q.diagonal().asDiagonal())).norm(), 1e-15);

    CovarianceEstimate two;
    two.q.resize(2, 2);
    two.q << 2.0, 1.0, 1.0, 2.0;
    const CovarianceEstimate half = shrinkage_combination(two, 0.5);
    CMatrix want(2, 2);
    want << 2.0, 0.5, 0.5, 2.0;
    EXPECT_LT((half.q - want).norm(), 1e-15);
    EXPECT_EQ(half.method, CovMethod::shrinkage);
    EXPECT_DOUBLE_EQ(half.eta, 0.5);
}

TEST(ShrinkageTest, DiagonalPreservedForEveryEta) {
    CovarianceEstimate sample;
    sample.q = random_hermitian(5, 9);
    for (double eta : {0.0, 0.1, 0.33, 0.77, 1.0}) {
        const CovarianceEstimate est = shrinkage_combination(sample, eta);
        EXPECT_LT((est.q.diagonal() - sample.q.diagonal()).norm(), 1e-15) << "eta=" << eta;
    }
    EXPECT_THROW(shrinkage_combination(sample, -0.1), std::invalid_argument);
    EXPECT_THROW(shrinkage_combination(sample, 1.1), std::invalid_argument);
}

TEST(ToeplitzAverageTest, TwoByTwoFirstRow) {
    CovarianceEstimate sample;
    sample.q.resize(2, 2);
    sample.q << Complex(1.0, 0.0), Complex(0.25, 0.5), Complex(0.25, -0.5), Complex(3.0, 0.0);
    const CovarianceEstimate est = toeplitz_average(sample);
    // first row: [(q11 + q22)/2, q12]; our generator stores the conjugate
    EXPECT_LT(std::abs(est.generator(0) - Complex(2.0, 0.0)), 1e-15);
    EXPECT_LT(std::abs(est.generator(1) - Complex(0.25, -0.5)), 1e-15);
    EXPECT_LT(std::abs(est.q(0, 1) - Complex(0.25, 0.5)), 1e-15);
    EXPECT_LT(std::abs(est.q(1, 0) - Complex(0.25, -0.5)), 1e-15);
}

TEST(ToeplitzAverageTest, ToeplitzInputIsUnchanged) {
    const SpatialCovariance cov = standard_cov(8);
    CovarianceEstimate sample;
    sample.q = cov.matrix;
    const CovarianceEstimate est = toeplitz_average(sample);
    EXPECT_LT((est.q - cov.matrix).norm(), 1e-14 * cov.matrix.norm());
}

TEST(ToeplitzAverageTest, MatchesBruteForceDiagonalAveraging) {
    // independent loop-based oracle on a random Hermitian 3x3
    const CMatrix q = random_hermitian(3, 101);
    CovarianceEstimate sample;
    sample.q = q;
    const CovarianceEstimate est = toeplitz_average(sample);
    for (int k = 0; k < 3; ++k) {
        Complex acc(0.0, 0.0);
        int count = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (j - i == k) {
                    acc += q(i, j);
                    ++count;
                }
        const Complex avg = acc / static_cast<double>(count);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (j - i == k) {
                    if (k == 0)
                        EXPECT_LT(std::abs(est.q(i, j) - avg.real()), 1e-14);
                    else
                        EXPECT_LT(std::abs(est.q(i, j) - avg), 1e-14);
                }
    }
}

TEST(ToeplitzAverageTest, ProjectionIdempotentAndTracePreserving) {
    CovarianceEstimate sample;
    sample.q = random_hermitian(16, 55);
    const CovarianceEstimate once = toeplitz_average(sample);
    const CovarianceEstimate twice = toeplitz_average(once);
    EXPECT_LT((twice.q - once.q).norm(), 1e-12 * (1.0 + once.q.norm()));
    EXPECT_NEAR(once.q.real().trace(), sample.q.real().trace(),
                1e-12 * std::abs(sample.q.real().trace()));
}

TEST(ToeplitzAverageTest, LinearMap) {
    CovarianceEstimate a, b, mix;
    a.q = random_hermitian(6, 71);
    b.q = random_hermitian(6, 72);
    mix.q = 0.3 * a.q + 0.7 * b.q;
    const CMatrix lhs = toeplitz_average(mix).q;
    const CMatrix rhs = 0.3 * toeplitz_average(a).q + 0.7 * toeplitz_average(b).q;
    EXPECT_LT((lhs - rhs).norm(), 1e-13 * (1.0 + rhs.norm()));
}

TEST(ToeplitzAverageTest, UnbiasedUnderTheModel) {
    const SpatialCovariance cov = standard_cov(8);
    const double gamma = 50.0;
    const CMatrix q_true = cov.matrix + CMatrix::Identity(8, 8) / gamma;
    const CovarianceEstimate est =
        toeplitz_average(sample_correlation(model_snapshots(cov, 10000, gamma, 123)));
    EXPECT_LT((est.q - q_true).norm(), 0.03 * q_true.norm());
}

TEST(ToeplitzAverageTest, ReducesErrorVersusSampleEstimate) {
    // orthogonal projection onto the subspace containing Q never increases error
    const SpatialCovariance cov = standard_cov(16);
    const double gamma = 50.0;
    const CMatrix q_true = cov.matrix + CMatrix::Identity(16, 16) / gamma;
    int improved = 0;
    const int batches = 50;
    for (int b = 0; b < batches; ++b) {
        const CovarianceEstimate sample =
            sample_correlation(model_snapshots(cov, 10, gamma, 9000 + b));
        const CovarianceEstimate toe = toeplitz_average(sample);
        if ((toe.q - q_true).norm() <= (sample.q - q_true).norm()) ++improved;
    }
    EXPECT_EQ(improved, batches);
}

TEST(NoiseSubtractTest, DefinitionAndEdgeCases) {
    const double gamma = 2.0;
    CovarianceEstimate est;
    est.q = CMatrix::Identity(3, 3) / gamma;
    EXPECT_LT(noise_subtract(est, gamma).norm(), 1e-15);

    const SpatialCovariance cov = standard_cov(6);
    CovarianceEstimate exact;
    exact.q = cov.matrix + CMatrix::Identity(6, 6) / gamma;
    EXPECT_LT((noise_subtract(exact, gamma) - cov.matrix).norm(), 1e-14);

    // Q_hat below the noise floor: R_hat legal but negative definite
    CovarianceEstimate low;
    low.q = CMatrix::Identity(3, 3) / (2.0 * gamma);
    const CMatrix r_hat = noise_subtract(low, gamma);
    EXPECT_LT(r_hat.real().trace(), 0.0);
}

TEST(NoiseSubtractTest, GeneratorFormMatchesDense) {
    const SpatialCovariance cov = standard_cov(8);
    const double gamma = 25.0;
    const CovarianceEstimate toe =
        toeplitz_average(sample_correlation(model_snapshots(cov, 40, gamma, 77)));
    const CVector gen = noise_subtract_generator(toe, gamma);
    EXPECT_LT((toeplitz_from_generator(gen) - noise_subtract(toe, gamma)).norm(), 1e-13);

    CovarianceEstimate sample;
    sample.q = cov.matrix;
    sample.method = CovMethod::sample;
    EXPECT_THROW(noise_subtract_generator(sample, gamma), std::invalid_argument);
}

TEST(SnapshotCsvTest, DumpLoadRoundTrip) {
    const SpatialCovariance cov = standard_cov(5);
    const SnapshotBatch batch = model_snapshots(cov, 9, 30.0, 314);
    std::stringstream ss;
    dump_snapshots_csv(batch, ss);
    const SnapshotBatch back = load_snapshots_csv(ss, batch.normalization);
    ASSERT_EQ(back.dim(), batch.dim());
    ASSERT_EQ(back.count(), batch.count());
    EXPECT_LT((back.snapshots - batch.snapshots).norm(), 1e-15);
}

TEST(SnapshotBatchTest, FromObservationsPreScales) {
    std::vector<CVector> raw(2, CVector::Ones(3));
    const SnapshotBatch batch = SnapshotBatch::from_observations(raw, 4.0);
    EXPECT_DOUBLE_EQ(batch.normalization, 4.0);
    EXPECT_NEAR(batch.snapshots(0, 0).real(), 0.25, 1e-15);

    EXPECT_THROW(SnapshotBatch::from_observations({}, 1.0), std::invalid_argument);
    std::vector<CVector> ragged = {CVector::Ones(3), CVector::Ones(4)};
    EXPECT_THROW(SnapshotBatch::from_observations(ragged, 1.0), std::invalid_argument);
}

}  // namespace
