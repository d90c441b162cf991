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

#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmimo/channel.hpp"
#include "hmimo/linalg.hpp"

namespace hmimo {

/// M pilot snapshots, stored pre-scaled: column m holds y[m] / (tau_p sqrt(rho)),
/// so the stored columns satisfy E[y~ y~^H] = Q = R + I/gamma.
struct SnapshotBatch {
    CMatrix snapshots;          // N x M
    double normalization = 1.0; // the tau_p sqrt(rho) divided out

    int dim() const { return static_cast<int>(snapshots.rows()); }
    int count() const { return static_cast<int>(snapshots.cols()); }

    static SnapshotBatch from_observations(const std::vector<CVector>& raw, double pilot_gain) {
        if (raw.empty()) throw std::invalid_argument("SnapshotBatch: need M >= 1 snapshots");
        SnapshotBatch batch;
        batch.normalization = pilot_gain;
        batch.snapshots.resize(raw.front().size(), static_cast<Eigen::Index>(raw.size()));
        for (std::size_t m = 0; m < raw.size(); ++m) {
            if (raw[m].size() != batch.snapshots.rows())
                throw std::invalid_argument("SnapshotBatch: snapshot length mismatch");
            batch.snapshots.col(static_cast<Eigen::Index>(m)) = raw[m] / pilot_gain;
        }
        return batch;
    }
};

/// Draws M fresh coherence-block snapshots directly in the pre-scaled domain:
/// y~ = h + z / sqrt(gamma) with z ~ CN(0, I).
inline SnapshotBatch draw_snapshots(const ChannelSampler& sampler, int n_antennas, int m_snapshots,
                                    double gamma, double pilot_gain, RngStream& rng) {
    SnapshotBatch batch;
    batch.normalization = pilot_gain;
    batch.snapshots.resize(n_antennas, m_snapshots);
    const double noise_std = std::sqrt(1.0 / gamma);
    for (int m = 0; m < m_snapshots; ++m) {
        CVector h = sampler.draw(rng);
        for (int i = 0; i < n_antennas; ++i) h(i) += noise_std * rng.complex_gaussian();
        batch.snapshots.col(m) = h;
    }
    return batch;
}

enum class CovMethod { sample, shrinkage, toeplitz };

inline const char* to_string(CovMethod m) {
    switch (m) {
        case CovMethod::sample: return "sample";
        case CovMethod::shrinkage: return "shrinkage";
        case CovMethod::toeplitz: return "toeplitz";
    }
    return "?";
}

/// An estimate of Q = R + I/gamma from pilot snapshots.
struct CovarianceEstimate {
    CMatrix q;  // Hermitian by construction
    CovMethod method = CovMethod::sample;
    double eta = 0.0;        // shrinkage weight when method == shrinkage
    CVector generator;       // Toeplitz first-column generator when method == toeplitz

    int dim() const { return static_cast<int>(q.rows()); }
};

/// Sample correlation Q_hat = (1/M) sum_m y~[m] y~[m]^H; rank <= min(M, N).
inline CovarianceEstimate sample_correlation(const SnapshotBatch& batch) {
    if (batch.count() < 1) throw std::invalid_argument("sample_correlation: need M >= 1");
    CovarianceEstimate est;
    est.method = CovMethod::sample;
    est.q = (batch.snapshots * batch.snapshots.adjoint()) / static_cast<double>(batch.count());
    est.q = 0.5 * (est.q + est.q.adjoint().eval());  // kill rounding asymmetry
    return est;
}

/// Convex shrinkage toward the diagonal: Q(eta) = eta Q + (1 - eta) diag(Q).
inline CovarianceEstimate shrinkage_combination(const CovarianceEstimate& sample, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("shrinkage_combination: eta must lie in [0, 1]");
    CovarianceEstimate est;
    est.method = CovMethod::shrinkage;
    est.eta = eta;
    est.q = eta * sample.q;
    est.q.diagonal() = sample.q.diagonal();  // diagonal preserved exactly for every eta
    return est;
}

/// Projects the sample estimate onto Hermitian-Toeplitz structure by
/// averaging along diagonals: the first-row entries are
///   [Q^toe]_{1,j} = (1/(N-j+1)) sum_m [Q^sample]_{m, j+m-1},
/// the rest follow by Toeplitz propagation and Hermitian reflection, and the
/// diagonal is forced real. On Hermitian input this is the orthogonal
/// Frobenius projection onto the Toeplitz-Hermitian subspace.
inline CovarianceEstimate toeplitz_average(const CovarianceEstimate& sample) {
    const Eigen::Index n = sample.q.rows();
    CovarianceEstimate est;
    est.method = CovMethod::toeplitz;
    est.generator.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        Complex acc(0.0, 0.0);
        for (Eigen::Index i = 0; i + k < n; ++i) acc += sample.q(i, i + k);
        const Complex row_avg = acc / static_cast<double>(n - k);
        // our generator convention stores the first column; the first row is its conjugate
        est.generator(k) = (k == 0) ? Complex(row_avg.real(), 0.0) : std::conj(row_avg);
    }
    est.q = toeplitz_from_generator(est.generator);
    return est;
}

/// R_hat = Q_hat - I/gamma. May be indefinite; consumers decide how to cope
/// (the DFT kind clamps in the spectral domain, MMSE consumes as-is).
inline CMatrix noise_subtract(const CovarianceEstimate& est, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("noise_subtract: gamma must be positive");
    const Eigen::Index n = est.q.rows();
    return est.q - CMatrix::Identity(n, n) / gamma;
}

/// Generator form of noise_subtract for Toeplitz estimates.
inline CVector noise_subtract_generator(const CovarianceEstimate& est, double gamma) {
    if (est.method != CovMethod::toeplitz)
        throw std::invalid_argument("noise_subtract_generator: estimate is not Toeplitz");
    if (!(gamma > 0.0)) throw std::invalid_argument("noise_subtract_generator: gamma must be positive");
    CVector gen = est.generator;
    gen(0) -= 1.0 / gamma;
    return gen;
}

/// Snapshot fixture format: one snapshot per row, entries interleaved as
/// re,im,re,im,... with full round-trip precision.
inline void dump_snapshots_csv(const SnapshotBatch& batch, std::ostream& out) {
    out.precision(17);
    for (int m = 0; m < batch.count(); ++m) {
        for (int i = 0; i < batch.dim(); ++i) {
            if (i > 0) out << ',';
            const Complex v = batch.snapshots(i, m);
            out << v.real() << ',' << v.imag();
        }
        out << '\n';
    }
}

inline void dump_snapshots_csv(const SnapshotBatch& batch, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dump_snapshots_csv: cannot open " + path);
    dump_snapshots_csv(batch, out);
}

inline SnapshotBatch load_snapshots_csv(std::istream& in, double normalization = 1.0) {
    std::vector<std::vector<Complex>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<Complex> row;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() % 2 != 0)
            throw std::runtime_error("load_snapshots_csv: odd number of scalar entries in a row");
        for (std::size_t i = 0; i < vals.size(); i += 2) row.emplace_back(vals[i], vals[i + 1]);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("load_snapshots_csv: no snapshots");
    SnapshotBatch batch;
    batch.normalization = normalization;
    batch.snapshots.resize(static_cast<Eigen::Index>(rows.front().size()),
                           static_cast<Eigen::Index>(rows.size()));
    for (std::size_t m = 0; m < rows.size(); ++m) {
        if (rows[m].size() != rows.front().size())
            throw std::runtime_error("load_snapshots_csv: ragged rows");
        for (std::size_t i = 0; i < rows[m].size(); ++i)
            batch.snapshots(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = rows[m][i];
    }
    return batch;
}

inline SnapshotBatch load_snapshots_csv(const std::string& path, double normalization = 1.0) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_snapshots_csv: cannot open " + path);
    return load_snapshots_csv(in, normalization);
}

}  // namespace hmimo
