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

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "hmimo/channel.hpp"
#include "hmimo/estimators.hpp"
#include "hmimo/linalg.hpp"

namespace hmimo {

/// Normalized mean square estimation error of the fixed linear map A against
/// the true second-order statistics (R, Q):
///   [tr R - 2 sqrt(rho) tau_p Re tr(R A) + rho tau_p^2 tr(A Q A^H)] / tr R.
/// Exact for any A, including operators built from estimated statistics
/// (the value is then conditional on the estimate).
inline double nmsee_analytic(const CMatrix& r, const CMatrix& q, const CMatrix& a, double tau_p,
                             double rho) {
    const double tr_r = r.real().trace();
    if (!(tr_r > 0.0)) throw std::invalid_argument("nmsee_analytic: tr(R) must be positive");
    const Complex tr_ra = (a.transpose().cwiseProduct(r)).sum();
    const CMatrix aq = a * q;
    const Complex tr_aqah = (aq.cwiseProduct(a.conjugate())).sum();
    const double g = std::sqrt(rho) * tau_p;
    return (tr_r - 2.0 * g * tr_ra.real() + g * g * tr_aqah.real()) / tr_r;
}

namespace detail {

// f_n^H X f_n for all n, where X is Hermitian-Toeplitz with generator x and
// f_n are the unitary inverse-DFT columns. Equals 2 Re(p_n) - x(0) with
// p = DFT of the triangle-weighted generator (N-k)/N * x(k).
inline RVector toeplitz_spectral_diagonal(const CVector& gen) {
    const Eigen::Index n = gen.size();
    std::vector<Complex> buf(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k)
        buf[static_cast<std::size_t>(k)] = gen(k) * static_cast<double>(n - k) / static_cast<double>(n);
    Fft plan(static_cast<std::size_t>(n));
    plan.forward(buf.data());
    RVector out(n);
    for (Eigen::Index k = 0; k < n; ++k)
        out(k) = 2.0 * buf[static_cast<std::size_t>(k)].real() - gen(0).real();
    return out;
}

}  // namespace detail

/// Kind-aware NMSEE that avoids materializing dense A for the structured
/// estimators; the dense formula above is the oracle it is tested against.
inline double nmsee_analytic(const SpatialCovariance& cov, double gamma,
                             const EstimatorOperator& op, double tau_p, double rho) {
    const Eigen::Index n = cov.matrix.rows();
    const double tr_r = cov.matrix.real().trace();
    if (!(tr_r > 0.0)) throw std::invalid_argument("nmsee_analytic: tr(R) must be positive");
    const double g = std::sqrt(rho) * tau_p;

    switch (op.kind()) {
        case EstimatorKind::ls: {
            // A = s I: the numerator collapses to tr(Q) - tr(R) = N / gamma.
            return static_cast<double>(n) / (gamma * tr_r);
        }
        case EstimatorKind::los: {
            const CVector& a = op.los_vector();
            const double coef = op.scale();
            const double ara = (a.adjoint() * cov.matrix * a).value().real();
            const double aqa = ara + a.squaredNorm() / gamma;
            const double tr_ra = coef * ara;
            const double tr_aqah = coef * coef * static_cast<double>(n) * aqa;
            return (tr_r - 2.0 * g * tr_ra + g * g * tr_aqah) / tr_r;
        }
        case EstimatorKind::iso: {
            const CMatrix& u = op.iso_vectors();
            const RVector& w = op.spectral_weights();
            const double s = op.scale();
            double tr_ra = 0.0, tr_aqah = 0.0;
            for (Eigen::Index i = 0; i < w.size(); ++i) {
                const double uru = (u.col(i).adjoint() * cov.matrix * u.col(i)).value().real();
                const double uqu = uru + u.col(i).squaredNorm() / gamma;
                tr_ra += w(i) * uru;
                tr_aqah += w(i) * w(i) * uqu;
            }
            tr_ra *= s;
            tr_aqah *= s * s;
            return (tr_r - 2.0 * g * tr_ra + g * g * tr_aqah) / tr_r;
        }
        case EstimatorKind::dft: {
            const RVector& w = op.spectral_weights();
            const RVector t = detail::toeplitz_spectral_diagonal(cov.generator);
            const double s = op.scale();
            double tr_ra = 0.0, tr_aqah = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) {
                tr_ra += w(k) * t(k);
                tr_aqah += w(k) * w(k) * (t(k) + 1.0 / gamma);
            }
            tr_ra *= s;
            tr_aqah *= s * s;
            return (tr_r - 2.0 * g * tr_ra + g * g * tr_aqah) / tr_r;
        }
        case EstimatorKind::mmse:
            break;
    }
    const CMatrix q = cov.matrix + CMatrix::Identity(n, n) / gamma;
    return nmsee_analytic(cov.matrix, q, op.dense_materialization(), tau_p, rho);
}

/// Monte-Carlo NMSEE: mean of |h_hat - h|^2 / tr(R) over fresh (h, w) draws.
inline double nmsee_empirical(const EstimatorOperator& op, const SpatialCovariance& cov,
                              const ScenarioParams& params, int n_trials, RngStream& rng) {
    if (n_trials < 1) throw std::invalid_argument("nmsee_empirical: need n_trials >= 1");
    const double tr_r = cov.matrix.real().trace();
    ChannelSampler sampler(cov);
    double acc = 0.0;
    for (int t = 0; t < n_trials; ++t) {
        const CVector h = sampler.draw(rng);
        const CVector y = pilot_observation(h, params, rng);
        acc += (op.apply(y) - h).squaredNorm();
    }
    return acc / (static_cast<double>(n_trials) * tr_r);
}

/// Five-number summary with IQR outlier detection. Quartiles use linear
/// interpolation between order statistics; whiskers sit on the extreme
/// samples inside [q1 - k IQR, q3 + k IQR].
struct BoxStats {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    double mean = 0.0;
    std::vector<double> outliers;
    std::size_t n = 0;

    double outlier_fraction() const {
        return n == 0 ? 0.0 : static_cast<double>(outliers.size()) / static_cast<double>(n);
    }
    double iqr() const { return q3 - q1; }
};

inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = p * static_cast<double>(n - 1);
    const auto idx = static_cast<std::size_t>(pos);
    if (idx + 1 >= n) return sorted[n - 1];
    const double frac = pos - static_cast<double>(idx);
    return sorted[idx] + frac * (sorted[idx + 1] - sorted[idx]);
}

inline BoxStats box_stats(std::vector<double> samples, double whisker_k = 1.5) {
    if (samples.empty()) throw std::invalid_argument("box_stats: empty input");
    std::sort(samples.begin(), samples.end());
    BoxStats b;
    b.n = samples.size();
    double sum = 0.0;
    for (double v : samples) sum += v;
    b.mean = sum / static_cast<double>(b.n);
    b.q1 = quantile_sorted(samples, 0.25);
    b.median = quantile_sorted(samples, 0.5);
    b.q3 = quantile_sorted(samples, 0.75);
    const double lo = b.q1 - whisker_k * b.iqr();
    const double hi = b.q3 + whisker_k * b.iqr();
    b.whisker_low = b.q3;
    b.whisker_high = b.q1;
    bool any_inside = false;
    for (double v : samples) {
        if (v < lo || v > hi) {
            b.outliers.push_back(v);
        } else {
            if (!any_inside) {
                b.whisker_low = v;
                b.whisker_high = v;
                any_inside = true;
            } else {
                b.whisker_low = std::min(b.whisker_low, v);
                b.whisker_high = std::max(b.whisker_high, v);
            }
        }
    }
    if (!any_inside) {  // degenerate: everything flagged; collapse whiskers to quartiles
        b.whisker_low = b.q1;
        b.whisker_high = b.q3;
    }
    return b;
}

}  // namespace hmimo
