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

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hmimo/channel.hpp"
#include "hmimo/fft.hpp"
#include "hmimo/linalg.hpp"

namespace hmimo {

enum class EstimatorKind { mmse, ls, los, iso, dft };
enum class CostClass { linear, nlogn, n_times_r, quadratic };

inline const char* to_string(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::mmse: return "MMSE";
        case EstimatorKind::ls: return "LS";
        case EstimatorKind::los: return "LoS";
        case EstimatorKind::iso: return "ISO";
        case EstimatorKind::dft: return "DFT";
    }
    return "?";
}

/// Circulant stand-in for a Hermitian-Toeplitz covariance: generator c plus
/// its DFT eigenvalues. Eigenvalues are kept pre-clamp; `negative` marks the
/// entries a consumer will clamp to zero.
struct CirculantSpectrum {
    CVector first_row;       // c(0..N-1), Hermitian generator: c(N-n) = c*(n)
    RVector eigenvalues;     // unnormalized DFT of c; real after symmetrization
    std::vector<bool> negative;

    int negative_count() const {
        int n = 0;
        for (bool b : negative) n += b ? 1 : 0;
        return n;
    }
};

/// Blends the Toeplitz generator r into the closest-in-structure circulant
/// generator: c(0) = r(0), c(n) = ((N-n) r(n) + n r*(N-n)) / N. The result
/// satisfies c(N-n) = c*(n) whenever r(0) is real (enforced by truncation).
inline CVector circulant_first_row(const CVector& r) {
    const Eigen::Index n = r.size();
    if (n == 0) throw std::invalid_argument("circulant_first_row: empty generator");
    CVector c(n);
    c(0) = Complex(r(0).real(), 0.0);  // r(0) is a variance; drop imaginary dust
    for (Eigen::Index k = 1; k < n; ++k)
        c(k) = (static_cast<double>(n - k) * r(k) + static_cast<double>(k) * std::conj(r(n - k))) /
               static_cast<double>(n);
    return c;
}

/// DFT of the circulant generator: Lambda_n = sum_m c(m) e^{-j 2 pi m n / N}.
/// These are the eigenvalues of the Hermitian circulant C_{m,l} = c((m-l) mod N)
/// paired with the inverse-DFT columns f_n, [f_n]_m = e^{+j 2 pi m n / N}/sqrt(N).
inline CirculantSpectrum circulant_eigenvalues(const CVector& c) {
    const Eigen::Index n = c.size();
    if (n == 0) throw std::invalid_argument("circulant_eigenvalues: empty generator");
    double cmax = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) cmax = std::max(cmax, std::abs(c(k)));
    const double tol = 1e-9 * (cmax > 0.0 ? cmax : 1.0);
    for (Eigen::Index k = 1; k < n; ++k) {
        if (std::abs(c(n - k) - std::conj(c(k))) > tol)
            throw std::invalid_argument(
                "circulant_eigenvalues: generator violates Hermitian symmetry c(N-n) = c*(n)");
    }

    Fft plan(static_cast<std::size_t>(n));
    std::vector<Complex> buf(c.data(), c.data() + n);
    plan.forward(buf.data());

    CirculantSpectrum spec;
    spec.first_row = c;
    spec.eigenvalues.resize(n);
    spec.negative.assign(static_cast<std::size_t>(n), false);
    double lmax = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) lmax = std::max(lmax, std::abs(buf[k]));
    for (Eigen::Index k = 0; k < n; ++k) {
        if (std::abs(buf[k].imag()) > 1e-9 * (lmax > 0.0 ? lmax : 1.0))
            throw std::runtime_error("circulant_eigenvalues: eigenvalue has non-real residue");
        spec.eigenvalues(k) = buf[k].real();
        if (spec.eigenvalues(k) < 0.0) spec.negative[static_cast<std::size_t>(k)] = true;
    }
    return spec;
}

/// Dense Hermitian circulant C_{m,l} = c((m-l) mod N) from its generator.
inline CMatrix circulant_from_generator(const CVector& c) {
    const Eigen::Index n = c.size();
    CMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            m(i, j) = c(((i - j) % n + n) % n);
    return m;
}

/// Compact eigen-basis of the isotropic-scattering correlation, the matrix
/// with entries sinc(2 (m-l) d / lambda). Eigenpairs below rank_tol * lambda_max
/// are dropped; the retained count is roughly 2 N d / lambda.
struct IsoBasis {
    CMatrix vectors;     // N x r
    RVector eigenvalues; // descending, length r
    int rank() const { return static_cast<int>(eigenvalues.size()); }
};

inline double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = kPi * x;
    return std::sin(px) / px;
}

inline IsoBasis iso_basis(const UlaGeometry& geom, double rank_tol = 1e-6) {
    const int n = geom.n_antennas;
    CMatrix s(n, n);
    for (int m = 0; m < n; ++m)
        for (int l = 0; l < n; ++l)
            s(m, l) = sinc(2.0 * (m - l) * geom.spacing / geom.wavelength);
    HermitianEvd evd = hermitian_evd(s);
    const double lmax = evd.eigenvalues(0);
    int r = 0;
    while (r < n && evd.eigenvalues(r) > rank_tol * lmax) ++r;
    IsoBasis basis;
    basis.vectors = evd.eigenvectors.leftCols(r);
    basis.eigenvalues = evd.eigenvalues.head(r);
    return basis;
}

/// A precomputed linear channel estimate map h_hat = A y. Immutable after
/// construction; apply() is safe to call concurrently.
class EstimatorOperator {
  public:
    EstimatorKind kind() const { return kind_; }
    CostClass apply_cost_class() const { return cost_; }

    /// DFT kind: number of circulant eigenvalues clamped to zero.
    int clamped_count() const { return clamped_; }
    /// MMSE kind: true when the diagonal-loading fallback had to engage.
    bool loaded_solve() const { return loaded_; }

    CVector apply(const CVector& y) const {
        CVector out(y.size());
        apply_into(y, out);
        return out;
    }

    /// Allocation-free variant (up to the transform scratch of non-pow2
    /// lengths); `out` may not alias `y`.
    void apply_into(const CVector& y, CVector& out) const {
        if (y.size() != dim_) throw std::invalid_argument("EstimatorOperator::apply: length mismatch");
        out.resize(dim_);
        switch (kind_) {
            case EstimatorKind::mmse:
                out.noalias() = dense_ * y;
                return;
            case EstimatorKind::ls:
                out = scale_ * y;
                return;
            case EstimatorKind::los:
                out = (scale_ * vector_.dot(y)) * vector_;
                return;
            case EstimatorKind::iso: {
                CVector proj = basis_.adjoint() * y;
                proj.array() *= weights_.array();
                out.noalias() = scale_ * (basis_ * proj);
                return;
            }
            case EstimatorKind::dft: {
                out = y;
                plan_->forward(out.data());
                for (Eigen::Index k = 0; k < dim_; ++k) out(k) *= weights_(k);
                plan_->inverse(out.data());
                out *= scale_ / static_cast<double>(dim_);
                return;
            }
        }
        throw std::logic_error("EstimatorOperator: bad kind");
    }

    /// Test accessor: the dense N x N matrix realizing apply(). Production
    /// paths never call this for the structured kinds.
    CMatrix dense_materialization() const {
        const Eigen::Index n = dim_;
        switch (kind_) {
            case EstimatorKind::mmse:
                return dense_;
            case EstimatorKind::ls:
                return scale_ * CMatrix::Identity(n, n);
            case EstimatorKind::los:
                return scale_ * (vector_ * vector_.adjoint());
            case EstimatorKind::iso:
                return scale_ * (basis_ * weights_.asDiagonal() * basis_.adjoint());
            case EstimatorKind::dft: {
                // A = s F W F^H is circulant; its generator is the scaled
                // inverse transform of the weights.
                CVector gen(n);
                for (Eigen::Index k = 0; k < n; ++k) gen(k) = weights_(k);
                plan_->inverse(gen.data());
                gen *= scale_ / static_cast<double>(n);
                return circulant_from_generator(gen);
            }
        }
        throw std::logic_error("EstimatorOperator: bad kind");
    }

    // Introspection for the trace fast paths in metrics (and for tests).
    double scale() const { return scale_; }
    const CVector& los_vector() const { return vector_; }
    const CMatrix& iso_vectors() const { return basis_; }
    const RVector& spectral_weights() const { return weights_; }
    Eigen::Index dim() const { return dim_; }

    static EstimatorOperator make_mmse(CMatrix a, bool loaded) {
        EstimatorOperator op(EstimatorKind::mmse, CostClass::quadratic, a.rows());
        op.dense_ = std::move(a);
        op.loaded_ = loaded;
        return op;
    }
    static EstimatorOperator make_ls(double scale, Eigen::Index n) {
        EstimatorOperator op(EstimatorKind::ls, CostClass::linear, n);
        op.scale_ = scale;
        return op;
    }
    static EstimatorOperator make_los(CVector a, double coef) {
        EstimatorOperator op(EstimatorKind::los, CostClass::linear, a.size());
        op.vector_ = std::move(a);
        op.scale_ = coef;
        return op;
    }
    static EstimatorOperator make_iso(CMatrix basis, RVector weights, double scale) {
        EstimatorOperator op(EstimatorKind::iso, CostClass::n_times_r, basis.rows());
        op.basis_ = std::move(basis);
        op.weights_ = std::move(weights);
        op.scale_ = scale;
        return op;
    }
    static EstimatorOperator make_dft(RVector weights, double scale, int clamped) {
        const Eigen::Index n = weights.size();
        EstimatorOperator op(EstimatorKind::dft, CostClass::nlogn, n);
        op.plan_ = std::make_shared<Fft>(static_cast<std::size_t>(n));
        op.weights_ = std::move(weights);
        op.scale_ = scale;
        op.clamped_ = clamped;
        return op;
    }

  private:
    EstimatorOperator(EstimatorKind kind, CostClass cost, Eigen::Index dim)
        : kind_(kind), cost_(cost), dim_(dim) {}

    EstimatorKind kind_;
    CostClass cost_;
    Eigen::Index dim_;
    double scale_ = 0.0;
    CMatrix dense_;
    CVector vector_;
    CMatrix basis_;
    RVector weights_;
    std::shared_ptr<const Fft> plan_;
    int clamped_ = 0;
    bool loaded_ = false;
};

/// MMSE operator A = R Q^{-1} / (tau_p sqrt(rho)) with Q = R + I/gamma.
/// Works for the true covariance and for estimated (possibly indefinite)
/// R-hat alike. When the solve reports failure the pinned diagonal-loading
/// fallback (1e-12 tr(Q)/N) engages once and the operator is flagged;
/// a failure of the loaded solve propagates to the caller.
inline EstimatorOperator mmse_precompute(const CMatrix& r, double gamma, double tau_p, double rho) {
    if (r.rows() != r.cols()) throw std::invalid_argument("mmse_precompute: R not square");
    if (gamma <= 0.0) throw std::invalid_argument("mmse_precompute: gamma must be positive");
    const Eigen::Index n = r.rows();
    CMatrix q = r + CMatrix::Identity(n, n) / gamma;
    const double scale = 1.0 / (tau_p * std::sqrt(rho));
    bool loaded = false;
    CMatrix a_h;
    try {
        a_h = solve_hermitian(q, r);
    } catch (const SingularMatrixError&) {
        const double load = 1e-12 * q.real().trace() / static_cast<double>(n);
        q += load * CMatrix::Identity(n, n);
        a_h = solve_hermitian(q, r);  // still failing -> propagate
        loaded = true;
    }
    // A = R Q^{-1}; the Hermitian solve gives Q^{-1} R = A^H.
    return EstimatorOperator::make_mmse(scale * a_h.adjoint(), loaded);
}

inline EstimatorOperator mmse_precompute(const SpatialCovariance& cov, double gamma, double tau_p,
                                         double rho) {
    return mmse_precompute(cov.matrix, gamma, tau_p, rho);
}

/// LS operator A = I / (tau_p sqrt(rho)); no statistics, no precompute.
inline EstimatorOperator ls_operator(double tau_p, double rho, Eigen::Index n) {
    return EstimatorOperator::make_ls(1.0 / (tau_p * std::sqrt(rho)), n);
}

/// Single-plane-wave operator
///   A = (1/(tau_p sqrt(rho))) * (beta gamma / (1 + N beta gamma)) a a^H
/// applied as inner-product-then-scale. Consumes the true nominal angles.
inline EstimatorOperator los_precompute(const UlaGeometry& geom, double azimuth, double elevation,
                                        double beta, double gamma, double tau_p, double rho) {
    CVector a = array_response(geom, azimuth, elevation);
    const double coef = 1.0 / (tau_p * std::sqrt(rho)) * beta * gamma /
                        (1.0 + geom.n_antennas * beta * gamma);
    return EstimatorOperator::make_los(std::move(a), coef);
}

/// Isotropic-subspace operator A = (1/(tau_p sqrt(rho))) U D U^H with
/// D = L (L + I/gamma)^{-1} over the retained rank. The optional beta_scale
/// multiplies the sinc spectrum before filtering; the default applies the
/// spectrum as-is.
inline EstimatorOperator iso_precompute(const IsoBasis& basis, double gamma, double tau_p,
                                        double rho, std::optional<double> beta_scale = {}) {
    RVector lam = basis.eigenvalues;
    if (beta_scale) lam *= *beta_scale;
    RVector w(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) w(i) = lam(i) / (lam(i) + 1.0 / gamma);
    return EstimatorOperator::make_iso(basis.vectors, std::move(w),
                                       1.0 / (tau_p * std::sqrt(rho)));
}

/// DFT-based operator: circulant generator via circulant_first_row, spectrum
/// via circulant_eigenvalues, negative eigenvalues clamped to zero, then
///   A y = F diag(L/(L + I/gamma)) F^H y / (tau_p sqrt(rho))
/// executed with two length-N transforms. Clamping maps a would-be negative
/// subchannel to zero gain and removes the lambda = -1/gamma pole.
inline EstimatorOperator dft_precompute(const CVector& r_generator, double gamma, double tau_p,
                                        double rho) {
    CirculantSpectrum spec = circulant_eigenvalues(circulant_first_row(r_generator));
    const Eigen::Index n = spec.eigenvalues.size();
    RVector w(n);
    int clamped = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        double lam = spec.eigenvalues(k);
        if (lam < 0.0) {
            lam = 0.0;
            ++clamped;
        }
        w(k) = lam / (lam + 1.0 / gamma);
    }
    return EstimatorOperator::make_dft(std::move(w), 1.0 / (tau_p * std::sqrt(rho)), clamped);
}

inline EstimatorOperator dft_precompute(const SpatialCovariance& cov, double gamma, double tau_p,
                                        double rho) {
    return dft_precompute(cov.generator, gamma, tau_p, rho);
}

}  // namespace hmimo
