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

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hmimo/linalg.hpp"
#include "hmimo/quadrature.hpp"
#include "hmimo/rng.hpp"

namespace hmimo {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Vertical uniform linear array: N antennas at positions [0, 0, n*d],
/// elevated `array_elevation` meters above the UE plane.
struct UlaGeometry {
    int n_antennas = 64;
    double spacing = 0.025;          // meters
    double wavelength = 0.1;         // meters
    double array_elevation = 10.0;   // meters above the UE plane

    UlaGeometry() = default;
    UlaGeometry(int n, double d, double lambda, double elevation)
        : n_antennas(n), spacing(d), wavelength(lambda), array_elevation(elevation) {
        if (n_antennas < 1 || spacing <= 0.0 || wavelength <= 0.0 || array_elevation < 0.0)
            throw std::invalid_argument("UlaGeometry: need N >= 1, d > 0, lambda > 0, b >= 0");
    }

    double aperture() const { return n_antennas * spacing; }
    double aperture_over_wavelength() const { return aperture() / wavelength; }
};

/// UE location relative to the array. Elevation is negative (UE plane below
/// the array): theta = -atan(b / horizontal_distance).
struct UePlacement {
    double horizontal_distance = 0.0;  // meters
    double azimuth = 0.0;              // radians
    double elevation = 0.0;            // radians, <= 0
    double distance_3d = 0.0;          // meters, b / |sin theta|

    static UePlacement at(double horizontal, double azimuth_rad, double array_elevation) {
        if (horizontal <= 0.0)
            throw std::invalid_argument("UePlacement: horizontal distance must be positive");
        UePlacement p;
        p.horizontal_distance = horizontal;
        p.azimuth = azimuth_rad;
        p.elevation = -std::atan2(array_elevation, horizontal);
        p.distance_3d = std::hypot(array_elevation, horizontal);
        return p;
    }
};

/// Laplacian local scattering around a nominal elevation.
struct ScatteringProfile {
    double nominal_elevation = 0.0;  // radians
    double angular_spread = 0.0;     // radians, > 0
    double beta = 1.0;               // linear average channel gain, > 0

    ScatteringProfile() = default;
    ScatteringProfile(double theta_k, double sigma_theta, double beta_k)
        : nominal_elevation(theta_k), angular_spread(sigma_theta), beta(beta_k) {
        if (angular_spread <= 0.0 || beta <= 0.0)
            throw std::invalid_argument("ScatteringProfile: sigma_theta and beta must be positive");
    }
};

/// Pilot-phase scalars. gamma = tau_p * rho / sigma2 is the pilot SNR shared
/// by every UE; per-UE received SNR is beta_k * gamma.
struct ScenarioParams {
    int pilot_length = 10;       // tau_p
    double tx_power = 0.1;       // rho, watts
    double noise_power = 1.995262314968879e-12;  // sigma^2, watts (-87 dBm)
    double bandwidth_hz = 1e8;   // documentation only

    ScenarioParams() = default;
    ScenarioParams(int tau_p, double rho, double sigma2, double bw = 1e8)
        : pilot_length(tau_p), tx_power(rho), noise_power(sigma2), bandwidth_hz(bw) {
        if (pilot_length < 1 || tx_power <= 0.0 || noise_power <= 0.0)
            throw std::invalid_argument("ScenarioParams: powers and pilot length must be positive");
    }

    double snr() const { return pilot_length * tx_power / noise_power; }
    /// tau_p * sqrt(rho), the pilot despreading gain on the observation.
    double pilot_gain() const { return pilot_length * std::sqrt(tx_power); }
};

/// Hermitian-Toeplitz spatial covariance. `generator` is r(n), n = 0..N-1,
/// with [R]_{m,l} = r(m-l) for m >= l and r*(l-m) otherwise.
struct SpatialCovariance {
    CVector generator;
    CMatrix matrix;

    int dim() const { return static_cast<int>(generator.size()); }
};

/// Assembles the dense Hermitian-Toeplitz matrix from its generator.
inline CMatrix toeplitz_from_generator(const CVector& gen) {
    const Eigen::Index n = gen.size();
    CMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            m(i, j) = (i >= j) ? gen(i - j) : std::conj(gen(j - i));
    return m;
}

/// Plane-wave array response for the vertical ULA; entry n is
/// exp(j (2 pi / lambda) sin(theta) n d). The azimuth drops out of the
/// vertical geometry but stays in the signature to mirror the scenario.
inline CVector array_response(const UlaGeometry& geom, double azimuth, double elevation) {
    (void)azimuth;
    if (std::abs(elevation) > kPi / 2 + 1e-12)
        throw std::invalid_argument("array_response: |elevation| must be <= pi/2");
    const double step = 2.0 * kPi / geom.wavelength * std::sin(elevation) * geom.spacing;
    CVector a(geom.n_antennas);
    for (int n = 0; n < geom.n_antennas; ++n)
        a(n) = std::polar(1.0, step * static_cast<double>(n));
    return a;
}

/// Unnormalized Laplacian angular density exp(-sqrt(2) |theta - theta_k| / sigma).
/// The covariance builder normalizes it over the quadrature support.
inline double laplacian_density(const ScatteringProfile& profile, double theta) {
    return std::exp(-std::sqrt(2.0) * std::abs(theta - profile.nominal_elevation) /
                    profile.angular_spread);
}

/// Builds R from the angular power density:
///   r(n) = beta * integral exp(j (2 pi/lambda) d n sin theta) f(theta) dtheta
/// by Gauss-Legendre quadrature over the truncated Laplacian support
/// [theta_k - T*sigma, theta_k + T*sigma] clipped to [-pi/2, pi/2], with f
/// renormalized on that support. The node budget is split into two panels
/// meeting at theta_k where the Laplacian has its kink; a single panel across
/// the kink would stall at O(1/n^2) accuracy. The result is a positive
/// combination of rank-one steering outer products, hence PSD up to rounding.
inline SpatialCovariance build_covariance(const UlaGeometry& geom, const ScatteringProfile& profile,
                                          const QuadratureSpec& quad = {}) {
    const double lo = std::max(-kPi / 2, profile.nominal_elevation - quad.tail_sigmas * profile.angular_spread);
    const double hi = std::min(kPi / 2, profile.nominal_elevation + quad.tail_sigmas * profile.angular_spread);
    if (!(hi > lo)) throw std::invalid_argument("build_covariance: empty quadrature support");

    struct Panel {
        double lo, hi;
        std::size_t nodes;
    };
    std::vector<Panel> panels;
    const double kink = profile.nominal_elevation;
    if (kink > lo && kink < hi) {
        panels.push_back({lo, kink, quad.n_nodes / 2});
        panels.push_back({kink, hi, quad.n_nodes - quad.n_nodes / 2});
    } else {
        panels.push_back({lo, hi, quad.n_nodes});
    }

    std::vector<double> density, sine;
    density.reserve(quad.n_nodes);
    sine.reserve(quad.n_nodes);
    double norm = 0.0;
    for (const Panel& panel : panels) {
        if (panel.nodes == 0) continue;
        const GaussLegendreRule& rule = gauss_legendre(panel.nodes);
        const double mid = 0.5 * (panel.hi + panel.lo);
        const double halfwidth = 0.5 * (panel.hi - panel.lo);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double theta = mid + halfwidth * rule.nodes[q];
            const double w = halfwidth * rule.weights[q] * laplacian_density(profile, theta);
            density.push_back(w);
            sine.push_back(std::sin(theta));
            norm += w;
        }
    }
    const std::size_t nq = density.size();

    const double wave = 2.0 * kPi / geom.wavelength * geom.spacing;
    SpatialCovariance cov;
    cov.generator.resize(geom.n_antennas);
    for (int n = 0; n < geom.n_antennas; ++n) {
        Complex acc(0.0, 0.0);
        for (std::size_t q = 0; q < nq; ++q)
            acc += density[q] * std::polar(1.0, wave * n * sine[q]);
        cov.generator(n) = profile.beta * acc / norm;
    }
    // r(0) is a power; discard quadrature's imaginary dust.
    cov.generator(0) = Complex(cov.generator(0).real(), 0.0);
    cov.matrix = toeplitz_from_generator(cov.generator);
    if (!all_finite(cov.matrix)) throw std::runtime_error("build_covariance: non-finite entries");
    return cov;
}

/// Distance-based average channel gain. Defaults follow a 3.76-exponent urban
/// profile with -148.1 dB gain at the 1 km reference.
struct PathLossModel {
    double ref_distance = 1000.0;  // meters
    double exponent = 3.76;
    double ref_gain_db = -148.1;

    double beta_db(double distance_3d) const {
        if (distance_3d <= 0.0) throw std::invalid_argument("pathloss: distance must be positive");
        return ref_gain_db - 10.0 * exponent * std::log10(distance_3d / ref_distance);
    }
    double beta(double distance_3d) const { return std::pow(10.0, beta_db(distance_3d) / 10.0); }
};

inline double pathloss_beta(double distance_3d, const PathLossModel& model = {}) {
    return model.beta(distance_3d);
}

/// Received SNR beta * tau_p * rho / sigma^2.
inline double received_snr(double beta, const ScenarioParams& params) {
    if (beta <= 0.0) throw std::invalid_argument("received_snr: beta must be positive");
    return beta * params.snr();
}

/// Channel sampler h = S z with S S^H = R and z ~ CN(0, I). Factor once,
/// draw many; instances are immutable and shareable.
class ChannelSampler {
  public:
    explicit ChannelSampler(const SpatialCovariance& cov, double clamp_tol = 1e-10)
        : factor_(psd_factor(cov.matrix, clamp_tol)) {}

    CVector draw(RngStream& rng) const {
        CVector z(factor_.cols());
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.complex_gaussian();
        return factor_ * z;
    }

  private:
    CMatrix factor_;
};

inline CVector sample_channel(const SpatialCovariance& cov, RngStream& rng,
                              double clamp_tol = 1e-10) {
    return ChannelSampler(cov, clamp_tol).draw(rng);
}

/// Pilot observation y = tau_p sqrt(rho) h + w, w ~ CN(0, tau_p sigma^2 I).
inline CVector pilot_observation(const CVector& h, const ScenarioParams& params, RngStream& rng) {
    const double gain = params.pilot_gain();
    const double noise_std = std::sqrt(params.pilot_length * params.noise_power);
    CVector y(h.size());
    for (Eigen::Index i = 0; i < h.size(); ++i)
        y(i) = gain * h(i) + noise_std * rng.complex_gaussian();
    return y;
}

/// Cell sector for random UE drops. Horizontal distance is drawn uniformly
/// (or uniformly in area when selected); azimuth uniform over the sector.
struct SectorConfig {
    double min_distance = 5.0;    // meters
    double max_distance = 100.0;  // meters
    double azimuth_min = -kPi / 3;
    double azimuth_max = kPi / 3;
    bool uniform_in_area = false;

    double elevation_at(double horizontal, double array_elevation) const {
        return -std::atan2(array_elevation, horizontal);
    }
};

inline UePlacement draw_ue(const SectorConfig& sector, const UlaGeometry& geom, RngStream& rng) {
    if (!(sector.min_distance > 0.0) || sector.min_distance > sector.max_distance)
        throw std::invalid_argument("draw_ue: need 0 < min_dist <= max_dist");
    double dist;
    if (sector.min_distance == sector.max_distance) {
        dist = sector.min_distance;
    } else if (sector.uniform_in_area) {
        const double lo2 = sector.min_distance * sector.min_distance;
        const double hi2 = sector.max_distance * sector.max_distance;
        dist = std::sqrt(rng.uniform(lo2, hi2));
    } else {
        dist = rng.uniform(sector.min_distance, sector.max_distance);
    }
    const double az = (sector.azimuth_min == sector.azimuth_max)
                          ? sector.azimuth_min
                          : rng.uniform(sector.azimuth_min, sector.azimuth_max);
    return UePlacement::at(dist, az, geom.array_elevation);
}

}  // namespace hmimo
