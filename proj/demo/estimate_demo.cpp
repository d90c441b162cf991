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

// Walk-through of the library API: one UE, one pilot observation, all five
// estimators compared on analytic and Monte-Carlo NMSEE.

#include <cstdio>

#include "hmimo/estimators.hpp"
#include "hmimo/metrics.hpp"

int main() {
    using namespace hmimo;

    // N = 64 quarter-wavelength vertical ULA, 10 m over the UE plane
    const UlaGeometry geom(64, 0.025, 0.1, 10.0);
    const ScenarioParams params(10, 0.1, std::pow(10.0, -11.7));
    const double gamma = params.snr();
    const double tau_p = params.pilot_length;
    const double rho = params.tx_power;

    // UE 17.3 m out, elevation -30 deg, Laplacian scattering 10 deg wide
    const UePlacement ue = UePlacement::at(10.0 / std::tan(deg_to_rad(30.0)), 0.0, 10.0);
    const double beta = pathloss_beta(ue.distance_3d);
    const SpatialCovariance cov =
        build_covariance(geom, ScatteringProfile(ue.elevation, deg_to_rad(10.0), beta));

    std::printf("UE: distance %.2f m, elevation %.2f deg, beta %.2f dB, SNR %.2f dB\n",
                ue.distance_3d, rad_to_deg(ue.elevation), 10.0 * std::log10(beta),
                10.0 * std::log10(received_snr(beta, params)));

    const std::vector<std::pair<const char*, EstimatorOperator>> ops = {
        {"MMSE", mmse_precompute(cov.matrix, gamma, tau_p, rho)},
        {"LS", ls_operator(tau_p, rho, 64)},
        {"LoS", los_precompute(geom, ue.azimuth, ue.elevation, beta, gamma, tau_p, rho)},
        {"ISO", iso_precompute(iso_basis(geom), gamma, tau_p, rho)},
        {"DFT", dft_precompute(cov.generator, gamma, tau_p, rho)},
    };

    RngStream rng(7);
    std::printf("%-6s %14s %14s\n", "scheme", "NMSEE(analytic)", "NMSEE(MC 2e4)");
    for (const auto& [name, op] : ops) {
        const double analytic = nmsee_analytic(cov, gamma, op, tau_p, rho);
        const double empirical = nmsee_empirical(op, cov, params, 20000, rng);
        std::printf("%-6s %14.6g %14.6g\n", name, analytic, empirical);
    }
    return 0;
}
