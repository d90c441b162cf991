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
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace hmimo {

/// Gauss-Legendre rule on [-1, 1]. Nodes ascending, weights positive.
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Computes the n-point rule by Newton iteration on the Legendre recurrence.
/// Nodes converge to machine precision in a handful of iterations.
inline GaussLegendreRule make_gauss_legendre(std::size_t n) {
    if (n == 0) throw std::invalid_argument("make_gauss_legendre: n must be >= 1");
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double pi = 3.14159265358979323846;
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        // Tricomi-style initial guess, then Newton on P_n.
        double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(n) * (p0 - x * p1) / (1.0 - x * x);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.weights[i] = w;
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

/// Shared per-order cache; rules are immutable once built.
inline const GaussLegendreRule& gauss_legendre(std::size_t n) {
    static std::mutex mut;
    static std::map<std::size_t, std::unique_ptr<GaussLegendreRule>> cache;
    std::lock_guard<std::mutex> lock(mut);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, std::make_unique<GaussLegendreRule>(make_gauss_legendre(n))).first;
    return *it->second;
}

/// Integration spec for covariance synthesis: node count plus how many
/// angular-spread widths of Laplacian tail to keep around the nominal angle.
struct QuadratureSpec {
    std::size_t n_nodes = 2048;
    double tail_sigmas = 10.0;
};

}  // namespace hmimo
