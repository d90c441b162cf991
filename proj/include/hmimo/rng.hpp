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

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>

namespace hmimo {

/// splitmix64 finalizer; the mixing primitive for the stream tree.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Child-stream derivation: child = splitmix64(parent XOR splitmix64(id + 1)).
/// Experiments derive per-trial streams as
///   derive(derive(derive(master_seed, experiment_id), sweep_index), trial_index)
/// so any worker schedule reproduces the same stream for a given trial.
inline std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t id) {
    return splitmix64(parent ^ splitmix64(id + 1));
}

/// xoshiro256++ with Box-Muller Gaussians. One instance per trial; instances
/// are cheap and never shared across threads.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s = splitmix64(s);
            word = s;
        }
    }

    RngStream(std::uint64_t master, std::initializer_list<std::uint64_t> path)
        : RngStream([&] {
              std::uint64_t s = master;
              for (std::uint64_t id : path) s = derive_stream(s, id);
              return s;
          }()) {}

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard real Gaussian N(0, 1), Box-Muller with a cached spare.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * 3.14159265358979323846 * uniform01();
        spare_ = r * std::sin(ang);
        have_spare_ = true;
        return r * std::cos(ang);
    }

    /// Circularly-symmetric complex Gaussian CN(0, 1): unit total variance,
    /// independent real/imag parts of variance 1/2 each.
    std::complex<double> complex_gaussian() {
        const double s = std::sqrt(0.5);
        return {s * gaussian(), s * gaussian()};
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace hmimo
