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
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hmimo {

/// Complex transform plan for a fixed length N.
///
/// forward() applies the unnormalized DFT with kernel e^{-j 2*pi*m*n/N},
/// inverse() the unnormalized kernel e^{+j 2*pi*m*n/N} (no 1/N factor).
/// Powers of two run on an iterative radix-2 kernel; every other length
/// goes through Bluestein's chirp-z reduction to a power-of-two convolution,
/// so all N >= 1 cost O(N log N).
///
/// Plans are immutable after construction and safe to share across threads;
/// execution only touches caller-owned buffers and per-call scratch.
class Fft {
  public:
    explicit Fft(std::size_t n) : n_(n) {
        if (n == 0) throw std::invalid_argument("Fft: length must be >= 1");
        if (is_pow2(n_)) {
            build_twiddles(n_);
        } else {
            // Bluestein: x_k -> a_k x_k, convolve with b, multiply by a_k again,
            // where a_k = e^{-j pi k^2 / n}. Convolution length: pow2 >= 2n-1.
            m_ = 1;
            while (m_ < 2 * n_ - 1) m_ <<= 1;
            build_twiddles(m_);
            chirp_.resize(n_);
            for (std::size_t k = 0; k < n_; ++k) chirp_[k] = chirp_at(k);
            // b_k = conj(a_k) wrapped cyclically, transformed once up front.
            bfft_.assign(m_, {0.0, 0.0});
            bfft_[0] = std::conj(chirp_[0]);
            for (std::size_t k = 1; k < n_; ++k) {
                bfft_[k] = std::conj(chirp_[k]);
                bfft_[m_ - k] = std::conj(chirp_[k]);
            }
            radix2(bfft_.data(), m_, false);
        }
    }

    std::size_t size() const { return n_; }

    /// In-place unnormalized DFT, kernel e^{-j 2 pi m n / N}.
    void forward(std::complex<double>* data) const { execute(data, false); }
    /// In-place unnormalized inverse kernel e^{+j 2 pi m n / N} (no 1/N).
    void inverse(std::complex<double>* data) const { execute(data, true); }

    std::vector<std::complex<double>> forward(std::vector<std::complex<double>> v) const {
        check_len(v.size());
        forward(v.data());
        return v;
    }
    std::vector<std::complex<double>> inverse(std::vector<std::complex<double>> v) const {
        check_len(v.size());
        inverse(v.data());
        return v;
    }

  private:
    static bool is_pow2(std::size_t n) { return (n & (n - 1)) == 0; }

    void check_len(std::size_t len) const {
        if (len != n_) throw std::invalid_argument("Fft: buffer length does not match plan");
    }

    // e^{-j pi k^2 / n}; exponent reduced mod 2n (the kernel period in k^2)
    // to keep the trig argument small for large k.
    std::complex<double> chirp_at(std::size_t k) const {
        const std::uint64_t q = (static_cast<std::uint64_t>(k) * k) % (2 * n_);
        const double ang = -3.14159265358979323846 * static_cast<double>(q) / static_cast<double>(n_);
        return {std::cos(ang), std::sin(ang)};
    }

    void build_twiddles(std::size_t len) {
        tw_.resize(len / 2);
        for (std::size_t k = 0; k < len / 2; ++k) {
            const double ang = -2.0 * 3.14159265358979323846 * static_cast<double>(k) / static_cast<double>(len);
            tw_[k] = {std::cos(ang), std::sin(ang)};
        }
    }

    // Iterative radix-2 Cooley-Tukey over the shared twiddle table (table is
    // sized for the plan's pow2 length; stride-indexing reuses it at every stage).
    void radix2(std::complex<double>* a, std::size_t len, bool invert) const {
        for (std::size_t i = 1, j = 0; i < len; ++i) {
            std::size_t bit = len >> 1;
            for (; j & bit; bit >>= 1) j ^= bit;
            j ^= bit;
            if (i < j) std::swap(a[i], a[j]);
        }
        for (std::size_t half = 1; half < len; half <<= 1) {
            const std::size_t stride = len / (2 * half);
            for (std::size_t block = 0; block < len; block += 2 * half) {
                for (std::size_t k = 0; k < half; ++k) {
                    std::complex<double> w = tw_[k * stride];
                    if (invert) w = std::conj(w);
                    const std::complex<double> u = a[block + k];
                    const std::complex<double> v = a[block + k + half] * w;
                    a[block + k] = u + v;
                    a[block + k + half] = u - v;
                }
            }
        }
    }

    void execute(std::complex<double>* data, bool invert) const {
        if (n_ == 1) return;
        if (m_ == 0) {
            radix2(data, n_, invert);
            return;
        }
        // Bluestein. inverse(x) = conj(forward(conj(x))).
        std::vector<std::complex<double>> buf(m_, {0.0, 0.0});
        for (std::size_t k = 0; k < n_; ++k) {
            const std::complex<double> x = invert ? std::conj(data[k]) : data[k];
            buf[k] = x * chirp_[k];
        }
        radix2(buf.data(), m_, false);
        for (std::size_t k = 0; k < m_; ++k) buf[k] *= bfft_[k];
        radix2(buf.data(), m_, true);
        const double scale = 1.0 / static_cast<double>(m_);
        for (std::size_t k = 0; k < n_; ++k) {
            const std::complex<double> y = buf[k] * scale * chirp_[k];
            data[k] = invert ? std::conj(y) : y;
        }
    }

    std::size_t n_;
    std::size_t m_ = 0;  // Bluestein convolution length; 0 on the pow2 path
    std::vector<std::complex<double>> tw_;
    std::vector<std::complex<double>> chirp_;
    std::vector<std::complex<double>> bfft_;
};

}  // namespace hmimo
