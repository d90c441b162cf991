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

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace hmimo {

/// requested <= 0 means auto (hardware concurrency, HMIMO_THREADS overrides).
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HMIMO_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(i) for i in [0, n) on a fixed pool. Work items must be independent
/// and write only to their own index, which keeps results identical for every
/// worker count. The first exception wins and is rethrown on the caller.
template <typename F>
void parallel_for(std::size_t n, int threads, F&& fn) {
    threads = std::max(1, threads);
    if (threads == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(n);  // drain remaining work
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int nw = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), n));
    pool.reserve(static_cast<std::size_t>(nw));
    for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Raised by experiment workers on unrecoverable numerics; carries the seed
/// path of the failing trial so the run can be reproduced.
class NumericalError : public std::runtime_error {
  public:
    NumericalError(const std::string& what, std::string seed_path)
        : std::runtime_error(what), seed_path_(std::move(seed_path)) {}
    const std::string& seed_path() const { return seed_path_; }

  private:
    std::string seed_path_;
};

}  // namespace hmimo
