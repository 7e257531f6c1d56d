#pragma once

#include "imlike/types.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace imlike {

using Rng = std::mt19937_64;

// Deterministic child seed for task `index` under a top-level seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

inline Rng derive_stream(std::uint64_t seed, std::uint64_t index) {
  return Rng(derive_seed(seed, index));
}

// Worker count: IMLIKE_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

// Runs f(i) for i in [0, n). Work is handed out dynamically, so f must write
// its result by index to keep output independent of scheduling.
template <class F>
void parallel_for(Index n, F&& f) {
  const unsigned workers = std::min<unsigned>(thread_count(), static_cast<unsigned>(std::max<Index>(n, 1)));
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (Index i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
inline double std_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }
inline double gamma_draw(Rng& rng, double shape, double scale = 1.0) {
  return std::gamma_distribution<double>(shape, scale)(rng);
}
inline double chi2_draw(Rng& rng, double dof) { return 2.0 * gamma_draw(rng, 0.5 * dof); }
inline double student_t_draw(Rng& rng, double dof) {
  return std_normal(rng) / std::sqrt(chi2_draw(rng, dof) / dof);
}

// Uniform direction on the unit sphere in R^dim (normalized Gaussian vector).
Vector unit_sphere(Rng& rng, Index dim);

// von Mises(mu, kappa) on [0, 2pi) by the Best-Fisher rejection sampler.
double von_mises_draw(Rng& rng, double mu, double kappa);

}  // namespace imlike
