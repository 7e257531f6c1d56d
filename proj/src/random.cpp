#include "imlike/random.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

namespace imlike {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

unsigned thread_count() {
  if (const char* env = std::getenv("IMLIKE_THREADS")) {
    try {
      const long value = std::stol(env);
      if (value > 0) return static_cast<unsigned>(value);
    } catch (...) {
      // fall through to the hardware default
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Vector unit_sphere(Rng& rng, Index dim) {
  Vector z(dim);
  double norm = 0.0;
  while (norm < 1e-12) {
    for (Index i = 0; i < dim; ++i) z(i) = std_normal(rng);
    norm = z.norm();
  }
  return z / norm;
}

double von_mises_draw(Rng& rng, double mu, double kappa) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double angle;
  if (kappa < 1e-8) {
    angle = two_pi * uniform01(rng);
  } else {
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);
    double f;
    while (true) {
      const double u1 = uniform01(rng);
      const double z = std::cos(std::numbers::pi * u1);
      f = (1.0 + r * z) / (r + z);
      const double c = kappa * (r - f);
      const double u2 = uniform01(rng);
      if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) break;
    }
    const double u3 = uniform01(rng);
    angle = mu + (u3 > 0.5 ? std::acos(f) : -std::acos(f));
  }
  angle = std::fmod(angle, two_pi);
  return angle < 0.0 ? angle + two_pi : angle;
}

}  // namespace imlike
