#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace cylreg {

// Counter-based stream split. Every random stream in the project is keyed by
// (master seed, replica index, coordinate index); the key is folded through
// splitmix64 rounds and seeds a mt19937_64. Streams with distinct keys are
// independent for all practical purposes and the derivation is insensitive to
// the order in which streams are created, so replicas can be generated
// concurrently or out of order.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t replica,
                                std::uint64_t coord) {
  std::uint64_t s = seed;
  std::uint64_t k = splitmix64(s);
  s ^= replica * 0x9e3779b97f4a7c15ull;
  k ^= splitmix64(s);
  s ^= coord * 0xd1b54a32d192ed03ull;
  k ^= splitmix64(s);
  return k;
}

// One stream per (seed, replica, coordinate). All samplers are implemented
// here rather than with std:: distributions; the engine is fully specified by
// the standard, so a fixed key reproduces the same draws on any platform.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t replica, std::uint64_t coord)
      : engine_(stream_key(seed, replica, coord)) {}

  explicit RngStream(std::uint64_t key) : engine_(key) {}

  // uniform on (0,1), never returns an endpoint
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Box-Muller; draws two normals per transform and caches the spare
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  double exponential() { return -std::log(uniform01()); }

  // Exact Poisson count by accumulating unit-exponential arrivals in log
  // space; O(mean) draws, no underflow for large means.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
    std::uint64_t count = 0;
    double acc = exponential();
    while (acc <= mean) {
      ++count;
      acc += exponential();
    }
    return count;
  }

  // Chambers-Mallows-Stuck draw from the standard symmetric alpha-stable law,
  // characteristic function exp(-|u|^alpha). Valid for alpha in (0,2).
  double stable(double alpha) {
    const double v = uniform(-M_PI / 2.0, M_PI / 2.0);
    const double w = exponential();
    if (alpha == 1.0) return std::tan(v);
    const double t = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha);
    const double s = std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
    return t * s;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cylreg
