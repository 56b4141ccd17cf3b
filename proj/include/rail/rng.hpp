#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace rail {

// SplitMix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return mix64(mix64(mix64(base) ^ stream) ^ index);
}

// Portable random stream. std::mt19937_64 has a standardized output
// sequence; the std:: distributions do not, so the continuous draws are
// done by hand to keep runs byte-identical across standard libraries.
class random_stream {
public:
  explicit random_stream(std::uint64_t seed = 0) : engine_(seed) {}

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1], safe for log().
  double uniform_open_low() { return 1.0 - uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; consumes exactly two uniforms.
  double standard_normal() {
    const double u1 = uniform_open_low();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Pareto(alpha, scale) by inversion; consumes one uniform.
  double pareto(double alpha, double scale) {
    return scale * std::pow(uniform_open_low(), -1.0 / alpha);
  }

  std::uint64_t next_u64() { return engine_(); }

private:
  std::mt19937_64 engine_;
};

}  // namespace rail
