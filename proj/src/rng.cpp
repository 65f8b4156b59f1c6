#include "hqfl/rng.hpp"

#include <cmath>

#include "hqfl/errors.hpp"

namespace hqfl {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kStreamSalt1 = 0xD1B54A32D192ED03ull;
constexpr std::uint64_t kStreamSalt2 = 0x8CB92BA72F3D8DD7ull;
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Rng Rng::stream(std::uint64_t run_seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t key = mix64(run_seed + kGamma);
  key = mix64(key ^ (a + kStreamSalt1));
  key = mix64(key ^ (b + kStreamSalt2));
  return Rng(key);
}

std::uint64_t Rng::next_u64() {
  counter_ += 1;
  return mix64(key_ + counter_ * kGamma);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_int(std::uint64_t bound) {
  if (bound == 0) throw InputError("uniform_int: bound must be positive");
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
}

double Rng::normal() {
  double u1 = uniform_open();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double Rng::gamma(double alpha) {
  if (!(alpha > 0.0)) throw InputError("gamma: alpha must be positive");
  if (alpha < 1.0) {
    // Boost: Gamma(a) = Gamma(a+1) * U^(1/a).
    double g = gamma(alpha + 1.0);
    double u = uniform_open();
    return g * std::pow(u, 1.0 / alpha);
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = uniform_open();
    if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace hqfl
