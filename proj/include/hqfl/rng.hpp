#pragma once

#include <cstdint>

namespace hqfl {

/// Counter-based 64-bit generator. Output i is a bijective mix of
/// (key + i*gamma), so a stream is fully determined by its key and can be
/// replayed from any point. Streams for (run_seed, client, round) are derived
/// by hashing, which keeps per-client, per-round noise independent and
/// reproducible regardless of scheduling order.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  /// Derives an independent stream key from a run seed and up to two
  /// domain indices (e.g. client id and round).
  static Rng stream(std::uint64_t run_seed, std::uint64_t a = 0,
                    std::uint64_t b = 0);

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform();

  /// Uniform in (0, 1): never returns 0 or 1, safe under log().
  double uniform_open();

  /// Uniform in {0, ..., bound-1}. bound must be > 0.
  std::uint64_t uniform_int(std::uint64_t bound);

  /// Standard normal via Box-Muller (two uniforms per call).
  double normal();
  double normal(double sigma) { return sigma * normal(); }

  /// Gamma(alpha, 1) via Marsaglia-Tsang; alpha < 1 handled by boosting.
  double gamma(double alpha);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

}  // namespace hqfl
