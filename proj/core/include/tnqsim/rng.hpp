#pragma once

#include <cstdint>
#include <random>

namespace tnqsim {

/// Seeded deterministic generator. The engine is std::mt19937_64 (whose output
/// sequence is fixed by the C++ standard); uniform doubles take the top 53 bits
/// of one draw, so samples are reproducible across platforms and builds.
class Rng {
 public:
  static constexpr const char* kAlgorithmId = "mt19937_64-u53";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double next_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on next_unit() draws.
  double next_gaussian();

  /// 0 with probability p0, else 1.
  int draw_bit(double p0) { return next_unit() < p0 ? 0 : 1; }

  /// Decorrelated seed for the i-th parallel stream (splitmix64 mix).
  static std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tnqsim
