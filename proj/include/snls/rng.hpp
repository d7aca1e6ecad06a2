#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>

namespace snls {

// Philox4x32-10 counter-based generator. Each (key, stream) pair owns a
// disjoint counter plane, so replica streams derived from one master seed are
// independent by construction and can be consumed in parallel without shared
// state. Satisfies std::uniform_random_bit_generator.
class Philox4x32 {
public:
  using result_type = std::uint32_t;

  explicit Philox4x32(std::uint64_t key = 0, std::uint64_t stream = 0) {
    key_ = {static_cast<std::uint32_t>(key),
            static_cast<std::uint32_t>(key >> 32)};
    counter_ = {0u, 0u, static_cast<std::uint32_t>(stream),
                static_cast<std::uint32_t>(stream >> 32)};
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xFFFFFFFFu; }

  result_type operator()() {
    if (pos_ == 4) {
      block_ = generate(counter_, key_);
      advance_counter();
      pos_ = 0;
    }
    return block_[pos_++];
  }

private:
  static std::array<std::uint32_t, 4> generate(std::array<std::uint32_t, 4> x,
                                               std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ull * x[0];
      const std::uint64_t p1 = 0xCD9E8D57ull * x[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
      k[0] += 0x9E3779B9u;
      k[1] += 0xBB67AE85u;
    }
    return x;
  }

  void advance_counter() {
    if (++counter_[0] == 0) ++counter_[1];  // [2],[3] hold the stream id
  }

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  int pos_ = 4;
};

// Identifies one RNG stream: every sampled object records its lineage so a
// path can be replayed bit-for-bit.
struct SeedRecord {
  std::uint64_t master_seed = 0;
  std::uint64_t stream = 0;
};

inline Philox4x32 make_rng(const SeedRecord& seed) {
  return Philox4x32(seed.master_seed, seed.stream);
}

// Uniform in (0,1); never returns 0 or 1 exactly.
inline double uniform01(Philox4x32& g) {
  return (static_cast<double>(g()) + 0.5) * 0x1p-32;
}

// Box-Muller pair of independent standard normals; consumes exactly two
// uniforms, so draw counts are deterministic across platforms (unlike
// std::normal_distribution).
inline std::pair<double, double> normal_pair(Philox4x32& g) {
  const double u1 = uniform01(g);
  const double u2 = uniform01(g);
  const double rho = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  return {rho * std::cos(a), rho * std::sin(a)};
}

// Mean-zero complex Gaussian with E|g|^2 = variance (independent real and
// imaginary parts of variance/2 each).
inline std::complex<double> complex_gaussian(Philox4x32& g, double variance) {
  auto [a, b] = normal_pair(g);
  const double w = std::sqrt(0.5 * variance);
  return {w * a, w * b};
}

}  // namespace snls
