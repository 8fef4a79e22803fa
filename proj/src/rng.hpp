#pragma once

#include <cmath>
#include <cstdint>

namespace lsirm {

// SplitMix64 finalizer; used to derive substream keys from (seed, sweep, block, row).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Parameter blocks of one MCMC sweep. Each (sweep, block, row) triple owns an
// independent random substream, so row-level updates can be fanned out across
// threads without changing the draws.
enum class Block : std::uint64_t {
  init_theta = 1,
  init_beta,
  init_alpha,
  init_gamma,
  init_z,
  init_w,
  init_impute,
  impute = 32,
  theta,
  beta,
  alpha,
  gamma,
  slab,
  sigma_sq,
  sigma_eps_sq,
  pos_z,
  pos_w,
  datagen_theta = 64,
  datagen_positions,
  datagen_cells,
  datagen_mask,
};

// PCG32 with a derived increment; one instance per substream.
class SubstreamRng {
 public:
  SubstreamRng(std::uint64_t initstate, std::uint64_t initseq)
      : state_(0), inc_((initseq << 1u) | 1u) {
    next_u32();
    state_ += initstate;
    next_u32();
  }

  std::uint32_t next_u32() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe under log().
  double uniform_pos() { return 1.0 - uniform(); }

  // Box-Muller; two uniforms per variate.
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Marsaglia-Tsang; standard Gamma(shape, scale 1).
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform_pos();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Inv-Gamma(shape, scale): density proportional to x^{-shape-1} exp(-scale/x).
  double inv_gamma(double shape, double scale) { return scale / gamma(shape); }

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
};

// Substream factory for one sweep of one chain.
class SweepRng {
 public:
  SweepRng(std::uint64_t seed, std::uint64_t sweep) : seed_(seed), sweep_(sweep) {}

  SubstreamRng stream(Block block, std::uint64_t row = 0) const {
    std::uint64_t h = mix64(seed_ ^ 0x6c62272e07bb0142ULL);
    h = mix64(h ^ sweep_);
    h = mix64(h ^ static_cast<std::uint64_t>(block));
    h = mix64(h ^ row);
    return SubstreamRng(h, mix64(h ^ 0x2545f4914f6cdd1dULL));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t sweep() const { return sweep_; }

 private:
  std::uint64_t seed_;
  std::uint64_t sweep_;
};

}  // namespace lsirm
