#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace fairsim {

// Deterministic random stream.
//
// All draws are derived from raw mt19937_64 output instead of the standard
// <random> distribution templates, whose results are implementation-defined.
// This keeps seeded sequences byte-identical across toolchains, which the
// export/replay guarantees rely on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [lo, hi] inclusive. The modulo bias is far below any
  // tolerance used here and the result is reproducible everywhere.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1u;
    return lo + static_cast<std::int64_t>(bits() % span);
  }

  // Knuth's product method; adequate for the small means used by the model.
  int poisson(double mean) {
    if (mean < 0) throw std::invalid_argument("poisson: negative mean");
    if (mean == 0) return 0;
    const double limit = std::exp(-mean);
    int k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  // Index draw proportional to non-negative weights.
  std::size_t categorical(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) {
      if (w < 0) throw std::invalid_argument("categorical: negative weight");
      total += w;
    }
    if (total <= 0) throw std::invalid_argument("categorical: zero mass");
    double u = uniform() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0) return i;
    }
    return weights.size() - 1;
  }

  // Multiplicatively uniform draw over [lo, hi]; requires 0 < lo <= hi.
  double log_uniform(double lo, double hi) {
    if (!(lo > 0) || hi < lo) throw std::invalid_argument("log_uniform: bad range");
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

 private:
  std::mt19937_64 gen_;
};

// Cheap stateless mix for deriving independent child seeds from a parent
// seed plus a salt (splitmix64 finalizer).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1u);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace fairsim
