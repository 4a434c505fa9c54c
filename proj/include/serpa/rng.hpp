#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

namespace serpa {

// Deterministic random stream. All stochastic code draws through this wrapper
// so that (seed, call order) fixes every downstream artifact byte-for-byte.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inverse-CDF draw from a probability vector; consumes exactly one uniform.
  int categorical(const Eigen::Ref<const Eigen::VectorXd>& p) {
    const double u = uniform();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      acc += p[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(p.size()) - 1;  // cumulative rounding guard
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace serpa
