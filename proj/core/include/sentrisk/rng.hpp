#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace sentrisk {

// Deterministic random source. The engine is std::mt19937_64 (its output
// sequence is fixed by the standard); every variate transform is written
// out here rather than delegated to std::*_distribution, whose algorithms
// vary across standard libraries. Same seed => same stream everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on (0,1), 53-bit resolution, never exactly 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Rejection-free modulo bias is negligible for
  // the n used here, but use Lemire-style rejection anyway to keep draws
  // exact.
  std::size_t uniform_index(std::size_t n);

  // Standard normal via inverse-CDF transform.
  double normal();

  // Gamma(shape, scale 1), Marsaglia-Tsang squeeze; any shape > 0.
  double gamma(double shape);

  // Inverse gamma with given shape and rate: X = rate / Gamma(shape).
  double inverse_gamma(double shape, double rate) { return rate / gamma(shape); }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

  // Independent child stream with a seed derived from this one.
  Rng spawn() { return Rng(next_u64() ^ 0x9e3779b97f4a7c15ull); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sentrisk
