#pragma once

#include <cstdint>
#include <vector>

namespace ctkit {

// Deterministic splitmix64 generator. Every randomized routine in the
// toolkit draws from an explicitly seeded Rng so runs are reproducible
// across platforms and standard-library versions (std::normal_distribution
// and friends are not portable across implementations).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  // Uniform double in (0, 1]; safe as a log() argument.
  double uniform01_open_low();

  // Box-Muller normal deviate.
  double normal(double mean, double stddev);

  // Unbiased integer in [0, bound) via rejection.
  std::uint64_t below(std::uint64_t bound);

  // Inclusive integer range.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p);

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(below(i + 1));
      std::swap(v[i], v[j]);
    }
  }

  // Stable sub-seed derivation so independent stages (providers, folds,
  // grid cells, forest trees) can be generated in any order.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::uint64_t state_;
};

double normal_pdf(double x);
double normal_cdf(double x);

// Normal left-truncated at zero. The location parameter is calibrated so
// the truncated distribution's mean equals `mean`; plain truncation of
// N(mean, stddev) would inflate the mean whenever the mass below zero is
// non-negligible.
class TruncatedNormal {
 public:
  TruncatedNormal(double mean, double stddev);

  double sample(Rng& rng) const;

  double location() const { return location_; }
  double scale() const { return stddev_; }

 private:
  double mean_ = 0.0;
  double stddev_ = 0.0;
  double location_ = 0.0;
  double cut_ = 0.0;  // truncation point in standard units: (0 - location) / stddev
};

}  // namespace ctkit
