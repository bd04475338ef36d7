#include "ctkit/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ctkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform01_open_low() { return 1.0 - uniform01(); }

double Rng::normal(double mean, double stddev) {
  const double u1 = uniform01_open_low();
  const double u2 = uniform01();
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw std::invalid_argument("Rng::uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(below(span));
}

bool Rng::bernoulli(double p) { return uniform01() < p; }

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed ^ (0xA0761D6478BD642FULL + stream * 0xE7037ED1A0B428DBULL);
  return splitmix64(state);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Mean of N(location, scale) conditioned on being >= 0.
double truncated_mean(double location, double scale) {
  const double cut = -location / scale;
  const double tail = 0.5 * std::erfc(cut / std::sqrt(2.0));  // P(Z >= cut)
  return location + scale * normal_pdf(cut) / tail;
}

}  // namespace

TruncatedNormal::TruncatedNormal(double mean, double stddev)
    : mean_(mean), stddev_(stddev) {
  if (stddev < 0.0) throw std::invalid_argument("TruncatedNormal: negative stddev");
  if (stddev == 0.0) {
    location_ = mean;
    cut_ = 0.0;
    return;
  }
  if (mean <= 0.0) {
    // Cannot calibrate a non-positive target mean; fall back to plain truncation.
    location_ = mean;
    cut_ = -location_ / stddev_;
    return;
  }
  // truncated_mean is increasing in the location and exceeds the target when
  // location == mean, so bisect downward until it brackets the target.
  double hi = mean;
  double lo = mean - stddev;
  while (truncated_mean(lo, stddev) > mean) {
    lo -= stddev;
    if (lo < mean - 60.0 * stddev) break;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (truncated_mean(mid, stddev) > mean) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  location_ = 0.5 * (lo + hi);
  cut_ = -location_ / stddev_;
}

double TruncatedNormal::sample(Rng& rng) const {
  if (stddev_ == 0.0) return location_ < 0.0 ? 0.0 : location_;
  if (cut_ <= 2.0) {
    // Acceptance probability is at worst ~2%; fine for moderate cuts.
    for (;;) {
      const double z = rng.normal(0.0, 1.0);
      if (z >= cut_) return location_ + stddev_ * z;
    }
  }
  // Robert's exponential-proposal sampler for deep tails.
  const double rate = 0.5 * (cut_ + std::sqrt(cut_ * cut_ + 4.0));
  for (;;) {
    const double z = cut_ - std::log(rng.uniform01_open_low()) / rate;
    const double d = z - rate;
    if (rng.uniform01() <= std::exp(-0.5 * d * d)) return location_ + stddev_ * z;
  }
}

}  // namespace ctkit
