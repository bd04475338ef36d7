#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ctkit/matrix.hpp"
#include "ctkit/records.hpp"

namespace ctkit {

// Per-source marginal distribution parameters driving the generator.
struct ProviderParams {
  std::string name;
  Label label = Label::CT;
  double followers_mean = 0.0;
  double followers_std = 0.0;
  double following_mean = 0.0;
  double following_std = 0.0;
  double posts_mean = 0.0;
  double posts_std = 0.0;
  double private_rate = 0.0;
  double url_rate = 0.0;
  std::size_t count = 0;

  // Service-level metadata about the source; recorded for reference, not
  // consulted when sampling profile fields.
  std::string price;
  std::string delivery_time;
  bool drop_protection = false;
  int followers_received = 0;
  int followers_one_month = 0;
};

struct IntRange {
  int lo = 0;
  int hi = 0;  // inclusive
};

struct LabelAux {
  IntRange username_length;
  IntRange digit_count;
  IntRange fullname_length;
  IntRange bio_length;         // target biography length, characters
  IntRange hashtag_mentions;   // '#'/'@' tokens planted in the biography
  double fullname_symbol_rate = 0.0;
  double verified_rate = 0.0;
  double clips_rate = 0.0;
  double business_rate = 0.0;
  double category_rate = 0.0;
  double multi_category_rate = 0.0;  // conditional on a category being present
};

// Fields not covered by the per-source study get label-conditioned defaults
// with deliberately overlapping ranges, so the learnable signal comes from
// the measured count/rate columns.
struct AuxParams {
  double videos_fraction_of_posts = 0.2;
  LabelAux ct;
  LabelAux real;
};

// Eleven CT sources (counts summing to 1293) plus one Real source (1307).
std::vector<ProviderParams> default_params();
AuxParams default_aux();

std::vector<ProviderParams> load_provider_params(const std::filesystem::path& path);
void save_provider_params(const std::vector<ProviderParams>& params,
                          const std::filesystem::path& path);

// Count fields are drawn from a zero-truncated normal whose location is
// calibrated so the sampled mean tracks the configured mean; flags are
// Bernoulli at the configured rates. Deterministic given the seed.
std::vector<ProfileRecord> generate_profiles(const ProviderParams& params,
                                             const AuxParams& aux, std::uint64_t seed);

std::vector<ProfileRecord> generate_all_profiles(const std::vector<ProviderParams>& params,
                                                 const AuxParams& aux, std::uint64_t seed);

// The default 2600-row labeled dataset: all sources, shuffled, features
// extracted.
Dataset generate_dataset(std::uint64_t seed);

}  // namespace ctkit
