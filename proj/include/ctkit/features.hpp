#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ctkit/matrix.hpp"
#include "ctkit/records.hpp"

namespace ctkit {

// Column-wise z-score statistics. Population (n) variance; zero stds are
// floored so constant columns scale to all zeros.
struct Scaler {
  static constexpr double kStdFloor = 1e-9;
  std::vector<double> means;
  std::vector<double> stds;
};

// Feature vector in canonical_feature_names() order. Character counts are
// Unicode scalar counts; digits are [0-9]; fullname non-alpha excludes
// spaces; hashtag/mention count is over whitespace tokens starting with
// '#' or '@'. Booleans map to {0,1}.
std::array<double, kFeatureCount> extract_features(const ProfileRecord& p);

// Batch extraction; carries labels when every record has one.
FeatureMatrix extract_matrix(const std::vector<ProfileRecord>& profiles);

struct VarianceFilterResult {
  FeatureMatrix matrix;
  std::vector<std::string> removed;
};

// Drops columns whose sample (n-1) variance is below min_variance.
// Throws DataError("degenerate dataset") when nothing survives.
VarianceFilterResult variance_filter(const FeatureMatrix& m, double min_variance = 1e-8);

Scaler fit_scaler(const FeatureMatrix& m);
std::vector<double> scale_row(const Scaler& s, const std::vector<double>& row);
FeatureMatrix apply_scaler(const Scaler& s, const FeatureMatrix& m);

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

// Per-class test counts are round(class_count * test_fraction); original row
// order is preserved within each part. Deterministic given the seed.
TrainTestSplit stratified_split(const Dataset& dataset, const SplitSpec& spec);

}  // namespace ctkit
