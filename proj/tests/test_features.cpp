#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ctkit/errors.hpp"
#include "ctkit/features.hpp"
#include "ctkit/rng.hpp"
#include "ctkit/synth.hpp"

using namespace ctkit;

namespace {

ProfileRecord base_profile() {
  ProfileRecord p;
  p.user_id = "u1";
  p.username = "abc123";
  p.fullname = "John Smith";
  return p;
}

}  // namespace

TEST_CASE("extract_features: hand-countable example") {
  const auto f = extract_features(base_profile());
  const std::array<double, kFeatureCount> want{0, 0, 0, 0, 6, 3, 10, 0, 0,
                                               0, 0, 0, 0, 0, 0, 0, 0};
  CHECK(f == want);
}

TEST_CASE("extract_features: hashtags and mentions are token-initial") {
  auto p = base_profile();
  p.biography = "see #promo and @friend now";
  CHECK(extract_features(p)[9] == 2.0);
  p.biography = "mid#tag no@match";
  CHECK(extract_features(p)[9] == 0.0);
  p.biography = "#a #b @c";
  CHECK(extract_features(p)[9] == 3.0);
}

TEST_CASE("extract_features: url flag and unicode counts") {
  auto p = base_profile();
  p.external_url = "https://example.com";
  CHECK(extract_features(p)[14] == 1.0);

  p.username = "abé";  // 3 scalars
  p.fullname = "A 9é!";  // letters A, e-acute; non-alpha: '9', '!'
  const auto f = extract_features(p);
  CHECK(f[4] == 3.0);
  CHECK(f[6] == 5.0);
  CHECK(f[7] == 2.0);
}

TEST_CASE("extract is pure and batch order follows input") {
  const auto profiles = generate_profiles(default_params()[0], default_aux(), 5);
  auto shuffled = profiles;
  std::reverse(shuffled.begin(), shuffled.end());
  const auto a = extract_matrix(profiles);
  const auto b = extract_matrix(shuffled);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    CHECK(a.rows[i] == b.rows[profiles.size() - 1 - i]);
  }
}

TEST_CASE("variance_filter removes constant columns") {
  FeatureMatrix m;
  m.feature_names = canonical_feature_names();
  m.labels.emplace();
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> row(kFeatureCount, 0.0);
    for (std::size_t c = 0; c < kFeatureCount; ++c) row[c] = rng.normal(0, 1);
    row[12] = 0.0;  // has_clips constant
    m.rows.push_back(row);
    m.row_ids.push_back("r" + std::to_string(i));
    m.labels->push_back(i % 2);
  }
  const auto result = variance_filter(m, 1e-8);
  REQUIRE(result.removed == std::vector<std::string>{"has_clips"});
  CHECK(result.matrix.n_features() == kFeatureCount - 1);
  CHECK(result.matrix.n_rows() == 50);
  CHECK(result.matrix.row_ids == m.row_ids);

  // min_variance 0 keeps everything except exact-constant columns.
  const auto loose = variance_filter(m, 0.0);
  CHECK(loose.removed == std::vector<std::string>{"has_clips"});

  FeatureMatrix constant;
  constant.feature_names = {"n_followers"};
  constant.rows = {{1.0}, {1.0}};
  constant.row_ids = {"a", "b"};
  CHECK_THROWS_WITH_AS(variance_filter(constant, 1e-8),
                       doctest::Contains("degenerate dataset"), DataError);
}

TEST_CASE("variance_filter keeps all 17 columns on the default dataset") {
  const auto dataset = generate_dataset(42);
  // Independent oracle: sample variance per column, computed directly.
  const std::size_t n = dataset.matrix.n_rows();
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    double mean = 0.0;
    for (const auto& row : dataset.matrix.rows) mean += row[c];
    mean /= static_cast<double>(n);
    double m2 = 0.0;
    for (const auto& row : dataset.matrix.rows) m2 += (row[c] - mean) * (row[c] - mean);
    const double var = m2 / static_cast<double>(n - 1);
    CAPTURE(dataset.matrix.feature_names[c]);
    CHECK(var >= 1e-8);
  }
  const auto filtered = variance_filter(dataset.matrix, 1e-8);
  CHECK(filtered.removed.empty());
  CHECK(filtered.matrix.n_features() == 17);
}

TEST_CASE("scaler: closed-form z-scores") {
  FeatureMatrix m;
  m.feature_names = {"n_followers"};
  m.rows = {{1.0}, {2.0}, {3.0}};
  m.row_ids = {"a", "b", "c"};
  const auto scaler = fit_scaler(m);
  const auto scaled = apply_scaler(scaler, m);
  CHECK(scaled.rows[0][0] == doctest::Approx(-1.2247448).epsilon(1e-5));
  CHECK(scaled.rows[1][0] == doctest::Approx(0.0));
  CHECK(scaled.rows[2][0] == doctest::Approx(1.2247448).epsilon(1e-5));
}

TEST_CASE("scaler: constant column maps to zeros") {
  FeatureMatrix m;
  m.feature_names = {"n_followers"};
  m.rows = {{4.0}, {4.0}, {4.0}};
  m.row_ids = {"a", "b", "c"};
  const auto scaled = apply_scaler(fit_scaler(m), m);
  for (const auto& row : scaled.rows) CHECK(row[0] == 0.0);
}

TEST_CASE("scaler: self-application gives mean 0, std 1") {
  Rng rng(9);
  FeatureMatrix m;
  m.feature_names = canonical_feature_names();
  for (int i = 0; i < 200; ++i) {
    std::vector<double> row;
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      row.push_back(rng.normal(static_cast<double>(c), 1.0 + static_cast<double>(c)));
    }
    m.rows.push_back(row);
    m.row_ids.push_back("r" + std::to_string(i));
  }
  const auto scaled = apply_scaler(fit_scaler(m), m);
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    double mean = 0.0;
    for (const auto& row : scaled.rows) mean += row[c];
    mean /= static_cast<double>(scaled.n_rows());
    double var = 0.0;
    for (const auto& row : scaled.rows) var += (row[c] - mean) * (row[c] - mean);
    var /= static_cast<double>(scaled.n_rows());
    CHECK(std::fabs(mean) < 1e-9);
    CHECK(std::fabs(std::sqrt(var) - 1.0) < 1e-9);
  }
}

TEST_CASE("scaler: test rows are scaled with training statistics") {
  FeatureMatrix train;
  train.feature_names = {"n_followers"};
  train.rows = {{0.0}, {10.0}};
  train.row_ids = {"a", "b"};
  const auto scaler = fit_scaler(train);  // mean 5, std 5
  CHECK(scale_row(scaler, {20.0})[0] == doctest::Approx(3.0));
}

namespace {

Dataset tiny_dataset(int n0, int n1) {
  FeatureMatrix m;
  m.feature_names = {"n_followers"};
  m.labels.emplace();
  for (int i = 0; i < n0 + n1; ++i) {
    m.rows.push_back({static_cast<double>(i)});
    m.row_ids.push_back("r" + std::to_string(i));
    m.labels->push_back(i < n0 ? 0 : 1);
  }
  return Dataset::from_matrix(std::move(m));
}

}  // namespace

TEST_CASE("stratified_split: default synthetic counts match the protocol") {
  const auto dataset = generate_dataset(42);
  const auto split = stratified_split(dataset, {0.2, 7});
  CHECK(split.train.n_rows() == 2080);
  CHECK(split.test.n_rows() == 520);
  CHECK(split.train.class_counts.at(1) == 1293 - 259);
  CHECK(split.test.class_counts.at(1) == 259);
  CHECK(split.test.class_counts.at(0) == 261);
}

TEST_CASE("stratified_split: half split on 10 rows") {
  const auto split = stratified_split(tiny_dataset(5, 5), {0.5, 3});
  CHECK(split.train.n_rows() == 5);
  CHECK(split.test.n_rows() == 5);
  for (const auto& [cls, count] : split.test.class_counts) {
    CHECK(count >= 2);
    CHECK(count <= 3);
  }
}

TEST_CASE("stratified_split: seed determinism") {
  const auto dataset = tiny_dataset(30, 30);
  const auto a = stratified_split(dataset, {0.25, 11});
  const auto b = stratified_split(dataset, {0.25, 11});
  CHECK(a.train.matrix.row_ids == b.train.matrix.row_ids);
  CHECK(a.test.matrix.row_ids == b.test.matrix.row_ids);
  const auto c = stratified_split(dataset, {0.25, 12});
  CHECK(c.train.matrix.row_ids != a.train.matrix.row_ids);
  CHECK(c.train.class_counts == a.train.class_counts);

  // Partition: train and test ids together cover every row exactly once.
  auto ids = a.train.matrix.row_ids;
  ids.insert(ids.end(), a.test.matrix.row_ids.begin(), a.test.matrix.row_ids.end());
  std::sort(ids.begin(), ids.end());
  auto all = dataset.matrix.row_ids;
  std::sort(all.begin(), all.end());
  CHECK(ids == all);
}

TEST_CASE("stratified_split: class with fewer than 2 members errors") {
  CHECK_THROWS_AS(stratified_split(tiny_dataset(1, 5), {0.5, 1}), DataError);
}
