#include "ctkit/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctkit/errors.hpp"
#include "ctkit/rng.hpp"
#include "ctkit/text.hpp"

namespace ctkit {

std::array<double, kFeatureCount> extract_features(const ProfileRecord& p) {
  const auto username = text::decode_utf8(p.username);
  const auto fullname = text::decode_utf8(p.fullname);

  std::size_t digits = 0;
  for (auto cp : username) {
    if (text::is_ascii_digit(cp)) ++digits;
  }

  std::size_t nonalpha = 0;
  for (auto cp : fullname) {
    if (!text::is_letter(cp) && !text::is_space(cp)) ++nonalpha;
  }

  std::size_t tags = 0;
  for (const auto& tok : text::whitespace_tokens(p.biography)) {
    if (tok.front() == '#' || tok.front() == '@') ++tags;
  }

  return {
      static_cast<double>(p.followers),
      static_cast<double>(p.following),
      static_cast<double>(p.videos),
      static_cast<double>(p.posts),
      static_cast<double>(username.size()),
      static_cast<double>(digits),
      static_cast<double>(fullname.size()),
      static_cast<double>(nonalpha),
      static_cast<double>(text::scalar_count(p.biography)),
      static_cast<double>(tags),
      p.is_private ? 1.0 : 0.0,
      p.is_verified ? 1.0 : 0.0,
      p.has_clips ? 1.0 : 0.0,
      p.is_business ? 1.0 : 0.0,
      p.external_url.has_value() ? 1.0 : 0.0,
      p.has_category_name ? 1.0 : 0.0,
      p.has_multiple_categories ? 1.0 : 0.0,
  };
}

FeatureMatrix extract_matrix(const std::vector<ProfileRecord>& profiles) {
  FeatureMatrix m;
  m.feature_names = canonical_feature_names();
  m.rows.reserve(profiles.size());
  m.row_ids.reserve(profiles.size());
  bool all_labeled = !profiles.empty();
  std::vector<int> labels;
  labels.reserve(profiles.size());
  for (const auto& p : profiles) {
    const auto f = extract_features(p);
    m.rows.emplace_back(f.begin(), f.end());
    m.row_ids.push_back(p.user_id);
    if (p.label) {
      labels.push_back(label_value(*p.label));
    } else {
      all_labeled = false;
    }
  }
  if (all_labeled) m.labels = std::move(labels);
  return m;
}

namespace {

struct ColumnMoments {
  double mean;
  double m2;  // sum of squared deviations
};

ColumnMoments column_moments(const FeatureMatrix& m, std::size_t col) {
  double mean = 0.0;
  for (const auto& row : m.rows) mean += row[col];
  mean /= static_cast<double>(m.n_rows());
  double m2 = 0.0;
  for (const auto& row : m.rows) {
    const double d = row[col] - mean;
    m2 += d * d;
  }
  return {mean, m2};
}

}  // namespace

VarianceFilterResult variance_filter(const FeatureMatrix& m, double min_variance) {
  if (m.n_rows() == 0) throw DataError("variance_filter: empty matrix");
  const std::size_t n = m.n_rows();
  std::vector<std::size_t> keep;
  VarianceFilterResult result;
  for (std::size_t c = 0; c < m.n_features(); ++c) {
    const double var = n > 1 ? column_moments(m, c).m2 / static_cast<double>(n - 1) : 0.0;
    // Exactly constant columns go even when the threshold is zero.
    if (var < min_variance || var == 0.0) {
      result.removed.push_back(m.feature_names[c]);
    } else {
      keep.push_back(c);
    }
  }
  if (keep.empty()) throw DataError("degenerate dataset: all feature columns removed");
  result.matrix.feature_names.reserve(keep.size());
  for (auto c : keep) result.matrix.feature_names.push_back(m.feature_names[c]);
  result.matrix.rows.reserve(n);
  for (const auto& row : m.rows) {
    std::vector<double> out;
    out.reserve(keep.size());
    for (auto c : keep) out.push_back(row[c]);
    result.matrix.rows.push_back(std::move(out));
  }
  result.matrix.labels = m.labels;
  result.matrix.row_ids = m.row_ids;
  return result;
}

Scaler fit_scaler(const FeatureMatrix& m) {
  if (m.n_rows() == 0) throw DataError("fit_scaler: empty matrix");
  Scaler s;
  s.means.reserve(m.n_features());
  s.stds.reserve(m.n_features());
  for (std::size_t c = 0; c < m.n_features(); ++c) {
    const auto mom = column_moments(m, c);
    s.means.push_back(mom.mean);
    const double std_dev = std::sqrt(mom.m2 / static_cast<double>(m.n_rows()));
    s.stds.push_back(std_dev > Scaler::kStdFloor ? std_dev : Scaler::kStdFloor);
  }
  return s;
}

std::vector<double> scale_row(const Scaler& s, const std::vector<double>& row) {
  if (row.size() != s.means.size()) {
    throw DataError("scale_row: arity mismatch");
  }
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) {
    out[c] = (row[c] - s.means[c]) / s.stds[c];
  }
  return out;
}

FeatureMatrix apply_scaler(const Scaler& s, const FeatureMatrix& m) {
  FeatureMatrix out = m;
  for (auto& row : out.rows) row = scale_row(s, row);
  return out;
}

namespace {

// Indices of each class, in original row order.
std::map<int, std::vector<std::size_t>> indices_by_class(const Dataset& dataset) {
  std::map<int, std::vector<std::size_t>> by_class;
  const auto& labels = *dataset.matrix.labels;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  return by_class;
}

}  // namespace

TrainTestSplit stratified_split(const Dataset& dataset, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw ConfigError("stratified_split: test_fraction must be in (0,1)");
  }
  if (!dataset.matrix.labels) throw DataError("stratified_split: unlabeled dataset");
  auto by_class = indices_by_class(dataset);

  // Largest-remainder apportionment: the overall test size is the rounded
  // total, each class stays within one of its exact proportion.
  const auto total_test = static_cast<std::size_t>(std::llround(
      static_cast<double>(dataset.n_rows()) * spec.test_fraction));
  std::vector<int> classes;
  std::map<int, std::size_t> test_counts;
  std::size_t assigned = 0;
  std::vector<std::pair<double, int>> remainders;
  for (auto& [cls, idx] : by_class) {
    if (idx.size() < 2) {
      throw DataError("stratified_split: class " + std::to_string(cls) +
                      " has fewer than 2 members");
    }
    classes.push_back(cls);
    const double exact = static_cast<double>(idx.size()) * spec.test_fraction;
    const auto base = static_cast<std::size_t>(exact);
    test_counts[cls] = base;
    assigned += base;
    remainders.emplace_back(-(exact - static_cast<double>(base)), cls);
  }
  std::sort(remainders.begin(), remainders.end());
  for (std::size_t i = 0; i < remainders.size() && assigned < total_test; ++i) {
    ++test_counts[remainders[i].second];
    ++assigned;
  }

  std::vector<std::size_t> test_idx;
  std::vector<std::size_t> train_idx;
  for (auto& [cls, idx] : by_class) {
    Rng rng(Rng::derive(spec.seed, 0x5117u + static_cast<std::uint64_t>(cls)));
    rng.shuffle(idx);
    const std::size_t n_test = test_counts[cls];
    for (std::size_t i = 0; i < idx.size(); ++i) {
      (i < n_test ? test_idx : train_idx).push_back(idx[i]);
    }
  }
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  return {Dataset::from_matrix(take_rows(dataset.matrix, train_idx)),
          Dataset::from_matrix(take_rows(dataset.matrix, test_idx))};
}

}  // namespace ctkit
