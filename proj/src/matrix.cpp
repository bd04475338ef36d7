#include "ctkit/matrix.hpp"

#include <string>

#include "ctkit/errors.hpp"
#include "ctkit/records.hpp"

namespace ctkit {

const char* label_name(Label l) { return l == Label::CT ? "CT" : "Real"; }

std::optional<Label> parse_label(std::string_view s) {
  if (s == "CT") return Label::CT;
  if (s == "Real") return Label::Real;
  return std::nullopt;
}

const std::vector<std::string>& canonical_feature_names() {
  static const std::vector<std::string> names = {
      "n_followers",
      "n_following",
      "n_videos",
      "n_posts",
      "n_chars_username",
      "n_digits_username",
      "n_chars_fullname",
      "n_nonalpha_fullname",
      "n_chars_biography",
      "n_hashtags_mentions_biography",
      "is_private",
      "is_verified",
      "has_clips",
      "is_business",
      "has_external_url",
      "has_category_name",
      "has_multiple_categories",
  };
  return names;
}

void FeatureMatrix::validate() const {
  const std::size_t d = feature_names.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) {
      throw DataError("matrix row " + std::to_string(i) + " has " +
                      std::to_string(rows[i].size()) + " entries, expected " +
                      std::to_string(d));
    }
  }
  if (labels && labels->size() != rows.size()) {
    throw DataError("matrix labels length " + std::to_string(labels->size()) +
                    " does not match row count " + std::to_string(rows.size()));
  }
  if (row_ids.size() != rows.size()) {
    throw DataError("matrix row_ids length " + std::to_string(row_ids.size()) +
                    " does not match row count " + std::to_string(rows.size()));
  }
}

FeatureMatrix take_rows(const FeatureMatrix& m, const std::vector<std::size_t>& idx) {
  FeatureMatrix out;
  out.feature_names = m.feature_names;
  out.rows.reserve(idx.size());
  out.row_ids.reserve(idx.size());
  std::vector<int> labels;
  for (auto i : idx) {
    out.rows.push_back(m.rows[i]);
    out.row_ids.push_back(m.row_ids[i]);
    if (m.labels) labels.push_back((*m.labels)[i]);
  }
  if (m.labels) out.labels = std::move(labels);
  return out;
}

Dataset Dataset::from_matrix(FeatureMatrix m) {
  m.validate();
  if (!m.labels) throw DataError("dataset requires labels");
  Dataset d;
  d.matrix = std::move(m);
  for (int y : *d.matrix.labels) ++d.class_counts[y];
  return d;
}

}  // namespace ctkit
