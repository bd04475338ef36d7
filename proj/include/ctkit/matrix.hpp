#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ctkit {

inline constexpr std::size_t kFeatureCount = 17;

// Fixed canonical feature order; also the matrix CSV header order.
const std::vector<std::string>& canonical_feature_names();

struct FeatureMatrix {
  std::vector<std::string> feature_names;  // canonical order or a filtered subset of it
  std::vector<std::vector<double>> rows;
  std::optional<std::vector<int>> labels;  // 0 = Real, 1 = CT
  std::vector<std::string> row_ids;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_features() const { return feature_names.size(); }

  // Throws DataError when row arity, label length, or id length disagree.
  void validate() const;
};

// Row subset in the given index order; labels and ids travel along.
FeatureMatrix take_rows(const FeatureMatrix& m, const std::vector<std::size_t>& idx);

struct Dataset {
  FeatureMatrix matrix;
  std::map<int, std::size_t> class_counts;

  static Dataset from_matrix(FeatureMatrix m);  // requires labels
  std::size_t n_rows() const { return matrix.n_rows(); }
};

}  // namespace ctkit
