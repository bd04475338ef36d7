#pragma once

#include <cstdint>
#include <vector>

#include "ctkit/learners.hpp"
#include "ctkit/matrix.hpp"
#include "ctkit/selftrain.hpp"

namespace ctkit {

// Positive class is CT = 1.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
};

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& truth);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool zero_division = false;  // some denominator was empty and defaulted to 0
};

struct MetricSet {
  double accuracy = 0.0;
  ClassMetrics positive;  // CT
  ClassMetrics negative;  // Real
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

MetricSet metrics(const ConfusionMatrix& cm);

// k index folds partitioning the dataset; per-fold class counts are within
// one of exact proportionality. Deterministic given the seed.
std::vector<std::vector<std::size_t>> stratified_kfold(const Dataset& dataset, int k,
                                                       std::uint64_t seed);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population (n) denominator
};

MeanStd mean_std(const std::vector<double>& values);

struct FoldMetrics {
  // "train_labeled" scores the visible (masked-in) labeled seed;
  // "train_all" scores the whole fold-training portion against true labels,
  // pseudo-labeled rows included.
  MetricSet train_labeled;
  MetricSet train_all;
  MetricSet validation;
  std::size_t validation_size = 0;
  SelfTrainReport selftrain;
};

struct CVReport {
  ClassifierSpec spec;
  double labeled_fraction = 1.0;
  int k = 5;
  std::vector<FoldMetrics> folds;
};

template <typename F>
MeanStd fold_stat(const CVReport& report, F&& accessor) {
  std::vector<double> v;
  v.reserve(report.folds.size());
  for (const auto& fold : report.folds) v.push_back(accessor(fold));
  return mean_std(v);
}

// Per fold: mask labels inside the fold-training portion at
// cfg.labeled_fraction, self-train, and score the held-out fold with true
// labels. Masking never touches validation rows.
CVReport cross_validate(const SelfTrainConfig& cfg, const Dataset& dataset, int k);

struct Grids {
  std::vector<KnnParams> knn;
  std::vector<LrParams> lr;
  std::vector<TreeParams> dt;
  std::vector<ForestParams> rf;

  // Flat enumeration in canonical order: KNN combos, LR, DT, RF.
  std::vector<ClassifierSpec> expand() const;
};

// KNN n_neighbors {1,3,5,10}; LR penalty {none,l1,l2} x C {10,1,0.1};
// DT depth {none,3,5,10} x leaf {1,3,5,10}; RF adds trees {10,100}.
Grids default_grids();

struct GridCell {
  std::size_t cell_index = 0;  // canonical (kind, combo, fraction) order
  ClassifierSpec spec;
  double fraction = 1.0;  // 1.0 = supervised
  CVReport report;
  MeanStd train_labeled_accuracy;
  MeanStd train_all_accuracy;
  MeanStd valid_accuracy;
  MeanStd valid_macro_precision;
  MeanStd valid_macro_recall;
  MeanStd valid_macro_f1;
};

struct GridSearchResult {
  std::vector<GridCell> cells;  // ranked: valid F1 desc, accuracy desc, canonical order
  std::vector<std::size_t> fold_validation_sizes;
  ClassifierSpec best_spec;
  double best_fraction = 1.0;
};

GridSearchResult grid_search(const Grids& grids, const Dataset& dataset,
                             const std::vector<double>& fractions, int k,
                             std::uint64_t seed);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

// Welch's unpaired t-test with Welch-Satterthwaite degrees of freedom;
// the p-value comes from the regularized incomplete beta function.
TTestResult welch_ttest(const std::vector<double>& a, const std::vector<double>& b);

// Regularized incomplete beta I_x(a, b); exposed for the statistics path.
double reg_inc_beta(double a, double b, double x);

}  // namespace ctkit
