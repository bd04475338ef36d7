#include "ctkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ctkit/errors.hpp"
#include "ctkit/rng.hpp"

namespace ctkit {

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& truth) {
  if (preds.size() != truth.size()) {
    throw DataError("confusion: prediction/truth length mismatch");
  }
  if (preds.empty()) throw DataError("confusion: empty inputs");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (truth[i] == 1) {
      preds[i] == 1 ? ++cm.tp : ++cm.fn;
    } else {
      preds[i] == 1 ? ++cm.fp : ++cm.tn;
    }
  }
  return cm;
}

namespace {

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassMetrics m;
  if (tp + fp == 0) {
    m.precision = 0.0;
    m.zero_division = true;
  } else {
    m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (tp + fn == 0) {
    m.recall = 0.0;
    m.zero_division = true;
  } else {
    m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  if (m.precision + m.recall == 0.0) {
    m.f1 = 0.0;
  } else {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

}  // namespace

MetricSet metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DataError("metrics: empty confusion matrix");
  MetricSet out;
  out.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  out.positive = class_metrics(cm.tp, cm.fp, cm.fn);
  // For the negative class the roles swap: true negatives are its hits.
  out.negative = class_metrics(cm.tn, cm.fn, cm.fp);
  out.macro_precision = 0.5 * (out.positive.precision + out.negative.precision);
  out.macro_recall = 0.5 * (out.positive.recall + out.negative.recall);
  out.macro_f1 = 0.5 * (out.positive.f1 + out.negative.f1);
  return out;
}

std::vector<std::vector<std::size_t>> stratified_kfold(const Dataset& dataset, int k,
                                                       std::uint64_t seed) {
  if (k < 2) throw ConfigError("stratified_kfold: k must be >= 2");
  if (!dataset.matrix.labels) throw DataError("stratified_kfold: unlabeled dataset");
  const auto& labels = *dataset.matrix.labels;

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  for (auto& [cls, idx] : by_class) {
    if (idx.size() < static_cast<std::size_t>(k)) {
      throw DataError("stratified_kfold: class " + std::to_string(cls) +
                      " has fewer members than folds");
    }
    Rng rng(Rng::derive(seed, 0xF01Du + static_cast<std::uint64_t>(cls)));
    rng.shuffle(idx);
    // Deal round-robin: per-class fold sizes differ by at most one.
    for (std::size_t i = 0; i < idx.size(); ++i) {
      folds[i % static_cast<std::size_t>(k)].push_back(idx[i]);
    }
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
  double m2 = 0.0;
  for (double v : values) {
    const double d = v - out.mean;
    m2 += d * d;
  }
  out.std = std::sqrt(m2 / static_cast<double>(values.size()));
  return out;
}

CVReport cross_validate(const SelfTrainConfig& cfg, const Dataset& dataset, int k) {
  cfg.validate();
  const auto folds = stratified_kfold(dataset, k, Rng::derive(cfg.seed, 0xCF01Du));

  CVReport report;
  report.spec = cfg.base;
  report.labeled_fraction = cfg.labeled_fraction;
  report.k = k;

  const std::size_t n = dataset.n_rows();
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<char> in_validation(n, 0);
    for (auto i : folds[f]) in_validation[i] = 1;
    std::vector<std::size_t> train_idx;
    train_idx.reserve(n - folds[f].size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_validation[i]) train_idx.push_back(i);
    }

    const Dataset fold_train = Dataset::from_matrix(take_rows(dataset.matrix, train_idx));
    const FeatureMatrix fold_valid = take_rows(dataset.matrix, folds[f]);

    auto masked = mask_labels(fold_train, cfg.labeled_fraction,
                              Rng::derive(cfg.seed, 0x3000u + f));
    SelfTrainConfig run_cfg = cfg;
    run_cfg.seed = Rng::derive(cfg.seed, 0x4000u + f);
    auto result = self_train(masked.labeled, masked.unlabeled, run_cfg);

    FoldMetrics fm;
    fm.selftrain = std::move(result.report);
    fm.validation_size = fold_valid.n_rows();
    fm.train_labeled = metrics(confusion(predict_batch(result.model, masked.labeled.matrix),
                                         *masked.labeled.matrix.labels));
    fm.train_all = metrics(confusion(predict_batch(result.model, fold_train.matrix),
                                     *fold_train.matrix.labels));
    fm.validation =
        metrics(confusion(predict_batch(result.model, fold_valid), *fold_valid.labels));
    report.folds.push_back(std::move(fm));
  }
  return report;
}

std::vector<ClassifierSpec> Grids::expand() const {
  std::vector<ClassifierSpec> specs;
  for (const auto& p : knn) {
    ClassifierSpec s;
    s.kind = ModelKind::KNN;
    s.knn = p;
    specs.push_back(s);
  }
  for (const auto& p : lr) {
    ClassifierSpec s;
    s.kind = ModelKind::LR;
    s.lr = p;
    specs.push_back(s);
  }
  for (const auto& p : dt) {
    ClassifierSpec s;
    s.kind = ModelKind::DT;
    s.dt = p;
    specs.push_back(s);
  }
  for (const auto& p : rf) {
    ClassifierSpec s;
    s.kind = ModelKind::RF;
    s.rf = p;
    specs.push_back(s);
  }
  return specs;
}

Grids default_grids() {
  Grids g;
  for (int k : {1, 3, 5, 10}) g.knn.push_back({k});
  for (Penalty p : {Penalty::None, Penalty::L1, Penalty::L2}) {
    for (double c : {10.0, 1.0, 0.1}) {
      LrParams lr;
      lr.penalty = p;
      lr.c = c;
      g.lr.push_back(lr);
    }
  }
  for (int depth : {kUnboundedDepth, 3, 5, 10}) {
    for (int leaf : {1, 3, 5, 10}) {
      g.dt.push_back({depth, leaf});
    }
  }
  for (int depth : {kUnboundedDepth, 3, 5, 10}) {
    for (int leaf : {1, 3, 5, 10}) {
      for (int trees : {10, 100}) {
        ForestParams rf;
        rf.tree = {depth, leaf};
        rf.n_estimators = trees;
        g.rf.push_back(rf);
      }
    }
  }
  return g;
}

GridSearchResult grid_search(const Grids& grids, const Dataset& dataset,
                             const std::vector<double>& fractions, int k,
                             std::uint64_t seed) {
  const auto specs = grids.expand();
  if (specs.empty()) throw ConfigError("grid_search: empty grid");
  if (fractions.empty()) throw ConfigError("grid_search: empty fraction list");

  GridSearchResult result;
  for (const auto& fold :
       stratified_kfold(dataset, k, Rng::derive(seed, 0xCF01Du))) {
    result.fold_validation_sizes.push_back(fold.size());
  }

  std::size_t cell_index = 0;
  for (const auto& spec : specs) {
    for (double fraction : fractions) {
      SelfTrainConfig cfg;
      cfg.base = spec;
      cfg.labeled_fraction = fraction;
      cfg.seed = seed;  // same seed everywhere: identical folds and masks per cell
      GridCell cell;
      cell.cell_index = cell_index++;
      cell.spec = spec;
      cell.fraction = fraction;
      cell.report = cross_validate(cfg, dataset, k);
      cell.train_labeled_accuracy =
          fold_stat(cell.report, [](const FoldMetrics& m) { return m.train_labeled.accuracy; });
      cell.train_all_accuracy =
          fold_stat(cell.report, [](const FoldMetrics& m) { return m.train_all.accuracy; });
      cell.valid_accuracy =
          fold_stat(cell.report, [](const FoldMetrics& m) { return m.validation.accuracy; });
      cell.valid_macro_precision = fold_stat(
          cell.report, [](const FoldMetrics& m) { return m.validation.macro_precision; });
      cell.valid_macro_recall = fold_stat(
          cell.report, [](const FoldMetrics& m) { return m.validation.macro_recall; });
      cell.valid_macro_f1 =
          fold_stat(cell.report, [](const FoldMetrics& m) { return m.validation.macro_f1; });
      result.cells.push_back(std::move(cell));
    }
  }

  std::sort(result.cells.begin(), result.cells.end(), [](const GridCell& a, const GridCell& b) {
    if (a.valid_macro_f1.mean != b.valid_macro_f1.mean) {
      return a.valid_macro_f1.mean > b.valid_macro_f1.mean;
    }
    if (a.valid_accuracy.mean != b.valid_accuracy.mean) {
      return a.valid_accuracy.mean > b.valid_accuracy.mean;
    }
    return a.cell_index < b.cell_index;
  });
  result.best_spec = result.cells.front().spec;
  result.best_fraction = result.cells.front().fraction;
  return result;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * beta_cf(a, b, x) / a;
  }
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

TTestResult welch_ttest(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) {
    throw DataError("welch_ttest: both samples need at least 2 values");
  }
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / na;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / nb;
  double var_a = 0.0;
  for (double v : a) var_a += (v - mean_a) * (v - mean_a);
  var_a /= na - 1.0;
  double var_b = 0.0;
  for (double v : b) var_b += (v - mean_b) * (v - mean_b);
  var_b /= nb - 1.0;

  TTestResult out;
  const double ra = var_a / na;
  const double rb = var_b / nb;
  if (ra + rb == 0.0) {
    // No variance anywhere: identical means are indistinguishable (p = 1),
    // different means are trivially separated.
    if (mean_a == mean_b) {
      out.t = 0.0;
      out.df = na + nb - 2.0;
      out.p = 1.0;
    } else {
      out.t = mean_a > mean_b ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
      out.df = na + nb - 2.0;
      out.p = 0.0;
    }
    return out;
  }
  out.t = (mean_a - mean_b) / std::sqrt(ra + rb);
  out.df = (ra + rb) * (ra + rb) /
           (ra * ra / (na - 1.0) + rb * rb / (nb - 1.0));
  out.p = reg_inc_beta(0.5 * out.df, 0.5, out.df / (out.df + out.t * out.t));
  return out;
}

}  // namespace ctkit
