#include "ctkit/selftrain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctkit/errors.hpp"
#include "ctkit/rng.hpp"

namespace ctkit {

void SelfTrainConfig::validate() const {
  base.validate();
  if (!(confidence_threshold > 0.0 && confidence_threshold <= 1.0)) {
    throw ConfigError("self-train: confidence threshold must be in (0,1]");
  }
  if (max_cycles < 1) throw ConfigError("self-train: max_cycles must be >= 1");
  if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) {
    throw ConfigError("self-train: labeled_fraction must be in (0,1]");
  }
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::ExhaustedUnlabeled: return "exhausted_unlabeled";
    case Termination::MaxCycles: return "max_cycles";
    case Termination::NoAdditions: return "no_additions";
  }
  return "?";
}

MaskedSplit mask_labels(const Dataset& dataset, double rho, std::uint64_t seed) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("mask_labels: rho must be in (0,1]");
  if (!dataset.matrix.labels) throw DataError("mask_labels: unlabeled dataset");
  const auto& labels = *dataset.matrix.labels;

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  std::vector<std::size_t> keep;
  for (auto& [cls, idx] : by_class) {
    const auto want = static_cast<std::size_t>(
        std::ceil(rho * static_cast<double>(idx.size())));
    if (want < 1 || want > idx.size()) {
      throw DataError("mask_labels: class " + std::to_string(cls) +
                      " has too few samples for the requested fraction");
    }
    Rng rng(Rng::derive(seed, 0x3A5Cu + static_cast<std::uint64_t>(cls)));
    rng.shuffle(idx);
    keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(want));
  }
  std::sort(keep.begin(), keep.end());

  std::vector<bool> is_labeled(labels.size(), false);
  for (auto i : keep) is_labeled[i] = true;

  MaskedSplit out;
  FeatureMatrix labeled_m;
  labeled_m.feature_names = dataset.matrix.feature_names;
  labeled_m.labels.emplace();
  out.unlabeled.feature_names = dataset.matrix.feature_names;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (is_labeled[i]) {
      labeled_m.rows.push_back(dataset.matrix.rows[i]);
      labeled_m.row_ids.push_back(dataset.matrix.row_ids[i]);
      labeled_m.labels->push_back(labels[i]);
    } else {
      out.unlabeled.rows.push_back(dataset.matrix.rows[i]);
      out.unlabeled.row_ids.push_back(dataset.matrix.row_ids[i]);
      out.hidden_labels.push_back(labels[i]);
    }
  }
  out.labeled = Dataset::from_matrix(std::move(labeled_m));
  return out;
}

namespace {

bool needs_scaler(ModelKind kind) {
  return kind == ModelKind::LR || kind == ModelKind::KNN;
}

}  // namespace

SelfTrainResult self_train(const Dataset& labeled, const FeatureMatrix& unlabeled,
                           const SelfTrainConfig& cfg) {
  cfg.validate();
  labeled.matrix.validate();
  unlabeled.validate();
  if (unlabeled.labels) throw DataError("self_train: unlabeled matrix carries labels");
  if (!unlabeled.rows.empty() &&
      unlabeled.n_features() != labeled.matrix.n_features()) {
    throw DataError("self_train: labeled/unlabeled feature arity mismatch");
  }
  if (labeled.class_counts.size() < 2) {
    throw TrainError("self_train: labeled seed must contain both classes");
  }

  FeatureMatrix train = labeled.matrix;
  std::vector<char> alive(unlabeled.n_rows(), 1);
  std::size_t n_alive = unlabeled.n_rows();

  SelfTrainResult result;
  SelfTrainReport& report = result.report;

  for (int cycle = 1;; ++cycle) {
    report.cycles_run = cycle;

    std::optional<Scaler> scaler;
    if (needs_scaler(cfg.base.kind)) {
      // Scaling statistics use every row visible to the engine: the current
      // training set plus whatever is still unlabeled.
      FeatureMatrix pool;
      pool.feature_names = train.feature_names;
      pool.rows = train.rows;
      pool.row_ids = train.row_ids;
      for (std::size_t i = 0; i < alive.size(); ++i) {
        if (alive[i]) {
          pool.rows.push_back(unlabeled.rows[i]);
          pool.row_ids.push_back(unlabeled.row_ids[i]);
        }
      }
      scaler = fit_scaler(pool);
    }

    const std::uint64_t fit_seed =
        cycle == 1 ? cfg.seed : Rng::derive(cfg.seed, static_cast<std::uint64_t>(cycle));
    result.model = fit_with_scaler(cfg.base, train, fit_seed, scaler);

    if (n_alive == 0) {
      report.cycles.push_back({0, 0, 0.0});
      report.termination = Termination::ExhaustedUnlabeled;
      break;
    }

    std::size_t added = 0;
    double confidence_sum = 0.0;
    for (std::size_t i = 0; i < alive.size(); ++i) {
      if (!alive[i]) continue;
      const auto p = predict_proba(result.model, unlabeled.rows[i]);
      const double confidence = std::max(p.p0, p.p1);
      if (confidence > cfg.confidence_threshold) {
        train.rows.push_back(unlabeled.rows[i]);
        train.row_ids.push_back(unlabeled.row_ids[i]);
        train.labels->push_back(p.p1 > p.p0 ? 1 : 0);
        alive[i] = 0;
        --n_alive;
        ++added;
        confidence_sum += confidence;
      }
    }
    report.cycles.push_back(
        {added, n_alive, added > 0 ? confidence_sum / static_cast<double>(added) : 0.0});

    if (n_alive == 0) {
      report.termination = Termination::ExhaustedUnlabeled;
      break;
    }
    if (added == 0 && cfg.early_stop_on_no_additions) {
      report.termination = Termination::NoAdditions;
      break;
    }
    if (cycle == cfg.max_cycles) {
      report.termination = Termination::MaxCycles;
      break;
    }
  }

  report.final_training_size = train.n_rows();
  return result;
}

}  // namespace ctkit
