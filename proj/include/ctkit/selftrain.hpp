#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctkit/learners.hpp"
#include "ctkit/matrix.hpp"

namespace ctkit {

struct SelfTrainConfig {
  ClassifierSpec base;
  // Strict comparison: a sample is adopted only when its confidence
  // (max class probability) exceeds the threshold.
  double confidence_threshold = 0.75;
  int max_cycles = 10;
  double labeled_fraction = 1.0;
  std::uint64_t seed = 0;
  // A cycle that adopts nothing would repeat with identical results until
  // the cycle budget runs out; stop early by default. Turning this off
  // keeps only the pool-exhausted / cycle-budget stop conditions.
  bool early_stop_on_no_additions = true;

  void validate() const;  // throws ConfigError
};

enum class Termination { ExhaustedUnlabeled, MaxCycles, NoAdditions };

const char* termination_name(Termination t);

struct CycleStats {
  std::size_t added = 0;
  std::size_t remaining_unlabeled = 0;
  double mean_confidence_added = 0.0;  // 0 when nothing was added
};

struct SelfTrainReport {
  int cycles_run = 0;
  std::vector<CycleStats> cycles;
  Termination termination = Termination::ExhaustedUnlabeled;
  std::size_t final_training_size = 0;
};

struct MaskedSplit {
  Dataset labeled;
  FeatureMatrix unlabeled;       // labels stripped
  std::vector<int> hidden_labels;  // truth for the unlabeled rows; evaluation only
};

// Stratified selection of ceil(rho * class_count) labeled rows per class;
// everything else is stripped of its label.
MaskedSplit mask_labels(const Dataset& dataset, double rho, std::uint64_t seed);

struct SelfTrainResult {
  Model model;
  SelfTrainReport report;
};

// Train / pseudo-label / enlarge loop. Pseudo-labels are permanent once
// assigned; the returned model is the classifier fitted at the start of the
// final cycle. The scaler is refitted each cycle on training plus remaining
// unlabeled rows.
SelfTrainResult self_train(const Dataset& labeled, const FeatureMatrix& unlabeled,
                           const SelfTrainConfig& cfg);

}  // namespace ctkit
