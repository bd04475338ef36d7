#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ctkit {

// Subcommand entry points used by the CLI binary and exercised directly by
// tests. Each run writes a manifest.json (options + tool version + input and
// output digests) next to its artifacts; all writes are temp-then-rename.

struct SynthOptions {
  std::filesystem::path out_dir;
  std::uint64_t seed = 42;
  std::optional<std::filesystem::path> params_path;
};

struct TrainOptions {
  std::filesystem::path data;  // profiles .jsonl or matrix .csv
  std::filesystem::path out_dir;
  std::string model_kind = "lr";
  double labeled_fraction = 0.01;
  double threshold = 0.75;
  int max_cycles = 10;
  double test_fraction = 0.2;
  double min_variance = 1e-8;
  std::uint64_t seed = 42;
  bool no_early_stop = false;
  // Hyperparameters (protocol defaults per kind).
  std::string penalty = "l2";
  double c = 1.0;
  int n_neighbors = 5;
  int max_depth = -1;
  int min_samples_leaf = 1;
  int n_estimators = 100;
};

struct EvalOptions {
  std::filesystem::path data;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> grids_path;
  std::vector<double> fractions = {0.01, 0.03, 0.05, 0.07, 0.09, 1.0};
  int k = 5;
  double threshold = 0.75;
  int max_cycles = 10;
  double test_fraction = 0.2;
  double min_variance = 1e-8;
  std::uint64_t seed = 42;
};

struct PredictOptions {
  std::filesystem::path model;
  std::filesystem::path profiles;
  std::filesystem::path out;  // CSV path
};

struct AnalyzeOptions {
  std::filesystem::path profiles;
  std::optional<std::filesystem::path> comments;
  std::optional<std::filesystem::path> predictions;
  std::optional<std::filesystem::path> watchlist;
  std::optional<std::filesystem::path> domain_map;
  std::optional<std::filesystem::path> reputation_stub;
  std::filesystem::path out_dir;
};

int cmd_synth(const SynthOptions& opt, std::ostream& log);
int cmd_train(const TrainOptions& opt, std::ostream& log);
int cmd_eval(const EvalOptions& opt, std::ostream& log);
int cmd_predict(const PredictOptions& opt, std::ostream& log);
int cmd_analyze(const AnalyzeOptions& opt, std::ostream& log);

}  // namespace ctkit
