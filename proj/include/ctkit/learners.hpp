#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctkit/features.hpp"
#include "ctkit/matrix.hpp"

namespace ctkit {

enum class ModelKind { KNN, LR, DT, RF };

const char* kind_name(ModelKind k);
std::optional<ModelKind> parse_kind(std::string_view s);

enum class Penalty { None, L1, L2 };

const char* penalty_name(Penalty p);
std::optional<Penalty> parse_penalty(std::string_view s);

inline constexpr int kUnboundedDepth = -1;

struct KnnParams {
  int n_neighbors = 5;
};

// Full-batch gradient descent on the penalized mean logistic loss:
//   f(w, b) = mean_i logloss_i + (1 / (C * n)) * R(w)
// with R = ||w||^2 / 2 for l2 and ||w||_1 for l1 (intercept unpenalized).
// l1 uses a proximal soft-threshold step.
struct LrParams {
  Penalty penalty = Penalty::L2;
  double c = 1.0;
  int max_epochs = 2000;
  double learning_rate = 0.1;
  double tolerance = 1e-6;
};

struct TreeParams {
  int max_depth = kUnboundedDepth;
  int min_samples_leaf = 1;
};

struct ForestParams {
  TreeParams tree;
  int n_estimators = 100;
  // Test hook: with bootstrap off every tree trains on the full sample.
  bool bootstrap = true;
  // Candidate features per split; 0 means ceil(sqrt(d)).
  int max_features = 0;
};

struct ClassifierSpec {
  ModelKind kind = ModelKind::LR;
  KnnParams knn;
  LrParams lr;
  TreeParams dt;
  ForestParams rf;

  void validate() const;  // throws ConfigError
  // Compact description such as "lr(penalty=l2,C=1)" for report tables.
  std::string summary() const;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double p1 = 0.0;  // class-1 fraction at this node; leaf probability
  std::uint32_t n_samples = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int depth() const;
};

struct Model {
  ClassifierSpec spec;
  std::vector<std::string> feature_names;
  std::optional<Scaler> scaler;  // present for LR and KNN

  // LR
  std::vector<double> lr_weights;
  double lr_intercept = 0.0;
  bool lr_converged = false;
  int lr_epochs_run = 0;
  std::vector<double> lr_loss_trace;  // diagnostic only, not serialized

  // KNN: standardized training rows
  std::vector<std::vector<double>> knn_rows;
  std::vector<int> knn_labels;

  // DT
  DecisionTree tree;

  // RF
  std::vector<DecisionTree> forest;
  std::vector<std::uint64_t> forest_seeds;
};

struct ProbPair {
  double p0 = 0.0;
  double p1 = 0.0;
};

// Deterministic given (spec, X, seed); only RF consumes the seed. Throws
// TrainError("degenerate labels") for single-class data except with KNN.
Model fit(const ClassifierSpec& spec, const FeatureMatrix& labeled, std::uint64_t seed);

// Same as fit but with an externally fitted scaler (used by the
// semi-supervised engine, where scaling statistics legitimately come from
// labeled + unlabeled rows). Tree models ignore the scaler.
Model fit_with_scaler(const ClassifierSpec& spec, const FeatureMatrix& labeled,
                      std::uint64_t seed, const std::optional<Scaler>& scaler);

// x is in raw feature units and must match model.feature_names arity.
// p0 + p1 == 1 up to rounding. Throws DataError on non-finite input.
ProbPair predict_proba(const Model& model, const std::vector<double>& x);

// Argmax label; an exact tie resolves to 0.
int predict(const Model& model, const std::vector<double>& x);

std::vector<ProbPair> predict_proba_batch(const Model& model, const FeatureMatrix& m);
std::vector<int> predict_batch(const Model& model, const FeatureMatrix& m);

// Objective/gradient of the smooth part of the LR problem (mean logistic
// loss, plus the l2 term when selected) at an arbitrary point, on already
// scaled rows. Exposed so tests can check the analytic gradient against
// finite differences.
double lr_objective(const std::vector<std::vector<double>>& scaled_rows,
                    const std::vector<int>& labels, const std::vector<double>& weights,
                    double intercept, Penalty penalty, double c);
void lr_gradient(const std::vector<std::vector<double>>& scaled_rows,
                 const std::vector<int>& labels, const std::vector<double>& weights,
                 double intercept, Penalty penalty, double c,
                 std::vector<double>& grad_w, double& grad_b);

}  // namespace ctkit
