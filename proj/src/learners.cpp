#include "ctkit/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ctkit/errors.hpp"
#include "ctkit/rng.hpp"

namespace ctkit {

const char* kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::KNN: return "knn";
    case ModelKind::LR: return "lr";
    case ModelKind::DT: return "dt";
    case ModelKind::RF: return "rf";
  }
  return "?";
}

std::optional<ModelKind> parse_kind(std::string_view s) {
  if (s == "knn") return ModelKind::KNN;
  if (s == "lr") return ModelKind::LR;
  if (s == "dt") return ModelKind::DT;
  if (s == "rf") return ModelKind::RF;
  return std::nullopt;
}

const char* penalty_name(Penalty p) {
  switch (p) {
    case Penalty::None: return "none";
    case Penalty::L1: return "l1";
    case Penalty::L2: return "l2";
  }
  return "?";
}

std::optional<Penalty> parse_penalty(std::string_view s) {
  if (s == "none") return Penalty::None;
  if (s == "l1") return Penalty::L1;
  if (s == "l2") return Penalty::L2;
  return std::nullopt;
}

void ClassifierSpec::validate() const {
  switch (kind) {
    case ModelKind::KNN:
      if (knn.n_neighbors < 1) throw ConfigError("knn: n_neighbors must be >= 1");
      break;
    case ModelKind::LR:
      if (!(lr.c > 0.0)) throw ConfigError("lr: C must be positive");
      if (lr.max_epochs < 1) throw ConfigError("lr: max_epochs must be >= 1");
      if (!(lr.learning_rate > 0.0)) throw ConfigError("lr: learning_rate must be positive");
      if (!(lr.tolerance >= 0.0)) throw ConfigError("lr: tolerance must be >= 0");
      break;
    case ModelKind::DT:
      if (dt.max_depth != kUnboundedDepth && dt.max_depth < 1)
        throw ConfigError("dt: max_depth must be unbounded or >= 1");
      if (dt.min_samples_leaf < 1) throw ConfigError("dt: min_samples_leaf must be >= 1");
      break;
    case ModelKind::RF:
      if (rf.tree.max_depth != kUnboundedDepth && rf.tree.max_depth < 1)
        throw ConfigError("rf: max_depth must be unbounded or >= 1");
      if (rf.tree.min_samples_leaf < 1) throw ConfigError("rf: min_samples_leaf must be >= 1");
      if (rf.n_estimators < 1) throw ConfigError("rf: n_estimators must be >= 1");
      if (rf.max_features < 0) throw ConfigError("rf: max_features must be >= 0");
      break;
  }
}

namespace {

std::string depth_text(int depth) {
  return depth == kUnboundedDepth ? "none" : std::to_string(depth);
}

std::string trim_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string ClassifierSpec::summary() const {
  std::ostringstream os;
  switch (kind) {
    case ModelKind::KNN:
      os << "knn(n_neighbors=" << knn.n_neighbors << ")";
      break;
    case ModelKind::LR:
      os << "lr(penalty=" << penalty_name(lr.penalty) << ",C=" << trim_number(lr.c) << ")";
      break;
    case ModelKind::DT:
      os << "dt(max_depth=" << depth_text(dt.max_depth)
         << ",min_samples_leaf=" << dt.min_samples_leaf << ")";
      break;
    case ModelKind::RF:
      os << "rf(max_depth=" << depth_text(rf.tree.max_depth)
         << ",min_samples_leaf=" << rf.tree.min_samples_leaf
         << ",n_estimators=" << rf.n_estimators << ")";
      break;
  }
  return os.str();
}

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  // Iterative depth over the node array.
  std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
  int best = 0;
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    const TreeNode& n = nodes[static_cast<std::size_t>(id)];
    best = std::max(best, d);
    if (n.feature >= 0) {
      stack.push_back({n.left, d + 1});
      stack.push_back({n.right, d + 1});
    }
  }
  return best;
}

namespace {

double sigmoid(double m) {
  if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

// log(1 + e^{-m}) for y=1, log(1 + e^{m}) for y=0, in one stable form.
double logistic_loss(double margin, int y) {
  const double s = y == 1 ? margin : -margin;
  return s >= 0.0 ? std::log1p(std::exp(-s)) : -s + std::log1p(std::exp(s));
}

int count_class1(const std::vector<int>& labels) {
  return static_cast<int>(std::count(labels.begin(), labels.end(), 1));
}

struct LrFit {
  std::vector<double> weights;
  double intercept = 0.0;
  bool converged = false;
  int epochs_run = 0;
  std::vector<double> loss_trace;
};

LrFit fit_lr(const std::vector<std::vector<double>>& z, const std::vector<int>& y,
             const LrParams& params) {
  const std::size_t n = z.size();
  const std::size_t d = z.empty() ? 0 : z[0].size();
  const double lambda = 1.0 / (params.c * static_cast<double>(n));
  LrFit fit;
  fit.weights.assign(d, 0.0);
  double b = 0.0;
  std::vector<double> grad(d, 0.0);
  std::vector<double> next(d, 0.0);

  for (int epoch = 0; epoch < params.max_epochs; ++epoch) {
    fit.loss_trace.push_back(
        lr_objective(z, y, fit.weights, b, params.penalty, params.c));

    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double margin = b;
      const double* zi = z[i].data();
      for (std::size_t j = 0; j < d; ++j) margin += fit.weights[j] * zi[j];
      const double r = sigmoid(margin) - static_cast<double>(y[i]);
      for (std::size_t j = 0; j < d; ++j) grad[j] += r * zi[j];
      grad_b += r;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) grad[j] *= inv_n;
    grad_b *= inv_n;
    if (params.penalty == Penalty::L2) {
      for (std::size_t j = 0; j < d; ++j) grad[j] += lambda * fit.weights[j];
    }

    double step_norm = std::fabs(grad_b);
    if (params.penalty == Penalty::L1) {
      const double shrink = params.learning_rate * lambda;
      for (std::size_t j = 0; j < d; ++j) {
        const double v = fit.weights[j] - params.learning_rate * grad[j];
        next[j] = v > shrink ? v - shrink : (v < -shrink ? v + shrink : 0.0);
        // Proximal-gradient residual plays the role of the gradient norm.
        step_norm = std::max(step_norm,
                             std::fabs(fit.weights[j] - next[j]) / params.learning_rate);
      }
    } else {
      for (std::size_t j = 0; j < d; ++j) {
        next[j] = fit.weights[j] - params.learning_rate * grad[j];
        step_norm = std::max(step_norm, std::fabs(grad[j]));
      }
    }

    if (step_norm < params.tolerance) {
      fit.converged = true;
      break;
    }
    fit.weights.swap(next);
    b -= params.learning_rate * grad_b;
    ++fit.epochs_run;
  }
  fit.intercept = b;
  return fit;
}

}  // namespace

double lr_objective(const std::vector<std::vector<double>>& scaled_rows,
                    const std::vector<int>& labels, const std::vector<double>& weights,
                    double intercept, Penalty penalty, double c) {
  const std::size_t n = scaled_rows.size();
  const std::size_t d = weights.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double margin = intercept;
    for (std::size_t j = 0; j < d; ++j) margin += weights[j] * scaled_rows[i][j];
    total += logistic_loss(margin, labels[i]);
  }
  total /= static_cast<double>(n);
  const double lambda = 1.0 / (c * static_cast<double>(n));
  if (penalty == Penalty::L2) {
    double sq = 0.0;
    for (double w : weights) sq += w * w;
    total += 0.5 * lambda * sq;
  } else if (penalty == Penalty::L1) {
    double abs_sum = 0.0;
    for (double w : weights) abs_sum += std::fabs(w);
    total += lambda * abs_sum;
  }
  return total;
}

void lr_gradient(const std::vector<std::vector<double>>& scaled_rows,
                 const std::vector<int>& labels, const std::vector<double>& weights,
                 double intercept, Penalty penalty, double c,
                 std::vector<double>& grad_w, double& grad_b) {
  const std::size_t n = scaled_rows.size();
  const std::size_t d = weights.size();
  grad_w.assign(d, 0.0);
  grad_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double margin = intercept;
    for (std::size_t j = 0; j < d; ++j) margin += weights[j] * scaled_rows[i][j];
    const double r = sigmoid(margin) - static_cast<double>(labels[i]);
    for (std::size_t j = 0; j < d; ++j) grad_w[j] += r * scaled_rows[i][j];
    grad_b += r;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& g : grad_w) g *= inv_n;
  grad_b *= inv_n;
  if (penalty == Penalty::L2) {
    const double lambda = 1.0 / (c * static_cast<double>(n));
    for (std::size_t j = 0; j < d; ++j) grad_w[j] += lambda * weights[j];
  }
}

namespace {

// ---- decision tree ----

struct TreeBuilder {
  const std::vector<std::vector<double>>& rows;
  const std::vector<int>& labels;
  TreeParams params;
  int mtry;        // candidate features per split; d for plain trees
  Rng* rng;        // only consulted when mtry < d
  std::vector<TreeNode> nodes;
  std::vector<std::pair<double, std::uint32_t>> scratch;  // split-scan buffer

  static double gini(std::size_t n1, std::size_t m) {
    const double p = static_cast<double>(n1) / static_cast<double>(m);
    return 2.0 * p * (1.0 - p);
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t d = rows[0].size();
    std::vector<std::size_t> feats(d);
    std::iota(feats.begin(), feats.end(), std::size_t{0});
    if (mtry >= static_cast<int>(d)) return feats;
    // Partial Fisher-Yates draw of mtry distinct features, then sorted so
    // equal-gain ties still resolve to the lowest feature index.
    for (int i = 0; i < mtry; ++i) {
      const auto j = i + static_cast<std::size_t>(rng->below(d - static_cast<std::size_t>(i)));
      std::swap(feats[static_cast<std::size_t>(i)], feats[j]);
    }
    feats.resize(static_cast<std::size_t>(mtry));
    std::sort(feats.begin(), feats.end());
    return feats;
  }

  std::int32_t build(std::vector<std::size_t>& idx, int depth) {
    const std::size_t m = idx.size();
    std::size_t n1 = 0;
    for (auto i : idx) n1 += static_cast<std::size_t>(labels[i]);

    const auto node_id = static_cast<std::int32_t>(nodes.size());
    nodes.push_back(TreeNode{});
    nodes[static_cast<std::size_t>(node_id)].n_samples = static_cast<std::uint32_t>(m);
    nodes[static_cast<std::size_t>(node_id)].p1 =
        static_cast<double>(n1) / static_cast<double>(m);

    const bool pure = n1 == 0 || n1 == m;
    const bool depth_capped = params.max_depth != kUnboundedDepth && depth >= params.max_depth;
    if (pure || depth_capped || m < 2 * static_cast<std::size_t>(params.min_samples_leaf)) {
      return node_id;
    }

    const double parent_gini = gini(n1, m);
    double best_score = parent_gini - 1e-12;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    bool found = false;

    const auto min_leaf = static_cast<std::size_t>(params.min_samples_leaf);
    for (std::size_t f : candidate_features()) {
      scratch.clear();
      for (auto i : idx) {
        scratch.emplace_back(rows[i][f], static_cast<std::uint32_t>(i));
      }
      // Pair ordering keeps duplicate values in row-index order.
      std::sort(scratch.begin(), scratch.end());
      std::size_t left1 = 0;
      for (std::size_t s = 1; s < m; ++s) {
        left1 += static_cast<std::size_t>(labels[scratch[s - 1].second]);
        const double lo = scratch[s - 1].first;
        const double hi = scratch[s].first;
        if (lo == hi) continue;
        if (s < min_leaf || m - s < min_leaf) continue;
        const double weighted =
            (static_cast<double>(s) * gini(left1, s) +
             static_cast<double>(m - s) * gini(n1 - left1, m - s)) /
            static_cast<double>(m);
        if (weighted < best_score) {
          double thr = lo + 0.5 * (hi - lo);
          if (!(thr > lo && thr < hi)) thr = lo;  // fp-collapse guard
          best_score = weighted;
          best_feature = f;
          best_threshold = thr;
          found = true;
        }
      }
    }

    if (!found) return node_id;

    std::vector<std::size_t> left_idx;
    std::vector<std::size_t> right_idx;
    left_idx.reserve(m);
    right_idx.reserve(m);
    for (auto i : idx) {
      (rows[i][best_feature] <= best_threshold ? left_idx : right_idx).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();

    nodes[static_cast<std::size_t>(node_id)].feature =
        static_cast<std::int32_t>(best_feature);
    nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
    const std::int32_t left = build(left_idx, depth + 1);
    nodes[static_cast<std::size_t>(node_id)].left = left;
    const std::int32_t right = build(right_idx, depth + 1);
    nodes[static_cast<std::size_t>(node_id)].right = right;
    return node_id;
  }
};

DecisionTree build_tree(const std::vector<std::vector<double>>& rows,
                        const std::vector<int>& labels,
                        const std::vector<std::size_t>& indices, const TreeParams& params,
                        int mtry, Rng* rng) {
  TreeBuilder builder{rows, labels, params, mtry, rng, {}, {}};
  std::vector<std::size_t> idx(indices);
  builder.build(idx, 0);
  DecisionTree tree;
  tree.nodes = std::move(builder.nodes);
  return tree;
}

double tree_p1(const DecisionTree& tree, const std::vector<double>& x) {
  std::size_t id = 0;
  for (;;) {
    const TreeNode& n = tree.nodes[id];
    if (n.feature < 0) return n.p1;
    id = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold
                                      ? n.left
                                      : n.right);
  }
}

}  // namespace

Model fit_with_scaler(const ClassifierSpec& spec, const FeatureMatrix& labeled,
                      std::uint64_t seed, const std::optional<Scaler>& scaler) {
  spec.validate();
  labeled.validate();
  if (!labeled.labels) throw TrainError("fit: training matrix has no labels");
  const auto& y = *labeled.labels;
  const std::size_t n = labeled.n_rows();
  if (n == 0) throw TrainError("fit: empty training matrix");

  const int n1 = count_class1(y);
  const bool single_class = n1 == 0 || static_cast<std::size_t>(n1) == n;
  if (single_class && spec.kind != ModelKind::KNN) {
    throw TrainError("degenerate labels: training data contains a single class");
  }

  Model model;
  model.spec = spec;
  model.feature_names = labeled.feature_names;

  switch (spec.kind) {
    case ModelKind::KNN: {
      if (n < static_cast<std::size_t>(spec.knn.n_neighbors)) {
        throw TrainError("knn: fewer training samples than n_neighbors");
      }
      model.scaler = scaler ? *scaler : fit_scaler(labeled);
      model.knn_rows.reserve(n);
      for (const auto& row : labeled.rows) model.knn_rows.push_back(scale_row(*model.scaler, row));
      model.knn_labels = y;
      break;
    }
    case ModelKind::LR: {
      model.scaler = scaler ? *scaler : fit_scaler(labeled);
      std::vector<std::vector<double>> z;
      z.reserve(n);
      for (const auto& row : labeled.rows) z.push_back(scale_row(*model.scaler, row));
      auto fit = fit_lr(z, y, spec.lr);
      model.lr_weights = std::move(fit.weights);
      model.lr_intercept = fit.intercept;
      model.lr_converged = fit.converged;
      model.lr_epochs_run = fit.epochs_run;
      model.lr_loss_trace = std::move(fit.loss_trace);
      break;
    }
    case ModelKind::DT: {
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      model.tree = build_tree(labeled.rows, y, idx, spec.dt,
                              static_cast<int>(labeled.n_features()), nullptr);
      break;
    }
    case ModelKind::RF: {
      const std::size_t d = labeled.n_features();
      const int mtry = spec.rf.max_features > 0
                           ? std::min(spec.rf.max_features, static_cast<int>(d))
                           : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
      model.forest.reserve(static_cast<std::size_t>(spec.rf.n_estimators));
      model.forest_seeds.reserve(static_cast<std::size_t>(spec.rf.n_estimators));
      for (int t = 0; t < spec.rf.n_estimators; ++t) {
        const std::uint64_t tree_seed = Rng::derive(seed, static_cast<std::uint64_t>(t));
        model.forest_seeds.push_back(tree_seed);
        Rng rng(tree_seed);
        std::vector<std::size_t> idx;
        idx.reserve(n);
        if (spec.rf.bootstrap) {
          for (std::size_t i = 0; i < n; ++i) idx.push_back(static_cast<std::size_t>(rng.below(n)));
        } else {
          idx.resize(n);
          std::iota(idx.begin(), idx.end(), std::size_t{0});
        }
        model.forest.push_back(build_tree(labeled.rows, y, idx, spec.rf.tree, mtry, &rng));
      }
      break;
    }
  }
  return model;
}

Model fit(const ClassifierSpec& spec, const FeatureMatrix& labeled, std::uint64_t seed) {
  return fit_with_scaler(spec, labeled, seed, std::nullopt);
}

ProbPair predict_proba(const Model& model, const std::vector<double>& x) {
  if (x.size() != model.feature_names.size()) {
    throw DataError("predict: feature arity mismatch (got " + std::to_string(x.size()) +
                    ", model expects " + std::to_string(model.feature_names.size()) + ")");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw DataError("predict: non-finite feature value");
  }

  double p1 = 0.0;
  switch (model.spec.kind) {
    case ModelKind::LR: {
      const auto z = scale_row(*model.scaler, x);
      double margin = model.lr_intercept;
      for (std::size_t j = 0; j < z.size(); ++j) margin += model.lr_weights[j] * z[j];
      p1 = sigmoid(margin);
      break;
    }
    case ModelKind::KNN: {
      const auto z = scale_row(*model.scaler, x);
      const std::size_t n = model.knn_rows.size();
      const auto k = static_cast<std::size_t>(model.spec.knn.n_neighbors);
      std::vector<std::pair<double, std::size_t>> dist;
      dist.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        const auto& row = model.knn_rows[i];
        for (std::size_t j = 0; j < z.size(); ++j) {
          const double diff = z[j] - row[j];
          sq += diff * diff;
        }
        dist.emplace_back(sq, i);
      }
      // Ties in distance resolve to the lower row index via pair ordering.
      std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1),
                       dist.end());
      std::size_t votes1 = 0;
      for (std::size_t i = 0; i < k; ++i) {
        votes1 += static_cast<std::size_t>(model.knn_labels[dist[i].second]);
      }
      p1 = static_cast<double>(votes1) / static_cast<double>(k);
      break;
    }
    case ModelKind::DT:
      p1 = tree_p1(model.tree, x);
      break;
    case ModelKind::RF: {
      double sum = 0.0;
      for (const auto& tree : model.forest) sum += tree_p1(tree, x);
      p1 = sum / static_cast<double>(model.forest.size());
      break;
    }
  }
  return {1.0 - p1, p1};
}

int predict(const Model& model, const std::vector<double>& x) {
  const auto p = predict_proba(model, x);
  return p.p1 > p.p0 ? 1 : 0;
}

std::vector<ProbPair> predict_proba_batch(const Model& model, const FeatureMatrix& m) {
  std::vector<ProbPair> out;
  out.reserve(m.n_rows());
  for (const auto& row : m.rows) out.push_back(predict_proba(model, row));
  return out;
}

std::vector<int> predict_batch(const Model& model, const FeatureMatrix& m) {
  std::vector<int> out;
  out.reserve(m.n_rows());
  for (const auto& row : m.rows) out.push_back(predict(model, row));
  return out;
}

}  // namespace ctkit
