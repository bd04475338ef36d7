#include "ctkit/commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ctkit/analysis.hpp"
#include "ctkit/digest.hpp"
#include "ctkit/errors.hpp"
#include "ctkit/eval.hpp"
#include "ctkit/features.hpp"
#include "ctkit/io.hpp"
#include "ctkit/rng.hpp"
#include "ctkit/synth.hpp"
#include "ctkit/urlintel.hpp"
#include "ctkit/version.hpp"

namespace ctkit {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

struct Manifest {
  std::string command;
  ordered_json options;
  ordered_json inputs = ordered_json::object();
  ordered_json outputs = ordered_json::object();
  std::vector<std::string> notices;

  void add_input(const std::string& name, const fs::path& path) {
    inputs[name] = ordered_json{{"path", path.string()}, {"digest", file_digest(path)}};
  }
  void add_output(const fs::path& path) {
    outputs[path.filename().string()] = file_digest(path);
  }
  void write(const fs::path& dir) const {
    ordered_json j;
    j["tool"] = "ctkit";
    j["version"] = kVersion;
    j["command"] = command;
    j["options"] = options;
    j["conventions"] = ordered_json{{"averaging", "macro"},
                                    {"scaler_variance", "population"},
                                    {"filter_variance", "sample"},
                                    {"positive_class", "CT"}};
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["notices"] = notices;
    atomic_write(dir / "manifest.json", j.dump(2) + "\n");
  }
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory: " + dir.string());
}

std::string fraction_label(double fraction) {
  return fraction == 1.0 ? "supervised" : format_double(fraction);
}

ordered_json metrics_to_json(const MetricSet& m) {
  const auto cls = [](const ClassMetrics& c) {
    return ordered_json{{"precision", c.precision},
                        {"recall", c.recall},
                        {"f1", c.f1},
                        {"zero_division", c.zero_division}};
  };
  return ordered_json{{"accuracy", m.accuracy},
                      {"macro_precision", m.macro_precision},
                      {"macro_recall", m.macro_recall},
                      {"macro_f1", m.macro_f1},
                      {"positive", cls(m.positive)},
                      {"negative", cls(m.negative)}};
}

ordered_json selftrain_report_to_json(const SelfTrainReport& report) {
  ordered_json cycles = ordered_json::array();
  for (const auto& c : report.cycles) {
    cycles.push_back(ordered_json{{"added", c.added},
                                  {"remaining_unlabeled", c.remaining_unlabeled},
                                  {"mean_confidence_added", c.mean_confidence_added}});
  }
  return ordered_json{{"cycles_run", report.cycles_run},
                      {"termination", termination_name(report.termination)},
                      {"final_training_size", report.final_training_size},
                      {"cycles", std::move(cycles)}};
}

struct LoadedDataset {
  Dataset dataset;
  std::vector<std::string> removed_columns;
};

LoadedDataset load_dataset(const fs::path& path, double min_variance, std::ostream& log) {
  FeatureMatrix matrix;
  if (path.extension() == ".jsonl") {
    matrix = extract_matrix(read_profiles(path));
  } else if (path.extension() == ".csv") {
    matrix = read_matrix(path);
  } else {
    throw DataError("unsupported data file (expect .jsonl or .csv): " + path.string());
  }
  if (!matrix.labels) throw DataError("dataset must be fully labeled: " + path.string());
  auto filtered = variance_filter(matrix, min_variance);
  if (!filtered.removed.empty()) {
    log << "variance filter removed:";
    for (const auto& name : filtered.removed) log << ' ' << name;
    log << '\n';
  }
  LoadedDataset out;
  out.dataset = Dataset::from_matrix(std::move(filtered.matrix));
  out.removed_columns = std::move(filtered.removed);
  return out;
}

ClassifierSpec spec_from_train_options(const TrainOptions& opt) {
  const auto kind = parse_kind(opt.model_kind);
  if (!kind) throw UsageError("unknown model kind '" + opt.model_kind + "'");
  ClassifierSpec spec;
  spec.kind = *kind;
  switch (spec.kind) {
    case ModelKind::KNN:
      spec.knn.n_neighbors = opt.n_neighbors;
      break;
    case ModelKind::LR: {
      const auto penalty = parse_penalty(opt.penalty);
      if (!penalty) throw UsageError("unknown penalty '" + opt.penalty + "'");
      spec.lr.penalty = *penalty;
      spec.lr.c = opt.c;
      break;
    }
    case ModelKind::DT:
      spec.dt.max_depth = opt.max_depth;
      spec.dt.min_samples_leaf = opt.min_samples_leaf;
      break;
    case ModelKind::RF:
      spec.rf.tree.max_depth = opt.max_depth;
      spec.rf.tree.min_samples_leaf = opt.min_samples_leaf;
      spec.rf.n_estimators = opt.n_estimators;
      break;
  }
  spec.validate();
  return spec;
}

Grids grids_from_json(const json& doc) {
  Grids g;
  if (doc.contains("knn")) {
    for (const auto& item : doc.at("knn")) {
      g.knn.push_back({item.at("n_neighbors").get<int>()});
    }
  }
  if (doc.contains("lr")) {
    for (const auto& item : doc.at("lr")) {
      LrParams p;
      const auto penalty = parse_penalty(item.at("penalty").get<std::string>());
      if (!penalty) throw DataError("grids: unknown penalty");
      p.penalty = *penalty;
      p.c = item.at("C").get<double>();
      if (item.contains("max_epochs")) p.max_epochs = item.at("max_epochs").get<int>();
      if (item.contains("learning_rate")) p.learning_rate = item.at("learning_rate").get<double>();
      if (item.contains("tolerance")) p.tolerance = item.at("tolerance").get<double>();
      g.lr.push_back(p);
    }
  }
  const auto tree_params = [](const json& item) {
    TreeParams p;
    p.max_depth = item.at("max_depth").is_null() ? kUnboundedDepth
                                                 : item.at("max_depth").get<int>();
    p.min_samples_leaf = item.at("min_samples_leaf").get<int>();
    return p;
  };
  if (doc.contains("dt")) {
    for (const auto& item : doc.at("dt")) g.dt.push_back(tree_params(item));
  }
  if (doc.contains("rf")) {
    for (const auto& item : doc.at("rf")) {
      ForestParams p;
      p.tree = tree_params(item);
      p.n_estimators = item.at("n_estimators").get<int>();
      g.rf.push_back(p);
    }
  }
  return g;
}

Grids load_grids(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open grids file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError("invalid grids JSON: " + std::string(e.what()));
  }
  return grids_from_json(doc);
}

std::string csv_mean_std(const MeanStd& ms) {
  return format_double(ms.mean) + "," + format_double(ms.std);
}

}  // namespace

int cmd_synth(const SynthOptions& opt, std::ostream& log) {
  ensure_dir(opt.out_dir);
  Manifest manifest;
  manifest.command = "synth";
  manifest.options = ordered_json{{"out", opt.out_dir.string()},
                                  {"seed", opt.seed},
                                  {"params", opt.params_path ? opt.params_path->string() : ""}};

  std::vector<ProviderParams> params;
  if (opt.params_path) {
    params = load_provider_params(*opt.params_path);
    manifest.add_input("params", *opt.params_path);
  } else {
    params = default_params();
  }

  const auto profiles = generate_all_profiles(params, default_aux(), opt.seed);
  const auto matrix = extract_matrix(profiles);

  const fs::path profiles_path = opt.out_dir / "profiles.jsonl";
  const fs::path matrix_path = opt.out_dir / "matrix.csv";
  write_profiles(profiles, profiles_path);
  write_matrix(matrix, matrix_path);
  const fs::path params_path = opt.out_dir / "provider_params.json";
  save_provider_params(params, params_path);

  manifest.add_output(profiles_path);
  manifest.add_output(matrix_path);
  manifest.add_output(params_path);
  manifest.write(opt.out_dir);

  std::size_t ct = 0;
  for (const auto& p : profiles) {
    if (p.label && *p.label == Label::CT) ++ct;
  }
  log << "profiles=" << profiles.size() << " ct=" << ct
      << " real=" << profiles.size() - ct << '\n';
  log << "wrote " << profiles_path.string() << '\n';
  return 0;
}

int cmd_train(const TrainOptions& opt, std::ostream& log) {
  ensure_dir(opt.out_dir);
  Manifest manifest;
  manifest.command = "train";
  manifest.options = ordered_json{{"data", opt.data.string()},
                                  {"model_kind", opt.model_kind},
                                  {"labeled_fraction", opt.labeled_fraction},
                                  {"threshold", opt.threshold},
                                  {"max_cycles", opt.max_cycles},
                                  {"test_fraction", opt.test_fraction},
                                  {"min_variance", opt.min_variance},
                                  {"seed", opt.seed},
                                  {"no_early_stop", opt.no_early_stop},
                                  {"penalty", opt.penalty},
                                  {"C", opt.c},
                                  {"n_neighbors", opt.n_neighbors},
                                  {"max_depth", opt.max_depth},
                                  {"min_samples_leaf", opt.min_samples_leaf},
                                  {"n_estimators", opt.n_estimators},
                                  {"out", opt.out_dir.string()}};
  manifest.add_input("data", opt.data);

  auto loaded = load_dataset(opt.data, opt.min_variance, log);
  const auto spec = spec_from_train_options(opt);

  const auto split = stratified_split(loaded.dataset, {opt.test_fraction, opt.seed});
  auto masked = mask_labels(split.train, opt.labeled_fraction,
                            Rng::derive(opt.seed, 0xAB1Eu));

  SelfTrainConfig cfg;
  cfg.base = spec;
  cfg.confidence_threshold = opt.threshold;
  cfg.max_cycles = opt.max_cycles;
  cfg.labeled_fraction = opt.labeled_fraction;
  cfg.seed = Rng::derive(opt.seed, 0x7EA1u);
  cfg.early_stop_on_no_additions = !opt.no_early_stop;

  auto result = self_train(masked.labeled, masked.unlabeled, cfg);

  const auto test_metrics = metrics(
      confusion(predict_batch(result.model, split.test.matrix), *split.test.matrix.labels));

  const fs::path model_path = opt.out_dir / "model.json";
  save_model(result.model, model_path);

  ordered_json report = selftrain_report_to_json(result.report);
  report["labeled_fraction"] = opt.labeled_fraction;
  report["threshold"] = opt.threshold;
  report["labeled_seed_size"] = masked.labeled.n_rows();
  report["unlabeled_pool_size"] = masked.unlabeled.n_rows();
  report["test_metrics"] = metrics_to_json(test_metrics);
  const fs::path report_path = opt.out_dir / "selftrain_report.json";
  atomic_write(report_path, report.dump(2) + "\n");

  manifest.add_output(model_path);
  manifest.add_output(report_path);
  manifest.write(opt.out_dir);

  log << "self-train cycles=" << result.report.cycles_run
      << " termination=" << termination_name(result.report.termination)
      << " final_training_size=" << result.report.final_training_size << '\n';
  log << "test accuracy=" << format_double(test_metrics.accuracy)
      << " macro_f1=" << format_double(test_metrics.macro_f1) << '\n';
  return 0;
}

namespace {

void write_grid_table(const GridSearchResult& result, const fs::path& dir,
                      Manifest& manifest) {
  std::string csv =
      "rank,kind,spec,labels_used,valid_f1_mean,valid_f1_std,valid_accuracy_mean,"
      "valid_accuracy_std,valid_precision_mean,valid_precision_std,valid_recall_mean,"
      "valid_recall_std,train_labeled_accuracy_mean,train_labeled_accuracy_std,"
      "train_all_accuracy_mean,train_all_accuracy_std\n";
  ordered_json rows = ordered_json::array();
  for (std::size_t rank = 0; rank < result.cells.size(); ++rank) {
    const auto& cell = result.cells[rank];
    csv += std::to_string(rank + 1) + "," + kind_name(cell.spec.kind) + "," +
           cell.spec.summary() + "," + fraction_label(cell.fraction) + "," +
           csv_mean_std(cell.valid_macro_f1) + "," + csv_mean_std(cell.valid_accuracy) +
           "," + csv_mean_std(cell.valid_macro_precision) + "," +
           csv_mean_std(cell.valid_macro_recall) + "," +
           csv_mean_std(cell.train_labeled_accuracy) + "," +
           csv_mean_std(cell.train_all_accuracy) + "\n";
    ordered_json row;
    row["rank"] = rank + 1;
    row["kind"] = kind_name(cell.spec.kind);
    row["spec"] = spec_to_json(cell.spec);
    row["labels_used"] = fraction_label(cell.fraction);
    row["labeled_fraction"] = cell.fraction;
    row["valid_macro_f1"] = ordered_json{{"mean", cell.valid_macro_f1.mean},
                                         {"std", cell.valid_macro_f1.std}};
    row["valid_accuracy"] = ordered_json{{"mean", cell.valid_accuracy.mean},
                                         {"std", cell.valid_accuracy.std}};
    row["valid_macro_precision"] = ordered_json{{"mean", cell.valid_macro_precision.mean},
                                                {"std", cell.valid_macro_precision.std}};
    row["valid_macro_recall"] = ordered_json{{"mean", cell.valid_macro_recall.mean},
                                             {"std", cell.valid_macro_recall.std}};
    row["train_labeled_accuracy"] = ordered_json{{"mean", cell.train_labeled_accuracy.mean},
                                                 {"std", cell.train_labeled_accuracy.std}};
    row["train_all_accuracy"] = ordered_json{{"mean", cell.train_all_accuracy.mean},
                                             {"std", cell.train_all_accuracy.std}};
    rows.push_back(std::move(row));
  }
  atomic_write(dir / "grid_table.csv", csv);
  ordered_json doc;
  doc["fold_validation_sizes"] = result.fold_validation_sizes;
  doc["cells"] = std::move(rows);
  atomic_write(dir / "grid_table.json", doc.dump(2) + "\n");
  manifest.add_output(dir / "grid_table.csv");
  manifest.add_output(dir / "grid_table.json");
}

void write_model_selection(const GridSearchResult& result,
                           const std::vector<double>& fractions, const fs::path& dir,
                           Manifest& manifest) {
  // Best cell per (kind, fraction), in canonical kind order then the given
  // fraction order; cells are already ranked best-first.
  std::string csv =
      "kind,labels_used,spec,train_accuracy_mean,train_accuracy_std,"
      "valid_accuracy_mean,valid_accuracy_std,valid_precision_mean,"
      "valid_precision_std,valid_recall_mean,valid_recall_std,valid_f1_mean,"
      "valid_f1_std\n";
  ordered_json rows = ordered_json::array();
  for (ModelKind kind : {ModelKind::KNN, ModelKind::LR, ModelKind::DT, ModelKind::RF}) {
    for (double fraction : fractions) {
      const GridCell* best = nullptr;
      for (const auto& cell : result.cells) {
        if (cell.spec.kind == kind && cell.fraction == fraction) {
          best = &cell;
          break;
        }
      }
      if (!best) continue;
      csv += std::string(kind_name(kind)) + "," + fraction_label(fraction) + "," +
             best->spec.summary() + "," + csv_mean_std(best->train_all_accuracy) + "," +
             csv_mean_std(best->valid_accuracy) + "," +
             csv_mean_std(best->valid_macro_precision) + "," +
             csv_mean_std(best->valid_macro_recall) + "," +
             csv_mean_std(best->valid_macro_f1) + "\n";
      ordered_json row;
      row["kind"] = kind_name(kind);
      row["labels_used"] = fraction_label(fraction);
      row["labeled_fraction"] = fraction;
      row["spec"] = spec_to_json(best->spec);
      row["train_accuracy"] = ordered_json{{"mean", best->train_all_accuracy.mean},
                                           {"std", best->train_all_accuracy.std}};
      row["train_labeled_accuracy"] =
          ordered_json{{"mean", best->train_labeled_accuracy.mean},
                       {"std", best->train_labeled_accuracy.std}};
      row["valid_accuracy"] = ordered_json{{"mean", best->valid_accuracy.mean},
                                           {"std", best->valid_accuracy.std}};
      row["valid_precision"] = ordered_json{{"mean", best->valid_macro_precision.mean},
                                            {"std", best->valid_macro_precision.std}};
      row["valid_recall"] = ordered_json{{"mean", best->valid_macro_recall.mean},
                                         {"std", best->valid_macro_recall.std}};
      row["valid_f1"] = ordered_json{{"mean", best->valid_macro_f1.mean},
                                     {"std", best->valid_macro_f1.std}};
      ordered_json folds = ordered_json::array();
      for (const auto& fold : best->report.folds) {
        folds.push_back(ordered_json{
            {"validation", metrics_to_json(fold.validation)},
            {"train_labeled_accuracy", fold.train_labeled.accuracy},
            {"train_all_accuracy", fold.train_all.accuracy},
            {"validation_size", fold.validation_size},
            {"selftrain_cycles", fold.selftrain.cycles_run},
            {"selftrain_termination", termination_name(fold.selftrain.termination)},
            {"final_training_size", fold.selftrain.final_training_size}});
      }
      row["folds"] = std::move(folds);
      rows.push_back(std::move(row));
    }
  }
  atomic_write(dir / "model_selection.csv", csv);
  ordered_json doc;
  doc["averaging"] = "macro";
  doc["fold_validation_sizes"] = result.fold_validation_sizes;
  doc["rows"] = std::move(rows);
  atomic_write(dir / "model_selection.json", doc.dump(2) + "\n");
  manifest.add_output(dir / "model_selection.csv");
  manifest.add_output(dir / "model_selection.json");
}

}  // namespace

int cmd_eval(const EvalOptions& opt, std::ostream& log) {
  ensure_dir(opt.out_dir);
  Manifest manifest;
  manifest.command = "eval";
  {
    ordered_json fr = ordered_json::array();
    for (double f : opt.fractions) fr.push_back(f);
    manifest.options = ordered_json{{"data", opt.data.string()},
                                    {"grids", opt.grids_path ? opt.grids_path->string() : ""},
                                    {"fractions", std::move(fr)},
                                    {"k", opt.k},
                                    {"threshold", opt.threshold},
                                    {"max_cycles", opt.max_cycles},
                                    {"test_fraction", opt.test_fraction},
                                    {"min_variance", opt.min_variance},
                                    {"seed", opt.seed},
                                    {"out", opt.out_dir.string()}};
  }
  manifest.add_input("data", opt.data);

  auto loaded = load_dataset(opt.data, opt.min_variance, log);
  Grids grids = default_grids();
  if (opt.grids_path) {
    grids = load_grids(*opt.grids_path);
    manifest.add_input("grids", *opt.grids_path);
  }

  // Hyperparameter selection happens inside the training portion only.
  const auto split = stratified_split(loaded.dataset, {opt.test_fraction, opt.seed});
  log << "training rows=" << split.train.n_rows() << " test rows=" << split.test.n_rows()
      << '\n';

  GridSearchResult result =
      grid_search(grids, split.train, opt.fractions, opt.k, Rng::derive(opt.seed, 0x61D0u));

  write_grid_table(result, opt.out_dir, manifest);
  write_model_selection(result, opt.fractions, opt.out_dir, manifest);

  ordered_json best = spec_to_json(result.best_spec);
  best["labels_used"] = fraction_label(result.best_fraction);
  best["labeled_fraction"] = result.best_fraction;
  atomic_write(opt.out_dir / "best_spec.json", best.dump(2) + "\n");
  manifest.add_output(opt.out_dir / "best_spec.json");
  manifest.write(opt.out_dir);

  log << "grid cells=" << result.cells.size() << '\n';
  log << "best=" << result.best_spec.summary()
      << " labels_used=" << fraction_label(result.best_fraction) << '\n';
  return 0;
}

int cmd_predict(const PredictOptions& opt, std::ostream& log) {
  if (opt.out.has_parent_path()) ensure_dir(opt.out.parent_path());
  Manifest manifest;
  manifest.command = "predict";
  manifest.options = ordered_json{{"model", opt.model.string()},
                                  {"profiles", opt.profiles.string()},
                                  {"out", opt.out.string()}};
  manifest.add_input("model", opt.model);
  manifest.add_input("profiles", opt.profiles);

  const Model model = load_model(opt.model);
  const auto profiles = read_profiles(opt.profiles);
  const auto matrix = extract_matrix(profiles);

  // Project canonical columns onto the model's feature set.
  std::vector<std::size_t> take;
  const auto& canon = canonical_feature_names();
  for (const auto& name : model.feature_names) {
    const auto it = std::find(canon.begin(), canon.end(), name);
    if (it == canon.end()) {
      throw DataError("model expects unknown feature '" + name + "'");
    }
    take.push_back(static_cast<std::size_t>(it - canon.begin()));
  }

  std::string csv = "user_id,p_ct,label\n";
  std::size_t ct = 0;
  for (std::size_t i = 0; i < matrix.n_rows(); ++i) {
    std::vector<double> x;
    x.reserve(take.size());
    for (auto c : take) x.push_back(matrix.rows[i][c]);
    const auto p = predict_proba(model, x);
    const int label = p.p1 > p.p0 ? 1 : 0;
    ct += static_cast<std::size_t>(label);
    csv += matrix.row_ids[i] + "," + format_double(p.p1) + "," + std::to_string(label) +
           "\n";
  }
  atomic_write(opt.out, csv);
  manifest.add_output(opt.out);
  const fs::path manifest_dir =
      opt.out.has_parent_path() ? opt.out.parent_path() : fs::path(".");
  manifest.write(manifest_dir);

  const double fraction =
      profiles.empty() ? 0.0 : static_cast<double>(ct) / static_cast<double>(profiles.size());
  log << "profiles=" << profiles.size() << " ct=" << ct
      << " ct_fraction=" << format_double(fraction) << '\n';
  return 0;
}

namespace {

std::vector<std::string> load_watchlist(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open watchlist: " + path.string());
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) entries.push_back(line);
  }
  return entries;
}

std::map<std::string, Label> load_prediction_labels(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open predictions: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty predictions file");
  std::map<std::string, Label> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto first = line.find(',');
    const auto last = line.rfind(',');
    if (first == std::string::npos || last == first) {
      throw DataError("predictions:" + std::to_string(line_no) + ": malformed row");
    }
    const std::string user = line.substr(0, first);
    const std::string label = line.substr(last + 1);
    out[user] = label == "1" ? Label::CT : Label::Real;
  }
  return out;
}

ordered_json group_stats_to_json(const std::vector<std::pair<std::string, GroupStats>>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& [name, g] : rows) {
    arr.push_back(ordered_json{{"group", name},
                               {"count", g.count},
                               {"followers_mean", g.followers_mean},
                               {"followers_std", g.followers_std},
                               {"following_mean", g.following_mean},
                               {"following_std", g.following_std}});
  }
  return arr;
}

ordered_json style_to_json(const GroupStyle& g) {
  const auto pair_json = [](const StatPair& p) {
    return ordered_json{{"mean", p.mean}, {"std", p.std}};
  };
  ordered_json shares = ordered_json::array();
  for (const auto& [e, share] : g.top_emoji_shares) {
    shares.push_back(ordered_json{{"emoji", e}, {"share", share}});
  }
  return ordered_json{{"n_comments", g.n_comments},
                      {"sentences_per_comment", pair_json(g.sentences)},
                      {"words_per_comment", pair_json(g.words)},
                      {"words_per_sentence", pair_json(g.words_per_sentence)},
                      {"length_chars", pair_json(g.length_chars)},
                      {"uppercase_word_ratio", pair_json(g.uppercase_word_ratio)},
                      {"frac_starts_uppercase", g.frac_starts_uppercase},
                      {"frac_has_punctuation", g.frac_has_punctuation},
                      {"frac_no_word_repetition", g.frac_no_word_repetition},
                      {"frac_has_emoji", g.frac_has_emoji},
                      {"avg_emoji_when_present", g.avg_emoji_when_present},
                      {"top_emoji_shares", std::move(shares)}};
}

}  // namespace

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& log) {
  ensure_dir(opt.out_dir);
  Manifest manifest;
  manifest.command = "analyze";
  manifest.options =
      ordered_json{{"profiles", opt.profiles.string()},
                   {"comments", opt.comments ? opt.comments->string() : ""},
                   {"predictions", opt.predictions ? opt.predictions->string() : ""},
                   {"watchlist", opt.watchlist ? opt.watchlist->string() : ""},
                   {"domain_map", opt.domain_map ? opt.domain_map->string() : ""},
                   {"reputation_stub",
                    opt.reputation_stub ? opt.reputation_stub->string() : ""},
                   {"out", opt.out_dir.string()}};
  manifest.add_input("profiles", opt.profiles);

  auto profiles = read_profiles(opt.profiles);

  std::map<std::string, Label> label_by_user;
  if (opt.predictions) {
    manifest.add_input("predictions", *opt.predictions);
    label_by_user = load_prediction_labels(*opt.predictions);
    for (auto& p : profiles) {
      const auto it = label_by_user.find(p.user_id);
      if (it != label_by_user.end()) p.label = it->second;
    }
  } else {
    for (const auto& p : profiles) {
      if (p.label) label_by_user[p.user_id] = *p.label;
    }
  }

  std::vector<ProfileRecord> ct_profiles;
  std::vector<ProfileRecord> real_profiles;
  for (const auto& p : profiles) {
    if (!p.label) continue;
    (*p.label == Label::CT ? ct_profiles : real_profiles).push_back(p);
  }
  const bool any_labels = !ct_profiles.empty() || !real_profiles.empty();
  // The follower-graph / biography / URL audits target the detected group.
  const std::vector<ProfileRecord>& audited = any_labels ? ct_profiles : profiles;
  const std::string audited_name = any_labels ? "CT" : "all";
  if (!any_labels) {
    manifest.notices.push_back("profiles carry no labels; auditing all profiles");
  }

  // Tier statistics: the audited group as one bucket, real profiles by tier.
  {
    std::vector<std::pair<std::string, GroupStats>> rows;
    if (!audited.empty()) {
      std::vector<double> fo;
      std::vector<double> fg;
      for (const auto& p : audited) {
        fo.push_back(static_cast<double>(p.followers));
        fg.push_back(static_cast<double>(p.following));
      }
      const auto f = mean_std(fo);
      const auto g = mean_std(fg);
      rows.emplace_back("Fake",
                        GroupStats{audited.size(), f.mean, f.std, g.mean, g.std});
    }
    auto tier_report = group_stats(real_profiles, GroupBy::TierGroups);
    for (auto& row : tier_report.groups) rows.push_back(std::move(row));

    std::string csv = "group,count,followers_mean,followers_std,following_mean,following_std\n";
    for (const auto& [name, g] : rows) {
      csv += name + "," + std::to_string(g.count) + "," + format_double(g.followers_mean) +
             "," + format_double(g.followers_std) + "," + format_double(g.following_mean) +
             "," + format_double(g.following_std) + "\n";
    }
    atomic_write(opt.out_dir / "tier_stats.csv", csv);
    ordered_json doc;
    doc["audited_group"] = audited_name;
    doc["groups"] = group_stats_to_json(rows);
    ordered_json omitted = ordered_json::array();
    for (const auto& o : tier_report.omitted) omitted.push_back(o);
    doc["omitted_tiers"] = std::move(omitted);
    atomic_write(opt.out_dir / "tier_stats.json", doc.dump(2) + "\n");
    manifest.add_output(opt.out_dir / "tier_stats.csv");
    manifest.add_output(opt.out_dir / "tier_stats.json");
  }

  {
    const auto hist = following_histogram(audited);
    std::string csv = "bin_lower,bin_upper,count\n";
    ordered_json bins = ordered_json::array();
    for (std::size_t b = 0; b < hist.counts.size(); ++b) {
      const bool overflow = b + 1 == hist.counts.size();
      const std::string upper =
          overflow ? "inf" : std::to_string(hist.lower_edges[b] + hist.bin_width);
      csv += std::to_string(hist.lower_edges[b]) + "," + upper + "," +
             std::to_string(hist.counts[b]) + "\n";
      bins.push_back(ordered_json{{"lower", hist.lower_edges[b]},
                                  {"upper", overflow ? ordered_json(nullptr)
                                                     : ordered_json(hist.lower_edges[b] +
                                                                    hist.bin_width)},
                                  {"count", hist.counts[b]}});
    }
    atomic_write(opt.out_dir / "following_histogram.csv", csv);
    ordered_json doc;
    doc["audited_group"] = audited_name;
    doc["bin_width"] = hist.bin_width;
    doc["cap"] = hist.cap;
    doc["bins"] = std::move(bins);
    atomic_write(opt.out_dir / "following_histogram.json", doc.dump(2) + "\n");
    manifest.add_output(opt.out_dir / "following_histogram.csv");
    manifest.add_output(opt.out_dir / "following_histogram.json");
  }

  {
    std::vector<std::string> watchlist = default_watchlist();
    if (opt.watchlist) {
      manifest.add_input("watchlist", *opt.watchlist);
      watchlist = load_watchlist(*opt.watchlist);
    }
    const auto scan = biography_scan(audited, watchlist);
    std::string csv = "entry,hits\n";
    for (const auto& [entry, hits] : scan.entry_hits) {
      csv += entry + "," + std::to_string(hits) + "\n";
    }
    atomic_write(opt.out_dir / "biography_scan.csv", csv);
    ordered_json doc;
    doc["audited_group"] = audited_name;
    doc["scanned"] = audited.size();
    doc["matched"] = scan.matched_ids.size();
    doc["fraction"] = scan.fraction;
    ordered_json hits = ordered_json::array();
    for (const auto& [entry, count] : scan.entry_hits) {
      hits.push_back(ordered_json{{"entry", entry}, {"hits", count}});
    }
    doc["entry_hits"] = std::move(hits);
    doc["matched_ids"] = scan.matched_ids;
    atomic_write(opt.out_dir / "biography_scan.json", doc.dump(2) + "\n");
    manifest.add_output(opt.out_dir / "biography_scan.csv");
    manifest.add_output(opt.out_dir / "biography_scan.json");
  }

  {
    DomainMap map = default_domain_map();
    if (opt.domain_map) {
      manifest.add_input("domain_map", *opt.domain_map);
      map = load_domain_map(*opt.domain_map);
    }
    StubProvider provider;
    if (opt.reputation_stub) {
      manifest.add_input("reputation_stub", *opt.reputation_stub);
      provider = StubProvider::from_file(*opt.reputation_stub);
    } else {
      manifest.notices.push_back("no reputation stub supplied; defaults report safe");
    }
    const auto report = url_report(audited, map, provider);
    std::string csv = "section,name,value\n";
    csv += "summary,profiles," + std::to_string(report.n_profiles) + "\n";
    csv += "summary,with_url," + std::to_string(report.n_with_url) + "\n";
    csv += "summary,url_fraction," + format_double(report.url_fraction) + "\n";
    csv += "summary,lookup_errors," + std::to_string(report.lookup_errors) + "\n";
    for (const auto& [name, count] : report.category_counts) {
      csv += "category," + name + "," + std::to_string(count) + "\n";
    }
    for (const auto& [name, count] : report.other_verdicts) {
      csv += "other_verdict," + name + "," + std::to_string(count) + "\n";
    }
    atomic_write(opt.out_dir / "url_report.csv", csv);
    ordered_json doc;
    doc["audited_group"] = audited_name;
    doc["profiles"] = report.n_profiles;
    doc["with_url"] = report.n_with_url;
    doc["url_fraction"] = report.url_fraction;
    doc["lookup_errors"] = report.lookup_errors;
    ordered_json cats = ordered_json::object();
    for (const auto& [name, count] : report.category_counts) cats[name] = count;
    doc["categories"] = std::move(cats);
    ordered_json verdicts = ordered_json::object();
    for (const auto& [name, count] : report.other_verdicts) verdicts[name] = count;
    doc["other_verdicts"] = std::move(verdicts);
    atomic_write(opt.out_dir / "url_report.json", doc.dump(2) + "\n");
    manifest.add_output(opt.out_dir / "url_report.csv");
    manifest.add_output(opt.out_dir / "url_report.json");
  }

  if (!opt.comments) {
    manifest.notices.push_back(
        "no comments supplied; stylometry, comments_per_user, and word_frequencies "
        "skipped");
    manifest.write(opt.out_dir);
    log << "analysis reports written to " << opt.out_dir.string()
        << " (comment reports skipped)\n";
    return 0;
  }

  manifest.add_input("comments", *opt.comments);
  const auto comments = read_comments(*opt.comments);

  std::vector<CommentRecord> ct_comments;
  std::vector<CommentRecord> real_comments;
  std::vector<CommentRecord> unknown_comments;
  for (const auto& c : comments) {
    std::optional<Label> label = c.author_label;
    if (!label) {
      const auto it = label_by_user.find(c.author_id);
      if (it != label_by_user.end()) label = it->second;
    }
    if (!label) {
      unknown_comments.push_back(c);
    } else {
      (*label == Label::CT ? ct_comments : real_comments).push_back(c);
    }
  }

  if (ct_comments.empty() || real_comments.empty()) {
    manifest.notices.push_back("stylometry skipped: needs comments in both groups");
  } else {
    const auto report = stylometry_report(ct_comments, real_comments);
    ordered_json doc;
    doc["ct"] = style_to_json(report.ct);
    doc["real"] = style_to_json(report.real);
    doc["welch_p"] = ordered_json{{"words_per_comment", report.p_words},
                                  {"length_chars", report.p_length},
                                  {"words_per_sentence", report.p_words_per_sentence}};
    atomic_write(opt.out_dir / "stylometry.json", doc.dump(2) + "\n");
    const auto csv_pair = [](const StatPair& p) {
      return format_double(p.mean) + "," + format_double(p.std);
    };
    std::string csv = "metric,ct_mean,ct_std,real_mean,real_std\n";
    csv += "sentences_per_comment," + csv_pair(report.ct.sentences) + "," +
           csv_pair(report.real.sentences) + "\n";
    csv += "words_per_comment," + csv_pair(report.ct.words) + "," +
           csv_pair(report.real.words) + "\n";
    csv += "words_per_sentence," + csv_pair(report.ct.words_per_sentence) + "," +
           csv_pair(report.real.words_per_sentence) + "\n";
    csv += "length_chars," + csv_pair(report.ct.length_chars) + "," +
           csv_pair(report.real.length_chars) + "\n";
    csv += "uppercase_word_ratio," + csv_pair(report.ct.uppercase_word_ratio) + "," +
           csv_pair(report.real.uppercase_word_ratio) + "\n";
    atomic_write(opt.out_dir / "stylometry.csv", csv);
    manifest.add_output(opt.out_dir / "stylometry.json");
    manifest.add_output(opt.out_dir / "stylometry.csv");
  }

  {
    const auto per_user = comments_per_user(comments, label_by_user);
    std::string csv = "group,n_users,mean,std\n";
    ordered_json doc = ordered_json::object();
    for (const auto& [group, stats] : per_user) {
      csv += group + "," + std::to_string(stats.n_users) + "," +
             format_double(stats.mean) + "," + format_double(stats.std) + "\n";
      doc[group] = ordered_json{
          {"n_users", stats.n_users}, {"mean", stats.mean}, {"std", stats.std}};
    }
    atomic_write(opt.out_dir / "comments_per_user.csv", csv);
    atomic_write(opt.out_dir / "comments_per_user.json", doc.dump(2) + "\n");
    manifest.add_output(opt.out_dir / "comments_per_user.csv");
    manifest.add_output(opt.out_dir / "comments_per_user.json");
  }

  {
    std::string csv = "group,rank,word,count\n";
    ordered_json doc = ordered_json::object();
    const auto emit = [&](const std::string& group,
                          const std::vector<CommentRecord>& group_comments) {
      if (group_comments.empty()) return;
      const auto freq = word_frequencies(group_comments);
      ordered_json arr = ordered_json::array();
      for (std::size_t i = 0; i < freq.size(); ++i) {
        csv += group + "," + std::to_string(i + 1) + "," + freq[i].first + "," +
               std::to_string(freq[i].second) + "\n";
        arr.push_back(ordered_json{{"word", freq[i].first}, {"count", freq[i].second}});
      }
      doc[group] = std::move(arr);
    };
    emit("CT", ct_comments);
    emit("Real", real_comments);
    emit("unknown", unknown_comments);
    atomic_write(opt.out_dir / "word_frequencies.csv", csv);
    atomic_write(opt.out_dir / "word_frequencies.json", doc.dump(2) + "\n");
    manifest.add_output(opt.out_dir / "word_frequencies.csv");
    manifest.add_output(opt.out_dir / "word_frequencies.json");
  }

  manifest.write(opt.out_dir);
  log << "analysis reports written to " << opt.out_dir.string() << '\n';
  return 0;
}

}  // namespace ctkit
