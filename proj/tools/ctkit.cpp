#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ctkit/commands.hpp"
#include "ctkit/errors.hpp"
#include "ctkit/urlintel.hpp"
#include "ctkit/version.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"Crowdturfing profile detection and engagement audit toolkit"};
  app.set_version_flag("--version", ctkit::kVersion);
  app.require_subcommand(1);

  ctkit::SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate the synthetic labeled dataset");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  std::string synth_params;
  synth_cmd->add_option("--params", synth_params, "Provider parameter JSON file");

  ctkit::TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Self-train a detector and score it");
  train_cmd->add_option("--data", train.data, "Profiles .jsonl or matrix .csv")->required();
  train_cmd->add_option("--out", train.out_dir, "Output directory")->required();
  train_cmd->add_option("--model-kind", train.model_kind, "knn|lr|dt|rf");
  train_cmd->add_option("--labeled-fraction", train.labeled_fraction,
                        "Visible-label fraction of the training split");
  train_cmd->add_option("--threshold", train.threshold, "Pseudo-label confidence threshold");
  train_cmd->add_option("--max-cycles", train.max_cycles, "Self-training cycle budget");
  train_cmd->add_option("--test-fraction", train.test_fraction, "Held-out test fraction");
  train_cmd->add_option("--min-variance", train.min_variance, "Variance filter threshold");
  train_cmd->add_option("--seed", train.seed, "Run seed");
  train_cmd->add_flag("--no-early-stop", train.no_early_stop,
                      "Keep cycling even when a cycle adds nothing");
  train_cmd->add_option("--penalty", train.penalty, "LR penalty: none|l1|l2");
  train_cmd->add_option("--c", train.c, "LR inverse regularization strength");
  train_cmd->add_option("--n-neighbors", train.n_neighbors, "KNN neighbor count");
  train_cmd->add_option("--max-depth", train.max_depth, "Tree depth cap (-1 = unbounded)");
  train_cmd->add_option("--min-samples-leaf", train.min_samples_leaf, "Tree leaf minimum");
  train_cmd->add_option("--n-estimators", train.n_estimators, "Forest size");

  ctkit::EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Cross-validated grid search");
  eval_cmd->add_option("--data", eval.data, "Profiles .jsonl or matrix .csv")->required();
  eval_cmd->add_option("--out", eval.out_dir, "Output directory")->required();
  std::string grids_path;
  eval_cmd->add_option("--grids", grids_path, "Grid JSON file (default: built-in grids)");
  eval_cmd->add_option("--fractions", eval.fractions,
                       "Labeled fractions to evaluate (1.0 = supervised)");
  eval_cmd->add_option("--k", eval.k, "Cross-validation folds");
  eval_cmd->add_option("--threshold", eval.threshold, "Pseudo-label confidence threshold");
  eval_cmd->add_option("--max-cycles", eval.max_cycles, "Self-training cycle budget");
  eval_cmd->add_option("--test-fraction", eval.test_fraction, "Held-out test fraction");
  eval_cmd->add_option("--min-variance", eval.min_variance, "Variance filter threshold");
  eval_cmd->add_option("--seed", eval.seed, "Run seed");

  ctkit::PredictOptions predict;
  auto* predict_cmd = app.add_subcommand("predict", "Score profiles with a saved model");
  predict_cmd->add_option("--model", predict.model, "Model JSON")->required();
  predict_cmd->add_option("--profiles", predict.profiles, "Profiles .jsonl")->required();
  predict_cmd->add_option("--out", predict.out, "Output CSV path")->required();

  ctkit::AnalyzeOptions analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Forensic reports over profiles/comments");
  analyze_cmd->add_option("--profiles", analyze.profiles, "Profiles .jsonl")->required();
  std::string comments_path, predictions_path, watchlist_path, domain_map_path, stub_path;
  analyze_cmd->add_option("--comments", comments_path, "Comments .jsonl");
  analyze_cmd->add_option("--predictions", predictions_path, "Predictions CSV");
  analyze_cmd->add_option("--watchlist", watchlist_path, "Watchlist file, one entry per line");
  analyze_cmd->add_option("--domain-map", domain_map_path, "Domain map JSON");
  analyze_cmd->add_option("--reputation-stub", stub_path, "Reputation stub JSON");
  analyze_cmd->add_option("--out-dir", analyze.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth_cmd) {
      if (!synth_params.empty()) synth.params_path = synth_params;
      return ctkit::cmd_synth(synth, std::cout);
    }
    if (*train_cmd) return ctkit::cmd_train(train, std::cout);
    if (*eval_cmd) {
      if (!grids_path.empty()) eval.grids_path = grids_path;
      return ctkit::cmd_eval(eval, std::cout);
    }
    if (*predict_cmd) return ctkit::cmd_predict(predict, std::cout);
    if (*analyze_cmd) {
      if (!comments_path.empty()) analyze.comments = comments_path;
      if (!predictions_path.empty()) analyze.predictions = predictions_path;
      if (!watchlist_path.empty()) analyze.watchlist = watchlist_path;
      if (!domain_map_path.empty()) analyze.domain_map = domain_map_path;
      if (!stub_path.empty()) analyze.reputation_stub = stub_path;
      return ctkit::cmd_analyze(analyze, std::cout);
    }
  } catch (const ctkit::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const ctkit::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const ctkit::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ctkit::TrainError& e) {
    std::cerr << "training error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 70;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
