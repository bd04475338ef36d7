#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ctkit/commands.hpp"
#include "ctkit/digest.hpp"
#include "ctkit/errors.hpp"
#include "ctkit/io.hpp"
#include "ctkit/synth.hpp"

#include "test_support.hpp"

using namespace ctkit;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t line_count(const std::filesystem::path& p) {
  const auto content = slurp(p);
  return static_cast<std::size_t>(std::count(content.begin(), content.end(), '\n'));
}

// Small two-source params file so command tests stay quick.
std::filesystem::path write_small_params(const TempDir& tmp, std::size_t ct_count,
                                         std::size_t real_count) {
  auto params = default_params();
  std::vector<ProviderParams> small{params[1], params.back()};  // CT-2 + Real
  small[0].count = ct_count;
  small[1].count = real_count;
  const auto path = tmp.file("params.json");
  save_provider_params(small, path);
  return path;
}

}  // namespace

TEST_CASE("cmd_synth: default run writes the full dataset") {
  TempDir tmp;
  SynthOptions opt;
  opt.out_dir = tmp.file("out");
  opt.seed = 42;
  std::ostringstream log;
  REQUIRE(cmd_synth(opt, log) == 0);
  CHECK(line_count(opt.out_dir / "profiles.jsonl") == 2600);
  CHECK(line_count(opt.out_dir / "matrix.csv") == 2601);
  CHECK(log.str().find("ct=1293") != std::string::npos);
  CHECK(std::filesystem::exists(opt.out_dir / "manifest.json"));

  // Identical rerun produces identical bytes.
  SynthOptions again = opt;
  again.out_dir = tmp.file("out2");
  std::ostringstream log2;
  REQUIRE(cmd_synth(again, log2) == 0);
  CHECK(file_digest(opt.out_dir / "profiles.jsonl") ==
        file_digest(again.out_dir / "profiles.jsonl"));
  CHECK(file_digest(opt.out_dir / "matrix.csv") ==
        file_digest(again.out_dir / "matrix.csv"));

  SynthOptions other = opt;
  other.out_dir = tmp.file("out3");
  other.seed = 1;
  std::ostringstream log3;
  REQUIRE(cmd_synth(other, log3) == 0);
  CHECK(file_digest(opt.out_dir / "profiles.jsonl") !=
        file_digest(other.out_dir / "profiles.jsonl"));
}

TEST_CASE("cmd_synth: custom params control the row count") {
  TempDir tmp;
  auto params = default_params();
  std::vector<ProviderParams> custom{params[0], params.back()};
  custom[0].count = 5;
  const auto params_path = tmp.file("custom.json");
  save_provider_params(custom, params_path);

  SynthOptions opt;
  opt.out_dir = tmp.file("out");
  opt.seed = 7;
  opt.params_path = params_path;
  std::ostringstream log;
  REQUIRE(cmd_synth(opt, log) == 0);
  CHECK(line_count(opt.out_dir / "profiles.jsonl") == 5 + 1307);
}

TEST_CASE("cmd_train: full pipeline on a small dataset") {
  TempDir tmp;
  SynthOptions synth;
  synth.out_dir = tmp.file("data");
  synth.seed = 11;
  synth.params_path = write_small_params(tmp, 150, 150);
  std::ostringstream slog;
  REQUIRE(cmd_synth(synth, slog) == 0);

  TrainOptions opt;
  opt.data = synth.out_dir / "profiles.jsonl";
  opt.out_dir = tmp.file("model");
  opt.model_kind = "dt";
  opt.labeled_fraction = 0.2;
  opt.seed = 3;
  std::ostringstream log;
  REQUIRE(cmd_train(opt, log) == 0);
  CHECK(std::filesystem::exists(opt.out_dir / "model.json"));
  CHECK(std::filesystem::exists(opt.out_dir / "selftrain_report.json"));

  const auto manifest = nlohmann::json::parse(slurp(opt.out_dir / "manifest.json"));
  CHECK(manifest.at("options").at("threshold").get<double>() == 0.75);
  CHECK(manifest.at("command") == "train");

  // Byte-identical rerun.
  TrainOptions again = opt;
  again.out_dir = tmp.file("model2");
  std::ostringstream log2;
  REQUIRE(cmd_train(again, log2) == 0);
  CHECK(file_digest(opt.out_dir / "model.json") ==
        file_digest(again.out_dir / "model.json"));
  CHECK(file_digest(opt.out_dir / "selftrain_report.json") ==
        file_digest(again.out_dir / "selftrain_report.json"));
}

TEST_CASE("cmd_train: supervised run exhausts immediately") {
  TempDir tmp;
  SynthOptions synth;
  synth.out_dir = tmp.file("data");
  synth.seed = 12;
  synth.params_path = write_small_params(tmp, 100, 100);
  std::ostringstream slog;
  REQUIRE(cmd_synth(synth, slog) == 0);

  TrainOptions opt;
  opt.data = synth.out_dir / "profiles.jsonl";
  opt.out_dir = tmp.file("model");
  opt.model_kind = "dt";
  opt.labeled_fraction = 1.0;
  std::ostringstream log;
  REQUIRE(cmd_train(opt, log) == 0);
  const auto report = nlohmann::json::parse(slurp(opt.out_dir / "selftrain_report.json"));
  CHECK(report.at("cycles_run").get<int>() == 1);
  CHECK(report.at("termination") == "exhausted_unlabeled");
}

TEST_CASE("cmd_predict: memorizing tree reproduces training labels") {
  TempDir tmp;
  SynthOptions synth;
  synth.out_dir = tmp.file("data");
  synth.seed = 13;
  synth.params_path = write_small_params(tmp, 120, 120);
  std::ostringstream slog;
  REQUIRE(cmd_synth(synth, slog) == 0);

  TrainOptions train;
  train.data = synth.out_dir / "profiles.jsonl";
  train.out_dir = tmp.file("model");
  train.model_kind = "dt";
  train.labeled_fraction = 1.0;
  train.test_fraction = 0.5;  // memorization is checked on the training half below
  std::ostringstream tlog;
  REQUIRE(cmd_train(train, tlog) == 0);

  PredictOptions predict;
  predict.model = train.out_dir / "model.json";
  predict.profiles = synth.out_dir / "profiles.jsonl";
  predict.out = tmp.file("preds") / "predictions.csv";
  std::ostringstream plog;
  REQUIRE(cmd_predict(predict, plog) == 0);

  // Recount the CT fraction from the rows and compare with the summary.
  const auto profiles = read_profiles(predict.profiles);
  std::map<std::string, int> truth;
  for (const auto& p : profiles) truth[p.user_id] = p.label == Label::CT ? 1 : 0;

  std::ifstream in(predict.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "user_id,p_ct,label");
  std::size_t rows = 0;
  std::size_t ct = 0;
  std::size_t agree = 0;
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.rfind(',');
    const std::string id = line.substr(0, c1);
    const int label = line.substr(c2 + 1) == "1" ? 1 : 0;
    ++rows;
    ct += static_cast<std::size_t>(label);
    agree += truth.at(id) == label ? 1u : 0u;
  }
  CHECK(rows == profiles.size());
  // An unbounded tree memorizes at least its own training half.
  CHECK(agree >= rows / 2);
  const double fraction = static_cast<double>(ct) / static_cast<double>(rows);
  std::ostringstream want;
  want << "ct_fraction=" << format_double(fraction);
  CHECK(plog.str().find(want.str()) != std::string::npos);
}

TEST_CASE("cmd_predict: empty profile file gives an empty csv") {
  TempDir tmp;
  SynthOptions synth;
  synth.out_dir = tmp.file("data");
  synth.seed = 14;
  synth.params_path = write_small_params(tmp, 60, 60);
  std::ostringstream slog;
  REQUIRE(cmd_synth(synth, slog) == 0);
  TrainOptions train;
  train.data = synth.out_dir / "profiles.jsonl";
  train.out_dir = tmp.file("model");
  train.model_kind = "dt";
  train.labeled_fraction = 1.0;
  std::ostringstream tlog;
  REQUIRE(cmd_train(train, tlog) == 0);

  const auto empty = tmp.file("empty.jsonl");
  std::ofstream(empty).close();
  PredictOptions predict;
  predict.model = train.out_dir / "model.json";
  predict.profiles = empty;
  predict.out = tmp.file("p.csv");
  std::ostringstream plog;
  REQUIRE(cmd_predict(predict, plog) == 0);
  CHECK(line_count(predict.out) == 1);  // header only
  CHECK(plog.str().find("profiles=0 ct=0") != std::string::npos);
}

TEST_CASE("cmd_eval: one-spec grid, supervised-only fractions") {
  TempDir tmp;
  SynthOptions synth;
  synth.out_dir = tmp.file("data");
  synth.seed = 15;
  synth.params_path = write_small_params(tmp, 100, 100);
  std::ostringstream slog;
  REQUIRE(cmd_synth(synth, slog) == 0);

  const auto grids_path = tmp.file("grids.json");
  {
    std::ofstream out(grids_path);
    out << R"({"dt":[{"max_depth":3,"min_samples_leaf":1},{"max_depth":5,"min_samples_leaf":1}]})";
  }

  EvalOptions opt;
  opt.data = synth.out_dir / "profiles.jsonl";
  opt.out_dir = tmp.file("eval");
  opt.grids_path = grids_path;
  opt.fractions = {1.0};
  opt.k = 3;
  opt.seed = 4;
  std::ostringstream log;
  REQUIRE(cmd_eval(opt, log) == 0);

  const auto table = nlohmann::json::parse(slurp(opt.out_dir / "grid_table.json"));
  CHECK(table.at("cells").size() == 2);  // 2 specs x 1 fraction
  for (const auto& cell : table.at("cells")) {
    CHECK(cell.at("labels_used") == "supervised");
    CHECK(cell.at("valid_macro_f1").contains("mean"));
    CHECK(cell.at("valid_macro_f1").contains("std"));
  }
  const auto selection = nlohmann::json::parse(slurp(opt.out_dir / "model_selection.json"));
  CHECK(selection.at("rows").size() == 1);  // one kind x one fraction
  CHECK(selection.at("averaging") == "macro");
  CHECK(std::filesystem::exists(opt.out_dir / "best_spec.json"));

  // Deterministic rerun: identical table bytes.
  EvalOptions again = opt;
  again.out_dir = tmp.file("eval2");
  std::ostringstream log2;
  REQUIRE(cmd_eval(again, log2) == 0);
  CHECK(file_digest(opt.out_dir / "grid_table.csv") ==
        file_digest(again.out_dir / "grid_table.csv"));
}

TEST_CASE("cmd_analyze: partial inputs skip only the dependent reports") {
  TempDir tmp;
  SynthOptions synth;
  synth.out_dir = tmp.file("data");
  synth.seed = 16;
  synth.params_path = write_small_params(tmp, 80, 80);
  std::ostringstream slog;
  REQUIRE(cmd_synth(synth, slog) == 0);

  AnalyzeOptions opt;
  opt.profiles = synth.out_dir / "profiles.jsonl";
  opt.out_dir = tmp.file("reports");
  std::ostringstream log;
  REQUIRE(cmd_analyze(opt, log) == 0);

  for (const char* name : {"tier_stats.json", "following_histogram.json",
                           "biography_scan.json", "url_report.json"}) {
    CHECK(std::filesystem::exists(opt.out_dir / name));
  }
  for (const char* name : {"stylometry.json", "comments_per_user.json",
                           "word_frequencies.json"}) {
    CHECK_FALSE(std::filesystem::exists(opt.out_dir / name));
  }
  const auto manifest = nlohmann::json::parse(slurp(opt.out_dir / "manifest.json"));
  bool noticed = false;
  for (const auto& n : manifest.at("notices")) {
    if (n.get<std::string>().find("stylometry") != std::string::npos) noticed = true;
  }
  CHECK(noticed);
}

TEST_CASE("cmd_analyze: full bundle emits all seven reports") {
  TempDir tmp;
  SynthOptions synth;
  synth.out_dir = tmp.file("data");
  synth.seed = 17;
  synth.params_path = write_small_params(tmp, 80, 80);
  std::ostringstream slog;
  REQUIRE(cmd_synth(synth, slog) == 0);

  // Build a comment file whose authors join to profile ids.
  const auto profiles = read_profiles(synth.out_dir / "profiles.jsonl");
  std::vector<CommentRecord> comments;
  int i = 0;
  for (const auto& p : profiles) {
    CommentRecord c;
    c.comment_id = "c" + std::to_string(i++);
    c.author_id = p.user_id;
    c.post_id = "post";
    c.text = p.label == Label::CT ? "follow me \xF0\x9F\x94\xA5" : "What a great shot! Love it";
    comments.push_back(c);
  }
  const auto comments_path = tmp.file("comments.jsonl");
  write_comments(comments, comments_path);

  AnalyzeOptions opt;
  opt.profiles = synth.out_dir / "profiles.jsonl";
  opt.comments = comments_path;
  opt.out_dir = tmp.file("reports");
  std::ostringstream log;
  REQUIRE(cmd_analyze(opt, log) == 0);

  const std::vector<std::string> reports{
      "tier_stats", "following_histogram", "biography_scan",   "url_report",
      "stylometry", "comments_per_user",   "word_frequencies",
  };
  for (const auto& name : reports) {
    CHECK(std::filesystem::exists(opt.out_dir / (name + ".json")));
    CHECK(std::filesystem::exists(opt.out_dir / (name + ".csv")));
  }

  // Provenance: a rerun with identical inputs reproduces the manifest; a
  // changed input changes it (the flags, including the output dir, are held
  // fixed so the comparison isolates the input digests).
  const auto manifest_before = file_digest(opt.out_dir / "manifest.json");
  const auto stylometry_before = file_digest(opt.out_dir / "stylometry.json");
  std::ostringstream log2;
  REQUIRE(cmd_analyze(opt, log2) == 0);
  CHECK(file_digest(opt.out_dir / "manifest.json") == manifest_before);

  comments.front().text += "!";
  write_comments(comments, comments_path);
  std::ostringstream log3;
  REQUIRE(cmd_analyze(opt, log3) == 0);
  CHECK(file_digest(opt.out_dir / "manifest.json") != manifest_before);
  CHECK(file_digest(opt.out_dir / "stylometry.json") != stylometry_before);
}

TEST_CASE("error categories map to the documented exit codes") {
  TempDir tmp;
  TrainOptions opt;
  opt.data = tmp.file("missing.jsonl");
  opt.out_dir = tmp.file("out");
  std::ostringstream log;
  CHECK_THROWS_AS(cmd_train(opt, log), DataError);

  SynthOptions synth;
  synth.out_dir = tmp.file("data");
  synth.seed = 18;
  synth.params_path = write_small_params(tmp, 40, 40);
  std::ostringstream slog;
  REQUIRE(cmd_synth(synth, slog) == 0);
  opt.data = synth.out_dir / "profiles.jsonl";
  opt.model_kind = "boosted-stumps";
  CHECK_THROWS_AS(cmd_train(opt, log), UsageError);
}
