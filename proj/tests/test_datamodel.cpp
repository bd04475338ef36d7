#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <string>

#include "ctkit/errors.hpp"
#include "ctkit/features.hpp"
#include "ctkit/io.hpp"
#include "ctkit/learners.hpp"
#include "ctkit/rng.hpp"
#include "ctkit/synth.hpp"
#include "ctkit/text.hpp"

#include "test_support.hpp"

using namespace ctkit;

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ProfileRecord random_profile(Rng& rng, int i) {
  ProfileRecord p;
  p.user_id = "u" + std::to_string(i);
  p.username = "name" + std::to_string(rng.below(1000));
  p.fullname = "Fn Ln" + std::to_string(rng.below(10));
  p.biography = rng.bernoulli(0.5) ? "bio #tag @m \xF0\x9F\x94\xA5" : "";
  if (rng.bernoulli(0.3)) p.external_url = "https://example.com/" + std::to_string(i);
  p.followers = static_cast<std::int64_t>(rng.below(100000));
  p.following = static_cast<std::int64_t>(rng.below(100000));
  p.posts = static_cast<std::int64_t>(rng.below(5000));
  p.videos = static_cast<std::int64_t>(rng.below(500));
  p.is_private = rng.bernoulli(0.5);
  p.is_verified = rng.bernoulli(0.2);
  p.has_clips = rng.bernoulli(0.5);
  p.is_business = rng.bernoulli(0.2);
  p.has_category_name = rng.bernoulli(0.3);
  p.has_multiple_categories = rng.bernoulli(0.1);
  if (rng.bernoulli(0.8)) p.label = rng.bernoulli(0.5) ? Label::CT : Label::Real;
  if (rng.bernoulli(0.5)) p.source = "src" + std::to_string(rng.below(5));
  return p;
}

}  // namespace

TEST_CASE("read_profiles: single record, defaults, unknown fields ignored") {
  TempDir tmp;
  const auto path = tmp.file("one.jsonl");
  write_file(path,
             R"({"user_id":"a","username":"alice","followers":3,"extra_key":42})"
             "\n");
  const auto records = read_profiles(path);
  REQUIRE(records.size() == 1);
  CHECK(records[0].user_id == "a");
  CHECK(records[0].followers == 3);
  CHECK(records[0].following == 0);
  CHECK_FALSE(records[0].is_private);
  CHECK_FALSE(records[0].external_url.has_value());
  CHECK_FALSE(records[0].label.has_value());
}

TEST_CASE("read_profiles: empty file gives empty list") {
  TempDir tmp;
  const auto path = tmp.file("empty.jsonl");
  write_file(path, "");
  CHECK(read_profiles(path).empty());
}

TEST_CASE("read_profiles: malformed line error names the line") {
  TempDir tmp;
  const auto path = tmp.file("bad.jsonl");
  write_file(path,
             R"({"user_id":"a","username":"x"})"
             "\nnot json\n");
  CHECK_THROWS_WITH_AS(read_profiles(path), doctest::Contains("bad.jsonl:2"), DataError);
}

TEST_CASE("read_profiles: negative count error names field and row") {
  TempDir tmp;
  const auto path = tmp.file("neg.jsonl");
  write_file(path, R"({"user_id":"a","username":"x","followers":-2})"
                   "\n");
  CHECK_THROWS_WITH_AS(read_profiles(path),
                       doctest::Contains("'followers' is negative"), DataError);
  const auto where = tmp.file("neg2.jsonl");
  write_file(where, R"({"user_id":"a","username":"x"})"
                    "\n"
                    R"({"user_id":"b","username":"y","videos":-1})"
                    "\n");
  CHECK_THROWS_WITH_AS(read_profiles(where), doctest::Contains("neg2.jsonl:2"), DataError);
}

TEST_CASE("read_profiles rejects duplicate user ids") {
  TempDir tmp;
  const auto path = tmp.file("dup.jsonl");
  write_file(path, R"({"user_id":"a","username":"x"})"
                   "\n"
                   R"({"user_id":"a","username":"y"})"
                   "\n");
  CHECK_THROWS_AS(read_profiles(path), DataError);
}

TEST_CASE("profile round trip: synthetic export, field-by-field") {
  TempDir tmp;
  const auto profiles = generate_all_profiles(default_params(), default_aux(), 42);
  REQUIRE(profiles.size() == 2600);
  const auto path = tmp.file("profiles.jsonl");
  write_profiles(profiles, path);
  const auto back = read_profiles(path);
  REQUIRE(back.size() == profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    CHECK(back[i] == profiles[i]);
  }
  // Order preserved.
  CHECK(back.front().user_id == profiles.front().user_id);
  CHECK(back.back().user_id == profiles.back().user_id);
}

TEST_CASE("jsonl round trip holds for randomized records") {
  TempDir tmp;
  Rng rng(99);
  std::vector<ProfileRecord> profiles;
  for (int i = 0; i < 200; ++i) profiles.push_back(random_profile(rng, i));
  const auto path = tmp.file("rand.jsonl");
  write_profiles(profiles, path);
  CHECK(read_profiles(path) == profiles);
}

TEST_CASE("read_comments: passthrough and defaults") {
  TempDir tmp;
  const auto path = tmp.file("c.jsonl");
  write_file(path,
             "{\"comment_id\":\"c1\",\"author_id\":\"a\",\"post_id\":\"p\","
             "\"text\":\"nice \\ud83d\\udd25\"}\n");
  const auto comments = read_comments(path);
  REQUIRE(comments.size() == 1);
  CHECK_FALSE(comments[0].author_label.has_value());
  // One emoji scalar survives the JSON escape round trip.
  const auto cps = text::decode_utf8(comments[0].text);
  CHECK(std::count_if(cps.begin(), cps.end(),
                      [](char32_t c) { return text::is_emoji_scalar(c); }) == 1);
}

TEST_CASE("comment round trip is bit-exact") {
  TempDir tmp;
  std::vector<CommentRecord> comments;
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    CommentRecord c;
    c.comment_id = "c" + std::to_string(i);
    c.author_id = "a" + std::to_string(rng.below(20));
    c.post_id = "p" + std::to_string(rng.below(10));
    c.text = rng.bernoulli(0.5) ? "Nice pic! \xF0\x9F\x94\xA5\xF0\x9F\x94\xA5" : "ok";
    if (rng.bernoulli(0.5)) c.author_label = rng.bernoulli(0.5) ? Label::CT : Label::Real;
    if (rng.bernoulli(0.3)) c.language = "en";
    comments.push_back(c);
  }
  const auto path = tmp.file("comments.jsonl");
  write_comments(comments, path);
  const auto back = read_comments(path);
  CHECK(back == comments);
  const auto again = tmp.file("comments2.jsonl");
  write_comments(back, again);
  CHECK(read_file(path) == read_file(again));
}

TEST_CASE("matrix csv: zero rows, header only") {
  TempDir tmp;
  FeatureMatrix m;
  m.feature_names = canonical_feature_names();
  const auto path = tmp.file("m.csv");
  write_matrix(m, path);
  const auto content = read_file(path);
  CHECK(content.substr(0, 13) == "user_id,label");
  CHECK(std::count(content.begin(), content.end(), '\n') == 1);
  const auto back = read_matrix(path);
  CHECK(back.n_rows() == 0);
  CHECK(back.feature_names == canonical_feature_names());
}

TEST_CASE("matrix csv: write-read identity on random values") {
  TempDir tmp;
  Rng rng(5);
  FeatureMatrix m;
  m.feature_names = canonical_feature_names();
  m.labels.emplace();
  for (int i = 0; i < 10; ++i) {
    std::vector<double> row;
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      row.push_back(rng.normal(0.0, 1.0) * 1e3);
    }
    m.rows.push_back(row);
    m.row_ids.push_back("r" + std::to_string(i));
    m.labels->push_back(static_cast<int>(rng.below(2)));
  }
  const auto path = tmp.file("m.csv");
  write_matrix(m, path);
  const auto back = read_matrix(path);
  CHECK(back.feature_names == m.feature_names);
  CHECK(back.row_ids == m.row_ids);
  CHECK(back.labels == m.labels);
  for (int i = 0; i < 10; ++i) {
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      CHECK(back.rows[i][c] == m.rows[i][c]);  // exact, not approximate
    }
  }
}

TEST_CASE("matrix csv canonicalizes column order") {
  TempDir tmp;
  // Construct with two swapped columns; the file must come out canonical.
  FeatureMatrix m;
  m.feature_names = {"n_following", "n_followers"};
  m.rows = {{10.0, 20.0}};
  m.row_ids = {"a"};
  const auto path = tmp.file("perm.csv");
  write_matrix(m, path);
  const auto content = read_file(path);
  CHECK(content.find("user_id,label,n_followers,n_following") == 0);
  const auto back = read_matrix(path);
  CHECK(back.rows[0][0] == 20.0);  // n_followers
  CHECK(back.rows[0][1] == 10.0);
}

TEST_CASE("matrix csv header mismatch errors") {
  TempDir tmp;
  const auto path = tmp.file("bad.csv");
  write_file(path, "user_id,label,nope\na,1,3\n");
  CHECK_THROWS_AS(read_matrix(path), DataError);
  const auto swapped = tmp.file("swapped.csv");
  write_file(swapped, "user_id,label,n_following,n_followers\na,1,3,4\n");
  CHECK_THROWS_AS(read_matrix(swapped), DataError);
}

TEST_CASE("matrix csv: unlabeled uses -1 and reads back unlabeled") {
  TempDir tmp;
  FeatureMatrix m;
  m.feature_names = {"n_followers"};
  m.rows = {{1.0}, {2.0}};
  m.row_ids = {"a", "b"};
  const auto path = tmp.file("u.csv");
  write_matrix(m, path);
  CHECK(read_file(path).find(",-1,") != std::string::npos);
  CHECK_FALSE(read_matrix(path).labels.has_value());
}

namespace {

FeatureMatrix small_training_matrix(int n, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix m;
  m.feature_names = canonical_feature_names();
  m.labels.emplace();
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    std::vector<double> row;
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      row.push_back(rng.normal(label == 1 ? 1.0 : -1.0, 1.0));
    }
    m.rows.push_back(row);
    m.row_ids.push_back("r" + std::to_string(i));
    m.labels->push_back(label);
  }
  return m;
}

}  // namespace

TEST_CASE("model save/load: lr predictions agree to 1e-12") {
  TempDir tmp;
  const auto X = small_training_matrix(60, 21);
  ClassifierSpec spec;
  spec.kind = ModelKind::LR;
  const auto model = fit(spec, X, 7);
  const auto path = tmp.file("lr.json");
  save_model(model, path);
  const auto back = load_model(path);
  CHECK(back.lr_weights == model.lr_weights);  // bitwise parameter reload
  CHECK(back.lr_intercept == model.lr_intercept);
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x;
    for (std::size_t c = 0; c < kFeatureCount; ++c) x.push_back(rng.normal(0.0, 2.0));
    const auto a = predict_proba(model, x);
    const auto b = predict_proba(back, x);
    CHECK(std::fabs(a.p1 - b.p1) <= 1e-12);
    CHECK(std::fabs(a.p0 + a.p1 - 1.0) <= 1e-12);
  }
}

TEST_CASE("model save/load covers every kind with identical predictions") {
  TempDir tmp;
  const auto X = small_training_matrix(40, 22);
  Rng rng(14);
  std::vector<std::vector<double>> probes;
  for (int i = 0; i < 25; ++i) {
    std::vector<double> x;
    for (std::size_t c = 0; c < kFeatureCount; ++c) x.push_back(rng.normal(0.0, 2.0));
    probes.push_back(x);
  }
  for (ModelKind kind : {ModelKind::KNN, ModelKind::LR, ModelKind::DT, ModelKind::RF}) {
    ClassifierSpec spec;
    spec.kind = kind;
    spec.rf.n_estimators = 10;
    const auto model = fit(spec, X, 5);
    const auto path = tmp.file(std::string("m_") + kind_name(kind) + ".json");
    save_model(model, path);
    const auto back = load_model(path);
    for (const auto& x : probes) {
      CHECK(predict_proba(model, x).p1 == predict_proba(back, x).p1);
    }
  }
}

TEST_CASE("model file: unknown kind and arity mismatch rejected") {
  TempDir tmp;
  const auto path = tmp.file("svm.json");
  write_file(path, R"({"kind":"svm","hyperparameters":{}})");
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("unknown model kind"),
                       DataError);

  const auto X = small_training_matrix(30, 23);
  ClassifierSpec spec;
  spec.kind = ModelKind::LR;
  const auto model = fit(spec, X, 7);
  const auto good = tmp.file("lr.json");
  save_model(model, good);
  auto doc = read_file(good);
  // Drop one weight to break the arity.
  const auto pos = doc.find("\"weights\": [");
  REQUIRE(pos != std::string::npos);
  const auto comma = doc.find(',', pos);
  doc.erase(pos + 12, comma - (pos + 12) + 1);
  const auto bad = tmp.file("lr_bad.json");
  write_file(bad, doc);
  CHECK_THROWS_WITH_AS(load_model(bad), doctest::Contains("arity"), DataError);
}

TEST_CASE("rf model serializes one entry per tree") {
  TempDir tmp;
  const auto X = small_training_matrix(30, 24);
  ClassifierSpec spec;
  spec.kind = ModelKind::RF;
  spec.rf.n_estimators = 10;
  const auto model = fit(spec, X, 3);
  const auto path = tmp.file("rf.json");
  save_model(model, path);
  const auto doc = nlohmann::json::parse(read_file(path));
  CHECK(doc.at("parameters").at("trees").size() == 10);
  CHECK(doc.at("parameters").at("seeds").size() == 10);
}
