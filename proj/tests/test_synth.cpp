#include <doctest.h>

#include <cmath>
#include <set>

#include "ctkit/features.hpp"
#include "ctkit/io.hpp"
#include "ctkit/rng.hpp"
#include "ctkit/synth.hpp"

#include "test_support.hpp"

using namespace ctkit;

TEST_CASE("default params transcription") {
  const auto params = default_params();
  REQUIRE(params.size() == 12);

  std::size_t ct_total = 0;
  std::size_t ct_rows = 0;
  for (const auto& p : params) {
    if (p.label == Label::CT) {
      ++ct_rows;
      ct_total += p.count;
    }
  }
  CHECK(ct_rows == 11);
  CHECK(ct_total == 1293);

  const auto& real = params.back();
  CHECK(real.name == "Real");
  CHECK(real.label == Label::Real);
  CHECK(real.count == 1307);
  CHECK(real.followers_mean == 359.33);
  CHECK(real.following_mean == 571.24);
  CHECK(real.posts_mean == 279.09);
  CHECK(real.private_rate == 0.5792);
  CHECK(real.url_rate == 0.1444);

  const auto& ct2 = params[1];
  CHECK(ct2.name == "CT-2");
  CHECK(ct2.private_rate == 0.0);
  CHECK(ct2.url_rate == 0.0);
  CHECK(ct2.followers_mean == 44.61);
  CHECK(ct2.following_mean == 4679.75);

  const auto& low = params[10];
  CHECK(low.name == "Low quality");
  CHECK(low.posts_mean == 1.88);
  CHECK(low.posts_std == 6.15);
}

TEST_CASE("zero std pins every sample at the rounded mean") {
  auto params = default_params()[0];
  params.count = 50;
  params.followers_mean = 42.4;
  params.followers_std = 0.0;
  const auto profiles = generate_profiles(params, default_aux(), 9);
  for (const auto& p : profiles) CHECK(p.followers == 42);
}

TEST_CASE("CT-2 rates of zero produce no private profiles or urls") {
  auto params = default_params()[1];
  params.count = 2000;
  const auto profiles = generate_profiles(params, default_aux(), 5);
  for (const auto& p : profiles) {
    CHECK_FALSE(p.is_private);
    CHECK_FALSE(p.external_url.has_value());
    CHECK(p.label == Label::CT);
    CHECK(p.source == "CT-2");
  }
}

TEST_CASE("sample means track the configured parameters (law of large numbers)") {
  for (std::size_t row : {std::size_t{1}, std::size_t{11}}) {  // CT-2 and Real
    auto params = default_params()[row];
    params.count = 10000;
    const auto profiles = generate_profiles(params, default_aux(), 1234 + row);
    double followers = 0.0;
    double following = 0.0;
    double posts = 0.0;
    double priv = 0.0;
    for (const auto& p : profiles) {
      followers += static_cast<double>(p.followers);
      following += static_cast<double>(p.following);
      posts += static_cast<double>(p.posts);
      priv += p.is_private ? 1.0 : 0.0;
    }
    const double n = static_cast<double>(params.count);
    const double root_n = std::sqrt(n);
    CHECK(std::fabs(followers / n - params.followers_mean) <
          3.0 * params.followers_std / root_n + 0.5);
    CHECK(std::fabs(following / n - params.following_mean) <
          3.0 * params.following_std / root_n + 0.5);
    CHECK(std::fabs(posts / n - params.posts_mean) <
          3.0 * params.posts_std / root_n + 0.5);
    CHECK(std::fabs(priv / n - params.private_rate) <
          3.0 * std::sqrt(params.private_rate * (1.0 - params.private_rate) / n) + 1e-12);
  }
}

TEST_CASE("counts are never negative and ids are unique") {
  const auto profiles = generate_all_profiles(default_params(), default_aux(), 3);
  std::set<std::string> ids;
  for (const auto& p : profiles) {
    CHECK(p.followers >= 0);
    CHECK(p.following >= 0);
    CHECK(p.posts >= 0);
    CHECK(p.videos >= 0);
    CHECK(p.videos <= p.posts);
    CHECK_FALSE(p.username.empty());
    CHECK(ids.insert(p.user_id).second);
  }
}

TEST_CASE("generate_dataset: exact class counts and determinism") {
  const auto a = generate_dataset(42);
  CHECK(a.n_rows() == 2600);
  CHECK(a.class_counts.at(1) == 1293);
  CHECK(a.class_counts.at(0) == 1307);

  const auto b = generate_dataset(42);
  CHECK(a.matrix.rows == b.matrix.rows);
  CHECK(a.matrix.row_ids == b.matrix.row_ids);

  const auto c = generate_dataset(43);
  CHECK(c.class_counts == a.class_counts);
  CHECK(c.matrix.rows != a.matrix.rows);
}

TEST_CASE("provider params json round trip") {
  TempDir tmp;
  const auto params = default_params();
  const auto path = tmp.file("params.json");
  save_provider_params(params, path);
  const auto back = load_provider_params(path);
  REQUIRE(back.size() == params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    CHECK(back[i].name == params[i].name);
    CHECK(back[i].label == params[i].label);
    CHECK(back[i].followers_mean == params[i].followers_mean);
    CHECK(back[i].followers_std == params[i].followers_std);
    CHECK(back[i].following_mean == params[i].following_mean);
    CHECK(back[i].posts_std == params[i].posts_std);
    CHECK(back[i].private_rate == params[i].private_rate);
    CHECK(back[i].url_rate == params[i].url_rate);
    CHECK(back[i].count == params[i].count);
    CHECK(back[i].followers_received == params[i].followers_received);
  }
}

TEST_CASE("label-conditioned aux fields differ between groups in aggregate") {
  const auto profiles = generate_all_profiles(default_params(), default_aux(), 8);
  double ct_digits = 0.0;
  double real_digits = 0.0;
  std::size_t ct_n = 0;
  std::size_t real_n = 0;
  for (const auto& p : profiles) {
    const auto f = extract_features(p);
    if (*p.label == Label::CT) {
      ct_digits += f[5];
      ++ct_n;
    } else {
      real_digits += f[5];
      ++real_n;
    }
  }
  CHECK(ct_digits / static_cast<double>(ct_n) >
        real_digits / static_cast<double>(real_n));
}
