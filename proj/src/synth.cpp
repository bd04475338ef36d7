#include "ctkit/synth.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ctkit/errors.hpp"
#include "ctkit/features.hpp"
#include "ctkit/rng.hpp"

namespace ctkit {

std::vector<ProviderParams> default_params() {
  // {name, label, followers m/s, following m/s, posts m/s, private, url,
  //  count, price, delivery, drop, received, one_month}
  return {
      {"CT-1", Label::CT, 409.59, 1110.46, 812.38, 1331.52, 14.83, 57.98, 0.0013,
       0.0008, 115, "$5.69", "Instant", true, 115, 74},
      {"CT-2", Label::CT, 44.61, 106.85, 4679.75, 1452.19, 16.0, 8.06, 0.0, 0.0,
       211, "$2.39", "5-10m", false, 211, 340},
      {"CT-3", Label::CT, 132.17, 327.28, 3027.08, 1883.18, 20.19, 55.99, 0.0005,
       0.0009, 111, "$2.95", "Instant", true, 111, 85},
      {"CT-4", Label::CT, 239.45, 262.64, 2735.6, 1286.65, 111.95, 332.2, 0.0045,
       0.0001, 100, "$2", "Instant", false, 100, 42},
      {"CT-5", Label::CT, 201.43, 214.0, 3510.77, 2316.12, 16.06, 12.13, 0.0,
       0.00054, 79, "$3.95", "Gradual", true, 79, 61},
      {"CT-6", Label::CT, 36.79, 39.64, 2398.88, 2191.18, 14.06, 5.69, 0.0, 0.0,
       136, "$2.89", "24-72h", true, 136, 129},
      {"CT-7", Label::CT, 39.23, 73.32, 3966.36, 761.16, 19.74, 20.13, 0.0, 0.0,
       108, "$2.70", "1h", true, 108, 109},
      {"CT-8", Label::CT, 57.52, 138.97, 1818.84, 1353.95, 29.75, 41.09, 0.0004,
       0.0001, 110, "$5.78", "Gradual", false, 110, 95},
      {"CT-9", Label::CT, 129.54, 759.85, 2012.93, 1198.17, 26.99, 74.94, 0.0006,
       0.0, 109, "$3.95", "12h", false, 109, 99},
      {"CT-10", Label::CT, 83.38, 174.57, 2118.31, 1323.78, 40.28, 51.5, 0.0003,
       0.0, 97, "$5.94", "Gradual", false, 97, 94},
      {"Low quality", Label::CT, 87.26, 276.26, 3200.67, 3041.89, 1.88, 6.15,
       0.0004, 0.0002, 117, "$0.80", "24-72h", false, 117, 96},
      {"Real", Label::Real, 359.33, 237.87, 571.24, 517.53, 279.09, 369.67,
       0.5792, 0.1444, 1307, "", "", false, 0, 0},
  };
}

AuxParams default_aux() {
  AuxParams aux;
  aux.videos_fraction_of_posts = 0.2;
  aux.ct.username_length = {9, 18};
  aux.ct.digit_count = {0, 5};
  aux.ct.fullname_length = {5, 16};
  aux.ct.bio_length = {0, 70};
  aux.ct.hashtag_mentions = {0, 2};
  aux.ct.fullname_symbol_rate = 0.45;
  aux.ct.verified_rate = 0.003;
  aux.ct.clips_rate = 0.20;
  aux.ct.business_rate = 0.03;
  aux.ct.category_rate = 0.04;
  aux.ct.multi_category_rate = 0.30;
  aux.real.username_length = {6, 14};
  aux.real.digit_count = {0, 2};
  aux.real.fullname_length = {7, 20};
  aux.real.bio_length = {10, 150};
  aux.real.hashtag_mentions = {0, 4};
  aux.real.fullname_symbol_rate = 0.10;
  aux.real.verified_rate = 0.05;
  aux.real.clips_rate = 0.50;
  aux.real.business_rate = 0.15;
  aux.real.category_rate = 0.18;
  aux.real.multi_category_rate = 0.30;
  return aux;
}

namespace {

using nlohmann::json;

json params_to_json(const ProviderParams& p) {
  return json{{"name", p.name},
              {"label", label_name(p.label)},
              {"followers_mean", p.followers_mean},
              {"followers_std", p.followers_std},
              {"following_mean", p.following_mean},
              {"following_std", p.following_std},
              {"posts_mean", p.posts_mean},
              {"posts_std", p.posts_std},
              {"private_rate", p.private_rate},
              {"url_rate", p.url_rate},
              {"count", p.count},
              {"price", p.price},
              {"delivery_time", p.delivery_time},
              {"drop_protection", p.drop_protection},
              {"followers_received", p.followers_received},
              {"followers_one_month", p.followers_one_month}};
}

ProviderParams params_from_json(const json& j) {
  ProviderParams p;
  p.name = j.at("name").get<std::string>();
  const auto label = parse_label(j.at("label").get<std::string>());
  if (!label) throw DataError("provider params: unknown label for " + p.name);
  p.label = *label;
  p.followers_mean = j.at("followers_mean").get<double>();
  p.followers_std = j.at("followers_std").get<double>();
  p.following_mean = j.at("following_mean").get<double>();
  p.following_std = j.at("following_std").get<double>();
  p.posts_mean = j.at("posts_mean").get<double>();
  p.posts_std = j.at("posts_std").get<double>();
  p.private_rate = j.at("private_rate").get<double>();
  p.url_rate = j.at("url_rate").get<double>();
  p.count = j.at("count").get<std::size_t>();
  p.price = j.value("price", "");
  p.delivery_time = j.value("delivery_time", "");
  p.drop_protection = j.value("drop_protection", false);
  p.followers_received = j.value("followers_received", 0);
  p.followers_one_month = j.value("followers_one_month", 0);
  if (p.followers_std < 0 || p.following_std < 0 || p.posts_std < 0) {
    throw DataError("provider params: negative std for " + p.name);
  }
  if (p.private_rate < 0 || p.private_rate > 1 || p.url_rate < 0 || p.url_rate > 1) {
    throw DataError("provider params: rate out of [0,1] for " + p.name);
  }
  return p;
}

}  // namespace

std::vector<ProviderParams> load_provider_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open params file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError("invalid params JSON in " + path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw DataError("params file must hold a JSON array");
  std::vector<ProviderParams> out;
  for (const auto& j : doc) out.push_back(params_from_json(j));
  return out;
}

void save_provider_params(const std::vector<ProviderParams>& params,
                          const std::filesystem::path& path) {
  json doc = json::array();
  for (const auto& p : params) doc.push_back(params_to_json(p));
  std::ofstream out(path);
  if (!out) throw DataError("cannot write params file: " + path.string());
  out << doc.dump(2) << '\n';
}

namespace {

constexpr const char* kLetters = "abcdefghijklmnopqrstuvwxyz";

std::string random_letters(Rng& rng, int n) {
  std::string s;
  s.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s.push_back(kLetters[rng.below(26)]);
  return s;
}

std::string slug(const std::string& name) {
  std::string s;
  for (char c : name) {
    if (c >= 'A' && c <= 'Z') {
      s.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (c == ' ') {
      s.push_back('-');
    } else {
      s.push_back(c);
    }
  }
  return s;
}

int sample_range(Rng& rng, const IntRange& r) {
  if (r.lo > r.hi) throw ConfigError("aux params: empty integer range");
  return static_cast<int>(rng.uniform_int(r.lo, r.hi));
}

std::int64_t sample_count(const TruncatedNormal& tn, Rng& rng) {
  const auto v = static_cast<std::int64_t>(std::llround(tn.sample(rng)));
  return v < 0 ? 0 : v;
}

std::string make_username(Rng& rng, const LabelAux& aux) {
  const int len = std::max(1, sample_range(rng, aux.username_length));
  const int digits = std::min(sample_range(rng, aux.digit_count), len);
  std::string name = random_letters(rng, len);
  // Scatter the digit characters over distinct positions.
  std::vector<std::size_t> pos(name.size());
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
  rng.shuffle(pos);
  for (int i = 0; i < digits; ++i) {
    name[pos[static_cast<std::size_t>(i)]] = static_cast<char>('0' + rng.below(10));
  }
  return name;
}

std::string make_fullname(Rng& rng, const LabelAux& aux) {
  const int len = std::max(3, sample_range(rng, aux.fullname_length));
  const int first = std::max(1, (len - 1) / 2);
  const int last = std::max(1, len - 1 - first);
  std::string name = random_letters(rng, first);
  name[0] = static_cast<char>(name[0] - 'a' + 'A');
  name += ' ';
  std::string surname = random_letters(rng, last);
  surname[0] = static_cast<char>(surname[0] - 'a' + 'A');
  name += surname;
  if (rng.bernoulli(aux.fullname_symbol_rate)) {
    name.push_back(static_cast<char>('0' + rng.below(10)));
  }
  return name;
}

std::string make_biography(Rng& rng, const LabelAux& aux) {
  const int target = sample_range(rng, aux.bio_length);
  const int tags = sample_range(rng, aux.hashtag_mentions);
  std::vector<std::string> tokens;
  for (int i = 0; i < tags; ++i) {
    std::string t(1, rng.bernoulli(0.5) ? '#' : '@');
    t += random_letters(rng, static_cast<int>(rng.uniform_int(3, 7)));
    tokens.push_back(std::move(t));
  }
  int length = 0;
  for (const auto& t : tokens) length += static_cast<int>(t.size()) + 1;
  while (length < target) {
    std::string w = random_letters(rng, static_cast<int>(rng.uniform_int(3, 8)));
    length += static_cast<int>(w.size()) + 1;
    tokens.push_back(std::move(w));
  }
  rng.shuffle(tokens);
  std::string bio;
  for (const auto& t : tokens) {
    if (!bio.empty()) bio.push_back(' ');
    bio += t;
  }
  return bio;
}

}  // namespace

std::vector<ProfileRecord> generate_profiles(const ProviderParams& params,
                                             const AuxParams& aux, std::uint64_t seed) {
  if (params.count < 1) throw ConfigError("generate_profiles: count must be >= 1");
  const LabelAux& la = params.label == Label::CT ? aux.ct : aux.real;
  const TruncatedNormal followers(params.followers_mean, params.followers_std);
  const TruncatedNormal following(params.following_mean, params.following_std);
  const TruncatedNormal posts(params.posts_mean, params.posts_std);
  Rng rng(seed);
  const std::string prefix = slug(params.name);

  std::vector<ProfileRecord> out;
  out.reserve(params.count);
  for (std::size_t i = 0; i < params.count; ++i) {
    ProfileRecord p;
    p.user_id = prefix + "-" + std::to_string(i);
    p.source = params.name;
    p.label = params.label;
    p.followers = sample_count(followers, rng);
    p.following = sample_count(following, rng);
    p.posts = sample_count(posts, rng);
    std::int64_t videos = 0;
    for (std::int64_t v = 0; v < p.posts; ++v) {
      if (rng.bernoulli(aux.videos_fraction_of_posts)) ++videos;
    }
    p.videos = videos;
    p.username = make_username(rng, la);
    p.fullname = make_fullname(rng, la);
    p.biography = make_biography(rng, la);
    p.is_private = rng.bernoulli(params.private_rate);
    if (rng.bernoulli(params.url_rate)) {
      p.external_url = "https://example.com/" + p.user_id;
    }
    p.is_verified = rng.bernoulli(la.verified_rate);
    p.has_clips = rng.bernoulli(la.clips_rate);
    p.is_business = rng.bernoulli(la.business_rate);
    p.has_category_name = rng.bernoulli(la.category_rate);
    p.has_multiple_categories =
        p.has_category_name && rng.bernoulli(la.multi_category_rate);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ProfileRecord> generate_all_profiles(const std::vector<ProviderParams>& params,
                                                 const AuxParams& aux, std::uint64_t seed) {
  std::vector<ProfileRecord> all;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto batch = generate_profiles(params[i], aux, Rng::derive(seed, 0x90E0u + i));
    all.insert(all.end(), std::make_move_iterator(batch.begin()),
               std::make_move_iterator(batch.end()));
  }
  Rng shuffler(Rng::derive(seed, 0x5FF1Eu));
  shuffler.shuffle(all);
  return all;
}

Dataset generate_dataset(std::uint64_t seed) {
  const auto profiles = generate_all_profiles(default_params(), default_aux(), seed);
  return Dataset::from_matrix(extract_matrix(profiles));
}

}  // namespace ctkit
