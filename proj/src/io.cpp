#include "ctkit/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "ctkit/errors.hpp"
#include "ctkit/version.hpp"

namespace ctkit {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const std::string& context) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError(context + ": invalid number '" + std::string(s) + "'");
  }
  return v;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("short write: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename " + tmp.string() + " -> " + path.string());
}

namespace {

std::string line_context(const std::filesystem::path& path, std::size_t line_no) {
  return path.filename().string() + ":" + std::to_string(line_no);
}

std::int64_t read_count_field(const json& j, const char* field,
                              const std::string& context) {
  if (!j.contains(field)) return 0;
  const auto& v = j.at(field);
  if (!v.is_number_integer()) {
    throw DataError(context + ": field '" + field + "' must be an integer");
  }
  const auto n = v.get<std::int64_t>();
  if (n < 0) throw DataError(context + ": field '" + field + "' is negative");
  return n;
}

std::optional<Label> read_label_field(const json& j, const char* field,
                                      const std::string& context) {
  if (!j.contains(field) || j.at(field).is_null()) return std::nullopt;
  const auto text = j.at(field).get<std::string>();
  const auto label = parse_label(text);
  if (!label) throw DataError(context + ": unknown label '" + text + "'");
  return label;
}

template <typename RecordParser>
auto read_jsonl(const std::filesystem::path& path, RecordParser parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  std::vector<decltype(parse(json{}, std::string{}))> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(line_context(path, line_no) + ": malformed JSON: " + e.what());
    }
    out.push_back(parse(j, line_context(path, line_no)));
  }
  return out;
}

}  // namespace

std::vector<ProfileRecord> read_profiles(const std::filesystem::path& path) {
  std::set<std::string> seen_ids;
  auto records = read_jsonl(path, [&](const json& j, const std::string& ctx) {
    ProfileRecord p;
    p.user_id = j.value("user_id", "");
    if (p.user_id.empty()) throw DataError(ctx + ": missing user_id");
    if (!seen_ids.insert(p.user_id).second) {
      throw DataError(ctx + ": duplicate user_id '" + p.user_id + "'");
    }
    p.username = j.value("username", "");
    if (p.username.empty()) throw DataError(ctx + ": missing username");
    p.fullname = j.value("fullname", "");
    p.biography = j.value("biography", "");
    if (j.contains("external_url") && !j.at("external_url").is_null()) {
      p.external_url = j.at("external_url").get<std::string>();
    }
    p.followers = read_count_field(j, "followers", ctx);
    p.following = read_count_field(j, "following", ctx);
    p.posts = read_count_field(j, "posts", ctx);
    p.videos = read_count_field(j, "videos", ctx);
    p.is_private = j.value("is_private", false);
    p.is_verified = j.value("is_verified", false);
    p.has_clips = j.value("has_clips", false);
    p.is_business = j.value("is_business", false);
    p.has_category_name = j.value("has_category_name", false);
    p.has_multiple_categories = j.value("has_multiple_categories", false);
    p.label = read_label_field(j, "label", ctx);
    if (j.contains("source") && !j.at("source").is_null()) {
      p.source = j.at("source").get<std::string>();
    }
    return p;
  });
  return records;
}

void write_profiles(const std::vector<ProfileRecord>& profiles,
                    const std::filesystem::path& path) {
  std::string buffer;
  for (const auto& p : profiles) {
    ordered_json j;
    j["user_id"] = p.user_id;
    j["username"] = p.username;
    j["fullname"] = p.fullname;
    j["biography"] = p.biography;
    if (p.external_url) j["external_url"] = *p.external_url;
    j["followers"] = p.followers;
    j["following"] = p.following;
    j["posts"] = p.posts;
    j["videos"] = p.videos;
    j["is_private"] = p.is_private;
    j["is_verified"] = p.is_verified;
    j["has_clips"] = p.has_clips;
    j["is_business"] = p.is_business;
    j["has_category_name"] = p.has_category_name;
    j["has_multiple_categories"] = p.has_multiple_categories;
    if (p.label) j["label"] = label_name(*p.label);
    if (p.source) j["source"] = *p.source;
    buffer += j.dump();
    buffer += '\n';
  }
  atomic_write(path, buffer);
}

std::vector<CommentRecord> read_comments(const std::filesystem::path& path) {
  std::set<std::string> seen_ids;
  return read_jsonl(path, [&](const json& j, const std::string& ctx) {
    CommentRecord c;
    c.comment_id = j.value("comment_id", "");
    if (c.comment_id.empty()) throw DataError(ctx + ": missing comment_id");
    if (!seen_ids.insert(c.comment_id).second) {
      throw DataError(ctx + ": duplicate comment_id '" + c.comment_id + "'");
    }
    c.author_id = j.value("author_id", "");
    c.post_id = j.value("post_id", "");
    c.text = j.value("text", "");
    c.author_label = read_label_field(j, "author_label", ctx);
    if (j.contains("language") && !j.at("language").is_null()) {
      c.language = j.at("language").get<std::string>();
    }
    return c;
  });
}

void write_comments(const std::vector<CommentRecord>& comments,
                    const std::filesystem::path& path) {
  std::string buffer;
  for (const auto& c : comments) {
    ordered_json j;
    j["comment_id"] = c.comment_id;
    j["author_id"] = c.author_id;
    j["post_id"] = c.post_id;
    j["text"] = c.text;
    if (c.author_label) j["author_label"] = label_name(*c.author_label);
    if (c.language) j["language"] = *c.language;
    buffer += j.dump();
    buffer += '\n';
  }
  atomic_write(path, buffer);
}

namespace {

// Column permutation that puts feature names into canonical relative order.
std::vector<std::size_t> canonical_permutation(const std::vector<std::string>& names) {
  const auto& canon = canonical_feature_names();
  std::vector<std::pair<std::size_t, std::size_t>> keyed;  // (canonical idx, col)
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto it = std::find(canon.begin(), canon.end(), names[c]);
    if (it == canon.end()) {
      throw DataError("unknown feature name '" + names[c] + "'");
    }
    keyed.emplace_back(static_cast<std::size_t>(it - canon.begin()), c);
  }
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t i = 1; i < keyed.size(); ++i) {
    if (keyed[i].first == keyed[i - 1].first) {
      throw DataError("duplicate feature name '" + names[keyed[i].second] + "'");
    }
  }
  std::vector<std::size_t> perm;
  perm.reserve(keyed.size());
  for (const auto& [canon_idx, col] : keyed) perm.push_back(col);
  return perm;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

}  // namespace

void write_matrix(const FeatureMatrix& matrix, const std::filesystem::path& path) {
  matrix.validate();
  const auto perm = canonical_permutation(matrix.feature_names);
  std::string buffer = "user_id,label";
  for (auto c : perm) {
    buffer += ',';
    buffer += matrix.feature_names[c];
  }
  buffer += '\n';
  for (std::size_t i = 0; i < matrix.n_rows(); ++i) {
    buffer += matrix.row_ids[i];
    buffer += ',';
    buffer += matrix.labels ? std::to_string((*matrix.labels)[i]) : "-1";
    for (auto c : perm) {
      buffer += ',';
      buffer += format_double(matrix.rows[i][c]);
    }
    buffer += '\n';
  }
  atomic_write(path, buffer);
}

FeatureMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "user_id" || header[1] != "label") {
    throw DataError(path.string() + ": header must start with 'user_id,label', found '" +
                    line + "'");
  }
  std::vector<std::string> names(header.begin() + 2, header.end());
  const auto& canon = canonical_feature_names();
  std::size_t canon_pos = 0;
  for (const auto& name : names) {
    // Names must appear in canonical relative order.
    while (canon_pos < canon.size() && canon[canon_pos] != name) ++canon_pos;
    if (canon_pos == canon.size()) {
      throw DataError(path.string() + ": header mismatch; expected columns from [" +
                      join(canon, ' ') + "], found '" + name + "' out of order");
    }
    ++canon_pos;
  }

  FeatureMatrix m;
  m.feature_names = names;
  std::vector<int> labels;
  bool any_labeled = false;
  bool any_unlabeled = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != names.size() + 2) {
      throw DataError(line_context(path, line_no) + ": expected " +
                      std::to_string(names.size() + 2) + " fields, found " +
                      std::to_string(fields.size()));
    }
    m.row_ids.push_back(fields[0]);
    const std::string& label_text = fields[1];
    if (label_text == "-1") {
      any_unlabeled = true;
      labels.push_back(-1);
    } else if (label_text == "0" || label_text == "1") {
      any_labeled = true;
      labels.push_back(label_text == "1" ? 1 : 0);
    } else {
      throw DataError(line_context(path, line_no) + ": invalid label '" + label_text +
                      "'");
    }
    std::vector<double> row;
    row.reserve(names.size());
    for (std::size_t c = 0; c < names.size(); ++c) {
      row.push_back(parse_double(fields[c + 2], line_context(path, line_no)));
    }
    m.rows.push_back(std::move(row));
  }
  if (any_labeled && any_unlabeled) {
    throw DataError(path.string() + ": mixed labeled and unlabeled rows");
  }
  if (any_labeled) m.labels = std::move(labels);
  m.validate();
  return m;
}

namespace {

json depth_to_json(int depth) {
  return depth == kUnboundedDepth ? json(nullptr) : json(depth);
}

int depth_from_json(const json& j) {
  return j.is_null() ? kUnboundedDepth : j.get<int>();
}

}  // namespace

ordered_json spec_to_json(const ClassifierSpec& spec) {
  ordered_json j;
  j["kind"] = kind_name(spec.kind);
  ordered_json h;
  switch (spec.kind) {
    case ModelKind::KNN:
      h["n_neighbors"] = spec.knn.n_neighbors;
      break;
    case ModelKind::LR:
      h["penalty"] = penalty_name(spec.lr.penalty);
      h["C"] = spec.lr.c;
      h["max_epochs"] = spec.lr.max_epochs;
      h["learning_rate"] = spec.lr.learning_rate;
      h["tolerance"] = spec.lr.tolerance;
      break;
    case ModelKind::DT:
      h["max_depth"] = depth_to_json(spec.dt.max_depth);
      h["min_samples_leaf"] = spec.dt.min_samples_leaf;
      break;
    case ModelKind::RF:
      h["max_depth"] = depth_to_json(spec.rf.tree.max_depth);
      h["min_samples_leaf"] = spec.rf.tree.min_samples_leaf;
      h["n_estimators"] = spec.rf.n_estimators;
      h["bootstrap"] = spec.rf.bootstrap;
      h["max_features"] = spec.rf.max_features;
      break;
  }
  j["hyperparameters"] = std::move(h);
  return j;
}

ClassifierSpec spec_from_json(const json& j) {
  const auto kind_text = j.at("kind").get<std::string>();
  const auto kind = parse_kind(kind_text);
  if (!kind) throw DataError("unknown model kind '" + kind_text + "'");
  ClassifierSpec spec;
  spec.kind = *kind;
  const auto& h = j.at("hyperparameters");
  switch (spec.kind) {
    case ModelKind::KNN:
      spec.knn.n_neighbors = h.at("n_neighbors").get<int>();
      break;
    case ModelKind::LR: {
      const auto penalty_text = h.at("penalty").get<std::string>();
      const auto penalty = parse_penalty(penalty_text);
      if (!penalty) throw DataError("unknown penalty '" + penalty_text + "'");
      spec.lr.penalty = *penalty;
      spec.lr.c = h.at("C").get<double>();
      spec.lr.max_epochs = h.at("max_epochs").get<int>();
      spec.lr.learning_rate = h.at("learning_rate").get<double>();
      spec.lr.tolerance = h.at("tolerance").get<double>();
      break;
    }
    case ModelKind::DT:
      spec.dt.max_depth = depth_from_json(h.at("max_depth"));
      spec.dt.min_samples_leaf = h.at("min_samples_leaf").get<int>();
      break;
    case ModelKind::RF:
      spec.rf.tree.max_depth = depth_from_json(h.at("max_depth"));
      spec.rf.tree.min_samples_leaf = h.at("min_samples_leaf").get<int>();
      spec.rf.n_estimators = h.at("n_estimators").get<int>();
      spec.rf.bootstrap = h.value("bootstrap", true);
      spec.rf.max_features = h.value("max_features", 0);
      break;
  }
  spec.validate();
  return spec;
}

namespace {

json tree_to_json(const DecisionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    nodes.push_back(json::array(
        {n.feature, n.threshold, n.left, n.right, n.p1, n.n_samples}));
  }
  return nodes;
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree tree;
  for (const auto& item : j) {
    if (!item.is_array() || item.size() != 6) {
      throw DataError("model parameters: malformed tree node");
    }
    TreeNode n;
    n.feature = item[0].get<std::int32_t>();
    n.threshold = item[1].get<double>();
    n.left = item[2].get<std::int32_t>();
    n.right = item[3].get<std::int32_t>();
    n.p1 = item[4].get<double>();
    n.n_samples = item[5].get<std::uint32_t>();
    tree.nodes.push_back(n);
  }
  if (tree.nodes.empty()) throw DataError("model parameters: empty tree");
  return tree;
}

}  // namespace

void save_model(const Model& model, const std::filesystem::path& path) {
  ordered_json j = spec_to_json(model.spec);
  j["tool_version"] = kVersion;
  j["classes"] = json::array({0, 1});
  j["feature_names"] = model.feature_names;
  if (model.scaler) {
    j["scaler"] = ordered_json{{"means", model.scaler->means}, {"stds", model.scaler->stds}};
  } else {
    j["scaler"] = nullptr;
  }
  ordered_json params;
  switch (model.spec.kind) {
    case ModelKind::LR:
      params["weights"] = model.lr_weights;
      params["intercept"] = model.lr_intercept;
      params["converged"] = model.lr_converged;
      params["epochs_run"] = model.lr_epochs_run;
      break;
    case ModelKind::KNN:
      params["rows"] = model.knn_rows;
      params["labels"] = model.knn_labels;
      break;
    case ModelKind::DT:
      params["nodes"] = tree_to_json(model.tree);
      break;
    case ModelKind::RF: {
      params["seeds"] = model.forest_seeds;
      json trees = json::array();
      for (const auto& tree : model.forest) trees.push_back(tree_to_json(tree));
      params["trees"] = std::move(trees);
      break;
    }
  }
  j["parameters"] = std::move(params);
  atomic_write(path, j.dump(2) + "\n");
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("invalid model JSON in " + path.string() + ": " + e.what());
  }

  Model model;
  model.spec = spec_from_json(j);
  model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  if (model.feature_names.empty()) throw DataError("model has no feature names");
  if (j.contains("scaler") && !j.at("scaler").is_null()) {
    Scaler s;
    s.means = j.at("scaler").at("means").get<std::vector<double>>();
    s.stds = j.at("scaler").at("stds").get<std::vector<double>>();
    if (s.means.size() != model.feature_names.size() ||
        s.stds.size() != model.feature_names.size()) {
      throw DataError("model scaler arity mismatch");
    }
    model.scaler = std::move(s);
  }

  const auto& params = j.at("parameters");
  const std::size_t d = model.feature_names.size();
  switch (model.spec.kind) {
    case ModelKind::LR:
      model.lr_weights = params.at("weights").get<std::vector<double>>();
      model.lr_intercept = params.at("intercept").get<double>();
      model.lr_converged = params.value("converged", false);
      model.lr_epochs_run = params.value("epochs_run", 0);
      if (model.lr_weights.size() != d) {
        throw DataError("model parameter arity mismatch: " +
                        std::to_string(model.lr_weights.size()) + " weights for " +
                        std::to_string(d) + " features");
      }
      if (!model.scaler) throw DataError("lr model requires a scaler");
      break;
    case ModelKind::KNN: {
      model.knn_rows = params.at("rows").get<std::vector<std::vector<double>>>();
      model.knn_labels = params.at("labels").get<std::vector<int>>();
      if (model.knn_rows.size() != model.knn_labels.size()) {
        throw DataError("model parameter arity mismatch: rows vs labels");
      }
      for (const auto& row : model.knn_rows) {
        if (row.size() != d) throw DataError("model parameter arity mismatch: knn row");
      }
      if (model.knn_rows.size() < static_cast<std::size_t>(model.spec.knn.n_neighbors)) {
        throw DataError("knn model stores fewer rows than n_neighbors");
      }
      if (!model.scaler) throw DataError("knn model requires a scaler");
      break;
    }
    case ModelKind::DT:
      model.tree = tree_from_json(params.at("nodes"));
      break;
    case ModelKind::RF: {
      model.forest_seeds = params.at("seeds").get<std::vector<std::uint64_t>>();
      for (const auto& tree : params.at("trees")) {
        model.forest.push_back(tree_from_json(tree));
      }
      if (model.forest.empty()) throw DataError("rf model has no trees");
      if (model.forest.size() != static_cast<std::size_t>(model.spec.rf.n_estimators)) {
        throw DataError("model parameter arity mismatch: tree count vs n_estimators");
      }
      break;
    }
  }
  return model;
}

}  // namespace ctkit
