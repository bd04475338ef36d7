#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ctkit {

// CT is the positive class (1), Real the negative (0).
enum class Label : int { Real = 0, CT = 1 };

const char* label_name(Label l);
std::optional<Label> parse_label(std::string_view s);
inline int label_value(Label l) { return static_cast<int>(l); }

struct ProfileRecord {
  std::string user_id;
  std::string username;
  std::string fullname;
  std::string biography;
  std::optional<std::string> external_url;
  std::int64_t followers = 0;
  std::int64_t following = 0;
  std::int64_t posts = 0;
  std::int64_t videos = 0;
  bool is_private = false;
  bool is_verified = false;
  bool has_clips = false;
  bool is_business = false;
  bool has_category_name = false;
  bool has_multiple_categories = false;
  std::optional<Label> label;
  std::optional<std::string> source;

  bool operator==(const ProfileRecord&) const = default;
};

struct CommentRecord {
  std::string comment_id;
  std::string author_id;
  std::string post_id;
  std::string text;
  std::optional<Label> author_label;
  std::optional<std::string> language;

  bool operator==(const CommentRecord&) const = default;
};

}  // namespace ctkit
