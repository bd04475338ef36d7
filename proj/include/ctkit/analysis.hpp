#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctkit/records.hpp"

namespace ctkit {

// Follower-count bands. 1,000,000 exactly belongs to Mega.
enum class Tier { Normal, Nano, Micro, MidTier, Macro, Mega };

const char* tier_name(Tier t);
Tier tier_of(std::int64_t followers);

struct GroupStats {
  std::size_t count = 0;
  double followers_mean = 0.0;
  double followers_std = 0.0;  // population
  double following_mean = 0.0;
  double following_std = 0.0;
};

enum class GroupBy { TierGroups, LabelGroups };

struct GroupStatsReport {
  std::vector<std::pair<std::string, GroupStats>> groups;  // non-empty only
  std::vector<std::string> omitted;
};

GroupStatsReport group_stats(const std::vector<ProfileRecord>& profiles, GroupBy by);

struct FollowingHistogram {
  int bin_width = 500;
  int cap = 8000;
  std::vector<std::int64_t> lower_edges;  // one per bin, last is the overflow bin
  std::vector<std::size_t> counts;
};

// Right-open bins [0,w), [w,2w), ... up to the cap, then one overflow bin.
FollowingHistogram following_histogram(const std::vector<ProfileRecord>& profiles,
                                       int bin_width = 500, int cap = 8000);

struct BiographyScan {
  std::vector<std::string> matched_ids;
  double fraction = 0.0;
  std::vector<std::pair<std::string, std::size_t>> entry_hits;  // watchlist order
};

// Word entries match case-insensitively as substrings; emoji entries match
// as exact scalar sequences.
BiographyScan biography_scan(const std::vector<ProfileRecord>& profiles,
                             const std::vector<std::string>& watchlist);

// Published subset of the luring-biography watchlist; the complete list is
// user-suppliable as a one-entry-per-line UTF-8 file.
std::vector<std::string> default_watchlist();

struct GroupCommentCount {
  std::size_t n_users = 0;
  double mean = 0.0;
  double std = 0.0;  // population
};

// Comments per distinct author, aggregated per group ("CT", "Real",
// "unknown"). A comment's group comes from its author_label, falling back
// to the supplied per-user map.
std::map<std::string, GroupCommentCount> comments_per_user(
    const std::vector<CommentRecord>& comments,
    const std::map<std::string, Label>& label_by_user);

struct LexicalStats {
  double sentences = 0.0;
  double words = 0.0;
  double words_per_sentence = 0.0;  // 0 when there are no sentences
  std::size_t length_chars = 0;     // Unicode scalars, emoji included
  bool has_word_repetition = false;
};

// Sentences are segments containing non-whitespace after splitting on runs
// of {. ! ? newline}; words are letter/digit runs after emoji removal.
LexicalStats lexical(std::string_view comment);

struct SyntacticStats {
  bool starts_uppercase = false;
  bool has_punctuation = false;       // any of . , ; : ! ? ' " - ( )
  double uppercase_word_ratio = 0.0;  // all-uppercase-letter words / words
};

SyntacticStats syntactic(std::string_view comment);

struct EmojiStats {
  std::size_t emoji_count = 0;  // multiplicity; one per ZWJ cluster
  std::vector<std::string> distinct;
  bool has_emoji = false;
};

EmojiStats emoji(std::string_view comment);

struct StatPair {
  double mean = 0.0;
  double std = 0.0;  // population
};

struct GroupStyle {
  std::size_t n_comments = 0;
  StatPair sentences;
  StatPair words;
  StatPair words_per_sentence;
  StatPair length_chars;
  StatPair uppercase_word_ratio;
  double frac_starts_uppercase = 0.0;
  double frac_has_punctuation = 0.0;
  double frac_no_word_repetition = 0.0;
  double frac_has_emoji = 0.0;
  // Average emoji per comment over comments that have any (multiplicity).
  double avg_emoji_when_present = 0.0;
  // Shares use once-per-comment counting and are normalized by the total
  // emoji-comment incidences of the group, so they sum to at most 1.
  std::vector<std::pair<std::string, double>> top_emoji_shares;
};

struct StylometryReport {
  GroupStyle ct;
  GroupStyle real;
  double p_words = 1.0;
  double p_length = 1.0;
  double p_words_per_sentence = 1.0;
  int top_k = 6;
};

StylometryReport stylometry_report(const std::vector<CommentRecord>& ct_comments,
                                   const std::vector<CommentRecord>& real_comments,
                                   int top_k = 6);

// Case-folded counts over emoji- and punctuation-stripped text; words
// shorter than min_len scalars are dropped. Ranked by count desc, then
// lexicographically.
std::vector<std::pair<std::string, std::size_t>> word_frequencies(
    const std::vector<CommentRecord>& comments, std::size_t min_len = 3,
    std::size_t top_n = 100);

}  // namespace ctkit
