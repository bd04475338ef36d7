#include "ctkit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "ctkit/errors.hpp"
#include "ctkit/eval.hpp"
#include "ctkit/text.hpp"

namespace ctkit {

const char* tier_name(Tier t) {
  switch (t) {
    case Tier::Normal: return "Normal";
    case Tier::Nano: return "Nano";
    case Tier::Micro: return "Micro";
    case Tier::MidTier: return "MidTier";
    case Tier::Macro: return "Macro";
    case Tier::Mega: return "Mega";
  }
  return "?";
}

Tier tier_of(std::int64_t followers) {
  if (followers < 0) throw DataError("tier_of: negative follower count");
  if (followers < 1000) return Tier::Normal;
  if (followers < 10000) return Tier::Nano;
  if (followers < 50000) return Tier::Micro;
  if (followers < 500000) return Tier::MidTier;
  if (followers < 1000000) return Tier::Macro;
  return Tier::Mega;
}

namespace {

StatPair stat_pair(const std::vector<double>& v) {
  const auto ms = mean_std(v);
  return {ms.mean, ms.std};
}

GroupStats stats_of(const std::vector<const ProfileRecord*>& group) {
  std::vector<double> followers;
  std::vector<double> following;
  followers.reserve(group.size());
  following.reserve(group.size());
  for (const auto* p : group) {
    followers.push_back(static_cast<double>(p->followers));
    following.push_back(static_cast<double>(p->following));
  }
  const auto f = mean_std(followers);
  const auto g = mean_std(following);
  return {group.size(), f.mean, f.std, g.mean, g.std};
}

}  // namespace

GroupStatsReport group_stats(const std::vector<ProfileRecord>& profiles, GroupBy by) {
  std::vector<std::pair<std::string, std::vector<const ProfileRecord*>>> buckets;
  if (by == GroupBy::TierGroups) {
    for (Tier t : {Tier::Normal, Tier::Nano, Tier::Micro, Tier::MidTier, Tier::Macro,
                   Tier::Mega}) {
      buckets.emplace_back(tier_name(t), std::vector<const ProfileRecord*>{});
    }
    for (const auto& p : profiles) {
      buckets[static_cast<std::size_t>(tier_of(p.followers))].second.push_back(&p);
    }
  } else {
    buckets.emplace_back("CT", std::vector<const ProfileRecord*>{});
    buckets.emplace_back("Real", std::vector<const ProfileRecord*>{});
    buckets.emplace_back("unlabeled", std::vector<const ProfileRecord*>{});
    for (const auto& p : profiles) {
      if (!p.label) {
        buckets[2].second.push_back(&p);
      } else {
        buckets[*p.label == Label::CT ? 0 : 1].second.push_back(&p);
      }
    }
  }
  GroupStatsReport report;
  for (auto& [name, group] : buckets) {
    if (group.empty()) {
      report.omitted.push_back(name);
    } else {
      report.groups.emplace_back(name, stats_of(group));
    }
  }
  return report;
}

FollowingHistogram following_histogram(const std::vector<ProfileRecord>& profiles,
                                       int bin_width, int cap) {
  if (bin_width <= 0) throw ConfigError("following_histogram: bin_width must be positive");
  if (cap < bin_width) throw ConfigError("following_histogram: cap below bin width");
  FollowingHistogram h;
  h.bin_width = bin_width;
  h.cap = cap;
  const int full_bins = cap / bin_width;
  for (int b = 0; b < full_bins; ++b) h.lower_edges.push_back(static_cast<std::int64_t>(b) * bin_width);
  h.lower_edges.push_back(static_cast<std::int64_t>(full_bins) * bin_width);  // overflow
  h.counts.assign(h.lower_edges.size(), 0);
  for (const auto& p : profiles) {
    const auto bin = p.following / bin_width;
    const auto idx = bin >= full_bins ? static_cast<std::size_t>(full_bins)
                                      : static_cast<std::size_t>(bin);
    ++h.counts[idx];
  }
  return h;
}

namespace {

bool is_emoji_entry(const std::string& entry) {
  const auto cps = text::decode_utf8(entry);
  if (cps.empty()) return false;
  for (auto cp : cps) {
    if (!text::is_emoji_scalar(cp) && cp != text::kZwj && !text::is_variation_selector(cp)) {
      return false;
    }
  }
  return true;
}

}  // namespace

BiographyScan biography_scan(const std::vector<ProfileRecord>& profiles,
                             const std::vector<std::string>& watchlist) {
  if (watchlist.empty()) throw ConfigError("biography_scan: empty watchlist");
  struct Entry {
    std::string needle;
    bool emoji;
    std::size_t hits = 0;
  };
  std::vector<Entry> entries;
  entries.reserve(watchlist.size());
  for (const auto& raw : watchlist) {
    const bool emoji = is_emoji_entry(raw);
    entries.push_back({emoji ? raw : text::lowercase(raw), emoji, 0});
  }

  BiographyScan scan;
  for (const auto& p : profiles) {
    const std::string lower_bio = text::lowercase(p.biography);
    bool matched = false;
    for (auto& e : entries) {
      const std::string& haystack = e.emoji ? p.biography : lower_bio;
      if (!e.needle.empty() && haystack.find(e.needle) != std::string::npos) {
        ++e.hits;
        matched = true;
      }
    }
    if (matched) scan.matched_ids.push_back(p.user_id);
  }
  scan.fraction = profiles.empty() ? 0.0
                                   : static_cast<double>(scan.matched_ids.size()) /
                                         static_cast<double>(profiles.size());
  for (std::size_t i = 0; i < watchlist.size(); ++i) {
    scan.entry_hits.emplace_back(watchlist[i], entries[i].hits);
  }
  return scan;
}

std::vector<std::string> default_watchlist() {
  return {
      "stories", "chat", "follow", "gain", "click", "link",
      "\xF0\x9F\x8D\x86",  // eggplant
      "\xF0\x9F\x8D\x91",  // peach
      "\xF0\x9F\x92\xA6",  // sweat droplets
      "\xF0\x9F\x94\x9E",  // no-one-under-eighteen
      "\xF0\x9F\x94\xA5",  // fire
  };
}

std::map<std::string, GroupCommentCount> comments_per_user(
    const std::vector<CommentRecord>& comments,
    const std::map<std::string, Label>& label_by_user) {
  struct UserTally {
    std::size_t count = 0;
    std::string group = "unknown";
  };
  std::unordered_map<std::string, UserTally> per_user;
  for (const auto& c : comments) {
    auto& tally = per_user[c.author_id];
    ++tally.count;
    if (c.author_label) {
      tally.group = label_name(*c.author_label);
    } else if (tally.group == "unknown") {
      const auto it = label_by_user.find(c.author_id);
      if (it != label_by_user.end()) tally.group = label_name(it->second);
    }
  }
  std::map<std::string, std::vector<double>> counts;
  for (const auto& [user, tally] : per_user) {
    counts[tally.group].push_back(static_cast<double>(tally.count));
  }
  std::map<std::string, GroupCommentCount> out;
  for (const auto& [group, values] : counts) {
    const auto ms = mean_std(values);
    out[group] = {values.size(), ms.mean, ms.std};
  }
  return out;
}

namespace {

bool is_sentence_break(text::Codepoint cp) {
  return cp == '.' || cp == '!' || cp == '?' || cp == '\n';
}

std::size_t count_sentences(std::string_view s) {
  const auto cps = text::decode_utf8(s);
  std::size_t sentences = 0;
  bool segment_has_content = false;
  for (auto cp : cps) {
    if (is_sentence_break(cp)) {
      if (segment_has_content) ++sentences;
      segment_has_content = false;
    } else if (!text::is_space(cp)) {
      segment_has_content = true;
    }
  }
  if (segment_has_content) ++sentences;
  return sentences;
}

bool is_listed_punctuation(text::Codepoint cp) {
  switch (cp) {
    case '.':
    case ',':
    case ';':
    case ':':
    case '!':
    case '?':
    case '\'':
    case '"':
    case '-':
    case '(':
    case ')':
      return true;
    default:
      return false;
  }
}

}  // namespace

LexicalStats lexical(std::string_view comment) {
  LexicalStats out;
  out.length_chars = text::scalar_count(comment);
  out.sentences = static_cast<double>(count_sentences(comment));
  const auto ws = text::words(comment);
  out.words = static_cast<double>(ws.size());
  out.words_per_sentence = out.sentences > 0.0 ? out.words / out.sentences : 0.0;
  std::set<std::string> seen;
  for (const auto& w : ws) {
    if (!seen.insert(text::lowercase(w)).second) {
      out.has_word_repetition = true;
      break;
    }
  }
  return out;
}

SyntacticStats syntactic(std::string_view comment) {
  SyntacticStats out;
  const auto cps = text::decode_utf8(comment);
  out.starts_uppercase = !cps.empty() && text::is_upper(cps.front());
  for (auto cp : cps) {
    if (is_listed_punctuation(cp)) {
      out.has_punctuation = true;
      break;
    }
  }
  const auto ws = text::words(comment);
  if (!ws.empty()) {
    std::size_t upper_words = 0;
    for (const auto& w : ws) {
      const auto wcps = text::decode_utf8(w);
      bool all_upper = true;
      for (auto cp : wcps) {
        if (!text::is_upper(cp)) {
          all_upper = false;
          break;
        }
      }
      if (all_upper) ++upper_words;
    }
    out.uppercase_word_ratio =
        static_cast<double>(upper_words) / static_cast<double>(ws.size());
  }
  return out;
}

EmojiStats emoji(std::string_view comment) {
  EmojiStats out;
  const auto clusters = text::emoji_clusters(comment);
  out.emoji_count = clusters.size();
  out.has_emoji = !clusters.empty();
  std::set<std::string> seen;
  for (const auto& c : clusters) {
    if (seen.insert(c).second) out.distinct.push_back(c);
  }
  return out;
}

namespace {

struct PerCommentStats {
  std::vector<double> sentences;
  std::vector<double> words;
  std::vector<double> words_per_sentence;
  std::vector<double> length_chars;
  std::vector<double> uppercase_ratio;
  std::size_t starts_upper = 0;
  std::size_t has_punct = 0;
  std::size_t has_repetition = 0;
  std::size_t has_emoji = 0;
  std::size_t emoji_total_in_emoji_comments = 0;
  std::unordered_map<std::string, std::size_t> emoji_comment_counts;  // once per comment
};

PerCommentStats collect(const std::vector<CommentRecord>& comments) {
  PerCommentStats s;
  for (const auto& c : comments) {
    const auto lex = lexical(c.text);
    const auto syn = syntactic(c.text);
    const auto emo = emoji(c.text);
    s.sentences.push_back(lex.sentences);
    s.words.push_back(lex.words);
    s.words_per_sentence.push_back(lex.words_per_sentence);
    s.length_chars.push_back(static_cast<double>(lex.length_chars));
    s.uppercase_ratio.push_back(syn.uppercase_word_ratio);
    if (syn.starts_uppercase) ++s.starts_upper;
    if (syn.has_punctuation) ++s.has_punct;
    if (lex.has_word_repetition) ++s.has_repetition;
    if (emo.has_emoji) {
      ++s.has_emoji;
      s.emoji_total_in_emoji_comments += emo.emoji_count;
    }
    for (const auto& e : emo.distinct) ++s.emoji_comment_counts[e];
  }
  return s;
}

GroupStyle summarize(const PerCommentStats& s, std::size_t n, int top_k) {
  GroupStyle g;
  g.n_comments = n;
  g.sentences = stat_pair(s.sentences);
  g.words = stat_pair(s.words);
  g.words_per_sentence = stat_pair(s.words_per_sentence);
  g.length_chars = stat_pair(s.length_chars);
  g.uppercase_word_ratio = stat_pair(s.uppercase_ratio);
  const auto dn = static_cast<double>(n);
  g.frac_starts_uppercase = static_cast<double>(s.starts_upper) / dn;
  g.frac_has_punctuation = static_cast<double>(s.has_punct) / dn;
  g.frac_no_word_repetition = 1.0 - static_cast<double>(s.has_repetition) / dn;
  g.frac_has_emoji = static_cast<double>(s.has_emoji) / dn;
  g.avg_emoji_when_present =
      s.has_emoji > 0 ? static_cast<double>(s.emoji_total_in_emoji_comments) /
                            static_cast<double>(s.has_emoji)
                      : 0.0;

  std::size_t total_incidences = 0;
  for (const auto& [e, c] : s.emoji_comment_counts) total_incidences += c;
  std::vector<std::pair<std::string, std::size_t>> ranked(s.emoji_comment_counts.begin(),
                                                          s.emoji_comment_counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  const auto keep = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(top_k));
  for (std::size_t i = 0; i < keep; ++i) {
    g.top_emoji_shares.emplace_back(
        ranked[i].first,
        static_cast<double>(ranked[i].second) / static_cast<double>(total_incidences));
  }
  return g;
}

}  // namespace

StylometryReport stylometry_report(const std::vector<CommentRecord>& ct_comments,
                                   const std::vector<CommentRecord>& real_comments,
                                   int top_k) {
  if (ct_comments.empty() || real_comments.empty()) {
    throw DataError("stylometry_report: both groups must be non-empty");
  }
  const auto ct = collect(ct_comments);
  const auto real = collect(real_comments);

  StylometryReport report;
  report.top_k = top_k;
  report.ct = summarize(ct, ct_comments.size(), top_k);
  report.real = summarize(real, real_comments.size(), top_k);
  report.p_words = welch_ttest(ct.words, real.words).p;
  report.p_length = welch_ttest(ct.length_chars, real.length_chars).p;
  report.p_words_per_sentence =
      welch_ttest(ct.words_per_sentence, real.words_per_sentence).p;
  return report;
}

std::vector<std::pair<std::string, std::size_t>> word_frequencies(
    const std::vector<CommentRecord>& comments, std::size_t min_len, std::size_t top_n) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& c : comments) {
    for (const auto& w : text::words(c.text)) {
      const std::string folded = text::lowercase(w);
      if (text::scalar_count(folded) < min_len) continue;
      ++counts[folded];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > top_n) ranked.resize(top_n);
  return ranked;
}

}  // namespace ctkit
