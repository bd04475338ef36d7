#include "ctkit/urlintel.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace ctkit {

const char* category_name(UrlCategory c) {
  switch (c) {
    case UrlCategory::Videogame: return "videogame";
    case UrlCategory::Messaging: return "messaging";
    case UrlCategory::SocialNetwork: return "social_network";
    case UrlCategory::MusicPhotography: return "music_photography";
    case UrlCategory::EmailGoogle: return "email_google";
    case UrlCategory::UrlRedirecting: return "url_redirecting";
    case UrlCategory::ShoppingPayment: return "shopping_payment";
    case UrlCategory::PersonalWebsite: return "personal_website";
    case UrlCategory::AdultContent: return "adult_content";
    case UrlCategory::Other: return "other";
  }
  return "?";
}

std::optional<UrlCategory> parse_category(std::string_view s) {
  for (UrlCategory c :
       {UrlCategory::Videogame, UrlCategory::Messaging, UrlCategory::SocialNetwork,
        UrlCategory::MusicPhotography, UrlCategory::EmailGoogle,
        UrlCategory::UrlRedirecting, UrlCategory::ShoppingPayment,
        UrlCategory::PersonalWebsite, UrlCategory::AdultContent, UrlCategory::Other}) {
    if (s == category_name(c)) return c;
  }
  return std::nullopt;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Safe: return "safe";
    case Verdict::Parked: return "parked";
    case Verdict::Spamming: return "spamming";
    case Verdict::Malware: return "malware";
    case Verdict::Phishing: return "phishing";
    case Verdict::Adult: return "adult";
    case Verdict::Suspicious: return "suspicious";
  }
  return "?";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  for (Verdict v : {Verdict::Safe, Verdict::Parked, Verdict::Spamming, Verdict::Malware,
                    Verdict::Phishing, Verdict::Adult, Verdict::Suspicious}) {
    if (s == verdict_name(v)) return v;
  }
  return std::nullopt;
}

DomainMap default_domain_map() {
  DomainMap map;
  map.entries = {
      {UrlCategory::Videogame,
       {"youtube.com", "youtu.be", "twitch.tv", "discord.gg", "discord.com"}},
      {UrlCategory::Messaging,
       {"whatsapp.com", "wa.me", "telegram.org", "telegram.me", "t.me"}},
      {UrlCategory::SocialNetwork,
       {"facebook.com", "fb.com", "twitter.com", "instagram.com", "tiktok.com",
        "snapchat.com"}},
      {UrlCategory::MusicPhotography,
       {"spotify.com", "soundcloud.com", "vsco.co"}},
      {UrlCategory::EmailGoogle, {"gmail.com", "google.com", "outlook.com"}},
      {UrlCategory::UrlRedirecting,
       {"linktr.ee", "tinyurl.com", "linkr.bio", "bit.ly"}},
      {UrlCategory::ShoppingPayment,
       {"paypal.com", "paypal.me", "vinted.com", "amazon.com", "ebay.com"}},
      {UrlCategory::PersonalWebsite,
       {"blogspot.com", "wordpress.com", "wixsite.com", "change.org"}},
      {UrlCategory::AdultContent, {"onlyfans.com", "pornhub.com", "xvideos.com"}},
  };
  return map;
}

DomainMap load_domain_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open domain map: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid domain map JSON: " + std::string(e.what()));
  }
  if (!doc.is_array()) throw DataError("domain map must be a JSON array");
  DomainMap map;
  for (const auto& item : doc) {
    const auto cat = parse_category(item.at("category").get<std::string>());
    if (!cat) {
      throw DataError("domain map: unknown category '" +
                      item.at("category").get<std::string>() + "'");
    }
    DomainMap::Entry entry;
    entry.category = *cat;
    for (const auto& p : item.at("patterns")) {
      entry.patterns.push_back(p.get<std::string>());
    }
    map.entries.push_back(std::move(entry));
  }
  return map;
}

std::string host_of(std::string_view url) {
  std::string_view rest = url;
  if (const auto scheme = rest.find("://"); scheme != std::string_view::npos) {
    rest = rest.substr(scheme + 3);
  }
  // Drop userinfo, then path/query/fragment, then port.
  if (const auto at = rest.find('@');
      at != std::string_view::npos && at < rest.find('/')) {
    rest = rest.substr(at + 1);
  }
  const auto end = rest.find_first_of("/?#");
  if (end != std::string_view::npos) rest = rest.substr(0, end);
  if (const auto colon = rest.find(':'); colon != std::string_view::npos) {
    rest = rest.substr(0, colon);
  }
  std::string host(rest);
  std::transform(host.begin(), host.end(), host.begin(), [](unsigned char c) {
    return c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
  });
  return host;
}

namespace {

bool suffix_match(const std::string& host, const std::string& pattern) {
  if (host == pattern) return true;
  if (host.size() <= pattern.size()) return false;
  return host.compare(host.size() - pattern.size(), pattern.size(), pattern) == 0 &&
         host[host.size() - pattern.size() - 1] == '.';
}

}  // namespace

UrlCategory categorize(std::string_view url, const DomainMap& map) {
  const std::string host = host_of(url);
  if (host.empty()) return UrlCategory::Other;
  for (const auto& entry : map.entries) {
    for (const auto& pattern : entry.patterns) {
      if (suffix_match(host, pattern)) return entry.category;
    }
  }
  return UrlCategory::Other;
}

StubProvider::StubProvider(std::map<std::string, Verdict> by_domain)
    : by_domain_(std::move(by_domain)) {}

StubProvider StubProvider::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open reputation stub: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid reputation stub JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw DataError("reputation stub must be a JSON object");
  std::map<std::string, Verdict> table;
  for (const auto& [domain, value] : doc.items()) {
    const auto verdict = parse_verdict(value.get<std::string>());
    if (!verdict) {
      throw DataError("reputation stub: unknown verdict '" + value.get<std::string>() +
                      "' for " + domain);
    }
    table[domain] = *verdict;
  }
  return StubProvider(std::move(table));
}

ReputationVerdict StubProvider::lookup(const std::string& url) {
  const std::string host = host_of(url);
  for (const auto& [domain, verdict] : by_domain_) {
    if (suffix_match(host, domain)) {
      return {verdict, "stub", "1970-01-01T00:00:00Z"};
    }
  }
  return {Verdict::Safe, "stub-default", "1970-01-01T00:00:00Z"};
}

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {}

namespace {

std::string url_escape(const std::string& s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    const bool plain = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                       (c >= '0' && c <= '9') || c == '-' || c == '.' || c == '_' ||
                       c == '~';
    if (plain) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0x0F]);
    }
  }
  return out;
}

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

const nlohmann::json* walk_field(const nlohmann::json& doc, const std::string& path) {
  const nlohmann::json* cur = &doc;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto dot = path.find('.', start);
    const std::string key =
        path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object() || !cur->contains(key)) return nullptr;
    cur = &(*cur)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return cur;
}

}  // namespace

ReputationVerdict HttpProvider::lookup(const std::string& url) {
  httplib::Client client(config_.base_url);
  client.set_connection_timeout(0, config_.timeout_ms * 1000);
  client.set_read_timeout(0, config_.timeout_ms * 1000);

  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
      headers.emplace(config_.api_key_header, key);
    }
  }

  std::string path = config_.path_template;
  if (const auto pos = path.find("{url}"); pos != std::string::npos) {
    path.replace(pos, 5, url_escape(url));
  }

  for (int attempt = 0;; ++attempt) {
    const auto res = client.Get(path, headers);
    if (res && res->status == 200) {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception&) {
        throw ProtocolError("reputation provider returned non-JSON body");
      }
      const auto* field = walk_field(doc, config_.verdict_field);
      if (!field || !field->is_string()) {
        throw ProtocolError("reputation response missing field '" +
                            config_.verdict_field + "'");
      }
      const auto verdict = parse_verdict(field->get<std::string>());
      if (!verdict) {
        throw ProtocolError("reputation response carries unknown verdict '" +
                            field->get<std::string>() + "'");
      }
      return {*verdict, config_.base_url, now_iso8601()};
    }
    if (attempt >= config_.max_retries) {
      throw UnavailableError("reputation provider unavailable after " +
                             std::to_string(attempt + 1) + " attempts");
    }
    std::this_thread::sleep_for(
        std::chrono::milliseconds(config_.backoff_base_ms * (1 << attempt)));
  }
}

UrlReport url_report(const std::vector<ProfileRecord>& profiles, const DomainMap& map,
                     ReputationProvider& provider) {
  UrlReport report;
  report.n_profiles = profiles.size();

  std::map<UrlCategory, std::size_t> categories;
  std::map<Verdict, std::size_t> verdicts;
  for (const auto& p : profiles) {
    if (!p.external_url) continue;
    ++report.n_with_url;
    const UrlCategory cat = categorize(*p.external_url, map);
    ++categories[cat];
    if (cat == UrlCategory::Other) {
      try {
        ++verdicts[provider.lookup(*p.external_url).verdict];
      } catch (const UnavailableError&) {
        ++report.lookup_errors;
      } catch (const ProtocolError&) {
        ++report.lookup_errors;
      }
    }
  }
  report.url_fraction = profiles.empty()
                            ? 0.0
                            : static_cast<double>(report.n_with_url) /
                                  static_cast<double>(profiles.size());
  for (UrlCategory c :
       {UrlCategory::Videogame, UrlCategory::Messaging, UrlCategory::SocialNetwork,
        UrlCategory::MusicPhotography, UrlCategory::EmailGoogle,
        UrlCategory::UrlRedirecting, UrlCategory::ShoppingPayment,
        UrlCategory::PersonalWebsite, UrlCategory::AdultContent, UrlCategory::Other}) {
    report.category_counts.emplace_back(category_name(c), categories[c]);
  }
  for (Verdict v : {Verdict::Safe, Verdict::Parked, Verdict::Spamming, Verdict::Malware,
                    Verdict::Phishing, Verdict::Adult, Verdict::Suspicious}) {
    report.other_verdicts.emplace_back(verdict_name(v), verdicts[v]);
  }
  return report;
}

}  // namespace ctkit
