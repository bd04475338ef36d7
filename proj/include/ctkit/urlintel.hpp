#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctkit/errors.hpp"
#include "ctkit/records.hpp"

namespace ctkit {

enum class UrlCategory {
  Videogame,
  Messaging,
  SocialNetwork,
  MusicPhotography,
  EmailGoogle,
  UrlRedirecting,
  ShoppingPayment,
  PersonalWebsite,
  AdultContent,
  Other,
};

const char* category_name(UrlCategory c);
std::optional<UrlCategory> parse_category(std::string_view s);

enum class Verdict { Safe, Parked, Spamming, Malware, Phishing, Adult, Suspicious };

const char* verdict_name(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

struct ReputationVerdict {
  Verdict verdict = Verdict::Safe;
  std::string source;
  std::string checked_at;  // ISO-8601; fixed epoch for the offline stub
};

// Ordered category -> registrable-domain suffix patterns; first match wins.
struct DomainMap {
  struct Entry {
    UrlCategory category;
    std::vector<std::string> patterns;
  };
  std::vector<Entry> entries;
};

DomainMap default_domain_map();
DomainMap load_domain_map(const std::filesystem::path& path);

// Lowercased host with port stripped; empty when nothing host-like exists.
std::string host_of(std::string_view url);

// First suffix match in map order; unparseable or unmatched hosts fall
// through to Other.
UrlCategory categorize(std::string_view url, const DomainMap& map);

struct UnavailableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ReputationProvider {
 public:
  virtual ~ReputationProvider() = default;
  // Throws UnavailableError after exhausted retries and ProtocolError on a
  // malformed response; never silently degrades to Safe.
  virtual ReputationVerdict lookup(const std::string& url) = 0;
};

// Offline domain -> verdict table; unknown domains report Safe with source
// "stub-default" so audits can tell a checked verdict from the default.
class StubProvider : public ReputationProvider {
 public:
  StubProvider() = default;
  explicit StubProvider(std::map<std::string, Verdict> by_domain);
  static StubProvider from_file(const std::filesystem::path& path);

  ReputationVerdict lookup(const std::string& url) override;

 private:
  std::map<std::string, Verdict> by_domain_;
};

struct HttpProviderConfig {
  std::string base_url;        // e.g. "http://reputation.local:8080"
  std::string path_template;   // "{url}" is replaced by the escaped target
  std::string api_key_env;     // environment variable holding the key
  std::string api_key_header = "X-Api-Key";
  std::string verdict_field = "verdict";  // dot-separated JSON path
  int timeout_ms = 5000;
  int max_retries = 2;         // exponential backoff between attempts
  int backoff_base_ms = 250;
};

// JSON-over-HTTP client template for a real reputation service.
class HttpProvider : public ReputationProvider {
 public:
  explicit HttpProvider(HttpProviderConfig config);
  ReputationVerdict lookup(const std::string& url) override;

 private:
  HttpProviderConfig config_;
};

struct UrlReport {
  std::size_t n_profiles = 0;
  std::size_t n_with_url = 0;
  double url_fraction = 0.0;
  std::vector<std::pair<std::string, std::size_t>> category_counts;  // enum order
  // Reputation breakdown for the Other category only.
  std::vector<std::pair<std::string, std::size_t>> other_verdicts;
  std::size_t lookup_errors = 0;
};

// Reputation lookups run only for the Other category; provider failures are
// counted, never dropped or defaulted.
UrlReport url_report(const std::vector<ProfileRecord>& profiles, const DomainMap& map,
                     ReputationProvider& provider);

}  // namespace ctkit
