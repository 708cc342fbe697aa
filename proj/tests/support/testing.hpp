#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "openindex/date.hpp"

namespace testing_support {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& name) { return fs::path(OPENINDEX_FIXTURES) / name; }

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << data;
}

class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "oix-XXXXXX").string();
    path_ = ::mkdtemp(pattern.data());
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline openindex::Clock fixed_clock(openindex::Date d = openindex::Date(2022, 6, 1)) {
  return [d] { return d; };
}

// ---------------------------------------------------------------------------
// Check-digit oracles written from the defining congruences, not from the
// iterative formulas the library uses. Each returns the unique check value
// found by trying every candidate.

// ISO 7064 MOD 11-2: sum of a_i * 2^(n-i) over all 16 positions == 1 (mod 11).
inline char oracle_orcid_check(const std::string& fifteen) {
  for (int c = 0; c <= 10; ++c) {
    long long sum = 0;
    for (std::size_t i = 0; i < 15; ++i) sum = (sum + (fifteen[i] - '0') * (1LL << (15 - i))) % 11;
    sum = (sum + c) % 11;
    if (sum == 1) return c == 10 ? 'X' : static_cast<char>('0' + c);
  }
  return '?';
}

// ISSN: weights 8..1 over all eight positions sum to 0 (mod 11).
inline char oracle_issn_check(const std::string& seven) {
  for (int c = 0; c <= 10; ++c) {
    int sum = c;
    for (int i = 0; i < 7; ++i) sum += (seven[i] - '0') * (8 - i);
    if (sum % 11 == 0) return c == 10 ? 'X' : static_cast<char>('0' + c);
  }
  return '?';
}

inline constexpr const char* kCrockford = "0123456789abcdefghjkmnpqrstvwxyz";

// ISO 7064 MOD 97-10: (body * 100 + check) == 1 (mod 97).
inline int oracle_ror_check(const std::string& body6) {
  std::uint64_t value = 0;
  for (char ch : body6) value = value * 32 + static_cast<std::uint64_t>(std::string(kCrockford).find(ch));
  // Registry check digits lie in 01..98; where two values satisfy the congruence the larger is issued.
  for (int c = 98; c >= 1; --c) {
    if ((value * 100 + static_cast<std::uint64_t>(c)) % 97 == 1) return c;
  }
  return -1;
}

inline bool oracle_orcid_valid(const std::string& s) {
  if (s.size() != 19) return false;
  std::string d;
  for (std::size_t i = 0; i < 19; ++i) {
    if (i == 4 || i == 9 || i == 14) {
      if (s[i] != '-') return false;
    } else {
      d.push_back(s[i]);
    }
  }
  for (int i = 0; i < 15; ++i) {
    if (d[i] < '0' || d[i] > '9') return false;
  }
  return oracle_orcid_check(d.substr(0, 15)) == d[15];
}

inline bool oracle_issn_valid(const std::string& s) {
  if (s.size() != 9 || s[4] != '-') return false;
  std::string d = s.substr(0, 4) + s.substr(5);
  for (int i = 0; i < 7; ++i) {
    if (d[i] < '0' || d[i] > '9') return false;
  }
  return oracle_issn_check(d.substr(0, 7)) == d[7];
}

inline bool oracle_ror_valid(const std::string& s) {
  if (s.size() != 9 || s[0] != '0') return false;
  std::string body = s.substr(1, 6);
  for (char c : body) {
    if (std::string(kCrockford).find(c) == std::string::npos) return false;
  }
  if (s[7] < '0' || s[7] > '9' || s[8] < '0' || s[8] > '9') return false;
  return oracle_ror_check(body) == (s[7] - '0') * 10 + (s[8] - '0');
}

inline std::string gen_orcid(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> digit(0, 9);
  std::string d;
  for (int i = 0; i < 15; ++i) d.push_back(static_cast<char>('0' + digit(rng)));
  d.push_back(oracle_orcid_check(d));
  return d.substr(0, 4) + "-" + d.substr(4, 4) + "-" + d.substr(8, 4) + "-" + d.substr(12, 4);
}

inline std::string gen_issn(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> digit(0, 9);
  std::string d;
  for (int i = 0; i < 7; ++i) d.push_back(static_cast<char>('0' + digit(rng)));
  d.push_back(oracle_issn_check(d));
  return d.substr(0, 4) + "-" + d.substr(4);
}

inline std::string gen_ror(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ch(0, 31);
  std::string body;
  for (int i = 0; i < 6; ++i) body.push_back(kCrockford[ch(rng)]);
  int c = oracle_ror_check(body);
  return "0" + body + static_cast<char>('0' + c / 10) + static_cast<char>('0' + c % 10);
}

// ---------------------------------------------------------------------------
// Synthetic Crossref-style corpus. Works cite earlier works of the corpus,
// authors come from a pool of `n / 4` people, venues from `n / 50` journals.

struct CorpusOptions {
  std::size_t works = 1000;
  std::uint64_t seed = 7;
  int max_refs = 6;
  // When set, person p is affiliated with affiliations[p % size].
  std::vector<std::string> affiliations;
};

inline std::vector<nlohmann::json> synthetic_corpus(const CorpusOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  static const char* kGiven[] = {"Ada", "Ben", "Chen", "Dara", "Eli", "Fay", "Gus", "Hana", "Ira", "Jon",
                                 "Kim", "Lia", "Max", "Nia", "Oto", "Pia", "Quin", "Rui", "Sol", "Tia"};
  static const char* kWords[] = {"graph",  "neural", "gene",     "genome", "sequence", "alignment", "deep",
                                 "network", "search", "citation", "index",  "learning", "model",     "analysis",
                                 "open",   "survey", "protein",  "cell",   "climate",  "ocean"};
  const std::size_t people = std::max<std::size_t>(opt.works / 4, 8);
  const std::size_t venues = std::max<std::size_t>(opt.works / 50, 2);
  std::vector<std::string> venue_issn;
  for (std::size_t v = 0; v < venues; ++v) venue_issn.push_back(gen_issn(rng));

  std::vector<nlohmann::json> out;
  out.reserve(opt.works);
  for (std::size_t i = 0; i < opt.works; ++i) {
    nlohmann::json rec;
    rec["DOI"] = "10.5555/syn." + std::to_string(i);
    std::string title;
    for (int w = 0; w < 6; ++w) title += std::string(w ? " " : "") + kWords[rng() % 20];
    title += " " + std::to_string(i);
    rec["title"] = {title};
    rec["type"] = "journal-article";
    rec["issued"]["date-parts"] = {{2000 + static_cast<int>(rng() % 23)}};
    rec["indexed"]["date-parts"] = {{2022, 5, 1}};
    std::size_t v = rng() % venues;
    rec["container-title"] = {"Synthetic Journal " + std::to_string(v)};
    rec["ISSN"] = {venue_issn[v]};
    std::size_t n_auth = 1 + rng() % 3;
    nlohmann::json authors = nlohmann::json::array();
    for (std::size_t a = 0; a < n_auth; ++a) {
      std::size_t p = rng() % people;
      nlohmann::json author = {{"given", kGiven[p % 20]}, {"family", "Fam" + std::to_string(p)}};
      if (!opt.affiliations.empty()) author["affiliation"] = {opt.affiliations[p % opt.affiliations.size()]};
      authors.push_back(std::move(author));
    }
    rec["author"] = authors;
    nlohmann::json refs = nlohmann::json::array();
    if (i > 0) {
      int n_refs = static_cast<int>(rng() % static_cast<std::uint64_t>(opt.max_refs + 1));
      for (int r = 0; r < n_refs; ++r) refs.push_back({{"DOI", "10.5555/syn." + std::to_string(rng() % i)}});
    }
    rec["reference"] = refs;
    rec["abstract"] = std::string(kWords[rng() % 20]) + " " + kWords[rng() % 20] + " study";
    out.push_back(std::move(rec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cursored listing server: GET /works?cursor=&rows= answers
// {"items": [...], "next_cursor": ...}. The first `fail_first` requests get
// `fail_status`.

class StubListingServer {
 public:
  explicit StubListingServer(std::vector<nlohmann::json> records, int fail_first = 0, int fail_status = 500)
      : records_(std::move(records)), fail_left_(fail_first), fail_status_(fail_status) {
    server_.Get("/works", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      ++requests_;
      if (fail_left_ > 0) {
        --fail_left_;
        res.status = fail_status_;
        return;
      }
      std::size_t offset = 0;
      std::string cursor = req.has_param("cursor") ? req.get_param_value("cursor") : "*";
      if (cursor != "*") offset = std::stoul(cursor.substr(1));
      std::size_t rows = req.has_param("rows") ? std::stoul(req.get_param_value("rows")) : 20;
      nlohmann::json body;
      body["items"] = nlohmann::json::array();
      for (std::size_t i = offset; i < std::min(records_.size(), offset + rows); ++i) body["items"].push_back(records_[i]);
      std::size_t next = offset + rows;
      body["next_cursor"] = next < records_.size() ? nlohmann::json("o" + std::to_string(next)) : nlohmann::json(nullptr);
      if (body["items"].empty()) body["next_cursor"] = nullptr;
      res.set_content(body.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubListingServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int requests() {
    std::lock_guard lock(mu_);
    return requests_;
  }
  void fail_next(int n, int status) {
    std::lock_guard lock(mu_);
    fail_left_ = n;
    fail_status_ = status;
  }

 private:
  std::vector<nlohmann::json> records_;
  std::mutex mu_;
  int fail_left_;
  int fail_status_;
  int requests_ = 0;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace testing_support
