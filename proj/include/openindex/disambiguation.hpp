#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "openindex/entities.hpp"
#include "openindex/errors.hpp"
#include "openindex/stub.hpp"

namespace openindex {

// ---------------------------------------------------------------------------
// Names

// "Priem, Jason" -> "j priem"; "Martín-Martín, Alberto" -> "a martin-martin".
// Folds diacritics, lowercases, reorders "family, given", keeps the first
// given initial plus the family token. Throws ValidationError when nothing
// remains.
std::string normalize_name(std::string_view raw);

struct NameParts {
  std::string initial;  // may be empty
  std::string family;
};

NameParts split_name_key(std::string_view key);

// Blocking rule: equal family token and non-conflicting given initial.
bool name_keys_compatible(std::string_view a, std::string_view b);

// Family token of a raw name, or nullopt when the name is empty.
std::optional<std::string> family_of(std::string_view raw_name);

// ---------------------------------------------------------------------------
// Author disambiguation

struct AuthorWeights {
  double name_exact = 0.4;
  double coauthor_step = 0.1;
  double coauthor_cap = 0.3;
  double venue = 0.2;
  double citation_step = 0.05;
  double citation_cap = 0.1;
};

// Everything the scorer knows about a stored author; derivable from the store.
struct AuthorSignature {
  OpenAlexId author;
  std::optional<std::string> orcid;
  std::set<std::string> name_keys;  // display name and alternates
  std::set<std::string> coauthor_name_keys;
  std::set<OpenAlexId> venue_ids;
  std::set<OpenAlexId> work_ids;
  std::set<OpenAlexId> cited_work_ids;
};

// The incoming work as seen from one of its authors.
struct AuthorContext {
  std::optional<OpenAlexId> venue;
  std::set<OpenAlexId> referenced_works;
  std::optional<OpenAlexId> work;  // set when the work already exists
  std::set<std::string> coauthor_name_keys;
};

// value = clamp(sum of features, 0, 1).
struct MatchScore {
  double value = 0.0;
  std::map<std::string, double> features;
};

struct AuthorDecision {
  enum class Rule { kOrcid, kScore, kCreate };

  Rule rule = Rule::kCreate;
  std::optional<OpenAlexId> matched;
  std::vector<std::pair<OpenAlexId, MatchScore>> scored;  // candidates surviving rule 2
};

MatchScore score_author(std::string_view stub_name_key, const AuthorContext& context,
                        const AuthorSignature& candidate, const AuthorWeights& weights);

// Rule 1: equal ORCID matches outright. Rule 2: conflicting ORCIDs exclude.
// Rule 3: best score >= theta matches, ties to the lowest serial; else create.
AuthorDecision disambiguate_author(const StubAuthor& stub, const AuthorContext& context,
                                   std::span<const AuthorSignature> candidates, double theta,
                                   const AuthorWeights& weights = {});

// ---------------------------------------------------------------------------
// Affiliations and institutions

// Splits an affiliation statement on commas/semicolons, drops the address
// tail and country names, and normalizes each surviving organization string.
std::vector<std::string> extract_affiliation_candidates(std::string_view raw);

// Lowercase, fold, strip punctuation, expand fixed abbreviations.
std::string normalize_org_string(std::string_view raw);

struct InstitutionMatch {
  OpenAlexId institution;
  std::string candidate;
  int stage = 1;  // 1 = exact rule, 2 = scorer
  double score = 1.0;
};

// Normalized names of the institution store plus token IDF statistics.
class InstitutionRegistry {
 public:
  InstitutionRegistry() = default;
  explicit InstitutionRegistry(std::span<const Institution> institutions);

  // IDF-weighted token-set Jaccard against one institution's best name.
  double score(std::string_view candidate, const OpenAlexId& institution) const;
  // Exact-name hit (stage 1), if any; lowest serial wins.
  std::optional<OpenAlexId> exact(std::string_view candidate) const;
  // Best stage-2 entry and its score; ties to the lowest serial.
  std::optional<std::pair<OpenAlexId, double>> best(std::string_view candidate) const;

  double idf(const std::string& token) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  struct Entry {
    OpenAlexId id;
    std::vector<std::set<std::string>> name_tokens;
  };

  double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) const;

  std::vector<Entry> entries_;  // ascending serial
  std::unordered_map<std::string, std::vector<OpenAlexId>> exact_;
  std::unordered_map<std::string, std::vector<std::size_t>> postings_;
  std::unordered_map<std::string, double> idf_;
  double unseen_idf_ = 0.0;
};

std::vector<InstitutionMatch> match_institution_detailed(std::span<const std::string> candidates,
                                                          const InstitutionRegistry& registry,
                                                          double tau);

// Stage 1 exact rule, then stage 2 scorer at threshold tau. Deduplicated,
// first mention first.
std::vector<OpenAlexId> match_institution(std::span<const std::string> candidates,
                                          const InstitutionRegistry& registry, double tau);

// ---------------------------------------------------------------------------
// Work versions

// Normalized title, plus "|family" when the first author is known. Throws
// ValidationError on an empty title.
std::string fingerprint_work(std::string_view title,
                             std::optional<std::string_view> first_author_family = std::nullopt);

// Fingerprint of a stored work, or nullopt for untitled works.
std::optional<std::string> fingerprint_of(const Work& work);

inline int version_rank(HostVersion v) noexcept {
  switch (v) {
    case HostVersion::kPublished:
      return 3;
    case HostVersion::kAccepted:
      return 2;
    case HostVersion::kSubmitted:
      return 1;
    case HostVersion::kUnknown:
      return 0;
  }
  return 0;
}

inline int venue_type_rank(std::optional<VenueType> t) noexcept {
  if (!t) return 0;
  switch (*t) {
    case VenueType::kJournal:
      return 3;
    case VenueType::kConference:
      return 2;
    case VenueType::kRepository:
      return 1;
  }
  return 0;
}

// Picks the version of record: best version, then venue type, then earliest
// position. Sets that location's primary flag and clears all others.
// `venue_type_of` maps a venue id to its type (nullopt if unknown).
template <typename VenueTypeLookup>
std::size_t select_primary_location(std::vector<HostLocation>& locations,
                                    VenueTypeLookup&& venue_type_of) {
  if (locations.empty()) throw ValidationError("select_primary_location: no locations");
  std::size_t best = 0;
  std::pair<int, int> best_rank{-1, -1};
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const auto& loc = locations[i];
    std::optional<VenueType> type;
    if (loc.venue) type = venue_type_of(*loc.venue);
    std::pair<int, int> rank{version_rank(loc.version), venue_type_rank(type)};
    if (rank > best_rank) {
      best_rank = rank;
      best = i;
    }
  }
  for (std::size_t i = 0; i < locations.size(); ++i) locations[i].primary = (i == best);
  return best;
}

}  // namespace openindex
