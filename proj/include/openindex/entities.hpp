#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "openindex/date.hpp"
#include "openindex/enum_names.hpp"
#include "openindex/ids.hpp"

namespace openindex {

enum class WorkType { kJournalArticle, kBook, kDataset, kThesis, kOther };
enum class HostVersion { kPublished, kAccepted, kSubmitted, kUnknown };
enum class AuthorPosition { kFirst, kMiddle, kLast };
enum class VenueType { kJournal, kConference, kRepository };
enum class SourceClass { kCrossref, kPubmed, kRepository };

template <>
struct EnumNames<WorkType> {
  static constexpr std::array<std::pair<WorkType, std::string_view>, 5> table{{
      {WorkType::kJournalArticle, "journal-article"},
      {WorkType::kBook, "book"},
      {WorkType::kDataset, "dataset"},
      {WorkType::kThesis, "thesis"},
      {WorkType::kOther, "other"},
  }};
};

template <>
struct EnumNames<HostVersion> {
  static constexpr std::array<std::pair<HostVersion, std::string_view>, 4> table{{
      {HostVersion::kPublished, "publishedVersion"},
      {HostVersion::kAccepted, "acceptedVersion"},
      {HostVersion::kSubmitted, "submittedVersion"},
      {HostVersion::kUnknown, "unknown"},
  }};
};

template <>
struct EnumNames<AuthorPosition> {
  static constexpr std::array<std::pair<AuthorPosition, std::string_view>, 3> table{{
      {AuthorPosition::kFirst, "first"},
      {AuthorPosition::kMiddle, "middle"},
      {AuthorPosition::kLast, "last"},
  }};
};

template <>
struct EnumNames<VenueType> {
  static constexpr std::array<std::pair<VenueType, std::string_view>, 3> table{{
      {VenueType::kJournal, "journal"},
      {VenueType::kConference, "conference"},
      {VenueType::kRepository, "repository"},
  }};
};

template <>
struct EnumNames<SourceClass> {
  static constexpr std::array<std::pair<SourceClass, std::string_view>, 3> table{{
      {SourceClass::kCrossref, "crossref"},
      {SourceClass::kPubmed, "pubmed"},
      {SourceClass::kRepository, "repository"},
  }};
};

// Precedence among sources for the same retrieved date; higher wins.
constexpr int source_rank(SourceClass source) noexcept {
  switch (source) {
    case SourceClass::kCrossref:
      return 3;
    case SourceClass::kPubmed:
      return 2;
    case SourceClass::kRepository:
      return 1;
  }
  return 0;
}

// "Author A, affiliated with institution(s) I, is a creator of work W."
struct Authorship {
  OpenAlexId author;
  std::vector<OpenAlexId> institutions;
  std::string raw_author_name;
  std::vector<std::string> raw_affiliation_strings;
  AuthorPosition position = AuthorPosition::kFirst;

  friend bool operator==(const Authorship&, const Authorship&) = default;
};

// One hosted copy of a work.
struct HostLocation {
  std::optional<OpenAlexId> venue;
  std::optional<std::string> url;
  HostVersion version = HostVersion::kUnknown;
  std::optional<std::string> license;
  bool primary = false;

  friend bool operator==(const HostLocation&, const HostLocation&) = default;
};

struct ConceptAssignment {
  OpenAlexId id;
  double score = 0.0;
  bool inherited = false;

  friend bool operator==(const ConceptAssignment&, const ConceptAssignment&) = default;
};

// Provenance of one source record folded into a work.
struct SourceRef {
  SourceClass source = SourceClass::kCrossref;
  std::string source_record_id;
  Date retrieved_date;

  friend bool operator==(const SourceRef&, const SourceRef&) = default;
};

struct Work {
  static constexpr EntityKind kKind = EntityKind::kWork;

  OpenAlexId id;
  std::optional<std::string> doi;
  std::optional<std::string> title;
  std::optional<std::string> abstract;
  std::optional<int> publication_year;
  WorkType work_type = WorkType::kOther;
  std::vector<Authorship> authorships;
  std::vector<HostLocation> locations;
  std::vector<ConceptAssignment> concepts;
  std::vector<OpenAlexId> referenced_works;
  std::vector<std::string> unresolved_references;
  std::uint64_t cited_by_count = 0;
  std::vector<SourceRef> sources;
  Date created_date;
  Date updated_date;

  friend bool operator==(const Work&, const Work&) = default;
};

struct Author {
  static constexpr EntityKind kKind = EntityKind::kAuthor;

  OpenAlexId id;
  std::optional<std::string> orcid;
  std::string display_name;
  std::vector<std::string> alternate_names;
  std::uint64_t works_count = 0;
  std::uint64_t cited_by_count = 0;
  Date created_date;
  Date updated_date;

  friend bool operator==(const Author&, const Author&) = default;
};

struct Venue {
  static constexpr EntityKind kKind = EntityKind::kVenue;

  OpenAlexId id;
  std::optional<std::string> issn_l;
  std::vector<std::string> issns;
  std::string display_name;
  VenueType venue_type = VenueType::kJournal;
  std::uint64_t works_count = 0;
  Date created_date;
  Date updated_date;

  friend bool operator==(const Venue&, const Venue&) = default;
};

struct Institution {
  static constexpr EntityKind kKind = EntityKind::kInstitution;

  OpenAlexId id;
  std::optional<std::string> ror;
  std::string display_name;
  std::vector<std::string> aliases;
  std::optional<std::string> country_code;
  std::uint64_t works_count = 0;
  Date created_date;
  Date updated_date;

  friend bool operator==(const Institution&, const Institution&) = default;
};

struct Concept {
  static constexpr EntityKind kKind = EntityKind::kConcept;

  OpenAlexId id;
  std::string wikidata;
  std::string display_name;
  int level = 0;
  std::vector<OpenAlexId> parents;
  std::vector<std::string> keywords;
  std::vector<double> keyword_weights;  // parallel to keywords
  std::uint64_t works_count = 0;
  Date created_date;
  Date updated_date;

  friend bool operator==(const Concept&, const Concept&) = default;
};

using Entity = std::variant<Work, Author, Venue, Institution, Concept>;

template <typename T>
concept EntityRecord = std::same_as<T, Work> || std::same_as<T, Author> || std::same_as<T, Venue> ||
                       std::same_as<T, Institution> || std::same_as<T, Concept>;

const OpenAlexId& entity_id(const Entity& entity) noexcept;
EntityKind entity_kind(const Entity& entity) noexcept;

// The record's canonical external id, if it carries one.
std::optional<std::string> entity_ceid(const Entity& entity);

// Pure invariant checks that need no store access. Each string names the
// violated rule; an empty result means the record is valid.
std::vector<std::string> validate(const Work& work);
std::vector<std::string> validate(const Author& author);
std::vector<std::string> validate(const Venue& venue);
std::vector<std::string> validate(const Institution& institution);
std::vector<std::string> validate(const Concept& concept_record);
std::vector<std::string> validate(const Entity& entity);

// Position for index `i` of `n` authorships: first, last, otherwise middle.
AuthorPosition position_for(std::size_t i, std::size_t n) noexcept;

}  // namespace openindex
