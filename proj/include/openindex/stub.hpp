#pragma once

#include <optional>
#include <string>
#include <vector>

#include "openindex/date.hpp"
#include "openindex/entities.hpp"

namespace openindex {

struct StubAuthor {
  std::string raw_name;                // never empty
  std::optional<std::string> orcid;    // normalized
  std::vector<std::string> raw_affiliations;

  friend bool operator==(const StubAuthor&, const StubAuthor&) = default;
};

// Source-neutral record produced by the parsers. Identifier fields are
// already normalized and checksum-valid.
struct WorkStub {
  SourceClass source = SourceClass::kCrossref;
  std::string source_record_id;
  std::optional<std::string> doi;
  std::optional<std::string> title;
  std::optional<std::string> abstract;
  std::optional<int> publication_year;
  WorkType work_type = WorkType::kOther;
  std::vector<StubAuthor> stub_authors;
  std::optional<std::string> venue_name;
  std::optional<VenueType> venue_type;  // hint for venue creation
  std::vector<std::string> issns;
  std::optional<std::string> url;
  HostVersion version_hint = HostVersion::kUnknown;
  std::optional<std::string> license;
  std::vector<std::string> referenced_dois;
  Date retrieved_date;
  // Field-level defects skipped while parsing.
  std::vector<std::string> warnings;

  friend bool operator==(const WorkStub&, const WorkStub&) = default;
};

}  // namespace openindex
