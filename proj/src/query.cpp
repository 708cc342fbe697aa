#include "openindex/query.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

#include "openindex/identifiers.hpp"
#include "openindex/text.hpp"

namespace openindex {

namespace {

using namespace std::string_view_literals;

constexpr std::array kWorkAttributes = {"publication_year"sv, "work_type"sv, "doi"sv,
                                        "authorships.author"sv, "authorships.institutions"sv,
                                        "locations.venue"sv, "concepts.id"sv, "has_doi"sv};
constexpr std::array kAuthorAttributes = {"orcid"sv, "display_name"sv, "has_orcid"sv};
constexpr std::array kVenueAttributes = {"issn_l"sv, "venue_type"sv};
constexpr std::array kInstitutionAttributes = {"ror"sv, "country_code"sv};
constexpr std::array kConceptAttributes = {"level"sv, "wikidata"sv, "parents"sv};

constexpr std::array kWorkSorts = {"id"sv, "publication_year"sv, "cited_by_count"sv, "title"sv};
constexpr std::array kAuthorSorts = {"id"sv, "display_name"sv, "works_count"sv, "cited_by_count"sv};
constexpr std::array kVenueSorts = {"id"sv, "display_name"sv, "works_count"sv};
constexpr std::array kInstitutionSorts = {"id"sv, "display_name"sv, "works_count"sv};
constexpr std::array kConceptSorts = {"id"sv, "display_name"sv, "level"sv, "works_count"sv};

std::string token_of(std::string_view attribute, std::string_view value) {
  return std::string(attribute) + ":" + std::string(value);
}

std::string canonical_id(EntityKind expected, std::string_view attribute, std::string_view raw) {
  try {
    OpenAlexId id = parse_id(raw);
    if (id.kind() != expected) {
      throw QueryError(std::string(raw), "filter " + std::string(attribute) + " expects a " +
                                             std::string(kind_path(expected)) + " id, got '" +
                                             std::string(raw) + "'");
    }
    return id.short_form();
  } catch (const IdParseError& e) {
    throw QueryError(std::string(raw), "filter " + std::string(attribute) + ": " + e.what());
  }
}

std::string canonical_int(std::string_view attribute, std::string_view raw) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
  if (raw.empty() || ec != std::errc{} || ptr != raw.data() + raw.size()) {
    throw QueryError(std::string(raw), "filter " + std::string(attribute) + " expects an integer, got '" +
                                           std::string(raw) + "'");
  }
  return std::to_string(value);
}

std::string canonical_bool(std::string_view attribute, std::string_view raw) {
  if (raw == "true" || raw == "false") return std::string(raw);
  throw QueryError(std::string(raw), "filter " + std::string(attribute) + " expects true or false, got '" +
                                         std::string(raw) + "'");
}

std::string canonical_external(IdScheme scheme, std::string_view attribute, std::string_view raw) {
  try {
    return normalize_identifier(scheme, raw);
  } catch (const InvalidIdentifier& e) {
    throw QueryError(std::string(raw), "filter " + std::string(attribute) + ": " + e.what());
  }
}

template <typename E>
std::string canonical_enum(std::string_view attribute, std::string_view raw) {
  if (enum_from_string<E>(raw)) return std::string(raw);
  throw QueryError(std::string(raw), "filter " + std::string(attribute) + " has no value '" +
                                         std::string(raw) + "'");
}

template <typename Range>
void push_ids(std::vector<std::string>& out, const Range& ids) {
  for (const auto& id : ids) out.push_back(id.short_form());
}

std::vector<std::string> work_values(const Work& w, std::string_view attribute) {
  std::vector<std::string> out;
  if (attribute == "publication_year") {
    if (w.publication_year) out.push_back(std::to_string(*w.publication_year));
  } else if (attribute == "work_type") {
    out.emplace_back(to_string(w.work_type));
  } else if (attribute == "doi") {
    if (w.doi) out.push_back(*w.doi);
  } else if (attribute == "authorships.author") {
    for (const auto& a : w.authorships) out.push_back(a.author.short_form());
  } else if (attribute == "authorships.institutions") {
    for (const auto& a : w.authorships) push_ids(out, a.institutions);
  } else if (attribute == "locations.venue") {
    for (const auto& l : w.locations) {
      if (l.venue) out.push_back(l.venue->short_form());
    }
  } else if (attribute == "concepts.id") {
    for (const auto& c : w.concepts) out.push_back(c.id.short_form());
  } else if (attribute == "has_doi") {
    out.emplace_back(w.doi ? "true" : "false");
  }
  return out;
}

std::vector<std::string> author_values(const Author& a, std::string_view attribute) {
  if (attribute == "orcid") return a.orcid ? std::vector{*a.orcid} : std::vector<std::string>{};
  if (attribute == "display_name") return {a.display_name};
  if (attribute == "has_orcid") return {a.orcid ? "true" : "false"};
  return {};
}

std::vector<std::string> venue_values(const Venue& v, std::string_view attribute) {
  if (attribute == "issn_l") return v.issn_l ? std::vector{*v.issn_l} : std::vector<std::string>{};
  if (attribute == "venue_type") return {std::string(to_string(v.venue_type))};
  return {};
}

std::vector<std::string> institution_values(const Institution& i, std::string_view attribute) {
  if (attribute == "ror") return i.ror ? std::vector{*i.ror} : std::vector<std::string>{};
  if (attribute == "country_code") {
    return i.country_code ? std::vector{*i.country_code} : std::vector<std::string>{};
  }
  return {};
}

std::vector<std::string> concept_values(const Concept& c, std::string_view attribute) {
  std::vector<std::string> out;
  if (attribute == "level") out.push_back(std::to_string(c.level));
  if (attribute == "wikidata") out.push_back(c.wikidata);
  if (attribute == "parents") push_ids(out, c.parents);
  return out;
}

}  // namespace

std::span<const std::string_view> filter_attributes(EntityKind kind) noexcept {
  switch (kind) {
    case EntityKind::kWork:
      return kWorkAttributes;
    case EntityKind::kAuthor:
      return kAuthorAttributes;
    case EntityKind::kVenue:
      return kVenueAttributes;
    case EntityKind::kInstitution:
      return kInstitutionAttributes;
    case EntityKind::kConcept:
      return kConceptAttributes;
  }
  return {};
}

std::span<const std::string_view> sort_fields(EntityKind kind) noexcept {
  switch (kind) {
    case EntityKind::kWork:
      return kWorkSorts;
    case EntityKind::kAuthor:
      return kAuthorSorts;
    case EntityKind::kVenue:
      return kVenueSorts;
    case EntityKind::kInstitution:
      return kInstitutionSorts;
    case EntityKind::kConcept:
      return kConceptSorts;
  }
  return {};
}

std::string canonical_filter_value(EntityKind kind, std::string_view attribute, std::string_view raw) {
  auto allowed = filter_attributes(kind);
  if (std::find(allowed.begin(), allowed.end(), attribute) == allowed.end()) {
    throw QueryError(std::string(attribute), "unknown filter attribute '" + std::string(attribute) +
                                                 "' for " + std::string(kind_path(kind)));
  }
  if (attribute == "publication_year" || attribute == "level") return canonical_int(attribute, raw);
  if (attribute == "has_doi" || attribute == "has_orcid") return canonical_bool(attribute, raw);
  if (attribute == "work_type") return canonical_enum<WorkType>(attribute, raw);
  if (attribute == "venue_type") return canonical_enum<VenueType>(attribute, raw);
  if (attribute == "doi") return canonical_external(IdScheme::kDoi, attribute, raw);
  if (attribute == "orcid") return canonical_external(IdScheme::kOrcid, attribute, raw);
  if (attribute == "issn_l") return canonical_external(IdScheme::kIssn, attribute, raw);
  if (attribute == "ror") return canonical_external(IdScheme::kRor, attribute, raw);
  if (attribute == "wikidata") return canonical_external(IdScheme::kWikidata, attribute, raw);
  if (attribute == "authorships.author") return canonical_id(EntityKind::kAuthor, attribute, raw);
  if (attribute == "authorships.institutions") return canonical_id(EntityKind::kInstitution, attribute, raw);
  if (attribute == "locations.venue") return canonical_id(EntityKind::kVenue, attribute, raw);
  if (attribute == "concepts.id" || attribute == "parents") return canonical_id(EntityKind::kConcept, attribute, raw);
  if (attribute == "country_code") {
    std::string upper(raw);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); });
    if (upper.size() != 2 || !std::all_of(upper.begin(), upper.end(), [](char c) { return c >= 'A' && c <= 'Z'; })) {
      throw QueryError(std::string(raw), "filter country_code expects a 2-letter code, got '" +
                                             std::string(raw) + "'");
    }
    return upper;
  }
  if (raw.empty()) throw QueryError(token_of(attribute, raw), "empty filter value for " + std::string(attribute));
  return std::string(raw);  // display_name: exact match
}

FilterExpr& FilterExpr::add(EntityKind kind, std::string_view attribute,
                            const std::vector<std::string>& raw_values) {
  if (raw_values.empty()) {
    throw QueryError(std::string(attribute), "filter " + std::string(attribute) + " has no value");
  }
  FilterClause clause{std::string(attribute), raw_values.size() > 1 ? FilterOp::kOneOf : FilterOp::kEquals, {}};
  for (const auto& raw : raw_values) clause.values.push_back(canonical_filter_value(kind, attribute, raw));
  clauses_.push_back(std::move(clause));
  return *this;
}

FilterExpr FilterExpr::parse(EntityKind kind, std::string_view text) {
  FilterExpr expr;
  if (text::trim(text).empty()) return expr;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view conjunct = text.substr(start, end - start);
    start = end + 1;
    auto colon = conjunct.find(':');
    if (conjunct.empty() || colon == std::string_view::npos || colon == 0) {
      throw QueryError(std::string(conjunct), "malformed filter conjunct '" + std::string(conjunct) +
                                                  "' (expected attribute:value)");
    }
    std::string_view attribute = conjunct.substr(0, colon);
    std::string_view value = conjunct.substr(colon + 1);
    std::vector<std::string> alternatives;
    std::size_t vstart = 0;
    while (vstart <= value.size()) {
      auto vend = value.find('|', vstart);
      if (vend == std::string_view::npos) vend = value.size();
      alternatives.emplace_back(value.substr(vstart, vend - vstart));
      vstart = vend + 1;
    }
    // Validate the attribute before any value so the error names it.
    auto allowed = filter_attributes(kind);
    if (std::find(allowed.begin(), allowed.end(), attribute) == allowed.end()) {
      throw QueryError(std::string(attribute), "unknown filter attribute '" + std::string(attribute) +
                                                   "' for " + std::string(kind_path(kind)));
    }
    for (const auto& alt : alternatives) {
      if (alt.empty()) {
        throw QueryError(std::string(conjunct), "empty value in filter '" + std::string(conjunct) + "'");
      }
    }
    expr.add(kind, attribute, alternatives);
  }
  return expr;
}

std::vector<std::string> attribute_values(const Work& record, std::string_view attribute) {
  return work_values(record, attribute);
}
std::vector<std::string> attribute_values(const Author& record, std::string_view attribute) {
  return author_values(record, attribute);
}
std::vector<std::string> attribute_values(const Venue& record, std::string_view attribute) {
  return venue_values(record, attribute);
}
std::vector<std::string> attribute_values(const Institution& record, std::string_view attribute) {
  return institution_values(record, attribute);
}
std::vector<std::string> attribute_values(const Concept& record, std::string_view attribute) {
  return concept_values(record, attribute);
}

std::vector<std::string> attribute_values(const Entity& entity, std::string_view attribute) {
  return std::visit([&](const auto& record) { return attribute_values(record, attribute); }, entity);
}

bool matches(const Entity& entity, const FilterExpr& filter) {
  return std::visit([&](const auto& record) { return matches(record, filter); }, entity);
}

SortSpec SortSpec::parse(EntityKind kind, std::string_view text) {
  SortSpec spec;
  if (text::trim(text).empty()) return spec;
  std::string_view field = text;
  if (auto colon = text.find(':'); colon != std::string_view::npos) {
    field = text.substr(0, colon);
    std::string_view dir = text.substr(colon + 1);
    if (dir == "desc") {
      spec.descending = true;
    } else if (dir != "asc") {
      throw QueryError(std::string(dir), "sort direction must be asc or desc, got '" + std::string(dir) + "'");
    }
  }
  auto allowed = sort_fields(kind);
  if (std::find(allowed.begin(), allowed.end(), field) == allowed.end()) {
    throw QueryError(std::string(field), "unknown sort field '" + std::string(field) + "' for " +
                                             std::string(kind_path(kind)));
  }
  spec.field = std::string(field);
  return spec;
}

SortKey sort_key(const Work& w, std::string_view field) {
  if (field == "id") return static_cast<std::int64_t>(w.id.serial());
  if (field == "publication_year") {
    return w.publication_year ? SortKey(static_cast<std::int64_t>(*w.publication_year)) : SortKey{};
  }
  if (field == "cited_by_count") return static_cast<std::int64_t>(w.cited_by_count);
  if (field == "title") return w.title ? SortKey(*w.title) : SortKey{};
  return {};
}

SortKey sort_key(const Author& a, std::string_view field) {
  if (field == "id") return static_cast<std::int64_t>(a.id.serial());
  if (field == "display_name") return a.display_name;
  if (field == "works_count") return static_cast<std::int64_t>(a.works_count);
  if (field == "cited_by_count") return static_cast<std::int64_t>(a.cited_by_count);
  return {};
}

SortKey sort_key(const Venue& v, std::string_view field) {
  if (field == "id") return static_cast<std::int64_t>(v.id.serial());
  if (field == "display_name") return v.display_name;
  if (field == "works_count") return static_cast<std::int64_t>(v.works_count);
  return {};
}

SortKey sort_key(const Institution& i, std::string_view field) {
  if (field == "id") return static_cast<std::int64_t>(i.id.serial());
  if (field == "display_name") return i.display_name;
  if (field == "works_count") return static_cast<std::int64_t>(i.works_count);
  return {};
}

SortKey sort_key(const Concept& c, std::string_view field) {
  if (field == "id") return static_cast<std::int64_t>(c.id.serial());
  if (field == "display_name") return c.display_name;
  if (field == "level") return static_cast<std::int64_t>(c.level);
  if (field == "works_count") return static_cast<std::int64_t>(c.works_count);
  return {};
}

SortKey sort_key(const Entity& entity, std::string_view field) {
  return std::visit([&](const auto& record) { return sort_key(record, field); }, entity);
}

}  // namespace openindex
