#include "openindex/entities.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "openindex/identifiers.hpp"

namespace openindex {

namespace {

template <typename Normalizer>
bool is_normalized(const std::string& value, Normalizer normalize) {
  try {
    return normalize(value) == value;
  } catch (const InvalidIdentifier&) {
    return false;
  }
}

void check_kind(std::vector<std::string>& out, const OpenAlexId& id, EntityKind expected,
                std::string_view field) {
  if (id.kind() != expected) {
    out.push_back(std::string(field) + ": " + id.short_form() + " is not a " +
                  std::string(kind_path(expected)) + " id");
  }
}

}  // namespace

const OpenAlexId& entity_id(const Entity& entity) noexcept {
  return std::visit([](const auto& record) -> const OpenAlexId& { return record.id; }, entity);
}

EntityKind entity_kind(const Entity& entity) noexcept { return entity_id(entity).kind(); }

std::optional<std::string> entity_ceid(const Entity& entity) {
  struct Visitor {
    std::optional<std::string> operator()(const Work& w) const { return w.doi; }
    std::optional<std::string> operator()(const Author& a) const { return a.orcid; }
    std::optional<std::string> operator()(const Venue& v) const { return v.issn_l; }
    std::optional<std::string> operator()(const Institution& i) const { return i.ror; }
    std::optional<std::string> operator()(const Concept& c) const { return c.wikidata; }
  };
  return std::visit(Visitor{}, entity);
}

AuthorPosition position_for(std::size_t i, std::size_t n) noexcept {
  if (i == 0) return AuthorPosition::kFirst;
  if (i + 1 == n) return AuthorPosition::kLast;
  return AuthorPosition::kMiddle;
}

std::vector<std::string> validate(const Work& work) {
  std::vector<std::string> out;
  check_kind(out, work.id, EntityKind::kWork, "id");
  if (work.doi && !is_normalized(*work.doi, normalize_doi)) {
    out.push_back("doi: '" + *work.doi + "' is not a normalized DOI");
  }
  for (std::size_t i = 0; i < work.authorships.size(); ++i) {
    const auto& a = work.authorships[i];
    check_kind(out, a.author, EntityKind::kAuthor, "authorships.author");
    if (a.position != position_for(i, work.authorships.size())) {
      out.push_back("authorships[" + std::to_string(i) + "]: position should be " +
                    std::string(to_string(position_for(i, work.authorships.size()))));
    }
    std::set<OpenAlexId> seen;
    for (const auto& inst : a.institutions) {
      check_kind(out, inst, EntityKind::kInstitution, "authorships.institutions");
      if (!seen.insert(inst).second) {
        out.push_back("authorships[" + std::to_string(i) + "]: duplicate institution " +
                      inst.short_form());
      }
    }
  }
  std::size_t primaries = 0;
  for (const auto& loc : work.locations) {
    if (loc.primary) ++primaries;
    if (!loc.venue && !loc.url) out.push_back("locations: a location needs a venue or a url");
    if (loc.venue) check_kind(out, *loc.venue, EntityKind::kVenue, "locations.venue");
  }
  if (!work.locations.empty() && primaries != 1) {
    out.push_back("locations: exactly one primary location required, found " +
                  std::to_string(primaries));
  }
  std::set<OpenAlexId> concept_ids;
  for (const auto& c : work.concepts) {
    check_kind(out, c.id, EntityKind::kConcept, "concepts.id");
    if (!(c.score >= 0.0 && c.score <= 1.0)) {
      out.push_back("concepts: score of " + c.id.short_form() + " outside [0,1]");
    }
    if (!concept_ids.insert(c.id).second) {
      out.push_back("concepts: duplicate concept " + c.id.short_form());
    }
  }
  std::set<OpenAlexId> refs;
  for (const auto& r : work.referenced_works) {
    check_kind(out, r, EntityKind::kWork, "referenced_works");
    if (r == work.id) out.push_back("referenced_works: work references itself");
    if (!refs.insert(r).second) out.push_back("referenced_works: duplicate " + r.short_form());
  }
  std::set<std::string> unresolved;
  for (const auto& d : work.unresolved_references) {
    if (!is_normalized(d, normalize_doi)) {
      out.push_back("unresolved_references: '" + d + "' is not a normalized DOI");
    }
    if (!unresolved.insert(d).second) out.push_back("unresolved_references: duplicate " + d);
  }
  return out;
}

std::vector<std::string> validate(const Author& author) {
  std::vector<std::string> out;
  check_kind(out, author.id, EntityKind::kAuthor, "id");
  if (author.orcid && !is_normalized(*author.orcid, validate_orcid)) {
    out.push_back("orcid: '" + *author.orcid + "' is not a valid normalized ORCID");
  }
  if (author.display_name.empty()) out.push_back("display_name: empty");
  return out;
}

std::vector<std::string> validate(const Venue& venue) {
  std::vector<std::string> out;
  check_kind(out, venue.id, EntityKind::kVenue, "id");
  for (const auto& issn : venue.issns) {
    if (!is_normalized(issn, validate_issn)) {
      out.push_back("issns: '" + issn + "' is not a valid normalized ISSN");
    }
  }
  if (venue.issn_l) {
    if (!is_normalized(*venue.issn_l, validate_issn)) {
      out.push_back("issn_l: '" + *venue.issn_l + "' is not a valid normalized ISSN");
    }
    if (std::find(venue.issns.begin(), venue.issns.end(), *venue.issn_l) == venue.issns.end()) {
      out.push_back("issn_l: " + *venue.issn_l + " missing from issns");
    }
  }
  if (venue.display_name.empty()) out.push_back("display_name: empty");
  return out;
}

std::vector<std::string> validate(const Institution& institution) {
  std::vector<std::string> out;
  check_kind(out, institution.id, EntityKind::kInstitution, "id");
  if (institution.ror && !is_normalized(*institution.ror, validate_ror)) {
    out.push_back("ror: '" + *institution.ror + "' is not a valid normalized ROR id");
  }
  if (institution.country_code) {
    const auto& cc = *institution.country_code;
    if (cc.size() != 2 || !std::isupper(static_cast<unsigned char>(cc[0])) ||
        !std::isupper(static_cast<unsigned char>(cc[1]))) {
      out.push_back("country_code: '" + cc + "' is not a 2-letter uppercase code");
    }
  }
  if (institution.display_name.empty()) out.push_back("display_name: empty");
  return out;
}

std::vector<std::string> validate(const Concept& concept_record) {
  std::vector<std::string> out;
  const auto& c = concept_record;
  check_kind(out, c.id, EntityKind::kConcept, "id");
  if (!is_normalized(c.wikidata, validate_wikidata)) {
    out.push_back("wikidata: '" + c.wikidata + "' is not a valid normalized Wikidata id");
  }
  if (c.level < 0 || c.level > 5) out.push_back("level: must be within [0,5]");
  if ((c.level == 0) != c.parents.empty()) {
    out.push_back("parents: level 0 iff no parents");
  }
  for (const auto& p : c.parents) {
    check_kind(out, p, EntityKind::kConcept, "parents");
    if (p == c.id) out.push_back("parents: concept is its own parent");
  }
  if (c.keyword_weights.size() != c.keywords.size()) {
    out.push_back("keyword_weights: length differs from keywords");
  }
  for (double w : c.keyword_weights) {
    if (!(w > 0.0 && w <= 1.0)) out.push_back("keyword_weights: weight outside (0,1]");
  }
  for (const auto& k : c.keywords) {
    if (k.empty() || std::any_of(k.begin(), k.end(), [](char ch) {
          return std::isupper(static_cast<unsigned char>(ch)) || std::isspace(static_cast<unsigned char>(ch));
        })) {
      out.push_back("keywords: '" + k + "' is not a lowercase token");
    }
  }
  if (c.display_name.empty()) out.push_back("display_name: empty");
  return out;
}

std::vector<std::string> validate(const Entity& entity) {
  return std::visit([](const auto& record) { return validate(record); }, entity);
}

}  // namespace openindex
