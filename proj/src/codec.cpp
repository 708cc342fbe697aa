#include "openindex/codec.hpp"

#include "openindex/errors.hpp"

namespace openindex {

namespace {

Json id_json(const OpenAlexId& id) { return id.url(); }

template <typename T>
Json opt_json(const std::optional<T>& value) {
  return value ? Json(*value) : Json(nullptr);
}

Json opt_id_json(const std::optional<OpenAlexId>& id) {
  return id ? id_json(*id) : Json(nullptr);
}

Json id_list(const std::vector<OpenAlexId>& ids) {
  Json out = Json::array();
  for (const auto& id : ids) out.push_back(id_json(id));
  return out;
}

// Reading helpers. All throw ValidationError with the field name.

const Json& field(const Json& j, const char* name) {
  if (!j.is_object()) throw ValidationError("record is not a JSON object");
  auto it = j.find(name);
  if (it == j.end()) throw ValidationError(std::string("missing field '") + name + "'");
  return *it;
}

std::string str(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_string()) throw ValidationError(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

std::optional<std::string> opt_str(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) throw ValidationError(std::string("field '") + name + "' must be a string or null");
  return v.get<std::string>();
}

std::uint64_t count(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ValidationError(std::string("field '") + name + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

OpenAlexId id_from(const Json& v, const char* name) {
  if (!v.is_string()) throw ValidationError(std::string("field '") + name + "' must be an id string");
  return parse_id(v.get<std::string>());
}

std::optional<OpenAlexId> opt_id(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (v.is_null()) return std::nullopt;
  return id_from(v, name);
}

std::vector<OpenAlexId> ids(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_array()) throw ValidationError(std::string("field '") + name + "' must be an array");
  std::vector<OpenAlexId> out;
  out.reserve(v.size());
  for (const auto& item : v) out.push_back(id_from(item, name));
  return out;
}

std::vector<std::string> strings(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_array()) throw ValidationError(std::string("field '") + name + "' must be an array");
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const auto& item : v) {
    if (!item.is_string()) throw ValidationError(std::string("field '") + name + "' must hold strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

template <typename E>
E enum_field(const Json& j, const char* name) {
  auto text = str(j, name);
  auto value = enum_from_string<E>(text);
  if (!value) throw ValidationError(std::string("field '") + name + "' has unknown value '" + text + "'");
  return *value;
}

Date date_field(const Json& j, const char* name) { return Date::parse(str(j, name)); }

const Json& array_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_array()) throw ValidationError(std::string("field '") + name + "' must be an array");
  return v;
}

}  // namespace

Json to_json(const Work& w) {
  Json j;
  j["id"] = id_json(w.id);
  j["doi"] = opt_json(w.doi);
  j["title"] = opt_json(w.title);
  j["abstract"] = opt_json(w.abstract);
  j["publication_year"] = opt_json(w.publication_year);
  j["work_type"] = to_string(w.work_type);
  Json authorships = Json::array();
  for (const auto& a : w.authorships) {
    Json aj;
    aj["author"] = id_json(a.author);
    aj["institutions"] = id_list(a.institutions);
    aj["raw_author_name"] = a.raw_author_name;
    aj["raw_affiliation_strings"] = a.raw_affiliation_strings;
    aj["position"] = to_string(a.position);
    authorships.push_back(std::move(aj));
  }
  j["authorships"] = std::move(authorships);
  Json locations = Json::array();
  for (const auto& l : w.locations) {
    Json lj;
    lj["venue"] = opt_id_json(l.venue);
    lj["url"] = opt_json(l.url);
    lj["version"] = to_string(l.version);
    lj["license"] = opt_json(l.license);
    lj["primary"] = l.primary;
    locations.push_back(std::move(lj));
  }
  j["locations"] = std::move(locations);
  Json concepts = Json::array();
  for (const auto& c : w.concepts) {
    Json cj;
    cj["id"] = id_json(c.id);
    cj["score"] = c.score;
    cj["inherited"] = c.inherited;
    concepts.push_back(std::move(cj));
  }
  j["concepts"] = std::move(concepts);
  j["referenced_works"] = id_list(w.referenced_works);
  j["unresolved_references"] = w.unresolved_references;
  j["cited_by_count"] = w.cited_by_count;
  Json sources = Json::array();
  for (const auto& s : w.sources) {
    Json sj;
    sj["source"] = to_string(s.source);
    sj["source_record_id"] = s.source_record_id;
    sj["retrieved_date"] = s.retrieved_date.iso();
    sources.push_back(std::move(sj));
  }
  j["sources"] = std::move(sources);
  j["created_date"] = w.created_date.iso();
  j["updated_date"] = w.updated_date.iso();
  return j;
}

Json to_json(const Author& a) {
  Json j;
  j["id"] = id_json(a.id);
  j["orcid"] = opt_json(a.orcid);
  j["display_name"] = a.display_name;
  j["alternate_names"] = a.alternate_names;
  j["works_count"] = a.works_count;
  j["cited_by_count"] = a.cited_by_count;
  j["created_date"] = a.created_date.iso();
  j["updated_date"] = a.updated_date.iso();
  return j;
}

Json to_json(const Venue& v) {
  Json j;
  j["id"] = id_json(v.id);
  j["issn_l"] = opt_json(v.issn_l);
  j["issns"] = v.issns;
  j["display_name"] = v.display_name;
  j["venue_type"] = to_string(v.venue_type);
  j["works_count"] = v.works_count;
  j["created_date"] = v.created_date.iso();
  j["updated_date"] = v.updated_date.iso();
  return j;
}

Json to_json(const Institution& i) {
  Json j;
  j["id"] = id_json(i.id);
  j["ror"] = opt_json(i.ror);
  j["display_name"] = i.display_name;
  j["aliases"] = i.aliases;
  j["country_code"] = opt_json(i.country_code);
  j["works_count"] = i.works_count;
  j["created_date"] = i.created_date.iso();
  j["updated_date"] = i.updated_date.iso();
  return j;
}

Json to_json(const Concept& c) {
  Json j;
  j["id"] = id_json(c.id);
  j["wikidata"] = c.wikidata;
  j["display_name"] = c.display_name;
  j["level"] = c.level;
  j["parents"] = id_list(c.parents);
  j["keywords"] = c.keywords;
  j["keyword_weights"] = c.keyword_weights;
  j["works_count"] = c.works_count;
  j["created_date"] = c.created_date.iso();
  j["updated_date"] = c.updated_date.iso();
  return j;
}

Json to_json(const Entity& entity) {
  return std::visit([](const auto& record) { return to_json(record); }, entity);
}

template <>
Work record_from_json<Work>(const Json& j) {
  Work w{.id = id_from(field(j, "id"), "id")};
  w.doi = opt_str(j, "doi");
  w.title = opt_str(j, "title");
  w.abstract = opt_str(j, "abstract");
  if (const Json& year = field(j, "publication_year"); !year.is_null()) {
    if (!year.is_number_integer()) throw ValidationError("field 'publication_year' must be an integer");
    w.publication_year = year.get<int>();
  }
  w.work_type = enum_field<WorkType>(j, "work_type");
  for (const auto& aj : array_field(j, "authorships")) {
    Authorship a{.author = id_from(field(aj, "author"), "author")};
    a.institutions = ids(aj, "institutions");
    a.raw_author_name = str(aj, "raw_author_name");
    a.raw_affiliation_strings = strings(aj, "raw_affiliation_strings");
    a.position = enum_field<AuthorPosition>(aj, "position");
    w.authorships.push_back(std::move(a));
  }
  for (const auto& lj : array_field(j, "locations")) {
    HostLocation l;
    l.venue = opt_id(lj, "venue");
    l.url = opt_str(lj, "url");
    l.version = enum_field<HostVersion>(lj, "version");
    l.license = opt_str(lj, "license");
    const Json& primary = field(lj, "primary");
    if (!primary.is_boolean()) throw ValidationError("field 'primary' must be a boolean");
    l.primary = primary.get<bool>();
    w.locations.push_back(std::move(l));
  }
  for (const auto& cj : array_field(j, "concepts")) {
    const Json& score = field(cj, "score");
    const Json& inherited = field(cj, "inherited");
    if (!score.is_number() || !inherited.is_boolean()) {
      throw ValidationError("concept assignment needs numeric score and boolean inherited");
    }
    w.concepts.push_back(ConceptAssignment{id_from(field(cj, "id"), "concepts.id"),
                                           score.get<double>(), inherited.get<bool>()});
  }
  w.referenced_works = ids(j, "referenced_works");
  w.unresolved_references = strings(j, "unresolved_references");
  w.cited_by_count = count(j, "cited_by_count");
  for (const auto& sj : array_field(j, "sources")) {
    w.sources.push_back(SourceRef{enum_field<SourceClass>(sj, "source"), str(sj, "source_record_id"),
                                  date_field(sj, "retrieved_date")});
  }
  w.created_date = date_field(j, "created_date");
  w.updated_date = date_field(j, "updated_date");
  return w;
}

template <>
Author record_from_json<Author>(const Json& j) {
  Author a{.id = id_from(field(j, "id"), "id")};
  a.orcid = opt_str(j, "orcid");
  a.display_name = str(j, "display_name");
  a.alternate_names = strings(j, "alternate_names");
  a.works_count = count(j, "works_count");
  a.cited_by_count = count(j, "cited_by_count");
  a.created_date = date_field(j, "created_date");
  a.updated_date = date_field(j, "updated_date");
  return a;
}

template <>
Venue record_from_json<Venue>(const Json& j) {
  Venue v{.id = id_from(field(j, "id"), "id")};
  v.issn_l = opt_str(j, "issn_l");
  v.issns = strings(j, "issns");
  v.display_name = str(j, "display_name");
  v.venue_type = enum_field<VenueType>(j, "venue_type");
  v.works_count = count(j, "works_count");
  v.created_date = date_field(j, "created_date");
  v.updated_date = date_field(j, "updated_date");
  return v;
}

template <>
Institution record_from_json<Institution>(const Json& j) {
  Institution i{.id = id_from(field(j, "id"), "id")};
  i.ror = opt_str(j, "ror");
  i.display_name = str(j, "display_name");
  i.aliases = strings(j, "aliases");
  i.country_code = opt_str(j, "country_code");
  i.works_count = count(j, "works_count");
  i.created_date = date_field(j, "created_date");
  i.updated_date = date_field(j, "updated_date");
  return i;
}

template <>
Concept record_from_json<Concept>(const Json& j) {
  Concept c{.id = id_from(field(j, "id"), "id")};
  c.wikidata = str(j, "wikidata");
  c.display_name = str(j, "display_name");
  const Json& level = field(j, "level");
  if (!level.is_number_integer()) throw ValidationError("field 'level' must be an integer");
  c.level = level.get<int>();
  c.parents = ids(j, "parents");
  c.keywords = strings(j, "keywords");
  for (const auto& w : array_field(j, "keyword_weights")) {
    if (!w.is_number()) throw ValidationError("field 'keyword_weights' must hold numbers");
    c.keyword_weights.push_back(w.get<double>());
  }
  c.works_count = count(j, "works_count");
  c.created_date = date_field(j, "created_date");
  c.updated_date = date_field(j, "updated_date");
  return c;
}

Entity entity_from_json(EntityKind kind, const Json& json) {
  try {
    switch (kind) {
      case EntityKind::kWork:
        return record_from_json<Work>(json);
      case EntityKind::kAuthor:
        return record_from_json<Author>(json);
      case EntityKind::kVenue:
        return record_from_json<Venue>(json);
      case EntityKind::kInstitution:
        return record_from_json<Institution>(json);
      case EntityKind::kConcept:
        return record_from_json<Concept>(json);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed record: ") + e.what());
  } catch (const IdParseError& e) {
    throw ValidationError(std::string("malformed id: ") + e.what());
  }
  throw ValidationError("unknown entity kind");
}

std::string to_line(const Entity& entity) {
  return to_json(entity).dump(-1, ' ', false, Json::error_handler_t::replace);
}

}  // namespace openindex
