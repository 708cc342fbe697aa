#include "openindex/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "openindex/text.hpp"

namespace openindex {

namespace {

template <typename T>
bool push_unique(std::vector<T>& v, const T& x) {
  if (std::find(v.begin(), v.end(), x) != v.end()) return false;
  v.push_back(x);
  return true;
}

std::pair<Date, int> precedence(const SourceRef& s) { return {s.retrieved_date, source_rank(s.source)}; }

}  // namespace

Json report_json(const IngestReport& report) {
  Json j;
  j["source_record_id"] = report.source_record_id;
  j["outcome"] = to_string(report.outcome);
  j["work_id"] = report.work_id ? Json(report.work_id->url()) : Json(nullptr);
  j["warnings"] = report.warnings;
  return j;
}

Ingestor::Ingestor(GraphStore& store, PipelineConfig config) : store_(store), config_(std::move(config)) {
  refresh();
}

void Ingestor::refresh() {
  auto concepts = store_.all<Concept>();
  tree_ = concepts.empty() ? ConceptTree{} : ConceptTree::from_concepts(std::move(concepts));
  auto institutions = store_.all<Institution>();
  registry_ = InstitutionRegistry(institutions);
}

const std::optional<std::string>& Ingestor::name_key(const std::string& raw) {
  auto it = name_keys_.find(raw);
  if (it != name_keys_.end()) return it->second;
  std::optional<std::string> key;
  try {
    key = normalize_name(raw);
  } catch (const ValidationError&) {
  }
  return name_keys_.emplace(raw, std::move(key)).first->second;
}

std::vector<AuthorSignature> Ingestor::candidates(const std::string& key, const std::optional<std::string>& orcid,
                                                  const std::set<OpenAlexId>& exclude) {
  std::set<OpenAlexId> ids;
  for (const auto& id : store_.authors_by_family(split_name_key(key).family)) ids.insert(id);
  std::optional<OpenAlexId> orcid_owner;
  if (orcid) {
    orcid_owner = store_.id_by_ceid(EntityKind::kAuthor, *orcid);
    if (orcid_owner) ids.insert(*orcid_owner);
  }

  std::vector<AuthorSignature> out;
  for (const auto& id : ids) {
    if (exclude.contains(id)) continue;
    AuthorSignature sig{.author = id};
    std::vector<std::string> names;
    store_.visit_record<Author>(id, [&](const Author& a) {
      sig.orcid = a.orcid;
      names.push_back(a.display_name);
      names.insert(names.end(), a.alternate_names.begin(), a.alternate_names.end());
    });
    bool compatible = false;
    for (const auto& n : names) {
      if (const auto& k = name_key(n)) {
        sig.name_keys.insert(*k);
        compatible = compatible || name_keys_compatible(*k, key);
      }
    }
    if (!compatible && id != orcid_owner) continue;

    for (const auto& wid : store_.works_by_author(id)) {
      std::vector<std::string> coauthors;
      store_.visit_record<Work>(wid, [&](const Work& w) {
        sig.work_ids.insert(w.id);
        for (const auto& l : w.locations) {
          if (l.venue) sig.venue_ids.insert(*l.venue);
        }
        sig.cited_work_ids.insert(w.referenced_works.begin(), w.referenced_works.end());
        for (const auto& a : w.authorships) {
          if (a.author != id) coauthors.push_back(a.raw_author_name);
        }
      });
      for (const auto& c : coauthors) {
        if (const auto& k = name_key(c)) sig.coauthor_name_keys.insert(*k);
      }
    }
    out.push_back(std::move(sig));
  }
  return out;
}

IngestReport Ingestor::ingest(const WorkStub& stub) {
  auto gate = store_.writer_gate();
  try {
    return ingest_locked(stub);
  } catch (const ValidationError& e) {
    return {stub.source_record_id, IngestOutcome::kRejected, std::nullopt, {e.what()}};
  } catch (const ConflictError& e) {
    return {stub.source_record_id, IngestOutcome::kRejected, std::nullopt, {e.what()}};
  }
}

IngestReport Ingestor::ingest_locked(const WorkStub& stub) {
  IngestReport report{stub.source_record_id, IngestOutcome::kCreated, std::nullopt, stub.warnings};
  if (!stub.doi && !stub.title) throw ValidationError("stub has neither DOI nor title");

  std::optional<Venue> venue_write;
  std::map<OpenAlexId, Author> author_writes;

  // (1) Venue: ISSN-L first, then display name.
  std::optional<OpenAlexId> venue_id;
  if (!stub.issns.empty()) {
    auto first = config_.issn_table.resolve(stub.issns.front());
    std::vector<std::string> group{first.issn_l};
    for (const auto& issn : stub.issns) {
      auto r = config_.issn_table.resolve(issn);
      if (r.issn_l == first.issn_l || (r.fallback && first.fallback)) {
        push_unique(group, issn);
      } else {
        report.warnings.push_back("ISSN " + issn + " belongs to ISSN-L " + r.issn_l + ", not " + first.issn_l);
      }
    }
    if (auto id = store_.id_by_ceid(EntityKind::kVenue, first.issn_l)) {
      venue_id = id;
      Venue v = *store_.get_as<Venue>(*id);
      bool changed = false;
      for (const auto& issn : group) changed = push_unique(v.issns, issn) || changed;
      if (changed) venue_write = std::move(v);
    } else {
      Venue v{.id = store_.mint(EntityKind::kVenue)};
      v.issn_l = first.issn_l;
      v.issns = group;
      v.display_name = stub.venue_name.value_or(first.issn_l);
      v.venue_type = stub.venue_type.value_or(VenueType::kJournal);
      venue_id = v.id;
      venue_write = std::move(v);
    }
  } else if (stub.venue_name) {
    venue_id = store_.venue_by_name(*stub.venue_name);
    if (!venue_id) {
      Venue v{.id = store_.mint(EntityKind::kVenue)};
      v.display_name = *stub.venue_name;
      v.venue_type = stub.venue_type.value_or(VenueType::kJournal);
      venue_id = v.id;
      venue_write = std::move(v);
    }
  }

  // Target work: DOI index, else the lowest mergeable member of the fingerprint cluster.
  std::optional<std::string> fingerprint;
  if (stub.title) {
    std::optional<std::string> family;
    if (!stub.stub_authors.empty()) family = family_of(stub.stub_authors.front().raw_name);
    try {
      fingerprint = family ? fingerprint_work(*stub.title, std::string_view(*family)) : fingerprint_work(*stub.title);
    } catch (const ValidationError& e) {
      report.warnings.push_back(e.what());
    }
  }
  std::optional<Work> existing;
  if (stub.doi) {
    if (auto id = store_.id_by_ceid(EntityKind::kWork, *stub.doi)) existing = store_.get_as<Work>(*id);
  }
  std::vector<OpenAlexId> cluster;
  if (fingerprint) {
    for (const auto& id : store_.works_by_fingerprint(*fingerprint)) {
      store_.visit_record<Work>(id, [&](const Work& w) {
        if (!w.doi || !stub.doi || *w.doi == *stub.doi) cluster.push_back(id);
      });
    }
  }
  if (!existing && !cluster.empty()) existing = store_.get_as<Work>(cluster.front());
  for (const auto& id : cluster) {
    if (existing && id != existing->id) {
      report.warnings.push_back("fingerprint cluster also holds " + id.short_form() + " (not merged)");
    }
  }

  // References resolve against the DOI index; the rest wait as unresolved.
  std::vector<OpenAlexId> refs;
  std::vector<std::string> unresolved;
  for (const auto& doi : stub.referenced_dois) {
    if (stub.doi && doi == *stub.doi) continue;
    if (auto id = store_.id_by_ceid(EntityKind::kWork, doi)) {
      if (existing && *id == existing->id) continue;
      push_unique(refs, *id);
    } else {
      push_unique(unresolved, doi);
    }
  }

  // (2) Authors and (3) institutions.
  std::vector<std::optional<std::string>> keys;
  for (const auto& sa : stub.stub_authors) keys.push_back(name_key(sa.raw_name));
  std::set<OpenAlexId> used;
  std::vector<Authorship> authorships;
  for (std::size_t i = 0; i < stub.stub_authors.size(); ++i) {
    const StubAuthor& sa = stub.stub_authors[i];
    if (!keys[i]) {
      report.warnings.push_back("author " + std::to_string(i + 1) + ": unusable name '" + sa.raw_name + "'");
      continue;
    }
    const std::string& key = *keys[i];
    std::optional<OpenAlexId> author_id;

    // Re-ingesting a known work keeps its authorship assignments.
    if (existing) {
      for (const auto& a : existing->authorships) {
        if (used.contains(a.author)) continue;
        const auto& k = name_key(a.raw_author_name);
        if (!k || !name_keys_compatible(*k, key)) continue;
        bool conflict = false;
        if (sa.orcid) {
          store_.visit_record<Author>(a.author, [&](const Author& r) { conflict = r.orcid && *r.orcid != *sa.orcid; });
        }
        if (conflict) continue;
        author_id = a.author;
        break;
      }
    }
    if (!author_id) {
      AuthorContext ctx;
      ctx.venue = venue_id;
      ctx.referenced_works = std::set<OpenAlexId>(refs.begin(), refs.end());
      if (existing) ctx.work = existing->id;
      for (std::size_t j = 0; j < keys.size(); ++j) {
        if (j != i && keys[j]) ctx.coauthor_name_keys.insert(*keys[j]);
      }
      auto sigs = candidates(key, sa.orcid, used);
      auto decision = disambiguate_author(sa, ctx, sigs, config_.theta, config_.author_weights);
      author_id = decision.matched;
    }

    if (author_id) {
      auto pending = author_writes.find(*author_id);
      Author rec = pending != author_writes.end() ? pending->second : *store_.get_as<Author>(*author_id);
      Author before = rec;
      if (sa.orcid && !rec.orcid && !store_.id_by_ceid(EntityKind::kAuthor, *sa.orcid)) rec.orcid = sa.orcid;
      if (sa.raw_name != rec.display_name) push_unique(rec.alternate_names, sa.raw_name);
      if (!(rec == before)) author_writes.insert_or_assign(rec.id, rec);
    } else {
      Author rec{.id = store_.mint(EntityKind::kAuthor)};
      rec.display_name = sa.raw_name;
      if (sa.orcid) {
        if (store_.id_by_ceid(EntityKind::kAuthor, *sa.orcid)) {
          report.warnings.push_back("author " + std::to_string(i + 1) + ": ORCID " + *sa.orcid +
                                    " already listed on this work; not attached");
        } else {
          rec.orcid = sa.orcid;
        }
      }
      author_id = rec.id;
      author_writes.insert_or_assign(rec.id, rec);
    }
    used.insert(*author_id);

    Authorship authorship{.author = *author_id};
    authorship.raw_author_name = sa.raw_name;
    authorship.raw_affiliation_strings = sa.raw_affiliations;
    for (const auto& raw : sa.raw_affiliations) {
      auto cands = extract_affiliation_candidates(raw);
      for (const auto& inst : match_institution(cands, registry_, config_.tau)) {
        push_unique(authorship.institutions, inst);
      }
    }
    authorships.push_back(std::move(authorship));
  }

  // (4) Work upsert or merge.
  std::optional<HostLocation> location;
  if (venue_id || stub.url) {
    location = HostLocation{venue_id, stub.url, stub.version_hint, stub.license, false};
  } else {
    report.warnings.push_back("no venue or url; no location recorded");
  }
  SourceRef source{stub.source, stub.source_record_id, stub.retrieved_date};

  Work work = existing ? *existing : Work{.id = store_.mint(EntityKind::kWork)};
  if (!existing) {
    work.doi = stub.doi;
    work.title = stub.title;
    work.abstract = stub.abstract;
    work.publication_year = stub.publication_year;
    work.work_type = stub.work_type;
    work.authorships = std::move(authorships);
    if (location) work.locations.push_back(*location);
    work.referenced_works = refs;
    work.unresolved_references = unresolved;
    work.sources.push_back(source);
  } else {
    bool same_record = std::any_of(work.sources.begin(), work.sources.end(), [&](const SourceRef& s) {
      return s.source == source.source && s.source_record_id == source.source_record_id;
    });
    report.outcome = same_record ? IngestOutcome::kUpdated : IngestOutcome::kMerged;

    std::pair<Date, int> newest{Date{}, -1};
    for (const auto& s : work.sources) newest = std::max(newest, precedence(s));
    bool overwrite = precedence(source) > newest;
    auto take = [&](auto& field, const auto& incoming) {
      if (incoming && (!field || overwrite)) field = incoming;
    };
    if (!work.doi) work.doi = stub.doi;
    take(work.title, stub.title);
    take(work.abstract, stub.abstract);
    take(work.publication_year, stub.publication_year);
    if (stub.work_type != WorkType::kOther && (work.work_type == WorkType::kOther || overwrite)) {
      work.work_type = stub.work_type;
    }

    for (auto& incoming : authorships) {
      auto it = std::find_if(work.authorships.begin(), work.authorships.end(),
                             [&](const Authorship& a) { return a.author == incoming.author; });
      if (it == work.authorships.end()) {
        work.authorships.push_back(std::move(incoming));
        continue;
      }
      for (const auto& inst : incoming.institutions) push_unique(it->institutions, inst);
      for (const auto& raw : incoming.raw_affiliation_strings) push_unique(it->raw_affiliation_strings, raw);
    }

    if (location) {
      auto it = std::find_if(work.locations.begin(), work.locations.end(), [&](const HostLocation& l) {
        return l.venue == location->venue && l.url == location->url && l.version == location->version;
      });
      if (it == work.locations.end()) {
        work.locations.push_back(*location);
      } else if (!it->license) {
        it->license = location->license;
      }
    }
    for (const auto& r : refs) {
      if (r != work.id) push_unique(work.referenced_works, r);
    }
    for (const auto& d : unresolved) {
      if (!work.doi || d != *work.doi) push_unique(work.unresolved_references, d);
    }
    auto it = std::find_if(work.sources.begin(), work.sources.end(), [&](const SourceRef& s) {
      return s.source == source.source && s.source_record_id == source.source_record_id;
    });
    if (it == work.sources.end()) {
      work.sources.push_back(source);
    } else if (source.retrieved_date > it->retrieved_date) {
      it->retrieved_date = source.retrieved_date;
    }
  }
  for (std::size_t i = 0; i < work.authorships.size(); ++i) {
    work.authorships[i].position = position_for(i, work.authorships.size());
  }

  // (5) Version of record.
  if (!work.locations.empty()) {
    select_primary_location(work.locations, [&](const OpenAlexId& v) -> std::optional<VenueType> {
      if (venue_write && venue_write->id == v) return venue_write->venue_type;
      std::optional<VenueType> type;
      store_.visit_record<Venue>(v, [&](const Venue& r) { type = r.venue_type; });
      return type;
    });
  }

  // (6) Concepts.
  if (!tree_.empty()) {
    std::optional<std::string_view> title, abstract;
    if (work.title) title = *work.title;
    if (work.abstract) abstract = *work.abstract;
    work.concepts = tag_work(title, abstract, tree_, config_.tagger);
  }

  // (7) Works that were waiting on this DOI now point at this work.
  std::vector<Entity> batch;
  if (venue_write) batch.emplace_back(std::move(*venue_write));
  for (auto& [id, a] : author_writes) batch.emplace_back(std::move(a));
  std::vector<Entity> citing;
  if (work.doi) {
    for (const auto& id : store_.works_citing_doi(*work.doi)) {
      if (id == work.id) continue;
      Work w = *store_.get_as<Work>(id);
      std::erase(w.unresolved_references, *work.doi);
      push_unique(w.referenced_works, work.id);
      citing.emplace_back(std::move(w));
    }
  }
  std::erase(work.unresolved_references, work.doi.value_or(""));
  report.work_id = work.id;
  batch.emplace_back(std::move(work));
  for (auto& c : citing) batch.push_back(std::move(c));
  store_.commit(std::move(batch));
  return report;
}

std::size_t seed_concepts(GraphStore& store, const ConceptTree& tree) {
  auto gate = store.writer_gate();
  std::vector<Entity> batch;
  for (const auto& [id, c] : tree.concepts()) {
    Concept record = c;
    if (auto stored = store.get_as<Concept>(id)) record.works_count = stored->works_count;
    batch.emplace_back(std::move(record));
  }
  return store.commit(std::move(batch));
}

std::size_t seed_institutions(GraphStore& store, const std::filesystem::path& jsonl) {
  std::ifstream in(jsonl);
  if (!in) throw ValidationError("cannot open institution registry " + jsonl.string());
  auto gate = store.writer_gate();
  std::vector<Entity> batch;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    std::string where = jsonl.string() + ":" + std::to_string(line_no);
    try {
      Json j = Json::parse(line);
      std::optional<std::string> ror;
      if (j.contains("ror") && !j["ror"].is_null()) ror = validate_ror(j["ror"].get<std::string>());
      if (ror && store.id_by_ceid(EntityKind::kInstitution, *ror)) continue;
      std::optional<OpenAlexId> id;
      if (j.contains("id") && !j["id"].is_null()) {
        id = parse_id(j["id"].get<std::string>());
        if (id->kind() != EntityKind::kInstitution) throw ValidationError("id is not an institution id");
        if (store.get(*id)) continue;
      }
      Institution inst{.id = id ? *id : store.mint(EntityKind::kInstitution)};
      inst.ror = ror;
      inst.display_name = j.at("display_name").get<std::string>();
      inst.aliases = j.value("aliases", std::vector<std::string>{});
      if (j.contains("country_code") && !j["country_code"].is_null()) {
        inst.country_code = j["country_code"].get<std::string>();
      }
      batch.emplace_back(std::move(inst));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const InvalidIdentifier& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const IdParseError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return store.commit(std::move(batch));
}

}  // namespace openindex
