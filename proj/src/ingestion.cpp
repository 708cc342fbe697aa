#include "openindex/ingestion.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "openindex/identifiers.hpp"
#include "openindex/text.hpp"

namespace openindex {

namespace {

namespace pt = boost::property_tree;
using nlohmann::json;

std::optional<std::string> clean_text(std::string_view raw) {
  std::string s = text::collapse_whitespace(raw);
  if (s.empty()) return std::nullopt;
  return s;
}

// JATS/HTML markup in abstracts and titles is reduced to plain text.
std::string strip_tags(std::string_view s) {
  static const std::regex kTag("<[^>]*>");
  return std::regex_replace(std::string(s), kTag, " ");
}

std::optional<std::string> try_doi(std::string_view raw, std::vector<std::string>& warnings,
                                   std::string_view field) {
  try {
    return normalize_doi(raw);
  } catch (const InvalidIdentifier& e) {
    warnings.push_back(std::string(field) + ": " + e.what());
    return std::nullopt;
  }
}

void add_issn(WorkStub& stub, std::string_view raw) {
  try {
    std::string issn = validate_issn(raw);
    if (std::find(stub.issns.begin(), stub.issns.end(), issn) == stub.issns.end()) stub.issns.push_back(issn);
  } catch (const InvalidIdentifier& e) {
    stub.warnings.push_back(std::string("ISSN: ") + e.what());
  }
}

void add_reference(WorkStub& stub, std::string_view raw) {
  if (auto doi = try_doi(raw, stub.warnings, "reference")) {
    if (std::find(stub.referenced_dois.begin(), stub.referenced_dois.end(), *doi) == stub.referenced_dois.end()) {
      stub.referenced_dois.push_back(*doi);
    }
  }
}

std::optional<Date> date_parts(const json& j) {
  if (!j.is_object() || !j.contains("date-parts")) return std::nullopt;
  const auto& parts = j["date-parts"];
  if (!parts.is_array() || parts.empty() || !parts[0].is_array() || parts[0].empty()) return std::nullopt;
  const auto& p = parts[0];
  if (!p[0].is_number_integer()) return std::nullopt;
  int y = p[0].get<int>();
  unsigned m = p.size() > 1 && p[1].is_number_integer() ? p[1].get<unsigned>() : 1;
  unsigned d = p.size() > 2 && p[2].is_number_integer() ? p[2].get<unsigned>() : 1;
  try {
    return Date(y, m, d);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<std::string> first_string(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  const auto& v = j[key];
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    for (const auto& e : v) {
      if (e.is_string() && !text::trim(e.get<std::string>()).empty()) return e.get<std::string>();
    }
  }
  return std::nullopt;
}

VenueType venue_type_hint(std::string_view crossref_type, SourceClass source) {
  if (source == SourceClass::kRepository || crossref_type == "posted-content") return VenueType::kRepository;
  if (crossref_type == "proceedings-article" || crossref_type == "proceedings") return VenueType::kConference;
  return VenueType::kJournal;
}

HostVersion default_version(std::string_view crossref_type, SourceClass source) {
  if (source == SourceClass::kRepository || crossref_type == "posted-content") return HostVersion::kSubmitted;
  return HostVersion::kPublished;
}

std::string source_record_id_of(const WorkStub& stub, const json& record) {
  if (stub.doi) return *stub.doi;
  if (stub.url) return *stub.url;
  if (record.contains("id") && record["id"].is_string()) return record["id"].get<std::string>();
  return "title:" + text::alnum_normalize(*stub.title);
}

}  // namespace

WorkType crossref_work_type(std::string_view type) {
  if (type == "journal-article") return WorkType::kJournalArticle;
  if (type == "book" || type == "monograph") return WorkType::kBook;
  if (type == "dataset") return WorkType::kDataset;
  if (type == "dissertation") return WorkType::kThesis;
  return WorkType::kOther;
}

std::optional<std::string> license_token(std::string_view url) {
  std::string u;
  for (char c : text::trim(url)) u.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (std::string_view prefix : {"https://", "http://"}) {
    if (u.rfind(prefix, 0) == 0) u.erase(0, prefix.size());
  }
  if (u.rfind("www.", 0) == 0) u.erase(0, 4);

  static constexpr std::pair<std::string_view, std::string_view> kTable[] = {
      {"creativecommons.org/licenses/by-nc-nd/", "cc-by-nc-nd"},
      {"creativecommons.org/licenses/by-nc-sa/", "cc-by-nc-sa"},
      {"creativecommons.org/licenses/by-nc/", "cc-by-nc"},
      {"creativecommons.org/licenses/by-nd/", "cc-by-nd"},
      {"creativecommons.org/licenses/by-sa/", "cc-by-sa"},
      {"creativecommons.org/licenses/by/", "cc-by"},
      {"creativecommons.org/publicdomain/zero/", "cc0"},
      {"creativecommons.org/publicdomain/mark/", "public-domain"},
      {"opensource.org/licenses/mit", "mit"},
      {"gnu.org/licenses/gpl", "gpl"},
  };
  for (const auto& [prefix, token] : kTable) {
    if (u.rfind(prefix, 0) == 0) return std::string(token);
  }
  return std::nullopt;
}

WorkStub parse_crossref(const json& input, SourceClass source, Date retrieved) {
  const json* rec = &input;
  if (rec->is_object() && rec->contains("message") && (*rec)["message"].is_object()) rec = &(*rec)["message"];
  if (!rec->is_object()) throw RecordRejected("not a record: expected a JSON object");
  const json& r = *rec;

  WorkStub stub;
  stub.source = source;
  stub.retrieved_date = date_parts(r.value("indexed", json())).value_or(retrieved);

  if (auto raw = first_string(r, "DOI")) stub.doi = try_doi(*raw, stub.warnings, "DOI");
  if (auto raw = first_string(r, "title")) stub.title = clean_text(strip_tags(*raw));
  if (!stub.doi && !stub.title) throw RecordRejected("record has neither a valid DOI nor a title");

  if (auto raw = first_string(r, "abstract")) stub.abstract = clean_text(strip_tags(*raw));
  if (auto issued = date_parts(r.value("issued", json()))) {
    stub.publication_year = issued->year();
  } else if (r.contains("issued")) {
    stub.warnings.push_back("issued: no usable year");
  }

  std::string type = r.value("type", json("")).is_string() ? r.value("type", std::string()) : std::string();
  stub.work_type = crossref_work_type(type);
  stub.venue_type = venue_type_hint(type, source);
  stub.version_hint = default_version(type, source);
  if (auto v = first_string(r, "version")) {
    if (auto parsed = enum_from_string<HostVersion>(*v)) {
      stub.version_hint = *parsed;
    } else {
      stub.warnings.push_back("version: unknown value '" + *v + "'");
    }
  }

  if (r.contains("author") && r["author"].is_array()) {
    std::size_t index = 0;
    for (const auto& a : r["author"]) {
      ++index;
      if (!a.is_object()) {
        stub.warnings.push_back("author " + std::to_string(index) + ": not an object");
        continue;
      }
      std::string given = a.value("given", json("")).is_string() ? a.value("given", std::string()) : "";
      std::string family = a.value("family", json("")).is_string() ? a.value("family", std::string()) : "";
      std::string name = text::collapse_whitespace(given + " " + family);
      if (name.empty() && a.contains("name") && a["name"].is_string()) {
        name = text::collapse_whitespace(a["name"].get<std::string>());
      }
      if (name.empty()) {
        stub.warnings.push_back("author " + std::to_string(index) + ": no name");
        continue;
      }
      StubAuthor sa{.raw_name = name};
      if (a.contains("ORCID") && a["ORCID"].is_string()) {
        try {
          sa.orcid = validate_orcid(a["ORCID"].get<std::string>());
        } catch (const InvalidIdentifier& e) {
          stub.warnings.push_back("author " + std::to_string(index) + " ORCID: " + e.what());
        }
      }
      if (a.contains("affiliation") && a["affiliation"].is_array()) {
        for (const auto& aff : a["affiliation"]) {
          std::optional<std::string> s;
          if (aff.is_string()) s = aff.get<std::string>();
          if (aff.is_object() && aff.contains("name") && aff["name"].is_string()) s = aff["name"].get<std::string>();
          if (s && !text::trim(*s).empty()) {
            sa.raw_affiliations.push_back(*s);
          } else {
            stub.warnings.push_back("author " + std::to_string(index) + ": unusable affiliation");
          }
        }
      }
      stub.stub_authors.push_back(std::move(sa));
    }
  }

  if (auto venue = first_string(r, "container-title")) stub.venue_name = clean_text(*venue);
  if (r.contains("ISSN") && r["ISSN"].is_array()) {
    for (const auto& i : r["ISSN"]) {
      if (i.is_string()) {
        add_issn(stub, i.get<std::string>());
      } else {
        stub.warnings.push_back("ISSN: not a string");
      }
    }
  }
  if (auto url = first_string(r, "URL")) stub.url = clean_text(*url);

  if (r.contains("license") && r["license"].is_array()) {
    for (const auto& l : r["license"]) {
      if (!l.is_object() || !l.contains("URL") || !l["URL"].is_string()) continue;
      if (auto token = license_token(l["URL"].get<std::string>())) {
        stub.license = token;
        break;
      }
    }
  }

  if (r.contains("reference") && r["reference"].is_array()) {
    std::size_t without_doi = 0;
    for (const auto& ref : r["reference"]) {
      if (ref.is_object() && ref.contains("DOI") && ref["DOI"].is_string()) {
        add_reference(stub, ref["DOI"].get<std::string>());
      } else {
        ++without_doi;
      }
    }
    if (without_doi > 0) stub.warnings.push_back("reference: " + std::to_string(without_doi) + " without DOI dropped");
  }

  stub.source_record_id = source_record_id_of(stub, r);
  return stub;
}

WorkStub parse_crossref_line(std::string_view line, SourceClass source, Date retrieved) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw RecordRejected(std::string("malformed JSON: ") + e.what());
  }
  return parse_crossref(j, source, retrieved);
}

namespace {

std::optional<std::string> child_text(const pt::ptree& node, const std::string& path) {
  auto child = node.get_child_optional(path);
  if (!child) return std::nullopt;
  return clean_text(child->data());
}

std::string attr(const pt::ptree& node, const char* name) {
  return node.get<std::string>(std::string("<xmlattr>.") + name, "");
}

// Inline formatting elements would split mixed content in the tree parser.
std::string flatten_inline_markup(std::string_view xml) {
  static const std::regex kInline(R"(</?(i|b|u|sup|sub|em|strong|mml:[A-Za-z]+)(\s[^>]*)?>)");
  return std::regex_replace(std::string(xml), kInline, "");
}

std::optional<Date> pubmed_date(const pt::ptree& node) {
  auto y = node.get_optional<int>("Year");
  if (!y) return std::nullopt;
  try {
    return Date(*y, node.get<unsigned>("Month", 1), node.get<unsigned>("Day", 1));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

WorkStub parse_pubmed(std::string_view article_xml, Date retrieved) {
  pt::ptree doc;
  try {
    std::istringstream in(flatten_inline_markup(article_xml));
    pt::read_xml(in, doc, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw RecordRejected(std::string("malformed XML: ") + e.what());
  }
  auto article_node = doc.get_child_optional("PubmedArticle");
  if (!article_node) throw RecordRejected("not a PubmedArticle element");
  const pt::ptree& root = *article_node;
  const pt::ptree empty;
  const pt::ptree& citation = root.get_child("MedlineCitation", empty);
  const pt::ptree& article = citation.get_child("Article", empty);

  WorkStub stub;
  stub.source = SourceClass::kPubmed;
  auto pmid = child_text(citation, "PMID");
  if (!pmid) throw RecordRejected("record has no PMID");
  stub.source_record_id = *pmid;
  stub.retrieved_date = pubmed_date(citation.get_child("DateRevised", empty)).value_or(retrieved);
  stub.url = "https://pubmed.ncbi.nlm.nih.gov/" + *pmid + "/";
  stub.version_hint = HostVersion::kPublished;
  stub.venue_type = VenueType::kJournal;
  stub.work_type = WorkType::kJournalArticle;

  stub.title = child_text(article, "ArticleTitle");

  for (const auto& [name, node] : article) {
    if (name == "ELocationID" && attr(node, "EIdType") == "doi" && !stub.doi) {
      stub.doi = try_doi(node.data(), stub.warnings, "ELocationID");
    }
  }
  if (!stub.doi) {
    for (const auto& [name, node] : root.get_child("PubmedData.ArticleIdList", empty)) {
      if (name == "ArticleId" && attr(node, "IdType") == "doi") {
        stub.doi = try_doi(node.data(), stub.warnings, "ArticleId");
        break;
      }
    }
  }

  std::vector<std::string> abstract_parts;
  for (const auto& [name, node] : article.get_child("Abstract", empty)) {
    if (name != "AbstractText") continue;
    if (auto t = clean_text(node.data())) abstract_parts.push_back(*t);
  }
  if (!abstract_parts.empty()) stub.abstract = text::join(abstract_parts, " ");

  const pt::ptree& journal = article.get_child("Journal", empty);
  stub.venue_name = child_text(journal, "Title");
  for (const auto& [name, node] : journal) {
    if (name == "ISSN") add_issn(stub, node.data());
  }
  const pt::ptree& pub_date = journal.get_child("JournalIssue.PubDate", empty);
  if (auto y = pub_date.get_optional<int>("Year")) {
    stub.publication_year = *y;
  } else if (auto medline = pub_date.get_optional<std::string>("MedlineDate")) {
    static const std::regex kYear(R"((\d{4}))");
    std::smatch m;
    if (std::regex_search(*medline, m, kYear)) {
      stub.publication_year = std::stoi(m[1]);
    } else {
      stub.warnings.push_back("PubDate: no usable year");
    }
  }

  std::size_t index = 0;
  for (const auto& [name, node] : article.get_child("AuthorList", empty)) {
    if (name != "Author") continue;
    ++index;
    std::string fore = node.get<std::string>("ForeName", node.get<std::string>("Initials", ""));
    std::string last = node.get<std::string>("LastName", "");
    std::string full = text::collapse_whitespace(fore + " " + last);
    if (full.empty()) full = text::collapse_whitespace(node.get<std::string>("CollectiveName", ""));
    if (full.empty()) {
      stub.warnings.push_back("author " + std::to_string(index) + ": no name");
      continue;
    }
    StubAuthor sa{.raw_name = full};
    for (const auto& [child_name, child] : node) {
      if (child_name == "Identifier" && attr(child, "Source") == "ORCID") {
        try {
          sa.orcid = validate_orcid(child.data());
        } catch (const InvalidIdentifier& e) {
          stub.warnings.push_back("author " + std::to_string(index) + " ORCID: " + e.what());
        }
      } else if (child_name == "AffiliationInfo") {
        if (auto aff = child_text(child, "Affiliation")) sa.raw_affiliations.push_back(*aff);
      }
    }
    stub.stub_authors.push_back(std::move(sa));
  }

  for (const auto& [name, node] : article.get_child("PublicationTypeList", empty)) {
    if (name == "PublicationType" && text::trim(node.data()) == "Dataset") stub.work_type = WorkType::kDataset;
  }

  for (const auto& [name, list] : root.get_child("PubmedData.ReferenceList", empty)) {
    if (name != "Reference") continue;
    for (const auto& [id_name, id] : list.get_child("ArticleIdList", empty)) {
      if (id_name == "ArticleId" && attr(id, "IdType") == "doi") add_reference(stub, id.data());
    }
  }
  return stub;
}

std::vector<std::string> split_pubmed_articles(std::string_view document) {
  constexpr std::string_view kOpen = "<PubmedArticle";
  constexpr std::string_view kClose = "</PubmedArticle>";
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = document.find(kOpen, pos)) != std::string_view::npos) {
    std::size_t after = pos + kOpen.size();
    if (after >= document.size()) break;
    char next = document[after];
    if (next != '>' && next != ' ' && next != '\t' && next != '\n' && next != '\r') {
      pos = after;
      continue;
    }
    std::size_t end = document.find(kClose, after);
    if (end == std::string_view::npos) {
      out.emplace_back(document.substr(pos));
      break;
    }
    out.emplace_back(document.substr(pos, end + kClose.size() - pos));
    pos = end + kClose.size();
  }
  return out;
}

}  // namespace openindex
