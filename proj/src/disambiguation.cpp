#include "openindex/disambiguation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "openindex/text.hpp"

namespace openindex {

namespace {

bool is_name_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) || c == '-' || c == '\'';
}

std::vector<std::string> name_tokens(std::string_view folded) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    while (!current.empty() && (current.front() == '-' || current.front() == '\'')) current.erase(0, 1);
    while (!current.empty() && (current.back() == '-' || current.back() == '\'')) current.pop_back();
    if (!current.empty()) tokens.push_back(current);
    current.clear();
  };
  for (char c : folded) {
    if (is_name_byte(c)) {
      current.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

bool is_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool has_digit(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

const std::unordered_set<std::string>& street_keywords() {
  static const std::unordered_set<std::string> words = {
      "street", "st",     "road",    "rd",     "avenue", "ave",   "drive",  "dr",
      "boulevard", "blvd", "lane",   "ln",     "suite",  "ste",   "floor",  "box",
      "po",     "bldg",   "highway", "hwy",    "calle",  "strasse", "str",  "rue",
      "via",    "plaza",  "sq",      "pkwy",   "parkway", "cedex"};
  return words;
}

const std::unordered_set<std::string>& org_keywords() {
  static const std::unordered_set<std::string> words = {
      "university", "universidad", "universite", "universitat", "universita", "institute",
      "institut",   "instituto",   "college",    "hospital",    "department", "school",
      "center",     "centre",      "laboratory", "laboratories", "faculty",  "academy",
      "foundation", "inc",         "ltd",        "llc",         "museum",     "library",
      "council",    "agency",      "ministry",   "clinic",      "research",   "society",
      "corporation", "group",      "division",   "unit",        "program",    "observatory"};
  return words;
}

const std::unordered_set<std::string>& country_names() {
  static const std::unordered_set<std::string> names = {
      "usa", "us", "u s a", "united states", "united states of america", "uk", "united kingdom",
      "england", "scotland", "wales", "ireland", "canada", "mexico", "brazil", "argentina",
      "chile", "colombia", "peru", "spain", "portugal", "france", "germany", "italy",
      "netherlands", "the netherlands", "belgium", "switzerland", "austria", "denmark", "sweden",
      "norway", "finland", "iceland", "poland", "czech republic", "czechia", "hungary",
      "greece", "turkey", "russia", "russian federation", "ukraine", "israel", "egypt",
      "south africa", "nigeria", "kenya", "ethiopia", "india", "pakistan", "bangladesh",
      "china", "pr china", "p r china", "peoples republic of china", "japan", "korea",
      "south korea", "republic of korea", "taiwan", "singapore", "malaysia", "indonesia",
      "thailand", "vietnam", "philippines", "australia", "new zealand", "iran", "saudi arabia"};
  return names;
}

const std::unordered_map<std::string, std::string>& abbreviations() {
  static const std::unordered_map<std::string, std::string> table = {
      {"univ", "university"}, {"dept", "department"}, {"inst", "institute"},
      {"natl", "national"},   {"ctr", "center"},      {"lab", "laboratory"},
      {"hosp", "hospital"}};
  return table;
}

bool is_postal_token(const std::string& token) {
  if (is_digits(token)) return token.size() >= 4;
  // Mixed letter/digit shapes such as "sw1a" or "h3a".
  return has_digit(token) && token.size() <= 4;
}

enum class SegmentKind { kOrganization, kAddress, kCountry };

SegmentKind classify_segment(const std::vector<std::string>& tokens, const std::string& joined) {
  if (country_names().contains(joined)) return SegmentKind::kCountry;
  if (std::any_of(tokens.begin(), tokens.end(),
                  [](const std::string& t) { return org_keywords().contains(t); })) {
    return SegmentKind::kOrganization;
  }
  if (std::all_of(tokens.begin(), tokens.end(), [](const std::string& t) { return is_digits(t); })) {
    return SegmentKind::kAddress;
  }
  if (tokens.size() == 1 && tokens[0].size() == 2 && !has_digit(tokens[0])) return SegmentKind::kAddress;
  for (const auto& t : tokens) {
    if (is_postal_token(t) || street_keywords().contains(t)) return SegmentKind::kAddress;
  }
  return SegmentKind::kOrganization;
}

std::vector<std::string> org_tokens(std::string_view raw) {
  auto tokens = text::alnum_tokens(raw);
  for (auto& t : tokens) {
    if (auto it = abbreviations().find(t); it != abbreviations().end()) t = it->second;
  }
  return tokens;
}

std::set<std::string> token_set(std::string_view normalized) {
  std::set<std::string> out;
  std::size_t start = 0;
  while (start < normalized.size()) {
    auto end = normalized.find(' ', start);
    if (end == std::string_view::npos) end = normalized.size();
    if (end > start) out.emplace(normalized.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string normalize_name(std::string_view raw) {
  std::string folded = text::fold(raw);
  std::vector<std::string> tokens;
  if (auto comma = folded.find(','); comma != std::string::npos) {
    auto family = name_tokens(std::string_view(folded).substr(0, comma));
    tokens = name_tokens(std::string_view(folded).substr(comma + 1));
    tokens.insert(tokens.end(), family.begin(), family.end());
  } else {
    tokens = name_tokens(folded);
  }
  if (tokens.empty()) throw ValidationError("name '" + std::string(raw) + "' is empty after normalization");
  const std::string& family = tokens.back();
  if (tokens.size() == 1) return family;
  return std::string(1, tokens.front().front()) + " " + family;
}

NameParts split_name_key(std::string_view key) {
  auto space = key.find(' ');
  if (space == std::string_view::npos) return {"", std::string(key)};
  return {std::string(key.substr(0, space)), std::string(key.substr(space + 1))};
}

bool name_keys_compatible(std::string_view a, std::string_view b) {
  auto pa = split_name_key(a);
  auto pb = split_name_key(b);
  if (pa.family != pb.family) return false;
  return pa.initial.empty() || pb.initial.empty() || pa.initial == pb.initial;
}

std::optional<std::string> family_of(std::string_view raw_name) {
  try {
    return split_name_key(normalize_name(raw_name)).family;
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------

MatchScore score_author(std::string_view stub_name_key, const AuthorContext& context,
                        const AuthorSignature& candidate, const AuthorWeights& weights) {
  MatchScore score;
  double name = candidate.name_keys.contains(std::string(stub_name_key)) ? weights.name_exact : 0.0;

  std::size_t shared_coauthors = 0;
  for (const auto& key : context.coauthor_name_keys) {
    if (candidate.coauthor_name_keys.contains(key)) ++shared_coauthors;
  }
  double coauthors = std::min(weights.coauthor_step * static_cast<double>(shared_coauthors),
                              weights.coauthor_cap);

  double venue = (context.venue && candidate.venue_ids.contains(*context.venue)) ? weights.venue : 0.0;

  std::size_t citation_links = 0;
  for (const auto& ref : context.referenced_works) {
    if (candidate.work_ids.contains(ref)) ++citation_links;
  }
  if (context.work && candidate.cited_work_ids.contains(*context.work)) ++citation_links;
  double citation = std::min(weights.citation_step * static_cast<double>(citation_links),
                             weights.citation_cap);

  score.features = {{"name_exact", name}, {"coauthors", coauthors}, {"venue", venue},
                    {"citation", citation}};
  score.value = std::clamp(name + coauthors + venue + citation, 0.0, 1.0);
  return score;
}

AuthorDecision disambiguate_author(const StubAuthor& stub, const AuthorContext& context,
                                   std::span<const AuthorSignature> candidates, double theta,
                                   const AuthorWeights& weights) {
  AuthorDecision decision;
  if (stub.orcid) {
    const AuthorSignature* hit = nullptr;
    for (const auto& c : candidates) {
      if (c.orcid == stub.orcid && (hit == nullptr || c.author < hit->author)) hit = &c;
    }
    if (hit != nullptr) {
      decision.rule = AuthorDecision::Rule::kOrcid;
      decision.matched = hit->author;
      return decision;
    }
  }
  std::string key;
  try {
    key = normalize_name(stub.raw_name);
  } catch (const ValidationError&) {
    return decision;
  }
  const std::pair<OpenAlexId, MatchScore>* best = nullptr;
  for (const auto& c : candidates) {
    if (stub.orcid && c.orcid && *c.orcid != *stub.orcid) continue;
    decision.scored.emplace_back(c.author, score_author(key, context, c, weights));
  }
  for (const auto& entry : decision.scored) {
    if (best == nullptr || entry.second.value > best->second.value ||
        (entry.second.value == best->second.value && entry.first < best->first)) {
      best = &entry;
    }
  }
  // Sums of decimal weights carry rounding error; compare with a small slack.
  if (best != nullptr && best->second.value >= theta - 1e-9) {
    decision.rule = AuthorDecision::Rule::kScore;
    decision.matched = best->first;
  }
  return decision;
}

// ---------------------------------------------------------------------------

std::string normalize_org_string(std::string_view raw) { return text::join(org_tokens(raw), " "); }

std::vector<std::string> extract_affiliation_candidates(std::string_view raw) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= raw.size()) {
    auto end = raw.find_first_of(",;", start);
    if (end == std::string_view::npos) end = raw.size();
    auto segment = text::trim(raw.substr(start, end - start));
    start = end + 1;
    if (segment.empty()) continue;

    auto tokens = org_tokens(segment);
    if (tokens.empty()) continue;
    std::string joined = text::join(tokens, " ");
    SegmentKind kind = classify_segment(tokens, joined);
    if (kind == SegmentKind::kAddress) break;  // the rest is the postal address
    if (kind == SegmentKind::kCountry) continue;
    out.push_back(std::move(joined));
  }
  return out;
}

InstitutionRegistry::InstitutionRegistry(std::span<const Institution> institutions) {
  std::vector<const Institution*> sorted;
  for (const auto& inst : institutions) sorted.push_back(&inst);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });

  std::unordered_map<std::string, std::size_t> df;
  for (const Institution* inst : sorted) {
    Entry entry{inst->id, {}};
    std::set<std::string> all_tokens;
    auto add_name = [&](const std::string& name) {
      std::string normalized = normalize_org_string(name);
      if (normalized.empty()) return;
      exact_[normalized].push_back(inst->id);
      auto tokens = token_set(normalized);
      all_tokens.insert(tokens.begin(), tokens.end());
      entry.name_tokens.push_back(std::move(tokens));
    };
    add_name(inst->display_name);
    for (const auto& alias : inst->aliases) add_name(alias);
    for (const auto& t : all_tokens) {
      ++df[t];
      postings_[t].push_back(entries_.size());
    }
    entries_.push_back(std::move(entry));
  }
  const double n = static_cast<double>(entries_.size());
  for (const auto& [token, count] : df) {
    idf_[token] = std::log(1.0 + n / static_cast<double>(count));
  }
  unseen_idf_ = std::log(1.0 + std::max(n, 1.0));
}

double InstitutionRegistry::idf(const std::string& token) const {
  auto it = idf_.find(token);
  return it == idf_.end() ? unseen_idf_ : it->second;
}

double InstitutionRegistry::jaccard(const std::set<std::string>& a,
                                    const std::set<std::string>& b) const {
  double inter = 0.0;
  double uni = 0.0;
  for (const auto& t : a) {
    double w = idf(t);
    uni += w;
    if (b.contains(t)) inter += w;
  }
  for (const auto& t : b) {
    if (!a.contains(t)) uni += idf(t);
  }
  return uni > 0.0 ? inter / uni : 0.0;
}

double InstitutionRegistry::score(std::string_view candidate, const OpenAlexId& institution) const {
  auto tokens = token_set(candidate);
  for (const auto& entry : entries_) {
    if (entry.id != institution) continue;
    double best = 0.0;
    for (const auto& name : entry.name_tokens) best = std::max(best, jaccard(tokens, name));
    return best;
  }
  return 0.0;
}

std::optional<OpenAlexId> InstitutionRegistry::exact(std::string_view candidate) const {
  auto it = exact_.find(std::string(candidate));
  if (it == exact_.end()) return std::nullopt;
  return *std::min_element(it->second.begin(), it->second.end());
}

std::optional<std::pair<OpenAlexId, double>> InstitutionRegistry::best(std::string_view candidate) const {
  auto tokens = token_set(candidate);
  std::set<std::size_t> touched;
  for (const auto& t : tokens) {
    if (auto it = postings_.find(t); it != postings_.end()) touched.insert(it->second.begin(), it->second.end());
  }
  std::optional<std::pair<OpenAlexId, double>> best;
  for (std::size_t index : touched) {  // ascending index == ascending serial
    const auto& entry = entries_[index];
    double s = 0.0;
    for (const auto& name : entry.name_tokens) s = std::max(s, jaccard(tokens, name));
    if (!best || s > best->second) best = std::make_pair(entry.id, s);
  }
  return best;
}

std::vector<InstitutionMatch> match_institution_detailed(std::span<const std::string> candidates,
                                                          const InstitutionRegistry& registry,
                                                          double tau) {
  std::vector<InstitutionMatch> out;
  auto seen = [&](const OpenAlexId& id) {
    return std::any_of(out.begin(), out.end(), [&](const auto& m) { return m.institution == id; });
  };
  for (const auto& candidate : candidates) {
    if (auto hit = registry.exact(candidate)) {
      if (!seen(*hit)) out.push_back({*hit, candidate, 1, 1.0});
      continue;
    }
    if (auto best = registry.best(candidate); best && best->second >= tau) {
      if (!seen(best->first)) out.push_back({best->first, candidate, 2, best->second});
    }
  }
  return out;
}

std::vector<OpenAlexId> match_institution(std::span<const std::string> candidates,
                                          const InstitutionRegistry& registry, double tau) {
  std::vector<OpenAlexId> out;
  for (const auto& m : match_institution_detailed(candidates, registry, tau)) out.push_back(m.institution);
  return out;
}

// ---------------------------------------------------------------------------

std::string fingerprint_work(std::string_view title, std::optional<std::string_view> first_author_family) {
  std::string key = text::alnum_normalize(title);
  if (key.empty()) throw ValidationError("cannot fingerprint an empty title");
  if (first_author_family) {
    std::string family = text::alnum_normalize(*first_author_family);
    if (!family.empty()) key += "|" + family;
  }
  return key;
}

std::optional<std::string> fingerprint_of(const Work& work) {
  if (!work.title) return std::nullopt;
  std::optional<std::string> family;
  if (!work.authorships.empty()) family = family_of(work.authorships.front().raw_author_name);
  try {
    return family ? fingerprint_work(*work.title, std::string_view(*family))
                  : fingerprint_work(*work.title);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

}  // namespace openindex
