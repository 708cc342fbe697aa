#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "openindex/disambiguation.hpp"
#include "openindex/text.hpp"
#include "testing.hpp"

using namespace openindex;
using namespace testing_support;

namespace {

OpenAlexId A(std::uint64_t n) { return OpenAlexId(EntityKind::kAuthor, n); }
OpenAlexId V(std::uint64_t n) { return OpenAlexId(EntityKind::kVenue, n); }
OpenAlexId I(std::uint64_t n) { return OpenAlexId(EntityKind::kInstitution, n); }

std::vector<Institution> load_registry() {
  std::vector<Institution> out;
  std::ifstream in(fixture("institutions_50.jsonl"));
  std::string line;
  std::uint64_t serial = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    Institution inst{.id = I(++serial)};
    inst.ror = j["ror"].get<std::string>();
    inst.display_name = j["display_name"].get<std::string>();
    inst.aliases = j["aliases"].get<std::vector<std::string>>();
    out.push_back(inst);
  }
  return out;
}

// Oracle tokenization for the ASCII registry names: lowercase words.
std::set<std::string> words(const std::string& s) {
  std::set<std::string> out;
  std::string cur;
  for (char c : s + " ") {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.insert(cur);
      cur.clear();
    }
  }
  return out;
}

double oracle_score(const std::vector<Institution>& reg, const std::string& candidate, std::size_t index) {
  std::map<std::string, int> df;
  for (const auto& inst : reg) {
    std::set<std::string> all = words(inst.display_name);
    for (const auto& a : inst.aliases) {
      auto w = words(a);
      all.insert(w.begin(), w.end());
    }
    for (const auto& t : all) ++df[t];
  }
  double n = static_cast<double>(reg.size());
  auto idf = [&](const std::string& t) {
    auto it = df.find(t);
    return std::log(1.0 + n / (it == df.end() ? 1.0 : it->second));
  };
  auto cand = words(candidate);
  double best = 0.0;
  std::vector<std::string> names{reg[index].display_name};
  names.insert(names.end(), reg[index].aliases.begin(), reg[index].aliases.end());
  for (const auto& name : names) {
    auto w = words(name);
    double inter = 0, uni = 0;
    std::set<std::string> u = w;
    u.insert(cand.begin(), cand.end());
    for (const auto& t : u) {
      uni += idf(t);
      if (w.contains(t) && cand.contains(t)) inter += idf(t);
    }
    best = std::max(best, inter / uni);
  }
  return best;
}

}  // namespace

TEST(Text, Fold) {
  EXPECT_EQ(text::fold("Martín-Martín"), "martin-martin");
  EXPECT_EQ(text::fold("Ångström Søren Œuvre"), "angstrom soren oeuvre");
  EXPECT_EQ(text::alnum_normalize("Deep Learning—A Survey!"), "deep learning a survey");
  EXPECT_EQ(text::collapse_whitespace("  a \t b\n"), "a b");
}

TEST(Names, Examples) {
  EXPECT_EQ(normalize_name("Priem, Jason"), "j priem");
  EXPECT_EQ(normalize_name("J. Priem"), "j priem");
  EXPECT_EQ(normalize_name("Martín-Martín, Alberto"), "a martin-martin");
  EXPECT_EQ(normalize_name("Jason Priem"), "j priem");
  EXPECT_EQ(normalize_name("Priem"), "priem");
  EXPECT_THROW(normalize_name("  , "), ValidationError);
}

TEST(Names, Blocking) {
  EXPECT_TRUE(name_keys_compatible("j priem", "j priem"));
  EXPECT_TRUE(name_keys_compatible("priem", "j priem"));
  EXPECT_FALSE(name_keys_compatible("h priem", "j priem"));
  EXPECT_FALSE(name_keys_compatible("j piwowar", "j priem"));
  EXPECT_EQ(family_of("Heather Piwowar"), "piwowar");
}

TEST(AuthorScore, OrcidDominates) {
  StubAuthor stub{.raw_name = "Jay Priem", .orcid = "0000-0002-1825-0097"};
  AuthorSignature cand{.author = A(3), .orcid = "0000-0002-1825-0097", .name_keys = {"j priem-smith"}};
  auto d = disambiguate_author(stub, {}, std::span(&cand, 1), 0.5);
  EXPECT_EQ(d.rule, AuthorDecision::Rule::kOrcid);
  EXPECT_EQ(d.matched, A(3));
}

TEST(AuthorScore, ContextMatch) {
  // name 0.4 + two shared coauthors 0.2 + venue 0.2 = 0.8.
  StubAuthor stub{.raw_name = "J. Smith"};
  AuthorContext ctx{.venue = V(1), .coauthor_name_keys = {"a jones", "b brown", "c new"}};
  AuthorSignature cand{.author = A(1), .name_keys = {"j smith"}, .coauthor_name_keys = {"a jones", "b brown"},
                       .venue_ids = {V(1)}};
  MatchScore s = score_author("j smith", ctx, cand, {});
  EXPECT_NEAR(s.value, 0.8, 1e-12);
  EXPECT_NEAR(s.features["coauthors"], 0.2, 1e-12);
  auto d = disambiguate_author(stub, ctx, std::span(&cand, 1), 0.5);
  EXPECT_EQ(d.rule, AuthorDecision::Rule::kScore);
  EXPECT_EQ(d.matched, A(1));
}

TEST(AuthorScore, HomonymCreatesNew) {
  StubAuthor stub{.raw_name = "J. Smith"};
  AuthorSignature cand{.author = A(1), .name_keys = {"j smith"}};
  auto d = disambiguate_author(stub, {}, std::span(&cand, 1), 0.5);
  EXPECT_EQ(d.rule, AuthorDecision::Rule::kCreate);
  ASSERT_EQ(d.scored.size(), 1u);
  EXPECT_NEAR(d.scored[0].second.value, 0.4, 1e-12);
}

TEST(AuthorScore, ConflictingOrcidExcluded) {
  StubAuthor stub{.raw_name = "J. Smith", .orcid = "0000-0002-1825-0097"};
  AuthorContext ctx{.venue = V(1), .coauthor_name_keys = {"a jones", "b brown", "c c"}};
  AuthorSignature cand{.author = A(1), .orcid = "0000-0001-6187-6610", .name_keys = {"j smith"},
                       .coauthor_name_keys = {"a jones", "b brown", "c c"}, .venue_ids = {V(1)}};
  auto d = disambiguate_author(stub, ctx, std::span(&cand, 1), 0.5);
  EXPECT_EQ(d.rule, AuthorDecision::Rule::kCreate);
  EXPECT_TRUE(d.scored.empty());
}

TEST(AuthorScore, CapsAndTies) {
  AuthorWeights w;
  AuthorContext ctx{.venue = V(1),
                    .referenced_works = {OpenAlexId(EntityKind::kWork, 1), OpenAlexId(EntityKind::kWork, 2),
                                         OpenAlexId(EntityKind::kWork, 3)},
                    .coauthor_name_keys = {"a", "b", "c", "d", "e"}};
  AuthorSignature cand{.author = A(9), .name_keys = {"j smith"}, .coauthor_name_keys = {"a", "b", "c", "d", "e"},
                       .venue_ids = {V(1)},
                       .work_ids = {OpenAlexId(EntityKind::kWork, 1), OpenAlexId(EntityKind::kWork, 2),
                                    OpenAlexId(EntityKind::kWork, 3)}};
  auto s = score_author("j smith", ctx, cand, w);
  EXPECT_NEAR(s.features["coauthors"], 0.3, 1e-12);
  EXPECT_NEAR(s.features["citation"], 0.1, 1e-12);
  EXPECT_NEAR(s.value, 1.0, 1e-12);

  AuthorSignature a2 = cand, a1 = cand;
  a2.author = A(2);
  a1.author = A(1);
  std::vector<AuthorSignature> both{a2, a1};
  auto d = disambiguate_author(StubAuthor{.raw_name = "John Smith"}, ctx, both, 0.5);
  EXPECT_EQ(d.matched, A(1));
}

TEST(Affiliations, Examples) {
  EXPECT_EQ(extract_affiliation_candidates("Dept. of Physics, University of Granada, 18071 Granada, Spain"),
            (std::vector<std::string>{"department of physics", "university of granada"}));
  EXPECT_EQ(extract_affiliation_candidates("OurResearch, 500 Westover Dr #8234, Sanford, NC, 27330 (USA)"),
            (std::vector<std::string>{"ourresearch"}));
  EXPECT_TRUE(extract_affiliation_candidates("").empty());
  EXPECT_EQ(extract_affiliation_candidates("Univ. of Oxford; UK"), (std::vector<std::string>{"university of oxford"}));
}

TEST(Institutions, StageExamplesAgainstOracle) {
  auto reg = load_registry();
  InstitutionRegistry registry(reg);
  ASSERT_EQ(registry.size(), 50u);
  ASSERT_EQ(reg[0].display_name, "University of Granada");

  auto exact = match_institution_detailed(std::vector<std::string>{"university of granada"}, registry, 0.7);
  ASSERT_EQ(exact.size(), 1u);
  EXPECT_EQ(exact[0].stage, 1);
  EXPECT_EQ(exact[0].institution, I(1));

  double oracle = oracle_score(reg, "granada university", 0);
  EXPECT_GE(oracle, 0.7);
  EXPECT_NEAR(registry.score("granada university", I(1)), oracle, 1e-12);
  auto s2 = match_institution_detailed(std::vector<std::string>{"granada university"}, registry, 0.7);
  ASSERT_EQ(s2.size(), 1u);
  EXPECT_EQ(s2[0].stage, 2);
  EXPECT_EQ(s2[0].institution, I(1));

  auto best = registry.best("department of physics");
  if (best) {
    std::size_t idx = best->first.serial() - 1;
    EXPECT_NEAR(best->second, oracle_score(reg, "department of physics", idx), 1e-12);
    EXPECT_LT(best->second, 0.7);
  }
  EXPECT_TRUE(match_institution(std::vector<std::string>{"department of physics"}, registry, 0.7).empty());
}

TEST(Institutions, ScoresMatchOracleEverywhere) {
  auto reg = load_registry();
  InstitutionRegistry registry(reg);
  for (std::string cand : {"oxford university", "technology massachusetts institute", "university of grenoble",
                           "seoul national university hospital"}) {
    for (std::size_t i = 0; i < reg.size(); ++i) {
      EXPECT_NEAR(registry.score(cand, reg[i].id), oracle_score(reg, cand, i), 1e-12) << cand << " " << i;
    }
  }
}

TEST(Fingerprint, Examples) {
  EXPECT_EQ(fingerprint_work("Deep Learning—A Survey!"), fingerprint_work("deep learning: a survey"));
  EXPECT_EQ(fingerprint_work("deep learning: a survey"), "deep learning a survey");
  EXPECT_EQ(fingerprint_work("OpenAlex: A fully-open index of scholarly works, authors, venues, institutions, and "
                             "concepts"),
            "openalex a fully open index of scholarly works authors venues institutions and concepts");
  EXPECT_NE(fingerprint_work("OpenAlex", "Priem"), fingerprint_work("OpenAlex", "Piwowar"));
  EXPECT_THROW(fingerprint_work("?!"), ValidationError);
}

TEST(PrimaryLocation, Examples) {
  auto types = [](const OpenAlexId& v) -> std::optional<VenueType> {
    return v.serial() == 1 ? VenueType::kRepository : VenueType::kJournal;
  };
  std::vector<HostLocation> locs{{.venue = V(1), .version = HostVersion::kSubmitted},
                                 {.venue = V(2), .version = HostVersion::kPublished}};
  EXPECT_EQ(select_primary_location(locs, types), 1u);
  EXPECT_FALSE(locs[0].primary);
  EXPECT_TRUE(locs[1].primary);

  std::vector<HostLocation> unknown{{.venue = V(1)}, {.venue = V(2)}};
  EXPECT_EQ(select_primary_location(unknown, types), 1u);

  std::vector<HostLocation> single{{.venue = V(1), .primary = false}};
  EXPECT_EQ(select_primary_location(single, types), 0u);
  EXPECT_TRUE(single[0].primary);

  std::vector<HostLocation> none;
  EXPECT_THROW(select_primary_location(none, types), ValidationError);
}
