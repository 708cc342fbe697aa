#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "openindex/ingestion.hpp"
#include "testing.hpp"

using namespace openindex;
using namespace testing_support;
using nlohmann::json;

namespace {

const Date kRetrieved(2022, 6, 1);

WorkStub crossref(const json& j) { return parse_crossref(j, SourceClass::kCrossref, kRetrieved); }

}  // namespace

TEST(Crossref, MinimalRecord) {
  auto stub = crossref({{"DOI", "10.1234/X"}, {"title", {"T"}}, {"type", "journal-article"}});
  EXPECT_EQ(stub.doi, "10.1234/x");
  EXPECT_EQ(stub.title, "T");
  EXPECT_EQ(stub.work_type, WorkType::kJournalArticle);
  EXPECT_EQ(stub.source, SourceClass::kCrossref);
  EXPECT_EQ(stub.source_record_id, "10.1234/x");
  EXPECT_EQ(stub.retrieved_date, kRetrieved);
  EXPECT_TRUE(stub.warnings.empty());
}

TEST(Crossref, AuthorAndAffiliation) {
  auto stub = crossref({{"DOI", "10.1234/a"},
                        {"title", {"T"}},
                        {"author", {{{"given", "Heather"}, {"family", "Piwowar"}, {"affiliation", {"OurResearch"}}}}}});
  ASSERT_EQ(stub.stub_authors.size(), 1u);
  EXPECT_EQ(stub.stub_authors[0].raw_name, "Heather Piwowar");
  EXPECT_EQ(stub.stub_authors[0].raw_affiliations, std::vector<std::string>{"OurResearch"});
  // Object-form affiliations as served by the live API.
  auto obj = crossref({{"DOI", "10.1234/b"},
                       {"title", {"T"}},
                       {"author", {{{"given", "Heather"}, {"family", "Piwowar"}, {"affiliation", {{{"name", "OurResearch"}}}}}}}});
  EXPECT_EQ(obj.stub_authors[0].raw_affiliations, std::vector<std::string>{"OurResearch"});
}

TEST(Crossref, ReferenceDois) {
  auto stub = crossref({{"DOI", "10.1234/r"},
                        {"title", {"T"}},
                        {"reference", {{{"DOI", "10.1145/2740908.2742839"}}, {{"unstructured", "Somebody 1999"}}}}});
  EXPECT_EQ(stub.referenced_dois, std::vector<std::string>{"10.1145/2740908.2742839"});
  ASSERT_EQ(stub.warnings.size(), 1u);
  EXPECT_NE(stub.warnings[0].find("1 without DOI"), std::string::npos);
}

TEST(Crossref, Unidentifiable) {
  EXPECT_THROW(crossref({{"type", "journal-article"}}), RecordRejected);
  EXPECT_THROW(crossref(json::array()), RecordRejected);
  EXPECT_THROW(parse_crossref_line("{not json", SourceClass::kCrossref, kRetrieved), RecordRejected);
}

TEST(Crossref, TypeTable) {
  EXPECT_EQ(crossref_work_type("journal-article"), WorkType::kJournalArticle);
  EXPECT_EQ(crossref_work_type("book"), WorkType::kBook);
  EXPECT_EQ(crossref_work_type("monograph"), WorkType::kBook);
  EXPECT_EQ(crossref_work_type("dataset"), WorkType::kDataset);
  EXPECT_EQ(crossref_work_type("dissertation"), WorkType::kThesis);
  EXPECT_EQ(crossref_work_type("posted-content"), WorkType::kOther);
}

TEST(Crossref, BadSubfieldsAreSkipped) {
  auto stub = crossref({{"DOI", "10.1234/s"},
                        {"title", {"T"}},
                        {"ISSN", {"0378-5954", "0378-5955"}},
                        {"author", {{{"given", "A"}, {"family", "B"}, {"ORCID", "0000-0002-1825-0098"}}}},
                        {"issued", {{"date-parts", {{"soon"}}}}},
                        {"license", {{{"URL", "https://example.org/custom"}}}}});
  EXPECT_EQ(stub.issns, std::vector<std::string>{"0378-5955"});
  ASSERT_EQ(stub.stub_authors.size(), 1u);
  EXPECT_FALSE(stub.stub_authors[0].orcid);
  EXPECT_FALSE(stub.publication_year);
  EXPECT_FALSE(stub.license);
  EXPECT_EQ(stub.warnings.size(), 3u);
}

TEST(Crossref, OrcidAndLicense) {
  auto stub = crossref({{"DOI", "10.1234/o"},
                        {"title", {"T"}},
                        {"issued", {{"date-parts", {{2022, 3}}}}},
                        {"license", {{{"URL", "https://creativecommons.org/licenses/by/4.0/"}}}},
                        {"author", {{{"given", "Jason"}, {"family", "Priem"}, {"ORCID", "https://orcid.org/0000-0001-6187-6610"}}}}});
  EXPECT_EQ(stub.stub_authors[0].orcid, "0000-0001-6187-6610");
  EXPECT_EQ(stub.publication_year, 2022);
  EXPECT_EQ(stub.license, "cc-by");
}

TEST(Crossref, FixtureCorpusParses) {
  std::ifstream in(fixture("crossref_10.jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    auto stub = parse_crossref_line(line, SourceClass::kCrossref, kRetrieved);
    EXPECT_TRUE(stub.doi || stub.title);
    ++n;
  }
  EXPECT_EQ(n, 10);
}

TEST(Crossref, MutatedRecordsNeverCrash) {
  std::ifstream in(fixture("crossref_10.jsonl"));
  std::string line;
  std::mt19937_64 rng(11);
  while (std::getline(in, line)) {
    for (int i = 0; i < 200; ++i) {
      std::string m = line;
      std::uniform_int_distribution<std::size_t> pos(0, m.size() - 1);
      for (int k = 0; k < 3; ++k) m[pos(rng)] = static_cast<char>(32 + rng() % 95);
      try {
        parse_crossref_line(m, SourceClass::kCrossref, kRetrieved);
      } catch (const RecordRejected&) {
      }
    }
  }
}

TEST(PubMed, FixtureArticles) {
  auto articles = split_pubmed_articles(read_file(fixture("pubmed_sample.xml")));
  ASSERT_EQ(articles.size(), 2u);

  auto a = parse_pubmed(articles[0], kRetrieved);
  EXPECT_EQ(a.source, SourceClass::kPubmed);
  EXPECT_EQ(a.source_record_id, "42");
  EXPECT_EQ(a.title, "T");
  EXPECT_FALSE(a.doi);
  EXPECT_EQ(a.issns, std::vector<std::string>{"0378-5955"});
  EXPECT_EQ(a.publication_year, 2021);
  EXPECT_EQ(a.abstract, "Gene expression in the cochlea. Genome data.");
  ASSERT_EQ(a.stub_authors.size(), 2u);
  EXPECT_EQ(a.stub_authors[0].raw_name, "Emilio Delgado");
  EXPECT_EQ(a.stub_authors[0].raw_affiliations, std::vector<std::string>{"University of Granada, Spain"});
  EXPECT_EQ(a.stub_authors[1].orcid, "0000-0001-6187-6610");
  EXPECT_EQ(a.referenced_dois, std::vector<std::string>{"10.1234/cr.0002"});

  auto b = parse_pubmed(articles[1], kRetrieved);
  EXPECT_EQ(b.source_record_id, "43");
  EXPECT_EQ(b.doi, "10.5555/pm.43");
  EXPECT_EQ(b.publication_year, 2020);
  ASSERT_EQ(b.stub_authors.size(), 1u);
  EXPECT_EQ(b.stub_authors[0].raw_name, "OpenIndex Consortium");
}

TEST(PubMed, Rejections) {
  EXPECT_THROW(parse_pubmed("<PubmedArticle><MedlineCitation>", kRetrieved), RecordRejected);
  EXPECT_THROW(parse_pubmed("<PubmedArticle><MedlineCitation><Article><ArticleTitle>T</ArticleTitle></Article>"
                            "</MedlineCitation></PubmedArticle>",
                            kRetrieved),
               RecordRejected);
  auto parts = split_pubmed_articles("<PubmedArticleSet><PubmedArticle><x/></PubmedArticle><PubmedArticle>");
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_THROW(parse_pubmed(parts[1], kRetrieved), RecordRejected);
}
