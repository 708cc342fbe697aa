#include <gtest/gtest.h>

#include "openindex/api.hpp"
#include "openindex/ingestion.hpp"
#include "openindex/pipeline.hpp"
#include "testing.hpp"

using namespace openindex;
using namespace testing_support;
using nlohmann::json;

namespace {

class ApiTest : public ::testing::Test {
 protected:
  void SetUp() override {
    StoreOptions o;
    o.clock = fixed_clock();
    o.sync = SyncMode::kOnClose;
    store_ = GraphStore::open(dir_ / "db", o);
    PipelineConfig c;
    c.issn_table = IssnLinkingTable::from_csv_file(fixture("issn_l.csv"));
    Ingestor ing(*store_, c);
    std::ifstream in(fixture("crossref_10.jsonl"));
    std::string line;
    while (std::getline(in, line)) {
      raw_.push_back(json::parse(line));
      ing.ingest(parse_crossref(raw_.back(), SourceClass::kCrossref, Date(2022, 6, 1)));
    }
    store_->recompute_aggregates();
    ApiConfig cfg;
    cfg.base_url = "http://api.test";
    service_ = std::make_unique<ApiService>(*store_, cfg, c.issn_table);
  }

  json get(std::string_view path, const QueryParams& q = {}, int status = 200) {
    auto r = service_->handle(path, q);
    EXPECT_EQ(r.status, status) << path << " " << r.body;
    return json::parse(r.body);
  }

  // Brute-force oracle over the raw fixture: issued year in the given set.
  std::size_t count_years(std::set<int> years) const {
    std::size_t n = 0;
    for (const auto& r : raw_) n += years.count(r["issued"]["date-parts"][0][0].get<int>());
    return n;
  }

  TempDir dir_;
  std::unique_ptr<GraphStore> store_;
  std::unique_ptr<ApiService> service_;
  std::vector<json> raw_;
};

}  // namespace

TEST_F(ApiTest, Root) {
  auto j = get("/");
  EXPECT_EQ(j["counts"]["works"], 10);
  EXPECT_EQ(j["version"], kEngineVersion);
  EXPECT_EQ(j["kinds"].size(), 5u);
  EXPECT_TRUE(j["dump_created_date"].is_null());
}

TEST(Api, RootOnEmptyStore) {
  TempDir dir;
  auto s = GraphStore::open(dir / "db", StoreOptions{});
  ApiService api(*s, {});
  auto j = json::parse(api.handle("/", {}).body);
  for (const auto& [k, v] : j["counts"].items()) EXPECT_EQ(v, 0) << k;
}

TEST_F(ApiTest, LookupById) {
  auto j = get("/works/W2");
  EXPECT_EQ(j["id"], "http://api.test/works/W2");
  EXPECT_EQ(get("/works/https://openalex.org/W2"), j);
  get("/works/W999", {}, 404);
  get("/works/A1", {}, 400);
  get("/works/Wabc", {}, 400);
}

TEST_F(ApiTest, ExternalIdBodiesAreByteIdentical) {
  auto by_doi = service_->handle("/works/doi:10.1145/2740908.2742839", {});
  ASSERT_EQ(by_doi.status, 200);
  auto id = json::parse(by_doi.body)["id"].get<std::string>();
  auto short_id = id.substr(id.rfind('/') + 1);
  auto by_id = service_->handle("/works/" + short_id, {});
  EXPECT_EQ(by_doi.body, by_id.body);
  EXPECT_EQ(service_->handle("/works/doi:https://doi.org/10.1145/2740908.2742839", {}).body, by_id.body);

  auto by_orcid = service_->handle("/authors/orcid:0000-0001-6187-6610", {});
  ASSERT_EQ(by_orcid.status, 200);
  auto aid = json::parse(by_orcid.body)["id"].get<std::string>();
  EXPECT_EQ(service_->handle("/authors/" + aid.substr(aid.rfind('/') + 1), {}).body, by_orcid.body);

  auto by_issn = service_->handle("/venues/issn:0378-5955", {});
  EXPECT_EQ(by_issn.status, 200);
}

TEST_F(ApiTest, LookupErrors) {
  auto j = get("/authors/doi:10.1234/x", {}, 400);
  EXPECT_EQ(j["error"], "bad_request");
  get("/works/orcid:0000-0001-6187-6610", {}, 400);
  get("/works/doi:not-a-doi", {}, 400);
  get("/works/isbn:123", {}, 400);
  get("/works/doi:10.1234/absent", {}, 404);
  get("/publishers", {}, 404);
}

TEST_F(ApiTest, FilterAgainstScanOracle) {
  auto j = get("/works", {{"filter", "publication_year:2022"}});
  EXPECT_EQ(j["meta"]["count"], count_years({2022}));
  EXPECT_EQ(j["meta"]["count"], 3);
  EXPECT_EQ(j["results"].size(), 3u);
  for (const auto& r : j["results"]) EXPECT_EQ(r["publication_year"], 2022);
  auto u = get("/works", {{"filter", "publication_year:2021|2022"}});
  EXPECT_EQ(u["meta"]["count"], count_years({2021, 2022}));
  EXPECT_EQ(u["meta"]["count"], 5);
}

TEST_F(ApiTest, FilterErrorsNameToken) {
  auto j = get("/works", {{"filter", "colour:blue"}}, 400);
  EXPECT_NE(j["message"].get<std::string>().find("colour"), std::string::npos);
  get("/works", {{"filter", "publication_year"}}, 400);
  get("/works", {{"per-page", "201"}}, 400);
  get("/works", {{"per-page", "0"}}, 400);
  get("/works", {{"page", "2"}, {"cursor", "*"}}, 400);
  get("/works", {{"page", "10001"}, {"per-page", "1"}}, 400);
  get("/works", {{"cursor", "bogus"}}, 400);
}

TEST_F(ApiTest, CursorWalkMatchesOffsetPaging) {
  QueryParams base{{"filter", "publication_year:2021|2022"}, {"per-page", "2"}};
  std::vector<std::string> walked;
  std::vector<std::size_t> sizes;
  std::string cursor = "*";
  for (;;) {
    auto q = base;
    q.emplace("cursor", cursor);
    auto j = get("/works", q);
    EXPECT_TRUE(j["meta"]["page"].is_null());
    sizes.push_back(j["results"].size());
    for (const auto& r : j["results"]) walked.push_back(r["id"]);
    if (j["meta"]["next_cursor"].is_null()) break;
    cursor = j["meta"]["next_cursor"];
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{2, 2, 1}));
  std::vector<std::string> paged;
  for (int p = 1; p <= 3; ++p) {
    auto q = base;
    q.emplace("page", std::to_string(p));
    auto j = get("/works", q);
    EXPECT_EQ(j["meta"]["page"], p);
    for (const auto& r : j["results"]) paged.push_back(r["id"]);
  }
  EXPECT_EQ(walked, paged);
  EXPECT_EQ(std::set<std::string>(walked.begin(), walked.end()).size(), 5u);
}

TEST_F(ApiTest, SortAndDefaults) {
  auto j = get("/works", {{"sort", "publication_year:desc"}});
  EXPECT_EQ(j["meta"]["per_page"], 25);
  ASSERT_EQ(j["results"].size(), 10u);
  for (std::size_t i = 1; i < j["results"].size(); ++i) {
    EXPECT_GE(j["results"][i - 1]["publication_year"].get<int>(), j["results"][i]["publication_year"].get<int>());
  }
  get("/works", {{"sort", "colour"}}, 400);
}

TEST_F(ApiTest, ListMatchesLookupBodies) {
  auto list = get("/works", {{"per-page", "200"}});
  for (const auto& r : list["results"]) {
    std::string id = r["id"];
    EXPECT_EQ(get("/works/" + id.substr(id.rfind('/') + 1)), r);
  }
}

TEST_F(ApiTest, RepeatedRequestsAreIdentical) {
  auto a = service_->handle("/works", {{"filter", "publication_year:2022"}});
  auto b = service_->handle("/works", {{"filter", "publication_year:2022"}});
  EXPECT_EQ(a.body, b.body);
}

TEST_F(ApiTest, HttpServer) {
  ServerOptions opt;
  opt.port = 0;
  ApiServer server(*service_, opt);
  int port = server.bind();
  std::thread t([&] { server.listen(); });
  httplib::Client cli("127.0.0.1", port);
  cli.set_connection_timeout(5);
  auto r = cli.Get("/works?filter=publication_year:2022");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->get_header_value("Content-Type"), kJsonContentType);
  EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
  EXPECT_EQ(json::parse(r->body)["meta"]["count"], 3);

  auto bad = cli.Get("/works?filter=colour:blue");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(bad->get_header_value("Content-Type"), kJsonContentType);

  auto pre = cli.Options("/works");
  ASSERT_TRUE(pre);
  EXPECT_EQ(pre->status, 204);
  EXPECT_NE(pre->get_header_value("Access-Control-Allow-Methods").find("GET"), std::string::npos);

  auto post = cli.Post("/works", "{}", "application/json");
  ASSERT_TRUE(post);
  EXPECT_EQ(post->status, 405);
  EXPECT_EQ(store_->counts()[0], 10u);

  server.stop();
  t.join();
}
