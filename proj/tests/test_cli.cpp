#include <sys/wait.h>

#include <cstdio>

#include <gtest/gtest.h>

#include "openindex/store.hpp"
#include "testing.hpp"

using namespace openindex;
using namespace testing_support;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  json last() const {
    auto end = out.find_last_not_of('\n');
    auto start = out.rfind('\n', end);
    return json::parse(out.substr(start == std::string::npos ? 0 : start + 1, end - start));
  }
};

// Runs the CLI inside `cwd` with --json and store ./db unless args name one; stderr is discarded.
Run cli(const fs::path& cwd, const std::string& args) {
  std::string data = args.find("--data-dir") == std::string::npos ? "--data-dir db " : "";
  std::string cmd = "cd '" + cwd.string() + "' && '" OPENINDEX_CLI "' --json " + data + args + " 2>/dev/null";
  FILE* p = ::popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  int status = ::pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string ingest_fixture() { return "ingest --source crossref --input '" + fixture("crossref_10.jsonl").string() + "'"; }

}  // namespace

TEST(Cli, IngestThenReingest) {
  TempDir dir;
  auto r = cli(dir.path(), ingest_fixture());
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = r.last();
  EXPECT_EQ(j["read"], 10);
  EXPECT_EQ(j["created"], 10);
  EXPECT_EQ(j["rejected"], 0);
  auto again = cli(dir.path(), ingest_fixture()).last();
  EXPECT_EQ(again["updated"], 10);
  EXPECT_EQ(again["created"], 0);
}

TEST(Cli, RejectedRecordsExitThree) {
  TempDir dir;
  write_file(dir / "in.jsonl", "{\"DOI\":\"10.1234/ok\",\"title\":[\"T\"]}\n{\"type\":\"journal-article\"}\nnot json\n");
  auto r = cli(dir.path(), "ingest --source crossref --input in.jsonl --report rep.jsonl");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.last()["rejected"], 2);
  std::istringstream rep(read_file(dir / "rep.jsonl"));
  std::string line;
  int lines = 0;
  while (std::getline(rep, line)) {
    auto j = json::parse(line);
    EXPECT_TRUE(j.contains("outcome") && j.contains("warnings") && j.contains("source_record_id"));
    ++lines;
  }
  EXPECT_EQ(lines, 3);
}

TEST(Cli, PubmedIngest) {
  TempDir dir;
  auto r = cli(dir.path(), "ingest --source pubmed --input '" + fixture("pubmed_sample.xml").string() + "'");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.last()["created"], 2);
}

TEST(Cli, UnreadableInputExitTwo) {
  TempDir dir;
  EXPECT_EQ(cli(dir.path(), "ingest --source crossref --input nope.jsonl").code, 2);
}

TEST(Cli, UsageAndConfigErrorsExitOne) {
  TempDir dir;
  EXPECT_EQ(cli(dir.path(), "frobnicate").code, 1);
  EXPECT_EQ(cli(dir.path(), "stats --set colour=blue").code, 1);
  write_file(dir / "openindex.toml", "theta = 2\n");
  EXPECT_EQ(cli(dir.path(), "stats").code, 1);
}

TEST(Cli, BusyStoreExitFour) {
  TempDir dir;
  auto holder = GraphStore::open(dir / "db", StoreOptions{});
  EXPECT_EQ(cli(dir.path(), ingest_fixture()).code, 4);
}

TEST(Cli, StatsReportsCoverage) {
  TempDir dir;
  cli(dir.path(), ingest_fixture());
  auto r = cli(dir.path(), "stats");
  ASSERT_EQ(r.code, 0);
  auto j = r.last();
  EXPECT_EQ(j["counts"]["works"], 10);
  EXPECT_TRUE(j.contains("ceid_coverage"));
  EXPECT_TRUE(j.contains("concept_coverage"));
}

TEST(Cli, ValidateAndViolations) {
  TempDir dir;
  cli(dir.path(), ingest_fixture());
  EXPECT_EQ(cli(dir.path(), "validate").code, 0);
  {
    auto s = GraphStore::open(dir / "db", StoreOptions{});
    Work w{.id = s->mint(EntityKind::kWork), .title = "Dangling"};
    w.locations = {{.venue = OpenAlexId(EntityKind::kVenue, 999), .primary = true}};
    s->put_unchecked(Entity(w));
  }
  auto r = cli(dir.path(), "validate");
  EXPECT_EQ(r.code, 6);
  EXPECT_NE(r.out.find("V999"), std::string::npos) << r.out;
}

TEST(Cli, DumpAndLoad) {
  TempDir dir;
  cli(dir.path(), ingest_fixture());
  ASSERT_EQ(cli(dir.path(), "dump --out d1").code, 0);
  EXPECT_EQ(cli(dir.path(), "dump --out d1").code, 7);
  auto r = cli(dir.path(), "--data-dir db2 load --in d1");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(cli(dir.path(), "--data-dir db2 load --in d1").code, 7);
  EXPECT_EQ(cli(dir.path(), "--data-dir db2 validate").code, 0);
}

TEST(Cli, HarvestFromStub) {
  std::vector<json> items;
  std::ifstream in(fixture("crossref_10.jsonl"));
  std::string line;
  while (std::getline(in, line)) items.push_back(json::parse(line));
  StubListingServer server(items);
  TempDir dir;
  auto r = cli(dir.path(), "harvest --endpoint " + server.url() + " --rows 4");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.last()["created"], 10);
  server.fail_next(1, 404);
  auto bad = cli(dir.path(), "harvest --endpoint " + server.url() + " --rows 4");
  EXPECT_EQ(bad.code, 5);
  EXPECT_TRUE(bad.last().contains("cursor"));
}
