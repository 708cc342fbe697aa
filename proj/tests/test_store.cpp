#include <gtest/gtest.h>

#include "openindex/store.hpp"
#include "testing.hpp"

using namespace openindex;
using namespace testing_support;

namespace {

OpenAlexId W(std::uint64_t n) { return OpenAlexId(EntityKind::kWork, n); }
OpenAlexId A(std::uint64_t n) { return OpenAlexId(EntityKind::kAuthor, n); }
OpenAlexId V(std::uint64_t n) { return OpenAlexId(EntityKind::kVenue, n); }

std::unique_ptr<GraphStore> open_at(const TempDir& dir, bool read_only = false) {
  StoreOptions o;
  o.read_only = read_only;
  o.clock = fixed_clock();
  return GraphStore::open(dir.path(), o);
}

Work work(GraphStore& s, std::optional<std::string> doi = std::nullopt, int year = 2022) {
  Work w{.id = s.mint(EntityKind::kWork)};
  w.doi = std::move(doi);
  w.title = "Work " + w.id.short_form();
  w.publication_year = year;
  w.work_type = WorkType::kJournalArticle;
  return w;
}

}  // namespace

TEST(Store, FreshDirectory) {
  TempDir dir;
  auto s = open_at(dir);
  EXPECT_TRUE(s->empty());
  for (auto k : kAllKinds) EXPECT_EQ(s->mint(k).serial(), 1u);
}

TEST(Store, DurableAcrossReopen) {
  TempDir dir;
  {
    auto s = open_at(dir);
    for (int i = 0; i < 10; ++i) s->upsert(work(*s, "10.1234/w" + std::to_string(i)));
  }
  auto s = open_at(dir);
  EXPECT_EQ(s->counts()[0], 10u);
  for (std::uint64_t i = 1; i <= 10; ++i) EXPECT_TRUE(s->get(W(i)));
  EXPECT_EQ(s->mint(EntityKind::kWork), W(11));
}

TEST(Store, DurableAfterCompaction) {
  TempDir dir;
  {
    auto s = open_at(dir);
    s->upsert(work(*s, "10.1234/a"));
    s->compact();
    s->upsert(work(*s, "10.1234/b"));
  }
  auto s = open_at(dir);
  EXPECT_TRUE(s->recovery().snapshot_loaded);
  EXPECT_EQ(s->recovery().log_entries_replayed, 1u);
  EXPECT_EQ(s->counts()[0], 2u);
  EXPECT_EQ(s->id_by_ceid(EntityKind::kWork, "10.1234/b"), W(2));
}

TEST(Store, DoiConflict) {
  TempDir dir;
  auto s = open_at(dir);
  s->upsert(work(*s, "10.1234/d"));
  EXPECT_THROW(s->upsert(work(*s, "10.1234/d")), ConflictError);
  EXPECT_EQ(s->counts()[0], 1u);
}

TEST(Store, UpdateKeepsIdAndCreatedDate) {
  TempDir dir;
  StoreOptions o;
  Date today(2022, 6, 1);
  o.clock = [&] { return today; };
  auto s = GraphStore::open(dir.path(), o);
  Work w = s->upsert(work(*s));
  EXPECT_EQ(w.created_date, Date(2022, 6, 1));
  today = Date(2022, 7, 1);
  w.title = "New title";
  s->upsert(w);
  auto got = s->get_as<Work>(w.id);
  ASSERT_TRUE(got);
  EXPECT_EQ(got->title, "New title");
  EXPECT_EQ(got->created_date, Date(2022, 6, 1));
  EXPECT_EQ(got->updated_date, Date(2022, 7, 1));
  // Unchanged upsert does not bump the date.
  today = Date(2022, 8, 1);
  EXPECT_EQ(s->commit({Entity(*got)}), 0u);
  EXPECT_EQ(s->get_as<Work>(w.id)->updated_date, Date(2022, 7, 1));
}

TEST(Store, InvalidRecordLeavesStoreUnchanged) {
  TempDir dir;
  auto s = open_at(dir);
  Work w = work(*s, "10.1234/p");
  w.locations = {{.url = "https://a", .primary = true}, {.url = "https://b", .primary = true}};
  EXPECT_THROW(s->upsert(w), ValidationError);
  EXPECT_TRUE(s->empty());
  EXPECT_FALSE(s->id_by_ceid(EntityKind::kWork, "10.1234/p"));
}

TEST(Store, BatchIsAtomic) {
  TempDir dir;
  auto s = open_at(dir);
  Work good = work(*s, "10.1234/g");
  Work bad = work(*s, "10.1234/h");
  bad.referenced_works = {bad.id};
  EXPECT_THROW(s->commit({Entity(good), Entity(bad)}), ValidationError);
  EXPECT_TRUE(s->empty());
}

TEST(Store, GetAbsentAndKindMismatch) {
  TempDir dir;
  auto s = open_at(dir);
  s->upsert(work(*s));
  EXPECT_TRUE(s->get(W(1)));
  EXPECT_FALSE(s->get(W(999)));
  EXPECT_FALSE(s->get(A(1)));
}

TEST(Store, CeidLookup) {
  TempDir dir;
  auto s = open_at(dir);
  s->upsert(work(*s, "10.1145/2740908.2742839"));
  auto hit = s->get_by_ceid(EntityKind::kWork, "10.1145/2740908.2742839");
  ASSERT_TRUE(hit);
  EXPECT_EQ(entity_id(*hit), W(1));
  EXPECT_FALSE(s->get_by_ceid(EntityKind::kAuthor, "0000-0002-1825-0097"));
  EXPECT_THROW(s->get_by_ceid(EntityKind::kWork, "DOI:10.1145/2740908.2742839"), ValidationError);
}

TEST(Store, ListFilterScan) {
  TempDir dir;
  auto s = open_at(dir);
  int years[] = {2022, 2022, 2022, 2021, 2021, 2020, 2019, 2018, 2017, 2016};
  for (int y : years) s->upsert(work(*s, std::nullopt, y));
  auto r = s->list(EntityKind::kWork, FilterExpr::parse(EntityKind::kWork, "publication_year:2022"), {}, {});
  EXPECT_EQ(r.total, 3u);
  ASSERT_EQ(r.records.size(), 3u);
  for (const auto& e : r.records) EXPECT_EQ(std::get<Work>(e).publication_year, 2022);
  auto all = s->list(EntityKind::kWork, {}, {}, {});
  EXPECT_EQ(all.total, 10u);
}

TEST(Store, ListConceptFilterIncludesInherited) {
  TempDir dir;
  auto s = open_at(dir);
  Concept root{.id = s->mint(EntityKind::kConcept), .wikidata = "Q1", .display_name = "root"};
  Concept child{.id = s->mint(EntityKind::kConcept), .wikidata = "Q2", .display_name = "child", .level = 1,
                .parents = {root.id}};
  s->commit({Entity(root), Entity(child)});
  Work direct = work(*s);
  direct.concepts = {{child.id, 1.0, false}, {root.id, 0.5, true}};
  Work inherited_only = work(*s);
  inherited_only.concepts = {{root.id, 0.5, true}};
  Work none = work(*s);
  s->commit({Entity(direct), Entity(inherited_only), Entity(none)});
  auto r = s->list(EntityKind::kWork, FilterExpr::parse(EntityKind::kWork, "concepts.id:" + root.id.short_form()), {},
                   {});
  EXPECT_EQ(r.total, 2u);
}

TEST(Store, PagingArguments) {
  TempDir dir;
  auto s = open_at(dir);
  for (int i = 0; i < 5; ++i) s->upsert(work(*s));
  EXPECT_THROW(s->list(EntityKind::kWork, {}, {}, Paging{.per_page = 0}), QueryError);
  EXPECT_THROW(s->list(EntityKind::kWork, {}, {}, Paging{.page = 0}), QueryError);
  EXPECT_THROW(s->list(EntityKind::kWork, {}, {}, Paging{.cursor = "garbage"}), QueryError);
  auto p3 = s->list(EntityKind::kWork, {}, {}, Paging{.page = 3, .per_page = 2});
  ASSERT_EQ(p3.records.size(), 1u);
  EXPECT_EQ(entity_id(p3.records[0]), W(5));
}

TEST(Store, CursorExcludesRowsCreatedAfterStart) {
  TempDir dir;
  auto s = open_at(dir);
  for (int i = 0; i < 4; ++i) s->upsert(work(*s));
  auto first = s->list(EntityKind::kWork, {}, {}, Paging{.cursor = "*", .per_page = 2});
  ASSERT_TRUE(first.next_cursor);
  s->upsert(work(*s));
  auto second = s->list(EntityKind::kWork, {}, {}, Paging{.cursor = first.next_cursor, .per_page = 2});
  EXPECT_EQ(second.records.size(), 2u);
  EXPECT_FALSE(second.next_cursor);
}

TEST(Store, AggregatesDirect) {
  TempDir dir;
  auto s = open_at(dir);
  Work a = work(*s), b = work(*s), c = work(*s);
  a.referenced_works = {b.id, c.id};
  b.referenced_works = {c.id};
  s->commit({Entity(a), Entity(b), Entity(c)});
  auto report = s->recompute_aggregates();
  EXPECT_EQ(report.changed[0], 2u);
  EXPECT_EQ(s->get_as<Work>(a.id)->cited_by_count, 0u);
  EXPECT_EQ(s->get_as<Work>(b.id)->cited_by_count, 1u);
  EXPECT_EQ(s->get_as<Work>(c.id)->cited_by_count, 2u);
  EXPECT_EQ(s->recompute_aggregates(true).total_changed(), 0u);
}

TEST(Store, AggregatesEmpty) {
  TempDir dir;
  auto s = open_at(dir);
  EXPECT_EQ(s->recompute_aggregates().total_changed(), 0u);
}

TEST(Store, IntegrityClean) {
  TempDir dir;
  auto s = open_at(dir);
  Venue v{.id = s->mint(EntityKind::kVenue), .display_name = "J"};
  Work w = work(*s, "10.1234/x");
  w.locations = {{.venue = v.id, .primary = true}};
  s->commit({Entity(v), Entity(w)});
  EXPECT_TRUE(s->integrity_check().empty());
}

TEST(Store, IntegrityFindsSeededDefects) {
  TempDir dir;
  auto s = open_at(dir);
  Work w = work(*s, "10.1234/x");
  w.locations = {{.venue = V(7), .primary = true}};
  s->put_unchecked(Entity(w));
  auto v = s->integrity_check();
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "dangling-reference");
  EXPECT_NE(v[0].message.find("W1"), std::string::npos);
  EXPECT_NE(v[0].message.find("V7"), std::string::npos);

  Work dup = work(*s, "10.1234/x");
  dup.locations.clear();
  s->put_unchecked(Entity(dup));
  bool bijection = false;
  for (const auto& x : s->integrity_check()) bijection |= x.rule == "ceid-bijection";
  EXPECT_TRUE(bijection);
}

TEST(Store, SingleWriterLock) {
  TempDir dir;
  auto writer = open_at(dir);
  EXPECT_THROW(open_at(dir), StoreBusyError);
  EXPECT_THROW(open_at(dir, true), StoreBusyError);
}

TEST(Store, ReadersShareTheLock) {
  TempDir dir;
  { open_at(dir); }
  auto r1 = open_at(dir, true);
  auto r2 = open_at(dir, true);
  EXPECT_THROW(open_at(dir), StoreBusyError);
  EXPECT_THROW(r1->mint(EntityKind::kWork), StoreError);
}

TEST(Store, TornTailIsDiscarded) {
  TempDir dir;
  {
    auto s = open_at(dir);
    s->upsert(work(*s, "10.1234/a"));
    s->upsert(work(*s, "10.1234/b"));
  }
  auto log = dir / "wal.log";
  auto size = fs::file_size(log);
  fs::resize_file(log, size - 3);
  auto s = open_at(dir);
  EXPECT_TRUE(s->recovery().truncated);
  EXPECT_EQ(s->counts()[0], 1u);
  EXPECT_TRUE(s->get(W(1)));
  EXPECT_FALSE(s->get(W(2)));
  EXPECT_TRUE(s->integrity_check().empty());
}
