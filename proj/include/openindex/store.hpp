#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "openindex/date.hpp"
#include "openindex/entities.hpp"
#include "openindex/ids.hpp"
#include "openindex/query.hpp"

namespace openindex {

enum class SyncMode {
  kEveryCommit,  // fdatasync before each commit returns
  kOnClose,      // flush per commit, fsync at compaction and close
};

struct StoreOptions {
  bool read_only = false;
  SyncMode sync = SyncMode::kEveryCommit;
  Clock clock = default_clock();
  // Compact on close once the write log exceeds this many bytes.
  std::uint64_t compact_threshold_bytes = 64u << 20;
};

struct RecoveryReport {
  bool snapshot_loaded = false;
  std::size_t log_entries_replayed = 0;
  bool truncated = false;
  std::uint64_t truncated_bytes = 0;  // torn/corrupt tail discarded from the log
};

struct Violation {
  std::string entity;  // short id, or "store" for global rules
  std::string rule;
  std::string message;
};

struct AggregateReport {
  std::array<std::size_t, 5> changed{};  // records whose counts changed, per kind
  std::size_t total_changed() const noexcept {
    std::size_t n = 0;
    for (auto c : changed) n += c;
    return n;
  }
};

struct DumpFile {
  std::string path;  // relative to the dump root
  std::size_t count = 0;
  std::string sha256;
};

struct DumpManifest {
  Date created_date;
  std::array<std::vector<DumpFile>, 5> files;
  std::array<std::size_t, 5> totals{};
};

struct ImportReport {
  std::array<std::size_t, 5> imported{};
  std::size_t files = 0;
};

// The records stored for one kind, keyed by serial.
template <EntityRecord T>
struct Row {
  T record;
  std::uint64_t seq = 0;  // commit sequence that created the row
};

template <EntityRecord T>
using Table = std::map<std::uint64_t, Row<T>>;

// File-backed store for the five entity kinds: append-only write log plus a
// compacted snapshot, CEID and pipeline indexes, queries, aggregates,
// integrity checks and dump export/import.
//
// Single writer, many readers. Readers take a shared lock and see committed
// state only. Callers doing read-modify-write sequences hold writer_gate().
class GraphStore {
 public:
  // Recovers snapshot + log. Throws StoreBusyError when another process holds
  // the lock (exclusive for writers, shared for read-only opens).
  static std::unique_ptr<GraphStore> open(const std::filesystem::path& data_dir, StoreOptions options = {});

  GraphStore(const GraphStore&) = delete;
  GraphStore& operator=(const GraphStore&) = delete;
  ~GraphStore();

  const RecoveryReport& recovery() const noexcept { return recovery_; }
  const std::filesystem::path& data_dir() const noexcept { return dir_; }
  bool read_only() const noexcept { return options_.read_only; }
  Date today() const { return options_.clock(); }

  [[nodiscard]] std::unique_lock<std::mutex> writer_gate() { return std::unique_lock(gate_); }

  OpenAlexId mint(EntityKind kind);
  std::uint64_t last_serial(EntityKind kind) const noexcept { return allocator_.last(kind); }

  // Validates and durably stores one record. New records get created_date
  // and updated_date = today; changed records get updated_date = today.
  // Throws ValidationError (store unchanged) or ConflictError on a CEID
  // owned by another id.
  template <EntityRecord T>
  T upsert(T record);

  // Atomic multi-record commit with the same stamping rules as upsert.
  // Records equal to their stored version (ignoring updated_date) are skipped.
  // Returns the number of records written.
  std::size_t commit(std::vector<Entity> batch);

  std::optional<Entity> get(const OpenAlexId& id) const;
  template <EntityRecord T>
  std::optional<T> get_as(const OpenAlexId& id) const;

  // `ceid` must already be normalized (ValidationError otherwise).
  std::optional<Entity> get_by_ceid(EntityKind kind, std::string_view ceid) const;
  std::optional<OpenAlexId> id_by_ceid(EntityKind kind, std::string_view ceid) const;

  ListResult list(EntityKind kind, const FilterExpr& filter, const SortSpec& sort, const Paging& paging) const;

  std::array<std::size_t, 5> counts() const;
  bool empty() const;

  // Visits every record of a kind under the shared lock, ascending serial.
  template <EntityRecord T, typename Fn>
  void for_each(Fn&& fn) const;
  template <EntityRecord T>
  std::vector<T> all() const;
  // Calls fn(record) under the shared lock without copying; false if absent.
  template <EntityRecord T, typename Fn>
  bool visit_record(const OpenAlexId& id, Fn&& fn) const;

  // Recounts works_count / cited_by_count from edges. With dry_run the
  // report lists what would change and nothing is written.
  AggregateReport recompute_aggregates(bool dry_run = false);
  std::vector<Violation> integrity_check() const;

  // Fails when out_dir exists and is not empty; removes partial output on error.
  DumpManifest export_dump(const std::filesystem::path& out_dir);
  // Store must be empty; every part's digest is verified before loading.
  ImportReport import_dump(const std::filesystem::path& in_dir);
  std::optional<Date> last_dump_date() const;

  // Writes a snapshot of the full state and truncates the write log.
  void compact();

  // Pipeline indexes.
  std::vector<OpenAlexId> works_by_fingerprint(const std::string& fingerprint) const;
  std::vector<OpenAlexId> works_citing_doi(const std::string& doi) const;
  std::vector<OpenAlexId> authors_by_family(const std::string& family) const;
  std::vector<OpenAlexId> works_by_author(const OpenAlexId& author) const;
  std::optional<OpenAlexId> venue_by_name(std::string_view display_name) const;

  // Test hook: stores a record with no validation, stamping or CEID checks,
  // to seed integrity violations.
  void put_unchecked(Entity entity);

 private:
  GraphStore(std::filesystem::path dir, StoreOptions options);

  template <EntityRecord T>
  Table<T>& table() {
    return std::get<Table<T>>(tables_);
  }
  template <EntityRecord T>
  const Table<T>& table() const {
    return std::get<Table<T>>(tables_);
  }

  void require_writable() const;
  void acquire_lock();
  void recover();
  void load_snapshot(const std::filesystem::path& path);
  void replay_log();
  void apply_payload_locked(const std::string& payload);
  void append_log_locked(const std::string& payload);
  void write_snapshot_locked();
  std::string alloc_json_locked() const;

  // Applies records to memory + indexes; caller holds the unique lock.
  void apply_locked(const Entity& entity);
  template <EntityRecord T>
  void apply_record_locked(const T& record);
  template <EntityRecord T>
  void index_locked(const T& record, bool add);
  std::optional<Entity> get_locked(const OpenAlexId& id) const;

  std::size_t commit_impl(std::vector<Entity> batch, bool stamp);

  std::filesystem::path dir_;
  StoreOptions options_;
  RecoveryReport recovery_;
  int lock_fd_ = -1;
  int log_fd_ = -1;
  std::uint64_t log_size_ = 0;
  std::uint64_t epoch_ = 0;

  mutable std::shared_mutex mutex_;
  std::mutex gate_;
  IdAllocator allocator_;
  std::uint64_t seq_ = 0;
  std::optional<Date> last_dump_date_;

  std::tuple<Table<Work>, Table<Author>, Table<Venue>, Table<Institution>, Table<Concept>> tables_;
  std::array<std::unordered_map<std::string, std::uint64_t>, 5> ceid_index_;
  std::unordered_map<std::string, std::set<std::uint64_t>> fingerprint_index_;
  std::unordered_map<std::string, std::set<std::uint64_t>> unresolved_index_;
  std::unordered_map<std::uint64_t, std::set<std::uint64_t>> author_works_;
  std::unordered_map<std::string, std::set<std::uint64_t>> family_index_;
  std::unordered_map<std::string, std::set<std::uint64_t>> venue_name_index_;
};

template <EntityRecord T>
T GraphStore::upsert(T record) {
  OpenAlexId id = record.id;
  commit({Entity(std::move(record))});
  auto stored = get_as<T>(id);
  return *stored;
}

template <EntityRecord T>
std::optional<T> GraphStore::get_as(const OpenAlexId& id) const {
  if (id.kind() != T::kKind) return std::nullopt;
  std::shared_lock lock(mutex_);
  const auto& t = table<T>();
  auto it = t.find(id.serial());
  if (it == t.end()) return std::nullopt;
  return it->second.record;
}

template <EntityRecord T, typename Fn>
void GraphStore::for_each(Fn&& fn) const {
  std::shared_lock lock(mutex_);
  for (const auto& [serial, row] : table<T>()) fn(row.record);
}

template <EntityRecord T, typename Fn>
bool GraphStore::visit_record(const OpenAlexId& id, Fn&& fn) const {
  if (id.kind() != T::kKind) return false;
  std::shared_lock lock(mutex_);
  const auto& t = table<T>();
  auto it = t.find(id.serial());
  if (it == t.end()) return false;
  fn(it->second.record);
  return true;
}

template <EntityRecord T>
std::vector<T> GraphStore::all() const {
  std::vector<T> out;
  for_each<T>([&](const T& record) { out.push_back(record); });
  return out;
}

// Gzip with a fixed header (mtime 0) so identical input gives identical bytes.
std::string gzip_compress(std::string_view data);
std::string gzip_decompress(std::string_view data);
std::string sha256_hex(std::string_view data);

}  // namespace openindex
