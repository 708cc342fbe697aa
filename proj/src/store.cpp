#include "openindex/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <random>

#include <zlib.h>

#include "openindex/codec.hpp"
#include "openindex/disambiguation.hpp"
#include "openindex/identifiers.hpp"
#include "openindex/text.hpp"

namespace openindex {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kSnapshotMagic = "OIXSNAP1";
constexpr const char* kLogName = "wal.log";
constexpr const char* kSnapshotName = "snapshot.bin";
constexpr const char* kSnapshotTmpName = "snapshot.tmp";
constexpr const char* kLockName = "LOCK";
constexpr std::size_t kFrameHeader = 8;
constexpr std::size_t kAggregateChunk = 1000;

std::string errno_text() { return std::strerror(errno); }

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

std::uint32_t crc_of(std::string_view data) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
}

// [u32 length][u32 crc32][payload], little endian.
void append_frame(std::string& out, std::string_view payload) {
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  put_u32(out, crc_of(payload));
  out.append(payload);
}

// Reads the frame at `offset`; nullopt when torn or corrupt.
std::optional<std::string_view> read_frame(std::string_view buf, std::size_t& offset) {
  if (buf.size() - offset < kFrameHeader) return std::nullopt;
  std::uint32_t len = get_u32(buf.data() + offset);
  std::uint32_t crc = get_u32(buf.data() + offset + 4);
  if (buf.size() - offset - kFrameHeader < len) return std::nullopt;
  std::string_view payload = buf.substr(offset + kFrameHeader, len);
  if (crc_of(payload) != crc) return std::nullopt;
  offset += kFrameHeader + len;
  return payload;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_all(int fd, std::string_view data, const fs::path& what) {
  while (!data.empty()) {
    ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StoreError("write " + what.string() + ": " + errno_text());
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void fsync_dir(const fs::path& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

template <typename Fn>
decltype(auto) visit_kind(EntityKind kind, Fn&& fn) {
  switch (kind) {
    case EntityKind::kWork:
      return fn(std::type_identity<Work>{});
    case EntityKind::kAuthor:
      return fn(std::type_identity<Author>{});
    case EntityKind::kVenue:
      return fn(std::type_identity<Venue>{});
    case EntityKind::kInstitution:
      return fn(std::type_identity<Institution>{});
    case EntityKind::kConcept:
      break;
  }
  return fn(std::type_identity<Concept>{});
}

IdScheme ceid_scheme(EntityKind kind) noexcept {
  switch (kind) {
    case EntityKind::kWork:
      return IdScheme::kDoi;
    case EntityKind::kAuthor:
      return IdScheme::kOrcid;
    case EntityKind::kVenue:
      return IdScheme::kIssn;
    case EntityKind::kInstitution:
      return IdScheme::kRor;
    case EntityKind::kConcept:
      break;
  }
  return IdScheme::kWikidata;
}

std::string scheme_label(EntityKind kind) { return std::string(scheme_name(ceid_scheme(kind))); }

std::string kind_key(EntityKind kind) { return std::string(1, kind_letter(kind)); }

EntityKind kind_from_key(const std::string& key) {
  if (key.size() == 1) {
    if (auto k = kind_from_letter(key[0])) return *k;
  }
  throw StoreError("unknown kind '" + key + "' in store file");
}

Json put_json(const Entity& e) { return Json{{"k", kind_key(entity_kind(e))}, {"r", to_json(e)}}; }

void erase_from(std::unordered_map<std::string, std::set<std::uint64_t>>& index, const std::string& key,
                std::uint64_t serial) {
  auto it = index.find(key);
  if (it == index.end()) return;
  it->second.erase(serial);
  if (it->second.empty()) index.erase(it);
}

std::string hex_encode(std::string_view data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (unsigned char c : data) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0xF]);
  }
  return out;
}

std::optional<std::string> hex_decode(std::string_view hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  std::string out;
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = nibble(hex[i]);
    int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<char>(hi * 16 + lo));
  }
  return out;
}

Json sort_key_json(const SortKey& key) {
  if (auto* i = std::get_if<std::int64_t>(&key)) return *i;
  if (auto* s = std::get_if<std::string>(&key)) return *s;
  return nullptr;
}

SortKey sort_key_from_json(const Json& j) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_null()) return {};
  throw QueryError("cursor", "malformed cursor");
}

struct CursorState {
  std::uint64_t epoch = 0;
  std::uint64_t seq = 0;
  std::string field;
  bool descending = false;
  std::optional<std::pair<SortKey, std::uint64_t>> after;
};

std::string encode_cursor(const CursorState& c) {
  Json j{{"e", c.epoch}, {"s", c.seq}, {"f", c.field}, {"d", c.descending}};
  if (c.after) {
    j["k"] = sort_key_json(c.after->first);
    j["i"] = c.after->second;
  }
  return hex_encode(j.dump());
}

CursorState decode_cursor(const std::string& token) {
  auto raw = hex_decode(token);
  if (!raw) throw QueryError(token, "malformed cursor '" + token + "'");
  try {
    Json j = Json::parse(*raw);
    CursorState c{j.at("e").get<std::uint64_t>(), j.at("s").get<std::uint64_t>(), j.at("f").get<std::string>(),
                  j.at("d").get<bool>(), std::nullopt};
    if (j.contains("i")) c.after.emplace(sort_key_from_json(j.at("k")), j.at("i").get<std::uint64_t>());
    return c;
  } catch (const nlohmann::json::exception&) {
    throw QueryError(token, "malformed cursor '" + token + "'");
  }
}

template <EntityRecord T>
ListResult list_table(const Table<T>& table, const FilterExpr& filter, const SortSpec& sort, const Paging& paging,
                      std::uint64_t epoch, std::uint64_t current_seq) {
  if (paging.per_page == 0) throw QueryError("per_page", "per_page must be at least 1");
  if (paging.page == 0) throw QueryError("page", "page must be at least 1");

  bool cursor_mode = paging.cursor.has_value();
  CursorState state{epoch, current_seq, sort.field, sort.descending, std::nullopt};
  if (cursor_mode && *paging.cursor != "*") {
    state = decode_cursor(*paging.cursor);
    if (state.epoch != epoch) throw QueryError(*paging.cursor, "cursor expired");
    if (state.field != sort.field || state.descending != sort.descending) {
      throw QueryError(*paging.cursor, "cursor was issued for a different sort");
    }
  }

  using Entry = std::pair<SortKey, const Row<T>*>;
  std::vector<Entry> matched;
  for (const auto& [serial, row] : table) {
    if (cursor_mode && row.seq > state.seq) continue;
    if (!matches(row.record, filter)) continue;
    matched.emplace_back(sort_key(row.record, sort.field), &row);
  }
  auto less = [&](const SortKey& ka, std::uint64_t sa, const SortKey& kb, std::uint64_t sb) {
    if (ka != kb) return sort.descending ? kb < ka : ka < kb;
    return sa < sb;
  };
  std::sort(matched.begin(), matched.end(), [&](const Entry& a, const Entry& b) {
    return less(a.first, a.second->record.id.serial(), b.first, b.second->record.id.serial());
  });

  ListResult result;
  result.total = matched.size();
  result.per_page = paging.per_page;
  std::size_t begin = 0;
  if (cursor_mode) {
    result.page = 1;
    if (state.after) {
      const auto& [ak, as] = *state.after;
      auto it = std::partition_point(matched.begin(), matched.end(), [&](const Entry& e) {
        return !less(ak, as, e.first, e.second->record.id.serial());
      });
      begin = static_cast<std::size_t>(it - matched.begin());
    }
  } else {
    result.page = paging.page;
    begin = std::min(matched.size(), (paging.page - 1) * paging.per_page);
  }
  std::size_t end = std::min(matched.size(), begin + paging.per_page);
  for (std::size_t i = begin; i < end; ++i) result.records.emplace_back(matched[i].second->record);
  if (cursor_mode && end < matched.size() && end > begin) {
    const auto& last = matched[end - 1];
    state.after.emplace(last.first, last.second->record.id.serial());
    result.next_cursor = encode_cursor(state);
  }
  return result;
}

}  // namespace

GraphStore::GraphStore(fs::path dir, StoreOptions options) : dir_(std::move(dir)), options_(std::move(options)) {
  std::random_device rd;
  epoch_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::unique_ptr<GraphStore> GraphStore::open(const fs::path& data_dir, StoreOptions options) {
  std::error_code ec;
  if (options.read_only) {
    if (!fs::is_directory(data_dir, ec)) throw StoreError("data directory " + data_dir.string() + " does not exist");
  } else {
    fs::create_directories(data_dir, ec);
    if (ec) throw StoreError("cannot create " + data_dir.string() + ": " + ec.message());
  }
  std::unique_ptr<GraphStore> store(new GraphStore(data_dir, std::move(options)));
  store->acquire_lock();
  store->recover();
  return store;
}

GraphStore::~GraphStore() {
  if (log_fd_ >= 0) {
    try {
      if (log_size_ > options_.compact_threshold_bytes) compact();
    } catch (...) {
      // The log is still intact; the next open replays it.
    }
    ::fsync(log_fd_);
    ::close(log_fd_);
  }
  if (lock_fd_ >= 0) ::close(lock_fd_);
}

void GraphStore::require_writable() const {
  if (options_.read_only) throw StoreError("store opened read-only");
}

void GraphStore::acquire_lock() {
  fs::path path = dir_ / kLockName;
  lock_fd_ = ::open(path.c_str(), options_.read_only ? O_RDONLY : (O_RDWR | O_CREAT), 0644);
  if (lock_fd_ < 0 && options_.read_only && errno == ENOENT) {
    lock_fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
  }
  if (lock_fd_ < 0) throw StoreError("cannot open lock file " + path.string() + ": " + errno_text());
  int op = (options_.read_only ? LOCK_SH : LOCK_EX) | LOCK_NB;
  if (::flock(lock_fd_, op) != 0) {
    int err = errno;
    ::close(lock_fd_);
    lock_fd_ = -1;
    if (err == EWOULDBLOCK) throw StoreBusyError("store " + dir_.string() + " is locked by another process");
    throw StoreError("cannot lock " + path.string() + ": " + std::strerror(err));
  }
}

void GraphStore::recover() {
  std::unique_lock lock(mutex_);
  std::error_code ec;
  if (!options_.read_only) fs::remove(dir_ / kSnapshotTmpName, ec);
  fs::path snapshot = dir_ / kSnapshotName;
  if (fs::exists(snapshot)) {
    load_snapshot(snapshot);
    recovery_.snapshot_loaded = true;
  }
  replay_log();
}

void GraphStore::load_snapshot(const fs::path& path) {
  std::string buf = read_file(path);
  if (buf.compare(0, kSnapshotMagic.size(), kSnapshotMagic) != 0) {
    throw StoreError("snapshot " + path.string() + " has a bad header");
  }
  std::size_t offset = kSnapshotMagic.size();
  auto header = read_frame(buf, offset);
  if (!header) throw StoreError("snapshot " + path.string() + " is corrupt");
  try {
    Json h = Json::parse(*header);
    const auto& alloc = h.at("a");
    for (auto kind : kAllKinds) allocator_.advance_to(kind, alloc.at(kind_index(kind)).get<std::uint64_t>());
    if (h.contains("m") && h["m"].contains("dump")) last_dump_date_ = Date::parse(h["m"]["dump"].get<std::string>());
    auto n = h.at("n").get<std::size_t>();
    for (std::size_t i = 0; i < n; ++i) {
      auto frame = read_frame(buf, offset);
      if (!frame) throw StoreError("snapshot " + path.string() + " is truncated");
      Json p = Json::parse(*frame);
      apply_locked(entity_from_json(kind_from_key(p.at("k").get<std::string>()), p.at("r")));
    }
  } catch (const nlohmann::json::exception& e) {
    throw StoreError("snapshot " + path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw StoreError("snapshot " + path.string() + ": " + e.what());
  }
}

void GraphStore::replay_log() {
  fs::path path = dir_ / kLogName;
  std::string buf;
  if (fs::exists(path)) buf = read_file(path);
  std::size_t offset = 0;
  while (offset < buf.size()) {
    std::size_t next = offset;
    auto payload = read_frame(buf, next);
    if (!payload) break;
    try {
      apply_payload_locked(std::string(*payload));
    } catch (const Error&) {
      break;
    } catch (const nlohmann::json::exception&) {
      break;
    }
    offset = next;
    ++recovery_.log_entries_replayed;
  }
  if (offset < buf.size()) {
    recovery_.truncated = true;
    recovery_.truncated_bytes = buf.size() - offset;
  }
  if (options_.read_only) return;
  log_fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (log_fd_ < 0) throw StoreError("cannot open " + path.string() + ": " + errno_text());
  if (recovery_.truncated) {
    if (::ftruncate(log_fd_, static_cast<off_t>(offset)) != 0) {
      throw StoreError("cannot truncate " + path.string() + ": " + errno_text());
    }
    ::fsync(log_fd_);
  }
  log_size_ = offset;
}

// Parses the whole entry before touching state so a bad entry applies nothing.
void GraphStore::apply_payload_locked(const std::string& payload) {
  Json j = Json::parse(payload);
  std::vector<Entity> puts;
  for (const auto& p : j.at("p")) {
    puts.push_back(entity_from_json(kind_from_key(p.at("k").get<std::string>()), p.at("r")));
  }
  std::array<std::uint64_t, 5> alloc{};
  const auto& a = j.at("a");
  for (auto kind : kAllKinds) alloc[kind_index(kind)] = a.at(kind_index(kind)).get<std::uint64_t>();
  std::optional<Date> dump;
  if (j.contains("m") && j["m"].contains("dump")) dump = Date::parse(j["m"]["dump"].get<std::string>());

  for (auto kind : kAllKinds) allocator_.advance_to(kind, alloc[kind_index(kind)]);
  if (dump) last_dump_date_ = dump;
  ++seq_;
  for (const auto& e : puts) apply_locked(e);
}

void GraphStore::append_log_locked(const std::string& payload) {
  std::string frame;
  append_frame(frame, payload);
  try {
    write_all(log_fd_, frame, dir_ / kLogName);
  } catch (...) {
    if (::ftruncate(log_fd_, static_cast<off_t>(log_size_)) != 0) {
      // Recovery will discard the torn tail.
    }
    throw;
  }
  if (options_.sync == SyncMode::kEveryCommit && ::fdatasync(log_fd_) != 0) {
    throw StoreError("fdatasync failed: " + errno_text());
  }
  log_size_ += frame.size();
}

std::string GraphStore::alloc_json_locked() const {
  Json a = Json::array();
  for (auto kind : kAllKinds) a.push_back(allocator_.last(kind));
  return a.dump();
}

void GraphStore::write_snapshot_locked() {
  std::size_t n = 0;
  std::apply([&](const auto&... t) { ((n += t.size()), ...); }, tables_);
  Json header{{"a", Json::parse(alloc_json_locked())}, {"n", n}};
  if (last_dump_date_) header["m"] = Json{{"dump", last_dump_date_->iso()}};

  std::string buf(kSnapshotMagic);
  append_frame(buf, header.dump());
  std::apply(
      [&](const auto&... t) {
        auto emit = [&](const auto& table) {
          for (const auto& [serial, row] : table) append_frame(buf, put_json(Entity(row.record)).dump());
        };
        (emit(t), ...);
      },
      tables_);

  fs::path tmp = dir_ / kSnapshotTmpName;
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw StoreError("cannot create " + tmp.string() + ": " + errno_text());
  try {
    write_all(fd, buf, tmp);
    if (::fsync(fd) != 0) throw StoreError("fsync " + tmp.string() + ": " + errno_text());
  } catch (...) {
    ::close(fd);
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
  ::close(fd);
  fs::rename(tmp, dir_ / kSnapshotName);
  fsync_dir(dir_);
  if (log_fd_ >= 0) {
    if (::ftruncate(log_fd_, 0) != 0) throw StoreError("cannot truncate write log: " + errno_text());
    ::fsync(log_fd_);
    log_size_ = 0;
  }
}

OpenAlexId GraphStore::mint(EntityKind kind) {
  require_writable();
  return allocator_.mint(kind);
}

void GraphStore::apply_locked(const Entity& entity) {
  std::visit([&](const auto& record) { apply_record_locked(record); }, entity);
}

template <EntityRecord T>
void GraphStore::apply_record_locked(const T& record) {
  auto& t = table<T>();
  auto it = t.find(record.id.serial());
  if (it != t.end()) {
    index_locked(it->second.record, false);
    it->second.record = record;
  } else {
    it = t.emplace(record.id.serial(), Row<T>{record, seq_}).first;
  }
  index_locked(it->second.record, true);
  allocator_.advance_to(T::kKind, record.id.serial());
}

template <EntityRecord T>
void GraphStore::index_locked(const T& record, bool add) {
  std::uint64_t serial = record.id.serial();
  auto& ceids = ceid_index_[kind_index(T::kKind)];
  if (auto ceid = entity_ceid(Entity(record))) {
    if (add) {
      ceids[*ceid] = serial;
    } else if (auto it = ceids.find(*ceid); it != ceids.end() && it->second == serial) {
      ceids.erase(it);
    }
  }
  auto touch = [&](auto& index, const auto& key) {
    if (add) {
      index[key].insert(serial);
    } else {
      erase_from(index, key, serial);
    }
  };

  if constexpr (std::same_as<T, Work>) {
    if (auto fp = fingerprint_of(record)) touch(fingerprint_index_, *fp);
    for (const auto& doi : record.unresolved_references) touch(unresolved_index_, doi);
    for (const auto& a : record.authorships) {
      if (add) {
        author_works_[a.author.serial()].insert(serial);
      } else if (auto it = author_works_.find(a.author.serial()); it != author_works_.end()) {
        it->second.erase(serial);
        if (it->second.empty()) author_works_.erase(it);
      }
    }
  } else if constexpr (std::same_as<T, Author>) {
    std::set<std::string> families;
    if (auto f = family_of(record.display_name)) families.insert(*f);
    for (const auto& alt : record.alternate_names) {
      if (auto f = family_of(alt)) families.insert(*f);
    }
    for (const auto& f : families) touch(family_index_, f);
  } else if constexpr (std::same_as<T, Venue>) {
    std::string key = text::alnum_normalize(record.display_name);
    if (!key.empty()) touch(venue_name_index_, key);
  }
}

std::optional<Entity> GraphStore::get_locked(const OpenAlexId& id) const {
  return visit_kind(id.kind(), [&]<typename T>(std::type_identity<T>) -> std::optional<Entity> {
    const auto& t = table<T>();
    auto it = t.find(id.serial());
    if (it == t.end()) return std::nullopt;
    return Entity(it->second.record);
  });
}

std::size_t GraphStore::commit(std::vector<Entity> batch) { return commit_impl(std::move(batch), true); }

std::size_t GraphStore::commit_impl(std::vector<Entity> batch, bool stamp) {
  require_writable();
  std::unique_lock lock(mutex_);
  Date today = options_.clock();

  // Later occurrences of the same id replace earlier ones.
  std::unordered_map<OpenAlexId, std::size_t> last_index;
  for (std::size_t i = 0; i < batch.size(); ++i) last_index[entity_id(batch[i])] = i;

  std::vector<Entity> out;
  std::map<std::pair<std::size_t, std::string>, std::uint64_t> batch_ceids;
  std::array<std::uint64_t, 5> alloc{};
  for (auto kind : kAllKinds) alloc[kind_index(kind)] = allocator_.last(kind);

  for (std::size_t i = 0; i < batch.size(); ++i) {
    Entity& e = batch[i];
    const OpenAlexId id = entity_id(e);
    if (last_index[id] != i) continue;
    if (auto problems = validate(e); !problems.empty()) {
      throw ValidationError(id.short_form() + ": " + text::join(problems, "; "));
    }
    auto existing = get_locked(id);
    if (stamp) {
      std::visit(
          [&](auto& r) {
            using T = std::decay_t<decltype(r)>;
            if (existing) {
              const auto& old = std::get<T>(*existing);
              r.created_date = old.created_date;
              r.updated_date = old.updated_date;
              if (!(r == old)) r.updated_date = today;
            } else {
              r.created_date = today;
              r.updated_date = today;
            }
          },
          e);
    }
    if (existing && *existing == e) continue;

    std::size_t k = kind_index(id.kind());
    if (auto ceid = entity_ceid(e)) {
      auto it = ceid_index_[k].find(*ceid);
      if (it != ceid_index_[k].end() && it->second != id.serial()) {
        throw ConflictError(scheme_label(id.kind()) + " " + *ceid + " already belongs to " +
                            OpenAlexId(id.kind(), it->second).short_form() + ", not " + id.short_form());
      }
      auto [bit, inserted] = batch_ceids.emplace(std::pair{k, *ceid}, id.serial());
      if (!inserted && bit->second != id.serial()) {
        throw ConflictError(*ceid + " is claimed by both " + OpenAlexId(id.kind(), bit->second).short_form() +
                            " and " + id.short_form());
      }
    }
    alloc[k] = std::max(alloc[k], id.serial());
    out.push_back(std::move(e));
  }
  if (out.empty()) return 0;

  Json payload;
  payload["a"] = alloc;
  Json puts = Json::array();
  for (const auto& e : out) puts.push_back(put_json(e));
  payload["p"] = std::move(puts);
  append_log_locked(payload.dump(-1, ' ', false, Json::error_handler_t::replace));

  for (auto kind : kAllKinds) allocator_.advance_to(kind, alloc[kind_index(kind)]);
  ++seq_;
  for (const auto& e : out) apply_locked(e);
  return out.size();
}

void GraphStore::put_unchecked(Entity entity) {
  require_writable();
  std::unique_lock lock(mutex_);
  std::array<std::uint64_t, 5> alloc{};
  for (auto kind : kAllKinds) alloc[kind_index(kind)] = allocator_.last(kind);
  const OpenAlexId& id = entity_id(entity);
  alloc[kind_index(id.kind())] = std::max(alloc[kind_index(id.kind())], id.serial());
  Json payload{{"a", alloc}, {"p", Json::array({put_json(entity)})}};
  append_log_locked(payload.dump());
  ++seq_;
  apply_locked(entity);
}

std::optional<Entity> GraphStore::get(const OpenAlexId& id) const {
  std::shared_lock lock(mutex_);
  return get_locked(id);
}

std::optional<OpenAlexId> GraphStore::id_by_ceid(EntityKind kind, std::string_view ceid) const {
  IdScheme scheme = ceid_scheme(kind);
  std::string normalized;
  try {
    normalized = normalize_identifier(scheme, ceid);
  } catch (const InvalidIdentifier& e) {
    throw ValidationError(e.what());
  }
  if (normalized != ceid) {
    throw ValidationError("'" + std::string(ceid) + "' is not a normalized " + scheme_label(kind));
  }
  std::shared_lock lock(mutex_);
  const auto& index = ceid_index_[kind_index(kind)];
  auto it = index.find(normalized);
  if (it == index.end()) return std::nullopt;
  return OpenAlexId(kind, it->second);
}

std::optional<Entity> GraphStore::get_by_ceid(EntityKind kind, std::string_view ceid) const {
  auto id = id_by_ceid(kind, ceid);
  if (!id) return std::nullopt;
  return get(*id);
}

ListResult GraphStore::list(EntityKind kind, const FilterExpr& filter, const SortSpec& sort,
                            const Paging& paging) const {
  std::shared_lock lock(mutex_);
  return visit_kind(kind, [&]<typename T>(std::type_identity<T>) {
    return list_table(table<T>(), filter, sort, paging, epoch_, seq_);
  });
}

std::array<std::size_t, 5> GraphStore::counts() const {
  std::shared_lock lock(mutex_);
  std::array<std::size_t, 5> out{};
  std::apply(
      [&](const auto&... t) {
        std::size_t i = 0;
        ((out[i++] = t.size()), ...);
      },
      tables_);
  return out;
}

bool GraphStore::empty() const {
  auto c = counts();
  return std::all_of(c.begin(), c.end(), [](std::size_t n) { return n == 0; });
}

AggregateReport GraphStore::recompute_aggregates(bool dry_run) {
  if (!dry_run) require_writable();
  std::unique_lock<std::mutex> gate;
  if (!dry_run) gate = writer_gate();
  AggregateReport report;
  std::vector<Entity> changed;
  {
    std::shared_lock lock(mutex_);
    const auto& works = table<Work>();
    std::unordered_map<std::uint64_t, std::uint64_t> cited;
    std::unordered_map<std::uint64_t, std::set<std::uint64_t>> by_author, by_venue, by_institution, by_concept;
    for (const auto& [serial, row] : works) {
      const Work& w = row.record;
      std::set<std::uint64_t> refs;
      for (const auto& r : w.referenced_works) refs.insert(r.serial());
      for (auto r : refs) {
        if (works.contains(r)) ++cited[r];
      }
      for (const auto& a : w.authorships) {
        by_author[a.author.serial()].insert(serial);
        for (const auto& i : a.institutions) by_institution[i.serial()].insert(serial);
      }
      for (const auto& l : w.locations) {
        if (l.venue) by_venue[l.venue->serial()].insert(serial);
      }
      for (const auto& c : w.concepts) by_concept[c.id.serial()].insert(serial);
    }
    auto count_of = [](const auto& map, std::uint64_t serial) -> std::uint64_t {
      auto it = map.find(serial);
      return it == map.end() ? 0 : static_cast<std::uint64_t>(it->second.size());
    };
    auto cited_of = [&](std::uint64_t serial) -> std::uint64_t {
      auto it = cited.find(serial);
      return it == cited.end() ? 0 : it->second;
    };

    for (const auto& [serial, row] : works) {
      if (row.record.cited_by_count != cited_of(serial)) {
        Work w = row.record;
        w.cited_by_count = cited_of(serial);
        changed.emplace_back(std::move(w));
        ++report.changed[kind_index(EntityKind::kWork)];
      }
    }
    for (const auto& [serial, row] : table<Author>()) {
      std::uint64_t works_count = count_of(by_author, serial);
      std::uint64_t citations = 0;
      if (auto it = by_author.find(serial); it != by_author.end()) {
        for (auto w : it->second) citations += cited_of(w);
      }
      if (row.record.works_count != works_count || row.record.cited_by_count != citations) {
        Author a = row.record;
        a.works_count = works_count;
        a.cited_by_count = citations;
        changed.emplace_back(std::move(a));
        ++report.changed[kind_index(EntityKind::kAuthor)];
      }
    }
    auto recount = [&]<typename T>(const Table<T>& t, const auto& map) {
      for (const auto& [serial, row] : t) {
        std::uint64_t n = count_of(map, serial);
        if (row.record.works_count != n) {
          T r = row.record;
          r.works_count = n;
          changed.emplace_back(std::move(r));
          ++report.changed[kind_index(T::kKind)];
        }
      }
    };
    recount(table<Venue>(), by_venue);
    recount(table<Institution>(), by_institution);
    recount(table<Concept>(), by_concept);
  }
  if (dry_run) return report;
  for (std::size_t i = 0; i < changed.size(); i += kAggregateChunk) {
    auto last = changed.begin() + static_cast<std::ptrdiff_t>(std::min(changed.size(), i + kAggregateChunk));
    commit_impl(std::vector<Entity>(std::make_move_iterator(changed.begin() + static_cast<std::ptrdiff_t>(i)),
                                    std::make_move_iterator(last)),
                false);
  }
  return report;
}

std::vector<Violation> GraphStore::integrity_check() const {
  std::shared_lock lock(mutex_);
  std::vector<Violation> out;
  auto exists = [&](const OpenAlexId& id) {
    return visit_kind(id.kind(), [&]<typename T>(std::type_identity<T>) { return table<T>().contains(id.serial()); });
  };
  auto dangling = [&](const OpenAlexId& from, std::string_view what, const OpenAlexId& to) {
    out.push_back({from.short_form(), "dangling-reference",
                   from.short_form() + " references missing " + std::string(what) + " " + to.short_form()});
  };

  std::apply(
      [&](const auto&... t) {
        auto check = [&](const auto& table) {
          for (const auto& [serial, row] : table) {
            const auto& r = row.record;
            using T = std::decay_t<decltype(r)>;
            for (const auto& p : validate(r)) out.push_back({r.id.short_form(), "record-invariant", p});
            if (serial > allocator_.last(T::kKind)) {
              out.push_back({r.id.short_form(), "allocator", "serial above the allocator counter"});
            }
            if constexpr (std::same_as<T, Work>) {
              for (const auto& a : r.authorships) {
                if (!exists(a.author)) dangling(r.id, "author", a.author);
                for (const auto& i : a.institutions) {
                  if (!exists(i)) dangling(r.id, "institution", i);
                }
              }
              for (const auto& l : r.locations) {
                if (l.venue && !exists(*l.venue)) dangling(r.id, "venue", *l.venue);
              }
              for (const auto& c : r.concepts) {
                if (!exists(c.id)) dangling(r.id, "concept", c.id);
              }
              for (const auto& ref : r.referenced_works) {
                if (!exists(ref)) dangling(r.id, "work", ref);
              }
            } else if constexpr (std::same_as<T, Concept>) {
              for (const auto& p : r.parents) {
                if (!exists(p)) dangling(r.id, "parent concept", p);
              }
            }
          }
        };
        (check(t), ...);
      },
      tables_);

  // CEID bijection: one record per CEID, and the index agrees with the records.
  for (auto kind : kAllKinds) {
    std::map<std::string, std::vector<std::uint64_t>> owners;
    visit_kind(kind, [&]<typename T>(std::type_identity<T>) {
      for (const auto& [serial, row] : table<T>()) {
        if (auto ceid = entity_ceid(Entity(row.record))) owners[*ceid].push_back(serial);
      }
    });
    const auto& index = ceid_index_[kind_index(kind)];
    std::string label(scheme_label(kind));
    for (const auto& [ceid, serials] : owners) {
      if (serials.size() > 1) {
        std::vector<std::string> ids;
        for (auto s : serials) ids.push_back(OpenAlexId(kind, s).short_form());
        out.push_back({ids.front(), "ceid-bijection", label + " " + ceid + " is carried by " + text::join(ids, ", ")});
        continue;
      }
      auto it = index.find(ceid);
      if (it == index.end() || it->second != serials.front()) {
        out.push_back({OpenAlexId(kind, serials.front()).short_form(), "ceid-bijection",
                       label + " " + ceid + " is not indexed to its record"});
      }
    }
    for (const auto& [ceid, serial] : index) {
      if (!owners.contains(ceid)) {
        out.push_back({OpenAlexId(kind, serial).short_form(), "ceid-bijection",
                       label + " index entry " + ceid + " has no record"});
      }
    }
  }
  return out;
}

std::optional<Date> GraphStore::last_dump_date() const {
  std::shared_lock lock(mutex_);
  return last_dump_date_;
}

void GraphStore::compact() {
  require_writable();
  std::unique_lock lock(mutex_);
  write_snapshot_locked();
}

std::vector<OpenAlexId> GraphStore::works_by_fingerprint(const std::string& fingerprint) const {
  std::shared_lock lock(mutex_);
  std::vector<OpenAlexId> out;
  if (auto it = fingerprint_index_.find(fingerprint); it != fingerprint_index_.end()) {
    for (auto s : it->second) out.emplace_back(EntityKind::kWork, s);
  }
  return out;
}

std::vector<OpenAlexId> GraphStore::works_citing_doi(const std::string& doi) const {
  std::shared_lock lock(mutex_);
  std::vector<OpenAlexId> out;
  if (auto it = unresolved_index_.find(doi); it != unresolved_index_.end()) {
    for (auto s : it->second) out.emplace_back(EntityKind::kWork, s);
  }
  return out;
}

std::vector<OpenAlexId> GraphStore::authors_by_family(const std::string& family) const {
  std::shared_lock lock(mutex_);
  std::vector<OpenAlexId> out;
  if (auto it = family_index_.find(family); it != family_index_.end()) {
    for (auto s : it->second) out.emplace_back(EntityKind::kAuthor, s);
  }
  return out;
}

std::vector<OpenAlexId> GraphStore::works_by_author(const OpenAlexId& author) const {
  std::shared_lock lock(mutex_);
  std::vector<OpenAlexId> out;
  if (auto it = author_works_.find(author.serial()); it != author_works_.end()) {
    for (auto s : it->second) out.emplace_back(EntityKind::kWork, s);
  }
  return out;
}

std::optional<OpenAlexId> GraphStore::venue_by_name(std::string_view display_name) const {
  std::string key = text::alnum_normalize(display_name);
  std::shared_lock lock(mutex_);
  auto it = venue_name_index_.find(key);
  if (it == venue_name_index_.end() || it->second.empty()) return std::nullopt;
  return OpenAlexId(EntityKind::kVenue, *it->second.begin());
}

}  // namespace openindex
