#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include <openssl/evp.h>
#include <zlib.h>

#include "openindex/codec.hpp"
#include "openindex/store.hpp"

namespace openindex {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kPartCap = 10'000;
constexpr std::size_t kChunk = 1 << 16;

std::string part_name(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "part_%03zu.jsonl.gz", n);
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DumpError("cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.close();
  if (!out) throw DumpError("cannot write " + path.string());
}

// Relative dump paths must stay under data/.
bool safe_relative(const std::string& rel) {
  fs::path p(rel);
  if (p.is_absolute() || rel.rfind("data/", 0) != 0) return false;
  return std::none_of(p.begin(), p.end(), [](const fs::path& part) { return part == ".."; });
}

}  // namespace

std::string gzip_compress(std::string_view data) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw DumpError("deflateInit2 failed");
  }
  std::string out;
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  char buf[kChunk];
  int rc = Z_OK;
  do {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof buf;
    rc = deflate(&zs, Z_FINISH);
    out.append(buf, sizeof buf - zs.avail_out);
  } while (rc == Z_OK || rc == Z_BUF_ERROR);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw DumpError("gzip compression failed");
  return out;
}

std::string gzip_decompress(std::string_view data) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 32) != Z_OK) throw DumpError("inflateInit2 failed");
  std::string out;
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  char buf[kChunk];
  int rc = Z_OK;
  while (rc == Z_OK) {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof buf;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc == Z_BUF_ERROR && zs.avail_in == 0) break;
    out.append(buf, sizeof buf - zs.avail_out);
  }
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) throw DumpError("corrupt gzip stream");
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw DumpError("SHA-256 failed");
  }
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kDigits[digest[i] >> 4]);
    out.push_back(kDigits[digest[i] & 0xF]);
  }
  return out;
}

DumpManifest GraphStore::export_dump(const fs::path& out_dir) {
  std::error_code ec;
  if (fs::exists(out_dir, ec) && !fs::is_empty(out_dir, ec)) {
    throw DumpError("output directory " + out_dir.string() + " is not empty");
  }

  // Point-in-time copy: serialized lines grouped by updated_date, ascending serial.
  std::array<std::map<Date, std::vector<std::string>>, 5> lines;
  {
    std::shared_lock lock(mutex_);
    std::apply(
        [&](const auto&... t) {
          auto take = [&](const auto& table) {
            for (const auto& [serial, row] : table) {
              using T = std::decay_t<decltype(row.record)>;
              lines[kind_index(T::kKind)][row.record.updated_date].push_back(to_line(Entity(row.record)));
            }
          };
          (take(t), ...);
        },
        tables_);
  }

  DumpManifest manifest;
  manifest.created_date = options_.clock();
  bool created_dir = !fs::exists(out_dir, ec);
  try {
    fs::create_directories(out_dir);
    for (auto kind : kAllKinds) {
      std::size_t k = kind_index(kind);
      for (const auto& [date, records] : lines[k]) {
        std::string rel_dir = "data/" + std::string(kind_path(kind)) + "/updated_date=" + date.iso();
        fs::create_directories(out_dir / rel_dir);
        for (std::size_t begin = 0, part = 0; begin < records.size(); begin += kPartCap, ++part) {
          std::size_t end = std::min(records.size(), begin + kPartCap);
          std::string body;
          for (std::size_t i = begin; i < end; ++i) {
            body += records[i];
            body += '\n';
          }
          std::string gz = gzip_compress(body);
          std::string rel = rel_dir + "/" + part_name(part);
          spit(out_dir / rel, gz);
          manifest.files[k].push_back({rel, end - begin, sha256_hex(gz)});
          manifest.totals[k] += end - begin;
        }
      }
    }

    Json kinds = Json::object();
    for (auto kind : kAllKinds) {
      std::size_t k = kind_index(kind);
      Json files = Json::array();
      for (const auto& f : manifest.files[k]) files.push_back({{"path", f.path}, {"count", f.count}, {"sha256", f.sha256}});
      kinds[std::string(kind_path(kind))] = {{"total", manifest.totals[k]}, {"files", std::move(files)}};
    }
    Json doc{{"created_date", manifest.created_date.iso()}, {"kinds", std::move(kinds)}};
    spit(out_dir / "manifest.json", doc.dump(2) + "\n");
  } catch (const std::exception& e) {
    if (created_dir) {
      fs::remove_all(out_dir, ec);
    } else {
      fs::remove_all(out_dir / "data", ec);
      fs::remove(out_dir / "manifest.json", ec);
    }
    throw DumpError(std::string("dump export failed: ") + e.what());
  }

  if (!options_.read_only) {
    std::unique_lock lock(mutex_);
    Json payload{{"a", Json::parse(alloc_json_locked())}, {"p", Json::array()}, {"m", {{"dump", manifest.created_date.iso()}}}};
    append_log_locked(payload.dump());
    last_dump_date_ = manifest.created_date;
  }
  return manifest;
}

ImportReport GraphStore::import_dump(const fs::path& in_dir) {
  require_writable();
  auto gate = writer_gate();
  if (!empty()) throw DumpError("import requires an empty store");

  Json doc;
  try {
    doc = Json::parse(slurp(in_dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DumpError("manifest.json: " + std::string(e.what()));
  }

  ImportReport report;
  std::vector<Entity> records;
  std::unordered_map<OpenAlexId, std::string> origin;
  try {
    const auto& kinds = doc.at("kinds");
    for (auto kind : kAllKinds) {
      std::string name(kind_path(kind));
      if (!kinds.contains(name)) continue;
      std::size_t k = kind_index(kind);
      for (const auto& f : kinds.at(name).at("files")) {
        std::string rel = f.at("path").get<std::string>();
        if (!safe_relative(rel)) throw DumpError("manifest path '" + rel + "' escapes the dump directory");
        std::string gz = slurp(in_dir / rel);
        if (sha256_hex(gz) != f.at("sha256").get<std::string>()) {
          throw DumpError("digest mismatch for " + rel);
        }
        std::string body = gzip_decompress(gz);
        std::size_t count = 0;
        std::size_t pos = 0;
        while (pos < body.size()) {
          std::size_t nl = body.find('\n', pos);
          if (nl == std::string::npos) nl = body.size();
          std::string_view line(body.data() + pos, nl - pos);
          pos = nl + 1;
          if (line.empty()) continue;
          Entity e = [&] {
            try {
              return entity_from_json(kind, Json::parse(line));
            } catch (const std::exception& ex) {
              throw DumpError(rel + " line " + std::to_string(count + 1) + ": " + ex.what());
            }
          }();
          const OpenAlexId& id = entity_id(e);
          if (auto [it, inserted] = origin.emplace(id, rel); !inserted) {
            throw DumpError("duplicate id " + id.short_form() + " in " + it->second + " and " + rel);
          }
          records.push_back(std::move(e));
          ++count;
        }
        if (count != f.at("count").get<std::size_t>()) {
          throw DumpError(rel + " holds " + std::to_string(count) + " records, manifest says " +
                          std::to_string(f.at("count").get<std::size_t>()));
        }
        report.imported[k] += count;
        ++report.files;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DumpError("manifest.json: " + std::string(e.what()));
  }

  std::unique_lock lock(mutex_);
  ++seq_;
  for (const auto& e : records) apply_locked(e);
  write_snapshot_locked();
  return report;
}

}  // namespace openindex
