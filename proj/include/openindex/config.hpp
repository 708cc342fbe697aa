#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "openindex/concepts.hpp"
#include "openindex/disambiguation.hpp"
#include "openindex/errors.hpp"
#include "openindex/store.hpp"

namespace openindex {

// Every tunable the CLI exposes. Keys in the config file, OPENINDEX_* env
// variables and --set flags use the names listed by settings_keys().
struct Settings {
  std::filesystem::path data_dir = "./data";
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::string base_url;  // empty: http://{bind}:{port}
  std::size_t per_page_default = 25;
  std::size_t per_page_max = 200;
  std::size_t max_connections = 64;
  std::optional<std::filesystem::path> gui_dir;

  double theta = 0.5;
  double tau = 0.7;
  TaggerOptions tagger;  // sigma, decay, title_weight
  AuthorWeights author_weights;

  std::optional<std::filesystem::path> issn_table;
  std::optional<std::filesystem::path> concept_tree;
  std::optional<std::filesystem::path> institutions;
  SyncMode sync = SyncMode::kEveryCommit;

  std::string effective_base_url() const;
};

std::vector<std::string> settings_keys();

// "data_dir" -> "OPENINDEX_DATA_DIR", "author_weights.venue" -> "OPENINDEX_AUTHOR_WEIGHTS_VENUE".
std::string env_name(const std::string& key);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

// Layers built-in defaults < config file < environment < flags. The file is
// TOML-style `key = value` lines with optional [section] headers (keys become
// section.key), `#` comments and optionally quoted values. Throws ConfigError
// naming the key and where the bad value came from.
Settings resolve_settings(const std::optional<std::filesystem::path>& config_file,
                          const std::map<std::string, std::string>& flags, const EnvLookup& env = process_env());

// Parses a config file into key -> raw value.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

}  // namespace openindex
