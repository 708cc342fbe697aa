#include "openindex/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "openindex/text.hpp"

namespace openindex {

namespace {

namespace pt = boost::property_tree;

using Setter = std::function<void(Settings&, const std::string&)>;

double to_double(const std::string& v) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) throw std::invalid_argument("not a number");
  return out;
}

long long to_int(const std::string& v) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) throw std::invalid_argument("not an integer");
  return out;
}

std::size_t to_size(const std::string& v) {
  long long n = to_int(v);
  if (n < 0) throw std::invalid_argument("must not be negative");
  return static_cast<std::size_t>(n);
}

double to_unit(const std::string& v) {
  double d = to_double(v);
  if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument("must lie in [0,1]");
  return d;
}

std::optional<std::filesystem::path> to_path(const std::string& v) {
  if (v.empty()) return std::nullopt;
  return std::filesystem::path(v);
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"data_dir", [](Settings& s, const std::string& v) { s.data_dir = v; }},
      {"bind", [](Settings& s, const std::string& v) { s.bind = v; }},
      {"port",
       [](Settings& s, const std::string& v) {
         long long p = to_int(v);
         if (p < 0 || p > 65535) throw std::invalid_argument("port outside 0..65535");
         s.port = static_cast<int>(p);
       }},
      {"base_url", [](Settings& s, const std::string& v) { s.base_url = v; }},
      {"per_page_default", [](Settings& s, const std::string& v) { s.per_page_default = to_size(v); }},
      {"per_page_max", [](Settings& s, const std::string& v) { s.per_page_max = to_size(v); }},
      {"max_connections", [](Settings& s, const std::string& v) { s.max_connections = to_size(v); }},
      {"gui_dir", [](Settings& s, const std::string& v) { s.gui_dir = to_path(v); }},
      {"theta", [](Settings& s, const std::string& v) { s.theta = to_unit(v); }},
      {"tau", [](Settings& s, const std::string& v) { s.tau = to_unit(v); }},
      {"sigma", [](Settings& s, const std::string& v) { s.tagger.sigma = to_unit(v); }},
      {"decay", [](Settings& s, const std::string& v) { s.tagger.decay = to_unit(v); }},
      {"title_weight",
       [](Settings& s, const std::string& v) {
         s.tagger.title_weight = to_double(v);
         if (!(s.tagger.title_weight > 0.0)) throw std::invalid_argument("must be positive");
       }},
      {"author_weights.name_exact", [](Settings& s, const std::string& v) { s.author_weights.name_exact = to_double(v); }},
      {"author_weights.coauthor_step",
       [](Settings& s, const std::string& v) { s.author_weights.coauthor_step = to_double(v); }},
      {"author_weights.coauthor_cap",
       [](Settings& s, const std::string& v) { s.author_weights.coauthor_cap = to_double(v); }},
      {"author_weights.venue", [](Settings& s, const std::string& v) { s.author_weights.venue = to_double(v); }},
      {"author_weights.citation_step",
       [](Settings& s, const std::string& v) { s.author_weights.citation_step = to_double(v); }},
      {"author_weights.citation_cap",
       [](Settings& s, const std::string& v) { s.author_weights.citation_cap = to_double(v); }},
      {"issn_table", [](Settings& s, const std::string& v) { s.issn_table = to_path(v); }},
      {"concept_tree", [](Settings& s, const std::string& v) { s.concept_tree = to_path(v); }},
      {"institutions", [](Settings& s, const std::string& v) { s.institutions = to_path(v); }},
      {"sync",
       [](Settings& s, const std::string& v) {
         if (v == "commit") {
           s.sync = SyncMode::kEveryCommit;
         } else if (v == "close") {
           s.sync = SyncMode::kOnClose;
         } else {
           throw std::invalid_argument("expected commit or close");
         }
       }},
  };
  return table;
}

void apply(Settings& s, const std::string& key, const std::string& value, const std::string& origin) {
  auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError(origin + ": unknown setting '" + key + "'");
  try {
    it->second(s, value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": bad value '" + value + "' for " + key + " (" + e.what() + ")");
  }
}

void check(const Settings& s) {
  if (s.per_page_default < 1 || s.per_page_max < s.per_page_default) {
    throw ConfigError("per_page limits need per_page_max >= per_page_default >= 1");
  }
  if (s.max_connections < 1) throw ConfigError("max_connections must be at least 1");
}

// Drops a trailing `# comment` that is not inside quotes.
std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string unquote(std::string v) {
  v = std::string(text::trim(v));
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
    v = v.substr(1, v.size() - 2);
  }
  return v;
}

void flatten(const pt::ptree& tree, const std::string& prefix, std::map<std::string, std::string>& out) {
  for (const auto& [key, child] : tree) {
    std::string full = prefix.empty() ? key : prefix + "." + key;
    if (child.empty()) {
      out[full] = unquote(child.data());
    } else {
      flatten(child, full, out);
    }
  }
}

}  // namespace

std::string Settings::effective_base_url() const {
  std::string url = base_url.empty() ? "http://" + bind + ":" + std::to_string(port) : base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  return url;
}

std::vector<std::string> settings_keys() {
  std::vector<std::string> out;
  for (const auto& [k, unused] : setters()) out.push_back(k);
  return out;
}

std::string env_name(const std::string& key) {
  std::string out = "OPENINDEX_";
  for (char c : key) out.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  // The INI reader only knows ';' comments.
  std::ostringstream cleaned;
  std::string line;
  while (std::getline(in, line)) cleaned << strip_comment(line) << '\n';
  pt::ptree tree;
  std::istringstream src(cleaned.str());
  try {
    pt::read_ini(src, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(path.string() + ": " + e.message() + " at line " + std::to_string(e.line()));
  }
  std::map<std::string, std::string> out;
  flatten(tree, "", out);
  return out;
}

Settings resolve_settings(const std::optional<std::filesystem::path>& config_file,
                          const std::map<std::string, std::string>& flags, const EnvLookup& env) {
  Settings s;
  if (config_file) {
    for (const auto& [k, v] : read_config_file(*config_file)) apply(s, k, v, config_file->string());
  }
  for (const auto& key : settings_keys()) {
    std::string name = env_name(key);
    if (auto v = env(name)) apply(s, key, *v, "environment " + name);
  }
  for (const auto& [k, v] : flags) apply(s, k, v, "flag --" + k);
  check(s);
  return s;
}

}  // namespace openindex
