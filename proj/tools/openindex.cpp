// openindex: operator entry point for the index engine.
//
// Exit codes
//   0  success
//   1  usage or configuration error
//   2  input file unreadable
//   3  ingest finished but rejected at least one record
//   4  store busy (another process holds the lock)
//   5  harvest transport/protocol failure (last good cursor printed)
//   6  validate found violations
//   7  dump or load failed
//   8  any other error

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <pthread.h>

#include <CLI11.hpp>

#include "openindex/api.hpp"
#include "openindex/config.hpp"
#include "openindex/harvest.hpp"
#include "openindex/ingestion.hpp"
#include "openindex/pipeline.hpp"
#include "openindex/store.hpp"

namespace fs = std::filesystem;
using namespace openindex;

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kUnreadable = 2,
  kRejected = 3,
  kBusy = 4,
  kTransport = 5,
  kViolations = 6,
  kDumpFailed = 7,
  kOther = 8,
};

struct InputError : Error {
  using Error::Error;
};

struct Globals {
  std::optional<fs::path> config;
  std::optional<fs::path> data_dir;
  std::vector<std::string> sets;
  bool json = false;
};

Settings load_settings(const Globals& g, std::map<std::string, std::string> flags) {
  for (const auto& kv : g.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
    flags[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (g.data_dir) flags["data_dir"] = g.data_dir->string();
  std::optional<fs::path> file = g.config;
  if (!file && fs::exists("openindex.toml")) file = "openindex.toml";
  return resolve_settings(file, flags);
}

// Prints a summary either as one JSON line or as `key: value` lines.
void emit(const Globals& g, const Json& summary) {
  if (g.json) {
    std::cout << summary.dump() << '\n';
    return;
  }
  for (const auto& [key, value] : summary.items()) {
    std::cout << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  }
}

std::unique_ptr<GraphStore> open_store(const Settings& s, bool read_only) {
  StoreOptions options;
  options.read_only = read_only;
  options.sync = s.sync;
  return GraphStore::open(s.data_dir, options);
}

PipelineConfig pipeline_config(const Settings& s) {
  PipelineConfig config;
  config.theta = s.theta;
  config.tau = s.tau;
  config.author_weights = s.author_weights;
  config.tagger = s.tagger;
  if (s.issn_table) config.issn_table = IssnLinkingTable::from_csv_file(*s.issn_table);
  return config;
}

// Loads configured reference data, then builds the pipeline over it.
std::unique_ptr<Ingestor> prepare_ingestor(GraphStore& store, const Settings& s) {
  if (s.concept_tree) seed_concepts(store, ConceptTree::load_file(*s.concept_tree));
  if (s.institutions) seed_institutions(store, *s.institutions);
  return std::make_unique<Ingestor>(store, pipeline_config(s));
}

struct Tally {
  std::size_t read = 0;
  std::array<std::size_t, 4> outcomes{};

  void add(const IngestReport& r) {
    ++read;
    ++outcomes[static_cast<std::size_t>(r.outcome)];
  }
  std::size_t rejected() const { return outcomes[static_cast<std::size_t>(IngestOutcome::kRejected)]; }
  Json json() const {
    Json j;
    j["read"] = read;
    for (auto o : {IngestOutcome::kCreated, IngestOutcome::kUpdated, IngestOutcome::kMerged, IngestOutcome::kRejected}) {
      j[std::string(to_string(o))] = outcomes[static_cast<std::size_t>(o)];
    }
    return j;
  }
};

IngestReport rejected_report(std::string id, const std::string& why) {
  IngestReport r;
  r.source_record_id = std::move(id);
  r.outcome = IngestOutcome::kRejected;
  r.warnings.push_back(why);
  return r;
}

// ---- ingest ----

int cmd_ingest(const Globals& g, const std::string& source_name, const fs::path& input,
               const std::optional<fs::path>& report_path) {
  Settings s = load_settings(g, {});
  std::ifstream in(input, std::ios::binary);
  if (!in) throw InputError("cannot read " + input.string());

  std::ofstream report;
  if (report_path) {
    report.open(*report_path, std::ios::trunc);
    if (!report) throw InputError("cannot write report " + report_path->string());
  }

  auto store = open_store(s, false);
  auto ingestor = prepare_ingestor(*store, s);
  Date today = store->today();
  Tally tally;
  auto record = [&](const IngestReport& r) {
    tally.add(r);
    if (report) report << report_json(r).dump() << '\n';
  };

  if (source_name == "pubmed") {
    std::stringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw InputError("cannot read " + input.string());
    std::size_t n = 0;
    for (const auto& article : split_pubmed_articles(buffer.str())) {
      ++n;
      try {
        record(ingestor->ingest(parse_pubmed(article, today)));
      } catch (const RecordRejected& e) {
        record(rejected_report("article:" + std::to_string(n), e.what()));
      }
    }
  } else {
    SourceClass source = source_name == "repository" ? SourceClass::kRepository : SourceClass::kCrossref;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        record(ingestor->ingest(parse_crossref_line(line, source, today)));
      } catch (const RecordRejected& e) {
        record(rejected_report("line:" + std::to_string(n), e.what()));
      }
    }
    if (in.bad()) throw InputError("read error in " + input.string());
  }
  store->recompute_aggregates();

  emit(g, tally.json());
  return tally.rejected() > 0 ? kRejected : kOk;
}

// ---- harvest ----

int cmd_harvest(const Globals& g, const std::string& endpoint, std::optional<std::string> cursor, std::size_t rows) {
  Settings s = load_settings(g, {});
  auto store = open_store(s, false);
  auto ingestor = prepare_ingestor(*store, s);
  HarvestClient client(endpoint);
  Date today = store->today();
  Tally tally;
  std::string last_good = cursor.value_or("*");

  auto finish = [&](int code, const std::optional<std::string>& error) {
    store->recompute_aggregates();
    Json summary = tally.json();
    summary["cursor"] = last_good;
    if (error) summary["error"] = *error;
    emit(g, summary);
    return code;
  };

  try {
    while (true) {
      HarvestPage page = client.fetch(last_good, rows);
      for (const auto& rec : page.records) {
        try {
          tally.add(ingestor->ingest(parse_crossref(rec, SourceClass::kCrossref, today)));
        } catch (const RecordRejected& e) {
          tally.add(rejected_report("page:" + last_good, e.what()));
        }
      }
      if (!page.next_cursor) break;
      last_good = *page.next_cursor;
    }
  } catch (const TransportError& e) {
    return finish(kTransport, e.what());
  } catch (const ProtocolError& e) {
    return finish(kTransport, e.what());
  }
  return finish(tally.rejected() > 0 ? kRejected : kOk, std::nullopt);
}

// ---- serve ----

int cmd_serve(const Globals& g, const std::map<std::string, std::string>& flags, bool with_gui) {
  Settings s = load_settings(g, flags);
  std::optional<fs::path> gui;
  if (with_gui) {
    gui = s.gui_dir.value_or("gui");
    if (!fs::is_directory(*gui)) throw ConfigError("gui_dir " + gui->string() + " is not a directory");
  }

  // Signals are consumed by a dedicated thread; block them before any other thread starts.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  auto store = open_store(s, true);
  ApiConfig api;
  api.base_url = s.effective_base_url();
  api.per_page_default = s.per_page_default;
  api.per_page_max = s.per_page_max;
  IssnLinkingTable issn = s.issn_table ? IssnLinkingTable::from_csv_file(*s.issn_table) : IssnLinkingTable{};
  ApiService service(*store, api, std::move(issn));
  ApiServer server(service, ServerOptions{s.bind, s.port, s.max_connections, gui});
  int port = server.bind();

  Json summary;
  summary["listening"] = "http://" + s.bind + ":" + std::to_string(port);
  summary["base_url"] = api.base_url;
  emit(g, summary);
  std::cout.flush();

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.listen();
  // listen() can also return on its own; wake the waiter so it can be joined.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return kOk;
}

// ---- dump / load ----

Json per_kind(const std::array<std::size_t, 5>& values) {
  Json j = Json::object();
  for (auto kind : kAllKinds) j[std::string(kind_path(kind))] = values[kind_index(kind)];
  return j;
}

int cmd_dump(const Globals& g, const fs::path& out) {
  Settings s = load_settings(g, {});
  auto store = open_store(s, false);
  DumpManifest m = store->export_dump(out);
  Json summary;
  summary["out"] = out.string();
  summary["created_date"] = m.created_date.iso();
  summary["records"] = per_kind(m.totals);
  emit(g, summary);
  return kOk;
}

int cmd_load(const Globals& g, const fs::path& in) {
  Settings s = load_settings(g, {});
  auto store = open_store(s, false);
  ImportReport r = store->import_dump(in);
  Json summary;
  summary["in"] = in.string();
  summary["files"] = r.files;
  summary["records"] = per_kind(r.imported);
  emit(g, summary);
  return kOk;
}

// ---- stats / validate ----

int cmd_stats(const Globals& g) {
  Settings s = load_settings(g, {});
  auto store = open_store(s, true);
  auto counts = store->counts();

  std::array<std::size_t, 5> with_ceid{};
  auto tally_ceids = [&]<EntityRecord T>(std::type_identity<T>) {
    store->for_each<T>([&](const T& r) {
      if (entity_ceid(Entity(r))) ++with_ceid[kind_index(r.id.kind())];
    });
  };
  tally_ceids(std::type_identity<Work>{});
  tally_ceids(std::type_identity<Author>{});
  tally_ceids(std::type_identity<Venue>{});
  tally_ceids(std::type_identity<Institution>{});
  tally_ceids(std::type_identity<Concept>{});

  Json coverage = Json::object();
  for (auto kind : kAllKinds) {
    std::size_t i = kind_index(kind);
    coverage[std::string(kind_path(kind))] =
        counts[i] == 0 ? 0.0 : static_cast<double>(with_ceid[i]) / static_cast<double>(counts[i]);
  }

  CoverageReport concepts = coverage_report(store->all<Work>());
  Json by_type = Json::object();
  for (const auto& [type, tw] : concepts.per_type) {
    by_type[std::string(to_string(type))] = {{"tagged", tw.first}, {"works", tw.second}};
  }

  Json summary;
  summary["counts"] = per_kind(counts);
  summary["ceid_coverage"] = coverage;
  summary["concept_coverage"] = {{"works", concepts.works},
                                 {"tagged", concepts.tagged},
                                 {"fraction", concepts.fraction},
                                 {"per_type", by_type}};
  auto dump = store->last_dump_date();
  summary["last_dump"] = dump ? Json(dump->iso()) : Json(nullptr);
  emit(g, summary);
  return kOk;
}

int cmd_validate(const Globals& g) {
  Settings s = load_settings(g, {});
  auto store = open_store(s, true);
  std::vector<Violation> violations = store->integrity_check();
  AggregateReport drift = store->recompute_aggregates(true);
  for (auto kind : kAllKinds) {
    if (std::size_t n = drift.changed[kind_index(kind)]) {
      violations.push_back({"store", "aggregates", std::to_string(n) + " " + std::string(kind_path(kind)) +
                                                       " have stale counts"});
    }
  }

  Json list = Json::array();
  for (const auto& v : violations) list.push_back({{"entity", v.entity}, {"rule", v.rule}, {"message", v.message}});
  if (!g.json) {
    for (const auto& v : violations) std::cerr << v.entity << " [" << v.rule << "] " << v.message << '\n';
  }
  Json summary;
  summary["violations"] = violations.size();
  if (g.json) summary["details"] = list;
  emit(g, summary);
  return violations.empty() ? kOk : kViolations;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"openindex: scholarly knowledge graph engine"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Config file (default ./openindex.toml when present)");
  app.add_option("--data-dir", g.data_dir, "Store directory");
  app.add_option("--set", g.sets, "Override a config key, key=value (repeatable)");
  app.add_flag("--json", g.json, "Print one JSON summary line");

  std::string source;
  fs::path input;
  std::optional<fs::path> report;
  auto* ingest = app.add_subcommand("ingest", "Ingest a Crossref/repository JSON Lines or PubMed XML file");
  ingest->add_option("--source", source, "crossref|pubmed|repository")
      ->required()
      ->check(CLI::IsMember({"crossref", "pubmed", "repository"}));
  ingest->add_option("--input", input, "Input file")->required();
  ingest->add_option("--report", report, "Write one JSON line per record here");

  std::string endpoint;
  std::optional<std::string> cursor;
  std::size_t rows = 100;
  auto* harvest = app.add_subcommand("harvest", "Pull works from a cursored listing endpoint");
  harvest->add_option("--endpoint", endpoint, "Base URL (http://host:port[/prefix])")->required();
  harvest->add_option("--cursor", cursor, "Resume from this cursor");
  harvest->add_option("--rows", rows, "Page size")->check(CLI::PositiveNumber);

  std::optional<int> port;
  std::optional<std::string> bind;
  std::optional<std::size_t> max_connections;
  bool with_gui = false;
  auto* serve = app.add_subcommand("serve", "Serve the REST API");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--bind", bind, "Bind address");
  serve->add_option("--max-connections", max_connections, "Concurrent connection cap");
  serve->add_flag("--with-gui", with_gui, "Also serve the GUI from gui_dir under /gui");

  fs::path out_dir, in_dir;
  auto* dump = app.add_subcommand("dump", "Write a data dump");
  dump->add_option("--out", out_dir, "Output directory (must not exist)")->required();
  auto* load = app.add_subcommand("load", "Load a data dump into an empty store");
  load->add_option("--in", in_dir, "Dump directory")->required();

  auto* stats = app.add_subcommand("stats", "Counts, identifier coverage and concept coverage");
  auto* validate = app.add_subcommand("validate", "Check store integrity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*ingest) return cmd_ingest(g, source, input, report);
    if (*harvest) return cmd_harvest(g, endpoint, cursor, rows);
    if (*serve) {
      std::map<std::string, std::string> flags;
      if (port) flags["port"] = std::to_string(*port);
      if (bind) flags["bind"] = *bind;
      if (max_connections) flags["max_connections"] = std::to_string(*max_connections);
      return cmd_serve(g, flags, with_gui);
    }
    if (*dump) return cmd_dump(g, out_dir);
    if (*load) return cmd_load(g, in_dir);
    if (*stats) return cmd_stats(g);
    if (*validate) return cmd_validate(g);
  } catch (const ConfigError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kUsage;
  } catch (const InputError& e) {
    std::cerr << "input: " << e.what() << '\n';
    return kUnreadable;
  } catch (const StoreBusyError& e) {
    std::cerr << "busy: " << e.what() << '\n';
    return kBusy;
  } catch (const DumpError& e) {
    std::cerr << "dump: " << e.what() << '\n';
    return kDumpFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kUsage;
}
