#include "openindex/api.hpp"

#include <algorithm>
#include <charconv>
#include <thread>

#include <httplib.h>

namespace openindex {

namespace {

ApiResponse json_response(int status, const Json& body) {
  return {status, body.dump(-1, ' ', false, Json::error_handler_t::replace)};
}

ApiResponse error_response(int status, std::string_view error, const std::string& message) {
  Json body;
  body["error"] = error;
  body["message"] = message;
  return json_response(status, body);
}

std::optional<std::string> param(const QueryParams& query, const std::string& name) {
  auto it = query.find(name);
  if (it == query.end()) return std::nullopt;
  return it->second;
}

std::size_t positive_param(const QueryParams& query, const std::string& name, std::size_t fallback) {
  auto raw = param(query, name);
  if (!raw) return fallback;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(raw->data(), raw->data() + raw->size(), value);
  if (raw->empty() || ec != std::errc{} || ptr != raw->data() + raw->size() || value == 0) {
    throw QueryError(*raw, name + " must be a positive integer, got '" + *raw + "'");
  }
  return value;
}

struct Namespace {
  std::string_view prefix;
  EntityKind kind;
  IdScheme scheme;
};

constexpr Namespace kNamespaces[] = {
    {"doi", EntityKind::kWork, IdScheme::kDoi},
    {"orcid", EntityKind::kAuthor, IdScheme::kOrcid},
    {"issn", EntityKind::kVenue, IdScheme::kIssn},
    {"ror", EntityKind::kInstitution, IdScheme::kRor},
    {"wikidata", EntityKind::kConcept, IdScheme::kWikidata},
};

}  // namespace

ApiService::ApiService(const GraphStore& store, ApiConfig config, IssnLinkingTable issn_table)
    : store_(store), config_(std::move(config)), issn_table_(std::move(issn_table)) {
  while (!config_.base_url.empty() && config_.base_url.back() == '/') config_.base_url.pop_back();
}

Json ApiService::render(const Entity& entity) const {
  Json j = to_json(entity);
  const OpenAlexId& id = entity_id(entity);
  j["id"] = config_.base_url + "/" + std::string(kind_path(id.kind())) + "/" + id.short_form();
  return j;
}

ApiResponse ApiService::handle(std::string_view path, const QueryParams& query) const {
  while (path.size() > 1 && path.back() == '/') path.remove_suffix(1);
  if (path.empty() || path == "/") return root();
  if (path.front() != '/') return error_response(404, "not_found", "no such endpoint");
  path.remove_prefix(1);
  auto slash = path.find('/');
  std::string_view collection = path.substr(0, slash);
  auto kind = kind_from_path(collection);
  if (!kind) return error_response(404, "not_found", "no such endpoint '/" + std::string(collection) + "'");
  try {
    if (slash == std::string_view::npos) return list(*kind, query);
    return lookup(*kind, path.substr(slash + 1));
  } catch (const QueryError& e) {
    return error_response(400, "bad_request", e.what());
  }
}

ApiResponse ApiService::root() const {
  auto counts = store_.counts();
  Json kinds = Json::array();
  Json count_obj = Json::object();
  for (auto kind : kAllKinds) {
    kinds.push_back(kind_path(kind));
    count_obj[std::string(kind_path(kind))] = counts[kind_index(kind)];
  }
  Json body;
  body["kinds"] = kinds;
  body["counts"] = count_obj;
  body["version"] = kEngineVersion;
  auto dump = store_.last_dump_date();
  body["dump_created_date"] = dump ? Json(dump->iso()) : Json(nullptr);
  return json_response(200, body);
}

ApiResponse ApiService::list(EntityKind kind, const QueryParams& query) const {
  FilterExpr filter = FilterExpr::parse(kind, param(query, "filter").value_or(""));
  SortSpec sort = SortSpec::parse(kind, param(query, "sort").value_or(""));
  Paging paging;
  paging.per_page = positive_param(query, "per-page", positive_param(query, "per_page", config_.per_page_default));
  if (paging.per_page > config_.per_page_max) {
    throw QueryError(std::to_string(paging.per_page),
                     "per-page " + std::to_string(paging.per_page) + " exceeds the maximum of " +
                         std::to_string(config_.per_page_max));
  }
  paging.cursor = param(query, "cursor");
  if (paging.cursor && query.contains("page")) throw QueryError("page", "page and cursor are mutually exclusive");
  paging.page = positive_param(query, "page", 1);
  if (!paging.cursor && paging.page * paging.per_page > config_.max_offset) {
    throw QueryError(std::to_string(paging.page), "offset paging reaches only the first " +
                                                      std::to_string(config_.max_offset) +
                                                      " results; use cursor=* to go deeper");
  }

  ListResult result = store_.list(kind, filter, sort, paging);
  Json results = Json::array();
  for (const auto& e : result.records) results.push_back(render(e));
  Json meta;
  meta["count"] = result.total;
  meta["page"] = paging.cursor ? Json(nullptr) : Json(result.page);
  meta["per_page"] = result.per_page;
  meta["next_cursor"] = result.next_cursor ? Json(*result.next_cursor) : Json(nullptr);
  Json body;
  body["meta"] = std::move(meta);
  body["results"] = std::move(results);
  return json_response(200, body);
}

ApiResponse ApiService::lookup(EntityKind kind, std::string_view key) const {
  std::optional<OpenAlexId> id;
  auto colon = key.find(':');
  bool is_url = key.starts_with("http://") || key.starts_with("https://");
  if (colon != std::string_view::npos && !is_url) {
    std::string_view prefix = key.substr(0, colon);
    std::string_view raw = key.substr(colon + 1);
    auto ns = std::find_if(std::begin(kNamespaces), std::end(kNamespaces),
                           [&](const Namespace& n) { return n.prefix == prefix; });
    if (ns == std::end(kNamespaces)) {
      return error_response(400, "bad_request", "unknown id namespace '" + std::string(prefix) + "'");
    }
    if (ns->kind != kind) {
      return error_response(400, "bad_request",
                            "namespace '" + std::string(prefix) + "' does not identify " + std::string(kind_path(kind)));
    }
    std::string ceid;
    try {
      ceid = normalize_identifier(ns->scheme, raw);
    } catch (const InvalidIdentifier& e) {
      return error_response(400, "bad_request", e.what());
    }
    if (ns->scheme == IdScheme::kIssn) ceid = issn_l_of(ceid, issn_table_);
    id = store_.id_by_ceid(kind, ceid);
    if (!id) return error_response(404, "not_found", std::string(prefix) + ":" + ceid + " is not in the index");
  } else {
    try {
      id = parse_id(key);
    } catch (const IdParseError& e) {
      return error_response(400, "bad_request", e.what());
    }
    if (id->kind() != kind) {
      return error_response(400, "bad_request",
                            id->short_form() + " is not one of the " + std::string(kind_path(kind)));
    }
  }
  auto entity = store_.get(*id);
  if (!entity) return error_response(404, "not_found", id->short_form() + " does not exist");
  return json_response(200, render(*entity));
}

struct ApiServer::Impl {
  Impl(const ApiService& s, ServerOptions o) : service(s), options(std::move(o)) {}
  const ApiService& service;
  ServerOptions options;
  httplib::Server server;
  int port = -1;
};

ApiServer::ApiServer(const ApiService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  auto& svr = impl_->server;
  // Connection backstop: workers plus queue slots bound the open connections.
  std::size_t cap = std::max<std::size_t>(impl_->options.max_connections, 2);
  std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, cap - 1);
  svr.new_task_queue = [workers, cap] { return new httplib::ThreadPool(workers, cap - workers); };

  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  if (impl_->options.gui_dir) {
    if (!svr.set_mount_point("/gui", impl_->options.gui_dir->string())) {
      throw TransportError("cannot serve GUI from " + impl_->options.gui_dir->string());
    }
  }
  svr.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  svr.Get(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
    QueryParams query(req.params.begin(), req.params.end());
    ApiResponse r = impl_->service.handle(req.path, query);
    res.status = r.status;
    res.set_content(r.body, std::string(kJsonContentType));
  });
  auto reject = [](const httplib::Request&, httplib::Response& res) {
    res.status = 405;
    res.set_content(R"({"error":"method_not_allowed","message":"the API is read-only"})",
                    std::string(kJsonContentType));
  };
  svr.Post(R"(.*)", reject);
  svr.Put(R"(.*)", reject);
  svr.Patch(R"(.*)", reject);
  svr.Delete(R"(.*)", reject);
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind() {
  auto& o = impl_->options;
  impl_->port = o.port == 0 ? impl_->server.bind_to_any_port(o.bind) : (impl_->server.bind_to_port(o.bind, o.port) ? o.port : -1);
  if (impl_->port < 0) throw TransportError("cannot bind " + o.bind + ":" + std::to_string(o.port));
  return impl_->port;
}

void ApiServer::listen() {
  if (impl_->port < 0) bind();
  impl_->server.listen_after_bind();
}

void ApiServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace openindex
