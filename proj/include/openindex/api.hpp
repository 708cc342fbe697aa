#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "openindex/codec.hpp"
#include "openindex/identifiers.hpp"
#include "openindex/store.hpp"

namespace openindex {

inline constexpr std::string_view kEngineVersion = "0.1.0";
inline constexpr std::string_view kJsonContentType = "application/json; charset=utf-8";

struct ApiConfig {
  std::string base_url = "http://127.0.0.1:8080";  // prefix of emitted `id` fields
  std::size_t per_page_default = 25;
  std::size_t per_page_max = 200;
  std::size_t max_offset = 10'000;  // deepest result reachable with page/per-page
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

using QueryParams = std::multimap<std::string, std::string>;

// Transport-free request handling: GET /, /{kind}, /{kind}/{key}. Read only.
class ApiService {
 public:
  ApiService(const GraphStore& store, ApiConfig config, IssnLinkingTable issn_table = {});

  ApiResponse handle(std::string_view path, const QueryParams& query) const;

  // The record as served: `id` becomes {base_url}/{kind}/{short id}.
  Json render(const Entity& entity) const;

  const ApiConfig& config() const noexcept { return config_; }

 private:
  ApiResponse root() const;
  ApiResponse list(EntityKind kind, const QueryParams& query) const;
  ApiResponse lookup(EntityKind kind, std::string_view key) const;

  const GraphStore& store_;
  ApiConfig config_;
  IssnLinkingTable issn_table_;
};

struct ServerOptions {
  std::string bind = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::size_t max_connections = 64;
  std::optional<std::filesystem::path> gui_dir;  // mounted at /gui
};

// HTTP front end with permissive read-only CORS.
class ApiServer {
 public:
  ApiServer(const ApiService& service, ServerOptions options);
  ~ApiServer();

  // Binds; returns the bound port. Throws TransportError on failure.
  int bind();
  // Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace openindex
