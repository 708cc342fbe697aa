#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "openindex/errors.hpp"

namespace openindex {

struct RetryPolicy {
  std::chrono::milliseconds base{1000};
  double factor = 2.0;
  int max_attempts = 5;
  // Replaced in tests to avoid real waiting.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct HarvestPage {
  std::vector<nlohmann::json> records;
  std::optional<std::string> next_cursor;
};

// Pull client for `GET {base}/works?cursor=&rows=` listings answering
// {"items": [...], "next_cursor": "..."|null}. Plain http only.
class HarvestClient {
 public:
  explicit HarvestClient(std::string base_url, RetryPolicy retry = {},
                         std::chrono::seconds timeout = std::chrono::seconds(30));

  // One page. Connection failures, 429 and 5xx are retried with exponential
  // backoff, then surface as TransportError; other statuses and malformed
  // bodies throw ProtocolError.
  HarvestPage fetch(const std::optional<std::string>& cursor, std::size_t rows);

  // Follows cursors until exhausted, handing each page's records to `sink`.
  // Returns the number of records seen.
  std::size_t harvest_all(std::size_t rows, const std::function<void(const nlohmann::json&)>& sink,
                          std::optional<std::string> start_cursor = std::nullopt);

  int attempts_last_fetch() const noexcept { return attempts_; }

 private:
  std::string origin_;  // scheme://host[:port]
  std::string prefix_;  // path prefix without trailing slash
  RetryPolicy retry_;
  std::chrono::seconds timeout_;
  int attempts_ = 0;
};

}  // namespace openindex
