#include "openindex/harvest.hpp"

#include <thread>

#include <httplib.h>

namespace openindex {

HarvestClient::HarvestClient(std::string base_url, RetryPolicy retry, std::chrono::seconds timeout)
    : retry_(std::move(retry)), timeout_(timeout) {
  if (!retry_.sleep) retry_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (retry_.max_attempts < 1) retry_.max_attempts = 1;
  while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
  auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) throw TransportError("endpoint '" + base_url + "' has no scheme");
  if (base_url.compare(0, scheme_end, "http") != 0) {
    throw TransportError("endpoint '" + base_url + "': only http:// is supported");
  }
  auto path_start = base_url.find('/', scheme_end + 3);
  origin_ = base_url.substr(0, path_start);
  prefix_ = path_start == std::string::npos ? "" : base_url.substr(path_start);
}

HarvestPage HarvestClient::fetch(const std::optional<std::string>& cursor, std::size_t rows) {
  httplib::Client client(origin_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  httplib::Params params{{"cursor", cursor.value_or("*")}, {"rows", std::to_string(rows)}};
  std::string path = httplib::append_query_params(prefix_ + "/works", params);

  auto delay = retry_.base;
  std::string last_error;
  for (attempts_ = 1;; ++attempts_) {
    auto res = client.Get(path);
    if (res && res->status == 200) {
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolError(std::string("malformed response body: ") + e.what());
      }
      // Crossref wraps listings in {"message": {"items", "next-cursor"}}.
      const nlohmann::json* listing = &body;
      if (body.is_object() && body.contains("message") && body["message"].is_object()) listing = &body["message"];
      if (!listing->is_object() || !listing->contains("items") || !(*listing)["items"].is_array()) {
        throw ProtocolError("response body has no items array");
      }
      HarvestPage page;
      for (const auto& item : (*listing)["items"]) page.records.push_back(item);
      for (const char* key : {"next_cursor", "next-cursor"}) {
        if (listing->contains(key)) {
          const auto& c = (*listing)[key];
          if (c.is_string()) {
            page.next_cursor = c.get<std::string>();
          } else if (!c.is_null()) {
            throw ProtocolError(std::string(key) + " is neither a string nor null");
          }
        }
      }
      if (page.records.empty()) page.next_cursor.reset();
      return page;
    }
    if (res) {
      bool retryable = res->status == 429 || res->status >= 500;
      if (!retryable) throw ProtocolError("unexpected HTTP status " + std::to_string(res->status));
      last_error = "HTTP " + std::to_string(res->status);
    } else {
      last_error = httplib::to_string(res.error());
    }
    if (attempts_ >= retry_.max_attempts) break;
    retry_.sleep(delay);
    delay = std::chrono::milliseconds(static_cast<std::int64_t>(static_cast<double>(delay.count()) * retry_.factor));
  }
  throw TransportError("GET " + origin_ + path + " failed after " + std::to_string(attempts_) +
                       " attempts: " + last_error);
}

std::size_t HarvestClient::harvest_all(std::size_t rows, const std::function<void(const nlohmann::json&)>& sink,
                                       std::optional<std::string> start_cursor) {
  std::size_t seen = 0;
  std::optional<std::string> cursor = std::move(start_cursor);
  while (true) {
    HarvestPage page = fetch(cursor, rows);
    for (const auto& r : page.records) sink(r);
    seen += page.records.size();
    if (!page.next_cursor) break;
    cursor = std::move(page.next_cursor);
  }
  return seen;
}

}  // namespace openindex
