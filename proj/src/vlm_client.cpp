#include "tsr/vlm_client.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <json.hpp>
#include <regex>
#include <thread>

#include "tsr/error.hpp"

namespace tsr {

using nlohmann::json;

void VlmClientConfig::validate() const {
  if (endpoint.empty()) throw InvalidInput("vlm.endpoint is empty");
  if (max_retries < 0) throw InvalidInput("vlm.max_retries must be >= 0");
  if (timeout_seconds <= 0.0) throw InvalidInput("vlm.timeout_seconds must be > 0");
  if (max_in_flight < 1) throw InvalidInput("vlm.max_in_flight must be >= 1");
  for (int ms : backoff_ms) {
    if (ms < 0) throw InvalidInput("vlm.backoff_ms entries must be >= 0");
  }
}

namespace {

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post_json(const std::string& url, const std::string& body,
                         double timeout_seconds) override {
    static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, kUrl)) throw InvalidInput("malformed endpoint URL '" + url + "'");
    const std::string path = m[2].matched ? m[2].str() : "/";
    httplib::Client client(m[1].str());
    const auto secs = static_cast<time_t>(timeout_seconds);
    const auto usecs = static_cast<time_t>((timeout_seconds - secs) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    auto res = client.Post(path, body, "application/json");
    if (!res) {
      throw RuntimeFailure("POST " + url + " failed: " + httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  }
};

constexpr const char* kPrompt =
    "The plot shows one time series in light gray. Numbered colored bands mark segments. "
    "Describe the behavior of each numbered segment in one short sentence. "
    "Reply with JSON {\"captions\": [...]} holding one caption per segment in index order.";

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport() { return std::make_unique<HttplibTransport>(); }

std::string build_vlm_request(const std::string& svg, int n_segments, const VlmClientConfig& cfg) {
  json body;
  body["model"] = cfg.model;
  body["image"] = httplib::detail::base64_encode(svg);
  body["image_format"] = "svg";
  body["prompt"] = kPrompt;
  body["n_segments"] = n_segments;
  return body.dump();
}

std::vector<std::string> parse_vlm_response(const std::string& body, int n_segments) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw ValidationError("response is not JSON", body);
  if (!doc.is_object() || !doc.contains("captions") || !doc["captions"].is_array()) {
    throw ValidationError("response lacks a 'captions' array", body);
  }
  const auto& arr = doc["captions"];
  if (static_cast<int>(arr.size()) != n_segments) {
    throw ValidationError("expected " + std::to_string(n_segments) + " captions, got " +
                              std::to_string(arr.size()),
                          body);
  }
  std::vector<std::string> out;
  out.reserve(arr.size());
  for (const auto& item : arr) {
    if (!item.is_string() || item.get<std::string>().empty()) {
      throw ValidationError("captions must be non-empty strings", body);
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

VlmCaptions caption_via_vlm(const std::string& svg, int n_segments, const VlmClientConfig& cfg,
                            HttpTransport* transport, const SleepFn& sleep) {
  if (n_segments < 1) throw InvalidInput("caption_via_vlm: n_segments must be >= 1");
  cfg.validate();
  std::unique_ptr<HttpTransport> owned;
  if (transport == nullptr) {
    owned = make_http_transport();
    transport = owned.get();
  }
  const std::string request = build_vlm_request(svg, n_segments, cfg);

  std::string last_body;
  std::string last_error;
  bool last_was_validation = false;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0 && !cfg.backoff_ms.empty()) {
      const auto k = std::min<std::size_t>(attempt - 1, cfg.backoff_ms.size() - 1);
      const int delay = cfg.backoff_ms[k];
      if (sleep) {
        sleep(delay);
      } else if (delay > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      }
    }
    try {
      const HttpResponse res = transport->post_json(cfg.endpoint, request, cfg.timeout_seconds);
      last_body = res.body;
      if (res.status < 200 || res.status >= 300) {
        last_was_validation = false;
        last_error = "HTTP " + std::to_string(res.status);
        continue;
      }
      return {parse_vlm_response(res.body, n_segments), attempt};
    } catch (const ValidationError& e) {
      last_was_validation = true;
      last_error = e.what();
    } catch (const RuntimeFailure& e) {
      last_was_validation = false;
      last_error = e.what();
    }
  }
  const std::string what = "captioning failed after " + std::to_string(cfg.max_retries + 1) +
                           " attempts: " + last_error;
  if (last_was_validation) throw ValidationError(what, last_body);
  throw CaptioningFailure(what, last_body);
}

}  // namespace tsr
