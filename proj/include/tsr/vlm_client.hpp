#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace tsr {

struct VlmClientConfig {
  std::string endpoint = "http://127.0.0.1:8765/caption";
  std::string model = "caption-model";
  double timeout_seconds = 60.0;
  int max_retries = 3;
  // Delay before retry k is backoff_ms[min(k, size - 1)]; empty means no delay.
  std::vector<int> backoff_ms = {500, 2000, 8000};
  int max_in_flight = 1;

  void validate() const;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Minimal POST-only transport so tests can swap the network out.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  // Throws RuntimeFailure on connection-level errors.
  virtual HttpResponse post_json(const std::string& url, const std::string& body,
                                 double timeout_seconds) = 0;
};

std::unique_ptr<HttpTransport> make_http_transport();

struct VlmCaptions {
  std::vector<std::string> captions;
  int retries = 0;
};

// Body sent to the endpoint: {model, image (base64 SVG), prompt, n_segments}.
std::string build_vlm_request(const std::string& svg, int n_segments, const VlmClientConfig& cfg);

// Parses {"captions": [...]} and checks for exactly n non-empty strings.
// Throws ValidationError otherwise.
std::vector<std::string> parse_vlm_response(const std::string& body, int n_segments);

using SleepFn = std::function<void(int milliseconds)>;

// Posts the plot and retries on transport or validation failures. After the
// last attempt throws ValidationError (bad payload) or CaptioningFailure
// (transport), both carrying the last response body.
VlmCaptions caption_via_vlm(const std::string& svg, int n_segments, const VlmClientConfig& cfg,
                            HttpTransport* transport = nullptr, const SleepFn& sleep = {});

}  // namespace tsr
