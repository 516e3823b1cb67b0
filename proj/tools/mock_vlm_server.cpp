// Stand-in captioning endpoint for local runs: answers POST /caption with
// generic captions, optionally misbehaving to exercise client retries.
#include <CLI11.hpp>
#include <atomic>
#include <httplib.h>
#include <iostream>
#include <json.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Mock captioning endpoint"};
  std::string host = "127.0.0.1";
  int port = 8765;
  int fail_first = 0;
  bool short_reply = false;
  app.add_option("--host", host);
  app.add_option("--port", port);
  app.add_option("--fail-first", fail_first, "Answer the first N requests with HTTP 503");
  app.add_flag("--short", short_reply, "Return one caption fewer than requested");
  CLI11_PARSE(app, argc, argv);

  std::atomic<int> seen{0};
  httplib::Server server;
  server.Post("/caption", [&](const httplib::Request& req, httplib::Response& res) {
    if (seen++ < fail_first) {
      res.status = 503;
      res.set_content(R"({"error":"warming up"})", "application/json");
      return;
    }
    const auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.contains("n_segments")) {
      res.status = 400;
      res.set_content(R"({"error":"bad request"})", "application/json");
      return;
    }
    int n = body["n_segments"].get<int>();
    if (short_reply && n > 0) --n;
    nlohmann::json captions = nlohmann::json::array();
    for (int i = 1; i <= n; ++i) captions.push_back("segment " + std::to_string(i) + " of the plotted series");
    res.set_content(nlohmann::json{{"captions", captions}}.dump(), "application/json");
  });
  server.Post("/shutdown", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content("{}", "application/json");
    server.stop();
  });
  std::cerr << "mock captioning endpoint on http://" << host << ":" << port << "/caption\n";
  if (!server.listen(host, port)) {
    std::cerr << "cannot listen on " << host << ":" << port << '\n';
    return 2;
  }
  return 0;
}
