#include <CLI11.hpp>
#include <iostream>

#include "tsr/error.hpp"
#include "tsr/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Text-to-segment retrieval over univariate time series"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> pool_size;
  std::optional<std::string> method;
  std::optional<int> k;
  std::optional<std::string> data_dir;
  std::optional<std::string> output_dir;
  app.add_option("--config", config_path, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Override the run seed");
  app.add_option("--pool-size", pool_size, "Restrict query/eval to one pool size")->check(CLI::PositiveNumber);
  app.add_option("--method", method, "Restrict query/eval to one ranker")
      ->check(CLI::IsMember({"model", "random"}));
  app.add_option("--k", k, "Depth of the returned top-K lists")->check(CLI::PositiveNumber);
  app.add_option("--data-dir", data_dir, "Override data_dir");
  app.add_option("--output-dir", output_dir, "Override output_dir");

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"make-fixture", "Write the bundled synthetic dataset to data_dir"},
      {"windows", "Sample and normalize fixed-length windows"},
      {"segment", "TV2 segmentation of every window"},
      {"caption", "Caption every captionable segment"},
      {"train", "Train the dual encoder"},
      {"index", "Embed the test-split candidate segments"},
      {"query", "Rank candidate pools for the sampled queries"},
      {"eval", "Compute retrieval metrics"},
      {"run-all", "Run every stage in order"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    auto cfg = tsr::PipelineConfig::load(config_path);
    if (seed) cfg.set_seed(*seed);
    if (k) cfg.eval.top_k = *k;
    if (data_dir) cfg.data_dir = *data_dir;
    if (output_dir) cfg.output_dir = *output_dir;
    if (pool_size && std::find(cfg.eval.pool_sizes.begin(), cfg.eval.pool_sizes.end(), *pool_size) ==
                         cfg.eval.pool_sizes.end()) {
      cfg.eval.pool_sizes.push_back(*pool_size);
    }
    if (method && std::find(cfg.eval.methods.begin(), cfg.eval.methods.end(), *method) == cfg.eval.methods.end()) {
      cfg.eval.methods.push_back(*method);
    }
    const tsr::RunFilter filter{pool_size, method};
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "make-fixture") tsr::cmd_make_fixture(cfg);
    else if (cmd == "windows") tsr::cmd_windows(cfg);
    else if (cmd == "segment") tsr::cmd_segment(cfg);
    else if (cmd == "caption") tsr::cmd_caption(cfg);
    else if (cmd == "train") tsr::cmd_train(cfg);
    else if (cmd == "index") tsr::cmd_index(cfg);
    else if (cmd == "query") tsr::cmd_query(cfg, filter);
    else if (cmd == "eval") tsr::cmd_eval(cfg, filter);
    else if (cmd == "run-all") tsr::cmd_run_all(cfg);
  } catch (const tsr::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
