#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "botweave/config.hpp"
#include "botweave/pipeline.hpp"

int main(int argc, char** argv) {
  using namespace botweave;

  CLI::App app{"botweave: synthetic quotation-botnet discovery, retrieval and analysis"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out_dir;
  std::string dataset_dir;
  app.add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Random seed (overrides the config)");
  app.add_option("--threads", threads, "Worker threads (default: logical cores)")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory for all artifacts");
  app.add_option("--dataset", dataset_dir, "Use an existing dataset directory instead of generating one");

  const std::pair<const char*, const char*> commands[] = {
      {"generate", "Generate the labeled dataset and the reals-only reference population"},
      {"sample", "Draw the uniform user sample used for discovery"},
      {"geo-scan", "Bin sampled geotags and detect anomalous regions"},
      {"filter", "Apply the structural rules to seed candidates and to the id-range scan"},
      {"train", "Train the naive Bayes model on seed bots and ordinary accounts"},
      {"eval", "Stratified k-fold evaluation, plain and class-balanced"},
      {"classify", "Classify rule-passing candidates"},
      {"analyze", "Link composition, degree, follow-target and mobility analysis"},
      {"report", "Collect the report bundle and score retrieval against labels"},
      {"run", "Run every stage in order"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  PipelineConfig cfg;
  try {
    Config file = config_path.empty() ? Config::parse("", "defaults") : Config::load(config_path);
    cfg = pipeline_config_from(file);
    if (seed) {
      cfg.seed = *seed;
      cfg.gen.seed = *seed;
    }
    if (threads) cfg.threads = *threads;
    if (!out_dir.empty()) cfg.out = out_dir;
    if (!dataset_dir.empty()) cfg.dataset = dataset_dir;
    cfg.validate();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  Pipeline pipeline(cfg);
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "run")
      pipeline.run_all();
    else
      pipeline.run_stage(cmd);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  }
  return kExitOk;
}
