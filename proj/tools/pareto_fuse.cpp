#include <cstdint>
#include <exception>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "pfuse/common/error.hpp"
#include "pfuse/experiment/config.hpp"
#include "pfuse/experiment/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitMissing = 3;
constexpr int kExitNumeric = 4;

}  // namespace

int main(int argc, char** argv) {
  using namespace pfuse::experiment;
  const std::map<std::string, void (*)(const ExperimentConfig&)> commands = {
      {"generate", cmd_generate},       {"train-ranking", cmd_train_ranking},
      {"tune-formula", cmd_tune_formula}, {"run-ippo", cmd_run_ippo},
      {"evaluate", cmd_evaluate},       {"calibrate", cmd_calibrate},
      {"report", cmd_report},           {"all", run_pipeline},
  };

  CLI::App app{"Multi-objective score fusion laboratory"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, fn] : commands) {
    auto* sub = app.add_subcommand(name, name == "all" ? "run every stage in order"
                                                       : "run the " + name + " stage");
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--seed", seed, "seed override");
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    auto config = load_config(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      if (sub->count("--seed") > 0) config.seed = seed;
      commands.at(name)(config);
    }
  } catch (const pfuse::MissingArtifact& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMissing;
  } catch (const pfuse::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const pfuse::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
