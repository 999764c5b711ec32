#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fracepi/app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fractional-order seasonal epidemic models: simulation, order fitting, optimal treatment control "
               "and cost-effectiveness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fracepi::kToolVersion);

  std::string config_path, out_dir;
  double alpha = 0.0;
  std::uint64_t seed = 1;
  std::vector<std::string> inputs;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "Integrate the model and write trajectory.csv"},
      {"equilibrium", "Print and write the endemic equilibrium of the mean system"},
      {"fit", "Fit the fractional order to monthly case counts"},
      {"optimize", "Solve the optimal treatment problem by forward-backward sweep"},
      {"costeff", "Cost-effectiveness report over one or more optimize output directories"},
      {"plots", "Write plot scripts for the artifacts in the output directory"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Configuration file (key = value)");
    sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    sub->add_option("--alpha", alpha, "Override params.alpha");
    sub->add_option("--seed", seed, "Seed for synthetic data");
    if (name == "costeff") sub->add_option("inputs", inputs, "optimize output directories");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: kind=usage message=" << e.what() << '\n';
    return fracepi::kExitConfig;
  }

  for (auto* sub : subs) {
    if (!sub->parsed()) continue;
    fracepi::AppOptions opts;
    if (sub->count("--config")) opts.config_path = config_path;
    if (sub->count("--out")) opts.out_dir = out_dir;
    if (sub->count("--alpha")) opts.alpha = alpha;
    opts.seed = seed;
    opts.inputs = inputs;
    return fracepi::run_cli(sub->get_name(), opts);
  }
  return fracepi::kExitConfig;
}
