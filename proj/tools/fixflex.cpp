#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "fixflex/scenario.hpp"
#include "fixflex/synthetic_city.hpp"

namespace {

using namespace fixflex;

int cmd_run(const std::string& config_file, const std::string& inputs, const std::string& out,
            std::optional<std::uint64_t> seed) {
  ScenarioConfig cfg;
  try {
    cfg = load_config(config_file);
    if (seed) cfg.master_seed = *seed;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "fixflex: invalid config: " << e.what() << '\n';
    return kExitInvalid;
  }
  const auto outcome = run_scenario(cfg, inputs, out);
  if (outcome.exit_code == kExitInvalid) {
    std::cerr << "fixflex: " << outcome.error << '\n';
    return kExitInvalid;
  }
  std::cout << "scenario " << outcome.scenario_id << ": " << (outcome.converged ? "converged" : "not converged")
            << " after " << outcome.iterations << " iterations; outputs in " << outcome.out_dir.string() << '\n';
  return outcome.exit_code;
}

int cmd_batch(const std::string& matrix, const std::string& inputs, const std::string& out,
              const std::optional<std::string>& base_config, std::optional<std::uint64_t> seed, int jobs) {
  std::vector<ScenarioConfig> scenarios;
  try {
    ScenarioConfig base;
    if (base_config) base = load_config(*base_config);
    if (seed) base.master_seed = *seed;
    scenarios = load_matrix(matrix, base);
  } catch (const std::exception& e) {
    std::cerr << "fixflex: " << e.what() << '\n';
    return kExitInvalid;
  }
  const auto outcomes = run_batch(scenarios, inputs, out, jobs);
  std::size_t failed = 0, unconverged = 0;
  for (const auto& o : outcomes) {
    if (o.exit_code == kExitInvalid) ++failed;
    else if (!o.converged) ++unconverged;
  }
  std::cout << outcomes.size() << " scenarios, " << failed << " failed, " << unconverged
            << " not converged; summary in " << (std::filesystem::path(out) / "summary.csv").string() << '\n';
  if (failed) return kExitInvalid;
  return unconverged ? kExitNotConverged : kExitConverged;
}

int cmd_validate(const std::string& inputs) {
  try {
    const auto r = validate_inputs(inputs);
    std::cout << "nodes " << r.nodes << ", links " << r.links << ", lines " << r.lines << ", travelers "
              << r.travelers << ", zones " << r.zones << '\n';
    for (const auto& w : r.warnings) std::cout << "warning: " << w << '\n';
    std::cout << "inputs OK\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "fixflex: " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fixflex: integrated fixed-route and microtransit scenario evaluation"};
  app.require_subcommand(1);

  std::string config, inputs, out = "out", matrix;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> base_config;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "run one scenario to equilibrium and write its metrics");
  run->add_option("--config", config, "scenario config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--inputs", inputs, "inputs directory")->required();
  run->add_option("--out", out, "output root; results go to <out>/<scenario_id>/");
  run->add_option("--seed", seed, "override the config's master seed");

  auto* batch = app.add_subcommand("batch", "run every scenario of a matrix CSV");
  batch->add_option("--matrix", matrix, "scenario matrix CSV")->required()->check(CLI::ExistingFile);
  batch->add_option("--inputs", inputs, "inputs directory")->required();
  batch->add_option("--out", out, "output root");
  batch->add_option("--config", base_config, "base config supplying parameter overrides");
  batch->add_option("--seed", seed, "master seed for every scenario");
  batch->add_option("-j,--jobs", jobs, "concurrent scenarios")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "check an inputs directory");
  validate->add_option("--inputs", inputs, "inputs directory")->required();

  std::size_t travelers = 2000;
  std::uint64_t city_seed = 2024;
  auto* synth = app.add_subcommand("synth", "write the synthetic grid city inputs");
  synth->add_option("--out", out, "directory to create")->required();
  synth->add_option("--travelers", travelers, "number of travelers");
  synth->add_option("--seed", city_seed, "demand seed");

  CLI11_PARSE(app, argc, argv);

  if (*run) return cmd_run(config, inputs, out, seed);
  if (*batch) return cmd_batch(matrix, inputs, out, base_config, seed, jobs);
  if (*validate) return cmd_validate(inputs);
  if (*synth) {
    try {
      synthetic::CitySpec spec;
      spec.travelers = travelers;
      spec.seed = city_seed;
      synthetic::write_city(out, spec);
      std::cout << "wrote synthetic city to " << out << '\n';
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "fixflex: " << e.what() << '\n';
      return kExitInvalid;
    }
  }
  return 0;
}
