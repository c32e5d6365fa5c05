#include <cstdint>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "ssimpc/config.hpp"
#include "ssimpc/harness.hpp"

namespace {

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(csv);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> parse_horizons(const std::string& csv) {
  std::vector<int> out;
  for (const std::string& s : split_list(csv)) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(s, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("invalid horizon '" + s + "'");
    }
    if (pos != s.size() || v < 1) {
      throw std::invalid_argument("invalid horizon '" + s + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) {
    throw std::invalid_argument("no horizons given");
  }
  return out;
}

int default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void report(const ssimpc::RunArtifacts& art) {
  std::cout << "episodes: " << art.episodes.size() << " (" << art.failures
            << " failed)\n"
            << "summary:  " << art.summary_path << "\n"
            << "digest:   " << art.digest_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Online disturbance learning + receding-horizon control benchmark "
      "runner"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, artifacts_dir, kinds_csv, horizons_csv;
  std::uint64_t seed = 0;
  int workers = default_workers();
  bool have_seed = false, have_out = false;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario_path, "Scenario JSON file")
        ->required();
    cmd->add_option("--seed", seed, "Master seed override")
        ->each([&](const std::string&) { have_seed = true; });
    cmd->add_option("--out", out_dir, "Output directory override")
        ->each([&](const std::string&) { have_out = true; });
    cmd->add_option("--workers", workers, "Concurrent episode workers")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* cmd_run =
      app.add_subcommand("run", "Run a scenario's repeated episodes");
  add_common(cmd_run);

  CLI::App* cmd_sweep = app.add_subcommand(
      "sweep", "Run the scenario's (feature count x learning rate) grid");
  add_common(cmd_sweep);

  CLI::App* cmd_plot = app.add_subcommand("plot", "Render SVG plots");
  cmd_plot->add_option("--artifacts", artifacts_dir, "Artifacts directory")
      ->required();
  cmd_plot
      ->add_option("--kinds", kinds_csv,
                   "Comma list: error,prediction_error,cumulative,regret")
      ->required();

  CLI::App* cmd_regret = app.add_subcommand(
      "regret", "Paired learning-vs-clairvoyant runs over several horizons");
  add_common(cmd_regret);
  cmd_regret
      ->add_option("--horizons", horizons_csv, "Comma list of step horizons")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (cmd_plot->parsed()) {
      const auto written =
          ssimpc::emit_plots(artifacts_dir, split_list(kinds_csv));
      for (const std::string& path : written) {
        std::cout << "emitted " << path << "\n";
      }
      return 0;
    }

    ssimpc::ScenarioConfig cfg = ssimpc::load_config_file(scenario_path);
    if (have_seed) cfg.run.master_seed = seed;
    if (have_out) cfg.run.output_dir = out_dir;

    if (cmd_run->parsed()) {
      const auto art = ssimpc::run_scenario(cfg, workers);
      report(art);
      return art.failures > 0 ? 2 : 0;
    }
    if (cmd_sweep->parsed()) {
      const auto art = ssimpc::run_sweep(cfg, workers);
      report(art);
      return art.failures > 0 ? 2 : 0;
    }
    if (cmd_regret->parsed()) {
      const auto art =
          ssimpc::run_regret(cfg, parse_horizons(horizons_csv), workers);
      std::cout << "horizon,median_gap,median_gap_per_step\n";
      for (std::size_t i = 0; i < art.horizons.size(); ++i) {
        std::cout << art.horizons[i] << "," << art.median_regret[i] << ","
                  << art.median_regret_per_step[i] << "\n";
      }
      std::cout << "fitted exponent: " << art.fit.slope
                << (art.fit.degenerate ? " (degenerate)" : "") << "\n"
                << "summary: " << art.summary_path << "\n";
      return art.failures > 0 ? 2 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
