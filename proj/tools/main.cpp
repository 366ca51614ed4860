#include "app.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App cli{"Estimation and forecasting for stochastic volatility models with nonlinear drift"};
  cli.require_subcommand(1);

  struct Args {
    std::string config;
    std::string out;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
  };
  std::map<std::string, Args> args;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "simulate a synthetic date,price,vxo series"},
      {"estimate", "fit the selected models to the in-sample data"},
      {"forecast", "fit once and evaluate forecasts in and out of sample"},
      {"rolling", "re-estimate on an expanding window and forecast out of sample"},
      {"report", "render plot-ready CSVs and tables from saved artifacts"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = cli.add_subcommand(name, help);
    auto& a = args[name];
    sub->add_option("-c,--config", a.config, "flat key = value config file");
    sub->add_option("-o,--out", a.out, "run directory")->required();
    sub->add_option("-s,--set", a.sets, "override a config entry, key=value");
    sub->add_option("--seed", a.seed, "seed (overrides config and NLSV_SEED)");
  }
  std::string manifest, replay_out;
  auto* replay = cli.add_subcommand("replay", "re-run a command from its manifest");
  replay->add_option("manifest", manifest, "manifest.txt of an earlier run")->required();
  replay->add_option("-o,--out", replay_out, "run directory")->required();

  CLI11_PARSE(cli, argc, argv);

  try {
    if (replay->parsed()) {
      nlsv::app::replay(manifest, replay_out, std::cerr);
      return 0;
    }
    for (const auto& [name, help] : commands) {
      if (!cli.got_subcommand(name)) continue;
      const auto& a = args[name];
      nlsv::Config config = a.config.empty() ? nlsv::Config{} : nlsv::Config::load(a.config);
      for (const auto& kv : a.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw nlsv::FormatError("--set expects key=value, got '" + kv + "'");
        }
        config.set(kv.substr(0, eq), kv.substr(eq + 1));
      }
      const auto resolved = nlsv::app::resolve(name, config, a.seed);
      nlsv::app::run(name, resolved, a.out, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
