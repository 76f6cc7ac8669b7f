// qcontract: design quantizer rate allocations and run quantized fixed-point experiments.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "qcontract/cli.hpp"

namespace cli = qcontract::cli;

int main(int argc, char** argv) {
  CLI::App app{"Rate allocation and simulation for quantized contractive iterations"};
  app.require_subcommand(1);

  std::string config, out, seeds;
  // Each subcommand has its own default format.
  std::string design_format = "json", simulate_format = "csv", tradeoff_format = "csv";
  auto add_common = [&](CLI::App* sub, std::string& format) {
    sub->add_option("--config", config, "JSON configuration file")->required();
    sub->add_option("--out", out, "output file (default stdout)");
    sub->add_option("--format", format, "csv or json")->capture_default_str();
  };
  auto* design = app.add_subcommand("design", "compute a rate allocation");
  add_common(design, design_format);
  auto* simulate = app.add_subcommand("simulate", "run quantized iterations and report the error trajectory");
  add_common(simulate, simulate_format);
  simulate->add_option("--seed-list", seeds, "comma-separated seeds, overriding the config");
  auto* tradeoff = app.add_subcommand("tradeoff", "sweep the bit budget or the horizon");
  add_common(tradeoff, tradeoff_format);
  tradeoff->add_option("--seed-list", seeds, "comma-separated seeds, overriding the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cli::kConfigError;
  }

  cli::CommandResult r;
  try {
    const auto fmt = cli::format_from_string(design->parsed()     ? design_format
                                             : simulate->parsed() ? simulate_format
                                                                  : tradeoff_format);
    const auto cfg = cli::load_config(config);
    std::optional<std::vector<std::uint64_t>> seed_list;
    if (!seeds.empty()) seed_list = cli::parse_seed_list(seeds);
    if (design->parsed())
      r = cli::cmd_design(cfg, fmt);
    else if (simulate->parsed())
      r = cli::cmd_simulate(cfg, seed_list, fmt);
    else
      r = cli::cmd_tradeoff(cfg, seed_list, fmt);
  } catch (const cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kConfigError;
  }

  if (!r.message.empty()) std::cerr << (r.exit_code == cli::kConfigError ? "error: " : "note: ") << r.message << '\n';
  if (!r.output.empty()) {
    if (out.empty()) {
      std::cout << r.output;
    } else {
      std::ofstream f(out);
      if (!f) {
        std::cerr << "error: cannot write '" << out << "'\n";
        return cli::kConfigError;
      }
      f << r.output;
    }
  }
  return r.exit_code;
}
