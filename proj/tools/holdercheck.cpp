#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "holder/config.hpp"
#include "holder/error.hpp"
#include "holder/run.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitViolated = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool strict = false;
  unsigned threads = 0;
  CLI::Option* seed_option = nullptr;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_out) {
  cmd->add_option("config", args.config_path, "YAML run configuration")->required();
  if (with_out) cmd->add_option("--out", args.out_dir, "Output directory (overrides config)");
  args.seed_option = cmd->add_option("--seed", args.seed, "Seed (overrides config)");
  cmd->add_flag("--strict", args.strict, "Exit nonzero when any verdict is violated");
  cmd->add_option("--threads", args.threads, "Worker threads (0: all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Holder regularity checks for Gaussian processes"};
  app.set_version_flag("--version", std::string("holdercheck ") + HOLDER_VERSION);
  app.require_subcommand(1);

  CommonArgs analyze_args, simulate_args, report_args;
  auto* analyze = app.add_subcommand("analyze", "Run the configured analyses and write files");
  add_common(analyze, analyze_args, true);
  auto* simulate = app.add_subcommand("simulate", "Simulate paths only and write paths.csv");
  add_common(simulate, simulate_args, true);
  auto* report = app.add_subcommand("report", "Run the analyses and print report.json");
  add_common(report, report_args, false);

  CLI11_PARSE(app, argc, argv);

  const CommonArgs& args = analyze->parsed()    ? analyze_args
                           : simulate->parsed() ? simulate_args
                                                : report_args;
  holder::RunConfig config;
  try {
    config = holder::load_config(args.config_path);
  } catch (const holder::Error& e) {
    std::cerr << "holdercheck: " << e.what() << '\n';
    return kExitConfig;
  }
  holder::RunOptions options;
  options.threads = args.threads;
  if (!args.out_dir.empty()) options.out_dir = args.out_dir;
  if (args.seed_option->count() > 0) options.seed = args.seed;
  if (simulate->parsed()) config.analyses = {"simulate"};
  options.write_files = !report->parsed();

  try {
    const auto result = holder::run(config, options);
    if (report->parsed()) std::cout << holder::to_json(result).dump(2) << '\n';
    for (const auto& a : result.analyses) {
      if (a.status != "ok")
        std::cerr << "holdercheck: " << a.name << ": " << a.error_type << " error: " << a.error
                  << '\n';
    }
    if (args.strict && holder::has_violations(result)) return kExitViolated;
  } catch (const holder::ConfigError& e) {
    std::cerr << "holdercheck: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "holdercheck: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
