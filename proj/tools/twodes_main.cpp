// twodes_main.cpp - command line front end: simulate, compare, dump-correlation, dump-memory-norm
#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "twodes/config.hpp"
#include "twodes/errors.hpp"
#include "twodes/pipeline.hpp"
#include "twodes/threadpool.hpp"

namespace {

struct CommonArgs {
  std::string preset;
  std::string config_path;
  std::string out_dir = "out";
  int threads = 0;
  std::string variant;
  std::string mode;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--preset", args.preset, "named scenario: fig2, fig3, fig4 or fig5");
  cmd->add_option("--config", args.config_path, "path to a JSON run configuration");
  cmd->add_option("--out", args.out_dir, "artifact output directory");
  cmd->add_option("--threads", args.threads, "worker threads (0 = auto)");
  cmd->add_option("--variant", args.variant,
                  "segment accumulation variant override: as-printed or telescoping");
  cmd->add_option("--mode", args.mode, "dynamics mode override: ca, reset or markov");
}

twodes::RunConfig resolve_args(const CommonArgs& args) {
  if (args.preset.empty() == args.config_path.empty())
    throw twodes::ConfigError("exactly one of --preset or --config is required");
  twodes::RunConfig cfg = args.preset.empty() ? twodes::load_config(args.config_path)
                                              : twodes::preset_config(args.preset);
  if (!args.mode.empty()) {
    if (args.mode == "ca")
      cfg.mode = twodes::DynamicsMode::CorrelationAware;
    else if (args.mode == "reset")
      cfg.mode = twodes::DynamicsMode::FactorizedReset;
    else if (args.mode == "markov")
      cfg.mode = twodes::DynamicsMode::StaticMarkov;
    else
      throw twodes::ConfigError("--mode: expected ca, reset or markov, got '" + args.mode + "'");
  }
  if (!args.variant.empty()) {
    if (args.variant == "as-printed")
      cfg.variant = twodes::SegmentVariant::AsPrinted;
    else if (args.variant == "telescoping")
      cfg.variant = twodes::SegmentVariant::Telescoping;
    else
      throw twodes::ConfigError("--variant: expected as-printed or telescoping, got '" +
                                args.variant + "'");
  }
  return cfg;
}

int thread_count(const CommonArgs& args) {
  return args.threads > 0 ? args.threads : twodes::default_thread_count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pulse-dressed two-map 2DES simulator"};
  app.require_subcommand(1);

  CommonArgs sim_args;
  bool dry_run = false;
  CLI::App* sim = app.add_subcommand("simulate", "run a full scenario and write artifacts");
  add_common(sim, sim_args);
  sim->add_flag("--dry-run", dry_run, "validate and write resolved config + manifest only");

  std::vector<std::string> compare_dirs;
  std::string compare_out = "out";
  CLI::App* cmp = app.add_subcommand("compare", "summarize several artifact directories");
  cmp->add_option("dirs", compare_dirs, "artifact directories to compare")->expected(-2);
  cmp->add_option("--out", compare_out, "directory for compare.csv and compare.txt");

  CommonArgs corr_args;
  CLI::App* corr = app.add_subcommand("dump-correlation",
                                      "write the bath correlation function over the run span");
  add_common(corr, corr_args);

  CommonArgs mem_args;
  CLI::App* mem = app.add_subcommand("dump-memory-norm",
                                     "write memory and full generator norms per segment");
  add_common(mem, mem_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) {
      const twodes::RunConfig cfg = resolve_args(sim_args);
      const twodes::SimulateResult result =
          twodes::run_simulate(cfg, sim_args.out_dir, thread_count(sim_args), dry_run);
      std::printf("wrote %s (config %s)\n", sim_args.out_dir.c_str(),
                  twodes::config_hash(result.cfg).c_str());
      if (result.has_beating)
        std::printf("beating peak %.2f cm^-1, peak-to-median %.2f\n",
                    result.beating.peak_nu_cm1, result.beating.peak_to_median);
    } else if (cmp->parsed()) {
      const auto rows = twodes::run_compare(compare_dirs, compare_out);
      std::printf("%-16s %12s %16s %12s  %s\n", "run", "peak/cm^-1", "peak-to-median",
                  "persistence", "flag");
      for (const auto& r : rows)
        std::printf("%-16s %12.2f %16.3f %12.4f  %s\n", r.label.c_str(), r.peak_nu_cm1,
                    r.peak_to_median, r.persistence, r.beating ? "beating" : "suppressed");
    } else if (corr->parsed()) {
      twodes::run_dump_correlation(resolve_args(corr_args), corr_args.out_dir,
                                   thread_count(corr_args));
      std::printf("wrote %s/correlation.csv\n", corr_args.out_dir.c_str());
    } else if (mem->parsed()) {
      twodes::run_dump_memory_norm(resolve_args(mem_args), mem_args.out_dir,
                                   thread_count(mem_args));
      std::printf("wrote %s/memory_norm.csv\n", mem_args.out_dir.c_str());
    }
  } catch (const twodes::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const twodes::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
