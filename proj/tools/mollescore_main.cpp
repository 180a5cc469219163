#include <CLI11.hpp>
#include <fstream>

#include "../src/cli/commands.hpp"
#include "mollescore/threads.hpp"

using namespace mollescore;

int main(int argc, char** argv) {
  CLI::App app{"kernel-mollified empirical scores for denoising diffusion"};
  app.require_subcommand(1);

  const std::vector<std::string> names = {
      "gen-data",  "sample",       "kl-sweep", "neff",   "covariance",
      "dim-estimate", "biasvar", "memorize", "ledkde", "spectral-check"};

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool dry_run = false;

  for (const auto& name : names) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config (json)")
        ->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker pool size");
    sub->add_flag("--dry-run", dry_run,
                  "validate the config and print the plan");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    std::ifstream in(config_path);
    if (!in) throw io_error("cannot open config " + config_path);
    cli::json cfg;
    try {
      cfg = cli::json::parse(in);
    } catch (const std::exception& e) {
      throw parse_error(std::string("config parse failure: ") + e.what());
    }
    if (cfg.contains("command") &&
        cfg.at("command").get<std::string>() != command)
      throw config_error("config 'command' does not match subcommand");

    cli::CommonOpts opts;
    opts.seed = cfg.contains("seed")
                    ? cfg.at("seed").get<std::uint64_t>()
                    : 0;
    if (app.get_subcommands().front()->count("--seed")) opts.seed = seed;
    opts.out = cli::str_or(cfg, "out", "out");
    if (!out_dir.empty()) opts.out = out_dir;
    opts.threads = cfg.contains("threads")
                       ? cfg.at("threads").get<int>()
                       : default_threads();
    if (threads > 0) opts.threads = threads;
    opts.dry_run = dry_run;
    return cli::run_command(command, cfg, opts);
  } catch (const config_error& e) {
    log_error(e.what());
    return 2;
  } catch (const numerical_error& e) {
    log_error(e.what());
    return 3;
  } catch (const std::exception& e) {
    log_error(e.what());
    return 3;
  }
}
