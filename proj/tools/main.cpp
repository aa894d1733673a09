#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "qbe/runner.hpp"

namespace {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const qbe::config_error*>(&e)) return 2;
  if (dynamic_cast<const qbe::validation_error*>(&e)) return 3;
  if (dynamic_cast<const qbe::divergence_error*>(&e)) return 4;
  return 1;
}

struct CommonOpts {
  std::string out;
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void apply_overrides(qbe::RunConfig& cfg, const CommonOpts& opts) {
  if (!opts.out.empty()) {
    cfg.out_dir = opts.out;
    cfg.raw["out_dir"] = opts.out;
  }
  if (opts.threads > 0) {
    cfg.threads = opts.threads;
    cfg.raw["threads"] = opts.threads;
  }
  if (opts.seed_set) {
    cfg.seed = opts.seed;
    cfg.raw["seed"] = opts.seed;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Q-tensor liquid-crystal simulation lab"};
  app.require_subcommand(1);

  std::string run_config, sweep_config, sweep_param, sweep_values;
  CommonOpts run_opts, sweep_opts;

  CLI::App* run_cmd = app.add_subcommand("run", "execute one experiment");
  run_cmd->add_option("config", run_config, "JSON config file")->required();
  run_cmd->add_option("--out", run_opts.out, "output directory override");
  run_cmd->add_option("--threads", run_opts.threads, "worker threads");
  run_cmd->add_option("--seed", run_opts.seed, "random seed override");

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "run one experiment over a parameter list");
  sweep_cmd->add_option("config", sweep_config, "JSON config file")->required();
  sweep_cmd->add_option("--param", sweep_param, "dotted config key, e.g. params.eps")
      ->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")
      ->required();
  sweep_cmd->add_option("--out", sweep_opts.out, "output directory override");
  sweep_cmd->add_option("--threads", sweep_opts.threads, "worker threads");
  sweep_cmd->add_option("--seed", sweep_opts.seed, "random seed override");

  run_cmd->callback([&] { run_opts.seed_set = run_cmd->count("--seed") > 0; });
  sweep_cmd->callback(
      [&] { sweep_opts.seed_set = sweep_cmd->count("--seed") > 0; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) {
      qbe::RunConfig cfg = qbe::RunConfig::from_file(run_config);
      apply_overrides(cfg, run_opts);
      qbe::RunResult r = qbe::run(cfg);
      for (const auto& [k, v] : r.metrics)
        std::printf("%s = %.17g\n", k.c_str(), v);
      return 0;
    }
    if (sweep_cmd->parsed()) {
      std::vector<double> values;
      std::string tok;
      for (std::size_t i = 0; i <= sweep_values.size(); ++i) {
        if (i == sweep_values.size() || sweep_values[i] == ',') {
          if (!tok.empty()) values.push_back(std::stod(tok));
          tok.clear();
        } else {
          tok += sweep_values[i];
        }
      }
      if (values.empty())
        throw qbe::config_error("sweep: --values parsed to an empty list");
      qbe::RunConfig cfg = qbe::RunConfig::from_file(sweep_config);
      apply_overrides(cfg, sweep_opts);
      qbe::SweepResult s = qbe::sweep(cfg, sweep_param, values);
      int failures = 0;
      for (const auto& row : s.rows) {
        std::printf("%s = %.10g -> status %d\n", sweep_param.c_str(), row.value,
                    row.status);
        if (row.status != 0) ++failures;
      }
      return failures == int(s.rows.size()) && failures > 0 ? 1 : 0;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: bad value list: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return 0;
}
