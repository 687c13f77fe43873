// rlct: RLCT upper bounds and Monte Carlo RLCT estimates for the CP tensor model.
//
//   rlct bound I J K H H0
//   rlct table1 [--bounds-only] [--quick] [--config FILE] [--seed S] [--workers W]
//               [--output PATH] [--format csv|json] [--dump-chains DIR]
//   rlct experiment --config FILE [same flags as table1]
//
// Exit codes: 0 success, 1 usage or configuration error, 2 a cell diverged.

#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rlct/bounds.hpp"
#include "rlct/config.hpp"
#include "rlct/errors.hpp"
#include "rlct/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDiverged = 2;

struct RunFlags {
  std::string config_file;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string output;
  std::string format;
  std::string dump_chains;
  bool bounds_only = false;
  bool quick = false;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
};

void add_run_flags(CLI::App& cmd, RunFlags& flags, bool config_required) {
  auto* config = cmd.add_option("--config", flags.config_file, "INI experiment configuration")->check(CLI::ExistingFile);
  if (config_required) config->required();
  flags.seed_opt = cmd.add_option("--seed", flags.seed, "Master seed");
  flags.workers_opt = cmd.add_option("--workers", flags.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd.add_option("--output", flags.output, "Machine-readable table output path");
  cmd.add_option("--format", flags.format, "Output file format")->check(CLI::IsMember({"csv", "json"}));
  cmd.add_option("--dump-chains", flags.dump_chains, "Directory for per-chain trace CSVs");
  cmd.add_flag("--bounds-only", flags.bounds_only, "Compute exact bounds only; no sampling");
  cmd.add_flag("--quick", flags.quick, "Small sampling budget for smoke runs");
}

// defaults -> profile -> config file -> explicit flags
rlct::ExperimentConfig resolve_config(const RunFlags& flags, std::vector<rlct::ModelSpec> default_cells) {
  rlct::ExperimentConfig config;
  config.cells = std::move(default_cells);
  if (flags.quick) {
    rlct::apply_quick_profile(config);
  } else {
    rlct::apply_paper_profile(config);
  }
  if (!flags.config_file.empty()) rlct::apply_config(rlct::IniDocument::load(flags.config_file), config);
  if (flags.seed_opt->count() > 0) config.master_seed = flags.seed;
  if (flags.workers_opt->count() > 0) config.workers = flags.workers;
  if (!flags.output.empty()) config.output_path = flags.output;
  if (!flags.format.empty()) config.format = rlct::parse_output_format(flags.format);
  if (!flags.dump_chains.empty()) config.dump_chains = flags.dump_chains;
  if (flags.bounds_only) config.bounds_only = true;
  config.validate();
  return config;
}

int run(const rlct::ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const auto reports = rlct::run_experiment(config);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rlct::write_outputs(config, reports);

  std::cout << rlct::format_table(reports);
  std::cout << fmt::format("{} cell(s) in {:.2f} s\n", reports.size(), seconds);
  if (config.output_path) std::cout << "wrote " << config.output_path->string() << '\n';

  bool diverged = false;
  for (const auto& r : reports) {
    if (r.status == rlct::CellStatus::kDiverged) diverged = true;
    if (r.estimate && r.estimate->max_rhat() > 1.2) {
      std::cerr << fmt::format("warning: split-R-hat {:.3f} > 1.2 for I={} J={} K={} H={} H0={}\n",
                               r.estimate->max_rhat(), r.spec.dims.i, r.spec.dims.j, r.spec.dims.k, r.spec.rank,
                               r.spec.true_rank);
    }
  }
  return diverged ? kExitDiverged : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RLCT bounds and Bayesian generalization-error estimates for CP tensor decomposition"};
  app.require_subcommand(1);

  auto* bound_cmd = app.add_subcommand("bound", "Print the RLCT upper bound for one model");
  std::size_t dim_i = 0, dim_j = 0, dim_k = 0, rank = 0, true_rank = 0;
  bound_cmd->add_option("I", dim_i)->required();
  bound_cmd->add_option("J", dim_j)->required();
  bound_cmd->add_option("K", dim_k)->required();
  bound_cmd->add_option("H", rank)->required();
  bound_cmd->add_option("H0", true_rank)->required();

  RunFlags table_flags;
  auto* table_cmd = app.add_subcommand("table1", "Bounds versus estimates for I=J=K in {2,3,4}, H=2*H0, H0=1..5");
  add_run_flags(*table_cmd, table_flags, false);

  RunFlags exp_flags;
  auto* exp_cmd = app.add_subcommand("experiment", "Run the cells of a configuration file");
  add_run_flags(*exp_cmd, exp_flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (bound_cmd->parsed()) {
      const rlct::ModelSpec spec{{dim_i, dim_j, dim_k}, rank, true_rank, 1};
      std::cout << rlct::format_bound(spec, rlct::tensor_rlct_bound(spec));
      return kExitOk;
    }
    if (table_cmd->parsed()) return run(resolve_config(table_flags, rlct::table1_cells()));
    return run(resolve_config(exp_flags, {}));
  } catch (const rlct::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const rlct::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const rlct::DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
