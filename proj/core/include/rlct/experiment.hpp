#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rlct/bounds.hpp"
#include "rlct/gen_error.hpp"
#include "rlct/mcmc.hpp"
#include "rlct/model.hpp"

namespace rlct {

enum class OutputFormat { kCsv, kJson };

struct ExperimentConfig {
  std::vector<ModelSpec> cells;
  PriorSpec prior = GaussianPrior{1.0};
  McmcConfig mcmc;
  GenErrorConfig gen;
  std::uint64_t master_seed = 20230101;
  std::size_t workers = 1;
  std::optional<std::filesystem::path> output_path;
  OutputFormat format = OutputFormat::kCsv;
  bool bounds_only = false;
  std::optional<std::filesystem::path> dump_chains;

  /// Throws ConfigError; cell problems name the cell index.
  void validate() const;
};

/// Paper-scale sampling budget: n = 100, 10 trials, 10000 test draws,
/// 1000 posterior draws.
void apply_paper_profile(ExperimentConfig& config);
/// CI budget: n = 100, 3 trials, 2000 test draws, 300 posterior draws.
void apply_quick_profile(ExperimentConfig& config);

/// The fifteen cells I = J = K in {2, 3, 4}, H = 2 H0, H0 in {1..5}, n = 100.
[[nodiscard]] std::vector<ModelSpec> table1_cells();
[[nodiscard]] ExperimentConfig table1_config(bool quick = false);

enum class CellStatus { kBoundsOnly, kOk, kDiverged };

struct CellReport {
  ModelSpec spec;
  RlctBound bound;
  std::optional<LambdaEstimate> estimate;
  CellStatus status = CellStatus::kBoundsOnly;
  std::string error;

  /// lambda_hat / bound when an estimate exists.
  [[nodiscard]] std::optional<double> tightness_ratio() const;
};

/// master_seed -> cell seed. Trials derive their own seeds from the cell seed.
[[nodiscard]] std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t cell_index);

/// Runs every cell. Bounds are exact; estimates use the Monte Carlo pipeline
/// with all (cell, trial) pairs shared across `workers` threads. A diverged
/// cell is reported and the others complete.
[[nodiscard]] std::vector<CellReport> run_experiment(const ExperimentConfig& config);

[[nodiscard]] const char* to_string(CellStatus status) noexcept;

/// CSV columns: I,J,K,H,H0,n,core_term,m1,m2,m3,lambda_bound,lambda_hat,
/// lambda_std,tightness_ratio,accept_rate,rhat. Missing estimates are empty.
void write_csv(std::ostream& out, const std::vector<CellReport>& reports);
/// JSON array of cell reports, same field set for every status.
void write_json(std::ostream& out, const std::vector<CellReport>& reports);
/// One JSON object per trial (JSON lines).
void write_trial_records(std::ostream& out, const ExperimentConfig& config,
                         const std::vector<CellReport>& reports);
/// Human-readable table for stdout.
[[nodiscard]] std::string format_table(const std::vector<CellReport>& reports);
/// Human-readable bound breakdown, as printed by `rlct bound`.
[[nodiscard]] std::string format_bound(const ModelSpec& spec, const RlctBound& bound);

/// Writes the table (csv/json) to config.output_path and trial records next
/// to it as <output>.trials.jsonl. No-op without an output path.
void write_outputs(const ExperimentConfig& config, const std::vector<CellReport>& reports);

}  // namespace rlct
