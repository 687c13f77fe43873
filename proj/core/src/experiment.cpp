#include "rlct/experiment.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rlct/errors.hpp"
#include "rlct/seeding.hpp"

namespace rlct {
namespace {

std::string csv_number(std::optional<double> v) { return v ? fmt::format("{}", *v) : std::string(); }

nlohmann::json json_number(std::optional<double> v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::string prior_name(const PriorSpec& prior) {
  return std::holds_alternative<GaussianPrior>(prior) ? "gaussian" : "uniform_box";
}

void dump_traces(const std::filesystem::path& dir, std::size_t cell, std::size_t redraw, std::size_t dataset,
                 const PosteriorSamples& posterior) {
  for (std::size_t chain = 0; chain < posterior.traces.size(); ++chain) {
    const auto path = dir / fmt::format("cell{}_redraw{}_dataset{}_chain{}.csv", cell, redraw, dataset, chain);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write chain trace " + path.string());
    out << "iteration,log_posterior,step,accepted\n";
    for (const TracePoint& p : posterior.traces[chain]) {
      out << fmt::format("{},{},{},{}\n", p.iteration, p.log_density, p.step, p.accepted ? 1 : 0);
    }
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (cells.empty()) throw ConfigError("experiment needs at least one cell");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  for (std::size_t c = 0; c < cells.size(); ++c) {
    try {
      if (cells[c].true_rank < 1) throw DomainError("H0 must be >= 1");
      cells[c].validate();
    } catch (const DomainError& e) {
      throw ConfigError(fmt::format("cell {}: {}", c, e.what()));
    }
  }
  try {
    validate_prior(prior);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!bounds_only) {
    mcmc.validate();
    gen.validate();
  }
}

void apply_paper_profile(ExperimentConfig& config) {
  config.mcmc.total_iters = 30000;
  config.mcmc.burn_in = 10000;
  config.mcmc.thin = 20;
  config.mcmc.target_samples = 1000;
  config.gen.n_test = 10000;
  config.gen.truth_redraws = 5;
  config.gen.datasets_per_cell = 2;
}

void apply_quick_profile(ExperimentConfig& config) {
  config.mcmc.total_iters = 12000;
  config.mcmc.burn_in = 4000;
  config.mcmc.thin = 20;
  config.mcmc.target_samples = 300;
  config.gen.n_test = 2000;
  config.gen.truth_redraws = 3;
  config.gen.datasets_per_cell = 1;
}

std::vector<ModelSpec> table1_cells() {
  std::vector<ModelSpec> cells;
  for (std::size_t d : {2, 3, 4}) {
    for (std::size_t h0 = 1; h0 <= 5; ++h0) cells.push_back({{d, d, d}, 2 * h0, h0, 100});
  }
  return cells;
}

ExperimentConfig table1_config(bool quick) {
  ExperimentConfig config;
  config.cells = table1_cells();
  if (quick) {
    apply_quick_profile(config);
  } else {
    apply_paper_profile(config);
  }
  return config;
}

std::optional<double> CellReport::tightness_ratio() const {
  if (!estimate) return std::nullopt;
  return estimate->lambda_hat / bound.bound.to_double();
}

std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t cell_index) {
  return derive_seed(master_seed, {cell_index});
}

std::vector<CellReport> run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<CellReport> reports;
  for (const ModelSpec& spec : config.cells) reports.push_back({spec, tensor_rlct_bound(spec), {}, {}, {}});
  if (config.bounds_only) return reports;

  McmcConfig mcmc = config.mcmc;
  if (config.dump_chains) {
    mcmc.record_trace = true;
    std::filesystem::create_directories(*config.dump_chains);
  }

  struct Task {
    std::size_t cell;
    std::size_t redraw;
    std::size_t dataset;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < config.cells.size(); ++c) {
    for (std::size_t r = 0; r < config.gen.truth_redraws; ++r) {
      for (std::size_t d = 0; d < config.gen.datasets_per_cell; ++d) tasks.push_back({c, r, d});
    }
  }
  std::vector<TrialResult> results(tasks.size());
  std::vector<std::string> divergences(tasks.size());

  parallel_for(tasks.size(), config.workers, [&](std::size_t idx) {
    const Task& task = tasks[idx];
    TraceSink sink;
    if (config.dump_chains) {
      sink = [&](std::size_t r, std::size_t d, const PosteriorSamples& p) {
        dump_traces(*config.dump_chains, task.cell, r, d, p);
      };
    }
    try {
      results[idx] = run_trial(config.cells[task.cell], config.prior, mcmc, config.gen.n_test,
                               cell_seed(config.master_seed, task.cell), task.redraw, task.dataset, sink);
    } catch (const DivergenceError& e) {
      divergences[idx] = e.what();
    }
  });

  const std::size_t per_cell = config.gen.trials();
  for (std::size_t c = 0; c < reports.size(); ++c) {
    std::vector<TrialResult> trials(results.begin() + c * per_cell, results.begin() + (c + 1) * per_cell);
    std::string error;
    for (std::size_t t = 0; t < per_cell && error.empty(); ++t) error = divergences[c * per_cell + t];
    if (!error.empty()) {
      reports[c].status = CellStatus::kDiverged;
      reports[c].error = error;
      continue;
    }
    reports[c].estimate = LambdaEstimate::from_trials(config.cells[c], std::move(trials), config.gen.truth_redraws,
                                                      config.gen.datasets_per_cell);
    reports[c].status = CellStatus::kOk;
  }
  return reports;
}

const char* to_string(CellStatus status) noexcept {
  switch (status) {
    case CellStatus::kBoundsOnly:
      return "bounds_only";
    case CellStatus::kOk:
      return "ok";
    case CellStatus::kDiverged:
      return "diverged";
  }
  return "unknown";
}

void write_csv(std::ostream& out, const std::vector<CellReport>& reports) {
  out << "I,J,K,H,H0,n,core_term,m1,m2,m3,lambda_bound,lambda_hat,lambda_std,tightness_ratio,accept_rate,rhat\n";
  for (const CellReport& r : reports) {
    const auto& s = r.spec;
    const auto& b = r.bound;
    std::optional<double> hat, sd, acc, rhat;
    if (r.estimate) {
      hat = r.estimate->lambda_hat;
      sd = r.estimate->lambda_std;
      acc = r.estimate->mean_accept_rate();
      rhat = r.estimate->max_rhat();
    }
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", s.dims.i, s.dims.j, s.dims.k, s.rank,
                       s.true_rank, s.n, b.core_term.to_string(), b.m1.to_string(), b.m2.to_string(),
                       b.m3.to_string(), b.bound.to_string(), csv_number(hat), csv_number(sd),
                       csv_number(r.tightness_ratio()), csv_number(acc), csv_number(rhat));
  }
}

void write_json(std::ostream& out, const std::vector<CellReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CellReport& r : reports) {
    const auto& s = r.spec;
    const auto& b = r.bound;
    const LambdaEstimate* e = r.estimate ? &*r.estimate : nullptr;
    nlohmann::json cell;
    cell["I"] = s.dims.i;
    cell["J"] = s.dims.j;
    cell["K"] = s.dims.k;
    cell["H"] = s.rank;
    cell["H0"] = s.true_rank;
    cell["n"] = s.n;
    cell["status"] = to_string(r.status);
    cell["error"] = r.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.error);
    cell["core_term"] = b.core_term.to_double();
    cell["m1"] = b.m1.to_double();
    cell["m2"] = b.m2.to_double();
    cell["m3"] = b.m3.to_double();
    cell["argmin_m"] = b.argmin();
    cell["lambda_bound"] = b.bound.to_double();
    cell["half_params"] = b.half_params.to_double();
    cell["obvious_lambda1"] = b.obvious_lambda1.to_double();
    cell["lambda_hat"] = json_number(e ? std::optional(e->lambda_hat) : std::nullopt);
    cell["lambda_std"] = json_number(e ? std::optional(e->lambda_std) : std::nullopt);
    cell["trial_stderr"] = json_number(e ? std::optional(e->trial_stderr()) : std::nullopt);
    cell["tightness_ratio"] = json_number(r.tightness_ratio());
    cell["accept_rate"] = json_number(e ? std::optional(e->mean_accept_rate()) : std::nullopt);
    cell["rhat"] = json_number(e ? std::optional(e->max_rhat()) : std::nullopt);
    cell["trials"] = e ? nlohmann::json(e->trials.size()) : nlohmann::json(nullptr);
    arr.push_back(std::move(cell));
  }
  out << arr.dump(2) << '\n';
}

void write_trial_records(std::ostream& out, const ExperimentConfig& config, const std::vector<CellReport>& reports) {
  for (std::size_t c = 0; c < reports.size(); ++c) {
    if (!reports[c].estimate) continue;
    const auto& s = reports[c].spec;
    for (const TrialResult& t : reports[c].estimate->trials) {
      nlohmann::json rec;
      rec["cell"] = c;
      rec["spec"] = {{"I", s.dims.i}, {"J", s.dims.j}, {"K", s.dims.k}, {"H", s.rank}, {"H0", s.true_rank},
                     {"n", s.n}};
      rec["prior"] = prior_name(config.prior);
      rec["master_seed"] = config.master_seed;
      rec["cell_seed"] = cell_seed(config.master_seed, c);
      rec["redraw"] = t.redraw;
      rec["dataset"] = t.dataset;
      rec["g_n"] = t.g_n;
      rec["n_test"] = t.n_test;
      rec["mc_stderr"] = t.mc_stderr;
      rec["accept_rate"] = t.accept_rate;
      rec["rhat"] = t.rhat;
      rec["ess"] = t.ess;
      out << rec.dump() << '\n';
    }
  }
}

std::string format_table(const std::vector<CellReport>& reports) {
  std::string out = fmt::format("{:>3} {:>3} {:>3} {:>3} {:>3} {:>5} | {:>8} | {:>15} | {:>6} | {:>6} | {:>6} | {}\n",
                                "I", "J", "K", "H", "H0", "n", "lambda_B", "lambda_hat", "ratio", "accept", "rhat",
                                "status");
  out += std::string(out.size() - 1, '-') + '\n';
  for (const CellReport& r : reports) {
    const auto& s = r.spec;
    std::string est = "-";
    std::string ratio = "-";
    std::string acc = "-";
    std::string rhat = "-";
    if (r.estimate) {
      est = fmt::format("{:.2f} +- {:.2f}", r.estimate->lambda_hat, r.estimate->lambda_std);
      ratio = fmt::format("{:.3f}", *r.tightness_ratio());
      acc = fmt::format("{:.3f}", r.estimate->mean_accept_rate());
      const double rh = r.estimate->max_rhat();
      rhat = fmt::format("{:.3f}{}", rh, rh > 1.2 ? "!" : "");
    }
    std::string status = to_string(r.status);
    if (!r.error.empty()) status += ": " + r.error;
    out += fmt::format("{:>3} {:>3} {:>3} {:>3} {:>3} {:>5} | {:>8.2f} | {:>15} | {:>6} | {:>6} | {:>6} | {}\n",
                       s.dims.i, s.dims.j, s.dims.k, s.rank, s.true_rank, s.n, r.bound.bound.to_double(), est, ratio,
                       acc, rhat, status);
  }
  return out;
}

std::string format_bound(const ModelSpec& spec, const RlctBound& b) {
  const std::size_t extra = spec.rank - spec.true_rank;
  const std::size_t i = spec.dims.i;
  const std::size_t j = spec.dims.j;
  const std::size_t k = spec.dims.k;
  std::string out = fmt::format("I={} J={} K={} H={} H0={}\n", i, j, k, spec.rank, spec.true_rank);
  out += fmt::format("core_term        {}\n", b.core_term.to_string());
  out += fmt::format("m1 = F({}, {}, {})  {}\n", i * j, k, extra, b.m1.to_string());
  out += fmt::format("m2 = F({}, {}, {})  {}\n", j * k, i, extra, b.m2.to_string());
  out += fmt::format("m3 = F({}, {}, {})  {}\n", k * i, j, extra, b.m3.to_string());
  out += fmt::format("min              m{}\n", b.argmin());
  out += fmt::format("bound            {}\n", b.bound.to_string());
  out += fmt::format("half_params      {}\n", b.half_params.to_string());
  out += fmt::format("obvious_lambda1  {}\n", b.obvious_lambda1.to_string());
  return out;
}

void write_outputs(const ExperimentConfig& config, const std::vector<CellReport>& reports) {
  if (!config.output_path) return;
  const auto& path = *config.output_path;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (config.format == OutputFormat::kJson) {
      write_json(out, reports);
    } else {
      write_csv(out, reports);
    }
  }
  if (!config.bounds_only) {
    std::ofstream trials(path.string() + ".trials.jsonl");
    if (!trials) throw std::runtime_error("cannot write trial records next to " + path.string());
    write_trial_records(trials, config, reports);
  }
}

}  // namespace rlct
