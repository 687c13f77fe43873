#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rlct/mcmc.hpp"
#include "rlct/model.hpp"
#include "rlct/model_spec.hpp"

namespace rlct {

/// Posterior predictive density p*(x | X^n) over a fixed set of draws. The
/// composed mean of every draw is cached so each evaluation is one pass of
/// dot products followed by a max-shifted log-sum-exp.
class PredictiveDensity {
 public:
  explicit PredictiveDensity(const PosteriorSamples& posterior);

  [[nodiscard]] double log_density(std::span<const double> x) const;
  [[nodiscard]] double log_density(const Tensor3& x) const;
  [[nodiscard]] const Dims& dims() const noexcept { return dims_; }

 private:
  Dims dims_{};
  std::size_t count_ = 0;
  std::vector<double> means_;       // count_ x volume, row-major
  std::vector<double> half_norms_;  // 0.5 ||T_s||^2
  mutable std::vector<double> scratch_;
};

/// log((1/S) sum_s p(x | w_s)). Throws DomainError for an empty sample set.
[[nodiscard]] double predictive_log_density(const Tensor3& x, const PosteriorSamples& posterior);

struct TrialResult {
  double g_n = 0.0;
  std::size_t n_test = 0;
  double mc_stderr = 0.0;
  // Provenance and sampler health, filled by run_trial.
  std::size_t redraw = 0;
  std::size_t dataset = 0;
  double accept_rate = 0.0;
  double rhat = 0.0;
  double ess = 0.0;
};

/// Monte Carlo estimate of G_n = E_x[log p(x|w0) - log p*(x|X^n)] from n_test
/// fresh draws x ~ p(.|w0).
[[nodiscard]] TrialResult estimate_gn(const CpParams& w0, const PosteriorSamples& posterior,
                                      std::size_t n_test, std::uint64_t seed);

struct GenErrorConfig {
  std::size_t n_test = 10000;
  std::size_t datasets_per_cell = 2;
  std::size_t truth_redraws = 5;

  void validate() const;
  [[nodiscard]] std::size_t trials() const noexcept { return datasets_per_cell * truth_redraws; }
};

struct LambdaEstimate {
  ModelSpec spec;
  std::vector<TrialResult> trials;
  double lambda_hat = 0.0;  // n * mean(g_n)
  double lambda_std = 0.0;  // n * sample stddev(g_n)
  std::size_t truth_redraws = 0;
  std::size_t datasets_per_cell = 0;

  /// lambda_std / sqrt(trial count).
  [[nodiscard]] double trial_stderr() const noexcept;
  [[nodiscard]] double mean_accept_rate() const noexcept;
  [[nodiscard]] double max_rhat() const noexcept;

  /// Assembles the estimate from trials ordered by (redraw, dataset).
  [[nodiscard]] static LambdaEstimate from_trials(const ModelSpec& spec, std::vector<TrialResult> trials,
                                                  std::size_t truth_redraws, std::size_t datasets_per_cell);
};

/// Per-trial hook, e.g. for chain-trace dumps. Called from worker threads.
using TraceSink = std::function<void(std::size_t redraw, std::size_t dataset, const PosteriorSamples&)>;

/// One (redraw, dataset) trial. Seeds derive from `cell_seed` only, so a trial
/// reproduces in isolation.
[[nodiscard]] TrialResult run_trial(const ModelSpec& spec, const PriorSpec& prior, const McmcConfig& mcmc,
                                    std::size_t n_test, std::uint64_t cell_seed, std::size_t redraw,
                                    std::size_t dataset, const TraceSink& sink = {});

/// lambda_hat = n * mean G_n over truth_redraws x datasets_per_cell trials.
/// Trials run on `workers` threads; the result does not depend on `workers`.
[[nodiscard]] LambdaEstimate estimate_lambda(const ModelSpec& spec, const PriorSpec& prior,
                                             const McmcConfig& mcmc, const GenErrorConfig& gen,
                                             std::uint64_t cell_seed, std::size_t workers = 1);

/// Runs fn(0) ... fn(count - 1) on up to `workers` threads.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace rlct
