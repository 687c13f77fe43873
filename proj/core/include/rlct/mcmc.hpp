#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rlct/model.hpp"
#include "rlct/tensor.hpp"

namespace rlct {

enum class InitMode {
  kNearTruth,      // w0 padded with N(0, 0.1^2) extra columns
  kOverdispersed,  // every entry N(0, 1.5^2)
};

struct McmcConfig {
  std::size_t total_iters = 30000;
  std::size_t burn_in = 10000;
  std::size_t thin = 20;
  std::size_t target_samples = 1000;
  double initial_step = 0.05;
  std::size_t adapt_window = 50;  // 0 disables step adaptation
  double target_accept = 0.3;
  std::size_t chains = 4;
  std::uint64_t seed = 0;
  InitMode init = InitMode::kNearTruth;
  bool record_trace = false;

  /// Number of post-burn-in states each chain keeps before pooling.
  [[nodiscard]] std::size_t retained_per_chain() const noexcept;

  /// Throws ConfigError on inconsistent counts.
  void validate() const;
};

struct TracePoint {
  std::size_t iteration = 0;
  double log_density = 0.0;
  double step = 0.0;
  bool accepted = false;
};

struct ChainDiagnostics {
  double rhat = 0.0;  // split-R-hat of the log density
  double ess = 0.0;   // effective sample size of the log density
};

/// Output of the generic sampler over flat real vectors.
struct MetropolisResult {
  std::vector<std::vector<double>> samples;  // pooled, exactly target_samples
  std::vector<double> sample_log_density;    // log density of each pooled sample
  double accept_rate = 0.0;                  // post-burn-in, all chains
  ChainDiagnostics diagnostics;
  std::vector<double> final_steps;           // per chain
  std::vector<std::vector<TracePoint>> traces;  // per chain, if record_trace
};

using LogDensity = std::function<double(std::span<const double>)>;

/// Random-walk Metropolis with N(0, step^2 I) proposals, one chain per entry of
/// `initial_states`. The step is rescaled by exp(0.5 (accept - target)) every
/// adapt_window iterations during burn-in and frozen afterwards. Chains are
/// thinned, then evenly subsampled and pooled in chain order.
[[nodiscard]] MetropolisResult run_metropolis(const LogDensity& log_density,
                                              std::span<const std::vector<double>> initial_states,
                                              const McmcConfig& config);

/// Posterior draws of (A, B, C).
struct PosteriorSamples {
  std::vector<CpParams> samples;
  double accept_rate = 0.0;
  ChainDiagnostics diagnostics;
  std::vector<std::vector<TracePoint>> traces;
};

/// log phi(w) + sum_i log p(X_i | w), summing tensor by tensor.
[[nodiscard]] double log_posterior_unnorm(const CpParams& w, const Dataset& data, const PriorSpec& prior);

/// Starting point of each chain for a rank-`rank` model around the truth `w0`.
[[nodiscard]] std::vector<std::vector<double>> initial_states(const CpParams& w0, std::size_t rank,
                                                              const McmcConfig& config);

/// Samples the posterior of the rank-`rank` CP model given `data`.
[[nodiscard]] PosteriorSamples run_chain(const Dataset& data, const PriorSpec& prior, const McmcConfig& config,
                                         const CpParams& w0, std::size_t rank);

}  // namespace rlct
