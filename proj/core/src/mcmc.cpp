#include "rlct/mcmc.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rlct/diagnostics.hpp"
#include "rlct/errors.hpp"
#include "rlct/seeding.hpp"

namespace rlct {
namespace {

constexpr double kAdaptGain = 0.5;
constexpr double kPaddingScale = 0.1;
constexpr double kOverdispersedScale = 1.5;
constexpr std::uint64_t kInitStream = 0x1417;

std::size_t chain_quota(const McmcConfig& config, std::size_t chain) {
  return config.target_samples / config.chains + (chain < config.target_samples % config.chains ? 1 : 0);
}

}  // namespace

std::size_t McmcConfig::retained_per_chain() const noexcept {
  return total_iters > burn_in && thin > 0 ? (total_iters - burn_in) / thin : 0;
}

void McmcConfig::validate() const {
  if (chains < 1) throw ConfigError("mcmc: chains must be >= 1");
  if (thin < 1) throw ConfigError("mcmc: thin must be >= 1");
  if (target_samples < 1) throw ConfigError("mcmc: target_samples must be >= 1");
  if (burn_in >= total_iters) throw ConfigError("mcmc: burn_in must be < total_iters");
  const std::size_t needed = (target_samples + chains - 1) / chains;
  if (retained_per_chain() < needed) {
    throw ConfigError("mcmc: (total_iters - burn_in) / thin = " + std::to_string(retained_per_chain()) +
                      " per chain, but target_samples / chains needs " + std::to_string(needed));
  }
  if (!(initial_step > 0.0)) throw ConfigError("mcmc: initial_step must be > 0");
  if (!(target_accept > 0.0 && target_accept < 1.0)) throw ConfigError("mcmc: target_accept must lie in (0, 1)");
}

MetropolisResult run_metropolis(const LogDensity& log_density, std::span<const std::vector<double>> initial_states,
                                const McmcConfig& config) {
  config.validate();
  if (initial_states.size() != config.chains) {
    throw ConfigError("mcmc: expected " + std::to_string(config.chains) + " initial states, got " +
                      std::to_string(initial_states.size()));
  }

  MetropolisResult result;
  const std::size_t retained = config.retained_per_chain();
  const std::size_t post_iters = config.total_iters - config.burn_in;
  std::vector<std::vector<double>> retained_lp(config.chains);
  std::size_t post_accepted = 0;

  for (std::size_t chain = 0; chain < config.chains; ++chain) {
    Rng rng(derive_seed(config.seed, {chain}));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    std::vector<double> state = initial_states[chain];
    std::vector<double> proposal(state.size());
    double lp = log_density(state);
    if (std::isnan(lp)) throw DivergenceError("mcmc: log density is NaN at the initial state of chain " +
                                              std::to_string(chain));
    if (lp == -std::numeric_limits<double>::infinity()) {
      throw ConfigError("mcmc: initial state of chain " + std::to_string(chain) + " is outside the support");
    }

    double step = config.initial_step;
    std::size_t window_accepted = 0;
    std::size_t window_count = 0;
    std::vector<std::vector<double>> kept;
    kept.reserve(retained);
    retained_lp[chain].reserve(retained);
    std::vector<TracePoint> trace;
    if (config.record_trace) trace.reserve(config.total_iters);

    for (std::size_t it = 0; it < config.total_iters; ++it) {
      for (std::size_t d = 0; d < state.size(); ++d) proposal[d] = state[d] + step * normal(rng);
      const double lp_new = log_density(proposal);
      if (std::isnan(lp_new)) {
        throw DivergenceError("mcmc: log density is NaN at iteration " + std::to_string(it) + " of chain " +
                              std::to_string(chain));
      }
      const double u = uniform(rng);
      const bool accepted = lp_new > -std::numeric_limits<double>::infinity() && std::log(u) < lp_new - lp;
      if (accepted) {
        state.swap(proposal);
        lp = lp_new;
      }
      if (config.record_trace) trace.push_back({it, lp, step, accepted});

      if (it < config.burn_in) {
        if (config.adapt_window > 0) {
          window_accepted += accepted ? 1 : 0;
          if (++window_count == config.adapt_window) {
            const double rate = static_cast<double>(window_accepted) / static_cast<double>(window_count);
            step *= std::exp(kAdaptGain * (rate - config.target_accept));
            window_accepted = 0;
            window_count = 0;
          }
        }
        continue;
      }
      post_accepted += accepted ? 1 : 0;
      if ((it - config.burn_in + 1) % config.thin == 0 && kept.size() < retained) {
        kept.push_back(state);
        retained_lp[chain].push_back(lp);
      }
    }

    const std::size_t quota = chain_quota(config, chain);
    for (std::size_t q = 0; q < quota; ++q) {
      const std::size_t idx = (q + 1) * retained / quota - 1;
      result.samples.push_back(kept[idx]);
      result.sample_log_density.push_back(retained_lp[chain][idx]);
    }
    result.final_steps.push_back(step);
    if (config.record_trace) result.traces.push_back(std::move(trace));
  }

  result.accept_rate = static_cast<double>(post_accepted) / static_cast<double>(post_iters * config.chains);
  result.diagnostics.rhat = split_rhat(retained_lp);
  result.diagnostics.ess = effective_sample_size(retained_lp);
  return result;
}

double log_posterior_unnorm(const CpParams& w, const Dataset& data, const PriorSpec& prior) {
  double total = log_prior(w, prior);
  if (total == kNegInf) return total;
  for (const Tensor3& x : data.tensors) total += log_likelihood(x, w);
  return total;
}

std::vector<std::vector<double>> initial_states(const CpParams& w0, std::size_t rank, const McmcConfig& config) {
  if (w0.rank() > rank) throw DimensionError("initial_states: true rank exceeds model rank");
  const Dims dims = w0.dims();
  std::vector<std::vector<double>> states;
  for (std::size_t chain = 0; chain < config.chains; ++chain) {
    Rng rng(derive_seed(config.seed, {kInitStream, chain}));
    CpParams w(dims, rank);
    if (config.init == InitMode::kOverdispersed) {
      std::normal_distribution<double> normal(0.0, kOverdispersedScale);
      for (double& v : w.flat()) v = normal(rng);
    } else {
      std::normal_distribution<double> normal(0.0, kPaddingScale);
      for (double& v : w.flat()) v = normal(rng);
      for (std::size_t h = 0; h < w0.rank(); ++h) {
        for (std::size_t i = 0; i < dims.i; ++i) w.a(i, h) = w0.a(i, h);
        for (std::size_t j = 0; j < dims.j; ++j) w.b(j, h) = w0.b(j, h);
        for (std::size_t k = 0; k < dims.k; ++k) w.c(k, h) = w0.c(k, h);
      }
    }
    states.emplace_back(w.flat().begin(), w.flat().end());
  }
  return states;
}

PosteriorSamples run_chain(const Dataset& data, const PriorSpec& prior, const McmcConfig& config,
                           const CpParams& w0, std::size_t rank) {
  if (w0.dims() != data.dims) throw DimensionError("run_chain: truth and dataset dims differ");
  validate_prior(prior);
  const DatasetStats stats = DatasetStats::from(data);
  const Dims dims = data.dims;
  std::vector<double> mean(dims.volume());

  const LogDensity target = [&](std::span<const double> flat) {
    const double lp = log_prior(flat, prior);
    if (lp == kNegInf) return lp;
    compose_into(dims, rank, flat, mean);
    return lp + stats.log_likelihood(mean);
  };

  const auto starts = initial_states(w0, rank, config);
  MetropolisResult run = run_metropolis(target, starts, config);

  PosteriorSamples out;
  out.samples.reserve(run.samples.size());
  for (auto& s : run.samples) out.samples.emplace_back(dims, rank, std::move(s));
  out.accept_rate = run.accept_rate;
  out.diagnostics = run.diagnostics;
  out.traces = std::move(run.traces);
  return out;
}

}  // namespace rlct
