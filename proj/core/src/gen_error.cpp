#include "rlct/gen_error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "rlct/errors.hpp"
#include "rlct/seeding.hpp"

namespace rlct {

PredictiveDensity::PredictiveDensity(const PosteriorSamples& posterior) {
  if (posterior.samples.empty()) throw DomainError("predictive density needs at least one posterior sample");
  dims_ = posterior.samples.front().dims();
  count_ = posterior.samples.size();
  const std::size_t volume = dims_.volume();
  means_.resize(count_ * volume);
  for (std::size_t s = 0; s < count_; ++s) {
    const CpParams& w = posterior.samples[s];
    if (w.dims() != dims_) throw DimensionError("posterior samples have inconsistent dims");
    compose_into(dims_, w.rank(), w.flat(), std::span<double>(means_).subspan(s * volume, volume));
  }
  scratch_.resize(count_);
}

double PredictiveDensity::log_density(std::span<const double> x) const {
  const std::size_t volume = dims_.volume();
  if (x.size() != volume) throw DimensionError("predictive density: tensor dims differ from posterior dims");

  // log N(x | T_s, I) without the normalizing constant, per sample.
  double max_term = -std::numeric_limits<double>::infinity();
  const double* mean = means_.data();
  for (std::size_t s = 0; s < count_; ++s, mean += volume) {
    double sq = 0.0;
    for (std::size_t e = 0; e < volume; ++e) {
      const double d = x[e] - mean[e];
      sq += d * d;
    }
    scratch_[s] = -0.5 * sq;
    max_term = std::max(max_term, scratch_[s]);
  }
  double sum = 0.0;
  for (std::size_t s = 0; s < count_; ++s) sum += std::exp(scratch_[s] - max_term);
  const double lse = max_term + std::log(sum) - std::log(static_cast<double>(count_));
  return -0.5 * static_cast<double>(volume) * kLog2Pi + lse;
}

double PredictiveDensity::log_density(const Tensor3& x) const {
  if (x.dims() != dims_) throw DimensionError("predictive density: tensor dims differ from posterior dims");
  return log_density(x.values());
}

double predictive_log_density(const Tensor3& x, const PosteriorSamples& posterior) {
  return PredictiveDensity(posterior).log_density(x);
}

TrialResult estimate_gn(const CpParams& w0, const PosteriorSamples& posterior, std::size_t n_test,
                        std::uint64_t seed) {
  if (n_test < 1) throw DomainError("estimate_gn needs n_test >= 1");
  const PredictiveDensity predictive(posterior);
  if (predictive.dims() != w0.dims()) throw DimensionError("estimate_gn: truth and posterior dims differ");

  const Tensor3 truth_mean = compose(w0);
  const std::size_t volume = truth_mean.size();
  std::vector<double> x(volume);
  Rng rng(seed);

  // Welford running moments of log p(x|w0) - log p*(x).
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t t = 0; t < n_test; ++t) {
    sample_gaussian_tensor(truth_mean.values(), rng, x);
    double sq = 0.0;
    for (std::size_t e = 0; e < volume; ++e) {
      const double d = x[e] - truth_mean.values()[e];
      sq += d * d;
    }
    const double log_truth = -0.5 * static_cast<double>(volume) * kLog2Pi - 0.5 * sq;
    const double value = log_truth - predictive.log_density(x);
    const double delta = value - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (value - mean);
  }

  TrialResult out;
  out.g_n = mean;
  out.n_test = n_test;
  out.mc_stderr = n_test > 1 ? std::sqrt(m2 / static_cast<double>(n_test - 1) / static_cast<double>(n_test)) : 0.0;
  return out;
}

void GenErrorConfig::validate() const {
  if (n_test < 1) throw ConfigError("n_test must be >= 1");
  if (datasets_per_cell < 1) throw ConfigError("datasets_per_cell must be >= 1");
  if (truth_redraws < 1) throw ConfigError("truth_redraws must be >= 1");
}

double LambdaEstimate::trial_stderr() const noexcept {
  return trials.empty() ? 0.0 : lambda_std / std::sqrt(static_cast<double>(trials.size()));
}

double LambdaEstimate::mean_accept_rate() const noexcept {
  if (trials.empty()) return 0.0;
  double s = 0.0;
  for (const auto& t : trials) s += t.accept_rate;
  return s / static_cast<double>(trials.size());
}

double LambdaEstimate::max_rhat() const noexcept {
  double r = 0.0;
  for (const auto& t : trials) r = std::max(r, t.rhat);
  return r;
}

LambdaEstimate LambdaEstimate::from_trials(const ModelSpec& spec, std::vector<TrialResult> trials,
                                           std::size_t truth_redraws, std::size_t datasets_per_cell) {
  if (trials.empty()) throw DomainError("lambda estimate needs at least one trial");
  LambdaEstimate est;
  est.spec = spec;
  est.truth_redraws = truth_redraws;
  est.datasets_per_cell = datasets_per_cell;
  est.trials = std::move(trials);

  const double count = static_cast<double>(est.trials.size());
  double mean = 0.0;
  for (const auto& t : est.trials) mean += t.g_n;
  mean /= count;
  double var = 0.0;
  for (const auto& t : est.trials) var += (t.g_n - mean) * (t.g_n - mean);
  var = est.trials.size() > 1 ? var / (count - 1.0) : 0.0;

  const double n = static_cast<double>(spec.n);
  est.lambda_hat = n * mean;
  est.lambda_std = n * std::sqrt(var);
  return est;
}

TrialResult run_trial(const ModelSpec& spec, const PriorSpec& prior, const McmcConfig& mcmc, std::size_t n_test,
                      std::uint64_t cell_seed, std::size_t redraw, std::size_t dataset, const TraceSink& sink) {
  const auto truth_tag = static_cast<std::uint64_t>(Stream::kTruth);
  const auto data_tag = static_cast<std::uint64_t>(Stream::kData);
  const auto mcmc_tag = static_cast<std::uint64_t>(Stream::kMcmc);
  const auto test_tag = static_cast<std::uint64_t>(Stream::kTest);

  const CpParams w0 = draw_true_params(spec, derive_seed(cell_seed, {truth_tag, redraw}));
  if (!in_support(w0.flat(), prior)) {
    throw DomainError("true parameter of redraw " + std::to_string(redraw) + " lies outside the prior support");
  }
  const Dataset data = sample_dataset(w0, spec.n, derive_seed(cell_seed, {data_tag, redraw, dataset}));

  McmcConfig chain_config = mcmc;
  chain_config.seed = derive_seed(cell_seed, {mcmc_tag, redraw, dataset});
  PosteriorSamples posterior;
  try {
    posterior = run_chain(data, prior, chain_config, w0, spec.rank);
  } catch (const DivergenceError& e) {
    throw DivergenceError(std::string(e.what()) + " (redraw " + std::to_string(redraw) + ", dataset " +
                          std::to_string(dataset) + ")");
  }
  if (sink) sink(redraw, dataset, posterior);

  TrialResult out = estimate_gn(w0, posterior, n_test, derive_seed(cell_seed, {test_tag, redraw, dataset}));
  out.redraw = redraw;
  out.dataset = dataset;
  out.accept_rate = posterior.accept_rate;
  out.rhat = posterior.diagnostics.rhat;
  out.ess = posterior.diagnostics.ess;
  return out;
}

LambdaEstimate estimate_lambda(const ModelSpec& spec, const PriorSpec& prior, const McmcConfig& mcmc,
                               const GenErrorConfig& gen, std::uint64_t cell_seed, std::size_t workers) {
  spec.validate();
  gen.validate();
  mcmc.validate();
  validate_prior(prior);
  std::vector<TrialResult> trials(gen.trials());
  parallel_for(trials.size(), workers, [&](std::size_t t) {
    trials[t] = run_trial(spec, prior, mcmc, gen.n_test, cell_seed, t / gen.datasets_per_cell,
                          t % gen.datasets_per_cell);
  });
  return LambdaEstimate::from_trials(spec, std::move(trials), gen.truth_redraws, gen.datasets_per_cell);
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t idx = next++; idx < count; idx = next++) {
      try {
        fn(idx);
      } catch (...) {
        errors[idx] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work);
  }
  // Lowest index first, so the reported error does not depend on scheduling.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace rlct
