#include "rlct/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rlct {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); }

double sample_var(std::span<const double> x, double mean) {
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / (x.size() - 1);
}

// Between/within decomposition over equal-length sequences.
struct VarianceParts {
  double within = 0.0;         // W
  double between_over_n = 0.0; // B / n
  double var_plus = 0.0;
};

VarianceParts variance_parts(const std::vector<std::span<const double>>& seqs) {
  const std::size_t m = seqs.size();
  const double n = static_cast<double>(seqs.front().size());
  std::vector<double> means(m);
  double w = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = mean_of(seqs[j]);
    w += sample_var(seqs[j], means[j]);
  }
  w /= static_cast<double>(m);
  const double grand = mean_of(means);
  double b_over_n = 0.0;
  if (m > 1) {
    for (double mu : means) b_over_n += (mu - grand) * (mu - grand);
    b_over_n /= static_cast<double>(m - 1);
  }
  return {w, b_over_n, (n - 1.0) / n * w + b_over_n};
}

}  // namespace

double split_rhat(std::span<const std::vector<double>> chains) {
  if (chains.empty()) return kNaN;
  std::size_t len = chains.front().size();
  for (const auto& c : chains) len = std::min(len, c.size());
  const std::size_t half = len / 2;
  if (half < 2) return kNaN;

  std::vector<std::span<const double>> seqs;
  for (const auto& c : chains) {
    seqs.emplace_back(c.data(), half);
    seqs.emplace_back(c.data() + c.size() - half, half);
  }
  const VarianceParts p = variance_parts(seqs);
  if (p.within == 0.0) return p.between_over_n == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(p.var_plus / p.within);
}

double effective_sample_size(std::span<const std::vector<double>> chains) {
  if (chains.empty()) return kNaN;
  std::size_t len = chains.front().size();
  for (const auto& c : chains) len = std::min(len, c.size());
  if (len < 4) return kNaN;

  std::vector<std::span<const double>> seqs;
  for (const auto& c : chains) seqs.emplace_back(c.data(), len);
  const std::size_t m = seqs.size();
  const VarianceParts p = variance_parts(seqs);
  if (p.var_plus == 0.0) return static_cast<double>(m * len);

  // Mean autocovariance across chains, biased (1/n) estimator.
  std::vector<double> means(m);
  for (std::size_t j = 0; j < m; ++j) means[j] = mean_of(seqs[j]);
  auto rho = [&](std::size_t lag) {
    double acov = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t + lag < len; ++t) s += (seqs[j][t] - means[j]) * (seqs[j][t + lag] - means[j]);
      acov += s / static_cast<double>(len);
    }
    acov /= static_cast<double>(m);
    const double var_chain = p.within * (static_cast<double>(len) - 1.0) / static_cast<double>(len);
    return 1.0 - (var_chain - acov) / p.var_plus;
  };

  // Geyer initial positive, monotone sequence.
  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < len; ++k) {
    double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair < 0.0) break;
    pair = std::min(pair, prev_pair);
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  const double total = static_cast<double>(m * len);
  return total / std::max(tau, 1.0 / std::log10(total));
}

}  // namespace rlct
