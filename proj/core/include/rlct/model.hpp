#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <variant>
#include <vector>

#include "rlct/model_spec.hpp"
#include "rlct/seeding.hpp"
#include "rlct/tensor.hpp"

namespace rlct {

inline constexpr double kLog2Pi = 1.8378770664093454836;
/// Returned by log densities outside the prior support.
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct GaussianPrior {
  double sigma = 1.0;
};

/// Flat (unnormalized) prior on [-half_width, half_width]^d.
struct UniformBoxPrior {
  double half_width = 5.0;
};

using PriorSpec = std::variant<GaussianPrior, UniformBoxPrior>;

/// Throws DomainError for a non-positive scale.
void validate_prior(const PriorSpec& prior);

/// True when every entry of `flat` lies inside the prior support.
[[nodiscard]] bool in_support(std::span<const double> flat, const PriorSpec& prior);

/// Training sample X^n drawn from the model at some true parameter.
struct Dataset {
  Dims dims{};
  std::vector<Tensor3> tensors;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t n() const noexcept { return tensors.size(); }
};

/// Sufficient statistics of a dataset under the unit-variance Gaussian model:
///   sum_i ||X_i - T||^2 = sum_sq - 2 <sum, T> + n ||T||^2.
struct DatasetStats {
  Dims dims{};
  std::size_t n = 0;
  std::vector<double> sum;  // sum_i X_i, row-major
  double sum_sq = 0.0;      // sum_i ||X_i||^2

  [[nodiscard]] static DatasetStats from(const Dataset& data);

  /// sum_i log p(X_i | T) for a mean tensor given as a row-major buffer.
  [[nodiscard]] double log_likelihood(std::span<const double> mean) const;
};

/// log p(x | w) = -(IJK/2) log(2 pi) - 0.5 ||x - compose(w)||^2.
[[nodiscard]] double log_likelihood(const Tensor3& x, const CpParams& w);

/// Prior log-density; kNegInf outside the support of a uniform box.
[[nodiscard]] double log_prior(std::span<const double> flat, const PriorSpec& prior);
[[nodiscard]] double log_prior(const CpParams& w, const PriorSpec& prior);

/// True parameter (A0, B0, C0) of rank H0 with i.i.d. standard-normal entries.
/// A draw is rejected when any factor column has max |entry| < 0.1.
[[nodiscard]] CpParams draw_true_params(const ModelSpec& spec, std::uint64_t seed);

/// n tensors with independent N(compose(w0)_ijk, 1) entries.
[[nodiscard]] Dataset sample_dataset(const CpParams& w0, std::size_t n, std::uint64_t seed);

/// Draws one tensor from N(mean, I) into `out`.
void sample_gaussian_tensor(std::span<const double> mean, Rng& rng, std::span<double> out);

// Dataset export / import. JSON: {"dims":[I,J,K],"seed":s,"tensors":[[...],...]}.
// CSV: header "i,j,k" dims line, then one row-major row per tensor.
void save_dataset_json(const Dataset& data, const std::filesystem::path& path);
[[nodiscard]] Dataset load_dataset_json(const std::filesystem::path& path);
void save_dataset_csv(const Dataset& data, const std::filesystem::path& path);
[[nodiscard]] Dataset load_dataset_csv(const std::filesystem::path& path);

}  // namespace rlct
