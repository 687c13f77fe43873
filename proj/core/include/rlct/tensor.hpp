#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rlct {

/// Mode sizes (I, J, K) of a 3-way tensor.
struct Dims {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;

  [[nodiscard]] constexpr std::size_t volume() const noexcept { return i * j * k; }
  [[nodiscard]] constexpr std::size_t sum() const noexcept { return i + j + k; }
  friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

/// Dense I x J x K tensor, row-major over (i, j, k).
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Dims dims);
  Tensor3(Dims dims, std::vector<double> values);

  [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

  [[nodiscard]] double& operator()(std::size_t i, std::size_t j, std::size_t k) noexcept {
    return values_[(i * dims_.j + j) * dims_.k + k];
  }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return values_[(i * dims_.j + j) * dims_.k + k];
  }

  [[nodiscard]] std::span<double> values() noexcept { return values_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  Dims dims_{};
  std::vector<double> values_;
};

/// Factor matrices (A, B, C) of a rank-H CP model, stored contiguously as
/// [A | B | C], each block row-major with H columns.
class CpParams {
 public:
  CpParams() = default;
  CpParams(Dims dims, std::size_t rank);
  CpParams(Dims dims, std::size_t rank, std::vector<double> flat);

  [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
  [[nodiscard]] std::size_t rank() const noexcept { return rank_; }
  /// Number of real parameters, H(I+J+K).
  [[nodiscard]] std::size_t size() const noexcept { return flat_.size(); }

  [[nodiscard]] double& a(std::size_t i, std::size_t h) noexcept { return flat_[i * rank_ + h]; }
  [[nodiscard]] double& b(std::size_t j, std::size_t h) noexcept {
    return flat_[(dims_.i + j) * rank_ + h];
  }
  [[nodiscard]] double& c(std::size_t k, std::size_t h) noexcept {
    return flat_[(dims_.i + dims_.j + k) * rank_ + h];
  }
  [[nodiscard]] double a(std::size_t i, std::size_t h) const noexcept { return flat_[i * rank_ + h]; }
  [[nodiscard]] double b(std::size_t j, std::size_t h) const noexcept {
    return flat_[(dims_.i + j) * rank_ + h];
  }
  [[nodiscard]] double c(std::size_t k, std::size_t h) const noexcept {
    return flat_[(dims_.i + dims_.j + k) * rank_ + h];
  }

  [[nodiscard]] std::span<double> flat() noexcept { return flat_; }
  [[nodiscard]] std::span<const double> flat() const noexcept { return flat_; }

  friend bool operator==(const CpParams&, const CpParams&) = default;

 private:
  Dims dims_{};
  std::size_t rank_ = 0;
  std::vector<double> flat_;
};

/// T_ijk = sum_h A_ih B_jh C_kh.
[[nodiscard]] Tensor3 compose(const CpParams& params);

/// Allocation-free composition over a flat [A | B | C] buffer. `out` must hold
/// dims.volume() entries.
void compose_into(Dims dims, std::size_t rank, std::span<const double> flat, std::span<double> out);

[[nodiscard]] double frobenius_sq(const Tensor3& t) noexcept;

/// ||x - y||^2; throws DimensionError when shapes differ.
[[nodiscard]] double squared_distance(const Tensor3& x, const Tensor3& y);

/// Exact KL divergence between the unit-variance Gaussian models at w and w0,
/// 0.5 * ||compose(w) - compose(w0)||^2. Ranks may differ.
[[nodiscard]] double kl_divergence(const CpParams& w, const CpParams& w0);

}  // namespace rlct
