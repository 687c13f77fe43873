#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include "rlct/model_spec.hpp"

namespace rlct {

/// Exact rational with denominator 8. Every quantity the bound is built from
/// (F values, the core term, half-parameter counts) is a multiple of 1/8.
class Eighths {
 public:
  constexpr Eighths() = default;
  static constexpr Eighths from_numerator(std::int64_t numerator) { return Eighths(numerator); }
  static constexpr Eighths from_integer(std::int64_t value) { return Eighths(8 * value); }
  static constexpr Eighths from_halves(std::int64_t halves) { return Eighths(4 * halves); }

  [[nodiscard]] constexpr std::int64_t numerator() const noexcept { return num_; }
  [[nodiscard]] constexpr double to_double() const noexcept { return static_cast<double>(num_) / 8.0; }

  constexpr Eighths operator+(Eighths rhs) const noexcept { return Eighths(num_ + rhs.num_); }
  constexpr Eighths operator-(Eighths rhs) const noexcept { return Eighths(num_ - rhs.num_); }
  constexpr auto operator<=>(const Eighths&) const = default;

  /// Shortest exact decimal, e.g. "14.5", "3", "2.375".
  [[nodiscard]] std::string to_string() const;

 private:
  constexpr explicit Eighths(std::int64_t n) : num_(n) {}
  std::int64_t num_ = 0;
};

/// RLCT of (||BA||^2, phi) for B in R^{N x H}, A in R^{H x M} (reduced-rank
/// regression). Throws DomainError if N < 1 or M < 1.
[[nodiscard]] Eighths rrr_rlct(std::int64_t n_rows, std::int64_t m_cols, std::int64_t rank);

struct ReferenceBounds {
  Eighths half_params;      // H(I+J+K)/2
  Eighths obvious_lambda1;  // H0(I+J+K)/2
};

[[nodiscard]] ReferenceBounds reference_bounds(const ModelSpec& spec);

struct RlctBound {
  Eighths core_term;  // (H0(I+J+K) - 2) / 2
  Eighths m1;         // F(IJ, K, H - H0)
  Eighths m2;         // F(JK, I, H - H0)
  Eighths m3;         // F(KI, J, H - H0)
  Eighths bound;      // core_term + min(m1, m2, m3)
  Eighths half_params;
  Eighths obvious_lambda1;

  /// 1, 2 or 3: the first m_i attaining the minimum.
  [[nodiscard]] int argmin() const noexcept;
};

/// Upper bound on the RLCT of the rank-H CP model at a true rank-H0 tensor.
/// Throws DomainError when H0 == 0 or H0 > H.
[[nodiscard]] RlctBound tensor_rlct_bound(const ModelSpec& spec);

}  // namespace rlct
