#include "rlct/bounds.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "rlct/errors.hpp"

namespace rlct {

std::string Eighths::to_string() const {
  const std::int64_t whole = num_ / 8;
  std::int64_t frac = std::abs(num_ % 8);
  std::string out = (num_ < 0 && whole == 0) ? "-0" : std::to_string(whole);
  if (frac == 0) return out;
  // frac/8 has at most three decimal digits.
  std::string digits = std::to_string(frac * 125);
  digits.insert(0, 3 - digits.size(), '0');
  while (digits.back() == '0') digits.pop_back();
  return out + "." + digits;
}

Eighths rrr_rlct(std::int64_t n_rows, std::int64_t m_cols, std::int64_t rank) {
  const std::int64_t n = n_rows;
  const std::int64_t m = m_cols;
  const std::int64_t h = rank;
  if (n < 1 || m < 1 || h < 0) {
    throw DomainError("F(N, M, H) needs N >= 1, M >= 1, H >= 0 (got " + std::to_string(n) + ", " +
                      std::to_string(m) + ", " + std::to_string(h) + ")");
  }
  if (std::abs(n - m) <= h && h <= n + m) {
    std::int64_t num = 2 * (n * m + m * h + h * n) - (n * n + m * m + h * h);
    if ((h + m - n) % 2 != 0) num += 1;
    return Eighths::from_numerator(num);
  }
  if (h <= n - m) return Eighths::from_halves(m * h);
  if (h <= m - n) return Eighths::from_halves(n * h);
  if (m + n <= h) return Eighths::from_halves(n * m);
  throw std::logic_error("F(N, M, H): no case matched");
}

ReferenceBounds reference_bounds(const ModelSpec& spec) {
  spec.validate();
  const auto total = static_cast<std::int64_t>(spec.dims.sum());
  return {Eighths::from_halves(static_cast<std::int64_t>(spec.rank) * total),
          Eighths::from_halves(static_cast<std::int64_t>(spec.true_rank) * total)};
}

int RlctBound::argmin() const noexcept {
  if (m1 <= m2 && m1 <= m3) return 1;
  if (m2 <= m3) return 2;
  return 3;
}

RlctBound tensor_rlct_bound(const ModelSpec& spec) {
  if (spec.true_rank == 0) throw DomainError("H0 must be >= 1");
  spec.validate();

  const auto i = static_cast<std::int64_t>(spec.dims.i);
  const auto j = static_cast<std::int64_t>(spec.dims.j);
  const auto k = static_cast<std::int64_t>(spec.dims.k);
  const auto h0 = static_cast<std::int64_t>(spec.true_rank);
  const auto extra = static_cast<std::int64_t>(spec.rank) - h0;

  RlctBound out;
  out.core_term = Eighths::from_halves(h0 * (i + j + k) - 2);
  out.m1 = rrr_rlct(i * j, k, extra);
  out.m2 = rrr_rlct(j * k, i, extra);
  out.m3 = rrr_rlct(k * i, j, extra);
  out.bound = out.core_term + std::min({out.m1, out.m2, out.m3});
  const ReferenceBounds refs = reference_bounds(spec);
  out.half_params = refs.half_params;
  out.obvious_lambda1 = refs.obvious_lambda1;
  return out;
}

}  // namespace rlct
