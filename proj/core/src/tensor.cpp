#include "rlct/tensor.hpp"

#include <cmath>
#include <string>

#include "rlct/errors.hpp"

namespace rlct {
namespace {

std::string dims_string(const Dims& d) {
  return std::to_string(d.i) + "x" + std::to_string(d.j) + "x" + std::to_string(d.k);
}

}  // namespace

Tensor3::Tensor3(Dims dims) : dims_(dims), values_(dims.volume(), 0.0) {}

Tensor3::Tensor3(Dims dims, std::vector<double> values) : dims_(dims), values_(std::move(values)) {
  if (values_.size() != dims_.volume()) {
    throw DimensionError("tensor of dims " + dims_string(dims_) + " needs " + std::to_string(dims_.volume()) +
                         " values, got " + std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("tensor entries must be finite");
  }
}

CpParams::CpParams(Dims dims, std::size_t rank) : dims_(dims), rank_(rank), flat_(dims.sum() * rank, 0.0) {}

CpParams::CpParams(Dims dims, std::size_t rank, std::vector<double> flat)
    : dims_(dims), rank_(rank), flat_(std::move(flat)) {
  if (flat_.size() != dims_.sum() * rank_) {
    throw DimensionError("factor matrices for dims " + dims_string(dims_) + " and rank " + std::to_string(rank_) +
                         " need " + std::to_string(dims_.sum() * rank_) + " values, got " +
                         std::to_string(flat_.size()));
  }
}

void compose_into(Dims dims, std::size_t rank, std::span<const double> flat, std::span<double> out) {
  if (flat.size() != dims.sum() * rank) throw DimensionError("compose: factor buffer does not match dims and rank");
  if (out.size() != dims.volume()) throw DimensionError("compose: output buffer does not match dims");

  const double* a = flat.data();
  const double* b = a + dims.i * rank;
  const double* c = b + dims.j * rank;
  double* t = out.data();
  for (std::size_t i = 0; i < dims.i; ++i) {
    const double* a_row = a + i * rank;
    for (std::size_t j = 0; j < dims.j; ++j) {
      const double* b_row = b + j * rank;
      for (std::size_t k = 0; k < dims.k; ++k) {
        const double* c_row = c + k * rank;
        double s = 0.0;
        for (std::size_t h = 0; h < rank; ++h) s += a_row[h] * b_row[h] * c_row[h];
        *t++ = s;
      }
    }
  }
}

Tensor3 compose(const CpParams& params) {
  Tensor3 out(params.dims());
  compose_into(params.dims(), params.rank(), params.flat(), out.values());
  return out;
}

double frobenius_sq(const Tensor3& t) noexcept {
  double s = 0.0;
  for (double v : t.values()) s += v * v;
  return s;
}

double squared_distance(const Tensor3& x, const Tensor3& y) {
  if (x.dims() != y.dims()) {
    throw DimensionError("tensor dims differ: " + dims_string(x.dims()) + " vs " + dims_string(y.dims()));
  }
  const auto xv = x.values();
  const auto yv = y.values();
  double s = 0.0;
  for (std::size_t n = 0; n < xv.size(); ++n) {
    const double d = xv[n] - yv[n];
    s += d * d;
  }
  return s;
}

double kl_divergence(const CpParams& w, const CpParams& w0) {
  if (w.dims() != w0.dims()) {
    throw DimensionError("kl_divergence: parameters have dims " + dims_string(w.dims()) + " and " +
                         dims_string(w0.dims()));
  }
  return 0.5 * squared_distance(compose(w), compose(w0));
}

}  // namespace rlct
