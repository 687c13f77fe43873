#include "rlct/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "rlct/errors.hpp"

namespace rlct {
namespace {

constexpr int kMaxTruthAttempts = 100;
constexpr double kDegenerateColumnThreshold = 0.1;

bool has_degenerate_column(const CpParams& w) {
  const Dims& d = w.dims();
  for (std::size_t h = 0; h < w.rank(); ++h) {
    double max_a = 0.0;
    double max_b = 0.0;
    double max_c = 0.0;
    for (std::size_t i = 0; i < d.i; ++i) max_a = std::max(max_a, std::abs(w.a(i, h)));
    for (std::size_t j = 0; j < d.j; ++j) max_b = std::max(max_b, std::abs(w.b(j, h)));
    for (std::size_t k = 0; k < d.k; ++k) max_c = std::max(max_c, std::abs(w.c(k, h)));
    if (std::min({max_a, max_b, max_c}) < kDegenerateColumnThreshold) return true;
  }
  return false;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.precision(17);
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::vector<double> parse_csv_row(const std::string& line) {
  std::vector<double> row;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
  return row;
}

}  // namespace

void validate_prior(const PriorSpec& prior) {
  std::visit(
      [](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GaussianPrior>) {
          if (!(p.sigma > 0.0)) throw DomainError("gaussian prior needs sigma > 0");
        } else {
          if (!(p.half_width > 0.0)) throw DomainError("uniform_box prior needs half_width > 0");
        }
      },
      prior);
}

bool in_support(std::span<const double> flat, const PriorSpec& prior) {
  if (const auto* box = std::get_if<UniformBoxPrior>(&prior)) {
    return std::all_of(flat.begin(), flat.end(), [&](double v) { return std::abs(v) <= box->half_width; });
  }
  return true;
}

DatasetStats DatasetStats::from(const Dataset& data) {
  DatasetStats s;
  s.dims = data.dims;
  s.n = data.n();
  s.sum.assign(data.dims.volume(), 0.0);
  for (const Tensor3& x : data.tensors) {
    if (x.dims() != data.dims) throw DimensionError("dataset tensor dims differ from dataset dims");
    const auto v = x.values();
    for (std::size_t e = 0; e < v.size(); ++e) {
      s.sum[e] += v[e];
      s.sum_sq += v[e] * v[e];
    }
  }
  return s;
}

double DatasetStats::log_likelihood(std::span<const double> mean) const {
  if (mean.size() != sum.size()) throw DimensionError("mean tensor does not match dataset dims");
  double cross = 0.0;
  double norm = 0.0;
  for (std::size_t e = 0; e < mean.size(); ++e) {
    cross += sum[e] * mean[e];
    norm += mean[e] * mean[e];
  }
  const double residual = sum_sq - 2.0 * cross + static_cast<double>(n) * norm;
  return -0.5 * static_cast<double>(n * dims.volume()) * kLog2Pi - 0.5 * residual;
}

double log_likelihood(const Tensor3& x, const CpParams& w) {
  if (x.dims() != w.dims()) throw DimensionError("log_likelihood: data and parameter dims differ");
  return -0.5 * static_cast<double>(x.size()) * kLog2Pi - 0.5 * squared_distance(x, compose(w));
}

double log_prior(std::span<const double> flat, const PriorSpec& prior) {
  return std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GaussianPrior>) {
          double sq = 0.0;
          for (double v : flat) sq += v * v;
          const double d = static_cast<double>(flat.size());
          return -0.5 * sq / (p.sigma * p.sigma) - d * (std::log(p.sigma) + 0.5 * kLog2Pi);
        } else {
          for (double v : flat) {
            if (std::abs(v) > p.half_width) return kNegInf;
          }
          return 0.0;
        }
      },
      prior);
}

double log_prior(const CpParams& w, const PriorSpec& prior) { return log_prior(w.flat(), prior); }

CpParams draw_true_params(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CpParams w(spec.dims, spec.true_rank);
  for (int attempt = 0; attempt < kMaxTruthAttempts; ++attempt) {
    for (double& v : w.flat()) v = normal(rng);
    if (!has_degenerate_column(w)) return w;
  }
  throw std::runtime_error("draw_true_params: no non-degenerate draw in 100 attempts");
}

void sample_gaussian_tensor(std::span<const double> mean, Rng& rng, std::span<double> out) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t e = 0; e < mean.size(); ++e) out[e] = mean[e] + normal(rng);
}

Dataset sample_dataset(const CpParams& w0, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_dataset needs n >= 1");
  const Tensor3 mean = compose(w0);
  Rng rng(seed);
  Dataset data{w0.dims(), {}, seed};
  data.tensors.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    Tensor3 x(w0.dims());
    sample_gaussian_tensor(mean.values(), rng, x.values());
    data.tensors.push_back(std::move(x));
  }
  return data;
}

void save_dataset_json(const Dataset& data, const std::filesystem::path& path) {
  nlohmann::json j;
  j["dims"] = {data.dims.i, data.dims.j, data.dims.k};
  j["seed"] = data.seed;
  j["tensors"] = nlohmann::json::array();
  for (const Tensor3& x : data.tensors) {
    j["tensors"].push_back(std::vector<double>(x.values().begin(), x.values().end()));
  }
  auto out = open_out(path);
  out << j.dump() << '\n';
}

Dataset load_dataset_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  const nlohmann::json j = nlohmann::json::parse(in);
  const auto dims_vec = j.at("dims").get<std::vector<std::size_t>>();
  if (dims_vec.size() != 3) throw DimensionError(path.string() + ": dims must have three entries");
  Dataset data{{dims_vec[0], dims_vec[1], dims_vec[2]}, {}, j.value("seed", std::uint64_t{0})};
  for (const auto& t : j.at("tensors")) data.tensors.emplace_back(data.dims, t.get<std::vector<double>>());
  return data;
}

void save_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "I,J,K,seed\n" << data.dims.i << ',' << data.dims.j << ',' << data.dims.k << ',' << data.seed << '\n';
  for (const Tensor3& x : data.tensors) {
    const auto v = x.values();
    for (std::size_t e = 0; e < v.size(); ++e) out << (e ? "," : "") << v[e];
    out << '\n';
  }
}

Dataset load_dataset_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("I,J,K", 0) != 0) {
    throw std::runtime_error(path.string() + ": missing I,J,K,seed header");
  }
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing dims row");
  std::stringstream ss(line);
  std::string cell;
  std::vector<std::string> head;
  while (std::getline(ss, cell, ',')) head.push_back(cell);
  if (head.size() != 4) throw std::runtime_error(path.string() + ": dims row must be I,J,K,seed");
  Dataset data{{std::stoul(head[0]), std::stoul(head[1]), std::stoul(head[2])}, {}, std::stoull(head[3])};
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    data.tensors.emplace_back(data.dims, parse_csv_row(line));
  }
  return data;
}

}  // namespace rlct
