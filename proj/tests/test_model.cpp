#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include "rlct/errors.hpp"
#include "rlct/model.hpp"
#include "test_support.hpp"

namespace rlct {
namespace {

using testing::random_params;

TEST(LogLikelihood, ZeroResidualIsNormalizingConstant) {
  const CpParams w({1, 1, 1}, 1, {1.5, -2.0, 0.5});
  EXPECT_DOUBLE_EQ(log_likelihood(compose(w), w), -0.5 * std::log(2.0 * M_PI));
}

TEST(LogLikelihood, UnitResidual) {
  const CpParams w({1, 1, 1}, 1, {0.0, 1.0, 1.0});
  EXPECT_DOUBLE_EQ(log_likelihood(Tensor3({1, 1, 1}, {1.0}), w), -0.5 * std::log(2.0 * M_PI) - 0.5);
}

TEST(LogLikelihood, DimensionMismatch) {
  EXPECT_THROW((void)log_likelihood(Tensor3({2, 2, 2}), CpParams({2, 2, 1}, 1)), DimensionError);
}

TEST(LogLikelihood, DatasetSumIsJointLogDensity) {
  const CpParams w({1, 1, 1}, 1, {0.7, 1.1, -0.4});
  const double mean = 0.7 * 1.1 * -0.4;
  const Dataset data = sample_dataset(w, 5, 99);
  double joint = 1.0;
  double total = 0.0;
  for (const Tensor3& x : data.tensors) {
    const double r = x(0, 0, 0) - mean;
    joint *= std::exp(-0.5 * r * r) / std::sqrt(2.0 * M_PI);
    total += log_likelihood(x, w);
  }
  EXPECT_NEAR(total, std::log(joint), 1e-12);
}

TEST(LogLikelihood, DensityIntegratesToOne) {
  // Composite Simpson over [c - 20, c + 20] for I = J = K = 1.
  const CpParams w({1, 1, 1}, 1, {1.3, 0.8, 2.0});
  const double c = 1.3 * 0.8 * 2.0;
  constexpr int kIntervals = 20000;
  const double lo = c - 20.0;
  const double step = 40.0 / kIntervals;
  double sum = 0.0;
  for (int s = 0; s <= kIntervals; ++s) {
    const double weight = (s == 0 || s == kIntervals) ? 1.0 : (s % 2 ? 4.0 : 2.0);
    sum += weight * std::exp(log_likelihood(Tensor3({1, 1, 1}, {lo + s * step}), w));
  }
  EXPECT_NEAR(sum * step / 3.0, 1.0, 1e-6);
}

TEST(LogLikelihood, AverageLogRatioConvergesToMinusKl) {
  std::mt19937_64 rng(41);
  const CpParams w0 = random_params({2, 2, 2}, 1, rng);
  const CpParams w = random_params({2, 2, 2}, 2, rng);
  constexpr std::size_t kDraws = 100000;
  const Dataset xs = sample_dataset(w0, kDraws, 4242);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const Tensor3& x : xs.tensors) {
    const double v = log_likelihood(x, w) - log_likelihood(x, w0);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / kDraws;
  const double se = std::sqrt((sum_sq / kDraws - mean * mean) / kDraws);
  EXPECT_NEAR(mean, -kl_divergence(w, w0), 3.0 * se);
}

TEST(DatasetStats, MatchesTensorByTensorSum) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const Dims d{1 + rng() % 4, 1 + rng() % 4, 1 + rng() % 4};
    const CpParams w0 = random_params(d, 2, rng);
    const CpParams w = random_params(d, 3, rng);
    const Dataset data = sample_dataset(w0, 1 + rng() % 50, rng());
    double direct = 0.0;
    for (const Tensor3& x : data.tensors) direct += log_likelihood(x, w);
    const DatasetStats stats = DatasetStats::from(data);
    const Tensor3 mean = compose(w);
    EXPECT_NEAR(stats.log_likelihood(mean.values()), direct, 1e-9 * std::abs(direct));
  }
}

TEST(LogPrior, GaussianAtMode) {
  const CpParams w({2, 3, 1}, 2);
  const double d = static_cast<double>(w.size());
  EXPECT_NEAR(log_prior(w, GaussianPrior{1.0}), -(d / 2.0) * std::log(2.0 * M_PI), 1e-12);
}

TEST(LogPrior, GaussianMatchesNormalDensity) {
  const CpParams w({1, 1, 1}, 1, {0.5, -1.0, 2.0});
  const double sigma = 1.7;
  double expected = 0.0;
  for (double v : {0.5, -1.0, 2.0}) expected += -0.5 * (v / sigma) * (v / sigma) - std::log(sigma * std::sqrt(2 * M_PI));
  EXPECT_NEAR(log_prior(w, GaussianPrior{sigma}), expected, 1e-12);
}

TEST(LogPrior, UniformBoxSupport) {
  CpParams w({2, 2, 2}, 1, {5.0, -5.0, 1, 2, 3, 4});
  EXPECT_EQ(log_prior(w, UniformBoxPrior{5.0}), 0.0);
  w.a(0, 0) = 5.1;
  EXPECT_EQ(log_prior(w, UniformBoxPrior{5.0}), kNegInf);
  EXPECT_FALSE(in_support(w.flat(), UniformBoxPrior{5.0}));
  EXPECT_TRUE(in_support(w.flat(), GaussianPrior{1.0}));
}

TEST(LogPrior, RejectsNonPositiveScale) {
  EXPECT_THROW(validate_prior(GaussianPrior{0.0}), DomainError);
  EXPECT_THROW(validate_prior(UniformBoxPrior{-1.0}), DomainError);
  EXPECT_NO_THROW(validate_prior(UniformBoxPrior{2.0}));
}

TEST(DrawTrueParams, ShapeAndDeterminism) {
  const ModelSpec spec{{2, 2, 2}, 2, 1, 100};
  const CpParams w0 = draw_true_params(spec, 5);
  EXPECT_EQ(w0.rank(), 1U);
  EXPECT_EQ(w0.dims(), (Dims{2, 2, 2}));
  EXPECT_EQ(w0.size(), 6U);
  EXPECT_EQ(draw_true_params(spec, 5), w0);
  EXPECT_NE(draw_true_params(spec, 6), w0);
}

TEST(DrawTrueParams, NoDegenerateColumns) {
  const ModelSpec spec{{3, 2, 4}, 6, 5, 10};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const CpParams w0 = draw_true_params(spec, seed);
    for (std::size_t h = 0; h < w0.rank(); ++h) {
      double ma = 0.0, mb = 0.0, mc = 0.0;
      for (std::size_t i = 0; i < 3; ++i) ma = std::max(ma, std::abs(w0.a(i, h)));
      for (std::size_t j = 0; j < 2; ++j) mb = std::max(mb, std::abs(w0.b(j, h)));
      for (std::size_t k = 0; k < 4; ++k) mc = std::max(mc, std::abs(w0.c(k, h)));
      ASSERT_GE(std::min({ma, mb, mc}), 0.1);
    }
  }
}

TEST(DrawTrueParams, StandardNormalMoments) {
  const ModelSpec spec{{2, 2, 2}, 1, 1, 100};
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const CpParams w0 = draw_true_params(spec, seed);
    for (double v : w0.flat()) {
      sum += v;
      sum_sq += v * v;
      ++count;
    }
  }
  const double mean = sum / count;
  EXPECT_NEAR(mean, 0.0, 0.15);
  EXPECT_NEAR(sum_sq / count - mean * mean, 1.0, 0.2);
}

TEST(SampleDataset, DeterministicAndSeedSensitive) {
  std::mt19937_64 rng(47);
  const CpParams w0 = random_params({2, 3, 2}, 2, rng);
  const Dataset a = sample_dataset(w0, 20, 123);
  const Dataset b = sample_dataset(w0, 20, 123);
  const Dataset c = sample_dataset(w0, 20, 124);
  EXPECT_EQ(a.n(), 20U);
  EXPECT_EQ(a.tensors, b.tensors);
  EXPECT_NE(a.tensors, c.tensors);
  EXPECT_THROW((void)sample_dataset(w0, 0, 1), DomainError);
}

TEST(SampleDataset, EntryMeanAndVariance) {
  const CpParams w0({1, 1, 1}, 1, {1.2, -0.5, 2.0});
  const double c = 1.2 * -0.5 * 2.0;
  constexpr std::size_t kN = 10000;
  const Dataset data = sample_dataset(w0, kN, 77);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const Tensor3& x : data.tensors) {
    sum += x(0, 0, 0);
    sum_sq += x(0, 0, 0) * x(0, 0, 0);
  }
  const double mean = sum / kN;
  EXPECT_NEAR(mean, c, 4.0 / std::sqrt(static_cast<double>(kN)));
  const double var = (sum_sq - kN * mean * mean) / (kN - 1);
  EXPECT_GE(var, 0.9);
  EXPECT_LE(var, 1.1);
}

class DatasetFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / ("rlct_model_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(DatasetFiles, JsonAndCsvRoundTripExactly) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 5; ++trial) {
    const Dims d{1 + rng() % 4, 1 + rng() % 4, 1 + rng() % 4};
    const Dataset data = sample_dataset(random_params(d, 2, rng), 1 + rng() % 20, rng());
    save_dataset_json(data, dir_ / "d.json");
    save_dataset_csv(data, dir_ / "d.csv");
    for (const Dataset& back : {load_dataset_json(dir_ / "d.json"), load_dataset_csv(dir_ / "d.csv")}) {
      EXPECT_EQ(back.dims, data.dims);
      EXPECT_EQ(back.seed, data.seed);
      EXPECT_EQ(back.tensors, data.tensors);
    }
  }
}

TEST_F(DatasetFiles, MalformedInputIsRejected) {
  {
    std::ofstream out(dir_ / "bad.csv");
    out << "I,J,K,seed\n2,2,2,1\n1,2,3\n";
  }
  EXPECT_THROW((void)load_dataset_csv(dir_ / "bad.csv"), DimensionError);
  EXPECT_THROW((void)load_dataset_json(dir_ / "missing.json"), std::runtime_error);
}

}  // namespace
}  // namespace rlct
