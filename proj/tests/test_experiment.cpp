#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rlct/config.hpp"
#include "rlct/errors.hpp"
#include "rlct/experiment.hpp"

namespace rlct {
namespace {

IniDocument parse(const std::string& text) {
  std::istringstream in(text);
  return IniDocument::parse(in, "test.ini");
}

std::string error_of(const std::string& text) {
  ExperimentConfig config = table1_config(true);
  try {
    apply_config(parse(text), config);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

TEST(IniDocument, SectionsCommentsAndRepeats) {
  const IniDocument doc = parse(
      "# comment\n"
      "[experiment]\n"
      "seed = 5   # trailing\n"
      "; other comment\n"
      "[cell]\nI=2\n"
      "[cell]\nI = 3\n");
  ASSERT_EQ(doc.sections().size(), 3U);
  EXPECT_EQ(doc.sections()[0].entries.at("seed").value, "5");
  EXPECT_EQ(doc.sections()[0].entries.at("seed").line, 3U);
  EXPECT_EQ(doc.sections()[2].entries.at("I").value, "3");
  EXPECT_EQ(doc.sections()[2].line, 7U);
}

TEST(IniDocument, MalformedLinesCarryLineNumbers) {
  EXPECT_THROW((void)parse("[experiment\n"), ConfigError);
  try {
    (void)parse("[experiment]\nseed = 1\nnot a pair\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("test.ini:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW((void)parse("seed = 1\n"), ConfigError);
  EXPECT_THROW((void)parse("[a]\nx = 1\nx = 2\n"), ConfigError);
}

TEST(ApplyConfig, OverlaysSectionsAndReplacesCells) {
  ExperimentConfig config = table1_config(false);
  apply_config(parse("[experiment]\nseed = 17\nworkers = 3\nformat = json\nn_test = 123\n"
                     "[prior]\nkind = uniform_box\nhalf_width = 4\n"
                     "[mcmc]\nchains = 2\ninit = overdispersed\n"
                     "[cell]\nI = 3\nJ = 2\nK = 4\nH = 3\nH0 = 2\nn = 50\n"),
               config);
  EXPECT_EQ(config.master_seed, 17U);
  EXPECT_EQ(config.workers, 3U);
  EXPECT_EQ(config.format, OutputFormat::kJson);
  EXPECT_EQ(config.gen.n_test, 123U);
  ASSERT_TRUE(std::holds_alternative<UniformBoxPrior>(config.prior));
  EXPECT_EQ(std::get<UniformBoxPrior>(config.prior).half_width, 4.0);
  EXPECT_EQ(config.mcmc.chains, 2U);
  EXPECT_EQ(config.mcmc.init, InitMode::kOverdispersed);
  ASSERT_EQ(config.cells.size(), 1U);
  EXPECT_EQ(config.cells[0], (ModelSpec{{3, 2, 4}, 3, 2, 50}));
}

TEST(ApplyConfig, WithoutCellsKeepsDefaults) {
  ExperimentConfig config = table1_config(false);
  apply_config(parse("[experiment]\nseed = 1\n"), config);
  EXPECT_EQ(config.cells.size(), 15U);
}

TEST(ApplyConfig, ValidationErrorsNameCellAndLine) {
  const std::string e = error_of("[cell]\nI=2\nJ=2\nK=2\nH=2\nH0=1\n[cell]\nI=2\nJ=2\nK=2\nH=2\nH0=3\n");
  EXPECT_NE(e.find("cell 1"), std::string::npos) << e;
  EXPECT_NE(e.find("H0 must be <= H"), std::string::npos) << e;
  EXPECT_NE(e.find("test.ini:7"), std::string::npos) << e;

  EXPECT_NE(error_of("[cell]\nI=2\nJ=2\nK=2\nH=2\nH0=0\n").find("H0 must be >= 1"), std::string::npos);
  EXPECT_NE(error_of("[cell]\nI=2\nJ=2\nK=2\nH=2\n").find("missing key H0"), std::string::npos);
  EXPECT_NE(error_of("[experiment]\nsed = 3\n").find("test.ini:2"), std::string::npos);
  EXPECT_NE(error_of("[experiment]\nseed = x\n").find("seed"), std::string::npos);
  EXPECT_NE(error_of("[prior]\nkind = cauchy\n").find("kind"), std::string::npos);
  EXPECT_NE(error_of("[mcmc]\nburn_in = 50000\n").find("burn_in"), std::string::npos);
  EXPECT_NE(error_of("[bogus]\n").find("unknown section"), std::string::npos);
  EXPECT_NE(error_of("[experiment]\nworkers = 0\n").find("workers"), std::string::npos);
}

TEST(Table1, CellsAndProfiles) {
  const auto cells = table1_cells();
  ASSERT_EQ(cells.size(), 15U);
  for (const auto& c : cells) {
    EXPECT_EQ(c.rank, 2 * c.true_rank);
    EXPECT_EQ(c.n, 100U);
  }
  const ExperimentConfig paper = table1_config(false);
  EXPECT_EQ(paper.gen.trials(), 10U);
  EXPECT_EQ(paper.gen.n_test, 10000U);
  EXPECT_EQ(paper.mcmc.target_samples, 1000U);
  const ExperimentConfig quick = table1_config(true);
  EXPECT_EQ(quick.gen.trials(), 3U);
  EXPECT_EQ(quick.gen.n_test, 2000U);
  EXPECT_EQ(quick.mcmc.target_samples, 300U);
  EXPECT_NO_THROW(quick.validate());
}

TEST(RunExperiment, BoundsOnlyMatchesBoundCommand) {
  ExperimentConfig config = table1_config(false);
  config.bounds_only = true;
  const auto reports = run_experiment(config);
  ASSERT_EQ(reports.size(), 15U);
  for (const auto& r : reports) {
    EXPECT_EQ(r.status, CellStatus::kBoundsOnly);
    EXPECT_FALSE(r.estimate);
    EXPECT_FALSE(r.tightness_ratio());
    const RlctBound direct = tensor_rlct_bound(r.spec);
    EXPECT_EQ(r.bound.bound, direct.bound);
    EXPECT_EQ(r.bound.m1, direct.m1);
    EXPECT_EQ(format_bound(r.spec, r.bound), format_bound(r.spec, direct));
  }
}

std::vector<CellReport> one_of_each_status() {
  ExperimentConfig config;
  config.cells = {{{2, 2, 2}, 2, 1, 30}};
  config.mcmc.total_iters = 2000;
  config.mcmc.burn_in = 500;
  config.mcmc.thin = 5;
  config.mcmc.target_samples = 100;
  config.gen = {200, 1, 2};
  auto reports = run_experiment(config);
  CellReport bounds_only{config.cells[0], tensor_rlct_bound(config.cells[0]), {}, CellStatus::kBoundsOnly, {}};
  CellReport diverged{config.cells[0], tensor_rlct_bound(config.cells[0]), {}, CellStatus::kDiverged, "NaN"};
  reports.push_back(bounds_only);
  reports.push_back(diverged);
  return reports;
}

TEST(Reports, SchemaIsStableAcrossStatuses) {
  const auto reports = one_of_each_status();
  ASSERT_EQ(reports[0].status, CellStatus::kOk);
  ASSERT_TRUE(reports[0].tightness_ratio());
  EXPECT_DOUBLE_EQ(*reports[0].tightness_ratio(),
                   reports[0].estimate->lambda_hat / reports[0].bound.bound.to_double());

  std::ostringstream json_out;
  write_json(json_out, reports);
  const auto parsed = nlohmann::json::parse(json_out.str());
  ASSERT_EQ(parsed.size(), 3U);
  std::set<std::string> keys0;
  for (const auto& [k, v] : parsed[0].items()) keys0.insert(k);
  for (const auto& cell : parsed) {
    std::set<std::string> keys;
    for (const auto& [k, v] : cell.items()) keys.insert(k);
    EXPECT_EQ(keys, keys0);
  }
  EXPECT_EQ(parsed[2]["status"], "diverged");
  EXPECT_TRUE(parsed[2]["lambda_hat"].is_null());

  std::ostringstream csv_out;
  write_csv(csv_out, reports);
  std::istringstream lines(csv_out.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line,
            "I,J,K,H,H0,n,core_term,m1,m2,m3,lambda_bound,lambda_hat,lambda_std,tightness_ratio,accept_rate,rhat");
  while (std::getline(lines, line)) EXPECT_EQ(std::count(line.begin(), line.end(), ','), 15);
}

TEST(Reports, TrialRecordsAreJsonLines) {
  ExperimentConfig config;
  config.master_seed = 5;
  const auto reports = one_of_each_status();
  std::ostringstream out;
  write_trial_records(out, config, reports);
  std::istringstream lines(out.str());
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    const auto rec = nlohmann::json::parse(line);
    for (const char* key : {"spec", "cell_seed", "redraw", "dataset", "g_n", "mc_stderr", "accept_rate", "rhat"}) {
      EXPECT_TRUE(rec.contains(key)) << key;
    }
    ++count;
  }
  EXPECT_EQ(count, 2U);  // only the estimated cell has trials
}

TEST(RunExperiment, CsvIsIdenticalAcrossWorkerCounts) {
  ExperimentConfig config = table1_config(true);
  config.cells = {{{2, 2, 2}, 2, 1, 100}, {{3, 3, 3}, 2, 1, 100}};
  config.gen.n_test = 300;
  config.mcmc.total_iters = 3000;
  config.mcmc.burn_in = 1000;
  config.mcmc.target_samples = 100;
  std::ostringstream a, b;
  config.workers = 1;
  write_csv(a, run_experiment(config));
  config.workers = 4;
  write_csv(b, run_experiment(config));
  EXPECT_EQ(a.str(), b.str());
}

TEST(CellSeed, DistinctPerCellAndStable) {
  EXPECT_EQ(cell_seed(1, 0), cell_seed(1, 0));
  EXPECT_NE(cell_seed(1, 0), cell_seed(1, 1));
  EXPECT_NE(cell_seed(1, 0), cell_seed(2, 0));
}

}  // namespace
}  // namespace rlct
