#include "fran/harness.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace fran {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fran_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentSpec small_spec(const std::string& out) {
  ExperimentSpec spec;
  spec.schemes = {SchemeSpec::parse("H-PA-PS"), SchemeSpec::parse("V-PU-FPS")};
  spec.num_realizations = 4;
  spec.out_dir = out;
  spec.seed = 9;
  spec.threads = 1;
  return spec;
}

TEST(EmpiricalCdf, Examples) {
  const std::vector<double> one{5.0};
  const auto c1 = empirical_cdf(one);
  ASSERT_EQ(c1.size(), 1u);
  EXPECT_EQ(c1[0].first, 5.0);
  EXPECT_EQ(c1[0].second, 1.0);

  const std::vector<double> four{3, 1, 4, 2};
  const auto c4 = empirical_cdf(four);
  const std::vector<double> probs{0.25, 0.5, 0.75, 1.0};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(c4[i].first, i + 1.0);
    EXPECT_DOUBLE_EQ(c4[i].second, probs[i]);
  }
  EXPECT_THROW(empirical_cdf(std::vector<double>{}), std::invalid_argument);
}

TEST(EmpiricalCdf, UniformSamplesTrackIdentity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(10000);
  for (double& v : x) v = u(rng);
  const auto cdf = empirical_cdf(x);
  double worst = 0.0;
  double prev = 0.0;
  for (const auto& [v, p] : cdf) {
    worst = std::max({worst, std::abs(p - v), std::abs(prev - v)});
    prev = p;
  }
  EXPECT_LT(worst, 0.03);
}

TEST(SplitHistogram, FixedSplitIsOneStep) {
  std::vector<RealizationRow> rows(3);
  for (auto& r : rows) r.split_values = {0.25, 0.25, 0.25, 0.25};
  const auto cdf = split_ratio_histogram(rows);
  ASSERT_EQ(cdf.size(), 12u);
  for (const auto& [v, p] : cdf) EXPECT_EQ(v, 0.25);
  EXPECT_EQ(cdf.back().second, 1.0);
}

TEST(ExperimentSpec, Validation) {
  ExperimentSpec spec = small_spec("x");
  EXPECT_NO_THROW(spec.validate());
  spec.num_realizations = 0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = small_spec("x");
  spec.sweep = SweepKind::kFronthaul;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec.sweep_values = {5e7, 1e8};
  EXPECT_NO_THROW(spec.validate());
  spec.sweep = SweepKind::kRbs;
  spec.sweep_values = {1.5};
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = small_spec("x");
  spec.pf_reference = 2;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = small_spec("x");
  spec.schemes.clear();
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(ExperimentSpec, SweepKinds) {
  for (SweepKind k : {SweepKind::kNone, SweepKind::kFronthaul, SweepKind::kRbs,
                      SweepKind::kInitialSplit}) {
    EXPECT_EQ(parse_sweep_kind(sweep_kind_name(k)), k);
  }
  EXPECT_THROW(parse_sweep_kind("power"), std::invalid_argument);
  ExperimentSpec spec = small_spec("x");
  spec.sweep = SweepKind::kRbs;
  spec.sweep_values = {4};
  EXPECT_EQ(spec.network_at(4).num_rbs, 4);
  spec.sweep = SweepKind::kFronthaul;
  EXPECT_EQ(spec.network_at(5e7).fronthaul_capacity(3), 5e7);
}

TEST(StreamRng, IndependentStreams) {
  auto a = stream_rng(1, 0, Stream::kChannels);
  auto b = stream_rng(1, 0, Stream::kChannels);
  auto c = stream_rng(1, 1, Stream::kChannels);
  auto d = stream_rng(1, 0, Stream::kTopology);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
}

TEST(RunExperiment, OneRealizationOneScheme) {
  const fs::path dir = temp_dir("one");
  ExperimentSpec spec = small_spec(dir.string());
  spec.schemes = {SchemeSpec::parse("K-PA-PS")};
  spec.num_realizations = 1;
  const ExperimentResult res = run_experiment(spec);
  ASSERT_EQ(res.rows.size(), 1u);
  ASSERT_EQ(res.summaries.size(), 1u);
  EXPECT_EQ(res.summaries[0].successes, 1);
  EXPECT_FALSE(res.too_many_failures);
  write_experiment(spec, res);
  for (const char* f : {"realizations.csv", "cdf.csv", "split_cdf.csv", "summary.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const std::string csv = slurp(dir / "realizations.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "scheme,sweep_value,realization,utility,sum_rate,jain,iters_outer,"
            "max_fronthaul_violation");
}

TEST(RunExperiment, ByteIdenticalAcrossRunsAndThreads) {
  const fs::path d1 = temp_dir("det1"), d2 = temp_dir("det2");
  ExperimentSpec s1 = small_spec(d1.string());
  ExperimentSpec s2 = small_spec(d2.string());
  s2.threads = 3;
  write_experiment(s1, run_experiment(s1));
  write_experiment(s2, run_experiment(s2));
  for (const char* f : {"realizations.csv", "cdf.csv", "split_cdf.csv"}) {
    EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
  }
}

TEST(RunExperiment, AccountsEveryRealization) {
  ExperimentSpec spec = small_spec(temp_dir("acct").string());
  spec.sweep = SweepKind::kFronthaul;
  spec.sweep_values = {5e7, 1e8};
  const ExperimentResult res = run_experiment(spec);
  ASSERT_EQ(res.summaries.size(), 4u);
  for (const SchemeSummary& s : res.summaries) {
    EXPECT_EQ(s.successes + s.failures, spec.num_realizations);
    EXPECT_GE(s.mean_jain, 1.0 / spec.network.num_users() - 1e-12);
    EXPECT_LE(s.mean_jain, 1.0 + 1e-12);
    EXPECT_LE(s.max_fronthaul_violation, 1e-6);
  }
  EXPECT_EQ(res.rows.size(), 16u);
  for (const RealizationRow& r : res.rows) {
    for (double a : r.split_values) {
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
    }
  }
}

TEST(RunExperiment, SplitSweepSetsFixedRatio) {
  ExperimentSpec spec = small_spec(temp_dir("split").string());
  spec.schemes = {SchemeSpec::parse("H-PA-FPS")};
  spec.num_realizations = 2;
  spec.sweep = SweepKind::kInitialSplit;
  spec.sweep_values = {0.1, 0.6};
  const ExperimentResult res = run_experiment(spec);
  for (const RealizationRow& r : res.rows) {
    for (double a : r.split_values) EXPECT_EQ(a, r.sweep_value);
  }
}

TEST(RunExperiment, SharedWeightsMakeSchemesComparable) {
  // The same realization seeds drive every scheme, so a scheme listed twice
  // reproduces itself exactly.
  ExperimentSpec spec = small_spec(temp_dir("twice").string());
  spec.schemes = {SchemeSpec::parse("H-PA-PS"), SchemeSpec::parse("K-PA-PS"),
                  SchemeSpec::parse("H-PA-PS")};
  spec.num_realizations = 3;
  const ExperimentResult res = run_experiment(spec);
  EXPECT_EQ(res.summaries[0].mean_utility, res.summaries[2].mean_utility);
}

}  // namespace
}  // namespace fran
