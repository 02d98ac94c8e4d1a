#include <dmmse/error.hpp>
#include <dmmse/harness.hpp>
#include <dmmse/rng.hpp>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "reference.hpp"

#include <cmath>

namespace {

using dmmse::Algorithm;
using dmmse::TopologyKind;

dmmse::TopologySpec topo(std::string label, TopologyKind kind, std::optional<std::uint64_t> seed = {}) {
  dmmse::TopologySpec t;
  t.label = std::move(label);
  t.kind = kind;
  t.seed = seed;
  return t;
}

dmmse::RunSpec run(std::string label, Algorithm a, std::string topology, std::optional<std::size_t> window = {}) {
  dmmse::RunSpec r;
  r.label = std::move(label);
  r.algorithm = a;
  r.topology = std::move(topology);
  r.window = window;
  return r;
}

dmmse::ExperimentConfig small(std::size_t m, std::size_t T, std::size_t trials) {
  dmmse::ExperimentConfig c;
  c.model = {m, 3, 1, 1.0, std::nullopt};
  c.horizon = T;
  c.trials = trials;
  c.master_seed = 17;
  return c;
}

TEST(Stats, MeanAndStderr) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto e = dmmse::mean_and_stderr(v);
  EXPECT_DOUBLE_EQ(e.mean, 2.5);
  // sample sd = sqrt(5/3), stderr = sd / 2
  EXPECT_NEAR(e.std_error, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  const std::vector<double> one{7.0};
  EXPECT_EQ(dmmse::mean_and_stderr(one).std_error, 0.0);
  const std::vector<double> w{0.0, 2.0, 2.0, 4.0};
  const auto d = dmmse::paired_difference(w, v);
  EXPECT_DOUBLE_EQ(d.mean, -0.5);
}

TEST(Config, ValidationRejectsBadSpecs) {
  auto c = small(4, 3, 2);
  c.topologies = {topo("line", TopologyKind::line)};
  c.runs = {run("a", Algorithm::odol, "line")};
  EXPECT_NO_THROW(c.validate());

  auto bad = c;
  bad.trials = 0;
  EXPECT_THROW(bad.validate(), dmmse::Error);
  bad = c;
  bad.runs.push_back(run("a", Algorithm::odol, "line"));
  EXPECT_THROW(bad.validate(), dmmse::Error);
  bad = c;
  bad.runs = {run("s", Algorithm::sdol, "line")};
  EXPECT_THROW(bad.validate(), dmmse::Error);
  bad = c;
  bad.runs = {run("x", Algorithm::odol, "nowhere")};
  EXPECT_THROW(bad.validate(), dmmse::Error);
  bad = c;
  bad.runs = {run("d", Algorithm::drls, "line")};
  bad.runs[0].forgetting = 1.5;
  try {
    bad.validate();
    FAIL();
  } catch (const dmmse::Error& e) {
    EXPECT_EQ(e.kind(), dmmse::ErrorKind::invalid_config);
  }
}

TEST(Harness, FirstStepIsTopologyFree) {
  auto c = small(6, 4, 30);
  c.topologies = {topo("fc", TopologyKind::fully_connected), topo("line", TopologyKind::line),
                  topo("star", TopologyKind::star)};
  c.runs = {run("fc", Algorithm::odol, "fc"), run("line", Algorithm::odol, "line"),
            run("star", Algorithm::odol, "star")};
  const auto r = dmmse::run_experiment(c);
  // Same traces and the same information at t = 1, so J(1) agrees exactly.
  EXPECT_EQ(r.find("fc").J[0].mean, r.find("line").J[0].mean);
  EXPECT_EQ(r.find("fc").J[0].mean, r.find("star").J[0].mean);
  EXPECT_GT(r.find("fc").J[0].mean, 0.0);
}

TEST(Harness, NoiselessIdentityModelHasNoCost) {
  auto c = small(3, 5, 10);
  dmmse::WorldModel w = dmmse::scalar_world(3, 1.0, 1e-14);
  c.model_override = w;
  c.topologies = {topo("line", TopologyKind::line)};
  c.runs = {run("odol", Algorithm::odol, "line")};
  const auto r = dmmse::run_experiment(c);
  for (const auto& e : r.find("odol").J) EXPECT_LT(e.mean, 1e-10);
}

TEST(Harness, TeamCostMatchesIndependentOracle) {
  auto c = small(5, 4, 3);
  c.topologies = {topo("rnd", TopologyKind::random, 3)};
  c.runs = {run("odol", Algorithm::odol, "rnd")};
  const auto r = dmmse::run_experiment(c);
  const auto model = c.resolved_model();
  const auto g = c.topologies[0].build(5, c.master_seed);
  const auto& s = r.find("odol");
  for (std::size_t k = 0; k < c.trials; ++k) {
    const auto trace =
        dmmse::sample_trace(model, c.horizon, dmmse::derive_seed(c.master_seed, dmmse::Stream::trial, {k}));
    for (std::size_t t = 1; t <= c.horizon; ++t) {
      double cost = 0.0;
      for (std::size_t i = 0; i < 5; ++i) {
        const auto post = reference::condition(model, reference::oracle_pairs(g, i, t), trace);
        cost += (post.mean - trace.state()).squaredNorm();
      }
      EXPECT_NEAR(s.team_cost(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t - 1)), cost,
                  1e-8 * (1.0 + cost));
    }
  }
}

TEST(Harness, JIsCumulativeSumOfP) {
  auto c = small(6, 8, 20);
  c.topologies = {topo("cycle", TopologyKind::cycle)};
  c.runs = {run("odol", Algorithm::odol, "cycle")};
  const auto s = dmmse::run_experiment(c).find("odol");
  double acc = 0.0;
  for (std::size_t t = 0; t < 8; ++t) {
    acc += s.P[t].mean;
    EXPECT_NEAR(s.J[t].mean, acc, 1e-9 * acc);
    if (t > 0) EXPECT_GT(s.J[t].mean, s.J[t - 1].mean);
    EXPECT_GE(s.P[t].std_error, 0.0);
  }
  // per-agent MSE sums to the team cost mean
  for (Eigen::Index t = 0; t < 8; ++t) EXPECT_NEAR(s.mse.col(t).sum(), s.P[static_cast<std::size_t>(t)].mean, 1e-9);
}

TEST(Harness, ThreadCountDoesNotChangeTheReport) {
  auto c = small(7, 6, 25);
  c.topologies = {topo("rnd", TopologyKind::random), topo("line", TopologyKind::line)};
  c.runs = {run("odol", Algorithm::odol, "rnd"), run("oedol", Algorithm::oedol, "line"),
            run("sdol", Algorithm::sdol, "rnd", 6), run("drls", Algorithm::drls, "rnd")};
  const auto a = dmmse::run_experiment(c, 1);
  const auto b = dmmse::run_experiment(c, 4);
  ASSERT_EQ(a.series.size(), b.series.size());
  for (std::size_t k = 0; k < a.series.size(); ++k) {
    EXPECT_EQ(a.series[k].team_cost, b.series[k].team_cost);
    EXPECT_EQ(a.series[k].mse, b.series[k].mse);
  }
}

TEST(Harness, IncompatibleRunIsSkippedWithNote) {
  auto c = small(4, 3, 5);
  c.topologies = {topo("cycle", TopologyKind::cycle)};
  c.runs = {run("oedol", Algorithm::oedol, "cycle"), run("odol", Algorithm::odol, "cycle")};
  const auto r = dmmse::run_experiment(c);
  EXPECT_TRUE(r.find("oedol").skipped);
  EXPECT_NE(r.find("oedol").note.find("closes a cycle"), std::string::npos);
  EXPECT_FALSE(r.find("odol").skipped);
}

TEST(Harness, PreparedWeightsAreUsed) {
  auto c = small(5, 4, 6);
  c.topologies = {topo("line", TopologyKind::line)};
  c.runs = {run("oedol", Algorithm::oedol, "line")};
  dmmse::WeightCache cache;
  cache.emplace("oedol", dmmse::prepare_weights(c, c.runs[0]));
  const auto a = dmmse::run_experiment(c);
  const auto b = dmmse::run_experiment(c, 2, cache);
  EXPECT_EQ(a.find("oedol").team_cost, b.find("oedol").team_cost);

  // a schedule that is too short is a config error
  auto shorter = c;
  shorter.horizon = 2;
  dmmse::WeightCache short_cache;
  short_cache.emplace("oedol", dmmse::prepare_weights(shorter, c.runs[0]));
  EXPECT_THROW(dmmse::run_experiment(c, 1, short_cache), dmmse::Error);
}

TEST(Compare, IdenticalReportsTie) {
  auto c = small(5, 4, 10);
  c.topologies = {topo("line", TopologyKind::line), topo("fc", TopologyKind::fully_connected)};
  c.runs = {run("line", Algorithm::odol, "line"), run("fc", Algorithm::odol, "fc")};
  const auto r = dmmse::run_experiment(c);
  const std::vector<dmmse::CostReport> two{r, r};
  for (const auto& cmp : dmmse::compare_report(two)) {
    if (cmp.a.substr(cmp.a.find(':')) == cmp.b.substr(cmp.b.find(':'))) EXPECT_EQ(cmp.order, dmmse::Ordering::tie);
  }
  for (const char* metric : {"J", "P"}) {
    for (std::size_t T = 1; T <= 4; ++T) {
      EXPECT_EQ(dmmse::compare_series(r.find("fc"), r.find("fc"), metric, T).order, dmmse::Ordering::tie);
    }
  }
}

TEST(Compare, OdolAndOedolTieOnTrees) {
  auto c = small(6, 6, 20);
  c.topologies = {topo("star", TopologyKind::star)};
  c.runs = {run("odol", Algorithm::odol, "star"), run("oedol", Algorithm::oedol, "star")};
  const auto r = dmmse::run_experiment(c);
  for (const auto& cmp : dmmse::compare_report(std::span(&r, 1))) {
    EXPECT_EQ(cmp.order, dmmse::Ordering::tie) << cmp.metric << " T=" << cmp.T;
    EXPECT_LT(std::abs(cmp.difference), 1e-6);
  }
}

TEST(Compare, MismatchedReportsAreRejected) {
  auto c = small(4, 3, 5);
  c.topologies = {topo("line", TopologyKind::line)};
  c.runs = {run("odol", Algorithm::odol, "line")};
  const auto a = dmmse::run_experiment(c);
  c.trials = 6;
  const auto b = dmmse::run_experiment(c);
  const std::vector<dmmse::CostReport> both{a, b};
  try {
    dmmse::compare_report(both);
    FAIL();
  } catch (const dmmse::Error& e) {
    EXPECT_EQ(e.kind(), dmmse::ErrorKind::invalid_comparison);
  }
  c.trials = 5;
  c.horizon = 4;
  const std::vector<dmmse::CostReport> horizons{a, dmmse::run_experiment(c)};
  EXPECT_THROW(dmmse::compare_report(horizons), dmmse::Error);
}

TEST(Compare, FullyConnectedBeatsLine) {
  auto c = small(8, 8, 40);
  c.topologies = {topo("line", TopologyKind::line), topo("fc", TopologyKind::fully_connected)};
  c.runs = {run("fc", Algorithm::odol, "fc"), run("line", Algorithm::odol, "line")};
  const auto r = dmmse::run_experiment(c);
  for (std::size_t T = 3; T <= 8; ++T) {
    EXPECT_EQ(dmmse::compare_series(r.find("fc"), r.find("line"), "J", T).order, dmmse::Ordering::less);
  }
}

}  // namespace
