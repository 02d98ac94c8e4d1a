#include <dmmse/disclosure.hpp>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "reference.hpp"

#include <algorithm>

namespace {

using dmmse::MeasurementIndex;
using dmmse::TopologyKind;

bool has_witness(const dmmse::SpanReport& r, std::size_t agent1, std::size_t time) {
  return std::any_of(r.witness.begin(), r.witness.end(),
                     [&](const auto& w) { return w.first == MeasurementIndex{agent1 - 1, time}; });
}

TEST(CoefficientMap, EmptyAndScalar) {
  auto w = fixtures::world(2, 1, 2, 3);
  w.xbar << 0.5, -1;
  const auto empty = dmmse::coefficient_map(w, {0, 1, {}});
  EXPECT_EQ(empty.constant, w.xbar);
  EXPECT_TRUE(empty.coeffs.empty());

  const auto s = dmmse::scalar_world(1, 1.0, 1.0);
  const auto one = dmmse::coefficient_map(s, {0, 1, {{0, 1}}});
  EXPECT_NEAR(one.coeffs.at(0)(0, 0), 0.5, 1e-15);
}

TEST(CoefficientMap, CycleEqualCoefficients) {
  for (double sn2 : {0.1, 1.0, 10.0}) {
    const auto w = dmmse::scalar_world(4, 1.0, sn2);
    const auto hs = dmmse::hop_structure(dmmse::make_topology(TopologyKind::cycle, 4));
    const auto map = dmmse::coefficient_map(w, dmmse::oracle_information_set(hs, 1, 2));
    ASSERT_EQ(map.entries.size(), 4u);
    for (const auto& c : map.coeffs) EXPECT_NEAR(c(0, 0), 1.0 / (4.0 + sn2), 1e-14);
    for (auto [a, t] : {std::pair{2, 2}, {2, 1}, {1, 1}, {3, 1}}) {
      EXPECT_NEAR(map.coefficient({static_cast<std::size_t>(a - 1), static_cast<std::size_t>(t)})(0, 0),
                  1.0 / (4.0 + sn2), 1e-14);
    }
  }
}

TEST(CoefficientMap, EvaluationMatchesBatch) {
  auto w = fixtures::world(3, 2, 5, 17);
  w.xbar.setConstant(-0.7);
  const auto topo = dmmse::make_topology(TopologyKind::random, 5, 17u);
  const auto hs = dmmse::hop_structure(topo);
  const auto info = dmmse::oracle_information_set(hs, 2, 4);
  const auto map = dmmse::coefficient_map(w, info);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto tr = dmmse::sample_trace(w, 4, s);
    EXPECT_LT((map.evaluate(tr) - dmmse::batch_mmse(w, info, tr).mean).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(SpanSufficiency, CycleCounterexample) {
  for (double sn2 : {0.1, 1.0, 10.0}) {
    const auto w = dmmse::scalar_world(4, 1.0, sn2);
    // Generator labels: agent 3 sits opposite agent 1.
    const auto gen = dmmse::span_sufficiency(dmmse::make_topology(TopologyKind::cycle, 4), w, 0, 3);
    EXPECT_FALSE(gen.achievable);
    EXPECT_GT(gen.residual, 1e-4 * gen.target_norm);
    EXPECT_TRUE(has_witness(gen, 3, 1));
    // The figure's labels: agent 4 sits opposite agent 1.
    const auto fig = dmmse::span_sufficiency(fixtures::square_cycle4(), w, 0, 3);
    EXPECT_FALSE(fig.achievable);
    EXPECT_TRUE(has_witness(fig, 4, 1));
    EXPECT_NEAR(fig.residual, gen.residual, 1e-12);

    const auto tree = dmmse::spanning_tree(dmmse::make_topology(TopologyKind::cycle, 4));
    EXPECT_TRUE(dmmse::span_sufficiency(tree, w, 0, 3).achievable);
  }
}

TEST(SpanSufficiency, EarlyStepsOnCycleAreFine) {
  const auto w = dmmse::scalar_world(4, 1.0, 1.0);
  dmmse::SpanAnalyzer an(dmmse::make_topology(TopologyKind::cycle, 4), w);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_TRUE(an.analyze(i, 1).achievable);
    EXPECT_TRUE(an.analyze(i, 2).achievable);
  }
}

TEST(SpanSufficiency, TreesAreAchievable) {
  for (std::uint64_t s = 0; s < 6; ++s) {
    const auto tree = dmmse::random_tree(3 + s, s);
    const auto w = fixtures::world(1 + s % 2, 1, tree.size(), s);
    dmmse::SpanAnalyzer an(tree, w);
    for (std::size_t i = 0; i < tree.size(); ++i) {
      for (std::size_t t = 1; t <= 6; ++t) {
        const auto r = an.analyze(i, t);
        EXPECT_TRUE(r.achievable) << "seed " << s << " agent " << i << " t " << t << " residual " << r.residual;
        EXPECT_LT(r.residual, 1e-8 * std::max(1.0, r.target_norm));
      }
    }
  }
}

TEST(SpanSufficiency, FullyConnectedAndCellTrees) {
  for (std::size_t m = 2; m <= 6; ++m) {
    const auto w = fixtures::world(2, 1, m, m);
    dmmse::SpanAnalyzer an(dmmse::make_topology(TopologyKind::fully_connected, m), w);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t t = 1; t <= 5; ++t) EXPECT_TRUE(an.analyze(i, t).achievable);
  }
  for (std::uint64_t s = 0; s < 4; ++s) {
    const auto topo = dmmse::random_cell_tree(7, s);
    ASSERT_NO_THROW(dmmse::cell_decomposition(topo));
    dmmse::SpanAnalyzer an(topo, fixtures::world(2, 1, 7, s));
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t t = 1; t <= 5; ++t) EXPECT_TRUE(an.analyze(i, t).achievable) << s << " " << i << " " << t;
  }
}

TEST(SpanSufficiency, ReportInvariant) {
  const auto w = dmmse::scalar_world(5, 1.0, 1.0);
  dmmse::SpanAnalyzer an(dmmse::make_topology(TopologyKind::cycle, 5), w);
  for (std::size_t t = 1; t <= 5; ++t) {
    const auto r = an.analyze(0, t);
    EXPECT_EQ(r.achievable, r.residual <= dmmse::kSpanTolerance * r.target_norm);
    EXPECT_EQ(r.achievable, r.witness.empty());
  }
}

}  // namespace
