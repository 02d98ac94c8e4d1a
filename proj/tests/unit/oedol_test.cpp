#include <dmmse/error.hpp>
#include <dmmse/oedol.hpp>
#include <dmmse/oracle.hpp>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "reference.hpp"

#include <cmath>

namespace {

using dmmse::TopologyKind;

void expect_matches_odol(const dmmse::NetworkTopology& tree, const dmmse::WorldModel& w, std::size_t horizon,
                         std::uint64_t seed, double tol) {
  const auto tr = dmmse::sample_trace(w, horizon, seed);
  const auto [oe, log] = dmmse::oedol_run(dmmse::oedol_schedule(tree, w, horizon), tr);
  const auto od = dmmse::odol_run(dmmse::odol_schedule(tree, w, horizon), tr);
  for (std::size_t i = 0; i < tree.size(); ++i) {
    for (std::size_t t = 0; t <= horizon; ++t) {
      EXPECT_LT(dmmse::relative_error(oe.estimate(i, t), od.estimate(i, t)), tol) << "agent " << i << " t " << t;
    }
    EXPECT_EQ(log.sent[i].rows(), static_cast<Eigen::Index>(w.p()));
    EXPECT_EQ(log.sent[i].cols(), static_cast<Eigen::Index>(horizon));
  }
}

TEST(OedolSchedule, FirstStep) {
  const auto w = fixtures::world(3, 2, 5, 4);
  const auto tree = dmmse::random_tree(5, 4);
  const auto sched = dmmse::oedol_schedule(tree, w, 2);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& s = sched.step(i, 1);
    const dmmse::Matrix b =
        w.sigma_x * w.H[i].transpose() * (w.H[i] * w.sigma_x * w.H[i].transpose() + w.sigma_n[i]).inverse();
    EXPECT_LT((s.B - b).norm(), 1e-12);
    EXPECT_LT((s.A - (dmmse::Matrix::Identity(3, 3) - b * w.H[i])).norm(), 1e-12);
    EXPECT_TRUE(s.C.isZero(1e-14));
  }
}

TEST(OedolSchedule, ScalarFirstMessage) {
  const auto w = dmmse::scalar_world(4, 1.0, 1.0);
  const auto tree = dmmse::make_topology(TopologyKind::star, 4);
  const auto sched = dmmse::oedol_schedule(tree, w, 1);
  const auto tr = dmmse::sample_trace(w, 1, 3);
  const auto [traj, log] = dmmse::oedol_run(sched, tr);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(sched.step(i, 1).B(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(log.sent[i](0, 0), tr.measurement(i, 1)(0) / 2, 1e-15);
  }
}

TEST(OedolSchedule, StarSecondStepModel) {
  const auto w = fixtures::world(2, 1, 3, 8);
  const auto tree = dmmse::make_topology(TopologyKind::star, 3);
  const auto sched = dmmse::oedol_schedule(tree, w, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& s1 = sched.step(i, 1);
    const auto nbrs = tree.neighbors(i);
    for (std::size_t b = 0; b < nbrs.size(); ++b) {
      const auto j = nbrs[b];
      const auto& bj = sched.step(j, 1).B;
      EXPECT_LT((s1.Hbar.middleRows(2 * b, 2) - bj * w.H[j]).norm(), 1e-12);
      EXPECT_LT((s1.G[b] - bj * w.sigma_n[j] * bj.transpose()).norm(), 1e-12);
    }
  }
}

TEST(OedolSchedule, RejectsCycles) {
  try {
    dmmse::oedol_schedule(dmmse::make_topology(TopologyKind::cycle, 4), dmmse::scalar_world(4, 1, 1), 3);
    FAIL();
  } catch (const dmmse::Error& e) {
    EXPECT_EQ(e.kind(), dmmse::ErrorKind::not_a_tree);
    EXPECT_NE(std::string(e.what()).find("3-4"), std::string::npos);
  }
}

TEST(OedolSchedule, DataIndependentAndCovarianceMatchesOdol) {
  const auto tree = dmmse::random_tree(8, 12);
  const auto w = fixtures::world(3, 1, 8, 12);
  const auto a = dmmse::oedol_schedule(tree, w, 8);
  EXPECT_TRUE(a == dmmse::oedol_schedule(tree, w, 8));
  const auto od = dmmse::odol_schedule(tree, w, 8);
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t t = 1; t <= 8; ++t) EXPECT_LT((a.step(i, t).covariance - od.covariance(i, t)).norm(), 1e-8);
  }
}

TEST(OedolRun, SecondStepIsLocalConditioning) {
  const auto w = dmmse::scalar_world(5, 1.0, 0.7);
  const auto tree = dmmse::random_tree(5, 2);
  const auto tr = dmmse::sample_trace(w, 2, 6);
  const auto [traj, log] = dmmse::oedol_run(dmmse::oedol_schedule(tree, w, 2), tr);
  for (std::size_t i = 0; i < 5; ++i) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs{{i, 1}, {i, 2}};
    for (auto j : tree.neighbors(i)) pairs.emplace_back(j, 1);
    const auto ref = reference::condition(w, pairs, tr);
    EXPECT_LT(dmmse::relative_error(traj.estimate(i, 2), ref.mean), 1e-10);
  }
}

TEST(OedolRun, LineMatchesOdol) {
  expect_matches_odol(dmmse::make_topology(TopologyKind::line, 5), fixtures::world(2, 1, 5, 1), 6, 7, 1e-6);
  expect_matches_odol(dmmse::make_topology(TopologyKind::line, 5), dmmse::scalar_world(5, 1, 1), 6, 7, 1e-6);
}

TEST(OedolRun, RandomTreesMatchOdol) {
  for (std::uint64_t s = 0; s < 12; ++s) {
    const std::size_t m = 2 + s % 9;
    auto w = fixtures::world(1 + s % 3, 1 + s % 2, m, s);
    w.xbar.setConstant(0.25);
    expect_matches_odol(dmmse::random_tree(m, s), w, 10, 50 + s, 1e-6);
  }
}

TEST(OedolRun, DeepLineMatchesOdol) {
  // Diameter well past four hops.
  expect_matches_odol(dmmse::make_topology(TopologyKind::line, 10), fixtures::world(3, 2, 10, 5), 12, 5, 1e-6);
}

TEST(OedolRun, FullScaleMatchesOdol) {
  const auto g = dmmse::make_topology(TopologyKind::random, 20, 7u);
  expect_matches_odol(dmmse::spanning_tree(g), fixtures::world(10, 1, 20, 7), 50, 7, 1e-6);
}

TEST(OedolRun, CovarianceMatchesMonteCarlo) {
  const auto tree = dmmse::random_tree(6, 3);
  const auto w = fixtures::world(2, 1, 6, 3);
  const std::size_t horizon = 5;
  const auto sched = dmmse::oedol_schedule(tree, w, horizon);
  const int trials = 200;
  for (std::size_t i : {0u, 3u}) {
    std::vector<double> err;
    for (int k = 0; k < trials; ++k) {
      const auto tr = dmmse::sample_trace(w, horizon, static_cast<std::uint64_t>(k));
      const auto [traj, log] = dmmse::oedol_run(sched, tr);
      err.push_back((tr.state() - traj.estimate(i, horizon)).squaredNorm());
    }
    double mean = 0;
    for (double e : err) mean += e;
    mean /= trials;
    double var = 0;
    for (double e : err) var += (e - mean) * (e - mean);
    const double stderr_ = std::sqrt(var / (trials - 1) / trials);
    EXPECT_NEAR(mean, sched.step(i, horizon).covariance.trace(), 3 * stderr_);
  }
}

TEST(OedolRun, BroadcastMessagesHaveLengthP) {
  const auto tree = dmmse::random_tree(6, 9);
  const auto w = fixtures::world(4, 2, 6, 9);
  const auto tr = dmmse::sample_trace(w, 4, 1);
  const auto sched = dmmse::oedol_schedule(tree, w, 4);
  const auto [traj, log] = dmmse::oedol_run(sched, tr);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(log.sent[i].rows(), 4);
    for (std::size_t t = 1; t <= 4; ++t) {
      const dmmse::Vector s = traj.estimate(i, t) - sched.step(i, t).A * traj.estimate(i, t - 1);
      EXPECT_LT((s - log.sent[i].col(static_cast<Eigen::Index>(t - 1))).norm(), 1e-10);
    }
  }
}

}  // namespace
