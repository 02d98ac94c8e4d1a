#pragma once

// Independent reference computations for tests. Deliberately naive: explicit
// inverses and brute-force enumeration, sharing no code paths with the
// library beyond plain data types.

#include <dmmse/model.hpp>
#include <dmmse/topology.hpp>

#include <Eigen/Dense>

#include <deque>
#include <limits>
#include <utility>
#include <vector>

namespace reference {

using dmmse::Matrix;
using dmmse::Vector;

/// All-pairs hop distances by Floyd-Warshall.
inline std::vector<std::vector<std::size_t>> distances(const dmmse::NetworkTopology& topo) {
  const std::size_t m = topo.size();
  const std::size_t inf = std::numeric_limits<std::size_t>::max() / 4;
  std::vector<std::vector<std::size_t>> d(m, std::vector<std::size_t>(m, inf));
  for (std::size_t i = 0; i < m; ++i) d[i][i] = 0;
  for (const auto& e : topo.edges()) d[e.a][e.b] = d[e.b][e.a] = 1;
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

/// Oracle set as an unordered list of (agent, time) pairs.
inline std::vector<std::pair<std::size_t, std::size_t>> oracle_pairs(const dmmse::NetworkTopology& topo,
                                                                     std::size_t i, std::size_t t) {
  const auto d = distances(topo);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t j = 0; j < topo.size(); ++j)
    for (std::size_t tau = 1; tau + d[i][j] <= t; ++tau) out.emplace_back(j, tau);
  return out;
}

/// Conditional mean and covariance by the joint covariance of (x, y) with an
/// explicit inverse (full rank) of the measurement covariance.
struct Conditional {
  Vector mean;
  Matrix cov;
  Matrix gain;
};

inline Conditional condition(const dmmse::WorldModel& model,
                             const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                             const std::vector<Vector>& values) {
  const auto p = static_cast<Eigen::Index>(model.p());
  const auto q = static_cast<Eigen::Index>(model.q());
  const auto n = static_cast<Eigen::Index>(pairs.size()) * q;
  if (n == 0) return {model.xbar, model.sigma_x, Matrix::Zero(p, 0)};
  Matrix cxy(p, n);
  Matrix cyy(n, n);
  Vector my(n);
  Vector y(n);
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    const auto& ha = model.H[pairs[a].first];
    cxy.middleCols(a * q, q) = model.sigma_x * ha.transpose();
    my.segment(a * q, q) = ha * model.xbar;
    y.segment(a * q, q) = values[a];
    for (std::size_t b = 0; b < pairs.size(); ++b) {
      Matrix block = ha * model.sigma_x * model.H[pairs[b].first].transpose();
      if (pairs[a] == pairs[b]) block += model.sigma_n[pairs[a].first];
      cyy.block(a * q, b * q, q, q) = block;
    }
  }
  const Matrix gain = cxy * cyy.inverse();
  return {model.xbar + gain * (y - my), model.sigma_x - gain * cxy.transpose(), gain};
}

inline Conditional condition(const dmmse::WorldModel& model,
                             const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                             const dmmse::MeasurementTrace& trace) {
  std::vector<Vector> values;
  for (const auto& [j, tau] : pairs) values.push_back(trace.measurement(j, tau));
  return condition(model, pairs, values);
}

}  // namespace reference
