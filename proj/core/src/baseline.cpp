#include "dmmse/baseline.hpp"

#include "dmmse/error.hpp"

#include <algorithm>
#include <cmath>

namespace dmmse {

CombinerMatrix relative_variance_combiner(const NetworkTopology& topo, std::span<const double> noise_stds) {
  const std::size_t m = topo.size();
  if (noise_stds.size() != m) throw Error(ErrorKind::invalid_input, "one noise std per agent required");
  for (std::size_t j = 0; j < m; ++j) {
    if (!(noise_stds[j] > 0.0) || !std::isfinite(noise_stds[j])) {
      throw Error(ErrorKind::invalid_input, "noise std of agent " + std::to_string(j + 1) + " must be positive");
    }
  }
  CombinerMatrix c{Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m))};
  for (Agent i = 0; i < m; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    auto precision = [&](Agent j) { return 1.0 / (noise_stds[j] * noise_stds[j]); };
    double total = precision(i);
    for (Agent j : topo.neighbors(i)) total += precision(j);
    c.weights(row, row) = precision(i) / total;
    for (Agent j : topo.neighbors(i)) c.weights(row, static_cast<Eigen::Index>(j)) = precision(j) / total;
  }
  return c;
}

CombinerMatrix laplacian_combiner(const NetworkTopology& topo) {
  const std::size_t m = topo.size();
  std::size_t n_max = 1;
  for (Agent i = 0; i < m; ++i) n_max = std::max(n_max, topo.degree(i) + 1);
  const double w = 1.0 / static_cast<double>(n_max);
  CombinerMatrix c{Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m))};
  for (Agent i = 0; i < m; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    c.weights(row, row) = 1.0 - static_cast<double>(topo.degree(i)) * w;
    for (Agent j : topo.neighbors(i)) c.weights(row, static_cast<Eigen::Index>(j)) = w;
  }
  return c;
}

EstimateTrajectory drls_run(const NetworkTopology& topo, const WorldModel& model, const CombinerMatrix& combiner,
                            const MeasurementTrace& trace, const DrlsOptions& options) {
  if (!(options.forgetting > 0.0 && options.forgetting <= 1.0)) {
    throw Error(ErrorKind::invalid_input, "forgetting factor must lie in (0, 1]");
  }
  if (!(options.ridge > 0.0)) throw Error(ErrorKind::invalid_input, "ridge must be positive");
  const std::size_t m = topo.size();
  if (model.agents() != m || trace.agents() != m) throw Error(ErrorKind::invalid_input, "agent counts differ");
  if (combiner.weights.rows() != static_cast<Eigen::Index>(m)) {
    throw Error(ErrorKind::invalid_input, "combiner size does not match the topology");
  }
  const auto p = static_cast<Eigen::Index>(model.p());
  const auto laplace = laplacian_combiner(topo);

  std::vector<Vector> w(m, model.xbar);
  std::vector<Matrix> P(m, Matrix::Identity(p, p) / options.ridge);
  EstimateTrajectory traj("drls", m, trace.horizon(), model.xbar);

  // Neighbor data travels one hop per round: at t agent k holds its own
  // y_{k,t} and what neighbors disclosed at t-1, namely y_{l,t-1} and psi_{l,t-1}.
  std::vector<Vector> psi(m, model.xbar);
  std::vector<Vector> psi_prev(m, model.xbar);
  for (std::size_t t = 1; t <= trace.horizon(); ++t) {
    for (Agent k = 0; k < m; ++k) {
      Vector est = w[k];
      Matrix cov = P[k] / options.forgetting;
      std::vector<Agent> hood{k};
      hood.insert(hood.end(), topo.neighbors(k).begin(), topo.neighbors(k).end());
      std::sort(hood.begin(), hood.end());
      for (Agent l : hood) {
        const double c = laplace(k, l);
        const std::size_t tau = l == k ? t : t - 1;
        if (c <= 0.0 || tau < 1) continue;
        const Matrix& h = model.H[l];
        // Weighted observation with noise covariance Sigma_l / c.
        const Matrix s = symmetrize(h * cov * h.transpose() + model.sigma_n[l] / c);
        const Matrix gain = s.ldlt().solve(h * cov).transpose();
        est += gain * (trace.measurement(l, tau) - h * est);
        cov = symmetrize(cov - gain * h * cov);
      }
      psi[k] = std::move(est);
      P[k] = std::move(cov);
    }
    for (Agent k = 0; k < m; ++k) {
      Vector combined = combiner(k, k) * psi[k];
      for (Agent l : topo.neighbors(k)) combined += combiner(k, l) * psi_prev[l];
      w[k] = std::move(combined);
      traj.set(k, t, w[k]);
    }
    std::swap(psi, psi_prev);
  }
  return traj;
}

}  // namespace dmmse
