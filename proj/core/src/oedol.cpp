#include "dmmse/oedol.hpp"

#include "dmmse/error.hpp"

#include <algorithm>
#include <array>

namespace dmmse {

namespace {

std::size_t position(const NetworkTopology& topo, Agent owner, Agent neighbor) {
  const auto n = topo.neighbors(owner);
  return static_cast<std::size_t>(std::lower_bound(n.begin(), n.end(), neighbor) - n.begin());
}

bool same(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

}  // namespace

OedolSchedule::OedolSchedule(NetworkTopology tree, WorldModel model, std::vector<std::vector<OedolStep>> steps)
    : tree_(std::move(tree)), model_(std::move(model)), steps_(std::move(steps)) {}

bool OedolSchedule::operator==(const OedolSchedule& other) const {
  if (!(tree_ == other.tree_) || !(model_ == other.model_) || steps_.size() != other.steps_.size()) return false;
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (steps_[i].size() != other.steps_[i].size()) return false;
    for (std::size_t t = 0; t < steps_[i].size(); ++t) {
      const auto& a = steps_[i][t];
      const auto& b = other.steps_[i][t];
      if (a.A != b.A || a.B != b.B || a.C != b.C || a.D != b.D || a.Hbar != b.Hbar ||
          a.covariance != b.covariance || !same(a.correction, b.correction) || !same(a.G, b.G)) {
        return false;
      }
    }
  }
  return true;
}

OedolSchedule oedol_schedule(const NetworkTopology& tree, const WorldModel& model, std::size_t horizon) {
  if (horizon < 1) throw Error(ErrorKind::invalid_input, "horizon must be at least 1");
  if (auto e = cycle_edge(tree)) {
    throw Error(ErrorKind::not_a_tree, "edge " + std::to_string(e->a + 1) + "-" + std::to_string(e->b + 1) +
                                           " closes a cycle");
  }
  model.validate();
  const std::size_t m = tree.size();
  if (model.agents() != m) throw Error(ErrorKind::invalid_input, "model and topology agent counts differ");
  const auto p = static_cast<Eigen::Index>(model.p());
  const auto q = static_cast<Eigen::Index>(model.q());
  const Matrix eye = Matrix::Identity(p, p);

  std::vector<std::vector<OedolStep>> steps(m);
  for (Agent i = 0; i < m; ++i) {
    const auto pi = static_cast<Eigen::Index>(tree.degree(i));
    OedolStep s;
    s.A = eye;
    s.B = Matrix::Zero(p, q);
    s.C = Matrix::Zero(p, p * pi);
    s.D = Matrix::Zero(p * pi, p);
    s.correction.assign(tree.degree(i), Matrix::Zero(p, p));
    s.Hbar = Matrix::Zero(p * pi, p);
    s.G.assign(tree.degree(i), Matrix::Zero(p, p));
    s.covariance = model.sigma_x;
    steps[i].reserve(horizon + 1);
    steps[i].push_back(std::move(s));
  }

  for (std::size_t t = 1; t <= horizon; ++t) {
    // Gains from the previous step's innovation model.
    for (Agent i = 0; i < m; ++i) {
      const auto& prev = steps[i][t - 1];
      const auto pi = static_cast<Eigen::Index>(tree.degree(i));
      Matrix htilde(q + p * pi, p);
      htilde << model.H[i], prev.Hbar;
      std::vector<Matrix> noise_blocks{model.sigma_n[i]};
      noise_blocks.insert(noise_blocks.end(), prev.G.begin(), prev.G.end());
      const Gain g = conditioning_gain(prev.covariance, htilde, block_diagonal(noise_blocks));

      OedolStep s;
      s.B = g.matrix.leftCols(q);
      s.C = g.matrix.rightCols(p * pi);
      s.pseudo_inverse = g.pseudo_inverse;
      s.A = eye - s.B * model.H[i] - s.C * prev.Hbar;
      s.covariance = condition_covariance(s.A * prev.covariance);
      steps[i].push_back(std::move(s));
    }

    // Backflow corrections and the next innovation model.
    for (Agent i = 0; i < m; ++i) {
      const auto nbrs = tree.neighbors(i);
      auto& s = steps[i][t];
      const auto pi = static_cast<Eigen::Index>(nbrs.size());
      s.D = Matrix::Zero(p * pi, p);
      s.Hbar = Matrix::Zero(p * pi, p);
      s.correction.clear();
      s.G.clear();
      for (std::size_t b = 0; b < nbrs.size(); ++b) {
        const Agent j = nbrs[b];
        const auto& sj = steps[j][t];
        const auto& sj_prev = steps[j][t - 1];
        const auto back = static_cast<Eigen::Index>(position(tree, j, i)) * p;
        const auto fwd = static_cast<Eigen::Index>(b) * p;
        const Matrix c_ji = sj.C.middleCols(back, p);  // C^{(i)}_{j,t}
        s.D.middleRows(fwd, p) = c_ji;
        s.correction.push_back(c_ji * steps[i][t - 1].C.middleCols(fwd, p));

        // What j's message at t tells i beyond what i itself fed to j.
        Matrix hbar = sj.B * model.H[j];
        Matrix g = sj.B * model.sigma_n[j] * sj.B.transpose();
        const auto jn = tree.neighbors(j);
        for (std::size_t k = 0; k < jn.size(); ++k) {
          if (jn[k] == i) continue;
          const auto kb = static_cast<Eigen::Index>(k) * p;
          const Matrix c_jk = sj.C.middleCols(kb, p);
          hbar += c_jk * sj_prev.Hbar.middleRows(kb, p);
          g += c_jk * sj_prev.G[k] * c_jk.transpose();
        }
        s.Hbar.middleRows(fwd, p) = hbar;
        s.G.push_back(symmetrize(g));
      }
    }
  }
  return OedolSchedule(tree, model, std::move(steps));
}

std::pair<EstimateTrajectory, MessageLog> oedol_run(const OedolSchedule& schedule, const MeasurementTrace& trace) {
  if (trace.horizon() > schedule.horizon()) throw Error(ErrorKind::invalid_input, "trace longer than the schedule");
  if (trace.agents() != schedule.agents()) throw Error(ErrorKind::invalid_input, "trace and schedule agent counts differ");
  const auto& tree = schedule.topology();
  const auto& model = schedule.model();
  const std::size_t m = tree.size();
  const std::size_t horizon = trace.horizon();
  const auto p = static_cast<Eigen::Index>(model.p());

  EstimateTrajectory traj("oedol", m, horizon, model.xbar);
  MessageLog log;
  log.sent.assign(m, Matrix::Zero(p, static_cast<Eigen::Index>(horizon)));

  std::vector<Vector> u(m, model.xbar);
  // Histories indexed [0] = t-1, [1] = t-2; zero before t = 1.
  std::vector<std::array<Vector, 2>> s_hist(m);
  std::vector<std::array<Vector, 2>> w_hist(m);
  for (Agent i = 0; i < m; ++i) {
    const auto width = p * static_cast<Eigen::Index>(tree.degree(i));
    s_hist[i] = {Vector::Zero(p), Vector::Zero(p)};
    w_hist[i] = {Vector::Zero(width), Vector::Zero(width)};
  }

  for (std::size_t t = 1; t <= horizon; ++t) {
    std::vector<Vector> outgoing(m);
    std::vector<Vector> w_now(m);
    for (Agent i = 0; i < m; ++i) {
      const auto nbrs = tree.neighbors(i);
      const auto& prev = schedule.step(i, t - 1);
      Vector r(p * static_cast<Eigen::Index>(nbrs.size()));
      for (std::size_t b = 0; b < nbrs.size(); ++b) {
        r.segment(static_cast<Eigen::Index>(b) * p, p) = s_hist[nbrs[b]][0];
      }
      Vector w = r - prev.D * s_hist[i][1];
      for (std::size_t b = 0; b < nbrs.size(); ++b) {
        const auto off = static_cast<Eigen::Index>(b) * p;
        w.segment(off, p) += prev.correction[b] * w_hist[i][1].segment(off, p);
      }
      const auto& now = schedule.step(i, t);
      outgoing[i] = now.B * trace.measurement(i, t) + now.C * w;
      u[i] = now.A * u[i] + outgoing[i];
      w_now[i] = std::move(w);
      traj.set(i, t, u[i]);
      log.sent[i].col(static_cast<Eigen::Index>(t - 1)) = outgoing[i];
    }
    // Round barrier: publish messages and shift histories together.
    for (Agent i = 0; i < m; ++i) {
      s_hist[i][1] = std::move(s_hist[i][0]);
      s_hist[i][0] = std::move(outgoing[i]);
      w_hist[i][1] = std::move(w_hist[i][0]);
      w_hist[i][0] = std::move(w_now[i]);
    }
  }
  return {std::move(traj), std::move(log)};
}

}  // namespace dmmse
