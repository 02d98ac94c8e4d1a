#include "dmmse/sdol.hpp"

#include "dmmse/error.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <limits>

namespace dmmse {

namespace {

bool positive_definite(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  return llt.info() == Eigen::Success && llt.rcond() > 1e-12;
}

}  // namespace

std::string_view to_string(MemoryLayout layout) noexcept {
  switch (layout) {
    case MemoryLayout::raw_measurements: return "raw";
    case MemoryLayout::memory_elements: return "elements";
    case MemoryLayout::automatic: return "auto";
  }
  return "unknown";
}

std::optional<MemoryLayout> parse_memory_layout(std::string_view name) noexcept {
  for (auto l : {MemoryLayout::raw_measurements, MemoryLayout::memory_elements, MemoryLayout::automatic}) {
    if (to_string(l) == name) return l;
  }
  return std::nullopt;
}

SdolWeights sdol_weights(const NetworkTopology& topo, const WorldModel& model, std::size_t window) {
  model.validate();
  const std::size_t m = topo.size();
  if (model.agents() != m) throw Error(ErrorKind::invalid_input, "model and topology agent counts differ");
  if (!model.xbar.isZero(0.0)) throw Error(ErrorKind::unsupported_prior, "windowed weights assume a zero prior mean");
  const auto hops = hop_structure(topo);
  if (window == 0 || window < hops.max_eccentricity()) {
    throw Error(ErrorKind::invalid_window, "window " + std::to_string(window) + " is below the maximum eccentricity " +
                                               std::to_string(hops.max_eccentricity()));
  }
  const auto p = static_cast<Eigen::Index>(model.p());
  const auto q = static_cast<Eigen::Index>(model.q());
  const Matrix eye = Matrix::Identity(p, p);
  const bool prior_pd = positive_definite(model.sigma_x);
  std::vector<Matrix> info(m);
  bool noise_pd = true;
  for (Agent j = 0; j < m; ++j) {
    noise_pd = noise_pd && positive_definite(model.sigma_n[j]);
    if (noise_pd) info[j] = model.H[j].transpose() * model.sigma_n[j].llt().solve(model.H[j]);
  }

  SdolWeights w;
  w.window = window;
  w.p = model.p();
  w.q = model.q();
  w.M = conditioning_gain(model.sigma_x, model.stacked_observation(), model.stacked_noise()).matrix;

  for (Agent i = 0; i < m; ++i) {
    SdolAgentWeights a;
    for (std::size_t k = 0; k < hops.khop[i].size() && k < window; ++k) {
      for (Agent j : hops.khop[i][k]) a.received.emplace_back(j, k);
    }
    const auto n = static_cast<Eigen::Index>(a.received.size());
    a.Hbar.resize(n * q, p);
    std::vector<Matrix> noise_blocks;
    for (Eigen::Index r = 0; r < n; ++r) {
      a.Hbar.middleRows(r * q, q) = model.H[a.received[static_cast<std::size_t>(r)].first];
      noise_blocks.push_back(model.sigma_n[a.received[static_cast<std::size_t>(r)].first]);
    }
    a.noise_bar = block_diagonal(noise_blocks);

    // Memory element over the agents whose age-T_o measurement was in the
    // previous window.
    const Matrix m_reach = conditioning_gain(model.sigma_x, a.Hbar, a.noise_bar).matrix;
    a.M = Matrix::Zero(p, q * static_cast<Eigen::Index>(m));
    for (Eigen::Index r = 0; r < n; ++r) {
      a.M.middleCols(static_cast<Eigen::Index>(a.received[static_cast<std::size_t>(r)].first) * q, q) =
          m_reach.middleCols(r * q, q);
    }
    const Matrix sigma_m = condition_covariance((eye - m_reach * a.Hbar) * model.sigma_x);

    // Carried-over window: agent j at hop k contributes ages k+1..T_o-1.
    std::vector<std::pair<Agent, std::size_t>> carried;  // (agent, copies)
    std::size_t carried_total = 0;
    for (const auto& [j, k] : a.received) {
      if (k + 1 < window) {
        carried.emplace_back(j, window - 1 - k);
        carried_total += window - 1 - k;
      }
    }

    Matrix f;      // N_i Hhat_i
    Matrix fnoise; // N_i Sigma-hat_{n_i} N_i'
    if (carried_total == 0) {
      f = Matrix::Zero(p, p);
      fnoise = Matrix::Zero(p, p);
      a.window_information = Matrix::Zero(p, p);
      a.sigma_xi = model.sigma_x;
    } else if (prior_pd && noise_pd) {
      Matrix j_info = Matrix::Zero(p, p);
      for (const auto& [j, copies] : carried) j_info += static_cast<double>(copies) * info[j];
      a.window_information = symmetrize(j_info);
      const Matrix posterior = symmetrize((model.sigma_x.llt().solve(eye) + a.window_information).llt().solve(eye));
      f = posterior * a.window_information;
      fnoise = symmetrize(posterior * a.window_information * posterior);
      a.sigma_xi = posterior;
    } else {
      std::vector<Matrix> hs;
      std::vector<Matrix> ns;
      for (const auto& [j, copies] : carried) {
        for (std::size_t c = 0; c < copies; ++c) {
          hs.push_back(model.H[j]);
          ns.push_back(model.sigma_n[j]);
        }
      }
      Matrix hhat(static_cast<Eigen::Index>(hs.size()) * q, p);
      for (std::size_t r = 0; r < hs.size(); ++r) hhat.middleRows(static_cast<Eigen::Index>(r) * q, q) = hs[r];
      const Matrix nhat = block_diagonal(ns);
      const Matrix nn = conditioning_gain(model.sigma_x, hhat, nhat).matrix;
      a.window_information = symmetrize(hhat.transpose() * symmetric_pseudo_inverse(nhat) * hhat);
      f = nn * hhat;
      fnoise = symmetrize(nn * nhat * nn.transpose());
      a.sigma_xi = condition_covariance((eye - f) * model.sigma_x);
    }

    if (carried_total == 0) {
      a.L = Matrix::Zero(p, p);
      a.K = eye;
      a.l_condition = 0.0;
    } else {
      a.L = conditioning_gain(sigma_m, f, fnoise).matrix;
      Eigen::JacobiSVD<Matrix> svd(a.L);
      const auto& sv = svd.singularValues();
      a.l_condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
      if (!(a.l_condition <= kMaxLCondition)) {
        throw Error(ErrorKind::build_failure, "L of agent " + std::to_string(i + 1) +
                                                  " is numerically singular (condition number " +
                                                  std::to_string(a.l_condition) + ")");
      }
      a.K = eye - a.L * f;
    }

    const Matrix bc = conditioning_gain(a.sigma_xi, a.Hbar, a.noise_bar).matrix;
    a.B = bc.leftCols(q);
    a.C = bc.rightCols(bc.cols() - q);
    const Matrix x = eye - bc * a.Hbar;
    if (carried_total == 0) {
      a.A = Matrix::Zero(p, p);
      a.D = Matrix::Zero(p, a.M.cols());
    } else {
      // A = X L^-1  <=>  L' A' = X'
      a.A = a.L.transpose().fullPivLu().solve(x.transpose()).transpose();
      a.D = a.A * a.K * a.M;
    }
    w.agents.push_back(std::move(a));
  }
  return w;
}

Matrix steady_state_covariance(const SdolWeights& weights, Agent i) {
  const auto& a = weights.agents.at(i);
  if (a.L.isZero(0.0)) {
    // Empty carried-over window: the error is that of conditioning on the new
    // measurements alone.
    const auto p = a.sigma_xi.rows();
    Matrix bc(p, a.B.cols() + a.C.cols());
    bc << a.B, a.C;
    return symmetrize((Matrix::Identity(p, p) - bc * a.Hbar) * a.sigma_xi);
  }
  return symmetrize(a.A * a.L * a.sigma_xi);
}

SdolMemory::SdolMemory(std::size_t window, MemoryLayout layout, const SdolAgentWeights& weights, std::size_t q,
                       std::size_t agents)
    : layout_(layout), weights_(&weights), q_(static_cast<Eigen::Index>(q)) {
  if (layout_ == MemoryLayout::automatic) {
    layout_ = q <= static_cast<std::size_t>(weights.A.rows()) ? MemoryLayout::raw_measurements
                                                              : MemoryLayout::memory_elements;
  }
  const Eigen::Index size = layout_ == MemoryLayout::raw_measurements ? q_ * static_cast<Eigen::Index>(agents)
                                                                      : weights.A.rows();
  slots_.assign(window, Vector::Zero(size));
  tags_.assign(window, 0);
}

void SdolMemory::store(Agent j, std::size_t tau, const Vector& y) {
  if (tau < 1) return;
  const std::size_t s = tau % slots_.size();
  if (tags_[s] != tau) {
    slots_[s].setZero();
    tags_[s] = tau;
  }
  const Eigen::Index off = static_cast<Eigen::Index>(j) * q_;
  if (layout_ == MemoryLayout::raw_measurements) {
    slots_[s].segment(off, q_) = y;
  } else {
    slots_[s] += weights_->D.middleCols(off, q_) * y;
  }
}

Vector SdolMemory::evict(std::size_t tau) {
  const Eigen::Index p = weights_->A.rows();
  if (tau < 1) return Vector::Zero(p);
  const std::size_t s = tau % slots_.size();
  if (tags_[s] != tau) return Vector::Zero(p);
  Vector out = layout_ == MemoryLayout::raw_measurements ? Vector(weights_->D * slots_[s]) : slots_[s];
  slots_[s].setZero();
  tags_[s] = 0;
  return out;
}

EstimateTrajectory sdol_run(const SdolWeights& weights, const MeasurementTrace& trace, MemoryLayout layout) {
  const std::size_t m = weights.agents.size();
  if (trace.agents() != m || trace.q() != weights.q) {
    throw Error(ErrorKind::invalid_input, "trace does not match the weights");
  }
  const auto p = static_cast<Eigen::Index>(weights.p);
  const auto q = static_cast<Eigen::Index>(weights.q);
  const std::size_t horizon = trace.horizon();
  EstimateTrajectory traj("sdol", m, horizon, Vector::Zero(p));

  for (Agent i = 0; i < m; ++i) {
    const auto& a = weights.agents[i];
    SdolMemory memory(weights.window, layout, a, weights.q, m);
    Vector u = Vector::Zero(p);
    const auto n_recv = static_cast<Eigen::Index>(a.received.size()) - 1;
    Vector r(n_recv * q);
    for (std::size_t t = 1; t <= horizon; ++t) {
      const Vector correction = t > weights.window ? memory.evict(t - weights.window) : Vector::Zero(p);
      for (std::size_t k = 1; k < a.received.size(); ++k) {
        const auto [j, hop] = a.received[k];
        auto seg = r.segment(static_cast<Eigen::Index>(k - 1) * q, q);
        if (t > hop) {
          seg = trace.measurement(j, t - hop);
        } else {
          seg.setZero();
        }
      }
      const Vector own = trace.measurement(i, t);
      u = a.A * u + a.B * own + a.C * r - correction;
      traj.set(i, t, u);
      memory.store(i, t, own);
      for (std::size_t k = 1; k < a.received.size(); ++k) {
        const auto [j, hop] = a.received[k];
        if (t > hop) memory.store(j, t - hop, r.segment(static_cast<Eigen::Index>(k - 1) * q, q));
      }
    }
  }
  return traj;
}

}  // namespace dmmse
