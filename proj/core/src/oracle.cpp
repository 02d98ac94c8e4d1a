#include "dmmse/oracle.hpp"

#include "dmmse/error.hpp"

#include <algorithm>

namespace dmmse {

bool InformationSet::contains(const MeasurementIndex& idx) const {
  return std::find(entries.begin(), entries.end(), idx) != entries.end();
}

InformationSet oracle_information_set(const HopStructure& hops, Agent i, std::size_t t,
                                      std::optional<std::size_t> window) {
  if (t < 1) throw Error(ErrorKind::invalid_input, "information sets start at t = 1");
  if (i >= hops.agents()) throw Error(ErrorKind::invalid_input, "agent out of range");
  if (window && (*window == 0 || *window < hops.max_eccentricity())) {
    throw Error(ErrorKind::invalid_window, "window " + std::to_string(*window) +
                                               " is below the maximum eccentricity " +
                                               std::to_string(hops.max_eccentricity()));
  }
  const std::size_t first = window && t > *window ? t - *window + 1 : 1;
  InformationSet info{i, t, {}};
  const auto& rings = hops.khop[i];
  for (std::size_t k = 0; k < rings.size() && k < t; ++k) {
    for (Agent j : rings[k]) {
      for (std::size_t tau = first; tau <= t - k; ++tau) info.entries.push_back({j, tau});
    }
  }
  return info;
}

std::vector<MeasurementIndex> innovation_entries(const HopStructure& hops, Agent i, std::size_t t) {
  std::vector<MeasurementIndex> out;
  const auto& rings = hops.khop.at(i);
  for (std::size_t k = 0; k < rings.size() && k < t; ++k) {
    for (Agent j : rings[k]) out.push_back({j, t - k});
  }
  return out;
}

Matrix stacked_observation(const WorldModel& model, std::span<const MeasurementIndex> entries) {
  const auto q = static_cast<Eigen::Index>(model.q());
  Matrix out(q * static_cast<Eigen::Index>(entries.size()), static_cast<Eigen::Index>(model.p()));
  for (std::size_t k = 0; k < entries.size(); ++k) {
    out.middleRows(static_cast<Eigen::Index>(k) * q, q) = model.H.at(entries[k].agent);
  }
  return out;
}

Matrix stacked_noise(const WorldModel& model, std::span<const MeasurementIndex> entries) {
  const auto q = static_cast<Eigen::Index>(model.q());
  const auto n = q * static_cast<Eigen::Index>(entries.size());
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto off = static_cast<Eigen::Index>(k) * q;
    out.block(off, off, q, q) = model.sigma_n.at(entries[k].agent);
  }
  return out;
}

Vector stacked_measurements(const MeasurementTrace& trace, std::span<const MeasurementIndex> entries) {
  const auto q = static_cast<Eigen::Index>(trace.q());
  Vector out = Vector::Zero(q * static_cast<Eigen::Index>(entries.size()));
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    if (e.time < 1) continue;
    if (e.time > trace.horizon() || e.agent >= trace.agents()) {
      throw Error(ErrorKind::invalid_input, "measurement index outside the trace");
    }
    out.segment(static_cast<Eigen::Index>(k) * q, q) = trace.measurement(e.agent, e.time);
  }
  return out;
}

Posterior condition_on(const WorldModel& model, std::span<const MeasurementIndex> entries, const Vector& y) {
  const Matrix a = stacked_observation(model, entries);
  if (y.size() != a.rows()) throw Error(ErrorKind::invalid_input, "measurement stack does not match the entries");
  if (entries.empty()) return {model.xbar, model.sigma_x};
  const Gain g = conditioning_gain(model.sigma_x, a, stacked_noise(model, entries));
  Posterior post;
  post.mean = model.xbar + g.matrix * (y - a * model.xbar);
  post.covariance = symmetrize(model.sigma_x - g.matrix * a * model.sigma_x);
  return post;
}

Posterior batch_mmse(const WorldModel& model, const InformationSet& info, const MeasurementTrace& trace) {
  if (trace.agents() != model.agents() || trace.q() != model.q()) {
    throw Error(ErrorKind::invalid_input, "trace does not match the model");
  }
  return condition_on(model, info.entries, stacked_measurements(trace, info.entries));
}

OdolSchedule::OdolSchedule(WorldModel model, std::vector<std::vector<OdolStep>> steps)
    : model_(std::move(model)), steps_(std::move(steps)) {}

const Matrix& OdolSchedule::covariance(Agent i, std::size_t t) const {
  return t == 0 ? model_.sigma_x : step(i, t).covariance;
}

OdolSchedule odol_schedule(const NetworkTopology& topo, const WorldModel& model, std::size_t horizon) {
  if (horizon < 1) throw Error(ErrorKind::invalid_input, "horizon must be at least 1");
  model.validate();
  if (model.agents() != topo.size()) throw Error(ErrorKind::invalid_input, "model and topology agent counts differ");
  const auto hops = hop_structure(topo);
  const auto p = static_cast<Eigen::Index>(model.p());

  std::vector<std::vector<OdolStep>> steps(topo.size());
  for (Agent i = 0; i < topo.size(); ++i) {
    Matrix cov = model.sigma_x;
    steps[i].reserve(horizon);
    for (std::size_t t = 1; t <= horizon; ++t) {
      OdolStep s;
      s.innovation = innovation_entries(hops, i, t);
      s.observation = stacked_observation(model, s.innovation);
      const Gain g = conditioning_gain(cov, s.observation, stacked_noise(model, s.innovation));
      s.gain = g.matrix;
      s.pseudo_inverse = g.pseudo_inverse;
      cov = condition_covariance((Matrix::Identity(p, p) - s.gain * s.observation) * cov);
      s.covariance = cov;
      steps[i].push_back(std::move(s));
    }
  }
  return OdolSchedule(model, std::move(steps));
}

EstimateTrajectory odol_run(const OdolSchedule& schedule, const MeasurementTrace& trace) {
  if (trace.horizon() > schedule.horizon()) throw Error(ErrorKind::invalid_input, "trace longer than the schedule");
  if (trace.agents() != schedule.agents()) throw Error(ErrorKind::invalid_input, "trace and schedule agent counts differ");
  const auto& model = schedule.model();
  EstimateTrajectory traj("odol", schedule.agents(), trace.horizon(), model.xbar);
  for (Agent i = 0; i < schedule.agents(); ++i) {
    Vector u = model.xbar;
    for (std::size_t t = 1; t <= trace.horizon(); ++t) {
      const auto& s = schedule.step(i, t);
      const Vector w = stacked_measurements(trace, s.innovation);
      u += s.gain * (w - s.observation * u);
      traj.set(i, t, u);
    }
  }
  return traj;
}

}  // namespace dmmse
