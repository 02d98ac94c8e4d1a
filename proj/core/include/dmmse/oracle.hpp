#pragma once

#include "dmmse/linalg.hpp"
#include "dmmse/model.hpp"
#include "dmmse/topology.hpp"
#include "dmmse/trajectory.hpp"

#include <compare>
#include <optional>
#include <span>
#include <vector>

namespace dmmse {

/// Measurement y_{agent,time}; time is 1-based.
struct MeasurementIndex {
  Agent agent = 0;
  std::size_t time = 0;

  auto operator<=>(const MeasurementIndex&) const = default;
};

/// Measurements available to `owner` at `time`. Entries are ordered by hop
/// distance from the owner, then agent id, then time.
struct InformationSet {
  Agent owner = 0;
  std::size_t time = 0;
  std::vector<MeasurementIndex> entries;

  bool contains(const MeasurementIndex& idx) const;
};

/// Oracle information set: (j, tau) with 1 <= tau <= t - dist(i, j). With a
/// window the lower bound becomes max(1, t - window + 1). Throws
/// invalid-window when window < max eccentricity (or zero).
InformationSet oracle_information_set(const HopStructure& hops, Agent i, std::size_t t,
                                      std::optional<std::size_t> window = std::nullopt);

/// Measurements that become available to i exactly at t, canonical order.
std::vector<MeasurementIndex> innovation_entries(const HopStructure& hops, Agent i, std::size_t t);

/// Stack H_j per entry.
Matrix stacked_observation(const WorldModel& model, std::span<const MeasurementIndex> entries);
/// Block-diagonal noise covariance per entry.
Matrix stacked_noise(const WorldModel& model, std::span<const MeasurementIndex> entries);
/// Stacked measurement vector per entry; entries with time < 1 read as zero.
Vector stacked_measurements(const MeasurementTrace& trace, std::span<const MeasurementIndex> entries);

struct Posterior {
  Vector mean;
  Matrix covariance;
};

/// E[x | info] and its error covariance by direct joint-Gaussian conditioning.
Posterior batch_mmse(const WorldModel& model, const InformationSet& info, const MeasurementTrace& trace);
/// Same as batch_mmse over an explicit entry list and measurement stack.
Posterior condition_on(const WorldModel& model, std::span<const MeasurementIndex> entries, const Vector& y);

/// One ODOL step for agent i at time t.
struct OdolStep {
  std::vector<MeasurementIndex> innovation;  // Delta_{i,t}
  Matrix observation;                        // Hbar stacked over Delta_{i,t}
  Matrix gain;                               // K_{i,t}, p x q|Delta|
  Matrix covariance;                         // Sigma-hat_{i,t}
  bool pseudo_inverse = false;
};

class OdolSchedule {
 public:
  OdolSchedule(WorldModel model, std::vector<std::vector<OdolStep>> steps);

  const WorldModel& model() const noexcept { return model_; }
  std::size_t agents() const noexcept { return steps_.size(); }
  std::size_t horizon() const noexcept { return steps_.empty() ? 0 : steps_.front().size(); }
  /// t in 1..horizon.
  const OdolStep& step(Agent i, std::size_t t) const { return steps_.at(i).at(t - 1); }
  /// Sigma-hat_{i,t}; t = 0 gives the prior covariance.
  const Matrix& covariance(Agent i, std::size_t t) const;

 private:
  WorldModel model_;
  std::vector<std::vector<OdolStep>> steps_;
};

OdolSchedule odol_schedule(const NetworkTopology& topo, const WorldModel& model, std::size_t horizon);

/// Runs u_{i,t} = u_{i,t-1} + K_{i,t}(w_{i,t} - Hbar u_{i,t-1}) over the
/// trace's horizon.
EstimateTrajectory odol_run(const OdolSchedule& schedule, const MeasurementTrace& trace);

}  // namespace dmmse
