#pragma once

#include "dmmse/linalg.hpp"
#include "dmmse/model.hpp"
#include "dmmse/topology.hpp"
#include "dmmse/trajectory.hpp"

#include <utility>
#include <vector>

namespace dmmse {

/// Matrices of agent i at time t. Neighbor blocks follow ascending neighbor
/// id. Every field is zero-sized or zero at t = 0.
struct OedolStep {
  Matrix A;                        // p x p
  Matrix B;                        // p x q
  Matrix C;                        // p x p*pi, block j is C^{(j)}_{i,t}
  Matrix D;                        // p*pi x p, block j is C^{(i)}_{j,t}
  std::vector<Matrix> correction;  // T_{i,t} blocks C^{(i)}_{j,t} C^{(j)}_{i,t-1}
  Matrix Hbar;                     // p*pi x p, observation model of the innovation used at t+1
  std::vector<Matrix> G;           // noise covariance blocks of that innovation
  Matrix covariance;               // Sigma-hat_{i,t}
  bool pseudo_inverse = false;
};

class OedolSchedule {
 public:
  OedolSchedule(NetworkTopology tree, WorldModel model, std::vector<std::vector<OedolStep>> steps);

  const NetworkTopology& topology() const noexcept { return tree_; }
  const WorldModel& model() const noexcept { return model_; }
  std::size_t agents() const noexcept { return steps_.size(); }
  std::size_t horizon() const noexcept { return steps_.empty() ? 0 : steps_.front().size() - 1; }
  /// t in 0..horizon.
  const OedolStep& step(Agent i, std::size_t t) const { return steps_.at(i).at(t); }

  bool operator==(const OedolSchedule& other) const;

 private:
  NetworkTopology tree_;
  WorldModel model_;
  std::vector<std::vector<OedolStep>> steps_;
};

/// Offline synthesis over t = 1..horizon. Throws not-a-tree (naming an edge
/// that closes a cycle) when the topology has cycles.
OedolSchedule oedol_schedule(const NetworkTopology& tree, const WorldModel& model, std::size_t horizon);

/// Messages s_{i,t} broadcast by each agent; sent[i] is p x horizon with
/// column t-1 holding s_{i,t}.
struct MessageLog {
  std::vector<Matrix> sent;
};

std::pair<EstimateTrajectory, MessageLog> oedol_run(const OedolSchedule& schedule, const MeasurementTrace& trace);

}  // namespace dmmse
