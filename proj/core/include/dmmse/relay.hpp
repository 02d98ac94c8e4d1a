#pragma once

#include "dmmse/oracle.hpp"
#include "dmmse/topology.hpp"

#include <vector>

namespace dmmse {

/// Result of simulating time-stamped disclosure: in round t every agent
/// samples y_{i,t}, reads the packets its neighbors sent in round t-1, and
/// sends a packet holding only the newest known measurement of each agent.
struct RelayLog {
  /// arrival[i][j][tau-1]: first round in which agent i holds y_{j,tau}, or 0
  /// if it never arrives within the horizon.
  std::vector<std::vector<std::vector<std::size_t>>> arrival;
  /// packet_entries[i][t-1]: number of measurements agent i sent in round t.
  std::vector<std::vector<std::size_t>> packet_entries;

  /// Everything agent i holds after round t, ordered by (agent, time).
  std::vector<MeasurementIndex> held(Agent i, std::size_t t) const;
};

RelayLog simulate_relay(const NetworkTopology& topo, std::size_t horizon);

}  // namespace dmmse
