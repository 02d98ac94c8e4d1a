#include "dmmse/relay.hpp"

#include "dmmse/error.hpp"

namespace dmmse {

std::vector<MeasurementIndex> RelayLog::held(Agent i, std::size_t t) const {
  std::vector<MeasurementIndex> out;
  const auto& rows = arrival.at(i);
  for (Agent j = 0; j < rows.size(); ++j) {
    for (std::size_t tau = 1; tau <= rows[j].size(); ++tau) {
      const std::size_t at = rows[j][tau - 1];
      if (at != 0 && at <= t) out.push_back({j, tau});
    }
  }
  return out;
}

RelayLog simulate_relay(const NetworkTopology& topo, std::size_t horizon) {
  if (horizon < 1) throw Error(ErrorKind::invalid_input, "horizon must be at least 1");
  const std::size_t m = topo.size();
  RelayLog log;
  log.arrival.assign(m, std::vector<std::vector<std::size_t>>(m, std::vector<std::size_t>(horizon, 0)));
  log.packet_entries.assign(m, std::vector<std::size_t>(horizon, 0));

  // newest[i][j]: latest tau of agent j held by i (0 = none).
  std::vector<std::vector<std::size_t>> newest(m, std::vector<std::size_t>(m, 0));
  std::vector<std::vector<std::size_t>> sent(m, std::vector<std::size_t>(m, 0));

  auto receive = [&](Agent i, Agent j, std::size_t tau, std::size_t round) {
    if (tau == 0) return;
    auto& slot = log.arrival[i][j][tau - 1];
    if (slot == 0) slot = round;
    newest[i][j] = std::max(newest[i][j], tau);
  };

  for (std::size_t t = 1; t <= horizon; ++t) {
    const auto previous = sent;
    for (Agent i = 0; i < m; ++i) {
      receive(i, i, t, t);
      for (Agent n : topo.neighbors(i)) {
        for (Agent j = 0; j < m; ++j) receive(i, j, previous[n][j], t);
      }
    }
    for (Agent i = 0; i < m; ++i) {
      sent[i] = newest[i];
      std::size_t count = 0;
      for (std::size_t v : sent[i]) count += v != 0 ? 1 : 0;
      log.packet_entries[i][t - 1] = count;
    }
  }
  return log;
}

}  // namespace dmmse
