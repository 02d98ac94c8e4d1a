#pragma once

#include "dmmse/linalg.hpp"
#include "dmmse/model.hpp"
#include "dmmse/topology.hpp"
#include "dmmse/trajectory.hpp"

#include <string_view>
#include <optional>
#include <vector>

namespace dmmse {

/// Time-invariant weights of one agent for window depth T_o.
struct SdolAgentWeights {
  /// Agents whose measurement reaches i within the window, as (agent, hop),
  /// ordered by hop then id. The first entry is i itself at hop 0; the rest
  /// define the layout of r_{i,t}.
  std::vector<std::pair<Agent, std::size_t>> received;
  Matrix A;          // p x p
  Matrix B;          // p x q
  Matrix C;          // p x q*(|received|-1)
  Matrix D;          // p x q*m, zero columns for agents outside the window
  Matrix M;          // memory element restricted to the agents of `received`, p x q*m
  Matrix L;          // p x p
  Matrix K;          // p x p
  Matrix sigma_xi;   // error covariance given the carried-over window
  Matrix Hbar;       // col{H_j} over `received`
  Matrix noise_bar;  // diag{Sigma_{n_j}} over `received`
  /// Information carried over from the previous window: sum of H' Sigma_n^-1 H
  /// over entries aged hop+1..T_o-1.
  Matrix window_information;
  double l_condition = 0.0;
};

struct SdolWeights {
  std::size_t window = 0;  // T_o
  Matrix M;                // network-wide memory element, p x q*m
  std::vector<SdolAgentWeights> agents;
  std::size_t p = 0;
  std::size_t q = 0;
};

/// Largest tolerated condition number of L_i.
inline constexpr double kMaxLCondition = 1e12;

/// Throws unsupported-prior for xbar != 0, invalid-window for T_o below the
/// maximum eccentricity, build-failure when some L_i is numerically singular.
SdolWeights sdol_weights(const NetworkTopology& topo, const WorldModel& model, std::size_t window);

/// A_i L_i Sigma_{x,i}: the error covariance of agent i once t >= T_o.
Matrix steady_state_covariance(const SdolWeights& weights, Agent i);

enum class MemoryLayout { raw_measurements, memory_elements, automatic };

std::string_view to_string(MemoryLayout layout) noexcept;
std::optional<MemoryLayout> parse_memory_layout(std::string_view name) noexcept;

/// Per-agent ring buffer of the last T_o time slots. In raw layout a slot is
/// the network measurement stack y_tau; in element layout it accumulates
/// D_i y_tau as pieces arrive. Slots before t = 1 read as zero.
class SdolMemory {
 public:
  SdolMemory(std::size_t window, MemoryLayout layout, const SdolAgentWeights& weights, std::size_t q,
             std::size_t agents);

  void store(Agent j, std::size_t tau, const Vector& y);
  /// Correction D_i y_tau; clears the slot.
  Vector evict(std::size_t tau);

  MemoryLayout layout() const noexcept { return layout_; }
  std::size_t slots() const noexcept { return slots_.size(); }
  std::size_t slot_size() const noexcept { return slots_.empty() ? 0 : static_cast<std::size_t>(slots_.front().size()); }

 private:
  MemoryLayout layout_;
  const SdolAgentWeights* weights_;
  Eigen::Index q_;
  std::vector<Vector> slots_;
  std::vector<std::size_t> tags_;
};

/// u_{i,t} = A u_{i,t-1} + B y_{i,t} + C r_{i,t} - D y_{t-T_o}, u_{i,0} = 0,
/// with zero-valued measurements before t = 1.
EstimateTrajectory sdol_run(const SdolWeights& weights, const MeasurementTrace& trace,
                            MemoryLayout layout = MemoryLayout::automatic);

}  // namespace dmmse
