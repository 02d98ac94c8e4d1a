#pragma once

#include "dmmse/linalg.hpp"
#include "dmmse/topology.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace dmmse {

/// Linear-Gaussian world: x ~ N(xbar, sigma_x), y_{i,t} = H_i x + n_{i,t} with
/// n_{i,t} ~ N(0, sigma_n[i]) independent across agents and time.
struct WorldModel {
  Vector xbar;
  Matrix sigma_x;
  std::vector<Matrix> H;        // q x p per agent
  std::vector<Matrix> sigma_n;  // q x q per agent

  std::size_t p() const noexcept { return static_cast<std::size_t>(xbar.size()); }
  std::size_t q() const noexcept { return H.empty() ? 0 : static_cast<std::size_t>(H.front().rows()); }
  std::size_t agents() const noexcept { return H.size(); }

  /// Dimensions consistent, covariances symmetric PSD. Noise covariances are
  /// only required to be PSD so that noiseless limits remain expressible.
  void validate() const;

  /// col{H_1, ..., H_m}
  Matrix stacked_observation() const;
  /// diag{sigma_n_1, ..., sigma_n_m}
  Matrix stacked_noise() const;

  bool operator==(const WorldModel& other) const;
};

/// Per-agent |z_i| * scale with z_i standard normal, redrawn on exact zero.
std::vector<double> folded_normal_stds(std::size_t agents, double scale, std::uint64_t seed);

/// xbar = 0, sigma_x = I, H_i entries i.i.d. N(0,1), sigma_n_i = std_i^2 I.
WorldModel random_world(std::size_t p, std::size_t q, std::size_t agents,
                        std::span<const double> noise_stds, std::uint64_t seed);

/// p = q = 1, H_i = 1 for all agents.
WorldModel scalar_world(std::size_t agents, double state_variance, double noise_variance);

/// Per-agent noise standard deviation sqrt(trace(sigma_n_i) / q).
std::vector<double> noise_stds(const WorldModel& model);

/// One state draw and all measurements for t = 1..horizon.
class MeasurementTrace {
 public:
  MeasurementTrace(Vector state, std::vector<Matrix> measurements, std::uint64_t seed);

  const Vector& state() const noexcept { return x_; }
  std::size_t horizon() const noexcept { return y_.empty() ? 0 : static_cast<std::size_t>(y_.front().cols()); }
  std::size_t agents() const noexcept { return y_.size(); }
  std::size_t q() const noexcept { return y_.empty() ? 0 : static_cast<std::size_t>(y_.front().rows()); }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Measurement of agent i at time t (1-based time).
  auto measurement(Agent i, std::size_t t) const { return y_.at(i).col(static_cast<Eigen::Index>(t - 1)); }
  /// q x horizon matrix of agent i's measurements.
  const Matrix& agent_measurements(Agent i) const { return y_.at(i); }

  /// col{y_{1,t}, ..., y_{m,t}}; zeros for t < 1 (warm-start convention).
  Vector stacked_at(std::size_t t) const;

  bool operator==(const MeasurementTrace& other) const;

 private:
  Vector x_;
  std::vector<Matrix> y_;
  std::uint64_t seed_ = 0;
};

/// Noise n_{i,t} comes from the substream keyed by (seed, agent, t) and the
/// state from its own substream, so regeneration is bit-exact.
MeasurementTrace sample_trace(const WorldModel& model, std::size_t horizon, std::uint64_t seed);

}  // namespace dmmse
