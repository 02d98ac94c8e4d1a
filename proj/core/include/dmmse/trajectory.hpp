#pragma once

#include "dmmse/linalg.hpp"
#include "dmmse/topology.hpp"

#include <string>
#include <vector>

namespace dmmse {

/// Estimates u_{i,t} for every agent and t = 0..horizon. Column t of an
/// agent's matrix holds u_{i,t}; column 0 is the prior.
class EstimateTrajectory {
 public:
  EstimateTrajectory(std::string algorithm, std::size_t agents, std::size_t horizon, const Vector& prior);

  const std::string& algorithm() const noexcept { return algorithm_; }
  std::size_t agents() const noexcept { return u_.size(); }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t p() const noexcept { return u_.empty() ? 0 : static_cast<std::size_t>(u_.front().rows()); }

  auto estimate(Agent i, std::size_t t) const { return u_.at(i).col(static_cast<Eigen::Index>(t)); }
  void set(Agent i, std::size_t t, const Vector& value);
  const Matrix& agent_estimates(Agent i) const { return u_.at(i); }

  bool operator==(const EstimateTrajectory& other) const;

 private:
  std::string algorithm_;
  std::size_t horizon_ = 0;
  std::vector<Matrix> u_;
};

/// ||a - b|| / ||b||, or ||a - b|| when ||b|| is below 1e-12.
double relative_error(const Vector& a, const Vector& b);

}  // namespace dmmse
