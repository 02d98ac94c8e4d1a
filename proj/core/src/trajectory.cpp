#include "dmmse/trajectory.hpp"

#include "dmmse/error.hpp"

namespace dmmse {

EstimateTrajectory::EstimateTrajectory(std::string algorithm, std::size_t agents, std::size_t horizon,
                                       const Vector& prior)
    : algorithm_(std::move(algorithm)), horizon_(horizon) {
  Matrix init(prior.size(), static_cast<Eigen::Index>(horizon + 1));
  init.colwise() = prior;
  u_.assign(agents, init);
}

void EstimateTrajectory::set(Agent i, std::size_t t, const Vector& value) {
  if (t > horizon_) throw Error(ErrorKind::invalid_input, "time beyond trajectory horizon");
  if (value.size() != static_cast<Eigen::Index>(p())) throw Error(ErrorKind::invalid_input, "estimate length mismatch");
  u_.at(i).col(static_cast<Eigen::Index>(t)) = value;
}

bool EstimateTrajectory::operator==(const EstimateTrajectory& other) const {
  if (algorithm_ != other.algorithm_ || horizon_ != other.horizon_ || u_.size() != other.u_.size()) return false;
  for (std::size_t i = 0; i < u_.size(); ++i) {
    if (u_[i] != other.u_[i]) return false;
  }
  return true;
}

double relative_error(const Vector& a, const Vector& b) {
  const double diff = (a - b).norm();
  const double ref = b.norm();
  return ref < 1e-12 ? diff : diff / ref;
}

}  // namespace dmmse
