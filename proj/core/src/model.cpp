#include "dmmse/model.hpp"

#include "dmmse/error.hpp"
#include "dmmse/rng.hpp"

#include <cmath>
#include <random>

namespace dmmse {

namespace {

constexpr double kSymmetryTolerance = 1e-12;

void check_psd(const Matrix& m, const char* what) {
  if (!is_symmetric(m, kSymmetryTolerance * std::max(1.0, m.cwiseAbs().maxCoeff()))) {
    throw Error(ErrorKind::invalid_input, std::string(what) + " is not symmetric");
  }
  if (m.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -kCovarianceFloor * scale) {
    throw Error(ErrorKind::invalid_input, std::string(what) + " is not positive semidefinite");
  }
}

Vector standard_normals(Engine& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(n);
  for (Eigen::Index k = 0; k < n; ++k) z(k) = normal(rng);
  return z;
}

}  // namespace

void WorldModel::validate() const {
  const auto pp = static_cast<Eigen::Index>(p());
  if (pp == 0) throw Error(ErrorKind::invalid_input, "state dimension must be positive");
  if (sigma_x.rows() != pp || sigma_x.cols() != pp) {
    throw Error(ErrorKind::invalid_input, "sigma_x must be p x p");
  }
  check_psd(sigma_x, "sigma_x");
  if (H.empty()) throw Error(ErrorKind::invalid_input, "model has no agents");
  if (sigma_n.size() != H.size()) throw Error(ErrorKind::invalid_input, "one noise covariance per agent required");
  const auto qq = static_cast<Eigen::Index>(q());
  if (qq == 0) throw Error(ErrorKind::invalid_input, "measurement dimension must be positive");
  for (std::size_t i = 0; i < H.size(); ++i) {
    if (H[i].rows() != qq || H[i].cols() != pp) {
      throw Error(ErrorKind::invalid_input, "H of agent " + std::to_string(i + 1) + " must be q x p");
    }
    if (sigma_n[i].rows() != qq || sigma_n[i].cols() != qq) {
      throw Error(ErrorKind::invalid_input, "noise covariance of agent " + std::to_string(i + 1) + " must be q x q");
    }
    check_psd(sigma_n[i], "noise covariance");
  }
}

Matrix WorldModel::stacked_observation() const {
  Matrix out(static_cast<Eigen::Index>(q() * agents()), static_cast<Eigen::Index>(p()));
  for (std::size_t i = 0; i < agents(); ++i) {
    out.middleRows(static_cast<Eigen::Index>(i * q()), static_cast<Eigen::Index>(q())) = H[i];
  }
  return out;
}

Matrix WorldModel::stacked_noise() const { return block_diagonal(sigma_n); }

bool WorldModel::operator==(const WorldModel& other) const {
  if (xbar != other.xbar || sigma_x != other.sigma_x || H.size() != other.H.size()) return false;
  for (std::size_t i = 0; i < H.size(); ++i) {
    if (H[i] != other.H[i] || sigma_n[i] != other.sigma_n[i]) return false;
  }
  return true;
}

std::vector<double> folded_normal_stds(std::size_t agents, double scale, std::uint64_t seed) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorKind::invalid_scale, "folded-normal scale must be positive and finite");
  }
  std::vector<double> out(agents);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < agents; ++i) {
    auto rng = make_engine(seed, Stream::noise_std, {i});
    double z = 0.0;
    while (z == 0.0) z = std::abs(normal(rng));
    out[i] = z * scale;
  }
  return out;
}

WorldModel random_world(std::size_t p, std::size_t q, std::size_t agents,
                        std::span<const double> noise_stds, std::uint64_t seed) {
  if (p == 0 || q == 0 || agents == 0) throw Error(ErrorKind::invalid_input, "dimensions must be positive");
  if (noise_stds.size() != agents) throw Error(ErrorKind::invalid_input, "one noise std per agent required");
  WorldModel model;
  const auto pp = static_cast<Eigen::Index>(p);
  const auto qq = static_cast<Eigen::Index>(q);
  model.xbar = Vector::Zero(pp);
  model.sigma_x = Matrix::Identity(pp, pp);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < agents; ++i) {
    if (!(noise_stds[i] > 0.0)) throw Error(ErrorKind::invalid_input, "noise std must be positive");
    auto rng = make_engine(seed, Stream::world, {i});
    Matrix h(qq, pp);
    for (Eigen::Index r = 0; r < qq; ++r) {
      for (Eigen::Index c = 0; c < pp; ++c) h(r, c) = normal(rng);
    }
    model.H.push_back(std::move(h));
    model.sigma_n.push_back(noise_stds[i] * noise_stds[i] * Matrix::Identity(qq, qq));
  }
  return model;
}

WorldModel scalar_world(std::size_t agents, double state_variance, double noise_variance) {
  WorldModel model;
  model.xbar = Vector::Zero(1);
  model.sigma_x = Matrix::Constant(1, 1, state_variance);
  model.H.assign(agents, Matrix::Ones(1, 1));
  model.sigma_n.assign(agents, Matrix::Constant(1, 1, noise_variance));
  return model;
}

std::vector<double> noise_stds(const WorldModel& model) {
  std::vector<double> out;
  out.reserve(model.agents());
  for (const auto& s : model.sigma_n) out.push_back(std::sqrt(s.trace() / static_cast<double>(s.rows())));
  return out;
}

MeasurementTrace::MeasurementTrace(Vector state, std::vector<Matrix> measurements, std::uint64_t seed)
    : x_(std::move(state)), y_(std::move(measurements)), seed_(seed) {}

Vector MeasurementTrace::stacked_at(std::size_t t) const {
  const auto qq = static_cast<Eigen::Index>(q());
  Vector out = Vector::Zero(qq * static_cast<Eigen::Index>(agents()));
  if (t < 1 || t > horizon()) return out;
  for (std::size_t i = 0; i < agents(); ++i) out.segment(static_cast<Eigen::Index>(i) * qq, qq) = measurement(i, t);
  return out;
}

bool MeasurementTrace::operator==(const MeasurementTrace& other) const {
  if (x_ != other.x_ || y_.size() != other.y_.size() || seed_ != other.seed_) return false;
  for (std::size_t i = 0; i < y_.size(); ++i) {
    if (y_[i] != other.y_[i]) return false;
  }
  return true;
}

MeasurementTrace sample_trace(const WorldModel& model, std::size_t horizon, std::uint64_t seed) {
  if (horizon < 1) throw Error(ErrorKind::invalid_input, "horizon must be at least 1");
  const auto p = static_cast<Eigen::Index>(model.p());
  const auto q = static_cast<Eigen::Index>(model.q());

  auto state_rng = make_engine(seed, Stream::state);
  Vector x = model.xbar + psd_factor(model.sigma_x) * standard_normals(state_rng, p);

  std::vector<Matrix> y;
  y.reserve(model.agents());
  for (std::size_t i = 0; i < model.agents(); ++i) {
    const Matrix factor = psd_factor(model.sigma_n[i]);
    const Vector clean = model.H[i] * x;
    Matrix yi(q, static_cast<Eigen::Index>(horizon));
    for (std::size_t t = 1; t <= horizon; ++t) {
      auto rng = make_engine(seed, Stream::noise, {i, t});
      yi.col(static_cast<Eigen::Index>(t - 1)) = clean + factor * standard_normals(rng, q);
    }
    y.push_back(std::move(yi));
  }
  return MeasurementTrace(std::move(x), std::move(y), seed);
}

}  // namespace dmmse
