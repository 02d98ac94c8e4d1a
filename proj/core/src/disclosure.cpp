#include "dmmse/disclosure.hpp"

#include "dmmse/error.hpp"

#include <Eigen/SVD>

#include <algorithm>

namespace dmmse {

namespace {

// Rank cut for the available-functional matrix, relative to its largest
// singular value.
constexpr double kRankTolerance = 1e-10;

}  // namespace

Vector CoefficientMap::evaluate(const MeasurementTrace& trace) const {
  Vector out = constant;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    out += coeffs[k] * trace.measurement(entries[k].agent, entries[k].time);
  }
  return out;
}

Matrix CoefficientMap::coefficient(const MeasurementIndex& idx) const {
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k] == idx) return coeffs[k];
  }
  const auto rows = constant.size();
  const auto cols = coeffs.empty() ? 0 : coeffs.front().cols();
  return Matrix::Zero(rows, cols);
}

CoefficientMap coefficient_map(const WorldModel& model, const InformationSet& info) {
  CoefficientMap map;
  map.owner = info.owner;
  map.time = info.time;
  map.entries = info.entries;
  if (info.entries.empty()) {
    map.constant = model.xbar;
    return map;
  }
  const Matrix a = stacked_observation(model, info.entries);
  const Gain g = conditioning_gain(model.sigma_x, a, stacked_noise(model, info.entries));
  map.constant = model.xbar - g.matrix * (a * model.xbar);
  const auto q = static_cast<Eigen::Index>(model.q());
  for (std::size_t k = 0; k < info.entries.size(); ++k) {
    map.coeffs.push_back(g.matrix.middleCols(static_cast<Eigen::Index>(k) * q, q));
  }
  return map;
}

SpanAnalyzer::SpanAnalyzer(NetworkTopology topo, WorldModel model)
    : topo_(std::move(topo)), model_(std::move(model)), hops_(hop_structure(topo_)) {
  model_.validate();
  if (model_.agents() != topo_.size()) throw Error(ErrorKind::invalid_input, "model and topology agent counts differ");
}

const CoefficientMap& SpanAnalyzer::oracle_map(Agent i, std::size_t t) {
  const auto key = std::make_pair(i, t);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(key, coefficient_map(model_, oracle_information_set(hops_, i, t))).first;
  }
  return it->second;
}

SpanReport SpanAnalyzer::analyze(Agent i, std::size_t t) {
  if (t < 1) throw Error(ErrorKind::invalid_input, "span checks start at t = 1");
  const std::size_t m = topo_.size();
  const auto p = static_cast<Eigen::Index>(model_.p());
  const auto q = static_cast<Eigen::Index>(model_.q());
  const auto columns = static_cast<Eigen::Index>(m * t) * q;
  auto column_of = [&](const MeasurementIndex& idx) {
    return static_cast<Eigen::Index>((idx.time - 1) * m + idx.agent) * q;
  };
  auto place = [&](const CoefficientMap& map, Matrix& rows) {
    rows.setZero();
    for (std::size_t k = 0; k < map.entries.size(); ++k) rows.middleCols(column_of(map.entries[k]), q) = map.coeffs[k];
  };

  // Available functionals, one per row: own raw measurements then each
  // neighbor's past estimates.
  const auto neighbors = topo_.neighbors(i);
  const auto rows = static_cast<Eigen::Index>(t) * q +
                    static_cast<Eigen::Index>(neighbors.size() * (t - 1)) * p;
  Matrix available = Matrix::Zero(rows, columns);
  Eigen::Index r = 0;
  for (std::size_t tau = 1; tau <= t; ++tau) {
    available.block(r, column_of({i, tau}), q, q).setIdentity();
    r += q;
  }
  Matrix block(p, columns);
  for (Agent j : neighbors) {
    for (std::size_t tau = 1; tau < t; ++tau) {
      place(oracle_map(j, tau), block);
      available.middleRows(r, p) = block;
      r += p;
    }
  }

  Matrix target(p, columns);
  place(oracle_map(i, t), target);

  // Project target rows onto the row space of `available`.
  Matrix residual = target;
  if (rows > 0) {
    Eigen::BDCSVD<Matrix> svd(available.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kRankTolerance);
    const Eigen::Index rank = svd.rank();
    const Matrix basis = svd.matrixU().leftCols(rank);  // orthonormal basis of the row space
    residual = target - (target * basis) * basis.transpose();
  }

  SpanReport report;
  report.agent = i;
  report.time = t;
  report.target_norm = target.norm();
  report.residual = residual.norm();
  const double bound = kSpanTolerance * report.target_norm;
  report.achievable = report.residual <= bound;
  if (!report.achievable) {
    for (std::size_t tau = 1; tau <= t; ++tau) {
      for (Agent j = 0; j < m; ++j) {
        const double c = residual.middleCols(column_of({j, tau}), q).norm();
        if (c > bound) report.witness.push_back({{j, tau}, c});
      }
    }
  }
  return report;
}

SpanReport span_sufficiency(const NetworkTopology& topo, const WorldModel& model, Agent i, std::size_t t) {
  SpanAnalyzer analyzer(topo, model);
  return analyzer.analyze(i, t);
}

}  // namespace dmmse
