#pragma once

#include "dmmse/model.hpp"
#include "dmmse/oracle.hpp"
#include "dmmse/topology.hpp"

#include <map>
#include <utility>
#include <vector>

namespace dmmse {

/// E[x | info] written as constant + sum_k coeffs[k] * y_{entries[k]}.
struct CoefficientMap {
  Agent owner = 0;
  std::size_t time = 0;
  Vector constant;
  std::vector<MeasurementIndex> entries;
  std::vector<Matrix> coeffs;  // p x q per entry

  Vector evaluate(const MeasurementTrace& trace) const;
  /// p x q coefficient on y_{idx}, zero if idx is not an entry.
  Matrix coefficient(const MeasurementIndex& idx) const;
};

CoefficientMap coefficient_map(const WorldModel& model, const InformationSet& info);

struct SpanReport {
  Agent agent = 0;
  std::size_t time = 0;
  bool achievable = false;
  double residual = 0.0;     // Frobenius norm of the unexplained part
  double target_norm = 0.0;  // Frobenius norm of the oracle coefficients
  /// Measurements whose oracle coefficient cannot be reproduced, with the
  /// residual norm on each.
  std::vector<std::pair<MeasurementIndex, double>> witness;
};

/// Decides, at the level of linear spans, whether agent i can form u^o_{i,t}
/// from its own raw measurements and its neighbors' past oracle estimates.
/// Coefficient maps are cached across queries.
class SpanAnalyzer {
 public:
  SpanAnalyzer(NetworkTopology topo, WorldModel model);

  SpanReport analyze(Agent i, std::size_t t);
  const CoefficientMap& oracle_map(Agent i, std::size_t t);

  const NetworkTopology& topology() const noexcept { return topo_; }

 private:
  NetworkTopology topo_;
  WorldModel model_;
  HopStructure hops_;
  std::map<std::pair<Agent, std::size_t>, CoefficientMap> cache_;
};

/// Relative residual threshold for achievability.
inline constexpr double kSpanTolerance = 1e-8;

SpanReport span_sufficiency(const NetworkTopology& topo, const WorldModel& model, Agent i, std::size_t t);

}  // namespace dmmse
