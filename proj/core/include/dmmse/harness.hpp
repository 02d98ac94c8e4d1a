#pragma once

#include "dmmse/baseline.hpp"
#include "dmmse/linalg.hpp"
#include "dmmse/model.hpp"
#include "dmmse/oedol.hpp"
#include "dmmse/oracle.hpp"
#include "dmmse/sdol.hpp"
#include "dmmse/topology.hpp"
#include "dmmse/weights_io.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dmmse {

enum class Algorithm { odol, oedol, sdol, drls };

std::string_view to_string(Algorithm a) noexcept;
std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept;

struct TopologySpec {
  std::string label;
  TopologyKind kind = TopologyKind::line;
  std::optional<std::uint64_t> seed;  // random kind; derived from the master seed when absent
  bool spanning_tree = false;         // replace the graph by its spanning tree
  std::optional<std::vector<Edge>> edges;  // explicit graph, overrides kind

  NetworkTopology build(std::size_t agents, std::uint64_t master_seed) const;
};

struct ModelSpec {
  std::size_t agents = 20;
  std::size_t p = 10;
  std::size_t q = 1;
  double noise_scale = 1.0;
  std::optional<std::uint64_t> seed;  // derived from the master seed when absent

  std::uint64_t resolved_seed(std::uint64_t master_seed) const;
  WorldModel build(std::uint64_t master_seed) const;
};

struct RunSpec {
  std::string label;
  Algorithm algorithm = Algorithm::odol;
  std::string topology;                 // label of a TopologySpec
  std::optional<std::size_t> window;    // SDOL T_o
  double forgetting = 1.0;              // D-RLS
  double ridge = 1e-3;                  // D-RLS
  MemoryLayout layout = MemoryLayout::automatic;  // SDOL
  std::optional<std::string> weights_path;        // precomputed schedule
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<TopologySpec> topologies;
  ModelSpec model;
  std::vector<RunSpec> runs;
  std::size_t horizon = 20;
  std::size_t trials = 100;
  std::uint64_t master_seed = 1;
  /// Optional override of the model (used by tests and golden configs).
  std::optional<WorldModel> model_override;

  /// Throws invalid-config on any inconsistency.
  void validate() const;
  const TopologySpec& topology(std::string_view label) const;
  WorldModel resolved_model() const;
};

/// Mean and standard error over trials.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

Estimate mean_and_stderr(std::span<const double> samples);
/// Mean and stderr of the per-trial difference a - b.
Estimate paired_difference(std::span<const double> a, std::span<const double> b);

struct Series {
  std::string label;
  Algorithm algorithm = Algorithm::odol;
  std::string topology;
  bool skipped = false;
  std::string note;
  /// team_cost(k, t-1) = sum_i ||x - u_{i,t}||^2 in trial k.
  Matrix team_cost;
  /// Per-agent MSE and its stderr, agents x horizon.
  Matrix mse;
  Matrix mse_stderr;
  std::vector<Estimate> J;  // index T'-1
  std::vector<Estimate> P;  // index T'-1

  /// Per-trial cumulative cost J(T') samples.
  std::vector<double> cumulative_samples(std::size_t t) const;
  /// Per-trial terminal cost P(T') samples.
  std::vector<double> terminal_samples(std::size_t t) const;
};

struct CostReport {
  std::string name;
  std::size_t horizon = 0;
  std::size_t trials = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t model_seed = 0;
  std::size_t agents = 0;
  std::vector<Series> series;

  const Series& find(std::string_view label) const;
};

/// Precomputed schedules keyed by run label.
using PreparedWeights = WeightSchedule;
using WeightCache = std::map<std::string, PreparedWeights, std::less<>>;

/// Runs every configured algorithm on the same per-trial traces. Trials are
/// spread over `threads` workers and reduced in trial order, so the report
/// does not depend on the thread count.
CostReport run_experiment(const ExperimentConfig& config, std::size_t threads = 1, const WeightCache& weights = {});

/// Builds the schedule a run would synthesize. Throws on incompatibility.
PreparedWeights prepare_weights(const ExperimentConfig& config, const RunSpec& run);

enum class Ordering { less, greater, tie };
std::string_view to_string(Ordering o) noexcept;

struct Comparison {
  std::string metric;  // "J" or "P"
  std::size_t T = 0;
  std::string a;
  std::string b;
  double difference = 0.0;  // mean of a - b
  double std_error = 0.0;
  Ordering order = Ordering::tie;
};

/// Ties below this relative gap are never significant.
inline constexpr double kTieTolerance = 1e-6;
inline constexpr double kSignificance = 3.0;

/// a < b (or >) when the paired difference exceeds 3 stderr and the relative
/// tie tolerance; tie otherwise.
Comparison compare_series(const Series& a, const Series& b, std::string_view metric, std::size_t T);

/// Pairwise J and P orderings over all non-skipped series of all reports at
/// every T'. Throws invalid-comparison when the reports differ in horizon,
/// trial count, master seed or model seed.
std::vector<Comparison> compare_report(std::span<const CostReport> reports);

}  // namespace dmmse
