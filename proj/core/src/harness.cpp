#include "dmmse/harness.hpp"

#include "dmmse/error.hpp"
#include "dmmse/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace dmmse {

namespace {

std::uint64_t label_key(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::invalid_config, msg); }

bool skippable(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::not_a_tree:
    case ErrorKind::not_a_cell_tree:
    case ErrorKind::invalid_window:
    case ErrorKind::unsupported_prior:
    case ErrorKind::build_failure:
      return true;
    default:
      return false;
  }
}

std::size_t schedule_horizon(const PreparedWeights& w) {
  if (const auto* s = std::get_if<OdolSchedule>(&w)) return s->horizon();
  if (const auto* s = std::get_if<OedolSchedule>(&w)) return s->horizon();
  return static_cast<std::size_t>(-1);
}

void check_prepared(const RunSpec& run, const PreparedWeights& w, std::size_t horizon) {
  const auto expected = to_string(run.algorithm);
  if (schedule_algorithm(w) != expected) {
    config_error("run '" + run.label + "' expects " + std::string(expected) + " weights, got " +
                 std::string(schedule_algorithm(w)));
  }
  if (schedule_horizon(w) < horizon) {
    config_error("weights for run '" + run.label + "' cover fewer than " + std::to_string(horizon) + " steps");
  }
  if (const auto* s = std::get_if<SdolWeights>(&w); s && run.window && s->window != *run.window) {
    config_error("weights for run '" + run.label + "' use window " + std::to_string(s->window));
  }
}

/// Everything a run needs besides the trace.
struct ActiveRun {
  const RunSpec* spec = nullptr;
  NetworkTopology topo;
  std::optional<PreparedWeights> weights;
  std::optional<CombinerMatrix> combiner;
};

EstimateTrajectory execute(const ActiveRun& run, const WorldModel& model, const MeasurementTrace& trace) {
  switch (run.spec->algorithm) {
    case Algorithm::odol:
      return odol_run(std::get<OdolSchedule>(*run.weights), trace);
    case Algorithm::oedol:
      return oedol_run(std::get<OedolSchedule>(*run.weights), trace).first;
    case Algorithm::sdol:
      return sdol_run(std::get<SdolWeights>(*run.weights), trace, run.spec->layout);
    case Algorithm::drls:
      return drls_run(run.topo, model, *run.combiner, trace, {run.spec->forgetting, run.spec->ridge});
  }
  throw Error(ErrorKind::invalid_config, "unknown algorithm");
}

/// Per-agent squared error, agents x horizon.
Matrix squared_errors(const EstimateTrajectory& traj, const Vector& x) {
  const auto m = static_cast<Eigen::Index>(traj.agents());
  const auto horizon = static_cast<Eigen::Index>(traj.horizon());
  Matrix out(m, horizon);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Matrix& u = traj.agent_estimates(static_cast<Agent>(i));
    for (Eigen::Index t = 1; t <= horizon; ++t) out(i, t - 1) = (u.col(t) - x).squaredNorm();
  }
  return out;
}

}  // namespace

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::odol: return "odol";
    case Algorithm::oedol: return "oedol";
    case Algorithm::sdol: return "sdol";
    case Algorithm::drls: return "drls";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept {
  for (auto a : {Algorithm::odol, Algorithm::oedol, Algorithm::sdol, Algorithm::drls}) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

NetworkTopology TopologySpec::build(std::size_t agents, std::uint64_t master_seed) const {
  NetworkTopology topo = [&] {
    if (edges) return NetworkTopology(agents, *edges);
    std::optional<std::uint64_t> s;
    if (kind == TopologyKind::random) s = seed.value_or(derive_seed(master_seed, Stream::topology, {label_key(label)}));
    return make_topology(kind, agents, s);
  }();
  return spanning_tree ? dmmse::spanning_tree(topo) : topo;
}

std::uint64_t ModelSpec::resolved_seed(std::uint64_t master_seed) const {
  return seed.value_or(derive_seed(master_seed, Stream::world));
}

WorldModel ModelSpec::build(std::uint64_t master_seed) const {
  const auto s = resolved_seed(master_seed);
  const auto stds = folded_normal_stds(agents, noise_scale, s);
  return random_world(p, q, agents, stds, s);
}

void ExperimentConfig::validate() const {
  if (trials < 1) config_error("trial count must be at least 1");
  if (horizon < 1) config_error("horizon must be at least 1");
  if (model_override) {
    try {
      model_override->validate();
    } catch (const Error& e) {
      config_error(std::string("model override: ") + e.what());
    }
  } else {
    if (model.agents < 1 || model.p < 1 || model.q < 1) config_error("model dimensions must be positive");
    if (!(model.noise_scale > 0.0) || !std::isfinite(model.noise_scale)) {
      config_error("noise scale must be positive and finite");
    }
  }
  const std::size_t m = model_override ? model_override->agents() : model.agents;

  std::set<std::string, std::less<>> topo_labels;
  for (const auto& t : topologies) {
    if (t.label.empty()) config_error("topology label must not be empty");
    if (!topo_labels.insert(t.label).second) config_error("duplicate topology label '" + t.label + "'");
    if (t.edges) {
      for (const auto& e : *t.edges) {
        if (e.a >= m || e.b >= m || e.a == e.b) config_error("topology '" + t.label + "' has an invalid edge");
      }
    }
  }
  if (runs.empty()) config_error("no runs configured");
  std::set<std::string, std::less<>> run_labels;
  for (const auto& r : runs) {
    if (r.label.empty()) config_error("run label must not be empty");
    if (!run_labels.insert(r.label).second) config_error("duplicate run label '" + r.label + "'");
    if (!topo_labels.contains(r.topology)) {
      config_error("run '" + r.label + "' references unknown topology '" + r.topology + "'");
    }
    if (r.algorithm == Algorithm::sdol && (!r.window || *r.window < 1)) {
      config_error("run '" + r.label + "' needs a window of at least 1");
    }
    if (r.algorithm == Algorithm::drls) {
      if (!(r.forgetting > 0.0 && r.forgetting <= 1.0)) config_error("forgetting factor must lie in (0, 1]");
      if (!(r.ridge > 0.0) || !std::isfinite(r.ridge)) config_error("ridge must be positive and finite");
    }
    if (r.weights_path && r.algorithm == Algorithm::drls) {
      config_error("run '" + r.label + "': drls has no precomputed weights");
    }
  }
}

const TopologySpec& ExperimentConfig::topology(std::string_view label) const {
  for (const auto& t : topologies) {
    if (t.label == label) return t;
  }
  config_error("unknown topology '" + std::string(label) + "'");
}

WorldModel ExperimentConfig::resolved_model() const { return model_override ? *model_override : model.build(master_seed); }

Estimate mean_and_stderr(std::span<const double> samples) {
  Estimate e;
  if (samples.empty()) return e;
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  e.mean = sum / n;
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double v : samples) ss += (v - e.mean) * (v - e.mean);
    e.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return e;
}

Estimate paired_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::invalid_comparison, "paired samples differ in length");
  std::vector<double> d(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k];
  return mean_and_stderr(d);
}

std::vector<double> Series::cumulative_samples(std::size_t t) const {
  std::vector<double> out(static_cast<std::size_t>(team_cost.rows()), 0.0);
  for (Eigen::Index k = 0; k < team_cost.rows(); ++k) {
    double acc = 0.0;
    for (std::size_t s = 0; s < t; ++s) acc += team_cost(k, static_cast<Eigen::Index>(s));
    out[static_cast<std::size_t>(k)] = acc;
  }
  return out;
}

std::vector<double> Series::terminal_samples(std::size_t t) const {
  std::vector<double> out(static_cast<std::size_t>(team_cost.rows()));
  for (Eigen::Index k = 0; k < team_cost.rows(); ++k) {
    out[static_cast<std::size_t>(k)] = team_cost(k, static_cast<Eigen::Index>(t - 1));
  }
  return out;
}

const Series& CostReport::find(std::string_view label) const {
  for (const auto& s : series) {
    if (s.label == label) return s;
  }
  throw Error(ErrorKind::invalid_input, "no series labelled '" + std::string(label) + "'");
}

PreparedWeights prepare_weights(const ExperimentConfig& config, const RunSpec& run) {
  const auto model = config.resolved_model();
  const auto topo = config.topology(run.topology).build(model.agents(), config.master_seed);
  switch (run.algorithm) {
    case Algorithm::odol: return odol_schedule(topo, model, config.horizon);
    case Algorithm::oedol: return oedol_schedule(topo, model, config.horizon);
    case Algorithm::sdol:
      if (!run.window) config_error("run '" + run.label + "' needs a window");
      return sdol_weights(topo, model, *run.window);
    case Algorithm::drls: break;
  }
  config_error("run '" + run.label + "': drls has no precomputed weights");
}

CostReport run_experiment(const ExperimentConfig& config, std::size_t threads, const WeightCache& weights) {
  config.validate();
  const WorldModel model = config.resolved_model();
  const std::size_t m = model.agents();
  const std::size_t horizon = config.horizon;
  const std::size_t trials = config.trials;

  CostReport report;
  report.name = config.name;
  report.horizon = horizon;
  report.trials = trials;
  report.master_seed = config.master_seed;
  report.model_seed = config.model.resolved_seed(config.master_seed);
  report.agents = m;

  std::map<std::string, NetworkTopology, std::less<>> topologies;
  for (const auto& t : config.topologies) topologies.emplace(t.label, t.build(m, config.master_seed));

  std::vector<ActiveRun> active;
  std::vector<std::size_t> series_of_active;
  for (const auto& run : config.runs) {
    Series s;
    s.label = run.label;
    s.algorithm = run.algorithm;
    s.topology = run.topology;
    ActiveRun a{&run, topologies.at(run.topology), std::nullopt, std::nullopt};
    try {
      if (run.algorithm == Algorithm::drls) {
        a.combiner = relative_variance_combiner(a.topo, noise_stds(model));
      } else if (auto it = weights.find(run.label); it != weights.end()) {
        check_prepared(run, it->second, horizon);
        a.weights = it->second;
      } else if (run.weights_path) {
        a.weights = load_weights(*run.weights_path, a.topo, model);
        check_prepared(run, *a.weights, horizon);
      } else {
        a.weights = prepare_weights(config, run);
      }
    } catch (const Error& e) {
      if (!skippable(e.kind())) throw;
      s.skipped = true;
      s.note = e.what();
    }
    if (!s.skipped) {
      series_of_active.push_back(report.series.size());
      active.push_back(std::move(a));
    }
    report.series.push_back(std::move(s));
  }

  // costs[k][r] = squared errors of active run r in trial k.
  std::vector<std::vector<Matrix>> costs(trials, std::vector<Matrix>(active.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= trials) return;
      try {
        const auto trace = sample_trace(model, horizon, derive_seed(config.master_seed, Stream::trial, {k}));
        for (std::size_t r = 0; r < active.size(); ++r) {
          costs[k][r] = squared_errors(execute(active[r], model, trace), trace.state());
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(trials);
        return;
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, trials);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  const auto T = static_cast<Eigen::Index>(horizon);
  const auto M = static_cast<Eigen::Index>(m);
  for (std::size_t r = 0; r < active.size(); ++r) {
    Series& s = report.series[series_of_active[r]];
    s.team_cost = Matrix::Zero(static_cast<Eigen::Index>(trials), T);
    s.mse = Matrix::Zero(M, T);
    s.mse_stderr = Matrix::Zero(M, T);
    std::vector<double> samples(trials);
    for (Eigen::Index i = 0; i < M; ++i) {
      for (Eigen::Index t = 0; t < T; ++t) {
        for (std::size_t k = 0; k < trials; ++k) samples[k] = costs[k][r](i, t);
        const auto e = mean_and_stderr(samples);
        s.mse(i, t) = e.mean;
        s.mse_stderr(i, t) = e.std_error;
      }
    }
    for (std::size_t k = 0; k < trials; ++k) {
      for (Eigen::Index t = 0; t < T; ++t) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < M; ++i) acc += costs[k][r](i, t);
        s.team_cost(static_cast<Eigen::Index>(k), t) = acc;
      }
    }
    for (std::size_t t = 1; t <= horizon; ++t) {
      s.J.push_back(mean_and_stderr(s.cumulative_samples(t)));
      s.P.push_back(mean_and_stderr(s.terminal_samples(t)));
    }
  }
  return report;
}

std::string_view to_string(Ordering o) noexcept {
  switch (o) {
    case Ordering::less: return "less";
    case Ordering::greater: return "greater";
    case Ordering::tie: return "tie";
  }
  return "tie";
}

Comparison compare_series(const Series& a, const Series& b, std::string_view metric, std::size_t T) {
  if (a.skipped || b.skipped) throw Error(ErrorKind::invalid_comparison, "cannot compare a skipped series");
  if (a.team_cost.rows() != b.team_cost.rows() || a.team_cost.cols() != b.team_cost.cols()) {
    throw Error(ErrorKind::invalid_comparison, "series differ in trials or horizon");
  }
  if (T < 1 || T > static_cast<std::size_t>(a.team_cost.cols())) {
    throw Error(ErrorKind::invalid_comparison, "T out of range");
  }
  std::vector<double> sa;
  std::vector<double> sb;
  if (metric == "J") {
    sa = a.cumulative_samples(T);
    sb = b.cumulative_samples(T);
  } else if (metric == "P") {
    sa = a.terminal_samples(T);
    sb = b.terminal_samples(T);
  } else {
    throw Error(ErrorKind::invalid_comparison, "unknown metric '" + std::string(metric) + "'");
  }
  const auto d = paired_difference(sa, sb);
  const double scale = std::max(std::abs(mean_and_stderr(sa).mean), std::abs(mean_and_stderr(sb).mean));
  Comparison c{std::string(metric), T, a.label, b.label, d.mean, d.std_error, Ordering::tie};
  if (std::abs(d.mean) > kTieTolerance * scale && std::abs(d.mean) > kSignificance * d.std_error) {
    c.order = d.mean < 0.0 ? Ordering::less : Ordering::greater;
  }
  return c;
}

std::vector<Comparison> compare_report(std::span<const CostReport> reports) {
  std::vector<Comparison> out;
  if (reports.empty()) return out;
  const auto& first = reports.front();
  for (const auto& r : reports) {
    if (r.horizon != first.horizon || r.trials != first.trials || r.master_seed != first.master_seed ||
        r.model_seed != first.model_seed || r.agents != first.agents) {
      throw Error(ErrorKind::invalid_comparison,
                  "reports '" + first.name + "' and '" + r.name + "' differ in horizon, trials or seeds");
    }
  }
  std::vector<Series> pool;
  for (const auto& r : reports) {
    for (const auto& s : r.series) {
      if (s.skipped) continue;
      pool.push_back(s);
      if (reports.size() > 1) pool.back().label = r.name + ":" + s.label;
    }
  }
  for (const char* metric : {"J", "P"}) {
    for (std::size_t T = 1; T <= first.horizon; ++T) {
      for (std::size_t x = 0; x < pool.size(); ++x) {
        for (std::size_t y = x + 1; y < pool.size(); ++y) out.push_back(compare_series(pool[x], pool[y], metric, T));
      }
    }
  }
  return out;
}

}  // namespace dmmse
