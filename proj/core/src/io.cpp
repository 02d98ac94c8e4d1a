#include "dmmse/io.hpp"

#include "dmmse/error.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace dmmse {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json matrix_rows(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Matrix parse_matrix(const json& rows, Eigen::Index expect_rows, Eigen::Index expect_cols, const std::string& what) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != expect_rows) {
    throw Error(ErrorKind::invalid_input, what + " must have " + std::to_string(expect_rows) + " rows");
  }
  Matrix m(expect_rows, expect_cols);
  for (Eigen::Index r = 0; r < expect_rows; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != expect_cols) {
      throw Error(ErrorKind::invalid_input, what + " must have " + std::to_string(expect_cols) + " columns");
    }
    for (Eigen::Index c = 0; c < expect_cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_input, std::string(what) + ": " + e.what());
  }
}

// Strict object reader: every key must be consumed, so typos surface as
// errors instead of silently falling back to defaults.
class Fields {
 public:
  Fields(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) fail("expected an object");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }

  template <class T>
  T get(const char* key) {
    if (!has(key)) fail(std::string("missing key '") + key + "'");
    return as<T>(obj_.at(key), key);
  }

  template <class T>
  T get_or(const char* key, T fallback) {
    return has(key) ? as<T>(obj_.at(key), key) : fallback;
  }

  const json& raw(const char* key) {
    if (!has(key)) fail(std::string("missing key '") + key + "'");
    return obj_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.contains(k)) fail("unknown key '" + k + "'");
    }
  }

  [[noreturn]] void fail(const std::string& msg) const { throw Error(ErrorKind::invalid_config, where_ + ": " + msg); }

 private:
  template <class T>
  T as(const json& v, const char* key) const {
    try {
      if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_unsigned()) fail(std::string("'") + key + "' must be a non-negative integer");
      }
      return v.get<T>();
    } catch (const json::exception&) {
      fail(std::string("'") + key + "' has the wrong type");
    }
  }

  const json& obj_;
  std::string where_;
  std::set<std::string, std::less<>> seen_;
};

std::vector<Edge> parse_edges_json(const json& list, Fields& f) {
  if (!list.is_array()) f.fail("edges must be an array of [i, j] pairs");
  std::vector<Edge> edges;
  for (const auto& e : list) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned()) {
      f.fail("edges must be an array of [i, j] pairs");
    }
    const auto a = e[0].get<std::size_t>();
    const auto b = e[1].get<std::size_t>();
    if (a == 0 || b == 0) f.fail("agent ids are 1-based");
    edges.push_back({a - 1, b - 1});
  }
  return edges;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw Error(ErrorKind::io_failure, "number formatting failed");
  return std::string(buf.data(), ptr);
}

std::string edge_list_text(const NetworkTopology& topo) {
  std::string out;
  for (const auto& e : topo.edges()) out += std::to_string(e.a + 1) + " " + std::to_string(e.b + 1) + "\n";
  return out;
}

NetworkTopology parse_edge_list(std::string_view text, std::size_t agents) {
  std::vector<Edge> edges;
  std::size_t largest = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    long long a = 0;
    long long b = 0;
    std::string rest;
    if (!(ls >> a >> b) || (ls >> rest) || a < 1 || b < 1) {
      throw Error(ErrorKind::invalid_input, "edge list line " + std::to_string(lineno) + " is not 'i j' with 1-based ids");
    }
    edges.push_back({static_cast<Agent>(a - 1), static_cast<Agent>(b - 1)});
    largest = std::max({largest, static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
  }
  return NetworkTopology(agents == 0 ? largest : agents, std::move(edges));
}

std::string model_json(const WorldModel& model) {
  ordered_json j;
  j["agents"] = model.agents();
  j["p"] = model.p();
  j["q"] = model.q();
  ordered_json xbar = ordered_json::array();
  for (Eigen::Index k = 0; k < model.xbar.size(); ++k) xbar.push_back(model.xbar(k));
  j["xbar"] = xbar;
  j["sigma_x"] = matrix_rows(model.sigma_x);
  j["H"] = ordered_json::array();
  j["sigma_n"] = ordered_json::array();
  for (std::size_t i = 0; i < model.agents(); ++i) {
    j["H"].push_back(matrix_rows(model.H[i]));
    j["sigma_n"].push_back(matrix_rows(model.sigma_n[i]));
  }
  return dump(j);
}

WorldModel parse_model_json(std::string_view text) {
  return guarded("model json", [&] {
    const json j = json::parse(text);
    const auto m = j.at("agents").get<std::size_t>();
    const auto p = static_cast<Eigen::Index>(j.at("p").get<std::size_t>());
    const auto q = static_cast<Eigen::Index>(j.at("q").get<std::size_t>());
    WorldModel model;
    const auto& xbar = j.at("xbar");
    if (static_cast<Eigen::Index>(xbar.size()) != p) throw Error(ErrorKind::invalid_input, "xbar must have p entries");
    model.xbar.resize(p);
    for (Eigen::Index k = 0; k < p; ++k) model.xbar(k) = xbar[static_cast<std::size_t>(k)].get<double>();
    model.sigma_x = parse_matrix(j.at("sigma_x"), p, p, "sigma_x");
    if (j.at("H").size() != m || j.at("sigma_n").size() != m) {
      throw Error(ErrorKind::invalid_input, "H and sigma_n need one entry per agent");
    }
    for (std::size_t i = 0; i < m; ++i) {
      model.H.push_back(parse_matrix(j.at("H")[i], q, p, "H"));
      model.sigma_n.push_back(parse_matrix(j.at("sigma_n")[i], q, q, "sigma_n"));
    }
    model.validate();
    return model;
  });
}

std::string trace_json(const MeasurementTrace& trace) {
  ordered_json j;
  j["agents"] = trace.agents();
  j["q"] = trace.q();
  j["horizon"] = trace.horizon();
  j["seed"] = trace.seed();
  ordered_json x = ordered_json::array();
  for (Eigen::Index k = 0; k < trace.state().size(); ++k) x.push_back(trace.state()(k));
  j["state"] = x;
  j["y"] = ordered_json::array();
  for (std::size_t i = 0; i < trace.agents(); ++i) j["y"].push_back(matrix_rows(trace.agent_measurements(i)));
  return dump(j);
}

MeasurementTrace parse_trace_json(std::string_view text) {
  return guarded("trace json", [&] {
    const json j = json::parse(text);
    const auto m = j.at("agents").get<std::size_t>();
    const auto q = static_cast<Eigen::Index>(j.at("q").get<std::size_t>());
    const auto horizon = static_cast<Eigen::Index>(j.at("horizon").get<std::size_t>());
    const auto& xs = j.at("state");
    Vector x(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t k = 0; k < xs.size(); ++k) x(static_cast<Eigen::Index>(k)) = xs[k].get<double>();
    if (j.at("y").size() != m) throw Error(ErrorKind::invalid_input, "y needs one entry per agent");
    std::vector<Matrix> y;
    for (std::size_t i = 0; i < m; ++i) y.push_back(parse_matrix(j.at("y")[i], q, horizon, "y"));
    return MeasurementTrace(std::move(x), std::move(y), j.at("seed").get<std::uint64_t>());
  });
}

void write_trajectory_csv(std::ostream& out, const EstimateTrajectory& traj, std::size_t trial, bool header) {
  if (header) out << "trial,agent,t,component,value\n";
  for (std::size_t i = 0; i < traj.agents(); ++i) {
    for (std::size_t t = 0; t <= traj.horizon(); ++t) {
      const auto u = traj.estimate(i, t);
      for (Eigen::Index c = 0; c < u.size(); ++c) {
        out << trial << ',' << i + 1 << ',' << t << ',' << c + 1 << ',' << format_double(u(c)) << '\n';
      }
    }
  }
}

void write_message_csv(std::ostream& out, const MessageLog& log, std::size_t trial, bool header) {
  if (header) out << "trial,sender,t,component,value\n";
  for (std::size_t i = 0; i < log.sent.size(); ++i) {
    const Matrix& s = log.sent[i];
    for (Eigen::Index t = 0; t < s.cols(); ++t) {
      for (Eigen::Index c = 0; c < s.rows(); ++c) {
        out << trial << ',' << i + 1 << ',' << t + 1 << ',' << c + 1 << ',' << format_double(s(c, t)) << '\n';
      }
    }
  }
}

std::string report_csv(const CostReport& report) {
  std::string out = "metric,algorithm,topology,T,value,stderr\n";
  for (const char* metric : {"J", "P"}) {
    for (const auto& s : report.series) {
      if (s.skipped) continue;
      const auto& v = metric[0] == 'J' ? s.J : s.P;
      for (std::size_t t = 0; t < v.size(); ++t) {
        out += std::string(metric) + "," + s.label + "," + s.topology + "," + std::to_string(t + 1) + "," +
               format_double(v[t].mean) + "," + format_double(v[t].std_error) + "\n";
      }
    }
  }
  return out;
}

std::string mse_csv(const CostReport& report) {
  std::string out = "series,algorithm,topology,agent,t,mse,stderr\n";
  for (const auto& s : report.series) {
    if (s.skipped) continue;
    for (Eigen::Index i = 0; i < s.mse.rows(); ++i) {
      for (Eigen::Index t = 0; t < s.mse.cols(); ++t) {
        out += s.label + "," + std::string(to_string(s.algorithm)) + "," + s.topology + "," + std::to_string(i + 1) +
               "," + std::to_string(t + 1) + "," + format_double(s.mse(i, t)) + "," +
               format_double(s.mse_stderr(i, t)) + "\n";
      }
    }
  }
  return out;
}

std::string report_json(const CostReport& report) {
  ordered_json j;
  j["name"] = report.name;
  j["horizon"] = report.horizon;
  j["trials"] = report.trials;
  j["master_seed"] = report.master_seed;
  j["model_seed"] = report.model_seed;
  j["agents"] = report.agents;
  j["series"] = ordered_json::array();
  for (const auto& s : report.series) {
    ordered_json e;
    e["label"] = s.label;
    e["algorithm"] = to_string(s.algorithm);
    e["topology"] = s.topology;
    e["skipped"] = s.skipped;
    if (s.skipped) {
      e["note"] = s.note;
    } else {
      for (const char* metric : {"J", "P"}) {
        const auto& v = metric[0] == 'J' ? s.J : s.P;
        ordered_json mean = ordered_json::array();
        ordered_json se = ordered_json::array();
        for (const auto& est : v) {
          mean.push_back(est.mean);
          se.push_back(est.std_error);
        }
        e[metric] = {{"mean", mean}, {"stderr", se}};
      }
    }
    j["series"].push_back(e);
  }
  return dump(j);
}

std::string span_report_json(const SpanReport& report) {
  ordered_json j;
  j["agent"] = report.agent + 1;
  j["t"] = report.time;
  j["achievable"] = report.achievable;
  j["residual"] = report.residual;
  j["target_norm"] = report.target_norm;
  j["witness"] = ordered_json::array();
  for (const auto& [idx, r] : report.witness) {
    j["witness"].push_back({{"agent", idx.agent + 1}, {"t", idx.time}, {"residual", r}});
  }
  return dump(j);
}

ExperimentConfig parse_config_json(std::string_view text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_config, std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  Fields top(doc, "config");
  cfg.name = top.get_or<std::string>("name", cfg.name);
  cfg.horizon = top.get_or<std::size_t>("horizon", cfg.horizon);
  cfg.trials = top.get_or<std::size_t>("trials", cfg.trials);
  cfg.master_seed = top.get_or<std::uint64_t>("seed", cfg.master_seed);

  if (top.has("model_file")) {
    const auto path = resolve(base_dir, top.get<std::string>("model_file"));
    try {
      cfg.model_override = parse_model_json(read_file(path));
    } catch (const Error& e) {
      top.fail(e.what());
    }
  }
  if (top.has("model")) {
    Fields mf(top.raw("model"), "model");
    if (mf.has("scalar")) {
      Fields sf(mf.raw("scalar"), "model.scalar");
      const auto agents = sf.get<std::size_t>("agents");
      const auto sx2 = sf.get_or<double>("state_variance", 1.0);
      const auto sn2 = sf.get_or<double>("noise_variance", 1.0);
      sf.finish();
      try {
        cfg.model_override = scalar_world(agents, sx2, sn2);
      } catch (const Error& e) {
        sf.fail(e.what());
      }
      cfg.model.agents = agents;
    } else {
      cfg.model.agents = mf.get_or<std::size_t>("agents", cfg.model.agents);
      cfg.model.p = mf.get_or<std::size_t>("p", cfg.model.p);
      cfg.model.q = mf.get_or<std::size_t>("q", cfg.model.q);
      cfg.model.noise_scale = mf.get_or<double>("noise_scale", cfg.model.noise_scale);
      if (mf.has("seed")) cfg.model.seed = mf.get<std::uint64_t>("seed");
    }
    mf.finish();
  }
  if (cfg.model_override) cfg.model.agents = cfg.model_override->agents();

  for (const auto& t : top.raw("topologies")) {
    Fields tf(t, "topology");
    TopologySpec spec;
    spec.label = tf.get<std::string>("label");
    if (tf.has("kind")) {
      const auto kind = parse_topology_kind(tf.get<std::string>("kind"));
      if (!kind) tf.fail("unknown kind '" + tf.get<std::string>("kind") + "'");
      spec.kind = *kind;
    }
    if (tf.has("seed")) spec.seed = tf.get<std::uint64_t>("seed");
    spec.spanning_tree = tf.get_or<bool>("spanning_tree", false);
    if (tf.has("edges")) spec.edges = parse_edges_json(tf.raw("edges"), tf);
    if (tf.has("edges_file")) {
      try {
        const auto topo = parse_edge_list(read_file(resolve(base_dir, tf.get<std::string>("edges_file"))),
                                          cfg.model.agents);
        spec.edges = topo.edges();
      } catch (const Error& e) {
        tf.fail(e.what());
      }
    }
    if (!tf.has("kind") && !spec.edges) tf.fail("needs 'kind', 'edges' or 'edges_file'");
    tf.finish();
    cfg.topologies.push_back(std::move(spec));
  }

  for (const auto& r : top.raw("runs")) {
    Fields rf(r, "run");
    RunSpec run;
    run.label = rf.get<std::string>("label");
    const auto algo = parse_algorithm(rf.get<std::string>("algorithm"));
    if (!algo) rf.fail("unknown algorithm '" + rf.get<std::string>("algorithm") + "'");
    run.algorithm = *algo;
    run.topology = rf.get<std::string>("topology");
    if (rf.has("window")) run.window = rf.get<std::size_t>("window");
    run.forgetting = rf.get_or<double>("forgetting", run.forgetting);
    run.ridge = rf.get_or<double>("ridge", run.ridge);
    if (rf.has("layout")) {
      const auto layout = parse_memory_layout(rf.get<std::string>("layout"));
      if (!layout) rf.fail("unknown layout '" + rf.get<std::string>("layout") + "'");
      run.layout = *layout;
    }
    if (rf.has("weights")) run.weights_path = resolve(base_dir, rf.get<std::string>("weights")).string();
    rf.finish();
    cfg.runs.push_back(std::move(run));
  }
  top.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::invalid_config, e.what());
  }
  return parse_config_json(text, path.parent_path());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_failure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io_failure, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::io_failure, "write failed for " + path.string());
}

}  // namespace dmmse
