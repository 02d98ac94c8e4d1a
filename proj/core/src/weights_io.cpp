#include "dmmse/weights_io.hpp"

#include "dmmse/error.hpp"

#include <json.hpp>

#include <bit>
#include <fstream>
#include <map>
#include <tuple>

namespace dmmse {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "dmmse.weights";
constexpr int kVersion = 1;

class Fnv1a {
 public:
  void add(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      hash_ ^= (v >> (8 * b)) & 0xffU;
      hash_ *= 0x100000001b3ULL;
    }
  }
  void add(const Matrix& m) {
    add(static_cast<std::uint64_t>(m.rows()));
    add(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) add(std::bit_cast<std::uint64_t>(m(r, c)));
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

json matrix_record(std::size_t agent, std::size_t t, const std::string& name, const Matrix& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"agent", agent + 1}, {"t", t}, {"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

class Records {
 public:
  explicit Records(const json& list) {
    for (const auto& rec : list) {
      const auto agent = rec.at("agent").get<std::size_t>();
      if (agent == 0) throw Error(ErrorKind::io_failure, "weights file has agent id 0");
      const auto rows = rec.at("rows").get<Eigen::Index>();
      const auto cols = rec.at("cols").get<Eigen::Index>();
      const auto& data = rec.at("data");
      if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
        throw Error(ErrorKind::io_failure, "matrix record has inconsistent dimensions");
      }
      Matrix m(rows, cols);
      std::size_t k = 0;
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data.at(k++).get<double>();
      map_[{agent - 1, rec.at("t").get<std::size_t>(), rec.at("name").get<std::string>()}] = std::move(m);
    }
  }

  const Matrix& get(std::size_t agent, std::size_t t, const std::string& name) const {
    auto it = map_.find({agent, t, name});
    if (it == map_.end()) {
      throw Error(ErrorKind::io_failure, "weights file lacks " + name + " for agent " + std::to_string(agent + 1) +
                                             " at t = " + std::to_string(t));
    }
    return it->second;
  }

 private:
  std::map<std::tuple<std::size_t, std::size_t, std::string>, Matrix> map_;
};

json edge_list(const NetworkTopology& topo) {
  json edges = json::array();
  for (const auto& e : topo.edges()) edges.push_back({e.a + 1, e.b + 1});
  return edges;
}

json index_list(const std::vector<MeasurementIndex>& entries) {
  json out = json::array();
  for (const auto& e : entries) out.push_back({e.agent + 1, e.time});
  return out;
}

std::vector<MeasurementIndex> parse_index_list(const json& list) {
  std::vector<MeasurementIndex> out;
  for (const auto& e : list) out.push_back({e.at(0).get<std::size_t>() - 1, e.at(1).get<std::size_t>()});
  return out;
}

}  // namespace

std::string_view schedule_algorithm(const WeightSchedule& schedule) noexcept {
  switch (schedule.index()) {
    case 0: return "odol";
    case 1: return "oedol";
    default: return "sdol";
  }
}

std::uint64_t model_digest(const WorldModel& model) {
  Fnv1a h;
  h.add(model.p());
  h.add(model.q());
  h.add(model.agents());
  h.add(Matrix(model.xbar));
  h.add(model.sigma_x);
  for (std::size_t i = 0; i < model.agents(); ++i) {
    h.add(model.H[i]);
    h.add(model.sigma_n[i]);
  }
  return h.value();
}

void save_weights(const std::filesystem::path& path, const WeightSchedule& schedule, const NetworkTopology& topo,
                  const WorldModel& model) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["algorithm"] = std::string(schedule_algorithm(schedule));
  doc["agents"] = topo.size();
  doc["p"] = model.p();
  doc["q"] = model.q();
  doc["topology"] = edge_list(topo);
  doc["model_digest"] = model_digest(model);
  json mats = json::array();
  json extra = json::object();

  if (const auto* s = std::get_if<OdolSchedule>(&schedule)) {
    doc["horizon"] = s->horizon();
    doc["window_depth"] = nullptr;
    json innov = json::array();
    for (std::size_t i = 0; i < s->agents(); ++i) {
      json per_agent = json::array();
      for (std::size_t t = 1; t <= s->horizon(); ++t) {
        const auto& st = s->step(i, t);
        mats.push_back(matrix_record(i, t, "K", st.gain));
        mats.push_back(matrix_record(i, t, "Hbar", st.observation));
        mats.push_back(matrix_record(i, t, "Sigma", st.covariance));
        per_agent.push_back({{"entries", index_list(st.innovation)}, {"pseudo_inverse", st.pseudo_inverse}});
      }
      innov.push_back(per_agent);
    }
    extra["innovation"] = innov;
  } else if (const auto* s = std::get_if<OedolSchedule>(&schedule)) {
    doc["horizon"] = s->horizon();
    doc["window_depth"] = nullptr;
    for (std::size_t i = 0; i < s->agents(); ++i) {
      for (std::size_t t = 0; t <= s->horizon(); ++t) {
        const auto& st = s->step(i, t);
        mats.push_back(matrix_record(i, t, "A", st.A));
        mats.push_back(matrix_record(i, t, "B", st.B));
        mats.push_back(matrix_record(i, t, "C", st.C));
        mats.push_back(matrix_record(i, t, "D", st.D));
        mats.push_back(matrix_record(i, t, "Hbar", st.Hbar));
        mats.push_back(matrix_record(i, t, "Sigma", st.covariance));
        for (std::size_t b = 0; b < st.correction.size(); ++b) {
          mats.push_back(matrix_record(i, t, "T" + std::to_string(b + 1), st.correction[b]));
          mats.push_back(matrix_record(i, t, "G" + std::to_string(b + 1), st.G[b]));
        }
      }
    }
  } else {
    const auto& sw = std::get<SdolWeights>(schedule);
    doc["horizon"] = nullptr;
    doc["window_depth"] = sw.window;
    mats.push_back(matrix_record(0, 0, "M_network", sw.M));
    json received = json::array();
    json cond = json::array();
    for (std::size_t i = 0; i < sw.agents.size(); ++i) {
      const auto& a = sw.agents[i];
      for (const auto& [name, m] : std::initializer_list<std::pair<const char*, const Matrix*>>{
               {"A", &a.A}, {"B", &a.B}, {"C", &a.C}, {"D", &a.D}, {"M", &a.M}, {"L", &a.L}, {"K", &a.K},
               {"Sigma_xi", &a.sigma_xi}, {"Hbar", &a.Hbar}, {"Sigma_bar", &a.noise_bar},
               {"J", &a.window_information}}) {
        mats.push_back(matrix_record(i, 0, name, *m));
      }
      json r = json::array();
      for (const auto& [j, hop] : a.received) r.push_back({j + 1, hop});
      received.push_back(r);
      cond.push_back(a.l_condition);
    }
    extra["received"] = received;
    extra["l_condition"] = cond;
  }
  doc["extra"] = extra;
  doc["matrices"] = mats;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io_failure, "cannot write " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw Error(ErrorKind::io_failure, "write failed for " + path.string());
}

WeightSchedule load_weights(const std::filesystem::path& path, const NetworkTopology& topo, const WorldModel& model) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_failure, "cannot open " + path.string());
  try {
    const json doc = json::parse(in);
    if (doc.at("format") != kFormat || doc.at("version") != kVersion) {
      throw Error(ErrorKind::io_failure, path.string() + " is not a version 1 weights container");
    }
    if (doc.at("agents").get<std::size_t>() != topo.size() || doc.at("p").get<std::size_t>() != model.p() ||
        doc.at("q").get<std::size_t>() != model.q()) {
      throw Error(ErrorKind::io_failure, path.string() + " was built for different dimensions");
    }
    if (doc.at("topology") != edge_list(topo)) {
      throw Error(ErrorKind::io_failure, path.string() + " was built for a different topology");
    }
    if (doc.at("model_digest").get<std::uint64_t>() != model_digest(model)) {
      throw Error(ErrorKind::io_failure, path.string() + " was built for a different model");
    }
    const Records rec(doc.at("matrices"));
    const auto algorithm = doc.at("algorithm").get<std::string>();
    const std::size_t m = topo.size();

    if (algorithm == "odol") {
      const auto horizon = doc.at("horizon").get<std::size_t>();
      const auto& innov = doc.at("extra").at("innovation");
      std::vector<std::vector<OdolStep>> steps(m);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t t = 1; t <= horizon; ++t) {
          OdolStep st;
          const auto& meta = innov.at(i).at(t - 1);
          st.innovation = parse_index_list(meta.at("entries"));
          st.pseudo_inverse = meta.at("pseudo_inverse").get<bool>();
          st.gain = rec.get(i, t, "K");
          st.observation = rec.get(i, t, "Hbar");
          st.covariance = rec.get(i, t, "Sigma");
          steps[i].push_back(std::move(st));
        }
      }
      return OdolSchedule(model, std::move(steps));
    }
    if (algorithm == "oedol") {
      const auto horizon = doc.at("horizon").get<std::size_t>();
      std::vector<std::vector<OedolStep>> steps(m);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t t = 0; t <= horizon; ++t) {
          OedolStep st;
          st.A = rec.get(i, t, "A");
          st.B = rec.get(i, t, "B");
          st.C = rec.get(i, t, "C");
          st.D = rec.get(i, t, "D");
          st.Hbar = rec.get(i, t, "Hbar");
          st.covariance = rec.get(i, t, "Sigma");
          for (std::size_t b = 0; b < topo.degree(i); ++b) {
            st.correction.push_back(rec.get(i, t, "T" + std::to_string(b + 1)));
            st.G.push_back(rec.get(i, t, "G" + std::to_string(b + 1)));
          }
          steps[i].push_back(std::move(st));
        }
      }
      return OedolSchedule(topo, model, std::move(steps));
    }
    if (algorithm == "sdol") {
      SdolWeights w;
      w.window = doc.at("window_depth").get<std::size_t>();
      w.p = model.p();
      w.q = model.q();
      w.M = rec.get(0, 0, "M_network");
      const auto& received = doc.at("extra").at("received");
      const auto& cond = doc.at("extra").at("l_condition");
      for (std::size_t i = 0; i < m; ++i) {
        SdolAgentWeights a;
        a.A = rec.get(i, 0, "A");
        a.B = rec.get(i, 0, "B");
        a.C = rec.get(i, 0, "C");
        a.D = rec.get(i, 0, "D");
        a.M = rec.get(i, 0, "M");
        a.L = rec.get(i, 0, "L");
        a.K = rec.get(i, 0, "K");
        a.sigma_xi = rec.get(i, 0, "Sigma_xi");
        a.Hbar = rec.get(i, 0, "Hbar");
        a.noise_bar = rec.get(i, 0, "Sigma_bar");
        a.window_information = rec.get(i, 0, "J");
        for (const auto& r : received.at(i)) {
          const auto j = r.at(0).get<std::size_t>();
          if (j == 0 || j > m) throw Error(ErrorKind::io_failure, "received agent out of range");
          a.received.emplace_back(j - 1, r.at(1).get<std::size_t>());
        }
        a.l_condition = cond.at(i).get<double>();
        w.agents.push_back(std::move(a));
      }
      return w;
    }
    throw Error(ErrorKind::io_failure, "unknown algorithm '" + algorithm + "' in " + path.string());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io_failure, "corrupt weights file " + path.string() + ": " + e.what());
  }
}

}  // namespace dmmse
