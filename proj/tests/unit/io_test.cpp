#include <dmmse/error.hpp>
#include <dmmse/io.hpp>
#include <dmmse/weights_io.hpp>

#include <gtest/gtest.h>

#include "fixtures.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

namespace {

namespace fs = std::filesystem;
using dmmse::TopologyKind;

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("dmmse_io_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Format, ShortestRoundTrip) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n(0.0, 1e3);
  for (int k = 0; k < 2000; ++k) {
    const double v = n(gen) * std::pow(10.0, static_cast<int>(gen() % 40) - 20);
    EXPECT_EQ(std::stod(dmmse::format_double(v)), v);
  }
  EXPECT_EQ(dmmse::format_double(0.5), "0.5");
  EXPECT_EQ(dmmse::format_double(3.0), "3");
}

TEST(EdgeList, RoundTrip) {
  const auto g = dmmse::make_topology(TopologyKind::random, 12, 4);
  const auto text = dmmse::edge_list_text(g);
  EXPECT_EQ(dmmse::parse_edge_list(text), g);
  EXPECT_EQ(dmmse::edge_list_text(dmmse::make_topology(TopologyKind::line, 3)), "1 2\n2 3\n");
  EXPECT_EQ(dmmse::parse_edge_list("# comment\n\n2 1\n 3 2\n"), dmmse::make_topology(TopologyKind::line, 3));
  EXPECT_THROW(dmmse::parse_edge_list("1 x\n"), dmmse::Error);
  EXPECT_THROW(dmmse::parse_edge_list("0 1\n"), dmmse::Error);
  EXPECT_THROW(dmmse::parse_edge_list("1 2 3\n"), dmmse::Error);
  EXPECT_THROW(dmmse::parse_edge_list("1 2\n3 4\n"), dmmse::Error);  // disconnected
}

TEST(ModelJson, RoundTripIsExact) {
  const auto w = fixtures::world(4, 2, 5, 77);
  EXPECT_EQ(dmmse::parse_model_json(dmmse::model_json(w)), w);
  EXPECT_THROW(dmmse::parse_model_json("{\"agents\": 1}"), dmmse::Error);
  EXPECT_THROW(dmmse::parse_model_json("not json"), dmmse::Error);
}

TEST(TraceJson, RoundTripIsExact) {
  const auto w = fixtures::world(3, 2, 4, 8);
  const auto tr = dmmse::sample_trace(w, 6, 99);
  EXPECT_EQ(dmmse::parse_trace_json(dmmse::trace_json(tr)), tr);
}

TEST(Csv, TrajectoryAndMessages) {
  const auto w = fixtures::world(2, 1, 3, 1);
  const auto g = dmmse::make_topology(TopologyKind::line, 3);
  const auto tr = dmmse::sample_trace(w, 2, 3);
  const auto [u, log] = dmmse::oedol_run(dmmse::oedol_schedule(g, w, 2), tr);
  std::ostringstream a;
  dmmse::write_trajectory_csv(a, u, 0, true);
  dmmse::write_trajectory_csv(a, u, 1, false);
  std::istringstream lines(a.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "trial,agent,t,component,value");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 2u * 3u * 3u * 2u);  // trials x agents x (T+1) x p

  std::ostringstream b;
  dmmse::write_message_csv(b, log, 0, true);
  EXPECT_EQ(b.str().substr(0, b.str().find('\n')), "trial,sender,t,component,value");
}

TEST(Config, ParsesAndRejects) {
  const auto dir = scratch("config");
  dmmse::write_file(dir / "g.edges", "1 2\n2 3\n3 1\n");
  const std::string text = R"({
    "name": "demo", "horizon": 4, "trials": 3, "seed": 9,
    "model": {"agents": 3, "p": 2, "q": 1, "noise_scale": 0.5, "seed": 4},
    "topologies": [{"label": "tri", "edges_file": "g.edges"},
                   {"label": "r", "kind": "random", "seed": 2, "spanning_tree": true}],
    "runs": [{"label": "o", "algorithm": "odol", "topology": "tri"},
             {"label": "s", "algorithm": "sdol", "topology": "tri", "window": 3, "layout": "raw"},
             {"label": "d", "algorithm": "drls", "topology": "r", "forgetting": 0.99, "ridge": 0.01}]
  })";
  const auto c = dmmse::parse_config_json(text, dir);
  EXPECT_EQ(c.name, "demo");
  EXPECT_EQ(c.horizon, 4u);
  EXPECT_EQ(c.trials, 3u);
  EXPECT_EQ(c.master_seed, 9u);
  EXPECT_EQ(c.model.noise_scale, 0.5);
  ASSERT_TRUE(c.model.seed.has_value());
  EXPECT_EQ(*c.model.seed, 4u);
  ASSERT_TRUE(c.topologies[0].edges.has_value());
  EXPECT_EQ(c.topologies[0].edges->size(), 3u);
  EXPECT_TRUE(c.topologies[1].spanning_tree);
  EXPECT_EQ(c.runs[1].layout, dmmse::MemoryLayout::raw_measurements);
  EXPECT_EQ(*c.runs[1].window, 3u);
  EXPECT_EQ(c.runs[2].forgetting, 0.99);

  auto kind_of = [&](const std::string& t) {
    try {
      dmmse::parse_config_json(t, dir);
    } catch (const dmmse::Error& e) {
      return e.kind();
    }
    return dmmse::ErrorKind::invalid_input;  // sentinel: parse succeeded
  };
  const auto cfg_error = dmmse::ErrorKind::invalid_config;
  EXPECT_EQ(kind_of("{"), cfg_error);
  EXPECT_EQ(kind_of(R"({"topologies": [], "runs": [], "bogus": 1})"), cfg_error);
  EXPECT_EQ(kind_of(R"({"trials": -1, "topologies": [], "runs": []})"), cfg_error);
  EXPECT_EQ(kind_of(R"({"topologies": [{"label": "x", "kind": "torus"}], "runs": []})"), cfg_error);
  EXPECT_EQ(kind_of(R"({"topologies": [{"label": "x", "kind": "line"}],
                        "runs": [{"label": "a", "algorithm": "kalman", "topology": "x"}]})"),
            cfg_error);
  EXPECT_EQ(kind_of(R"({"topologies": [{"label": "x", "edges_file": "missing.edges"}],
                        "runs": [{"label": "a", "algorithm": "odol", "topology": "x"}]})"),
            cfg_error);
  EXPECT_THROW(dmmse::load_config(dir / "nope.json"), dmmse::Error);
}

TEST(Config, ScalarModel) {
  const auto c = dmmse::parse_config_json(R"({
    "model": {"scalar": {"agents": 4, "state_variance": 2, "noise_variance": 0.5}},
    "topologies": [{"label": "c", "kind": "cycle"}],
    "runs": [{"label": "o", "algorithm": "odol", "topology": "c"}]})");
  ASSERT_TRUE(c.model_override.has_value());
  EXPECT_EQ(c.resolved_model(), dmmse::scalar_world(4, 2.0, 0.5));
}

template <class Run>
void expect_round_trip(const dmmse::WeightSchedule& schedule, const dmmse::NetworkTopology& g,
                       const dmmse::WorldModel& w, const fs::path& file, Run run) {
  dmmse::save_weights(file, schedule, g, w);
  const auto loaded = dmmse::load_weights(file, g, w);
  EXPECT_EQ(dmmse::schedule_algorithm(loaded), dmmse::schedule_algorithm(schedule));
  const auto tr = dmmse::sample_trace(w, 5, 12);
  EXPECT_EQ(run(loaded, tr), run(schedule, tr));
}

TEST(Weights, RoundTripReproducesRuns) {
  const auto dir = scratch("weights");
  const auto w = fixtures::world(3, 2, 6, 21);
  const auto tree = dmmse::make_topology(TopologyKind::star, 6);
  const auto rnd = dmmse::make_topology(TopologyKind::random, 6, 3);

  expect_round_trip(dmmse::odol_schedule(rnd, w, 5), rnd, w, dir / "odol.json", [](const auto& s, const auto& tr) {
    return dmmse::odol_run(std::get<dmmse::OdolSchedule>(s), tr);
  });
  const auto oedol = dmmse::oedol_schedule(tree, w, 5);
  expect_round_trip(oedol, tree, w, dir / "oedol.json", [](const auto& s, const auto& tr) {
    return dmmse::oedol_run(std::get<dmmse::OedolSchedule>(s), tr).first;
  });
  EXPECT_EQ(std::get<dmmse::OedolSchedule>(dmmse::load_weights(dir / "oedol.json", tree, w)), oedol);
  expect_round_trip(dmmse::sdol_weights(rnd, w, 4), rnd, w, dir / "sdol.json", [](const auto& s, const auto& tr) {
    return dmmse::sdol_run(std::get<dmmse::SdolWeights>(s), tr);
  });
}

TEST(Weights, MismatchAndCorruptionAreIoFailures) {
  const auto dir = scratch("weights_bad");
  const auto w = fixtures::world(2, 1, 5, 3);
  const auto g = dmmse::make_topology(TopologyKind::line, 5);
  dmmse::save_weights(dir / "s.json", dmmse::oedol_schedule(g, w, 3), g, w);

  auto kind_of = [](auto&& f) {
    try {
      f();
    } catch (const dmmse::Error& e) {
      return e.kind();
    }
    return dmmse::ErrorKind::invalid_input;
  };
  const auto io = dmmse::ErrorKind::io_failure;
  const auto other_model = fixtures::world(2, 1, 5, 4);
  EXPECT_EQ(kind_of([&] { dmmse::load_weights(dir / "s.json", g, other_model); }), io);
  const auto star = dmmse::make_topology(TopologyKind::star, 5);
  EXPECT_EQ(kind_of([&] { dmmse::load_weights(dir / "s.json", star, w); }), io);
  EXPECT_EQ(kind_of([&] { dmmse::load_weights(dir / "missing.json", g, w); }), io);

  auto text = dmmse::read_file(dir / "s.json");
  dmmse::write_file(dir / "cut.json", text.substr(0, text.size() / 2));
  EXPECT_EQ(kind_of([&] { dmmse::load_weights(dir / "cut.json", g, w); }), io);
  const auto at = text.find("\"name\":\"A\"");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 10, "\"name\":\"Q\"");
  dmmse::write_file(dir / "renamed.json", text);
  EXPECT_EQ(kind_of([&] { dmmse::load_weights(dir / "renamed.json", g, w); }), io);
}

TEST(Weights, DigestTracksEveryEntry) {
  auto w = fixtures::world(2, 1, 3, 5);
  const auto d = dmmse::model_digest(w);
  EXPECT_EQ(dmmse::model_digest(w), d);
  w.sigma_n[2](0, 0) = std::nextafter(w.sigma_n[2](0, 0), 10.0);
  EXPECT_NE(dmmse::model_digest(w), d);
}

}  // namespace
