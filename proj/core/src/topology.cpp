#include "dmmse/topology.hpp"

#include "dmmse/error.hpp"
#include "dmmse/rng.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <set>

namespace dmmse {

namespace {

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();
constexpr int kRandomGraphAttempts = 100;

std::vector<std::size_t> bfs_distances(const std::vector<std::vector<Agent>>& adj, Agent root) {
  std::vector<std::size_t> dist(adj.size(), kUnreached);
  std::deque<Agent> queue{root};
  dist[root] = 0;
  while (!queue.empty()) {
    const Agent u = queue.front();
    queue.pop_front();
    for (Agent v : adj[u]) {
      if (dist[v] == kUnreached) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

// Union-find over agent indices, used by the random generators.
class Components {
 public:
  explicit Components(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

std::optional<NetworkTopology> try_random_graph(std::size_t m, Engine& rng) {
  const std::size_t lo = std::min<std::size_t>(2, m - 1);
  const std::size_t hi = std::min<std::size_t>(10, m - 1);
  std::uniform_int_distribution<std::size_t> degree_dist(lo, hi);

  std::vector<Agent> stubs;
  for (Agent i = 0; i < m; ++i) {
    const std::size_t d = degree_dist(rng);
    stubs.insert(stubs.end(), d, i);
  }
  std::shuffle(stubs.begin(), stubs.end(), rng);

  std::set<Edge> edges;
  std::vector<std::size_t> degree(m, 0);
  for (std::size_t k = 0; k + 1 < stubs.size(); k += 2) {
    Agent a = stubs[k];
    Agent b = stubs[k + 1];
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (edges.insert({a, b}).second) {
      ++degree[a];
      ++degree[b];
    }
  }

  // Join components with one edge each, preferring low-degree endpoints.
  Components comps(m);
  for (const auto& e : edges) comps.unite(e.a, e.b);
  std::vector<std::vector<Agent>> groups(m);
  for (Agent i = 0; i < m; ++i) groups[comps.find(i)].push_back(i);
  std::erase_if(groups, [](const auto& g) { return g.empty(); });
  auto lowest_degree = [&](const std::vector<Agent>& group) {
    return *std::min_element(group.begin(), group.end(),
                             [&](Agent x, Agent y) { return degree[x] < degree[y]; });
  };
  for (std::size_t g = 1; g < groups.size(); ++g) {
    std::uniform_int_distribution<std::size_t> pick(0, g - 1);
    Agent a = lowest_degree(groups[pick(rng)]);
    Agent b = lowest_degree(groups[g]);
    if (a > b) std::swap(a, b);
    edges.insert({a, b});
    ++degree[a];
    ++degree[b];
    groups[0].insert(groups[0].end(), groups[g].begin(), groups[g].end());
  }

  for (Agent i = 0; i < m; ++i) {
    if (degree[i] < lo || degree[i] > hi) return std::nullopt;
  }
  return NetworkTopology(m, std::vector<Edge>(edges.begin(), edges.end()));
}

void bron_kerbosch(const NetworkTopology& topo, std::vector<Agent>& r, std::vector<Agent> p,
                   std::vector<Agent> x, std::vector<std::vector<Agent>>& out) {
  if (p.empty() && x.empty()) {
    std::vector<Agent> clique = r;
    std::sort(clique.begin(), clique.end());
    out.push_back(std::move(clique));
    return;
  }
  // Pivot: the candidate with the most neighbors in p.
  Agent pivot = p.empty() ? x.front() : p.front();
  std::size_t best = 0;
  for (const auto* pool : {&p, &x}) {
    for (Agent u : *pool) {
      std::size_t c = 0;
      for (Agent v : p) c += topo.adjacent(u, v) ? 1 : 0;
      if (c > best) {
        best = c;
        pivot = u;
      }
    }
  }
  std::vector<Agent> candidates;
  for (Agent v : p) {
    if (!topo.adjacent(pivot, v)) candidates.push_back(v);
  }
  for (Agent v : candidates) {
    std::vector<Agent> p2;
    std::vector<Agent> x2;
    for (Agent u : p) {
      if (topo.adjacent(u, v)) p2.push_back(u);
    }
    for (Agent u : x) {
      if (topo.adjacent(u, v)) x2.push_back(u);
    }
    r.push_back(v);
    bron_kerbosch(topo, r, std::move(p2), std::move(x2), out);
    r.pop_back();
    std::erase(p, v);
    x.push_back(v);
  }
}

}  // namespace

NetworkTopology::NetworkTopology(std::size_t agents, std::vector<Edge> edges) {
  if (agents == 0) throw Error(ErrorKind::invalid_size, "topology needs at least one agent");
  for (auto& e : edges) {
    if (e.a >= agents || e.b >= agents) {
      throw Error(ErrorKind::invalid_input, "edge references an agent outside 1.." + std::to_string(agents));
    }
    if (e.a == e.b) throw Error(ErrorKind::invalid_input, "self-loop on agent " + std::to_string(e.a + 1));
    if (e.a > e.b) std::swap(e.a, e.b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  neighbors_.assign(agents, {});
  for (const auto& e : edges_) {
    neighbors_[e.a].push_back(e.b);
    neighbors_[e.b].push_back(e.a);
  }
  for (auto& n : neighbors_) std::sort(n.begin(), n.end());

  const auto dist = bfs_distances(neighbors_, 0);
  if (std::find(dist.begin(), dist.end(), kUnreached) != dist.end()) {
    throw Error(ErrorKind::invalid_input, "topology is not connected");
  }
}

bool NetworkTopology::adjacent(Agent a, Agent b) const {
  const auto& n = neighbors_.at(a);
  return std::binary_search(n.begin(), n.end(), b);
}

std::string_view to_string(TopologyKind kind) noexcept {
  switch (kind) {
    case TopologyKind::fully_connected: return "fully_connected";
    case TopologyKind::star: return "star";
    case TopologyKind::line: return "line";
    case TopologyKind::cycle: return "cycle";
    case TopologyKind::random: return "random";
  }
  return "unknown";
}

std::optional<TopologyKind> parse_topology_kind(std::string_view name) noexcept {
  for (auto k : {TopologyKind::fully_connected, TopologyKind::star, TopologyKind::line,
                 TopologyKind::cycle, TopologyKind::random}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

NetworkTopology make_topology(TopologyKind kind, std::size_t m, std::optional<std::uint64_t> seed) {
  if (m < 2) throw Error(ErrorKind::invalid_size, "topology needs at least two agents");
  if ((kind == TopologyKind::random) != seed.has_value()) {
    throw Error(ErrorKind::invalid_input, "a seed is required exactly for random topologies");
  }
  std::vector<Edge> edges;
  switch (kind) {
    case TopologyKind::fully_connected:
      for (Agent a = 0; a < m; ++a) {
        for (Agent b = a + 1; b < m; ++b) edges.push_back({a, b});
      }
      break;
    case TopologyKind::star:
      for (Agent b = 1; b < m; ++b) edges.push_back({0, b});
      break;
    case TopologyKind::line:
      for (Agent a = 0; a + 1 < m; ++a) edges.push_back({a, a + 1});
      break;
    case TopologyKind::cycle:
      if (m < 3) throw Error(ErrorKind::invalid_size, "a cycle needs at least three agents");
      for (Agent a = 0; a + 1 < m; ++a) edges.push_back({a, a + 1});
      edges.push_back({0, m - 1});
      break;
    case TopologyKind::random:
      for (int attempt = 0; attempt < kRandomGraphAttempts; ++attempt) {
        auto rng = make_engine(*seed, Stream::topology, {static_cast<std::uint64_t>(attempt)});
        if (auto topo = try_random_graph(m, rng)) return *topo;
      }
      throw Error(ErrorKind::generation_failure,
                  "no connected graph with the requested degree range after 100 attempts");
  }
  return NetworkTopology(m, std::move(edges));
}

NetworkTopology random_tree(std::size_t m, std::uint64_t seed) {
  if (m < 1) throw Error(ErrorKind::invalid_size, "tree needs at least one agent");
  auto rng = make_engine(seed, Stream::topology, {0x74726565ULL});
  std::vector<Agent> label(m);
  std::iota(label.begin(), label.end(), 0);
  std::shuffle(label.begin(), label.end(), rng);
  std::vector<Edge> edges;
  for (Agent k = 1; k < m; ++k) {
    std::uniform_int_distribution<Agent> parent(0, k - 1);
    edges.push_back({label[parent(rng)], label[k]});
  }
  return NetworkTopology(m, std::move(edges));
}

NetworkTopology random_cell_tree(std::size_t m, std::uint64_t seed, std::size_t max_cell) {
  if (m < 2) throw Error(ErrorKind::invalid_size, "cell tree needs at least two agents");
  if (max_cell < 2) throw Error(ErrorKind::invalid_input, "cells hold at least two agents");
  auto rng = make_engine(seed, Stream::topology, {0x63656c6cULL});
  std::vector<Edge> edges;
  auto add_clique = [&](const std::vector<Agent>& members) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) edges.push_back({members[a], members[b]});
    }
  };
  std::size_t placed = 0;
  {
    std::uniform_int_distribution<std::size_t> size(2, std::min(max_cell, m));
    std::vector<Agent> first(size(rng));
    std::iota(first.begin(), first.end(), 0);
    placed = first.size();
    add_clique(first);
  }
  while (placed < m) {
    std::uniform_int_distribution<Agent> anchor(0, placed - 1);
    std::uniform_int_distribution<std::size_t> size(2, std::min(max_cell, m - placed + 1));
    std::vector<Agent> cell{anchor(rng)};
    const std::size_t s = size(rng);
    for (std::size_t k = 1; k < s; ++k) cell.push_back(placed++);
    add_clique(cell);
  }
  return NetworkTopology(m, std::move(edges));
}

std::size_t HopStructure::max_eccentricity() const noexcept {
  return eccentricity.empty() ? 0 : *std::max_element(eccentricity.begin(), eccentricity.end());
}

HopStructure hop_structure(const NetworkTopology& topo) {
  const std::size_t m = topo.size();
  std::vector<std::vector<Agent>> adj(m);
  for (Agent i = 0; i < m; ++i) adj[i].assign(topo.neighbors(i).begin(), topo.neighbors(i).end());

  HopStructure hs;
  hs.khop.resize(m);
  hs.eccentricity.resize(m);
  hs.distance.resize(m);
  for (Agent i = 0; i < m; ++i) {
    hs.distance[i] = bfs_distances(adj, i);
    const std::size_t ecc = *std::max_element(hs.distance[i].begin(), hs.distance[i].end());
    hs.eccentricity[i] = ecc;
    hs.khop[i].assign(ecc + 1, {});
    for (Agent j = 0; j < m; ++j) hs.khop[i][hs.distance[i][j]].push_back(j);
  }
  return hs;
}

bool is_tree(const NetworkTopology& topo) noexcept { return topo.edges().size() + 1 == topo.size(); }

NetworkTopology spanning_tree(const NetworkTopology& topo) {
  const std::size_t m = topo.size();
  Agent root = 0;
  for (Agent i = 1; i < m; ++i) {
    if (topo.degree(i) > topo.degree(root)) root = i;
  }
  std::vector<bool> seen(m, false);
  std::vector<Edge> edges;
  std::deque<Agent> queue{root};
  seen[root] = true;
  while (!queue.empty()) {
    const Agent u = queue.front();
    queue.pop_front();
    for (Agent v : topo.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = true;
        edges.push_back({u, v});
        queue.push_back(v);
      }
    }
  }
  return NetworkTopology(m, std::move(edges));
}

std::optional<Edge> cycle_edge(const NetworkTopology& topo) {
  if (is_tree(topo)) return std::nullopt;
  const auto tree = spanning_tree(topo);
  const auto& kept = tree.edges();
  for (const auto& e : topo.edges()) {
    if (!std::binary_search(kept.begin(), kept.end(), e)) return e;
  }
  return std::nullopt;
}

std::vector<std::vector<Agent>> maximal_cliques(const NetworkTopology& topo) {
  std::vector<std::vector<Agent>> out;
  std::vector<Agent> r;
  std::vector<Agent> p(topo.size());
  std::iota(p.begin(), p.end(), 0);
  bron_kerbosch(topo, r, std::move(p), {}, out);
  std::sort(out.begin(), out.end());
  return out;
}

CellDecomposition cell_decomposition(const NetworkTopology& topo) {
  const std::size_t m = topo.size();
  CellDecomposition cd;
  cd.cells = maximal_cliques(topo);
  cd.membership.assign(m, {});
  for (std::size_t c = 0; c < cd.cells.size(); ++c) {
    if (cd.cells[c].size() < 2) {
      throw Error(ErrorKind::not_a_cell_tree, "agent " + std::to_string(cd.cells[c].front() + 1) + " belongs to no cell");
    }
    for (Agent a : cd.cells[c]) cd.membership[a].push_back(c);
  }

  // Two agents may share at most one cell.
  std::vector<std::vector<int>> shared(m, std::vector<int>(m, 0));
  for (const auto& cell : cd.cells) {
    for (std::size_t x = 0; x < cell.size(); ++x) {
      for (std::size_t y = x + 1; y < cell.size(); ++y) {
        if (++shared[cell[x]][cell[y]] > 1) {
          throw Error(ErrorKind::not_a_cell_tree, "agents " + std::to_string(cell[x] + 1) + " and " +
                                                      std::to_string(cell[y] + 1) + " share two cells");
        }
      }
    }
  }

  // Agent-cell incidence graph must be a tree: connected (inherited from the
  // topology) with exactly nodes-1 incidences.
  std::size_t incidences = 0;
  for (const auto& cell : cd.cells) incidences += cell.size();
  if (incidences + 1 != m + cd.cells.size()) {
    throw Error(ErrorKind::not_a_cell_tree, "cells form a cycle");
  }
  return cd;
}

}  // namespace dmmse
