#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dmmse {

/// Zero-based agent index. Agent ids in files and reports are 1-based.
using Agent = std::size_t;

struct Edge {
  Agent a = 0;
  Agent b = 0;  // a < b once stored in a topology

  auto operator<=>(const Edge&) const = default;
};

/// Connected, undirected, simple communication graph. Immutable once built.
class NetworkTopology {
 public:
  /// Throws invalid-input on self-loops or out-of-range ids and invalid-size
  /// when `agents` is zero; throws invalid-input when the graph is disconnected.
  NetworkTopology(std::size_t agents, std::vector<Edge> edges);

  std::size_t size() const noexcept { return neighbors_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  /// Ascending agent order.
  std::span<const Agent> neighbors(Agent i) const { return neighbors_.at(i); }
  std::size_t degree(Agent i) const { return neighbors_.at(i).size(); }
  bool adjacent(Agent a, Agent b) const;

  bool operator==(const NetworkTopology& other) const { return edges_ == other.edges_ && size() == other.size(); }

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<Agent>> neighbors_;
};

enum class TopologyKind { fully_connected, star, line, cycle, random };

std::string_view to_string(TopologyKind kind) noexcept;
std::optional<TopologyKind> parse_topology_kind(std::string_view name) noexcept;

/// Standard shapes. Star is hubbed at agent 0; line joins i and i+1; cycle
/// closes the line. Random draws per-agent target degrees uniformly from
/// [2, min(10, m-1)] and needs a seed.
NetworkTopology make_topology(TopologyKind kind, std::size_t agents,
                              std::optional<std::uint64_t> seed = std::nullopt);

/// Uniformly attached random tree (each new agent picks an earlier parent).
NetworkTopology random_tree(std::size_t agents, std::uint64_t seed);

/// Random tree of cliques: cells of 2..max_cell agents glued at single agents.
NetworkTopology random_cell_tree(std::size_t agents, std::uint64_t seed, std::size_t max_cell = 4);

struct HopStructure {
  /// khop[i][k] = agents at shortest-path distance exactly k from i (ascending).
  std::vector<std::vector<std::vector<Agent>>> khop;
  /// Eccentricity of each agent.
  std::vector<std::size_t> eccentricity;
  /// distance[i][j] in hops.
  std::vector<std::vector<std::size_t>> distance;

  std::size_t agents() const noexcept { return khop.size(); }
  std::size_t max_eccentricity() const noexcept;
};

HopStructure hop_structure(const NetworkTopology& topo);

bool is_tree(const NetworkTopology& topo) noexcept;

/// BFS tree rooted at the highest-degree agent (lowest index on ties),
/// expanding neighbors in ascending order.
NetworkTopology spanning_tree(const NetworkTopology& topo);

/// An edge that closes a cycle (first edge outside the BFS spanning tree), or
/// nullopt for trees.
std::optional<Edge> cycle_edge(const NetworkTopology& topo);

struct CellDecomposition {
  /// Each cell is an ascending list of agents; cells sorted lexicographically.
  std::vector<std::vector<Agent>> cells;
  /// membership[i] = indices into `cells` containing agent i.
  std::vector<std::vector<std::size_t>> membership;
};

/// All maximal cliques (Bron-Kerbosch with pivoting), lexicographically sorted.
std::vector<std::vector<Agent>> maximal_cliques(const NetworkTopology& topo);

/// Succeeds only for trees of cells: every maximal clique has >= 2 agents,
/// two agents share at most one cell, and the agent-cell incidence graph is a
/// tree. Throws not-a-cell-tree otherwise.
CellDecomposition cell_decomposition(const NetworkTopology& topo);

}  // namespace dmmse
