#pragma once

// Undirected weighted graphs with a designated source set, plus the
// structural analysis the protocol's guarantees are phrased in: stationary
// shortest distances, true-parent sets, layer decomposition, effective
// diameter and the contraction ratio zeta.
//
// Nodes are 0-based internally; the JSON file format and the CLI speak
// 1-based indices.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dbmc {

struct Edge {
  int u = 0;
  int v = 0;  // u < v
  double w = 0.0;
};

struct Graph {
  int n = 0;
  std::vector<Edge> edges;
  std::vector<int> sources;  // sorted, nonempty proper subset of 0..n-1
  std::optional<std::vector<std::array<double, 2>>> positions;

  // CSR adjacency over directed slots; slot k of node i is the k-th
  // (neighbor, weight) pair. Weight models key their per-direction state
  // on these slots.
  std::vector<int> adj_offset;    // size n+1
  std::vector<int> adj_nbr;       // size 2|E|
  std::vector<double> adj_w;      // size 2|E|

  bool is_source(int i) const { return source_mask[i] != 0; }
  std::vector<std::uint8_t> source_mask;

  int degree(int i) const { return adj_offset[i + 1] - adj_offset[i]; }
};

enum class SourceEnd { Leftmost, Rightmost };

// Validating constructor. Indices in `edges` and `sources` are 0-based here.
Graph build_graph(int n, const std::vector<Edge>& edges, const std::vector<int>& sources,
                  std::optional<std::vector<std::array<double, 2>>> positions = std::nullopt);

// Uniform placement in a width x height rectangle; edge between nodes iff
// their distance is <= radius, weighted by that distance. Re-seeds
// (seed, seed+1, ...) up to 100 times until the graph is connected.
Graph gen_random_geometric(int n, double width, double height, double radius,
                           const std::vector<int>& sources, std::uint64_t seed);

// Path graph 1-2-...-n with unit weights and a single source at one end.
Graph gen_line(int n, SourceEnd source_end);

struct StationaryProfile {
  std::vector<double> distances;            // x_i; 0 exactly on sources
  std::vector<std::vector<int>> true_parents;
  std::vector<int> depth;                   // longest-chain depth in the parent DAG
  std::vector<std::vector<int>> layers;     // layers[l] = F_l; layers[0] = sources
  int effective_diameter = 0;               // 1 + max depth
  double zeta = 0.0;                        // max x_i/(x_l + w_il) over non-parent pairs
  bool zeta_unconstrained = false;          // no applicable pair existed
};

// Multi-source Dijkstra plus the derived structure. Total on valid graphs.
// Argmin membership uses relative tolerance 1e-9.
StationaryProfile stationary_profile(const Graph& g);

// JSON file format {n, edges:[[i,j,w],...], sources:[...], positions:[[x,y],...]?}
// with 1-based indices.
std::string graph_to_json(const Graph& g);
Graph graph_from_json(const std::string& text);
void save_graph(const Graph& g, const std::string& path);
Graph load_graph(const std::string& path);

// Same graph with a different source set (used by source-change events);
// structure and positions are preserved.
Graph with_sources(const Graph& g, const std::vector<int>& sources);

}  // namespace dbmc
