#include "dbmc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dbmc/error.hpp"

namespace dbmc {

namespace {

void build_adjacency(Graph& g) {
  g.adj_offset.assign(g.n + 1, 0);
  for (const Edge& e : g.edges) {
    ++g.adj_offset[e.u + 1];
    ++g.adj_offset[e.v + 1];
  }
  for (int i = 0; i < g.n; ++i) g.adj_offset[i + 1] += g.adj_offset[i];
  g.adj_nbr.assign(2 * g.edges.size(), 0);
  g.adj_w.assign(2 * g.edges.size(), 0.0);
  std::vector<int> cursor(g.adj_offset.begin(), g.adj_offset.end() - 1);
  for (const Edge& e : g.edges) {
    g.adj_nbr[cursor[e.u]] = e.v;
    g.adj_w[cursor[e.u]++] = e.w;
    g.adj_nbr[cursor[e.v]] = e.u;
    g.adj_w[cursor[e.v]++] = e.w;
  }
  g.source_mask.assign(g.n, 0);
  for (int s : g.sources) g.source_mask[s] = 1;
}

int reachable_from(const Graph& g, const std::vector<int>& roots, std::vector<char>& seen) {
  seen.assign(g.n, 0);
  std::vector<int> stack;
  int count = 0;
  for (int r : roots)
    if (!seen[r]) {
      seen[r] = 1;
      ++count;
      stack.push_back(r);
    }
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int k = g.adj_offset[u]; k < g.adj_offset[u + 1]; ++k) {
      int v = g.adj_nbr[k];
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count;
}

bool single_component(const Graph& g) {
  std::vector<char> seen;
  return g.n > 0 && reachable_from(g, {0}, seen) == g.n;
}

// Every node must be reachable from the source set, i.e. have a finite
// stationary distance. Components without a source are rejected; several
// components that each hold a source are fine (the protocol runs
// independently on them).
bool sources_cover(const Graph& g) {
  std::vector<char> seen;
  return reachable_from(g, g.sources, seen) == g.n;
}

}  // namespace

Graph build_graph(int n, const std::vector<Edge>& edges, const std::vector<int>& sources,
                  std::optional<std::vector<std::array<double, 2>>> positions) {
  if (n < 2) throw Error(Error::Code::BadSourceSet, "graph needs at least 2 nodes");
  Graph g;
  g.n = n;
  std::set<std::pair<int, int>> seen;
  for (Edge e : edges) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
      throw Error(Error::Code::BadIndex, "edge endpoint out of range");
    if (e.u == e.v) throw Error(Error::Code::BadIndex, "self-loop");
    if (e.u > e.v) std::swap(e.u, e.v);
    if (!(e.w > 0.0) || !std::isfinite(e.w))
      throw Error(Error::Code::NonPositiveWeight, "edge weight must be a positive real");
    if (!seen.insert({e.u, e.v}).second)
      throw Error(Error::Code::DuplicateEdge, "duplicate edge");
    g.edges.push_back(e);
  }
  if (sources.empty()) throw Error(Error::Code::BadSourceSet, "source set empty");
  std::set<int> ss(sources.begin(), sources.end());
  for (int s : ss)
    if (s < 0 || s >= n) throw Error(Error::Code::BadIndex, "source out of range");
  if (static_cast<int>(ss.size()) >= n)
    throw Error(Error::Code::BadSourceSet, "source set must be a proper subset");
  g.sources.assign(ss.begin(), ss.end());
  if (positions) {
    if (static_cast<int>(positions->size()) != n)
      throw Error(Error::Code::BadInput, "positions size mismatch");
    g.positions = std::move(positions);
  }
  build_adjacency(g);
  if (!sources_cover(g))
    throw Error(Error::Code::DisconnectedGraph, "some node is unreachable from the sources");
  return g;
}

Graph gen_random_geometric(int n, double width, double height, double radius,
                           const std::vector<int>& sources, std::uint64_t seed) {
  if (n < 2) throw Error(Error::Code::BadInput, "need at least 2 nodes");
  if (!(radius > 0.0)) throw Error(Error::Code::BadInput, "radius must be positive");
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
    std::uniform_real_distribution<double> ux(0.0, width), uy(0.0, height);
    std::vector<std::array<double, 2>> pos(n);
    for (int i = 0; i < n; ++i) {
      pos[i][0] = ux(rng);
      pos[i][1] = uy(rng);
    }
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double dx = pos[i][0] - pos[j][0];
        const double dy = pos[i][1] - pos[j][1];
        const double d = std::sqrt(dx * dx + dy * dy);
        if (d <= radius && d > 0.0) edges.push_back({i, j, d});
      }
    try {
      Graph g = build_graph(n, edges, sources, std::move(pos));
      if (single_component(g)) return g;
    } catch (const Error& e) {
      if (e.code() != Error::Code::DisconnectedGraph) throw;
    }
  }
  throw Error(Error::Code::ConnectivityFailure,
              "no connected placement within 100 re-seeds");
}

Graph gen_line(int n, SourceEnd source_end) {
  if (n < 2) throw Error(Error::Code::BadInput, "line graph needs at least 2 nodes");
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  int s = source_end == SourceEnd::Leftmost ? 0 : n - 1;
  return build_graph(n, edges, {s});
}

StationaryProfile stationary_profile(const Graph& g) {
  StationaryProfile p;
  const double inf = std::numeric_limits<double>::infinity();
  p.distances.assign(g.n, inf);

  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  for (int s : g.sources) {
    p.distances[s] = 0.0;
    heap.push({0.0, s});
  }
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > p.distances[u]) continue;
    for (int k = g.adj_offset[u]; k < g.adj_offset[u + 1]; ++k) {
      const int v = g.adj_nbr[k];
      const double nd = d + g.adj_w[k];
      if (nd < p.distances[v]) {
        p.distances[v] = nd;
        heap.push({nd, v});
      }
    }
  }

  // Argmin sets with relative tolerance; exact float equality is brittle on
  // geometric weights.
  constexpr double kParentTol = 1e-9;
  p.true_parents.assign(g.n, {});
  for (int i = 0; i < g.n; ++i) {
    if (g.is_source(i)) continue;
    double best = inf;
    for (int k = g.adj_offset[i]; k < g.adj_offset[i + 1]; ++k)
      best = std::min(best, p.distances[g.adj_nbr[k]] + g.adj_w[k]);
    for (int k = g.adj_offset[i]; k < g.adj_offset[i + 1]; ++k)
      if (p.distances[g.adj_nbr[k]] + g.adj_w[k] <= best * (1.0 + kParentTol))
        p.true_parents[i].push_back(g.adj_nbr[k]);
  }

  // Longest-chain depth over the parent DAG; parents strictly decrease x, so
  // processing nodes by increasing distance sees every parent first.
  std::vector<int> order(g.n);
  for (int i = 0; i < g.n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return p.distances[a] < p.distances[b]; });
  p.depth.assign(g.n, 0);
  for (int i : order) {
    int d = 0;
    for (int j : p.true_parents[i]) d = std::max(d, p.depth[j] + 1);
    p.depth[i] = d;
  }
  p.effective_diameter = 1 + *std::max_element(p.depth.begin(), p.depth.end());
  p.layers.assign(p.effective_diameter, {});
  for (int i = 0; i < g.n; ++i) p.layers[p.depth[i]].push_back(i);

  // Only non-source ratios constrain zeta; a source's ratio is identically 0.
  p.zeta = 0.0;
  bool any_pair = false;
  for (int i = 0; i < g.n; ++i) {
    if (g.is_source(i)) continue;
    for (int k = g.adj_offset[i]; k < g.adj_offset[i + 1]; ++k) {
      const int l = g.adj_nbr[k];
      if (std::find(p.true_parents[i].begin(), p.true_parents[i].end(), l) !=
          p.true_parents[i].end())
        continue;
      any_pair = true;
      p.zeta = std::max(p.zeta, p.distances[i] / (p.distances[l] + g.adj_w[k]));
    }
  }
  p.zeta_unconstrained = !any_pair;
  return p;
}

std::string graph_to_json(const Graph& g) {
  nlohmann::json j;
  j["n"] = g.n;
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const Edge& e : g.edges) edges.push_back({e.u + 1, e.v + 1, e.w});
  auto& sources = j["sources"] = nlohmann::json::array();
  for (int s : g.sources) sources.push_back(s + 1);
  if (g.positions) {
    auto& pos = j["positions"] = nlohmann::json::array();
    for (const auto& xy : *g.positions) pos.push_back({xy[0], xy[1]});
  }
  return j.dump(2) + "\n";
}

Graph graph_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Error::Code::BadInput, std::string("graph parse: ") + e.what());
  }
  if (!j.contains("n") || !j.contains("edges") || !j.contains("sources"))
    throw Error(Error::Code::BadInput, "graph file needs n, edges, sources");
  const int n = j["n"].get<int>();
  std::vector<Edge> edges;
  for (const auto& e : j["edges"])
    edges.push_back({e.at(0).get<int>() - 1, e.at(1).get<int>() - 1, e.at(2).get<double>()});
  std::vector<int> sources;
  for (const auto& s : j["sources"]) sources.push_back(s.get<int>() - 1);
  std::optional<std::vector<std::array<double, 2>>> positions;
  if (j.contains("positions")) {
    std::vector<std::array<double, 2>> pos;
    for (const auto& xy : j["positions"])
      pos.push_back({xy.at(0).get<double>(), xy.at(1).get<double>()});
    positions = std::move(pos);
  }
  return build_graph(n, edges, sources, std::move(positions));
}

void save_graph(const Graph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Error::Code::BadInput, "cannot open " + path + " for writing");
  out << graph_to_json(g);
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Error::Code::BadInput, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return graph_from_json(ss.str());
}

Graph with_sources(const Graph& g, const std::vector<int>& sources) {
  return build_graph(g.n, g.edges, sources, g.positions);
}

}  // namespace dbmc
