#pragma once

// Time-varying edge-weight models. Perturbations are keyed per *directed*
// adjacency slot (updating node, neighbor), so w_ij(t) != w_ji(t) is allowed.

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "dbmc/graph.hpp"

namespace dbmc {

struct NominalWeights {};

// w_ij(t) = w_ij * (c + a sin(omega_ij t + phi_ij)) with c = (lo+hi)/2 and
// a = (hi-lo)/2; per-slot omega in [0.5, 2.0] rad/s and phi in [0, 2pi) are
// drawn from the seed, independent of lo/hi.
struct MultiplicativeBand {
  double lo = 0.9;
  double hi = 1.1;
  std::uint64_t seed = 0;
};

// Arbitrary table: (updating node, neighbor, t) -> weight. Slow path.
struct CustomWeights {
  std::function<double(int, int, double)> fn;
};

class WeightModel {
public:
  using Kind = std::variant<NominalWeights, MultiplicativeBand, CustomWeights>;

  WeightModel() : kind_(NominalWeights{}) {}
  explicit WeightModel(Kind kind) : kind_(std::move(kind)) {}

  // One-time binding to a graph: draws per-slot band parameters.
  void bind(const Graph& g);

  bool is_nominal() const { return std::holds_alternative<NominalWeights>(kind_); }
  const Kind& kind() const { return kind_; }

  // Weight seen by node i looking at adjacency slot k at time t.
  double at(const Graph& g, int i, int slot, double t) const;

  // Largest possible |w_ij(t) - w_ij| over all directed edges and times.
  double input_sup(const Graph& g) const;

  const std::vector<double>& omegas() const { return omega_; }
  const std::vector<double>& phases() const { return phi_; }

private:
  Kind kind_;
  std::vector<double> omega_;  // per slot, band model only
  std::vector<double> phi_;
};

}  // namespace dbmc
