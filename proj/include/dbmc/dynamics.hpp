#pragma once

// Right-hand sides of every protocol variant as pure functions of
// (time, state, graph, gain, weight model).
//
// The per-node evaluation is data-parallel: node i reads its neighbors'
// states and writes dx[i]. dbmc::serial holds the reference kernels,
// dbmc::par the OpenMP ones; both produce bitwise-identical output, which
// the test suite asserts and the benchmark target compares for speed.

#include <span>
#include <vector>

#include "dbmc/gains.hpp"
#include "dbmc/graph.hpp"
#include "dbmc/weights.hpp"

namespace dbmc {

enum class Protocol { Nominal, Ppt, Pt, Perturbed, Abs };

namespace serial {
// Core kernel: dx_i = -gain * (x_i - min_j (x_j + w_ij(t))) for non-sources,
// 0 for sources; `use_abs` replaces x_j by |x_j| inside the min.
void rhs_eval(double t, std::span<const double> x, const Graph& g, double gain,
              const WeightModel& wm, bool use_abs, std::span<double> dx);
}  // namespace serial

namespace par {
void rhs_eval(double t, std::span<const double> x, const Graph& g, double gain,
              const WeightModel& wm, bool use_abs, std::span<double> dx);
}  // namespace par

// Spec-level operations (allocating, serial).
std::vector<double> rhs_nominal(double t, std::span<const double> x, const Graph& g, double eta);
std::vector<double> rhs_ppt(double t, std::span<const double> x, const Graph& g,
                            const TbgParams& tbg);
std::vector<double> rhs_pt(double t, std::span<const double> x, const Graph& g,
                           const RhoParams& rho);
std::vector<double> rhs_perturbed(double t, std::span<const double> x, const Graph& g, double eta,
                                  const WeightModel& wm);
std::vector<double> rhs_abs(double t, std::span<const double> x, const Graph& g, double eta,
                            const WeightModel& wm);

// One step of the discrete neighbor-min iteration z_i' = min_{j in N(i)} z_j
// (self excluded).
std::vector<double> discrete_min_consensus_step(std::span<const double> z, const Graph& g);

// (||f(t,x) - f(t,y)||_inf, 2 L ||x - y||_inf) for the TBG-gain right-hand
// side; the first element never exceeds the second when L bounds the gain.
std::pair<double, double> lipschitz_witness(double t, std::span<const double> x,
                                            std::span<const double> y, const Graph& g,
                                            const TbgParams& tbg, double gain_bound);

}  // namespace dbmc
