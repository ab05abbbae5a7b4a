#pragma once

// Fixed-step RK4 integration of any protocol right-hand side, with source
// pinning, source-change events, and per-sample metric extraction (errors,
// V+, V-, max |e|). Bound checks and the decay-rate fit operate on the
// sampled trajectory.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dbmc/dynamics.hpp"
#include "dbmc/gains.hpp"
#include "dbmc/graph.hpp"
#include "dbmc/weights.hpp"

namespace dbmc {

// Initial-state policies. Sources always start at 0 exactly.
struct OverestimateInit {
  double offset_hi = 10.0;  // x_i(0) = x_i* + U[0, offset_hi]
  std::uint64_t seed = 0;
};
struct ExplicitInit {
  std::vector<double> state;
};
struct RandomBandInit {
  double lo = 0.0;
  double hi = 10.0;
  std::uint64_t seed = 0;
};
using InitPolicy = std::variant<OverestimateInit, ExplicitInit, RandomBandInit>;

struct SourceChange {
  double t = 0.0;
  std::vector<int> new_sources;
};

enum class ParallelMode { Auto, Serial, Parallel };

struct SimConfig {
  Protocol protocol = Protocol::Nominal;
  double eta = 1.0;        // Nominal / Perturbed / Abs
  TbgParams tbg;           // Ppt
  RhoParams rho;           // Pt
  WeightModel weights;     // Perturbed / Abs; Nominal model otherwise
  double t_end = 10.0;
  double dt = 1e-3;
  double pt_shrink = 0.5;        // step-shrink factor near the prescribed time
  int sample_every = 10;         // record every k-th step
  InitPolicy init = OverestimateInit{};
  std::vector<SourceChange> events;
  ParallelMode parallel = ParallelMode::Auto;
};

struct EventRecord {
  double t = 0.0;
  std::vector<int> new_sources;
  int sample_index = 0;  // first sample at or after the event
};

struct Trajectory {
  int n = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> states;  // per sample, length n
  std::vector<std::vector<double>> errors;  // against the profile active at that time
  std::vector<double> v_plus;
  std::vector<double> v_minus;
  std::vector<double> max_abs_err;
  double e_max0 = 0.0;  // max_i e_i(0)
  std::vector<EventRecord> events_applied;

  std::size_t samples() const { return times.size(); }
};

// Largest overestimate max(0, max_i e_i) and largest underestimate
// max(0, -min_i e_i).
double v_plus_of(std::span<const double> errors);
double v_minus_of(std::span<const double> errors);

// Nodes attaining V+ / -V- within absolute tolerance 1e-9.
std::pair<std::vector<int>, std::vector<int>> active_sets(std::span<const double> errors);

// RK4 with fixed base step; PT runs shrink the step to
// min(dt, beta*(T_bar_s - t)) with floor 1e-9*T_bar_s and hold the state
// bitwise once t >= T_bar_s. Metrics are computed against the stationary
// profile current at each sample; source-change events swap the pinned set,
// zero the new sources, and recompute the profile.
Trajectory integrate(const SimConfig& cfg, const Graph& g, const StationaryProfile& profile);

struct BoundViolation {
  int sample = 0;
  int node = 0;
  double value = 0.0;
  double bound = 0.0;
};

// Settling bounds for TBG-gain runs started from overestimates: per layer l,
// e_i(t) <= l * delta/(1+delta) * e_max0 + tol for t >= l*T_s, and the
// network-wide form with l = D(G)-1 for every node. Also reports the first
// sample time at which each node's error stays within the network bound.
struct SettlingReport {
  bool pass = false;
  double network_bound = 0.0;      // (D-1) * delta/(1+delta) * e_max0
  double network_time = 0.0;       // (D-1) * T_s
  std::vector<BoundViolation> network_violations;
  std::vector<BoundViolation> layer_violations;
  std::vector<double> first_within_bound;  // per node; -1 if never
  double min_error_seen = 0.0;             // for the overestimate-preservation check
};
SettlingReport settling_bound_check(const Trajectory& traj, const StationaryProfile& profile,
                                    const TbgParams& tbg, double tol = 1e-6);

// V+ and V- must not increase between consecutive samples beyond
// tol_step = step_slack + 1e-9 * (1 + V(t_k)). step_slack covers
// perturbation-driven drift (eta * ||u||_inf * sample spacing) and is 0 for
// unperturbed runs.
struct MonotonicityReport {
  bool pass = false;
  std::optional<std::pair<int, double>> first_vplus_violation;   // sample, excess
  std::optional<std::pair<int, double>> first_vminus_violation;
};
MonotonicityReport monotonicity_check(const Trajectory& traj, double step_slack = 0.0,
                                      int from_sample = 0);

// Least-squares exponential fit of the max-error sequence m(t): a line fit
// of ln(m - floor) over samples with m > 2*floor, floor = median of m over
// the final 10% of samples. Throws WindowTooShort when fewer than 8 samples
// qualify.
struct DecayFit {
  double rate = 0.0;      // p in m ~ c * exp(-p t)
  double offset = 0.0;    // ln c
  double r_squared = 0.0;
  double floor = 0.0;
  int samples_used = 0;
};
DecayFit decay_fit(const Trajectory& traj, std::optional<std::pair<double, double>> window =
                                               std::nullopt);

}  // namespace dbmc
