#pragma once

// Gain-matrix construction and the cycle-contraction certificate for the
// constant-gain protocol: the max-linear map induced by the matrix, the
// diagonal robustness operator, an analytic sufficient condition, and an
// exhaustive directed-cycle oracle for desk-scale instances.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dbmc/graph.hpp"
#include "dbmc/simulator.hpp"

namespace dbmc {

struct GainMatrix {
  int n = 0;
  std::vector<double> entries;  // row-major n*n
  double eta = 0.0;
  double zeta = 0.0;            // value used for non-parent columns (after flooring)
  double source_row_value = 0.0;
  bool zeta_floored = false;    // zeta was 0 and the 1e-12 floor kicked in

  double at(int i, int j) const { return entries[static_cast<std::size_t>(i) * n + j]; }
};

// Row i (non-source): eta at true-parent columns, zeta*eta elsewhere.
// Source rows carry 0.5 / eta^(D-1) in every column, so no entry is zero and
// the induced adjacency is complete.
GainMatrix gain_matrix(const Graph& g, const StationaryProfile& profile, double eta);

// 0/1 indicator of nonzero entries.
std::vector<std::uint8_t> adjacency(const GainMatrix& m);

// (Gamma_oplus s)_i = max_k entries[i][k] * s_k. Monotone and positively
// homogeneous of degree 1.
std::vector<double> gamma_oplus(const GainMatrix& m, std::span<const double> s);

// Componentwise d*s, d > 1.
std::vector<double> apply_D(double d, std::span<const double> s);

enum class Verdict { CertifiedContractive, SufficientConditionFailed, BruteForceRefuted };

struct Certificate {
  Verdict verdict = Verdict::SufficientConditionFailed;
  double d = 0.0;                 // valid when certified
  std::string reason;
  std::vector<int> cycle;         // refuting cycle, when refuted
  double cycle_product = 0.0;
};

// Analytic certificate: requires eta > 1 and zeta_eff * eta^(D-1) < 1
// (zeta_eff = max(zeta, 1e-12); for D = 2 this is the familiar eta < 1/zeta).
// Every maximal run of parent entries in a cycle then contracts: runs ending
// at a source row are bounded by 0.5 d^D, runs ending elsewhere by
// d^(D-1) * zeta_eff * eta^(D-1). d = min(d1, d2, d3) with
//   d1 = (1 + 1/(eta zeta_eff))/2   (capped at 2),  so d1*eta*zeta_eff < 1,
//   d2 = 0.5^(-1/D) * (1 - 1e-12),                  so 0.5*d2^D < 1,
//   d3 = (zeta_eff eta^(D-1))^(-1/(D-1)) * (1-1e-12), covering mixed runs.
Certificate sufficient_condition(double eta, double zeta, int effective_diameter);

// Enumerates every simple directed cycle (length >= 2, deduplicated up to
// rotation) and multiplies d*entry along it; refutes on the first product
// >= 1. Factorial in n; refuses n > max_n.
Certificate cycle_contraction_bruteforce(const GainMatrix& m, double d, int max_n = 8);

struct ProbeReport {
  bool pass = false;
  int trials = 0;
  std::vector<std::vector<double>> counterexamples;  // x with D(Gamma(x)) >= x
};

// Samples random positive vectors x and asserts at least one component of
// d * Gamma_oplus(x) falls strictly below x.
ProbeReport no_increase_probe(const GainMatrix& m, double d, int trials,
                              std::uint64_t seed = 12345);

// Trajectory-level check of the per-node decay implication: whenever
// |e_i| >= lambda_ij |e_j| + eta ||u||_inf at two consecutive samples (j the
// comparison node: gain eta for true parents, zeta*eta for current parents
// that are not true parents), the finite difference of |e_i| must fall below
// -(eta-1) |e_i| at the later sample, up to slack.
struct ImplicationViolation {
  int sample = 0;
  int node = 0;
  double fd = 0.0;
  double required = 0.0;
};
struct ImplicationReport {
  bool pass = false;
  long antecedent_fired = 0;
  std::vector<ImplicationViolation> violations;
};
ImplicationReport error_decay_implication_check(const Trajectory& traj, const Graph& g,
                                                const StationaryProfile& profile, double eta,
                                                const WeightModel& wm, double slack);

}  // namespace dbmc
