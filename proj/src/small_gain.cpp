#include "dbmc/small_gain.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dbmc/error.hpp"

namespace dbmc {

namespace {
constexpr double kZetaFloor = 1e-12;
}

GainMatrix gain_matrix(const Graph& g, const StationaryProfile& profile, double eta) {
  if (!(eta > 0.0)) throw Error(Error::Code::DomainViolation, "eta must be positive");
  GainMatrix m;
  m.n = g.n;
  m.eta = eta;
  m.zeta_floored = profile.zeta < kZetaFloor;
  m.zeta = std::max(profile.zeta, kZetaFloor);
  m.source_row_value = 0.5 / std::pow(eta, profile.effective_diameter - 1);
  m.entries.assign(static_cast<std::size_t>(g.n) * g.n, 0.0);
  for (int i = 0; i < g.n; ++i) {
    double* row = m.entries.data() + static_cast<std::size_t>(i) * g.n;
    if (g.is_source(i)) {
      std::fill(row, row + g.n, m.source_row_value);
      continue;
    }
    std::fill(row, row + g.n, m.zeta * eta);
    for (int j : profile.true_parents[i]) row[j] = eta;
  }
  return m;
}

std::vector<std::uint8_t> adjacency(const GainMatrix& m) {
  std::vector<std::uint8_t> a(m.entries.size());
  for (std::size_t k = 0; k < m.entries.size(); ++k) a[k] = m.entries[k] == 0.0 ? 0 : 1;
  return a;
}

std::vector<double> gamma_oplus(const GainMatrix& m, std::span<const double> s) {
  if (static_cast<int>(s.size()) != m.n)
    throw Error(Error::Code::BadInput, "vector length mismatch");
  for (double v : s)
    if (v < 0.0) throw Error(Error::Code::DomainViolation, "negative component");
  std::vector<double> out(m.n, 0.0);
  for (int i = 0; i < m.n; ++i) {
    double best = 0.0;
    for (int k = 0; k < m.n; ++k) best = std::max(best, m.at(i, k) * s[k]);
    out[i] = best;
  }
  return out;
}

std::vector<double> apply_D(double d, std::span<const double> s) {
  if (!(d > 1.0)) throw Error(Error::Code::DomainViolation, "diagonal factor must exceed 1");
  std::vector<double> out(s.begin(), s.end());
  for (double& v : out) v *= d;
  return out;
}

Certificate sufficient_condition(double eta, double zeta, int effective_diameter) {
  if (zeta < 0.0 || zeta >= 1.0)
    throw Error(Error::Code::DomainViolation, "zeta must lie in [0, 1)");
  if (effective_diameter < 2)
    throw Error(Error::Code::DomainViolation, "effective diameter must be >= 2");
  Certificate cert;
  const double zeta_eff = std::max(zeta, kZetaFloor);
  const int D = effective_diameter;
  if (!(eta > 1.0)) {
    cert.verdict = Verdict::SufficientConditionFailed;
    cert.reason = "requires eta > 1 (strict)";
    return cert;
  }
  // Longest parent run that avoids source rows has D-2 edges; closed by a
  // non-parent entry it contributes zeta_eff * eta^(D-1), which must contract.
  const double chain_gain = zeta_eff * std::pow(eta, D - 1);
  if (!(chain_gain < 1.0)) {
    cert.verdict = Verdict::SufficientConditionFailed;
    cert.reason = "requires zeta * eta^(D-1) < 1";
    return cert;
  }
  const double d1 = zeta > 0.0 ? std::min(2.0, 0.5 * (1.0 + 1.0 / (eta * zeta_eff))) : 2.0;
  const double d2 = std::pow(0.5, -1.0 / D) * (1.0 - 1e-12);
  const double d3 = std::pow(chain_gain, -1.0 / (D - 1)) * (1.0 - 1e-12);
  cert.verdict = Verdict::CertifiedContractive;
  cert.d = std::min({d1, d2, d3});
  cert.reason = "eta in (1, zeta^(-1/(D-1)))";
  return cert;
}

namespace {

// Directed simple cycles, anchored at their smallest node so each rotation
// class is visited once.
bool dfs_cycles(const GainMatrix& m, double d, int anchor, int node, double product,
                std::vector<int>& path, std::vector<char>& used, Certificate& out) {
  for (int next = anchor; next < m.n; ++next) {
    if (next == node) continue;
    if (next == anchor) {
      if (path.size() >= 2) {
        const double closed = product * d * m.at(node, anchor);
        if (closed >= 1.0) {
          out.verdict = Verdict::BruteForceRefuted;
          out.cycle = path;
          out.cycle_product = closed;
          return true;
        }
      }
      continue;
    }
    if (used[next]) continue;
    used[next] = 1;
    path.push_back(next);
    if (dfs_cycles(m, d, anchor, next, product * d * m.at(node, next), path, used, out))
      return true;
    path.pop_back();
    used[next] = 0;
  }
  return false;
}

}  // namespace

Certificate cycle_contraction_bruteforce(const GainMatrix& m, double d, int max_n) {
  if (m.n > max_n)
    throw Error(Error::Code::TooLarge, "cycle enumeration capped at " + std::to_string(max_n));
  if (!(d > 1.0)) throw Error(Error::Code::DomainViolation, "diagonal factor must exceed 1");
  Certificate cert;
  cert.verdict = Verdict::CertifiedContractive;
  cert.d = d;
  cert.reason = "all directed cycle products below 1";
  std::vector<char> used(m.n, 0);
  std::vector<int> path;
  for (int anchor = 0; anchor < m.n; ++anchor) {
    path.assign(1, anchor);
    std::fill(used.begin(), used.end(), 0);
    used[anchor] = 1;
    if (dfs_cycles(m, d, anchor, anchor, 1.0, path, used, cert)) return cert;
  }
  return cert;
}

ProbeReport no_increase_probe(const GainMatrix& m, double d, int trials, std::uint64_t seed) {
  if (!(d > 1.0)) throw Error(Error::Code::DomainViolation, "diagonal factor must exceed 1");
  ProbeReport rep;
  rep.trials = trials;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  std::vector<double> x(m.n);
  for (int trial = 0; trial < trials; ++trial) {
    for (double& v : x) v = u(rng);
    auto mapped = apply_D(d, gamma_oplus(m, x));
    bool some_below = false;
    for (int i = 0; i < m.n; ++i)
      if (mapped[i] < x[i]) {
        some_below = true;
        break;
      }
    if (!some_below && rep.counterexamples.size() < 4) rep.counterexamples.push_back(x);
  }
  rep.pass = rep.counterexamples.empty();
  return rep;
}

ImplicationReport error_decay_implication_check(const Trajectory& traj, const Graph& g,
                                                const StationaryProfile& profile, double eta,
                                                const WeightModel& wm, double slack) {
  ImplicationReport rep;
  const double u_sup = wm.is_nominal() ? 0.0 : wm.input_sup(g);
  const double zeta_eta = profile.zeta * eta;

  WeightModel bound = wm;
  bound.bind(g);

  // Antecedent for node i at sample s with comparison node j: gain eta when
  // j is a true parent, zeta*eta otherwise; comparison node is a true parent
  // for overestimates and a current parent (perturbed weights) for
  // underestimates. The antecedent must hold at both interval endpoints; the
  // decay is then checked against |e_i| at the later endpoint, which the
  // implication makes the smaller one.
  auto fires = [&](std::size_t s, int i) {
    const auto& e = traj.errors[s];
    const double vi = std::abs(e[i]);
    if (vi < 1e-9) return false;  // |e| kink at 0; derivative undefined there
    if (e[i] > 0.0) {
      for (int j : profile.true_parents[i])
        if (vi >= eta * std::abs(e[j]) + eta * u_sup) return true;
      return false;
    }
    // Current parents at this sample, under the run's weight model.
    const auto& x = traj.states[s];
    const double t = traj.times[s];
    double best = std::numeric_limits<double>::infinity();
    for (int k = g.adj_offset[i]; k < g.adj_offset[i + 1]; ++k)
      best = std::min(best, x[g.adj_nbr[k]] + bound.at(g, i, k, t));
    for (int k = g.adj_offset[i]; k < g.adj_offset[i + 1]; ++k) {
      const int j = g.adj_nbr[k];
      if (x[j] + bound.at(g, i, k, t) > best * (1.0 + 1e-12)) continue;
      const bool is_true_parent =
          std::find(profile.true_parents[i].begin(), profile.true_parents[i].end(), j) !=
          profile.true_parents[i].end();
      const double lambda = is_true_parent ? eta : zeta_eta;
      if (vi >= lambda * std::abs(e[j]) + eta * u_sup) return true;
    }
    return false;
  };

  for (std::size_t s = 0; s + 1 < traj.samples(); ++s) {
    const double dt_s = traj.times[s + 1] - traj.times[s];
    if (dt_s <= 0.0) continue;
    for (int i = 0; i < traj.n; ++i) {
      if (g.is_source(i)) continue;
      if (!fires(s, i) || !fires(s + 1, i)) continue;
      ++rep.antecedent_fired;
      const double vi0 = std::abs(traj.errors[s][i]);
      const double vi1 = std::abs(traj.errors[s + 1][i]);
      const double fd = (vi1 - vi0) / dt_s;
      const double required = -(eta - 1.0) * vi1 + slack;
      if (fd > required)
        rep.violations.push_back({static_cast<int>(s), i, fd, required});
    }
  }
  rep.pass = rep.violations.empty();
  return rep;
}

}  // namespace dbmc
