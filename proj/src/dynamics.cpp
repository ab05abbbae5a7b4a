#include "dbmc/dynamics.hpp"

#include <cmath>
#include <limits>

#include "dbmc/error.hpp"

namespace dbmc {

namespace {

// The weight lookup is templated so the nominal path stays a plain array
// read; the min over neighbors is tie-invariant by construction.
template <class WeightAt>
inline double node_rhs(int i, double t, std::span<const double> x, const Graph& g, double gain,
                       bool use_abs, WeightAt&& weight_at) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = g.adj_offset[i]; k < g.adj_offset[i + 1]; ++k) {
    const double xj = use_abs ? std::abs(x[g.adj_nbr[k]]) : x[g.adj_nbr[k]];
    m = std::min(m, xj + weight_at(i, k, t));
  }
  return -gain * (x[i] - m);
}

template <class WeightAt>
void rhs_loop_serial(double t, std::span<const double> x, const Graph& g, double gain,
                     bool use_abs, std::span<double> dx, WeightAt&& weight_at) {
  for (int i = 0; i < g.n; ++i)
    dx[i] = g.is_source(i) ? 0.0 : node_rhs(i, t, x, g, gain, use_abs, weight_at);
}

template <class WeightAt>
void rhs_loop_par(double t, std::span<const double> x, const Graph& g, double gain, bool use_abs,
                  std::span<double> dx, WeightAt&& weight_at) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < g.n; ++i)
    dx[i] = g.is_source(i) ? 0.0 : node_rhs(i, t, x, g, gain, use_abs, weight_at);
}

template <bool Parallel>
void rhs_dispatch(double t, std::span<const double> x, const Graph& g, double gain,
                  const WeightModel& wm, bool use_abs, std::span<double> dx) {
  auto run = [&](auto&& weight_at) {
    if constexpr (Parallel)
      rhs_loop_par(t, x, g, gain, use_abs, dx, weight_at);
    else
      rhs_loop_serial(t, x, g, gain, use_abs, dx, weight_at);
  };
  if (wm.is_nominal()) {
    run([&](int, int k, double) { return g.adj_w[k]; });
  } else if (const auto* band = std::get_if<MultiplicativeBand>(&wm.kind())) {
    const double c = 0.5 * (band->lo + band->hi);
    const double a = 0.5 * (band->hi - band->lo);
    const auto& om = wm.omegas();
    const auto& ph = wm.phases();
    run([&](int, int k, double tt) { return g.adj_w[k] * (c + a * std::sin(om[k] * tt + ph[k])); });
  } else {
    run([&](int i, int k, double tt) { return wm.at(g, i, k, tt); });
  }
}

}  // namespace

namespace serial {
void rhs_eval(double t, std::span<const double> x, const Graph& g, double gain,
              const WeightModel& wm, bool use_abs, std::span<double> dx) {
  rhs_dispatch<false>(t, x, g, gain, wm, use_abs, dx);
}
}  // namespace serial

namespace par {
void rhs_eval(double t, std::span<const double> x, const Graph& g, double gain,
              const WeightModel& wm, bool use_abs, std::span<double> dx) {
  rhs_dispatch<true>(t, x, g, gain, wm, use_abs, dx);
}
}  // namespace par

namespace {
std::vector<double> eval_alloc(double t, std::span<const double> x, const Graph& g, double gain,
                               const WeightModel& wm, bool use_abs) {
  if (static_cast<int>(x.size()) != g.n)
    throw Error(Error::Code::BadInput, "state length mismatch");
  std::vector<double> dx(g.n);
  serial::rhs_eval(t, x, g, gain, wm, use_abs, dx);
  return dx;
}
const WeightModel kNominal{};
}  // namespace

std::vector<double> rhs_nominal(double t, std::span<const double> x, const Graph& g, double eta) {
  if (!(eta > 0.0)) throw Error(Error::Code::DomainViolation, "eta must be positive");
  return eval_alloc(t, x, g, eta, kNominal, false);
}

std::vector<double> rhs_ppt(double t, std::span<const double> x, const Graph& g,
                            const TbgParams& tbg) {
  return eval_alloc(t, x, g, tbg_gain(t, tbg), kNominal, false);
}

std::vector<double> rhs_pt(double t, std::span<const double> x, const Graph& g,
                           const RhoParams& rho) {
  return eval_alloc(t, x, g, pt_gain(t, rho), kNominal, false);
}

std::vector<double> rhs_perturbed(double t, std::span<const double> x, const Graph& g, double eta,
                                  const WeightModel& wm) {
  return eval_alloc(t, x, g, eta, wm, false);
}

std::vector<double> rhs_abs(double t, std::span<const double> x, const Graph& g, double eta,
                            const WeightModel& wm) {
  return eval_alloc(t, x, g, eta, wm, true);
}

std::vector<double> discrete_min_consensus_step(std::span<const double> z, const Graph& g) {
  if (static_cast<int>(z.size()) != g.n)
    throw Error(Error::Code::BadInput, "state length mismatch");
  std::vector<double> out(g.n);
  for (int i = 0; i < g.n; ++i) {
    double m = std::numeric_limits<double>::infinity();
    for (int k = g.adj_offset[i]; k < g.adj_offset[i + 1]; ++k)
      m = std::min(m, z[g.adj_nbr[k]]);
    out[i] = m;
  }
  return out;
}

std::pair<double, double> lipschitz_witness(double t, std::span<const double> x,
                                            std::span<const double> y, const Graph& g,
                                            const TbgParams& tbg, double gain_bound) {
  if (x.size() != y.size()) throw Error(Error::Code::BadInput, "state length mismatch");
  auto fx = rhs_ppt(t, x, g, tbg);
  auto fy = rhs_ppt(t, y, g, tbg);
  double lhs = 0.0, gap = 0.0;
  for (int i = 0; i < g.n; ++i) {
    lhs = std::max(lhs, std::abs(fx[i] - fy[i]));
    gap = std::max(gap, std::abs(x[i] - y[i]));
  }
  return {lhs, 2.0 * gain_bound * gap};
}

}  // namespace dbmc
