#include "dbmc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dbmc/error.hpp"

namespace dbmc {

double v_plus_of(std::span<const double> errors) {
  double m = 0.0;
  for (double e : errors) m = std::max(m, e);
  return m;
}

double v_minus_of(std::span<const double> errors) {
  double m = 0.0;
  for (double e : errors) m = std::max(m, -e);
  return m;
}

std::pair<std::vector<int>, std::vector<int>> active_sets(std::span<const double> errors) {
  constexpr double tol = 1e-9;
  const double vp = v_plus_of(errors);
  const double vm = v_minus_of(errors);
  std::vector<int> kp, km;
  for (int i = 0; i < static_cast<int>(errors.size()); ++i) {
    if (std::abs(errors[i] - vp) <= tol) kp.push_back(i);
    if (std::abs(errors[i] + vm) <= tol) km.push_back(i);
  }
  return {kp, km};
}

namespace {

std::vector<double> initial_state(const InitPolicy& policy, const Graph& g,
                                  const StationaryProfile& profile) {
  std::vector<double> x(g.n, 0.0);
  if (const auto* ov = std::get_if<OverestimateInit>(&policy)) {
    std::mt19937_64 rng(ov->seed);
    std::uniform_real_distribution<double> u(0.0, ov->offset_hi);
    for (int i = 0; i < g.n; ++i) x[i] = g.is_source(i) ? 0.0 : profile.distances[i] + u(rng);
  } else if (const auto* ex = std::get_if<ExplicitInit>(&policy)) {
    if (static_cast<int>(ex->state.size()) != g.n)
      throw Error(Error::Code::BadInput, "explicit initial state length mismatch");
    x = ex->state;
    for (int s : g.sources)
      if (x[s] != 0.0)
        throw Error(Error::Code::BadInput, "source initial state must be 0");
  } else {
    const auto& rb = std::get<RandomBandInit>(policy);
    std::mt19937_64 rng(rb.seed);
    std::uniform_real_distribution<double> u(rb.lo, rb.hi);
    for (int i = 0; i < g.n; ++i) x[i] = g.is_source(i) ? 0.0 : u(rng);
  }
  return x;
}

struct Stepper {
  const SimConfig& cfg;
  const Graph* g;
  bool parallel;
  std::vector<double> k1, k2, k3, k4, tmp;

  explicit Stepper(const SimConfig& c, const Graph* graph)
      : cfg(c), g(graph), k1(graph->n), k2(graph->n), k3(graph->n), k4(graph->n), tmp(graph->n) {
    parallel = cfg.parallel == ParallelMode::Parallel ||
               (cfg.parallel == ParallelMode::Auto && graph->n >= 512);
  }

  double gain_at(double t) const {
    switch (cfg.protocol) {
      case Protocol::Nominal:
      case Protocol::Perturbed:
      case Protocol::Abs: return cfg.eta;
      case Protocol::Ppt: return tbg_gain(t, cfg.tbg);
      case Protocol::Pt: return pt_gain(t, cfg.rho);
    }
    return cfg.eta;
  }

  void rhs(double t, std::span<const double> x, std::span<double> dx) {
    const bool use_abs = cfg.protocol == Protocol::Abs;
    const double gain = gain_at(t);
    if (parallel)
      par::rhs_eval(t, x, *g, gain, cfg.weights, use_abs, dx);
    else
      serial::rhs_eval(t, x, *g, gain, cfg.weights, use_abs, dx);
  }

  void step(double t, double h, std::vector<double>& x) {
    const int n = g->n;
    rhs(t, x, k1);
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    rhs(t + 0.5 * h, tmp, k2);
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    rhs(t + 0.5 * h, tmp, k3);
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    rhs(t + h, tmp, k4);
    const double h6 = h / 6.0;
    for (int i = 0; i < n; ++i)
      x[i] += h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    // Sources are pinned; the RK stages are zero there, but enforce exactly.
    for (int s : g->sources) x[s] = 0.0;
  }
};

void validate_config(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw Error(Error::Code::BadInput, "dt must be positive");
  if (!(cfg.t_end > 0.0)) throw Error(Error::Code::BadInput, "t_end must be positive");
  if (cfg.sample_every < 1) throw Error(Error::Code::BadInput, "sample_every must be >= 1");
  if (cfg.protocol == Protocol::Ppt) validate(cfg.tbg);
  if (cfg.protocol == Protocol::Pt) validate(cfg.rho);
  if (cfg.protocol == Protocol::Nominal || cfg.protocol == Protocol::Perturbed ||
      cfg.protocol == Protocol::Abs) {
    if (!(cfg.eta > 0.0)) throw Error(Error::Code::DomainViolation, "eta must be positive");
  }
  for (const auto& ev : cfg.events)
    if (ev.t < 0.0) throw Error(Error::Code::EventBeforeStart, "event before t = 0");
}

}  // namespace

Trajectory integrate(const SimConfig& cfg, const Graph& g, const StationaryProfile& profile) {
  validate_config(cfg);

  Graph graph = g;
  StationaryProfile active = profile;
  SimConfig local = cfg;
  local.weights.bind(graph);

  std::vector<SourceChange> events = cfg.events;
  std::sort(events.begin(), events.end(),
            [](const SourceChange& a, const SourceChange& b) { return a.t < b.t; });
  std::size_t next_event = 0;

  Trajectory traj;
  traj.n = g.n;

  std::vector<double> x = initial_state(cfg.init, graph, active);

  const bool is_pt = cfg.protocol == Protocol::Pt;
  const double t_hold = is_pt ? cfg.rho.T_bar_s : std::numeric_limits<double>::infinity();
  const double pt_floor = is_pt ? 1e-9 * cfg.rho.T_bar_s : 0.0;

  Stepper stepper(local, &graph);

  auto record = [&](double t) {
    if (!traj.times.empty() && !(t > traj.times.back())) return;
    traj.times.push_back(t);
    traj.states.push_back(x);
    std::vector<double> e(g.n);
    for (int i = 0; i < g.n; ++i) {
      e[i] = x[i] - active.distances[i];
      if (!std::isfinite(x[i]))
        throw Error(Error::Code::NonFiniteState, "state diverged at t = " + std::to_string(t));
    }
    traj.v_plus.push_back(v_plus_of(e));
    traj.v_minus.push_back(v_minus_of(e));
    double ma = 0.0;
    for (double v : e) ma = std::max(ma, std::abs(v));
    traj.max_abs_err.push_back(ma);
    traj.errors.push_back(std::move(e));
  };

  double t = 0.0;
  record(0.0);
  traj.e_max0 = *std::max_element(traj.errors[0].begin(), traj.errors[0].end());

  long step_count = 0;
  const double t_eps = 0.5 * cfg.dt * 1e-9;
  bool held = false;
  while (t < cfg.t_end - t_eps) {
    // Apply any event due at the current time.
    while (next_event < events.size() && t >= events[next_event].t - t_eps) {
      const auto& ev = events[next_event];
      graph = with_sources(graph, ev.new_sources);
      active = stationary_profile(graph);
      for (int s : graph.sources) x[s] = 0.0;
      traj.events_applied.push_back({t, ev.new_sources, static_cast<int>(traj.samples())});
      ++next_event;
    }

    double h = cfg.dt;
    if (is_pt && t < t_hold) {
      const double remain = t_hold - t;
      if (remain <= 1.5 * pt_floor) {
        // Snap onto the prescribed time; the state recorded just before is
        // the last pre-hold sample.
        record(t);
        t = t_hold;
        held = true;
        continue;
      }
      h = std::min(h, std::max(cfg.pt_shrink * remain, pt_floor));
    }
    if (is_pt && t >= t_hold) {
      // Gain is identically zero here: hold bitwise, no integration work.
      if (held) {
        record(t);
        held = false;
      }
      double remaining = cfg.t_end - t;
      long hold_steps = static_cast<long>(std::ceil(remaining / cfg.dt - 1e-9));
      for (long s = 0; s < hold_steps; ++s) {
        t = std::min(t + cfg.dt, cfg.t_end);
        ++step_count;
        if (step_count % cfg.sample_every == 0 || t >= cfg.t_end - t_eps) record(t);
      }
      break;
    }
    if (next_event < events.size())
      h = std::min(h, std::max(events[next_event].t - t, cfg.dt * 1e-6));
    h = std::min(h, cfg.t_end - t);

    stepper.step(t, h, x);
    t += h;
    ++step_count;
    if (step_count % cfg.sample_every == 0 || t >= cfg.t_end - t_eps) record(t);
  }
  return traj;
}

SettlingReport settling_bound_check(const Trajectory& traj, const StationaryProfile& profile,
                                    const TbgParams& tbg, double tol) {
  SettlingReport rep;
  const double per_window = tbg.delta / (1.0 + tbg.delta) * traj.e_max0;
  const int diam = profile.effective_diameter;
  rep.network_bound = (diam - 1) * per_window;
  rep.network_time = (diam - 1) * tbg.T_s;
  rep.first_within_bound.assign(traj.n, -1.0);
  rep.min_error_seen = 0.0;

  for (std::size_t s = 0; s < traj.samples(); ++s) {
    const double t = traj.times[s];
    const auto& e = traj.errors[s];
    for (int i = 0; i < traj.n; ++i) {
      rep.min_error_seen = std::min(rep.min_error_seen, e[i]);
      const bool within = std::abs(e[i]) <= rep.network_bound + tol;
      if (within) {
        if (rep.first_within_bound[i] < 0.0) rep.first_within_bound[i] = t;
      } else {
        rep.first_within_bound[i] = -1.0;
      }
      if (t >= rep.network_time && !within)
        rep.network_violations.push_back({static_cast<int>(s), i, e[i], rep.network_bound});
      const int layer = profile.depth[i];
      if (layer >= 1 && t >= layer * tbg.T_s && e[i] > layer * per_window + tol)
        rep.layer_violations.push_back({static_cast<int>(s), i, e[i], layer * per_window});
    }
  }
  rep.pass = rep.network_violations.empty() && rep.layer_violations.empty();
  return rep;
}

MonotonicityReport monotonicity_check(const Trajectory& traj, double step_slack, int from_sample) {
  MonotonicityReport rep;
  rep.pass = true;
  for (std::size_t s = std::max(from_sample, 0); s + 1 < traj.samples(); ++s) {
    const double dt_s = traj.times[s + 1] - traj.times[s];
    const double allowance = step_slack * dt_s;
    const double dvp = traj.v_plus[s + 1] - traj.v_plus[s] -
                       (1e-9 * (1.0 + traj.v_plus[s]) + allowance);
    if (dvp > 0.0 && !rep.first_vplus_violation) {
      rep.first_vplus_violation = {static_cast<int>(s + 1), dvp};
      rep.pass = false;
    }
    const double dvm = traj.v_minus[s + 1] - traj.v_minus[s] -
                       (1e-9 * (1.0 + traj.v_minus[s]) + allowance);
    if (dvm > 0.0 && !rep.first_vminus_violation) {
      rep.first_vminus_violation = {static_cast<int>(s + 1), dvm};
      rep.pass = false;
    }
  }
  return rep;
}

DecayFit decay_fit(const Trajectory& traj, std::optional<std::pair<double, double>> window) {
  const std::size_t n = traj.samples();
  if (n < 10) throw Error(Error::Code::WindowTooShort, "too few samples");

  std::vector<double> tail(traj.max_abs_err.end() - std::max<std::size_t>(n / 10, 1),
                           traj.max_abs_err.end());
  std::sort(tail.begin(), tail.end());
  const double floor = tail[tail.size() / 2];

  std::vector<double> ts, ys;
  for (std::size_t s = 0; s < n; ++s) {
    const double t = traj.times[s];
    if (window && (t < window->first || t > window->second)) continue;
    const double m = traj.max_abs_err[s];
    if (m > 2.0 * floor && m - floor > 0.0) {
      ts.push_back(t);
      ys.push_back(std::log(m - floor));
    }
  }
  if (ts.size() < 8) throw Error(Error::Code::WindowTooShort, "decay window too short");

  const double N = static_cast<double>(ts.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    st += ts[k];
    sy += ys[k];
    stt += ts[k] * ts[k];
    sty += ts[k] * ys[k];
    syy += ys[k] * ys[k];
  }
  const double denom = N * stt - st * st;
  const double slope = (N * sty - st * sy) / denom;
  const double intercept = (sy - slope * st) / N;
  double ss_res = 0.0;
  const double ymean = sy / N;
  double ss_tot = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double pred = intercept + slope * ts[k];
    ss_res += (ys[k] - pred) * (ys[k] - pred);
    ss_tot += (ys[k] - ymean) * (ys[k] - ymean);
  }
  DecayFit fit;
  fit.rate = -slope;
  fit.offset = intercept;
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.floor = floor;
  fit.samples_used = static_cast<int>(ts.size());
  return fit;
}

}  // namespace dbmc
