#include "dbmc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "dbmc/error.hpp"
#include "dbmc/io.hpp"

namespace dbmc {

Protocol protocol_from_name(const std::string& name) {
  if (name == "nominal") return Protocol::Nominal;
  if (name == "ppt") return Protocol::Ppt;
  if (name == "pt") return Protocol::Pt;
  if (name == "perturbed") return Protocol::Perturbed;
  if (name == "abs") return Protocol::Abs;
  throw Error(Error::Code::BadInput, "unknown protocol: " + name);
}

std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::Nominal: return "nominal";
    case Protocol::Ppt: return "ppt";
    case Protocol::Pt: return "pt";
    case Protocol::Perturbed: return "perturbed";
    case Protocol::Abs: return "abs";
  }
  return "nominal";
}

ExperimentSpec spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Error::Code::BadInput, std::string("spec parse: ") + e.what());
  }
  ExperimentSpec s;
  s.name = j.value("name", s.name);
  s.seed = j.value("seed", s.seed);
  if (j.contains("graph_file")) s.graph_file = j["graph_file"].get<std::string>();
  if (j.contains("geometric")) {
    const auto& g = j["geometric"];
    GeometricSpec gs;
    gs.n = g.value("n", gs.n);
    gs.width = g.value("width", gs.width);
    gs.height = g.value("height", gs.height);
    gs.radius = g.value("radius", gs.radius);
    if (g.contains("sources")) {
      gs.sources.clear();
      for (const auto& v : g["sources"]) gs.sources.push_back(v.get<int>() - 1);
    }
    s.geometric = gs;
  }
  if (j.contains("line")) {
    const auto& l = j["line"];
    LineSpec ls;
    ls.n = l.value("n", ls.n);
    ls.source_end = l.value("source", std::string("rightmost")) == "leftmost"
                        ? SourceEnd::Leftmost
                        : SourceEnd::Rightmost;
    s.line = ls;
  }
  s.protocol = protocol_from_name(j.value("protocol", std::string("nominal")));
  s.eta = j.value("eta", s.eta);
  s.tbg.T_s = j.value("Ts", s.tbg.T_s);
  s.tbg.delta = j.value("delta", s.tbg.delta);
  s.rho.T_bar_s = j.value("Tbar", s.rho.T_bar_s);
  s.rho.h = j.value("h", s.rho.h);
  s.rho.gamma = j.value("gamma", s.rho.gamma);
  if (j.contains("band")) s.band = {j["band"].at(0).get<double>(), j["band"].at(1).get<double>()};
  s.init_kind = j.value("init", s.init_kind);
  s.init_lo = j.value("init_lo", s.init_lo);
  s.init_hi = j.value("init_hi", s.init_hi);
  if (j.contains("init_state")) s.init_state = j["init_state"].get<std::vector<double>>();
  s.t_end = j.value("t_end", s.t_end);
  s.dt = j.value("dt", s.dt);
  s.sample_every = j.value("sample_every", s.sample_every);
  if (j.contains("events"))
    for (const auto& ev : j["events"]) {
      SourceChange sc;
      sc.t = ev.at("t").get<double>();
      for (const auto& v : ev.at("new_sources")) sc.new_sources.push_back(v.get<int>() - 1);
      s.events.push_back(sc);
    }
  s.out_dir = j.value("out_dir", s.out_dir);
  return s;
}

std::string spec_to_json(const ExperimentSpec& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["seed"] = s.seed;
  if (s.graph_file) j["graph_file"] = *s.graph_file;
  if (s.geometric) {
    auto& g = j["geometric"];
    g["n"] = s.geometric->n;
    g["width"] = s.geometric->width;
    g["height"] = s.geometric->height;
    g["radius"] = s.geometric->radius;
    auto& src = g["sources"] = nlohmann::json::array();
    for (int v : s.geometric->sources) src.push_back(v + 1);
  }
  if (s.line) {
    auto& l = j["line"];
    l["n"] = s.line->n;
    l["source"] = s.line->source_end == SourceEnd::Leftmost ? "leftmost" : "rightmost";
  }
  j["protocol"] = protocol_name(s.protocol);
  j["eta"] = s.eta;
  j["Ts"] = s.tbg.T_s;
  j["delta"] = s.tbg.delta;
  j["Tbar"] = s.rho.T_bar_s;
  j["h"] = s.rho.h;
  j["gamma"] = s.rho.gamma;
  if (s.band) j["band"] = {s.band->first, s.band->second};
  j["init"] = s.init_kind;
  j["init_lo"] = s.init_lo;
  j["init_hi"] = s.init_hi;
  if (!s.init_state.empty()) j["init_state"] = s.init_state;
  j["t_end"] = s.t_end;
  j["dt"] = s.dt;
  j["sample_every"] = s.sample_every;
  if (!s.events.empty()) {
    auto& evs = j["events"] = nlohmann::json::array();
    for (const auto& ev : s.events) {
      nlohmann::json e;
      e["t"] = ev.t;
      auto& ns = e["new_sources"] = nlohmann::json::array();
      for (int v : ev.new_sources) ns.push_back(v + 1);
      evs.push_back(e);
    }
  }
  j["out_dir"] = s.out_dir;
  return j.dump(2) + "\n";
}

Graph realize_graph(const ExperimentSpec& spec) {
  const int provided = (spec.graph_file ? 1 : 0) + (spec.geometric ? 1 : 0) + (spec.line ? 1 : 0);
  if (provided != 1)
    throw Error(Error::Code::BadInput, "exactly one graph source must be given");
  if (spec.graph_file) return load_graph(*spec.graph_file);
  if (spec.geometric) {
    const auto& g = *spec.geometric;
    return gen_random_geometric(g.n, g.width, g.height, g.radius, g.sources, spec.seed);
  }
  return gen_line(spec.line->n, spec.line->source_end);
}

namespace {

double default_t_end(const ExperimentSpec& spec, const StationaryProfile& profile) {
  switch (spec.protocol) {
    case Protocol::Ppt:
      return (profile.effective_diameter + 1) * spec.tbg.T_s;
    case Protocol::Pt:
      return spec.rho.T_bar_s + 1.0;
    default:
      return 60.0;
  }
}

}  // namespace

SimConfig sim_config(const ExperimentSpec& spec, const Graph& g) {
  SimConfig cfg;
  cfg.protocol = spec.protocol;
  cfg.eta = spec.eta;
  cfg.tbg = spec.tbg;
  cfg.rho = spec.rho;
  if (spec.band) {
    if (spec.protocol != Protocol::Perturbed && spec.protocol != Protocol::Abs)
      throw Error(Error::Code::BadInput, "weight band requires the perturbed or abs protocol");
    cfg.weights = WeightModel(MultiplicativeBand{spec.band->first, spec.band->second, spec.seed});
  }
  cfg.dt = spec.dt;
  cfg.sample_every = spec.sample_every;
  cfg.events = spec.events;
  if (spec.init_kind == "overestimate") {
    cfg.init = OverestimateInit{spec.init_hi, spec.seed};
  } else if (spec.init_kind == "random-band") {
    cfg.init = RandomBandInit{spec.init_lo, spec.init_hi, spec.seed};
  } else if (spec.init_kind == "explicit") {
    std::vector<double> x = spec.init_state;
    if (static_cast<int>(x.size()) != g.n)
      throw Error(Error::Code::BadInput, "explicit init length mismatch");
    cfg.init = ExplicitInit{std::move(x)};
  } else {
    throw Error(Error::Code::BadInput, "unknown init policy: " + spec.init_kind);
  }
  return cfg;
}

double ultimate_error_of(const Trajectory& traj, double fraction,
                         std::optional<std::pair<double, double>> window) {
  std::vector<double> vals;
  for (std::size_t s = 0; s < traj.samples(); ++s) {
    if (window && (traj.times[s] < window->first || traj.times[s] > window->second)) continue;
    vals.push_back(traj.max_abs_err[s]);
  }
  if (vals.empty()) throw Error(Error::Code::WindowTooShort, "no samples in window");
  const std::size_t keep = std::max<std::size_t>(1, static_cast<std::size_t>(vals.size() * fraction));
  std::vector<double> tail(vals.end() - keep, vals.end());
  std::sort(tail.begin(), tail.end());
  return tail[tail.size() / 2];
}

RunResult run_experiment(const ExperimentSpec& spec_in, bool write_files) {
  ExperimentSpec spec = spec_in;
  RunResult res;
  res.graph = realize_graph(spec);
  res.profile = stationary_profile(res.graph);
  if (spec.t_end <= 0.0) spec.t_end = default_t_end(spec, res.profile);

  SimConfig cfg = sim_config(spec, res.graph);
  cfg.t_end = spec.t_end;
  res.trajectory = integrate(cfg, res.graph, res.profile);
  const Trajectory& traj = res.trajectory;

  const bool overestimate_init = spec.init_kind == "overestimate";
  const bool has_events = !spec.events.empty();

  switch (spec.protocol) {
    case Protocol::Ppt: {
      if (overestimate_init) {
        auto rep = settling_bound_check(traj, res.profile, spec.tbg);
        res.checks.push_back({"ppt_network_bound", rep.network_violations.empty(),
                              "bound " + format_double(rep.network_bound) + " from t = " +
                                  format_double(rep.network_time)});
        res.checks.push_back({"ppt_layer_bound", rep.layer_violations.empty(),
                              std::to_string(rep.layer_violations.size()) + " violations"});
        res.checks.push_back({"overestimates_preserved", rep.min_error_seen >= -1e-6,
                              "min error " + format_double(rep.min_error_seen)});
      }
      auto mono = monotonicity_check(traj);
      res.checks.push_back({"envelopes_nonincreasing", mono.pass, ""});
      break;
    }
    case Protocol::Pt: {
      // Last sample strictly before the prescribed time.
      std::size_t last_pre = 0;
      for (std::size_t s = 0; s < traj.samples(); ++s)
        if (traj.times[s] < spec.rho.T_bar_s) last_pre = s;
      const double terminal = traj.max_abs_err[last_pre];
      const double tol = 1e-3 * std::max(traj.e_max0, 0.0);
      res.checks.push_back({"pt_terminal_error", terminal <= tol,
                            "max |e| = " + format_double(terminal) + " at t = " +
                                format_double(traj.times[last_pre])});
      bool frozen = true;
      std::optional<std::size_t> first_hold;
      for (std::size_t s = 0; s < traj.samples(); ++s)
        if (traj.times[s] >= spec.rho.T_bar_s) {
          if (!first_hold) first_hold = s;
          frozen = frozen && traj.states[s] == traj.states[*first_hold];
        }
      res.checks.push_back({"pt_states_frozen", frozen, ""});
      auto mono = monotonicity_check(traj);
      res.checks.push_back({"envelopes_nonincreasing", mono.pass, ""});
      break;
    }
    case Protocol::Nominal: {
      auto mono = monotonicity_check(traj);
      res.checks.push_back({"envelopes_nonincreasing", mono.pass, ""});
      try {
        res.fit = decay_fit(traj);
        res.checks.push_back({"exponential_decay",
                              res.fit->rate > 0.0 && res.fit->r_squared >= 0.99,
                              "p = " + format_double(res.fit->rate) +
                                  ", r2 = " + format_double(res.fit->r_squared)});
      } catch (const Error& e) {
        if (e.code() != Error::Code::WindowTooShort) throw;
        res.checks.push_back({"exponential_decay", true, "nothing decays (already settled)"});
      }
      break;
    }
    case Protocol::Perturbed:
    case Protocol::Abs: {
      res.ultimate_error = ultimate_error_of(traj);
      if (!has_events) {
        res.checks.push_back({"ultimate_error_finite",
                              std::isfinite(res.ultimate_error) &&
                                  (cfg.weights.is_nominal() || res.ultimate_error > 0.0),
                              "ultimate max |e| = " + format_double(res.ultimate_error)});
      } else {
        // Re-convergence after the last source change: V+ spikes at the
        // event, then must not increase beyond the perturbation allowance,
        // and the final error must return near the pre-event ultimate level.
        const auto& ev = traj.events_applied.back();
        const double pre_ult = ultimate_error_of(traj, 0.2, {{0.0, ev.t}});
        auto mono = monotonicity_check(
            traj, cfg.weights.is_nominal() ? 0.0 : spec.eta * cfg.weights.input_sup(res.graph),
            ev.sample_index);
        res.checks.push_back({"post_event_envelope", mono.pass, ""});
        const double final_err = traj.max_abs_err.back();
        res.checks.push_back({"post_event_reconvergence", final_err <= 1.5 * pre_ult,
                              "final " + format_double(final_err) + " vs pre-event ultimate " +
                                  format_double(pre_ult)});
      }
      break;
    }
  }

  res.all_pass = std::all_of(res.checks.begin(), res.checks.end(),
                             [](const CheckResult& c) { return c.pass; });

  if (write_files) {
    std::filesystem::create_directories(spec.out_dir);
    res.csv_path = (std::filesystem::path(spec.out_dir) / (spec.name + ".csv")).string();
    res.summary_path =
        (std::filesystem::path(spec.out_dir) / (spec.name + ".summary.json")).string();
    save_trajectory_csv(traj, res.csv_path);
    std::ofstream f(res.summary_path, std::ios::binary);
    if (!f) throw Error(Error::Code::BadInput, "cannot write " + res.summary_path);
    f << summary_json(spec, res);
  }
  return res;
}

std::string summary_json(const ExperimentSpec& spec, const RunResult& res) {
  nlohmann::json j;
  j["name"] = spec.name;
  j["seed"] = spec.seed;
  j["protocol"] = protocol_name(spec.protocol);
  j["n"] = res.graph.n;
  j["edge_count"] = res.graph.edges.size();
  j["effective_diameter"] = res.profile.effective_diameter;
  j["zeta"] = res.profile.zeta;
  j["zeta_unconstrained"] = res.profile.zeta_unconstrained;
  j["e_max0"] = res.trajectory.e_max0;
  j["samples"] = res.trajectory.samples();
  j["t_end"] = spec.t_end;
  std::vector<std::size_t> layer_sizes;
  for (const auto& l : res.profile.layers) layer_sizes.push_back(l.size());
  j["layer_sizes"] = layer_sizes;
  if (res.fit) {
    j["decay_fit"] = {{"rate", res.fit->rate},
                      {"offset", res.fit->offset},
                      {"r_squared", res.fit->r_squared},
                      {"floor", res.fit->floor},
                      {"samples_used", res.fit->samples_used}};
  }
  if (spec.protocol == Protocol::Perturbed || spec.protocol == Protocol::Abs)
    j["ultimate_error"] = res.ultimate_error;
  auto& checks = j["checks"] = nlohmann::json::array();
  auto& failures = j["failures"] = nlohmann::json::array();
  for (const auto& c : res.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    if (!c.pass) failures.push_back(c.name);
  }
  if (!res.trajectory.events_applied.empty()) {
    auto& evs = j["events_applied"] = nlohmann::json::array();
    for (const auto& ev : res.trajectory.events_applied) {
      nlohmann::json e;
      e["t"] = ev.t;
      auto& ns = e["new_sources"] = nlohmann::json::array();
      for (int v : ev.new_sources) ns.push_back(v + 1);
      evs.push_back(e);
    }
  }
  j["all_pass"] = res.all_pass;
  return j.dump(2) + "\n";
}

}  // namespace dbmc
