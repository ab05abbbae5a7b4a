// Command-line driver: graph generation, protocol runs with verdicts,
// small-gain certification, SVG plots and seed sweeps.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dbmc/error.hpp"
#include "dbmc/experiment.hpp"
#include "dbmc/io.hpp"
#include "dbmc/small_gain.hpp"

namespace {

std::uint64_t env_seed_fallback() {
  if (const char* s = std::getenv("DBMC_SEED")) return std::strtoull(s, nullptr, 10);
  return 0;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw dbmc::Error(dbmc::Error::Code::BadInput, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void print_graph_report(const dbmc::Graph& g, const dbmc::StationaryProfile& p) {
  std::cout << "nodes: " << g.n << "\nedges: " << g.edges.size() << "\nsources:";
  for (int s : g.sources) std::cout << ' ' << s + 1;
  std::cout << "\neffective diameter: " << p.effective_diameter
            << "\nzeta: " << dbmc::format_double(p.zeta)
            << (p.zeta_unconstrained ? " (unconstrained)" : "") << "\nlayer sizes:";
  for (const auto& layer : p.layers) std::cout << ' ' << layer.size();
  std::cout << '\n';
}

struct RunFlags {
  std::string config_file;
  std::string graph_file;
  bool use_line = false;
  bool use_geometric = false;
  bool full_scale = false;
  dbmc::ExperimentSpec spec;
  std::vector<double> band_vals;
  std::vector<std::string> event_args;
  int line_n = 50;
  std::string line_source = "rightmost";
  std::vector<double> geo_vals;  // n width height radius
};

dbmc::ExperimentSpec assemble_spec(const RunFlags& f, const CLI::App& cmd) {
  dbmc::ExperimentSpec spec;
  if (!f.config_file.empty()) spec = dbmc::spec_from_json(read_file(f.config_file));

  auto given = [&](const std::string& name) { return cmd.count(name) > 0; };

  if (given("--graph")) {
    spec.graph_file = f.graph_file;
    spec.geometric.reset();
    spec.line.reset();
  }
  if (f.use_line) {
    dbmc::LineSpec ls;
    ls.n = f.line_n;
    ls.source_end = f.line_source == "leftmost" ? dbmc::SourceEnd::Leftmost
                                                : dbmc::SourceEnd::Rightmost;
    spec.line = ls;
    spec.graph_file.reset();
    spec.geometric.reset();
  }
  if (f.use_geometric) {
    dbmc::GeometricSpec gs;
    if (f.geo_vals.size() == 4) {
      gs.n = static_cast<int>(f.geo_vals[0]);
      gs.width = f.geo_vals[1];
      gs.height = f.geo_vals[2];
      gs.radius = f.geo_vals[3];
    }
    if (f.full_scale) {
      gs.n = 500;
      gs.radius = 0.25;
    }
    spec.geometric = gs;
    spec.graph_file.reset();
    spec.line.reset();
  }
  if (given("--name")) spec.name = f.spec.name;
  if (given("--seed")) spec.seed = f.spec.seed;
  else if (!given("--config")) spec.seed = env_seed_fallback();
  if (given("--protocol")) spec.protocol = f.spec.protocol;
  if (given("--eta")) spec.eta = f.spec.eta;
  if (given("--Ts")) spec.tbg.T_s = f.spec.tbg.T_s;
  if (given("--delta")) spec.tbg.delta = f.spec.tbg.delta;
  if (given("--Tbar")) spec.rho.T_bar_s = f.spec.rho.T_bar_s;
  if (given("--h")) spec.rho.h = f.spec.rho.h;
  if (given("--gamma")) spec.rho.gamma = f.spec.rho.gamma;
  if (f.band_vals.size() == 2) spec.band = {f.band_vals[0], f.band_vals[1]};
  if (given("--init")) spec.init_kind = f.spec.init_kind;
  if (given("--init-lo")) spec.init_lo = f.spec.init_lo;
  if (given("--init-hi")) spec.init_hi = f.spec.init_hi;
  if (given("--t-end")) spec.t_end = f.spec.t_end;
  if (given("--dt")) spec.dt = f.spec.dt;
  if (given("--sample-every")) spec.sample_every = f.spec.sample_every;
  if (given("--out-dir")) spec.out_dir = f.spec.out_dir;
  if (!f.event_args.empty()) {
    // --event source-change <t> <node...>
    if (f.event_args.size() < 3 || f.event_args[0] != "source-change")
      throw dbmc::Error(dbmc::Error::Code::BadInput,
                        "expected: --event source-change <t> <node...>");
    dbmc::SourceChange sc;
    sc.t = std::stod(f.event_args[1]);
    for (std::size_t k = 2; k < f.event_args.size(); ++k)
      sc.new_sources.push_back(std::stoi(f.event_args[k]) - 1);
    spec.events.push_back(sc);
  }
  return spec;
}

int do_run(const dbmc::ExperimentSpec& spec) {
  auto res = dbmc::run_experiment(spec);
  std::cout << "graph: n = " << res.graph.n << ", D = " << res.profile.effective_diameter
            << ", zeta = " << dbmc::format_double(res.profile.zeta) << '\n';
  std::cout << "e_max0 = " << dbmc::format_double(res.trajectory.e_max0) << ", samples = "
            << res.trajectory.samples() << '\n';
  for (const auto& c : res.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name
              << (c.detail.empty() ? "" : "  [" + c.detail + "]") << '\n';
  std::cout << "csv: " << res.csv_path << "\nsummary: " << res.summary_path << '\n';
  return res.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biased min-consensus protocol toolbox"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate a graph file");
  std::vector<double> geo_vals;
  int gen_line_n = 0;
  std::string gen_source = "rightmost";
  std::uint64_t gen_seed = env_seed_fallback();
  std::string gen_out = "graph.json";
  std::vector<int> gen_sources{1};
  gen->add_option("--random-geometric", geo_vals,
                  "n width_km height_km radius_km (uniform placement)")
      ->expected(4);
  gen->add_option("--line", gen_line_n, "path graph with n nodes");
  gen->add_option("--source", gen_source, "line source end: leftmost|rightmost");
  gen->add_option("--sources", gen_sources, "source nodes (1-based, geometric)");
  gen->add_option("--seed", gen_seed, "placement seed");
  gen->add_option("--out", gen_out, "output path");

  // ---- run ----
  auto* run = app.add_subcommand("run", "integrate a protocol and check its guarantees");
  RunFlags rf;
  std::string proto_name = "nominal";
  run->add_option("--config", rf.config_file, "experiment spec JSON; flags override");
  run->add_option("--graph", rf.graph_file, "graph file");
  run->add_option("--line", rf.line_n, "line graph with n nodes")
      ->each([&](const std::string&) { rf.use_line = true; });
  run->add_option("--line-source", rf.line_source, "leftmost|rightmost");
  run->add_option("--random-geometric", rf.geo_vals, "n width height radius")
      ->expected(4)
      ->each([&](const std::string&) { rf.use_geometric = true; });
  run->add_flag("--full", rf.full_scale, "use the 500-node field preset");
  run->add_option("--name", rf.spec.name, "run name (output file stem)");
  run->add_option("--seed", rf.spec.seed, "run seed");
  run->add_option("--protocol", proto_name, "nominal|ppt|pt|perturbed|abs");
  run->add_option("--eta", rf.spec.eta, "constant feedback gain");
  run->add_option("--Ts", rf.spec.tbg.T_s, "TBG window length");
  run->add_option("--delta", rf.spec.tbg.delta, "TBG regularizer");
  run->add_option("--Tbar", rf.spec.rho.T_bar_s, "prescribed convergence time");
  run->add_option("--h", rf.spec.rho.h, "scaling exponent offset");
  run->add_option("--gamma", rf.spec.rho.gamma, "baseline gain");
  run->add_option("--band", rf.band_vals, "weight band lo hi")->expected(2);
  run->add_option("--init", rf.spec.init_kind, "overestimate|random-band|explicit");
  run->add_option("--init-lo", rf.spec.init_lo, "random band lower bound");
  run->add_option("--init-hi", rf.spec.init_hi, "random band upper / overestimate offset");
  run->add_option("--t-end", rf.spec.t_end, "simulation end time");
  run->add_option("--dt", rf.spec.dt, "base integration step");
  run->add_option("--sample-every", rf.spec.sample_every, "output decimation");
  run->add_option("--out-dir", rf.spec.out_dir, "output directory");
  run->add_option("--event", rf.event_args, "source-change <t> <node...>")
      ->expected(-3);

  // ---- check-smallgain ----
  auto* chk = app.add_subcommand("check-smallgain", "certify the cycle-contraction condition");
  std::string chk_graph;
  double chk_eta = 1.2;
  chk->add_option("--graph", chk_graph, "graph file")->required();
  chk->add_option("--eta", chk_eta, "feedback gain");

  // ---- plot ----
  auto* plot = app.add_subcommand("plot", "render a trajectory CSV as SVG");
  std::string plot_csv, plot_out;
  plot->add_option("--csv", plot_csv, "trajectory CSV")->required();
  plot->add_option("--out", plot_out, "output SVG path");

  // ---- sweep ----
  auto* sweep = app.add_subcommand("sweep", "run one spec across many seeds");
  std::string sweep_config;
  std::uint64_t sweep_start = 1;
  int sweep_count = 8;
  sweep->add_option("--config", sweep_config, "experiment spec JSON")->required();
  sweep->add_option("--seed-start", sweep_start, "first seed");
  sweep->add_option("--count", sweep_count, "number of runs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      dbmc::Graph g;
      if (!geo_vals.empty()) {
        std::vector<int> sources;
        for (int s : gen_sources) sources.push_back(s - 1);
        g = dbmc::gen_random_geometric(static_cast<int>(geo_vals[0]), geo_vals[1], geo_vals[2],
                                       geo_vals[3], sources, gen_seed);
      } else if (gen_line_n > 0) {
        g = dbmc::gen_line(gen_line_n, gen_source == "leftmost" ? dbmc::SourceEnd::Leftmost
                                                                : dbmc::SourceEnd::Rightmost);
      } else {
        std::cerr << "gen: need --random-geometric or --line\n";
        return 2;
      }
      dbmc::save_graph(g, gen_out);
      print_graph_report(g, dbmc::stationary_profile(g));
      std::cout << "wrote " << gen_out << '\n';
      return 0;
    }

    if (run->parsed()) {
      if (run->count("--protocol")) rf.spec.protocol = dbmc::protocol_from_name(proto_name);
      return do_run(assemble_spec(rf, *run));
    }

    if (chk->parsed()) {
      auto g = dbmc::load_graph(chk_graph);
      auto profile = dbmc::stationary_profile(g);
      print_graph_report(g, profile);
      auto cert = dbmc::sufficient_condition(chk_eta, profile.zeta, profile.effective_diameter);
      if (cert.verdict != dbmc::Verdict::CertifiedContractive) {
        std::cout << "verdict: sufficient condition failed (" << cert.reason << ")\n";
        return 1;
      }
      std::cout << "verdict: certified contractive, d = " << dbmc::format_double(cert.d) << '\n';
      if (g.n <= 8) {
        auto m = dbmc::gain_matrix(g, profile, chk_eta);
        auto bf = dbmc::cycle_contraction_bruteforce(m, cert.d);
        if (bf.verdict == dbmc::Verdict::BruteForceRefuted) {
          std::cout << "brute force: REFUTED, cycle product "
                    << dbmc::format_double(bf.cycle_product) << '\n';
          return 1;
        }
        std::cout << "brute force: all " << g.n << "-node cycle products below 1\n";
      }
      return 0;
    }

    if (plot->parsed()) {
      auto traj = dbmc::load_trajectory_csv(plot_csv);
      if (plot_out.empty())
        plot_out = std::filesystem::path(plot_csv).replace_extension(".svg").string();
      dbmc::save_trajectory_svg(traj, plot_out);
      std::cout << "wrote " << plot_out << '\n';
      return 0;
    }

    if (sweep->parsed()) {
      auto base = dbmc::spec_from_json(read_file(sweep_config));
      std::vector<int> failures;
      std::vector<std::string> names(sweep_count);
#pragma omp parallel for schedule(dynamic)
      for (int k = 0; k < sweep_count; ++k) {
        dbmc::ExperimentSpec spec = base;
        spec.seed = sweep_start + static_cast<std::uint64_t>(k);
        spec.name = base.name + "_seed" + std::to_string(spec.seed);
        names[k] = spec.name;
        auto res = dbmc::run_experiment(spec);
        if (!res.all_pass) {
#pragma omp critical
          failures.push_back(k);
        }
      }
      nlohmann::json j;
      j["runs"] = names;
      j["failures"] = failures;
      const std::string agg =
          (std::filesystem::path(base.out_dir) / (base.name + ".sweep.json")).string();
      std::ofstream f(agg, std::ios::binary);
      f << j.dump(2) << '\n';
      std::cout << "sweep: " << sweep_count - failures.size() << "/" << sweep_count
                << " runs passed; aggregate " << agg << '\n';
      return failures.empty() ? 0 : 1;
    }
  } catch (const dbmc::Error& e) {
    std::cerr << "error [" << dbmc::Error::name(e.code()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
