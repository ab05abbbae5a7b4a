#pragma once

// Experiment descriptions and the run driver behind the CLI: builds or loads
// the graph, integrates, runs the checks enabled for the protocol, and
// emits the CSV + summary pair. Fully deterministic given (spec, seed).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dbmc/simulator.hpp"

namespace dbmc {

// Desk-scale default; the full 500-node field uses the 0.25 km radius the
// density there supports.
struct GeometricSpec {
  int n = 100;
  double width = 4.0;
  double height = 1.0;
  double radius = 0.30;
  std::vector<int> sources = {0};
};
struct LineSpec {
  int n = 50;
  SourceEnd source_end = SourceEnd::Rightmost;
};

struct ExperimentSpec {
  std::string name = "run";
  std::uint64_t seed = 0;
  // exactly one of: file path, geometric generator, line generator
  std::optional<std::string> graph_file;
  std::optional<GeometricSpec> geometric;
  std::optional<LineSpec> line;

  Protocol protocol = Protocol::Nominal;
  double eta = 1.2;
  TbgParams tbg;
  RhoParams rho;
  std::optional<std::pair<double, double>> band;  // perturbed/abs weight band

  std::string init_kind = "overestimate";  // overestimate | random-band | explicit
  double init_lo = 0.0;
  double init_hi = 10.0;
  std::vector<double> init_state;  // explicit

  double t_end = 0.0;   // 0 = protocol-dependent default
  double dt = 1e-3;
  int sample_every = 10;
  std::vector<SourceChange> events;

  std::string out_dir = ".";
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunResult {
  Graph graph;
  StationaryProfile profile;
  Trajectory trajectory;
  std::vector<CheckResult> checks;
  std::optional<DecayFit> fit;
  double ultimate_error = 0.0;  // median of max|e| over the final 20% of samples
  std::string csv_path;
  std::string summary_path;
  bool all_pass = true;
};

ExperimentSpec spec_from_json(const std::string& text);
std::string spec_to_json(const ExperimentSpec& spec);

Graph realize_graph(const ExperimentSpec& spec);
SimConfig sim_config(const ExperimentSpec& spec, const Graph& g);

// Integrates and runs the protocol's checks; writes <name>.csv and
// <name>.summary.json under out_dir when `write_files`.
RunResult run_experiment(const ExperimentSpec& spec, bool write_files = true);

std::string summary_json(const ExperimentSpec& spec, const RunResult& result);

Protocol protocol_from_name(const std::string& name);
std::string protocol_name(Protocol p);

// Median of max|e| over the final `fraction` of samples in [from, to).
double ultimate_error_of(const Trajectory& traj, double fraction = 0.2,
                         std::optional<std::pair<double, double>> window = std::nullopt);

}  // namespace dbmc
