#pragma once

// Trajectory CSV, run-summary JSON and the static SVG error plot. All
// output is byte-deterministic for fixed input: doubles are printed with
// 17 significant digits and nothing time- or locale-dependent is emitted.

#include <string>
#include <vector>

#include "dbmc/simulator.hpp"

namespace dbmc {

// Header: t,node_1,...,node_n,vplus,vminus,maxabs_err; node columns carry
// the per-node errors e_i(t) so the file is self-contained for plotting.
std::string trajectory_to_csv(const Trajectory& traj);
void save_trajectory_csv(const Trajectory& traj, const std::string& path);

struct CsvTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> node_errors;  // per sample
  std::vector<double> v_plus, v_minus, max_abs;
};
CsvTrajectory load_trajectory_csv(const std::string& path);

// One log-scale polyline per node's |e_i(t)|, clamped below at 1e-12.
std::string trajectory_svg(const CsvTrajectory& traj);
void save_trajectory_svg(const CsvTrajectory& traj, const std::string& path);

std::string format_double(double v);  // 17 significant digits

}  // namespace dbmc
