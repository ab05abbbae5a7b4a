#include "dbmc/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dbmc/error.hpp"

namespace dbmc {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trajectory_to_csv(const Trajectory& traj) {
  std::string out = "t";
  for (int i = 1; i <= traj.n; ++i) out += ",node_" + std::to_string(i);
  out += ",vplus,vminus,maxabs_err\n";
  for (std::size_t s = 0; s < traj.samples(); ++s) {
    out += format_double(traj.times[s]);
    for (int i = 0; i < traj.n; ++i) {
      out += ',';
      out += format_double(traj.errors[s][i]);
    }
    out += ',';
    out += format_double(traj.v_plus[s]);
    out += ',';
    out += format_double(traj.v_minus[s]);
    out += ',';
    out += format_double(traj.max_abs_err[s]);
    out += '\n';
  }
  return out;
}

void save_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Error::Code::BadInput, "cannot open " + path + " for writing");
  f << trajectory_to_csv(traj);
}

CsvTrajectory load_trajectory_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Error::Code::BadInput, "cannot open " + path);
  CsvTrajectory out;
  std::string line;
  if (!std::getline(f, line) || line.rfind("t,node_1", 0) != 0)
    throw Error(Error::Code::BadInput, "not a trajectory CSV: " + path);
  const auto columns = [&](const std::string& l) {
    std::vector<double> vals;
    const char* p = l.data();
    const char* end = l.data() + l.size();
    while (p < end) {
      double v;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc{}) throw Error(Error::Code::BadInput, "malformed CSV row");
      vals.push_back(v);
      p = next < end && *next == ',' ? next + 1 : next;
    }
    return vals;
  };
  std::size_t expected = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto vals = columns(line);
    if (expected == 0) {
      if (vals.size() < 5) throw Error(Error::Code::BadInput, "trajectory CSV too narrow");
      expected = vals.size();
    } else if (vals.size() != expected) {
      throw Error(Error::Code::BadInput, "ragged CSV row");
    }
    out.times.push_back(vals[0]);
    out.node_errors.emplace_back(vals.begin() + 1, vals.end() - 3);
    out.v_plus.push_back(vals[vals.size() - 3]);
    out.v_minus.push_back(vals[vals.size() - 2]);
    out.max_abs.push_back(vals[vals.size() - 1]);
  }
  if (out.times.empty()) throw Error(Error::Code::BadInput, "empty trajectory CSV");
  return out;
}

std::string trajectory_svg(const CsvTrajectory& traj) {
  constexpr double W = 960.0, H = 600.0;
  constexpr double ml = 70.0, mr = 20.0, mt = 20.0, mb = 45.0;
  constexpr double floor_clamp = 1e-12;

  const double t0 = traj.times.front();
  const double t1 = traj.times.back();
  const double tspan = t1 > t0 ? t1 - t0 : 1.0;
  const int n = static_cast<int>(traj.node_errors.front().size());

  double lo = 0.0, hi = -300.0;  // log10 range
  for (const auto& row : traj.node_errors)
    for (double e : row) {
      const double v = std::log10(std::max(std::abs(e), floor_clamp));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  lo = std::floor(lo) - 0.5;
  hi = std::ceil(hi) + 0.5;

  auto xpix = [&](double t) { return ml + (t - t0) / tspan * (W - ml - mr); };
  auto ypix = [&](double v) { return mt + (hi - v) / (hi - lo) * (H - mt - mb); };
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
      << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
      << H - mb << "\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(std::ceil(lo)); d <= static_cast<int>(std::floor(hi)); d += 2) {
    const double y = ypix(d);
    svg << "<line x1=\"" << ml - 4 << "\" y1=\"" << fmt(y) << "\" x2=\"" << ml << "\" y2=\""
        << fmt(y) << "\" stroke=\"black\"/>"
        << "<text x=\"6\" y=\"" << fmt(y + 4) << "\" font-size=\"12\">1e" << d << "</text>\n";
  }
  for (int k = 0; k <= 6; ++k) {
    const double t = t0 + tspan * k / 6.0;
    const double xx = xpix(t);
    svg << "<line x1=\"" << fmt(xx) << "\" y1=\"" << H - mb << "\" x2=\"" << fmt(xx)
        << "\" y2=\"" << H - mb + 4 << "\" stroke=\"black\"/>"
        << "<text x=\"" << fmt(xx - 10) << "\" y=\"" << H - mb + 20 << "\" font-size=\"12\">"
        << fmt(t) << "</text>\n";
  }
  svg << "<text x=\"" << W / 2 - 30 << "\" y=\"" << H - 8 << "\" font-size=\"13\">t (s)</text>\n"
      << "<text x=\"6\" y=\"14\" font-size=\"13\">|error|</text>\n";

  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  for (int i = 0; i < n; ++i) {
    svg << "<polyline fill=\"none\" stroke=\"" << palette[i % 10]
        << "\" stroke-width=\"0.8\" points=\"";
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
      const double v = std::log10(std::max(std::abs(traj.node_errors[s][i]), floor_clamp));
      svg << fmt(xpix(traj.times[s])) << ',' << fmt(ypix(v));
      if (s + 1 < traj.times.size()) svg << ' ';
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void save_trajectory_svg(const CsvTrajectory& traj, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Error::Code::BadInput, "cannot open " + path + " for writing");
  f << trajectory_svg(traj);
}

}  // namespace dbmc
