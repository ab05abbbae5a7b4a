#include "dbmc/weights.hpp"

#include <cmath>
#include <random>

#include "dbmc/error.hpp"

namespace dbmc {

void WeightModel::bind(const Graph& g) {
  if (const auto* band = std::get_if<MultiplicativeBand>(&kind_)) {
    if (!(band->lo > 0.0) || !(band->hi >= band->lo))
      throw Error(Error::Code::BadInput, "band must satisfy 0 < lo <= hi");
    const std::size_t slots = g.adj_nbr.size();
    omega_.resize(slots);
    phi_.resize(slots);
    std::mt19937_64 rng(band->seed);
    std::uniform_real_distribution<double> uo(0.5, 2.0);
    std::uniform_real_distribution<double> up(0.0, 2.0 * 3.14159265358979323846);
    for (std::size_t k = 0; k < slots; ++k) {
      omega_[k] = uo(rng);
      phi_[k] = up(rng);
    }
  }
}

double WeightModel::at(const Graph& g, int i, int slot, double t) const {
  if (std::holds_alternative<NominalWeights>(kind_)) return g.adj_w[slot];
  if (const auto* band = std::get_if<MultiplicativeBand>(&kind_)) {
    const double c = 0.5 * (band->lo + band->hi);
    const double a = 0.5 * (band->hi - band->lo);
    return g.adj_w[slot] * (c + a * std::sin(omega_[slot] * t + phi_[slot]));
  }
  return std::get<CustomWeights>(kind_).fn(i, g.adj_nbr[slot], t);
}

double WeightModel::input_sup(const Graph& g) const {
  if (std::holds_alternative<NominalWeights>(kind_)) return 0.0;
  if (const auto* band = std::get_if<MultiplicativeBand>(&kind_)) {
    double wmax = 0.0;
    for (double w : g.adj_w) wmax = std::max(wmax, w);
    const double c = 0.5 * (band->lo + band->hi);
    const double a = 0.5 * (band->hi - band->lo);
    return wmax * (std::abs(c - 1.0) + a);
  }
  throw Error(Error::Code::BadInput, "input_sup unavailable for custom weight tables");
}

}  // namespace dbmc
