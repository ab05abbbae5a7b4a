#include "dbmc/gains.hpp"

#include <cmath>

#include "dbmc/error.hpp"

namespace dbmc {

void validate(const TbgParams& p) {
  if (!(p.T_s > 0.0))
    throw Error(Error::Code::DomainViolation, "TBG window length must be positive");
  if (!(p.delta > 0.0 && p.delta < 1.0))
    throw Error(Error::Code::DomainViolation, "TBG delta must lie in (0, 1)");
}

void validate(const RhoParams& p) {
  if (!(p.T_bar_s > 0.0))
    throw Error(Error::Code::DomainViolation, "prescribed time must be positive");
  if (p.h < 2)
    throw Error(Error::Code::DomainViolation, "scaling exponent offset must be >= 2");
  if (!(p.gamma > 0.0))
    throw Error(Error::Code::DomainViolation, "baseline gain must be positive");
}

double tbg_epsilon(double t, double T_s) {
  if (t < 0.0) throw Error(Error::Code::DomainViolation, "tbg_epsilon: negative time");
  if (t > T_s) return 1.0;
  const double u = t / T_s;
  const double u3 = u * u * u;
  const double u4 = u3 * u;
  // 10 u^6 - 24 u^5 + 15 u^4; equals 1 at u = 1 since 10 - 24 + 15 = 1.
  return (10.0 * u * u - 24.0 * u + 15.0) * u4;
}

double tbg_epsilon_dot(double t, double T_s) {
  if (t < 0.0) throw Error(Error::Code::DomainViolation, "tbg_epsilon_dot: negative time");
  if (t > T_s) return 0.0;
  const double u = t / T_s;
  const double u3 = u * u * u;
  // (60 u^5 - 120 u^4 + 60 u^3)/T_s = 60 u^3 (u - 1)^2 / T_s >= 0.
  return 60.0 * u3 * (u - 1.0) * (u - 1.0) / T_s;
}

double tbg_gain(double t, const TbgParams& p) {
  if (t < 0.0) throw Error(Error::Code::DomainViolation, "tbg_gain: negative time");
  double tp = std::fmod(t, p.T_s);
  return tbg_epsilon_dot(tp, p.T_s) / (1.0 - tbg_epsilon(tp, p.T_s) + p.delta);
}

double tbg_gain_bound(const TbgParams& p, int samples_per_window) {
  double bound = 0.0;
  for (int k = 0; k <= samples_per_window; ++k) {
    const double t = p.T_s * static_cast<double>(k) / samples_per_window;
    bound = std::max(bound, tbg_gain(std::min(t, std::nexttoward(p.T_s, 0.0)), p));
  }
  return bound;
}

double rho(double t, const RhoParams& p) {
  if (t < 0.0 || t >= p.T_bar_s)
    throw Error(Error::Code::DomainViolation, "rho: time outside [0, T_bar_s)");
  return std::pow(p.T_bar_s / (p.T_bar_s - t), p.h + 1);
}

double pt_gain(double t, const RhoParams& p) {
  if (t < 0.0) throw Error(Error::Code::DomainViolation, "pt_gain: negative time");
  if (t >= p.T_bar_s) return 0.0;
  return p.gamma + 2.0 * (1.0 + p.h) / (p.T_bar_s - t);
}

double tbg_window_decay(double y0, const TbgParams& p) {
  return p.delta / (1.0 + p.delta) * y0;
}

double tbg_window_value(double y0, double t, const TbgParams& p) {
  return y0 * (1.0 - tbg_epsilon(t, p.T_s) / (1.0 + p.delta));
}

double pt_scalar_value(double y0, double t, const RhoParams& p, double alpha) {
  if (!(alpha > 0.0)) throw Error(Error::Code::DomainViolation, "alpha must be positive");
  return std::pow(rho(t, p), -alpha) * std::exp(-p.gamma * t) * y0;
}

double GainSchedule::value_at(double t) const {
  if (const auto* c = std::get_if<ConstantGain>(&kind)) return c->eta;
  if (const auto* tb = std::get_if<TbgParams>(&kind)) return tbg_gain(t, *tb);
  return pt_gain(t, std::get<RhoParams>(kind));
}

}  // namespace dbmc
