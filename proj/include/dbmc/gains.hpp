#pragma once

// Feedback-gain schedules for the biased min-consensus protocol:
// a constant gain, the truncated time-base-generator (TBG) gain used for
// practical pre-specified-time runs, and the rho-scaling gain used for
// exact pre-specified-time runs. Closed-form solutions of the associated
// scalar comparison ODEs are provided for testing and bound checks.

#include <variant>

namespace dbmc {

struct TbgParams {
  double T_s = 4.0;     // window length, seconds
  double delta = 1e-4;  // regularizer, 0 < delta < 1
};

struct RhoParams {
  double T_bar_s = 4.0;  // prescribed convergence time, seconds
  int h = 2;             // scaling exponent offset, h >= 2
  double gamma = 1.0;    // baseline gain
};

void validate(const TbgParams& p);
void validate(const RhoParams& p);

// TBG profile: smooth monotone ramp from 0 at t=0 to 1 at t=T_s with zero
// endpoint slopes; identically 1 beyond T_s.
double tbg_epsilon(double t, double T_s);
double tbg_epsilon_dot(double t, double T_s);

// Truncated TBG gain, reused every window: with t' = t - k*T_s in [0, T_s),
// returns eps_dot(t') / (1 - eps(t') + delta). Continuous, bounded,
// nonnegative on [0, inf).
double tbg_gain(double t, const TbgParams& p);

// Supremum of tbg_gain over one window, by a uniform sweep.
double tbg_gain_bound(const TbgParams& p, int samples_per_window = 10000);

// rho(t) = (T_bar_s / (T_bar_s - t))^(1+h) on [0, T_bar_s); rho(0) = 1.
double rho(double t, const RhoParams& p);

// Pre-specified-time gain: gamma + 2*(1+h)/(T_bar_s - t) on [0, T_bar_s),
// exactly 0 for t >= T_bar_s. The rho_dot/rho ratio is evaluated in its
// reduced form so it cannot overflow near T_bar_s.
double pt_gain(double t, const RhoParams& p);

// Terminal value of y' = -tbg_gain(t) y over one window: delta/(1+delta)*y0,
// independent of everything but delta.
double tbg_window_decay(double y0, const TbgParams& p);

// The same scalar solution at an interior time: y0 * (1 - eps(t)/(1+delta)).
double tbg_window_value(double y0, double t, const TbgParams& p);

// Solution of y' = -(gamma + alpha*rho_dot/rho) y: rho(t)^(-alpha) e^(-gamma t) y0.
double pt_scalar_value(double y0, double t, const RhoParams& p, double alpha);

struct ConstantGain {
  double eta = 1.0;
};

// A time-indexed feedback gain of one of the three kinds.
struct GainSchedule {
  std::variant<ConstantGain, TbgParams, RhoParams> kind;

  double value_at(double t) const;
};

}  // namespace dbmc
