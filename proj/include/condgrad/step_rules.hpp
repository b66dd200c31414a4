#pragma once

#include "condgrad/core.hpp"

#include <cmath>
#include <string>

namespace condgrad {

enum class StepRule { open_loop, short_step, line_search, adaptive };

inline const char* step_rule_name(StepRule rule) {
  switch (rule) {
    case StepRule::open_loop: return "open_loop";
    case StepRule::short_step: return "short";
    case StepRule::line_search: return "linesearch";
    case StepRule::adaptive: return "adaptive";
  }
  return "unknown";
}

inline StepRule parse_step_rule(const std::string& name) {
  if (name == "open_loop") return StepRule::open_loop;
  if (name == "short") return StepRule::short_step;
  if (name == "linesearch") return StepRule::line_search;
  if (name == "adaptive") return StepRule::adaptive;
  throw ContractViolation("unknown step rule: " + name);
}

/// 2 / (t + shift).
inline double open_loop_step(long long t, int shift = 2) {
  require(shift >= 2, "open-loop shift must be at least 2");
  require(t >= 0, "iteration index must be non-negative");
  return 2.0 / (static_cast<double>(t) + static_cast<double>(shift));
}

struct StepContext {
  long long t = 0;
  double dir_derivative = 0.0;  // <grad f(x), d>, the step moves x - gamma d
  double dir_norm_sq = 0.0;
  double gamma_max = 1.0;
  double L_estimate = 0.0;
};

inline double short_step(const StepContext& ctx) {
  require(ctx.L_estimate > 0.0, "short step needs a positive smoothness estimate");
  require(ctx.gamma_max > 0.0, "gamma_max must be positive");
  require(ctx.dir_norm_sq >= 0.0, "direction norm must be non-negative");
  if (ctx.dir_derivative <= 0.0) return 0.0;
  require(ctx.dir_norm_sq > 0.0, "descent direction with zero norm");
  return std::min(ctx.dir_derivative / (ctx.L_estimate * ctx.dir_norm_sq), ctx.gamma_max);
}

/// argmin over [0, gamma_max] of f(x - gamma d). Closed form for quadratics,
/// golden-section search otherwise; never returns a step that increases f.
inline double line_search(const Objective& objective, const Point& x, const Point& d,
                          double gamma_max, const Point* grad_at_x = nullptr) {
  require(gamma_max > 0.0, "gamma_max must be positive");
  const Point g = grad_at_x ? *grad_at_x : objective.checked_gradient(x);
  const double slope = g.dot(d);
  if (slope <= 0.0) return 0.0;
  if (objective.is_quadratic()) {
    const double curv = objective.curvature(d);
    if (curv <= 0.0) return gamma_max;
    return std::min(slope / curv, gamma_max);
  }
  const auto phi = [&](double gamma) { return objective.value(x - gamma * d); };
  const double inv_golden = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = gamma_max;
  double c = b - inv_golden * (b - a);
  double e = a + inv_golden * (b - a);
  double fc = phi(c), fe = phi(e);
  const double width = 1e-10 * gamma_max;
  while (b - a > width) {
    if (fc <= fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - inv_golden * (b - a);
      fc = phi(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + inv_golden * (b - a);
      fe = phi(e);
    }
  }
  double best = 0.5 * (a + b);
  double f_best = phi(best);
  const double f_max = phi(gamma_max);
  if (f_max <= f_best) {
    best = gamma_max;
    f_best = f_max;
  }
  return f_best <= objective.value(x) ? best : 0.0;
}

struct AdaptiveState {
  double L_tilde = 1.0;
  double tau = 2.0;
  double eta = 0.9;
  double alpha = 0.5;
};

struct AdaptiveResult {
  AdaptiveState state;  // L_tilde holds the accepted M
  double gamma = 0.0;
  int trials = 0;
};

/// Smoothness estimate from a short probe step toward v (gamma = 0.001).
inline double initial_smoothness_estimate(const Objective& objective, const Point& x,
                                          const Point& v, double gamma = 1e-3) {
  const Point dir = v - x;
  const double n = dir.norm();
  require(n > 0.0, "smoothness probe needs v != x");
  const Point g0 = objective.checked_gradient(x);
  const Point g1 = objective.checked_gradient(x + gamma * dir);
  const double est = (g0 - g1).norm() / (gamma * n);
  return est > 0.0 ? est : 1.0;
}

/// Backtracking on the smoothness estimate: M <- eta L~, then M <- tau M
/// until f(x + gamma (v - x)) - f(x) <= alpha gamma <g, v - x>
///   + alpha^2 gamma^2 M ||x - v||^2 / 2.
inline AdaptiveResult adaptive_step(const Objective& objective, const Point& x, const Point& v,
                                    const AdaptiveState& state, const Point* grad_at_x = nullptr) {
  require(state.tau > 1.0 && state.eta > 0.0 && state.eta <= 1.0, "need tau > 1 >= eta > 0");
  require(state.alpha > 0.0 && state.alpha <= 1.0, "alpha must lie in (0, 1]");
  require(state.L_tilde > 0.0, "smoothness estimate must be positive");
  const Point g = grad_at_x ? *grad_at_x : objective.checked_gradient(x);
  const Point d = v - x;
  const double slope = -g.dot(d);  // <g, x - v>
  require(slope >= 0.0, "adaptive step needs <grad f(x), x - v> >= 0");
  AdaptiveResult out;
  out.state = state;
  const double nsq = d.squaredNorm();
  if (nsq == 0.0 || slope == 0.0) return out;
  const double fx = objective.is_quadratic() ? 0.0 : objective.value(x);
  double M = state.eta * state.L_tilde;
  for (int trial = 0; trial <= 64; ++trial) {
    const double gamma = std::min(slope / (M * nsq), 1.0);
    // Quadratics use the exact expansion; the difference of f values
    // cancels to roundoff near the optimum.
    const double lhs = objective.is_quadratic() ? -gamma * slope + gamma * gamma * objective.curvature(d) / 2.0
                                                : objective.value(x + gamma * d) - fx;
    const double rhs = -state.alpha * gamma * slope + state.alpha * state.alpha * gamma * gamma * M * nsq / 2.0;
    if (lhs <= rhs) {
      out.state.L_tilde = M;
      out.gamma = gamma;
      out.trials = trial + 1;
      return out;
    }
    M *= state.tau;
  }
  throw NumericFailure("adaptive step: smoothness estimate diverged");
}

}  // namespace condgrad
