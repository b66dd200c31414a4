#pragma once

#include "condgrad/fw.hpp"

#include <cmath>

namespace condgrad {

/// Inner FW on <g0, u> + eta ||u - u0||^2 / 2 with short steps; returns the
/// first iterate whose gap is at most beta.
template <typename Region>
Point cg_projection(const Point& g0, const Point& u0, double eta, double beta, const Region& region,
                    Counters* counters = nullptr) {
  require(eta > 0.0, "CG projection needs eta > 0");
  require(beta >= 0.0, "CG projection needs beta >= 0");
  constexpr long kMaxInner = 1000000;
  Point u = u0;
  for (long k = 0; k < kMaxInner; ++k) {
    const Point g = g0 + eta * (u - u0);
    const Point v = region.lmo(g);
    if (counters) {
      ++counters->lmo;
      ++counters->inner_iterations;
    }
    const Point diff = u - v;
    const double gap = g.dot(diff);
    if (gap <= beta) return u;
    const double alpha = std::min(gap / (eta * diff.squaredNorm()), 1.0);
    u += alpha * (v - u);
  }
  throw NumericFailure("CG projection exceeded its inner iteration cap");
}

enum class CgsMode { standard, fixed_horizon, restart };

struct CgsSchedule {
  CgsMode mode = CgsMode::standard;
  /// Fixed-horizon length T; 0 means config.max_iters.
  std::int64_t horizon = 0;
  /// Bound on the initial distance to the optimum; defaults to the diameter.
  std::optional<double> D0;
  /// Strong convexity for restarts; defaults to objective.strong_convexity.
  std::optional<double> mu;
  /// Initial primal-gap bound for restarts; defaults to the FW gap at x0.
  std::optional<double> phi0;
};

struct CgsParams {
  double gamma, eta, beta;
};

/// gamma = 3/(t+3), eta = 3L/(t+2), beta = L D^2 / ((t+1)(t+2)).
inline CgsParams cgs_standard_params(std::int64_t t, double L, double D) {
  const double tt = static_cast<double>(t);
  return {3.0 / (tt + 3.0), 3.0 * L / (tt + 2.0), L * D * D / ((tt + 1.0) * (tt + 2.0))};
}

/// gamma = 2/(t+2), eta = 2L/(t+1), beta = 2 L D0^2 / (T (t+1)).
inline CgsParams cgs_fixed_horizon_params(std::int64_t t, std::int64_t T, double L, double D0) {
  const double tt = static_cast<double>(t);
  return {2.0 / (tt + 2.0), 2.0 * L / (tt + 1.0), 2.0 * L * D0 * D0 / (static_cast<double>(T) * (tt + 1.0))};
}

/// Stage parameters for the strongly convex restart: T = ceil(2 sqrt(6L/mu)),
/// beta = 8 L phi0 2^-s / (mu T (t+1)).
inline CgsParams cgs_restart_params(std::int64_t t, std::int64_t stage, std::int64_t T, double L, double mu,
                                    double phi0) {
  const double tt = static_cast<double>(t);
  return {2.0 / (tt + 2.0), 2.0 * L / (tt + 1.0),
          8.0 * L * phi0 * std::ldexp(1.0, -static_cast<int>(stage)) / (mu * static_cast<double>(T) * (tt + 1.0))};
}

inline std::int64_t cgs_restart_length(double L, double mu) {
  return static_cast<std::int64_t>(std::ceil(2.0 * std::sqrt(6.0 * L / mu)));
}

/// Conditional gradient sliding. Rows report the output sequence y_t; the
/// gap column comes from an uncounted monitoring oracle call.
template <typename Region>
RunResult run_cgs(const Objective& objective, const Region& region, const RunConfig& config,
                  const CgsSchedule& schedule = {}) {
  detail::check_config(config);
  const double L = detail::smoothness_of(objective, config);
  const double D = region.diameter();
  RunResult result;
  Counters& c = result.counters;
  Point x = detail::start_point(objective, region, config, c);
  Point y = x;
  TraceRecorder rec(objective, config.record_every, config.record_time, config.observer);

  const std::int64_t horizon = schedule.horizon > 0 ? schedule.horizon : std::max<std::int64_t>(config.max_iters, 1);
  double mu = 0.0, phi0 = 0.0;
  std::int64_t stage_len = 0;
  if (schedule.mode == CgsMode::restart) {
    mu = schedule.mu ? *schedule.mu : objective.strong_convexity.value_or(0.0);
    if (mu <= 0.0) throw CapabilityError("CGS restarts need a positive strong convexity constant");
    stage_len = cgs_restart_length(L, mu);
    if (schedule.phi0) {
      phi0 = *schedule.phi0;
    } else {
      const Point g = objective.checked_gradient(x);
      ++c.foo;
      ++c.lmo;
      phi0 = g.dot(x - region.lmo(g));
    }
  }

  double last_step = 0.0;
  std::int64_t local_t = 0, stage = 0;
  for (std::int64_t t = 0;; ++t) {
    const Point gy = objective.checked_gradient(y);
    const double gap = gy.dot(y - region.lmo(gy));
    const bool done = gap <= config.tol;
    rec.record(t, y, gap, last_step, c, 0, done || t == config.max_iters);
    if (done) {
      result.converged = true;
      break;
    }
    if (t == config.max_iters) break;

    CgsParams p{};
    switch (schedule.mode) {
      case CgsMode::standard: p = cgs_standard_params(t, L, D); break;
      case CgsMode::fixed_horizon:
        p = cgs_fixed_horizon_params(t, horizon, L, schedule.D0.value_or(D));
        break;
      case CgsMode::restart:
        if (local_t == stage_len) {
          ++stage;
          local_t = 0;
          x = y;
        }
        p = cgs_restart_params(local_t, stage, stage_len, L, mu, phi0);
        ++local_t;
        break;
    }
    const Point w = (1.0 - p.gamma) * y + p.gamma * x;
    const Point gw = objective.checked_gradient(w);
    ++c.foo;
    x = cg_projection(gw, x, p.eta, p.beta, region, &c);
    y = y + p.gamma * (x - y);
    ++c.fw_steps;
    last_step = p.gamma;
  }
  result.trace = rec.take();
  result.x = std::move(y);
  return result;
}

}  // namespace condgrad
