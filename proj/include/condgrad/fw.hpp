#pragma once

#include "condgrad/core.hpp"
#include "condgrad/objectives.hpp"
#include "condgrad/regions.hpp"
#include "condgrad/step_rules.hpp"
#include "condgrad/trace.hpp"

#include <cstdint>
#include <functional>
#include <optional>

namespace condgrad {

struct RunConfig {
  std::int64_t max_iters = 1000;
  double tol = 1e-6;
  StepRule step_rule = StepRule::short_step;
  int open_loop_shift = 2;
  /// Overrides objective.smoothness for the short step and schedules.
  std::optional<double> L;
  AdaptiveState adaptive;
  /// Initial L~ for the adaptive rule; probed from x0 when absent.
  std::optional<double> adaptive_L0;
  std::uint64_t seed = 0;
  std::int64_t record_every = 1;
  bool record_time = false;
  /// Start point; defaults to lmo(grad f(lmo(0))). Active-set methods need
  /// a vertex.
  std::optional<Point> x0;
  /// Called with (t, x_t) for every recorded row.
  std::function<void(std::int64_t, const Point&)> observer;
};

namespace detail {

inline void check_config(const RunConfig& config) {
  require(config.max_iters >= 0, "max_iters must be non-negative");
  require(config.tol > 0.0, "tol must be positive");
}

inline double smoothness_of(const Objective& objective, const RunConfig& config) {
  if (config.L) return *config.L;
  if (objective.smoothness) return *objective.smoothness;
  throw CapabilityError("this step rule needs a smoothness constant");
}

template <typename Region>
Point start_point(const Objective& objective, const Region& region, const RunConfig& config,
                  Counters& counters) {
  if (config.x0) {
    require(config.x0->size() == region.dimension(), "x0 has the wrong dimension");
    return *config.x0;
  }
  counters.lmo += 2;
  counters.foo += 1;
  const Point any = region.lmo(Point::Zero(region.dimension()));
  return region.lmo(objective.checked_gradient(any));
}

/// Shared step-size dispatch for a move x <- x - gamma d with gamma in
/// [0, gamma_max].
class Stepper {
 public:
  Stepper(const Objective& objective, const RunConfig& config) : objective_(objective), config_(config) {
    if (config.step_rule == StepRule::short_step) L_ = smoothness_of(objective, config);
    if (config.adaptive_L0) state_.L_tilde = *config.adaptive_L0;
    state_.tau = config.adaptive.tau;
    state_.eta = config.adaptive.eta;
    state_.alpha = config.adaptive.alpha;
    have_estimate_ = config.adaptive_L0.has_value();
  }

  double operator()(std::int64_t t, const Point& x, const Point& g, const Point& d, double gamma_max,
                    Counters& counters) {
    const double slope = g.dot(d);
    switch (config_.step_rule) {
      case StepRule::open_loop:
        return std::min(open_loop_step(t, config_.open_loop_shift), gamma_max);
      case StepRule::short_step: {
        StepContext ctx;
        ctx.t = t;
        ctx.dir_derivative = slope;
        ctx.dir_norm_sq = d.squaredNorm();
        ctx.gamma_max = gamma_max;
        ctx.L_estimate = L_;
        return short_step(ctx);
      }
      case StepRule::line_search:
        return line_search(objective_, x, d, gamma_max, &g);
      case StepRule::adaptive: {
        if (slope <= 0.0) return 0.0;
        const Point target = x - gamma_max * d;
        if (!have_estimate_) {
          ++counters.foo;
          state_.L_tilde = initial_smoothness_estimate(objective_, x, target);
          have_estimate_ = true;
        }
        const auto res = adaptive_step(objective_, x, target, state_, &g);
        state_ = res.state;
        return res.gamma * gamma_max;
      }
    }
    return 0.0;
  }

  const AdaptiveState& adaptive_state() const { return state_; }

 private:
  const Objective& objective_;
  const RunConfig& config_;
  double L_ = 0.0;
  AdaptiveState state_;
  bool have_estimate_ = false;
};

inline Point fw_update(const Point& x, const Point& v, double gamma) { return x + gamma * (v - x); }

}  // namespace detail

/// Vanilla Frank-Wolfe. Row t holds x_t, its FW gap and the step that
/// produced it.
template <typename Region>
RunResult run_fw(const Objective& objective, const Region& region, const RunConfig& config) {
  detail::check_config(config);
  RunResult result;
  Counters& c = result.counters;
  Point x = detail::start_point(objective, region, config, c);
  detail::Stepper stepper(objective, config);
  TraceRecorder rec(objective, config.record_every, config.record_time, config.observer);
  double last_step = 0.0;
  for (std::int64_t t = 0;; ++t) {
    const Point g = objective.checked_gradient(x);
    ++c.foo;
    const Point v = region.lmo(g);
    ++c.lmo;
    const double gap = g.dot(x - v);
    const bool done = gap <= config.tol;
    rec.record(t, x, gap, last_step, c, 0, done || t == config.max_iters);
    if (done) {
      result.converged = true;
      break;
    }
    if (t == config.max_iters) break;
    const double gamma = stepper(t, x, g, x - v, 1.0, c);
    x = detail::fw_update(x, v, gamma);
    ++c.fw_steps;
    last_step = gamma;
  }
  result.trace = rec.take();
  result.x = std::move(x);
  return result;
}

/// Frank-Wolfe with the nearest-extreme-point oracle and gamma_t = 2/(t+2).
template <typename Region>
RunResult run_nepfw(const Objective& objective, const Region& region, const RunConfig& config) {
  detail::check_config(config);
  if (!region.supports_nep()) throw CapabilityError("NEP-FW needs a region with an NEP oracle");
  const double L = detail::smoothness_of(objective, config);
  RunResult result;
  Counters& c = result.counters;
  Point x = detail::start_point(objective, region, config, c);
  TraceRecorder rec(objective, config.record_every, config.record_time, config.observer);
  double last_step = 0.0;
  for (std::int64_t t = 0;; ++t) {
    const Point g = objective.checked_gradient(x);
    ++c.foo;
    // Gap certificate from an uncounted monitoring LMO.
    const double gap = g.dot(x - region.lmo(g));
    const bool done = gap <= config.tol;
    rec.record(t, x, gap, last_step, c, 0, done || t == config.max_iters);
    if (done) {
      result.converged = true;
      break;
    }
    if (t == config.max_iters) break;
    const double gamma = open_loop_step(t, 2);
    const Point v = region.nep(g, L * gamma / 2.0, x);
    ++c.lmo;
    x = detail::fw_update(x, v, gamma);
    ++c.fw_steps;
    last_step = gamma;
  }
  result.trace = rec.take();
  result.x = std::move(x);
  return result;
}

struct BoostConfig {
  int K = 1000;
  double delta = 1e-3;
};

struct BoostDirection {
  Point g;
  int rounds = 0;
  bool fallback = false;
};

/// Gradient pursuit: aligns a feasible direction with -grad f(x) using
/// LMO calls on the residual.
template <typename Region>
BoostDirection boost_direction(const Objective& objective, const Point& x, const Region& region,
                               const BoostConfig& boost, Counters& counters,
                               const Point* grad_at_x = nullptr) {
  require(boost.K >= 1, "boost needs K >= 1");
  require(boost.delta > 0.0 && boost.delta < 1.0, "boost needs 0 < delta < 1");
  const Point grad = grad_at_x ? *grad_at_x : objective.checked_gradient(x);
  const double gnorm = grad.norm();
  BoostDirection out;
  Point d = Point::Zero(x.size());
  double Lambda = 0.0;
  Point first_v;
  bool single_vertex = true;
  const auto align = [&](const Point& dir) {
    const double n = dir.norm();
    return n == 0.0 || gnorm == 0.0 ? -1.0 : -grad.dot(dir) / (gnorm * n);
  };
  for (int k = 0; k < boost.K; ++k) {
    const Point r = -grad - d;
    const Point v = region.lmo(-r);
    ++counters.lmo;
    if (k == 0) first_v = v;
    const Point u_vertex = v - x;
    double best_val = r.dot(u_vertex);
    Point u = u_vertex;
    bool vertex_dir = true;
    const double dnorm = d.norm();
    if (dnorm > 0.0) {
      const Point u_back = -d / dnorm;
      if (r.dot(u_back) > best_val) {
        best_val = r.dot(u_back);
        u = u_back;
        vertex_dir = false;
      }
    }
    const double usq = u.squaredNorm();
    if (usq == 0.0 || best_val <= 0.0) break;
    const double lambda = best_val / usq;
    const Point d_next = d + lambda * u;
    if (align(d_next) - align(d) < boost.delta) break;
    d = d_next;
    if (vertex_dir) {
      Lambda += lambda;
    } else {
      Lambda *= 1.0 - lambda / dnorm;
    }
    out.rounds = k + 1;
    single_vertex = single_vertex && vertex_dir;
  }
  if (out.rounds == 0 || Lambda <= 0.0) {
    out.fallback = true;
    out.g = (first_v.size() ? first_v : region.lmo(grad)) - x;
    if (!first_v.size()) ++counters.lmo;
    return out;
  }
  // A single vertex round is exactly the FW direction.
  out.g = out.rounds == 1 && single_vertex ? Point(first_v - x) : Point(d / Lambda);
  return out;
}

/// Boosted Frank-Wolfe: x <- x + gamma g with g from boost_direction.
template <typename Region>
RunResult run_boostfw(const Objective& objective, const Region& region, const RunConfig& config,
                      const BoostConfig& boost) {
  detail::check_config(config);
  RunResult result;
  Counters& c = result.counters;
  Point x = detail::start_point(objective, region, config, c);
  detail::Stepper stepper(objective, config);
  TraceRecorder rec(objective, config.record_every, config.record_time, config.observer);
  double last_step = 0.0;
  for (std::int64_t t = 0;; ++t) {
    const Point grad = objective.checked_gradient(x);
    ++c.foo;
    const double gap = grad.dot(x - region.lmo(grad));
    const bool done = gap <= config.tol;
    rec.record(t, x, gap, last_step, c, 0, done || t == config.max_iters);
    if (done) {
      result.converged = true;
      break;
    }
    if (t == config.max_iters) break;
    const auto dir = boost_direction(objective, x, region, boost, c, &grad);
    const double gamma = stepper(t, x, grad, -dir.g, 1.0, c);
    x = x + gamma * dir.g;
    ++c.fw_steps;
    c.inner_iterations += dir.rounds;
    last_step = gamma;
  }
  result.trace = rec.take();
  result.x = std::move(x);
  return result;
}

/// Hybrid conditional gradient smoothing for h(x) + g(Ax): FW on the Moreau
/// envelope of g with beta_t = beta / sqrt(t + 1) and gamma_t = 2/(t+2).
/// The trace reports the true composite value.
template <typename Region>
RunResult run_hcgs(const Objective& h, const NonsmoothPart& g, const Eigen::MatrixXd& A,
                   const Region& region, const RunConfig& config, double beta) {
  detail::check_config(config);
  require(beta > 0.0, "HCGS needs beta > 0");
  require(A.cols() == region.dimension(), "HCGS: A has the wrong shape");
  Objective composite;
  composite.value = [&h, &g, &A](const Point& x) { return h.value(x) + g.value(A * x); };
  composite.optimum_value = h.optimum_value;
  RunResult result;
  Counters& c = result.counters;
  Point x = detail::start_point(h, region, config, c);
  TraceRecorder rec(composite, config.record_every, config.record_time, config.observer);
  double last_step = 0.0;
  for (std::int64_t t = 0;; ++t) {
    const double beta_t = beta / std::sqrt(static_cast<double>(t) + 1.0);
    const Point ax = A * x;
    const Point z = h.checked_gradient(x) + A.transpose() * (ax - g.prox(ax, beta_t)) / beta_t;
    ++c.foo;
    const Point v = region.lmo(z);
    ++c.lmo;
    // Gap of the smoothed problem at x.
    const double gap = z.dot(x - v);
    const bool done = gap <= config.tol;
    rec.record(t, x, gap, last_step, c, 0, done || t == config.max_iters);
    if (done) {
      result.converged = true;
      break;
    }
    if (t == config.max_iters) break;
    const double gamma = open_loop_step(t, 2);
    x = detail::fw_update(x, v, gamma);
    ++c.fw_steps;
    last_step = gamma;
  }
  result.trace = rec.take();
  result.x = std::move(x);
  return result;
}

}  // namespace condgrad
