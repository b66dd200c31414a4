#pragma once

#include "condgrad/fw.hpp"

namespace condgrad {

struct CaratheodoryResult {
  ActiveSet active;
  double residual_norm = 0.0;
  double p = 2.0;
  std::int64_t iterations = 0;
  bool reached = false;
  RunTrace trace;
};

/// Default settings: open-loop steps 2/(t+2) and 10000 iterations.
inline RunConfig caratheodory_config() {
  RunConfig c;
  c.step_rule = StepRule::open_loop;
  c.max_iters = 10000;
  return c;
}

/// Approximates u by a sparse convex combination of vertices: FW on
/// ||x - u||_p^2 until ||x - u||_p <= eps. Each iteration adds at most one
/// atom. If eps is not reached, the last iterate is returned with
/// reached = false.
template <typename Region>
CaratheodoryResult approx_caratheodory(const Point& u, const Region& region, double p, double eps,
                                       const RunConfig& config = caratheodory_config()) {
  detail::check_config(config);
  require(p >= 2.0 && std::isfinite(p), "approximate Caratheodory needs finite p >= 2; use HCGS for p < 2");
  require(eps > 0.0, "eps must be positive");
  require(u.size() == region.dimension(), "u has the wrong dimension");
  require(region.contains(u, 1e-9), "u must lie in the region");
  const Objective objective = lp_distance_squared(u, p);
  Counters c;
  ActiveSet active(detail::start_point(objective, region, config, c));
  detail::Stepper stepper(objective, config);
  TraceRecorder rec(objective, config.record_every, config.record_time, config.observer);
  CaratheodoryResult out{active, 0.0, p, 0, false, {}};
  double last_step = 0.0;
  for (std::int64_t t = 0;; ++t) {
    const Point& x = active.iterate();
    const double residual = std::sqrt(objective.value(x));
    const Point g = objective.checked_gradient(x);
    ++c.foo;
    const Point v = region.lmo(g);
    ++c.lmo;
    const double gap = g.dot(x - v);
    const bool done = residual <= eps;
    rec.record(t, x, gap, last_step, c, active.size(), done || t == config.max_iters);
    out.iterations = t;
    out.residual_norm = residual;
    if (done) {
      out.reached = true;
      break;
    }
    if (t == config.max_iters) break;
    const double gamma = stepper(t, x, g, x - v, 1.0, c);
    active = active_set_update(std::move(active), UpdateKind::fw_step, v, gamma);
    last_step = gamma;
  }
  out.active = std::move(active);
  out.trace = rec.take();
  return out;
}

}  // namespace condgrad
