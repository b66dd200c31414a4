#pragma once

#include "condgrad/fw.hpp"

namespace condgrad {

/// Away-step Frank-Wolfe. Stops on the strong FW gap.
template <typename Region>
RunResult run_afw(const Objective& objective, const Region& region, const RunConfig& config) {
  detail::check_config(config);
  RunResult result;
  Counters& c = result.counters;
  ActiveSet active(detail::start_point(objective, region, config, c));
  detail::Stepper stepper(objective, config);
  TraceRecorder rec(objective, config.record_every, config.record_time, config.observer);
  double last_step = 0.0;
  for (std::int64_t t = 0;; ++t) {
    const Point& x = active.iterate();
    const Point g = objective.checked_gradient(x);
    ++c.foo;
    const Point v_fw = region.lmo(g);
    ++c.lmo;
    const auto prods = active.products(g);
    const std::size_t a = argmax_index(prods);
    const double gx = g.dot(x);
    const double fw_gap = gx - g.dot(v_fw);
    const double away_gap = prods[a] - gx;
    const bool done = prods[a] - g.dot(v_fw) <= config.tol;
    rec.record(t, x, fw_gap, last_step, c, active.size(), done || t == config.max_iters);
    if (done) {
      result.converged = true;
      break;
    }
    if (t == config.max_iters) break;
    if (fw_gap >= away_gap) {
      const double gamma = stepper(t, x, g, x - v_fw, 1.0, c);
      active = active_set_update(std::move(active), UpdateKind::fw_step, v_fw, gamma);
      ++c.fw_steps;
      last_step = gamma;
    } else {
      const Point v_a = active.atoms()[a];
      const double lambda = active.weights()[a];
      const double gamma_max = lambda / (1.0 - lambda);
      const double gamma = stepper(t, x, g, v_a - x, gamma_max, c);
      if (gamma >= gamma_max) {
        active = active_set_update(std::move(active), UpdateKind::drop, v_a, gamma_max);
        ++c.drop_steps;
      } else {
        active = active_set_update(std::move(active), UpdateKind::away_step, v_a, gamma);
        ++c.away_steps;
      }
      last_step = gamma;
    }
  }
  result.trace = rec.take();
  result.x = active.iterate();
  result.active_set_bytes = active.storage_bytes();
  result.active = std::move(active);
  return result;
}

/// Pairwise Frank-Wolfe: moves weight from the away atom to the FW vertex.
template <typename Region>
RunResult run_pfw(const Objective& objective, const Region& region, const RunConfig& config) {
  detail::check_config(config);
  RunResult result;
  Counters& c = result.counters;
  ActiveSet active(detail::start_point(objective, region, config, c));
  detail::Stepper stepper(objective, config);
  TraceRecorder rec(objective, config.record_every, config.record_time, config.observer);
  double last_step = 0.0;
  for (std::int64_t t = 0;; ++t) {
    const Point& x = active.iterate();
    const Point g = objective.checked_gradient(x);
    ++c.foo;
    const Point v_fw = region.lmo(g);
    ++c.lmo;
    const auto prods = active.products(g);
    const std::size_t a = argmax_index(prods);
    const double fw_gap = g.dot(x - v_fw);
    const bool done = prods[a] - g.dot(v_fw) <= config.tol;
    rec.record(t, x, fw_gap, last_step, c, active.size(), done || t == config.max_iters);
    if (done) {
      result.converged = true;
      break;
    }
    if (t == config.max_iters) break;
    const Point d = active.atoms()[a] - v_fw;
    const double gamma_max = active.weights()[a];
    const double gamma = stepper(t, x, g, d, gamma_max, c);
    if (gamma >= gamma_max) ++c.drop_steps;
    active = pairwise_update(std::move(active), a, v_fw, std::min(gamma, gamma_max));
    ++c.pairwise_steps;
    last_step = gamma;
  }
  result.trace = rec.take();
  result.x = active.iterate();
  result.active_set_bytes = active.storage_bytes();
  result.active = std::move(active);
  return result;
}

namespace detail {

/// Minimizes f over conv(candidates) starting from `active` by away-step FW
/// over the barycentric coordinates with line search.
inline ActiveSet fully_correct(const Objective& objective, ActiveSet active,
                               const std::vector<Point>& candidates, double tol, Counters& c) {
  constexpr int kStall = 10000;
  constexpr int kMaxInner = 1000000;
  double best_f = objective.value(active.iterate());
  int since_progress = 0;
  for (int k = 0; k < kMaxInner; ++k) {
    const Point& x = active.iterate();
    const Point g = objective.checked_gradient(x);
    ++c.foo;
    std::vector<double> cand(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) cand[i] = g.dot(candidates[i]);
    const std::size_t s = argmin_index(cand);
    const auto prods = active.products(g);
    const std::size_t a = argmax_index(prods);
    if (prods[a] - cand[s] <= tol) return active;
    const double gx = g.dot(x);
    if (gx - cand[s] >= prods[a] - gx) {
      const double gamma = line_search(objective, x, x - candidates[s], 1.0, &g);
      active = active_set_update(std::move(active), UpdateKind::fw_step, candidates[s], gamma);
    } else {
      const double lambda = active.weights()[a];
      const double gamma_max = lambda / (1.0 - lambda);
      const Point v_a = active.atoms()[a];
      const double gamma = line_search(objective, x, v_a - x, gamma_max, &g);
      active = active_set_update(std::move(active), gamma >= gamma_max ? UpdateKind::drop : UpdateKind::away_step,
                                 v_a, std::min(gamma, gamma_max));
    }
    ++c.inner_iterations;
    const double f = objective.value(active.iterate());
    if (f < best_f) {
      best_f = f;
      since_progress = 0;
    } else if (++since_progress >= kStall) {
      throw NumericFailure("fully-corrective inner solver stalled");
    }
  }
  throw NumericFailure("fully-corrective inner solver hit its iteration cap");
}

}  // namespace detail

/// Fully-corrective Frank-Wolfe: after each LMO call, re-optimizes over the
/// convex hull of the active atoms plus the new vertex.
template <typename Region>
RunResult run_fcfw(const Objective& objective, const Region& region, const RunConfig& config) {
  detail::check_config(config);
  RunResult result;
  Counters& c = result.counters;
  ActiveSet active(detail::start_point(objective, region, config, c));
  TraceRecorder rec(objective, config.record_every, config.record_time, config.observer);
  double last_step = 0.0;
  for (std::int64_t t = 0;; ++t) {
    const Point x = active.iterate();
    const Point g = objective.checked_gradient(x);
    ++c.foo;
    const Point v = region.lmo(g);
    ++c.lmo;
    const double gap = g.dot(x - v);
    const bool done = gap <= config.tol;
    rec.record(t, x, gap, last_step, c, active.size(), done || t == config.max_iters);
    if (done) {
      result.converged = true;
      break;
    }
    if (t == config.max_iters) break;
    std::vector<Point> candidates = active.atoms();
    if (!active.find(v)) candidates.push_back(v);
    active = detail::fully_correct(objective, std::move(active), candidates, 1e-2 * config.tol, c);
    ++c.fw_steps;
    last_step = (active.iterate() - x).norm();
  }
  result.trace = rec.take();
  result.x = active.iterate();
  result.active_set_bytes = active.storage_bytes();
  result.active = std::move(active);
  return result;
}

struct DipfwOptions {
  /// Power-of-two schedule instead of line search; needs mu and the
  /// sparsity (non-zero count) of the optimum.
  bool power_of_two = false;
  double mu = 0.0;
  int sparsity = 1;
};

/// gamma_t = largest 2^-k below sqrt(c) (1 - c)^((t-1)/2), c = mu / (16 L D^2 s).
inline double dipfw_power_of_two_step(std::int64_t t, double mu, double L, double D, int sparsity) {
  require(mu > 0.0 && L > 0.0 && D > 0.0 && sparsity >= 1, "power-of-two schedule needs mu, L, D, s > 0");
  const double ratio = mu / (16.0 * L * D * D * sparsity);
  const double bound = std::sqrt(ratio) * std::pow(1.0 - ratio, (static_cast<double>(std::max<std::int64_t>(t, 1)) - 1.0) / 2.0);
  double step = 1.0;
  while (step > bound && step > 0.0) step *= 0.5;
  return step;
}

/// Decomposition-invariant pairwise FW on simplex-like 0/1 polytopes; the
/// away vertex comes from the minimal face of x, so no active set is kept.
template <typename Region>
RunResult run_dipfw(const Objective& objective, const Region& region, const RunConfig& config,
                    const DipfwOptions& options = {}) {
  detail::check_config(config);
  if (!region.supports_face_oracle())
    throw CapabilityError(std::string("DI-PFW needs a simplex-like 0/1 polytope, got ") + region.name());
  RunResult result;
  Counters& c = result.counters;
  Point x = detail::start_point(objective, region, config, c);
  const bool upper_bounded = region.kind() == RegionKind::hypercube01;
  detail::Stepper stepper(objective, config);
  TraceRecorder rec(objective, config.record_every, config.record_time, config.observer);
  double last_step = 0.0;
  for (std::int64_t t = 0;; ++t) {
    const Point g = objective.checked_gradient(x);
    ++c.foo;
    const Point v_fw = region.lmo(g);
    const Point v_a = region.face_away_vertex(g, x);
    c.lmo += 2;
    const double gap = g.dot(x - v_fw);
    const double pair_gap = g.dot(v_a - v_fw);
    const bool done = pair_gap <= config.tol;
    rec.record(t, x, gap, last_step, c, 0, done || t == config.max_iters);
    if (done) {
      result.converged = true;
      break;
    }
    if (t == config.max_iters) break;
    const Point dir = v_fw - v_a;
    const double gamma_max = region.max_feasible_step(x, dir);
    double gamma;
    if (options.power_of_two) {
      gamma = std::min(dipfw_power_of_two_step(t, options.mu, detail::smoothness_of(objective, config),
                                               region.diameter(), options.sparsity),
                       gamma_max);
    } else {
      gamma = stepper(t, x, g, -dir, gamma_max, c);
    }
    x += gamma * dir;
    // Pin coordinates that reached a bound; rounding must not leave
    // phantom support behind.
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (std::abs(x[i]) <= 1e-14) x[i] = 0.0;
      if (upper_bounded && std::abs(x[i] - 1.0) <= 1e-14) x[i] = 1.0;
    }
    if (gamma >= gamma_max) {
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (dir[i] < 0.0 && x[i] / -dir[i] <= 1e-12) x[i] = 0.0;
        if (upper_bounded && dir[i] > 0.0 && (1.0 - x[i]) / dir[i] <= 1e-12) x[i] = 1.0;
      }
    }
    ++c.pairwise_steps;
    last_step = gamma;
  }
  result.trace = rec.take();
  result.x = std::move(x);
  result.active_set_bytes = 0;
  return result;
}

}  // namespace condgrad
