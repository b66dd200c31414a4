#pragma once

#include "condgrad/fw.hpp"
#include "condgrad/weak_separation.hpp"

#include <vector>

namespace condgrad {

/// One negative oracle answer: the certified gap and the threshold phi it
/// was tested against.
struct NegativeCertificate {
  std::int64_t t = 0;
  double gap = 0.0;
  double phi = 0.0;
};

struct LazyResult {
  RunResult run;
  std::vector<NegativeCertificate> certificates;
};

enum class LazyVariant { fw, afw };

struct LazyOptions {
  double K = 1.0;
  std::optional<double> phi0;
  std::size_t cache_capacity = 256;
};

namespace detail {

template <typename Region>
double monitor_gap(const Region& region, const Point& g, const Point& x) {
  return g.dot(x - region.lmo(g));
}

/// phi_0 = g(x_0) / 2 via one counted LMO call.
template <typename Region>
double initial_phi(const Region& region, const Point& g, const Point& x, Counters& c) {
  ++c.lmo;
  return g.dot(x - region.lmo(g)) / 2.0;
}

}  // namespace detail

/// Lazy conditional gradients driven by the weak separation oracle.
/// Negative answers update phi <- min(phi / 2, g).
template <typename Region>
LazyResult run_lazy(LazyVariant variant, const Objective& objective, const Region& region,
                    const RunConfig& config, const LazyOptions& options = {}) {
  detail::check_config(config);
  require(options.K >= 1.0, "lazy methods need K >= 1");
  LazyResult out;
  RunResult& result = out.run;
  Counters& c = result.counters;
  ActiveSet active(detail::start_point(objective, region, config, c));
  const bool track_active = variant == LazyVariant::afw;
  WeakSeparationCache cache(options.cache_capacity);
  detail::Stepper stepper(objective, config);
  TraceRecorder rec(objective, config.record_every, config.record_time, config.observer);
  Point x = active.iterate();
  double phi = 0.0;
  double last_step = 0.0;
  for (std::int64_t t = 0;; ++t) {
    const Point g = objective.checked_gradient(x);
    ++c.foo;
    if (t == 0) phi = options.phi0 ? *options.phi0 : detail::initial_phi(region, g, x, c);
    const std::size_t size = track_active ? active.size() : 0;
    const double gap = detail::monitor_gap(region, g, x);
    const bool optimal_start = t == 0 && phi <= 0.0;
    if (optimal_start || t == config.max_iters) {
      result.converged = optimal_start;
      rec.record(t, x, gap, last_step, c, size, true);
      break;
    }
    rec.record(t, x, gap, last_step, c, size);

    if (track_active) {
      const auto prods = active.products(g);
      const std::size_t a = argmax_index(prods);
      const std::size_t s = argmin_index(prods);
      const double gx = g.dot(x);
      const double away_val = prods[a] - gx;
      const double local_fw_val = gx - prods[s];
      const double threshold = phi / options.K;
      if (std::max(away_val, local_fw_val) >= threshold && std::max(away_val, local_fw_val) > 0.0) {
        ++c.cache_hits;
        if (local_fw_val >= away_val) {
          const Point v = active.atoms()[s];
          const double gamma = stepper(t, x, g, x - v, 1.0, c);
          active = active_set_update(std::move(active), UpdateKind::fw_step, v, gamma);
          ++c.fw_steps;
          last_step = gamma;
        } else {
          const Point v = active.atoms()[a];
          const double lambda = active.weights()[a];
          const double gamma_max = lambda / (1.0 - lambda);
          const double gamma = stepper(t, x, g, v - x, gamma_max, c);
          const bool drop = gamma >= gamma_max;
          active = active_set_update(std::move(active), drop ? UpdateKind::drop : UpdateKind::away_step, v,
                                     std::min(gamma, gamma_max));
          ++(drop ? c.drop_steps : c.away_steps);
          last_step = gamma;
        }
        x = active.iterate();
        continue;
      }
      ++c.lmo;
      const Point v = region.lmo(g);
      const double fw_val = gx - g.dot(v);
      if (fw_val > threshold) {
        const double gamma = stepper(t, x, g, x - v, 1.0, c);
        active = active_set_update(std::move(active), UpdateKind::fw_step, v, gamma);
        ++c.fw_steps;
        last_step = gamma;
        x = active.iterate();
        continue;
      }
      ++c.negative_calls;
      out.certificates.push_back({t, fw_val, phi});
      last_step = 0.0;
      if (away_val + fw_val <= config.tol) {
        result.converged = true;
        rec.record(t + 1, x, gap, last_step, c, active.size(), true);
        break;
      }
      phi = std::min(phi / 2.0, std::max(fw_val, 0.0));
      continue;
    }

    const auto ans = weak_separation(region, cache, g, x, phi, options.K, c);
    if (ans.positive) {
      const double gamma = stepper(t, x, g, x - ans.vertex, 1.0, c);
      x = detail::fw_update(x, ans.vertex, gamma);
      ++c.fw_steps;
      last_step = gamma;
      continue;
    }
    out.certificates.push_back({t, ans.gap, phi});
    last_step = 0.0;
    if (ans.gap <= config.tol) {
      result.converged = true;
      rec.record(t + 1, x, gap, last_step, c, 0, true);
      break;
    }
    phi = std::min(phi / 2.0, ans.gap);
  }
  result.trace = rec.take();
  result.x = x;
  if (track_active) {
    result.active_set_bytes = active.storage_bytes();
    result.active = std::move(active);
  }
  return out;
}

enum class SimplexDescentKind { drop, descent, stationary };

struct SimplexDescentResult {
  ActiveSet active;
  SimplexDescentKind kind = SimplexDescentKind::stationary;
};

/// Simplex descent oracle: moves the barycentric weights along the
/// mean-centred gradient products until a weight hits zero (drop) or, if
/// that would increase f, line-searches on the segment (descent).
inline SimplexDescentResult simplex_descent(const Objective& objective, const ActiveSet& active, double L,
                                            Counters* counters = nullptr) {
  require(!active.empty(), "simplex descent needs a non-empty active set");
  require(L > 0.0, "simplex descent needs L > 0");
  SimplexDescentResult out{active, SimplexDescentKind::stationary};
  if (active.size() < 2) return out;
  const Point& x = active.iterate();
  const Point grad = objective.checked_gradient(x);
  if (counters) ++counters->foo;
  const auto prods = active.products(grad);
  const std::size_t k = prods.size();
  double mean = 0.0;
  for (double p : prods) mean += p;
  mean /= static_cast<double>(k);
  std::vector<double> d(k);
  double dnorm_sq = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    d[i] = prods[i] - mean;
    dnorm_sq += d[i] * d[i];
  }
  if (std::sqrt(dnorm_sq) <= 1e-12) return out;
  const auto& w = active.weights();
  double eta = std::numeric_limits<double>::infinity();
  std::size_t blocking = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (d[i] > 0.0 && w[i] / d[i] < eta) {
      eta = w[i] / d[i];
      blocking = i;
    }
  }
  Point y = x;
  for (std::size_t i = 0; i < k; ++i) y -= eta * d[i] * active.atoms()[i];
  if (objective.value(y) <= objective.value(x)) {
    std::vector<double> nw(k);
    for (std::size_t i = 0; i < k; ++i) nw[i] = std::max(w[i] - eta * d[i], 0.0);
    nw[blocking] = 0.0;
    out.active.set_weights(std::move(nw));
    out.kind = SimplexDescentKind::drop;
    return out;
  }
  const double theta = line_search(objective, x, x - y, 1.0, &grad);
  std::vector<double> nw(k);
  for (std::size_t i = 0; i < k; ++i) nw[i] = std::max(w[i] - theta * eta * d[i], 0.0);
  out.active.set_weights(std::move(nw));
  out.kind = SimplexDescentKind::descent;
  return out;
}

struct BcgOptions {
  double K = 1.0;
  std::int64_t prune_every = 100;
  std::size_t cache_capacity = 256;
};

/// Blended conditional gradients: simplex descent over the active set while
/// its local gap beats phi, lazy oracle steps otherwise.
template <typename Region>
LazyResult run_bcg(const Objective& objective, const Region& region, const RunConfig& config,
                   const BcgOptions& options = {}) {
  detail::check_config(config);
  require(options.K >= 1.0, "BCG needs K >= 1");
  const double L = detail::smoothness_of(objective, config);
  LazyResult out;
  RunResult& result = out.run;
  Counters& c = result.counters;
  ActiveSet active(detail::start_point(objective, region, config, c));
  WeakSeparationCache cache(options.cache_capacity);
  TraceRecorder rec(objective, config.record_every, config.record_time, config.observer);
  RunConfig ls_config = config;
  ls_config.step_rule = StepRule::line_search;
  detail::Stepper stepper(objective, ls_config);
  double phi = 0.0;
  double last_step = 0.0;
  for (std::int64_t t = 0;; ++t) {
    const Point x = active.iterate();
    const Point g = objective.checked_gradient(x);
    ++c.foo;
    if (t == 0) phi = detail::initial_phi(region, g, x, c);
    const double gap = detail::monitor_gap(region, g, x);
    const bool optimal_start = t == 0 && phi <= 0.0;
    if (optimal_start || t == config.max_iters) {
      result.converged = optimal_start;
      rec.record(t, x, gap, last_step, c, active.size(), true);
      break;
    }
    rec.record(t, x, gap, last_step, c, active.size());
    if (options.prune_every > 0 && t > 0 && t % options.prune_every == 0) active.cleanup();

    const auto prods = active.products(g);
    const double local_gap = prods[argmax_index(prods)] - prods[argmin_index(prods)];
    if (local_gap >= phi) {
      auto sido = simplex_descent(objective, active, L, &c);
      if (sido.kind != SimplexDescentKind::stationary) {
        last_step = (sido.active.iterate() - x).norm();
        ++(sido.kind == SimplexDescentKind::drop ? c.drop_steps : c.descent_steps);
        active = std::move(sido.active);
        continue;
      }
    }
    const auto ans = weak_separation(region, cache, g, x, phi, options.K, c);
    if (ans.positive) {
      const double gamma = stepper(t, x, g, x - ans.vertex, 1.0, c);
      active = active_set_update(std::move(active), UpdateKind::fw_step, ans.vertex, gamma);
      ++c.fw_steps;
      last_step = gamma;
      continue;
    }
    out.certificates.push_back({t, ans.gap, phi});
    last_step = 0.0;
    const double strong = prods[argmax_index(prods)] - g.dot(x) + ans.gap;
    if (strong <= config.tol) {
      result.converged = true;
      rec.record(t + 1, x, gap, last_step, c, active.size(), true);
      break;
    }
    phi /= 2.0;
  }
  result.trace = rec.take();
  result.x = active.iterate();
  result.active_set_bytes = active.storage_bytes();
  result.active = std::move(active);
  return out;
}

}  // namespace condgrad
