#pragma once

#include "condgrad/fw.hpp"
#include "condgrad/sliding.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>

namespace condgrad {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based stream keyed by (seed, t, j): the same key always yields
/// the same numbers, independent of evaluation order. Satisfies
/// UniformRandomBitGenerator, so <random> distributions apply.
class SampleStream {
 public:
  using result_type = std::uint64_t;

  SampleStream(std::uint64_t seed, std::uint64_t t, std::uint64_t j) {
    std::uint64_t s = seed;
    state_ = splitmix64(s);
    s ^= t * 0xd1b54a32d192ed03ULL;
    state_ ^= splitmix64(s);
    s ^= j * 0xaef17502108ef2d9ULL;
    state_ ^= splitmix64(s);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return splitmix64(state_); }

 private:
  std::uint64_t state_ = 0;
};

/// Stochastic first-order oracle: draw a realization z, then evaluate
/// grad F(x, z). Splitting the two lets difference estimators reuse z.
struct StochasticOracle {
  std::function<Point(SampleStream&)> draw;
  std::function<Point(const Point&, const Point&)> sample;
  std::function<Point(const Point&)> exact_gradient;
  std::optional<double> variance_bound;
};

/// F(x, z) = x'(A + diag z)x/2 + (b + z)'x with z ~ N(0, s^2 I), i.e.
/// grad F = grad f(x) + z o (x + 1). variance_bound = s^2 sup ||x + 1||^2,
/// the supremum supplied by the caller.
inline StochasticOracle gaussian_quadratic_oracle(const Objective& f, Eigen::Index n, double s,
                                                  double sup_norm_sq) {
  require(s >= 0.0, "noise scale must be non-negative");
  StochasticOracle o;
  const auto grad = f.gradient;
  o.draw = [n, s](SampleStream& rng) -> Point {
    Point z(n);
    if (s == 0.0) {
      z.setZero();
      return z;
    }
    std::normal_distribution<double> normal(0.0, s);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
    return z;
  };
  o.sample = [grad, s](const Point& x, const Point& z) -> Point {
    if (s == 0.0) return grad(x);
    return grad(x) + (z.array() * (x.array() + 1.0)).matrix();
  };
  o.exact_gradient = grad;
  o.variance_bound = s * s * sup_norm_sq;
  return o;
}

/// Finite sum (1/m) sum_i f_i with uniform index sampling; the exact
/// gradient is a full pass.
inline StochasticOracle finite_sum_oracle(std::vector<std::function<Point(const Point&)>> components) {
  require(!components.empty(), "finite sum needs components");
  auto comps = std::make_shared<const std::vector<std::function<Point(const Point&)>>>(std::move(components));
  StochasticOracle o;
  o.draw = [comps](SampleStream& rng) -> Point {
    std::uniform_int_distribution<std::size_t> pick(0, comps->size() - 1);
    Point z(1);
    z[0] = static_cast<double>(pick(rng));
    return z;
  };
  o.sample = [comps](const Point& x, const Point& z) -> Point {
    return (*comps)[static_cast<std::size_t>(z[0])](x);
  };
  o.exact_gradient = [comps](const Point& x) -> Point {
    Point g = (*comps)[0](x);
    for (std::size_t i = 1; i < comps->size(); ++i) g += (*comps)[i](x);
    return g / static_cast<double>(comps->size());
  };
  return o;
}

enum class EstimatorVariant { batch_mean, momentum, spider, svrf, one_sample };

inline const char* estimator_name(EstimatorVariant v) {
  switch (v) {
    case EstimatorVariant::batch_mean: return "sfw";
    case EstimatorVariant::momentum: return "momentum";
    case EstimatorVariant::spider: return "spider";
    case EstimatorVariant::svrf: return "svrf";
    case EstimatorVariant::one_sample: return "one_sample";
  }
  return "unknown";
}

/// Batch sizes and weights; defaults follow the convergence theorems.
struct StochasticSchedule {
  double alpha = 1.0;           // batch_mean: b_t = ceil((t+2)^2 / alpha)
  std::optional<std::int64_t> fixed_batch;  // overrides every b_t
  double L = 1.0;               // spider checkpoint batches
  double D = 1.0;
  double sigma_sq = 0.0;
  std::int64_t batch_cap = 1000000;
};

/// s_k = 2^k - 1.
inline bool is_checkpoint(std::int64_t t) { return ((t + 1) & t) == 0; }

/// Number of samples drawn by `variant` at iteration t.
inline std::int64_t batch_size(EstimatorVariant variant, std::int64_t t, const StochasticSchedule& s) {
  if (s.fixed_batch) return *s.fixed_batch;
  const double tt = static_cast<double>(t);
  switch (variant) {
    case EstimatorVariant::batch_mean:
      return static_cast<std::int64_t>(std::ceil((tt + 2.0) * (tt + 2.0) / s.alpha));
    case EstimatorVariant::momentum:
    case EstimatorVariant::one_sample: return 1;
    case EstimatorVariant::spider:
      if (is_checkpoint(t)) {
        const double b = std::ceil(s.sigma_sq * (tt + 1.0) * (tt + 1.0) / (s.L * s.L * s.D * s.D));
        return std::clamp<std::int64_t>(static_cast<std::int64_t>(b), 1, s.batch_cap);
      }
      return 6 * (t + 1);
    case EstimatorVariant::svrf: return is_checkpoint(t) ? 0 : 48 * (t + 2);
  }
  return 1;
}

/// Oracle evaluations (grad F calls) at iteration t; difference terms cost two.
inline std::int64_t evaluations_at(EstimatorVariant variant, std::int64_t t, const StochasticSchedule& s) {
  const std::int64_t b = batch_size(variant, t, s);
  switch (variant) {
    case EstimatorVariant::batch_mean:
    case EstimatorVariant::momentum: return b;
    case EstimatorVariant::spider: return is_checkpoint(t) ? b : 2 * b;
    case EstimatorVariant::svrf: return 2 * b;
    case EstimatorVariant::one_sample: return t == 0 ? 1 : 2;
  }
  return b;
}

/// Carried estimator state.
struct EstimatorState {
  EstimatorVariant variant = EstimatorVariant::batch_mean;
  Point estimate;
  Point snapshot;           // svrf: x at the last checkpoint
  Point snapshot_gradient;  // svrf: exact gradient there
  bool initialized = false;
};

struct Estimate {
  Point gradient;
  std::int64_t samples = 0;      // realizations z drawn
  std::int64_t evaluations = 0;  // grad F calls
  std::int64_t exact_calls = 0;  // exact gradients (svrf snapshots)
};

namespace detail {

/// Running mean of grad F(x, z_j) over j < b; exact for identical terms.
template <typename F>
Point running_mean(std::int64_t b, F&& term) {
  Point m = term(0);
  for (std::int64_t j = 1; j < b; ++j) m += (term(j) - m) / static_cast<double>(j + 1);
  return m;
}

}  // namespace detail

/// One estimator call. Samples for iteration t come from the streams
/// (seed, t, j), j = 0..b-1; difference terms evaluate both points on the
/// same z_j.
inline Estimate estimate_gradient(EstimatorState& state, const StochasticOracle& oracle, const Point& x_t,
                                  const Point& x_prev, std::int64_t t, std::uint64_t seed,
                                  const StochasticSchedule& schedule) {
  Estimate out;
  const std::int64_t b = batch_size(state.variant, t, schedule);
  const auto z_at = [&](std::int64_t j) {
    SampleStream rng(seed, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(j));
    return oracle.draw(rng);
  };
  switch (state.variant) {
    case EstimatorVariant::batch_mean: {
      require(b >= 1, "batch size must be positive");
      out.gradient = detail::running_mean(b, [&](std::int64_t j) { return oracle.sample(x_t, z_at(j)); });
      out.samples = b;
      out.evaluations = b;
      break;
    }
    case EstimatorVariant::momentum: {
      const double rho = 4.0 / std::pow(static_cast<double>(t) + 8.0, 2.0 / 3.0);
      const Point s = oracle.sample(x_t, z_at(0));
      out.gradient = state.initialized && rho < 1.0 ? Point((1.0 - rho) * state.estimate + rho * s) : s;
      out.samples = 1;
      out.evaluations = 1;
      break;
    }
    case EstimatorVariant::spider: {
      if (is_checkpoint(t) || !state.initialized) {
        out.gradient = detail::running_mean(b, [&](std::int64_t j) { return oracle.sample(x_t, z_at(j)); });
        out.evaluations = b;
      } else {
        // (est - mean grad F(x_prev, z)) + mean grad F(x_t, z), same z_j.
        std::vector<Point> zs;
        zs.reserve(static_cast<std::size_t>(b));
        for (std::int64_t j = 0; j < b; ++j) zs.push_back(z_at(j));
        const Point m_prev = detail::running_mean(b, [&](std::int64_t j) { return oracle.sample(x_prev, zs[j]); });
        const Point m_cur = detail::running_mean(b, [&](std::int64_t j) { return oracle.sample(x_t, zs[j]); });
        out.gradient = (state.estimate - m_prev) + m_cur;
        out.evaluations = 2 * b;
      }
      out.samples = b;
      break;
    }
    case EstimatorVariant::svrf: {
      if (!oracle.exact_gradient) throw CapabilityError("SVRF needs an exact gradient oracle");
      if (is_checkpoint(t) || !state.initialized) {
        state.snapshot = x_t;
        state.snapshot_gradient = oracle.exact_gradient(x_t);
        out.gradient = state.snapshot_gradient;
        out.exact_calls = 1;
      } else {
        std::vector<Point> zs;
        zs.reserve(static_cast<std::size_t>(b));
        for (std::int64_t j = 0; j < b; ++j) zs.push_back(z_at(j));
        const Point m_snap =
            detail::running_mean(b, [&](std::int64_t j) { return oracle.sample(state.snapshot, zs[j]); });
        const Point m_cur = detail::running_mean(b, [&](std::int64_t j) { return oracle.sample(x_t, zs[j]); });
        out.gradient = (state.snapshot_gradient - m_snap) + m_cur;
        out.samples = b;
        out.evaluations = 2 * b;
      }
      break;
    }
    case EstimatorVariant::one_sample: {
      const Point z = z_at(0);
      const Point s_cur = oracle.sample(x_t, z);
      if (!state.initialized || t == 0) {
        out.gradient = s_cur;
        out.evaluations = 1;
      } else {
        const double rho = 1.0 / static_cast<double>(t);
        const Point s_prev = oracle.sample(x_prev, z);
        out.gradient = (1.0 - rho) * (state.estimate - s_prev) + s_cur;
        out.evaluations = 2;
      }
      out.samples = 1;
      break;
    }
  }
  state.estimate = out.gradient;
  state.initialized = true;
  return out;
}

/// Step size schedule matching each estimator's theorem.
inline double stochastic_step(EstimatorVariant variant, std::int64_t t) {
  switch (variant) {
    case EstimatorVariant::momentum: return open_loop_step(t, 7);
    case EstimatorVariant::one_sample: return 1.0 / (static_cast<double>(t) + 1.0);
    default: return open_loop_step(t, 2);
  }
}

/// Stochastic Frank-Wolfe family. `objective` is only used for reporting
/// (f and the gap column, uncounted); the algorithm sees the oracle.
template <typename Region>
RunResult run_stochastic_fw(EstimatorVariant variant, const Objective& objective, const StochasticOracle& oracle,
                            const Region& region, const RunConfig& config, const StochasticSchedule& schedule) {
  detail::check_config(config);
  RunResult result;
  Counters& c = result.counters;
  Point x = detail::start_point(objective, region, config, c);
  Point x_prev = x;
  EstimatorState state;
  state.variant = variant;
  TraceRecorder rec(objective, config.record_every, config.record_time, config.observer);
  double last_step = 0.0;
  for (std::int64_t t = 0;; ++t) {
    const Point g_true = objective.checked_gradient(x);
    const double gap = g_true.dot(x - region.lmo(g_true));
    const bool done = gap <= config.tol;
    rec.record(t, x, gap, last_step, c, 0, done || t == config.max_iters);
    if (done) {
      result.converged = true;
      break;
    }
    if (t == config.max_iters) break;
    const Estimate est = estimate_gradient(state, oracle, x, x_prev, t, config.seed, schedule);
    c.sfo += est.evaluations;
    c.foo += est.exact_calls;
    if (!est.gradient.allFinite()) throw NumericFailure("non-finite gradient estimate");
    const Point v = region.lmo(est.gradient);
    ++c.lmo;
    const double gamma = std::min(stochastic_step(variant, t), 1.0);
    x_prev = x;
    x = detail::fw_update(x, v, gamma);
    ++c.fw_steps;
    last_step = gamma;
  }
  result.trace = rec.take();
  result.x = std::move(x);
  return result;
}

/// SCGS batch size b_t = ceil(sigma^2 (t+3)^3 / (L D)^2), at least 1.
inline std::int64_t scgs_batch(std::int64_t t, double sigma_sq, double L, double D, std::int64_t cap) {
  const double tt = static_cast<double>(t) + 3.0;
  const double b = std::ceil(sigma_sq * tt * tt * tt / (L * L * D * D));
  return std::clamp<std::int64_t>(static_cast<std::int64_t>(b), 1, cap);
}

struct ScgsOptions {
  std::optional<double> sigma_sq;  // defaults to the oracle's variance bound
  std::int64_t batch_cap = 1000000;
  /// Use the deterministic CGS learning rate 3L/(t+2) instead of 4L/(t+3).
  bool cgs_learning_rate = false;
};

/// Stochastic conditional gradient sliding: gamma = 3/(t+3), eta = 4L/(t+3),
/// beta = L D^2 / ((t+1)(t+2)), batch-mean gradients at w_t. Rows report x_t.
template <typename Region>
RunResult run_scgs(const Objective& objective, const StochasticOracle& oracle, const Region& region,
                   const RunConfig& config, const ScgsOptions& options = {}) {
  detail::check_config(config);
  const double L = detail::smoothness_of(objective, config);
  const double D = region.diameter();
  const double var = options.sigma_sq ? *options.sigma_sq : oracle.variance_bound.value_or(0.0);
  const std::int64_t batch_cap = options.batch_cap;
  RunResult result;
  Counters& c = result.counters;
  Point x = detail::start_point(objective, region, config, c);
  Point y = x;
  TraceRecorder rec(objective, config.record_every, config.record_time, config.observer);
  double last_step = 0.0;
  for (std::int64_t t = 0;; ++t) {
    const Point gx = objective.checked_gradient(x);
    const double gap = gx.dot(x - region.lmo(gx));
    const bool done = gap <= config.tol;
    rec.record(t, x, gap, last_step, c, 0, done || t == config.max_iters);
    if (done) {
      result.converged = true;
      break;
    }
    if (t == config.max_iters) break;
    const double tt = static_cast<double>(t);
    const CgsParams p = cgs_standard_params(t, L, D);
    const double gamma = p.gamma;
    const double eta = options.cgs_learning_rate ? p.eta : 4.0 * L / (tt + 3.0);
    const double beta = p.beta;
    const std::int64_t b = scgs_batch(t, var, L, D, batch_cap);
    const Point w = (1.0 - gamma) * x + gamma * y;
    const Point g = detail::running_mean(b, [&](std::int64_t j) {
      SampleStream rng(config.seed, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(j));
      return oracle.sample(w, oracle.draw(rng));
    });
    c.sfo += b;
    y = cg_projection(g, y, eta, beta, region, &c);
    x = x + gamma * (y - x);
    ++c.fw_steps;
    last_step = gamma;
  }
  result.trace = rec.take();
  result.x = std::move(x);
  return result;
}

}  // namespace condgrad
