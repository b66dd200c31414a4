#pragma once

#include "condgrad/core.hpp"
#include "condgrad/trace.hpp"

#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace condgrad {

struct MebResult {
  std::vector<std::size_t> coreset_indices;
  Point center;
  double radius_sq = 0.0;
  Point dual_weights;
  double fw_gap = 0.0;
  std::int64_t iterations = 0;
  RunTrace trace;
};

/// Dual objective sum_i x_i ||a_i||^2 - ||sum_i x_i a_i||^2.
inline double meb_dual_value(const std::vector<Point>& points, const Point& x) {
  Point c = Point::Zero(points.front().size());
  double lin = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    c += x[static_cast<Eigen::Index>(i)] * points[i];
    lin += x[static_cast<Eigen::Index>(i)] * points[i].squaredNorm();
  }
  return lin - c.squaredNorm();
}

enum class MebVariant { fw, afw };

struct MebOptions {
  MebVariant variant = MebVariant::fw;
  std::int64_t max_iters = 10000000;
  /// Trace every k-th iteration; the final one is always recorded.
  std::int64_t record_every = 1;
};

namespace detail {

/// f(x + g d) = f(x) + g <grad, d> - g^2 ||A d||^2 with A d = a_j - c for
/// the FW direction and c - a_k for the away direction.
inline void meb_step(const std::vector<Point>& points, const std::vector<double>& grad, double gx, double gap,
                     std::size_t j, const Point& c, Point& x, MebVariant variant, double& last_step) {
  if (variant == MebVariant::afw) {
    std::size_t k = points.size();
    for (std::size_t i = 0; i < points.size(); ++i)
      if (x[static_cast<Eigen::Index>(i)] > 0.0 && (k == points.size() || grad[i] < grad[k])) k = i;
    const double away_gap = gx - grad[k];
    const double lambda = x[static_cast<Eigen::Index>(k)];
    if (away_gap > gap && lambda < 1.0) {
      const double gamma_max = lambda / (1.0 - lambda);
      const double curv = (points[k] - c).squaredNorm();
      const double gamma = curv > 0.0 ? std::clamp(away_gap / (2.0 * curv), 0.0, gamma_max) : gamma_max;
      x *= 1.0 + gamma;
      x[static_cast<Eigen::Index>(k)] = gamma == gamma_max ? 0.0 : x[static_cast<Eigen::Index>(k)] - gamma;
      last_step = gamma;
      return;
    }
  }
  const double curv = (points[j] - c).squaredNorm();
  const double gamma = curv > 0.0 ? std::clamp(gap / (2.0 * curv), 0.0, 1.0) : 1.0;
  x *= 1.0 - gamma;
  x[static_cast<Eigen::Index>(j)] += gamma;
  last_step = gamma;
}

}  // namespace detail

/// Maximizes the MEB dual over the simplex by FW with exact line search,
/// starting from e_0 (every f(e_i) is 0). Stops once the FW gap is at most
/// eps. The afw variant also moves weight away from the support point
/// nearest to the center. The trace reports f = -radius^2 so that it
/// decreases.
inline MebResult meb_coreset(const std::vector<Point>& points, double eps, const MebOptions& options = {}) {
  require(!points.empty(), "MEB needs at least one point");
  require(eps > 0.0, "eps must be positive");
  require(options.max_iters >= 0 && options.record_every >= 1, "need max_iters >= 0 and record_every >= 1");
  const std::int64_t max_iters = options.max_iters;
  const std::size_t m = points.size();
  const Eigen::Index n = points.front().size();
  for (const auto& a : points) require(a.size() == n && a.allFinite(), "MEB points must be finite and equal-sized");
  std::vector<double> sq(m);
  for (std::size_t i = 0; i < m; ++i) sq[i] = points[i].squaredNorm();

  Point x = Point::Zero(static_cast<Eigen::Index>(m));
  x[0] = 1.0;
  Point c = points[0];
  double lin = sq[0];
  MebResult out;
  Counters counters;
  std::vector<double> grad(m);
  double last_step = 0.0;
  for (std::int64_t t = 0;; ++t) {
    // Center recomputed from the weights so it cannot drift.
    c.setZero();
    lin = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double w = x[static_cast<Eigen::Index>(i)];
      if (w == 0.0) continue;
      c += w * points[i];
      lin += w * sq[i];
    }
    double gx = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      grad[i] = sq[i] - 2.0 * points[i].dot(c);
      gx += x[static_cast<Eigen::Index>(i)] * grad[i];
    }
    const std::size_t j = argmax_index(grad);
    const double gap = grad[j] - gx;
    const double f = lin - c.squaredNorm();
    ++counters.foo;
    ++counters.lmo;
    const bool done = gap <= eps || t == max_iters;
    if (!done && t % options.record_every != 0) {
      detail::meb_step(points, grad, gx, gap, j, c, x, options.variant, last_step);
      continue;
    }
    TraceRow row;
    row.t = t;
    row.f = -f;
    row.fw_gap = gap;
    row.primal_gap = gap;
    row.step_size = last_step;
    row.lmo_calls = counters.lmo;
    row.foo_calls = counters.foo;
    out.trace.rows.push_back(row);
    if (done) {
      out.fw_gap = gap;
      out.iterations = t;
      out.radius_sq = f;
      break;
    }
    detail::meb_step(points, grad, gx, gap, j, c, x, options.variant, last_step);
  }
  out.center = c;
  out.dual_weights = x;
  for (std::size_t i = 0; i < m; ++i)
    if (x[static_cast<Eigen::Index>(i)] > 1e-12) out.coreset_indices.push_back(i);
  out.trace.rows.back().active_set_size = static_cast<std::int64_t>(out.coreset_indices.size());
  return out;
}

/// Reads whitespace-separated rows, one point per line; blank lines and
/// lines starting with '#' are skipped.
inline std::vector<Point> load_points(std::istream& is) {
  std::vector<Point> points;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::vector<double> vals;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ContractViolation("point file line " + std::to_string(lineno) + ": bad number '" + tok + "'");
      }
    }
    if (!points.empty() && static_cast<Eigen::Index>(vals.size()) != points.front().size())
      throw ContractViolation("point file line " + std::to_string(lineno) + ": wrong number of coordinates");
    points.push_back(Eigen::Map<const Point>(vals.data(), static_cast<Eigen::Index>(vals.size())));
  }
  if (points.empty()) throw ContractViolation("point file has no points");
  return points;
}

}  // namespace condgrad
