#pragma once

#include "condgrad/core.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <memory>
#include <utility>

namespace condgrad {

/// f(x) = x'Hx/2 + <b, x> + c with H symmetric PSD.
inline Objective quadratic_objective(Eigen::MatrixXd H, Point b, double c = 0.0) {
  require(H.rows() == H.cols() && H.rows() == b.size(), "quadratic: shape mismatch");
  auto h = std::make_shared<const Eigen::MatrixXd>(std::move(H));
  auto lin = std::make_shared<const Point>(std::move(b));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(*h, Eigen::EigenvaluesOnly);
  Objective obj;
  obj.value = [h, lin, c](const Point& x) { return 0.5 * x.dot(*h * x) + lin->dot(x) + c; };
  obj.gradient = [h, lin](const Point& x) -> Point { return *h * x + *lin; };
  obj.curvature = [h](const Point& d) { return d.dot(*h * d); };
  obj.smoothness = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  obj.strong_convexity = std::max(eig.eigenvalues().minCoeff(), 0.0);
  return obj;
}

/// f(x) = scale * ||x - u||_2^2.
inline Objective squared_distance(Point u, double scale = 1.0) {
  require(scale > 0.0, "scale must be positive");
  auto target = std::make_shared<const Point>(std::move(u));
  Objective obj;
  obj.value = [target, scale](const Point& x) { return scale * (x - *target).squaredNorm(); };
  obj.gradient = [target, scale](const Point& x) -> Point { return 2.0 * scale * (x - *target); };
  obj.curvature = [scale](const Point& d) { return 2.0 * scale * d.squaredNorm(); };
  obj.smoothness = 2.0 * scale;
  obj.strong_convexity = 2.0 * scale;
  return obj;
}

/// f(x) = ||x - u||_p^2 for p >= 2; smooth with L = 2(p - 1).
inline Objective lp_distance_squared(Point u, double p) {
  require(p >= 2.0 && std::isfinite(p), "lp distance needs finite p >= 2");
  if (p == 2.0) return squared_distance(std::move(u));
  auto target = std::make_shared<const Point>(std::move(u));
  Objective obj;
  obj.value = [target, p](const Point& x) {
    const Eigen::ArrayXd y = (x - *target).cwiseAbs().array();
    const double s = y.maxCoeff();
    if (s == 0.0) return 0.0;
    const double n = s * std::pow((y / s).pow(p).sum(), 1.0 / p);
    return n * n;
  };
  obj.gradient = [target, p](const Point& x) -> Point {
    const Point y = x - *target;
    const double s = y.cwiseAbs().maxCoeff();
    if (s == 0.0) return Point::Zero(y.size());
    const Eigen::ArrayXd r = (y / s).array();
    const double sum = r.abs().pow(p).sum();
    // 2 ||y||^{2-p} |y_i|^{p-1} sign(y_i), evaluated on the rescaled vector.
    const double norm_r = std::pow(sum, 1.0 / p);
    Point g(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sgn = r[i] > 0.0 ? 1.0 : (r[i] < 0.0 ? -1.0 : 0.0);
      g[i] = 2.0 * s * std::pow(norm_r, 2.0 - p) * std::pow(std::abs(r[i]), p - 1.0) * sgn;
    }
    return g;
  };
  obj.smoothness = 2.0 * (p - 1.0);
  return obj;
}

/// Mean logistic loss (1/m) sum log(1 + exp(-y_i <a_i, x>)) + reg ||x||^2 / 2.
inline Objective logistic_objective(Eigen::MatrixXd A, Point y, double reg = 0.0) {
  require(A.rows() == y.size() && A.rows() >= 1, "logistic: shape mismatch");
  const double m = static_cast<double>(A.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const double smax = svd.singularValues()(0);
  auto data = std::make_shared<const std::pair<Eigen::MatrixXd, Point>>(std::move(A), std::move(y));
  Objective obj;
  obj.value = [data, m, reg](const Point& x) {
    const Eigen::ArrayXd z = -(data->second.array() * (data->first * x).array());
    double total = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i)
      total += z[i] > 0.0 ? z[i] + std::log1p(std::exp(-z[i])) : std::log1p(std::exp(z[i]));
    return total / m + 0.5 * reg * x.squaredNorm();
  };
  obj.gradient = [data, m, reg](const Point& x) -> Point {
    const Eigen::ArrayXd z = -(data->second.array() * (data->first * x).array());
    Point w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double sig = z[i] >= 0.0 ? 1.0 / (1.0 + std::exp(-z[i])) : std::exp(z[i]) / (1.0 + std::exp(z[i]));
      w[i] = -data->second[i] * sig;
    }
    return data->first.transpose() * w / m + reg * x;
  };
  obj.smoothness = smax * smax / (4.0 * m) + reg;
  obj.strong_convexity = reg;
  return obj;
}

/// Separable nonconvex f(x) = sum_i a_i cos(w_i x_i) + c_i x_i with
/// L = max_i |a_i| w_i^2. Global minimum over a box is computable per
/// coordinate (see separable_cosine_minimum).
struct SeparableCosine {
  Point a, w, c;

  Objective objective() const {
    auto self = std::make_shared<const SeparableCosine>(*this);
    Objective obj;
    obj.value = [self](const Point& x) {
      return (self->a.array() * (self->w.array() * x.array()).cos()).sum() + self->c.dot(x);
    };
    obj.gradient = [self](const Point& x) -> Point {
      return (-(self->a.array() * self->w.array() * (self->w.array() * x.array()).sin()) + self->c.array())
          .matrix();
    };
    obj.smoothness = (a.cwiseAbs().array() * w.array().square()).maxCoeff();
    obj.convex = false;
    return obj;
  }

  /// Minimum of coordinate i over [lo, hi]: dense scan then local refinement
  /// between neighbouring grid points.
  double coordinate_minimum(Eigen::Index i, double lo, double hi) const {
    const auto phi = [&](double t) { return a[i] * std::cos(w[i] * t) + c[i] * t; };
    const int n = 20000;
    double best_t = lo, best = phi(lo);
    for (int k = 1; k <= n; ++k) {
      const double t = lo + (hi - lo) * k / n;
      const double v = phi(t);
      if (v < best) {
        best = v;
        best_t = t;
      }
    }
    double l = std::max(lo, best_t - (hi - lo) / n), r = std::min(hi, best_t + (hi - lo) / n);
    for (int k = 0; k < 200; ++k) {
      const double m1 = l + (r - l) / 3.0, m2 = r - (r - l) / 3.0;
      if (phi(m1) <= phi(m2)) r = m2; else l = m1;
    }
    return std::min(best, phi(0.5 * (l + r)));
  }

  double box_minimum(const Point& lower, const Point& upper) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) total += coordinate_minimum(i, lower[i], upper[i]);
    return total;
  }
};

/// A nonsmooth convex scalar function applied coordinatewise, with its prox.
struct NonsmoothPart {
  enum class Kind { abs, shifted_abs, hinge };
  Kind kind = Kind::abs;
  double shift = 0.0;

  double value(const Point& y) const {
    switch (kind) {
      case Kind::abs: return y.lpNorm<1>();
      case Kind::shifted_abs: return (y.array() - shift).abs().sum();
      case Kind::hinge: return y.array().max(0.0).sum();
    }
    return 0.0;
  }

  /// prox_{beta g}(y) = argmin_z g(z) + ||z - y||^2 / (2 beta).
  Point prox(const Point& y, double beta) const {
    require(beta > 0.0, "prox parameter must be positive");
    Point z(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      switch (kind) {
        case Kind::abs: z[i] = soft_threshold(y[i], beta); break;
        case Kind::shifted_abs: z[i] = shift + soft_threshold(y[i] - shift, beta); break;
        case Kind::hinge:
          z[i] = y[i] > beta ? y[i] - beta : (y[i] < 0.0 ? y[i] : 0.0);
          break;
      }
    }
    return z;
  }

  /// Lipschitz constant of g per coordinate.
  double lipschitz() const { return 1.0; }

 private:
  static double soft_threshold(double v, double beta) {
    if (v > beta) return v - beta;
    if (v < -beta) return v + beta;
    return 0.0;
  }
};

}  // namespace condgrad
