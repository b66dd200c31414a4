#pragma once

#include "condgrad/core.hpp"
#include "condgrad/hungarian.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace condgrad {

namespace detail {

/// Lawson-Hanson non-negative least squares: argmin ||A z - b|| over z >= 0.
inline Point nnls(const Eigen::MatrixXd& A, const Point& b) {
  const Eigen::Index m = A.cols();
  Point z = Point::Zero(m);
  std::vector<bool> passive(static_cast<std::size_t>(m), false);
  const double eps = 1e-14 * std::max(1.0, A.cwiseAbs().maxCoeff());
  const auto solve_passive = [&] {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < m; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
    const Point sp = Ap.colPivHouseholderQr().solve(b);
    Point s = Point::Zero(m);
    for (std::size_t k = 0; k < idx.size(); ++k) s[idx[k]] = sp[static_cast<Eigen::Index>(k)];
    return s;
  };
  for (Eigen::Index outer = 0; outer < 3 * m + 10; ++outer) {
    const Point w = A.transpose() * (b - A * z);
    Eigen::Index j = -1;
    double best = eps;
    for (Eigen::Index i = 0; i < m; ++i)
      if (!passive[static_cast<std::size_t>(i)] && w[i] > best) {
        best = w[i];
        j = i;
      }
    if (j < 0) break;
    passive[static_cast<std::size_t>(j)] = true;
    Point s = solve_passive();
    for (Eigen::Index inner = 0; inner < 3 * m + 10; ++inner) {
      double alpha = 1.0;
      bool clipped = false;
      for (Eigen::Index i = 0; i < m; ++i)
        if (passive[static_cast<std::size_t>(i)] && s[i] <= 0.0) {
          alpha = std::min(alpha, z[i] / (z[i] - s[i]));
          clipped = true;
        }
      if (!clipped) break;
      z += alpha * (s - z);
      for (Eigen::Index i = 0; i < m; ++i)
        if (passive[static_cast<std::size_t>(i)] && z[i] <= eps) {
          passive[static_cast<std::size_t>(i)] = false;
          z[i] = 0.0;
        }
      s = solve_passive();
    }
    z = s;
  }
  return z;
}

}  // namespace detail

/// Anything that answers linear minimization queries. Runners are templated
/// on this so tests can wrap an oracle (inexact answers, call counting).
template <typename R>
concept LinearOracle = requires(const R& r, const Point& c) {
  { r.lmo(c) } -> std::convertible_to<Point>;
  { r.diameter() } -> std::convertible_to<double>;
  { r.dimension() } -> std::convertible_to<Eigen::Index>;
};

enum class RegionKind {
  simplex,
  l1_ball,
  lp_ball,
  box,
  hypercube01,
  nuclear_ball,
  birkhoff,
  vertex_hull,
};

inline const char* region_kind_name(RegionKind kind) {
  switch (kind) {
    case RegionKind::simplex: return "simplex";
    case RegionKind::l1_ball: return "l1_ball";
    case RegionKind::lp_ball: return "lp_ball";
    case RegionKind::box: return "box";
    case RegionKind::hypercube01: return "hypercube01";
    case RegionKind::nuclear_ball: return "nuclear_ball";
    case RegionKind::birkhoff: return "birkhoff";
    case RegionKind::vertex_hull: return "vertex_hull";
  }
  return "unknown";
}

/// Compact convex sets with exact linear minimization oracles.
class FeasibleRegion {
 public:
  static FeasibleRegion simplex(Eigen::Index n) {
    require(n >= 1, "simplex dimension must be positive");
    FeasibleRegion r(RegionKind::simplex, n);
    return r;
  }

  static FeasibleRegion l1_ball(Eigen::Index n, double radius) {
    require(n >= 1 && radius > 0.0, "l1 ball needs n >= 1 and radius > 0");
    FeasibleRegion r(RegionKind::l1_ball, n);
    r.radius_ = radius;
    return r;
  }

  static FeasibleRegion lp_ball(Eigen::Index n, double radius, double p) {
    require(n >= 1 && radius > 0.0, "lp ball needs n >= 1 and radius > 0");
    require(p >= 1.0, "lp ball needs p >= 1");
    if (p == 1.0) return l1_ball(n, radius);
    FeasibleRegion r(RegionKind::lp_ball, n);
    r.radius_ = radius;
    r.p_ = p;
    return r;
  }

  static FeasibleRegion box(Point lower, Point upper) {
    require(lower.size() == upper.size() && lower.size() >= 1, "box bounds must match");
    require((lower.array() <= upper.array()).all(), "box needs lower <= upper");
    FeasibleRegion r(RegionKind::box, lower.size());
    r.lower_ = std::move(lower);
    r.upper_ = std::move(upper);
    return r;
  }

  static FeasibleRegion hypercube01(Eigen::Index n) {
    require(n >= 1, "hypercube dimension must be positive");
    return FeasibleRegion(RegionKind::hypercube01, n);
  }

  static FeasibleRegion nuclear_ball(Eigen::Index rows, Eigen::Index cols, double radius) {
    require(rows >= 1 && cols >= 1 && radius > 0.0, "nuclear ball needs positive shape and radius");
    FeasibleRegion r(RegionKind::nuclear_ball, rows * cols);
    r.rows_ = rows;
    r.cols_ = cols;
    r.radius_ = radius;
    return r;
  }

  static FeasibleRegion birkhoff(Eigen::Index n) {
    require(n >= 1, "Birkhoff polytope needs n >= 1");
    FeasibleRegion r(RegionKind::birkhoff, n * n);
    r.rows_ = n;
    r.cols_ = n;
    return r;
  }

  /// Convex hull of an explicit vertex list (all vertices extreme).
  static FeasibleRegion vertex_hull(std::vector<Point> vertices) {
    require(!vertices.empty(), "vertex hull needs at least one vertex");
    const auto n = vertices.front().size();
    for (const auto& v : vertices) require(v.size() == n, "vertex dimensions differ");
    FeasibleRegion r(RegionKind::vertex_hull, n);
    r.vertices_ = std::move(vertices);
    return r;
  }

  RegionKind kind() const { return kind_; }
  const char* name() const { return region_kind_name(kind_); }
  Eigen::Index dimension() const { return dim_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  double radius() const { return radius_; }
  double p() const { return p_; }

  bool is_01_polytope() const {
    return kind_ == RegionKind::simplex || kind_ == RegionKind::hypercube01 ||
           kind_ == RegionKind::birkhoff;
  }

  /// Euclidean diameter (exact closed forms).
  double diameter() const {
    switch (kind_) {
      case RegionKind::simplex: return dim_ >= 2 ? std::sqrt(2.0) : 0.0;
      case RegionKind::l1_ball: return 2.0 * radius_;
      case RegionKind::lp_ball: {
        if (p_ <= 2.0) return 2.0 * radius_;
        const double q = std::isinf(p_) ? 0.0 : 1.0 / p_;
        return 2.0 * radius_ * std::pow(static_cast<double>(dim_), 0.5 - q);
      }
      case RegionKind::box: return (upper_ - lower_).norm();
      case RegionKind::hypercube01: return std::sqrt(static_cast<double>(dim_));
      case RegionKind::nuclear_ball: return 2.0 * radius_;
      case RegionKind::birkhoff: return rows_ >= 2 ? std::sqrt(2.0 * static_cast<double>(rows_)) : 0.0;
      case RegionKind::vertex_hull: {
        double d = 0.0;
        for (std::size_t i = 0; i < vertices_.size(); ++i)
          for (std::size_t j = i + 1; j < vertices_.size(); ++j)
            d = std::max(d, (vertices_[i] - vertices_[j]).norm());
        return d;
      }
    }
    return 0.0;
  }

  /// Extreme point minimizing <c, .>. Ties go to the lowest index.
  Point lmo(const Point& c) const {
    require(c.size() == dim_, "cost vector has the wrong dimension");
    if (!c.allFinite()) throw NumericFailure("non-finite LMO cost");
    switch (kind_) {
      case RegionKind::simplex: {
        Point v = Point::Zero(dim_);
        v[static_cast<Eigen::Index>(argmin_index(c))] = 1.0;
        return v;
      }
      case RegionKind::l1_ball: {
        Point v = Point::Zero(dim_);
        const auto k = static_cast<Eigen::Index>(argmax_index(c.cwiseAbs()));
        v[k] = c[k] < 0.0 ? radius_ : -radius_;
        return v;
      }
      case RegionKind::lp_ball: return lp_lmo(c);
      case RegionKind::box: {
        Point v(dim_);
        for (Eigen::Index i = 0; i < dim_; ++i) v[i] = c[i] < 0.0 ? upper_[i] : lower_[i];
        return v;
      }
      case RegionKind::hypercube01: {
        Point v(dim_);
        for (Eigen::Index i = 0; i < dim_; ++i) v[i] = c[i] < 0.0 ? 1.0 : 0.0;
        return v;
      }
      case RegionKind::nuclear_ball: return nuclear_lmo(c);
      case RegionKind::birkhoff: {
        const auto perm = hungarian_assignment(as_matrix(c));
        return permutation_point(perm);
      }
      case RegionKind::vertex_hull: {
        std::vector<double> vals(vertices_.size());
        for (std::size_t i = 0; i < vertices_.size(); ++i) vals[i] = c.dot(vertices_[i]);
        return vertices_[argmin_index(vals)];
      }
    }
    throw CapabilityError("unknown region kind");
  }

  /// Exhaustive vertex list for small polyhedral regions.
  std::vector<Point> enumerate_vertices() const {
    std::vector<Point> out;
    switch (kind_) {
      case RegionKind::simplex:
        if (dim_ > 100000) break;
        for (Eigen::Index i = 0; i < dim_; ++i) out.push_back(Point::Unit(dim_, i));
        return out;
      case RegionKind::l1_ball:
        if (dim_ > 50000) break;
        for (Eigen::Index i = 0; i < dim_; ++i) {
          out.push_back(radius_ * Point::Unit(dim_, i));
          out.push_back(-radius_ * Point::Unit(dim_, i));
        }
        return out;
      case RegionKind::hypercube01:
      case RegionKind::box:
        if (dim_ > 16) break;
        for (std::uint32_t mask = 0; mask < (1u << dim_); ++mask) {
          Point v(dim_);
          for (Eigen::Index i = 0; i < dim_; ++i) {
            const bool hi = (mask >> i) & 1u;
            v[i] = kind_ == RegionKind::box ? (hi ? upper_[i] : lower_[i]) : (hi ? 1.0 : 0.0);
          }
          out.push_back(std::move(v));
        }
        if (kind_ == RegionKind::box) dedupe(out);
        return out;
      case RegionKind::birkhoff: {
        if (rows_ > 5) break;
        std::vector<int> perm(static_cast<std::size_t>(rows_));
        std::iota(perm.begin(), perm.end(), 0);
        do {
          out.push_back(permutation_point(perm));
        } while (std::next_permutation(perm.begin(), perm.end()));
        return out;
      }
      case RegionKind::vertex_hull:
        out = vertices_;
        dedupe(out);
        return out;
      case RegionKind::lp_ball:
      case RegionKind::nuclear_ball:
        break;
    }
    throw CapabilityError(std::string("vertex enumeration unsupported for ") + name());
  }

  bool supports_nep() const {
    return is_01_polytope() || kind_ == RegionKind::l1_ball || kind_ == RegionKind::nuclear_ball ||
           kind_ == RegionKind::vertex_hull || (kind_ == RegionKind::lp_ball && p_ == 2.0);
  }

  /// Nearest-extreme-point oracle: argmin over extreme points v of
  /// <c, v> + lambda * ||v - x||^2.
  Point nep(const Point& c, double lambda, const Point& x) const {
    require(lambda >= 0.0, "NEP weight must be non-negative");
    require(x.size() == dim_, "NEP anchor has the wrong dimension");
    if (lambda == 0.0 && supports_nep()) return lmo(c);
    if (is_01_polytope()) {
      // ||v||^2 = <v, 1> on 0/1 vertices.
      return lmo(c + lambda * (Point::Ones(dim_) - 2.0 * x));
    }
    if (kind_ == RegionKind::vertex_hull) {
      std::vector<double> vals(vertices_.size());
      for (std::size_t i = 0; i < vertices_.size(); ++i)
        vals[i] = c.dot(vertices_[i]) + lambda * (vertices_[i] - x).squaredNorm();
      return vertices_[argmin_index(vals)];
    }
    if (supports_nep()) {
      // Extreme points lie on a sphere around the origin.
      return lmo(c - 2.0 * lambda * x);
    }
    throw CapabilityError(std::string("NEP oracle unsupported for ") + name());
  }

  bool supports_face_oracle() const { return is_01_polytope(); }

  /// argmax_{v in minimal face of x} <g, v>, for the simplex-like 0/1 polytopes.
  Point face_away_vertex(const Point& g, const Point& x) const {
    require(g.size() == dim_ && x.size() == dim_, "face oracle: dimension mismatch");
    switch (kind_) {
      case RegionKind::simplex: {
        Eigen::Index best = -1;
        for (Eigen::Index i = 0; i < dim_; ++i)
          if (x[i] > 0.0 && (best < 0 || g[i] > g[best])) best = i;
        require(best >= 0, "face oracle: point has empty support");
        return Point::Unit(dim_, best);
      }
      case RegionKind::hypercube01: {
        Point v(dim_);
        for (Eigen::Index i = 0; i < dim_; ++i) {
          if (x[i] <= 0.0) v[i] = 0.0;
          else if (x[i] >= 1.0) v[i] = 1.0;
          else v[i] = g[i] > 0.0 ? 1.0 : 0.0;
        }
        return v;
      }
      case RegionKind::birkhoff: {
        const double big = 1.0 + 2.0 * static_cast<double>(rows_) * (g.cwiseAbs().maxCoeff() + 1.0);
        Point cost(dim_);
        for (Eigen::Index i = 0; i < dim_; ++i) cost[i] = x[i] > 0.0 ? -g[i] : big;
        const auto perm = hungarian_assignment(as_matrix(cost));
        for (Eigen::Index i = 0; i < rows_; ++i)
          require(x[i * cols_ + perm[static_cast<std::size_t>(i)]] > 0.0,
                  "face oracle: point is not doubly stochastic");
        return permutation_point(perm);
      }
      default:
        throw CapabilityError(std::string("face oracle unsupported for ") + name());
    }
  }

  /// Largest gamma with x + gamma * d still in a 0/1 simplex-like region
  /// (only the bound constraints can become active).
  double max_feasible_step(const Point& x, const Point& d) const {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < dim_; ++i) {
      if (d[i] < 0.0) best = std::min(best, x[i] / -d[i]);
      if (kind_ == RegionKind::hypercube01 && d[i] > 0.0) best = std::min(best, (1.0 - x[i]) / d[i]);
    }
    return best;
  }

  /// Membership test with absolute tolerance.
  bool contains(const Point& x, double tol = 1e-9) const {
    if (x.size() != dim_ || !x.allFinite()) return false;
    switch (kind_) {
      case RegionKind::simplex:
        return x.minCoeff() >= -tol && std::abs(x.sum() - 1.0) <= tol;
      case RegionKind::l1_ball: return x.lpNorm<1>() <= radius_ + tol;
      case RegionKind::lp_ball: return lp_norm(x) <= radius_ + tol;
      case RegionKind::box:
        return ((x - lower_).array() >= -tol).all() && ((upper_ - x).array() >= -tol).all();
      case RegionKind::hypercube01:
        return x.minCoeff() >= -tol && x.maxCoeff() <= 1.0 + tol;
      case RegionKind::nuclear_ball: {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(as_matrix(x));
        return svd.singularValues().sum() <= radius_ + tol;
      }
      case RegionKind::birkhoff: {
        const Eigen::MatrixXd m = as_matrix(x);
        return m.minCoeff() >= -tol && (m.rowwise().sum().array() - 1.0).abs().maxCoeff() <= tol &&
               (m.colwise().sum().array() - 1.0).abs().maxCoeff() <= tol;
      }
      case RegionKind::vertex_hull:
      {
        // Weighted NNLS on [V; w 1'] z = [x; w], then renormalize z.
        const auto m = static_cast<Eigen::Index>(vertices_.size());
        const Eigen::Index n = x.size();
        double w = 1.0 + x.cwiseAbs().maxCoeff();
        for (const auto& v : vertices_) w = std::max(w, 1.0 + v.cwiseAbs().maxCoeff());
        w *= 1e3;
        Eigen::MatrixXd A(n + 1, m);
        Point rhs(n + 1);
        for (Eigen::Index j = 0; j < m; ++j) {
          A.col(j).head(n) = vertices_[static_cast<std::size_t>(j)];
          A(n, j) = w;
        }
        rhs.head(n) = x;
        rhs[n] = w;
        const Point z = detail::nnls(A, rhs);
        const double total = z.sum();
        if (!(total > 0.0)) return false;
        return (A.topRows(n) * (z / total) - x).cwiseAbs().maxCoeff() <= tol;
      }
    }
    return false;
  }

  /// Feasibility plus extremality, checked per kind.
  bool is_extreme_point(const Point& v, double tol = 1e-9) const {
    if (!contains(v, tol)) return false;
    switch (kind_) {
      case RegionKind::simplex:
      case RegionKind::birkhoff:
      case RegionKind::hypercube01:
        for (Eigen::Index i = 0; i < dim_; ++i)
          if (std::abs(v[i]) > tol && std::abs(v[i] - 1.0) > tol) return false;
        return true;
      case RegionKind::l1_ball: {
        int nonzero = 0;
        for (Eigen::Index i = 0; i < dim_; ++i) nonzero += std::abs(v[i]) > tol;
        return nonzero == 1 && std::abs(v.lpNorm<1>() - radius_) <= tol;
      }
      case RegionKind::lp_ball:
        if (std::isinf(p_)) return std::abs(v.cwiseAbs().minCoeff() - radius_) <= tol;
        return std::abs(lp_norm(v) - radius_) <= tol;
      case RegionKind::box:
        for (Eigen::Index i = 0; i < dim_; ++i)
          if (std::abs(v[i] - lower_[i]) > tol && std::abs(v[i] - upper_[i]) > tol) return false;
        return true;
      case RegionKind::nuclear_ball: {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(as_matrix(v));
        const auto& s = svd.singularValues();
        return std::abs(s[0] - radius_) <= tol && (s.size() < 2 || s[1] <= tol);
      }
      case RegionKind::vertex_hull: return true;
    }
    return false;
  }

  /// Reshape a flattened point into rows x cols (row-major).
  Eigen::MatrixXd as_matrix(const Point& x) const {
    Eigen::MatrixXd m(rows_, cols_);
    for (Eigen::Index i = 0; i < rows_; ++i)
      for (Eigen::Index j = 0; j < cols_; ++j) m(i, j) = x[i * cols_ + j];
    return m;
  }

  Point flatten(const Eigen::MatrixXd& m) const {
    Point x(rows_ * cols_);
    for (Eigen::Index i = 0; i < rows_; ++i)
      for (Eigen::Index j = 0; j < cols_; ++j) x[i * cols_ + j] = m(i, j);
    return x;
  }

  Point permutation_point(const std::vector<int>& col_of_row) const {
    Point v = Point::Zero(dim_);
    for (Eigen::Index i = 0; i < rows_; ++i) v[i * cols_ + col_of_row[static_cast<std::size_t>(i)]] = 1.0;
    return v;
  }

  double lp_norm(const Point& x) const {
    if (std::isinf(p_)) return x.cwiseAbs().maxCoeff();
    const double scale = x.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return scale * std::pow((x / scale).cwiseAbs().array().pow(p_).sum(), 1.0 / p_);
  }

  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& lower() const { return lower_; }
  const Point& upper() const { return upper_; }

 private:
  FeasibleRegion(RegionKind kind, Eigen::Index dim) : kind_(kind), dim_(dim) {}

  static void dedupe(std::vector<Point>& pts) {
    std::vector<Point> unique;
    for (auto& p : pts) {
      bool seen = false;
      for (const auto& u : unique)
        if (u == p) seen = true;
      if (!seen) unique.push_back(std::move(p));
    }
    pts = std::move(unique);
  }

  Point lp_lmo(const Point& c) const {
    const double scale = c.cwiseAbs().maxCoeff();
    Point v(dim_);
    if (std::isinf(p_)) {
      for (Eigen::Index i = 0; i < dim_; ++i) v[i] = c[i] < 0.0 ? radius_ : -radius_;
      return v;
    }
    if (scale == 0.0) {
      v.setZero();
      v[0] = -radius_;
      return v;
    }
    const double q = p_ / (p_ - 1.0);
    const Eigen::ArrayXd a = (c / scale).cwiseAbs().array().pow(q - 1.0);
    const double norm_q = std::pow((c / scale).cwiseAbs().array().pow(q).sum(), 1.0 / q);
    const double denom = std::pow(norm_q, q - 1.0);
    for (Eigen::Index i = 0; i < dim_; ++i) {
      const double s = c[i] > 0.0 ? 1.0 : (c[i] < 0.0 ? -1.0 : 0.0);
      v[i] = -radius_ * s * a[i] / denom;
    }
    return v;
  }

  Point nuclear_lmo(const Point& c) const;

  RegionKind kind_;
  Eigen::Index dim_ = 0;
  Eigen::Index rows_ = 1;
  Eigen::Index cols_ = 1;
  double radius_ = 1.0;
  double p_ = 2.0;
  Point lower_, upper_;
  std::vector<Point> vertices_;
};

namespace detail {

struct PowerIterationResult {
  Point v;
  double rayleigh = 0.0;
  bool converged = false;
};

/// Power iteration on the symmetric PSD matrix G; stops when the
/// Rayleigh-quotient residual ||G v - rho v|| <= tol * rho.
inline PowerIterationResult power_iteration(const Eigen::MatrixXd& gram, Point v, int max_iters,
                                            double tol) {
  PowerIterationResult out;
  v.normalize();
  for (int it = 0; it < max_iters; ++it) {
    const Point gv = gram * v;
    const double rho = v.dot(gv);
    const double residual = (gv - rho * v).norm();
    if (residual <= tol * std::max(rho, std::numeric_limits<double>::min())) {
      out.v = v;
      out.rayleigh = rho;
      out.converged = true;
      return out;
    }
    const double n = gv.norm();
    if (n == 0.0 || !std::isfinite(n)) break;
    v = gv / n;
  }
  out.v = v;
  out.rayleigh = v.dot(gram * v);
  return out;
}

}  // namespace detail

inline Point FeasibleRegion::nuclear_lmo(const Point& c) const {
  const Eigen::MatrixXd cm = as_matrix(c);
  const Eigen::MatrixXd gram = cm.transpose() * cm;
  Point right;
  if (gram.cwiseAbs().maxCoeff() == 0.0) {
    right = Point::Unit(cols_, 0);
  } else {
    const int max_iters = static_cast<int>(10 * (rows_ + cols_));
    constexpr double tol = 1e-10;
    auto res = detail::power_iteration(gram, Point::Ones(cols_), max_iters, tol);
    if (!res.converged) {
      // Restart from the dominant column of the Gram matrix.
      Eigen::Index col = 0;
      gram.colwise().norm().maxCoeff(&col);
      res = detail::power_iteration(gram, gram.col(col), max_iters, tol);
    }
    if (res.converged) {
      right = res.v;
    } else {
      // Closely spaced singular values: fall back to a dense eigensolve.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
      if (eig.info() != Eigen::Success)
        throw NumericFailure("nuclear-ball LMO: top singular pair did not converge");
      right = eig.eigenvectors().col(cols_ - 1);
    }
  }
  Point left = cm * right;
  const double sigma = left.norm();
  if (sigma > 0.0) {
    left /= sigma;
  } else {
    left = Point::Unit(rows_, 0);
  }
  for (Eigen::Index i = 0; i < rows_; ++i) {
    if (left[i] != 0.0) {
      if (left[i] < 0.0) {
        left = -left;
        right = -right;
      }
      break;
    }
  }
  return flatten(-radius_ * left * right.transpose());
}

}  // namespace condgrad
