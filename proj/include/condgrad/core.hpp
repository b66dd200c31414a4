#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace condgrad {

/// Dense point in the ambient space. Matrix-valued regions store their
/// points flattened row-major (index = row * cols + col).
using Point = Eigen::VectorXd;

/// A caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A numeric routine failed (non-finite values, non-convergence).
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested operation is not available for this region/objective.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const char* what) {
  if (!cond) throw ContractViolation(what);
}

inline bool all_finite(const Point& p) { return p.allFinite(); }

/// Value and gradient oracle plus the optional constants that step rules
/// and gap reporting rely on.
struct Objective {
  std::function<double(const Point&)> value;
  std::function<Point(const Point&)> gradient;
  std::optional<double> smoothness;
  std::optional<double> strong_convexity;
  std::optional<double> optimum_value;
  /// For quadratics: d -> <d, H d>. Enables the closed-form line search.
  std::function<double(const Point&)> curvature;
  bool convex = true;

  bool is_quadratic() const { return static_cast<bool>(curvature); }

  Point checked_gradient(const Point& x) const {
    Point g = gradient(x);
    if (!all_finite(g)) throw NumericFailure("non-finite gradient");
    return g;
  }
};

struct GapReport {
  double fw_gap = 0.0;
  Point fw_vertex;
  std::optional<double> strong_fw_gap;
};

/// Index of the smallest value; ties go to the lowest index.
template <typename Range>
std::size_t argmin_index(const Range& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < static_cast<std::size_t>(values.size()); ++i)
    if (values[i] < values[best]) best = i;
  return best;
}

/// Index of the largest value; ties go to the lowest index.
template <typename Range>
std::size_t argmax_index(const Range& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < static_cast<std::size_t>(values.size()); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

/// Frank-Wolfe gap <grad f(x), x - v> with v the LMO answer on grad f(x).
template <typename Region>
GapReport fw_gap(const Objective& objective, const Point& x, const Region& region) {
  const Point g = objective.checked_gradient(x);
  GapReport report;
  report.fw_vertex = region.lmo(g);
  report.fw_gap = g.dot(x - report.fw_vertex);
  return report;
}

/// Explicit convex decomposition of an iterate.
class ActiveSet {
 public:
  static constexpr double kDropThreshold = 1e-12;

  ActiveSet() = default;
  explicit ActiveSet(Point atom) : iterate_(atom) {
    atoms_.push_back(std::move(atom));
    weights_.push_back(1.0);
  }

  ActiveSet(std::vector<Point> atoms, std::vector<double> weights)
      : atoms_(std::move(atoms)), weights_(std::move(weights)) {
    require(!atoms_.empty() && atoms_.size() == weights_.size(),
            "active set needs matching, non-empty atoms and weights");
    cleanup();
  }

  const std::vector<Point>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  const Point& iterate() const { return iterate_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  std::optional<std::size_t> find(const Point& atom) const {
    for (std::size_t i = 0; i < atoms_.size(); ++i)
      if (atoms_[i].size() == atom.size() && atoms_[i] == atom) return i;
    return std::nullopt;
  }

  /// <c, a_i> for every atom.
  std::vector<double> products(const Point& c) const {
    std::vector<double> out(atoms_.size());
    for (std::size_t i = 0; i < atoms_.size(); ++i) out[i] = c.dot(atoms_[i]);
    return out;
  }

  /// Index of argmax_i <c, a_i> (the away atom for gradient c).
  std::size_t away_index(const Point& c) const {
    require(!atoms_.empty(), "away atom of an empty active set");
    return argmax_index(products(c));
  }

  /// Index of argmin_i <c, a_i> (the local Frank-Wolfe atom).
  std::size_t local_fw_index(const Point& c) const {
    require(!atoms_.empty(), "local FW atom of an empty active set");
    return argmin_index(products(c));
  }

  // Mutators used by the update operations below; each restores the
  // invariants (weight cleanup, renormalization, iterate recomputation).
  void set_weights(std::vector<double> weights) {
    weights_ = std::move(weights);
    cleanup();
  }

  void add_atom(Point atom, double weight) {
    atoms_.push_back(std::move(atom));
    weights_.push_back(weight);
  }

  void remove_atom(std::size_t i) {
    atoms_.erase(atoms_.begin() + static_cast<std::ptrdiff_t>(i));
    weights_.erase(weights_.begin() + static_cast<std::ptrdiff_t>(i));
  }

  void reset(Point atom) {
    atoms_.clear();
    weights_.clear();
    iterate_ = atom;
    atoms_.push_back(std::move(atom));
    weights_.push_back(1.0);
  }

  /// Drops weights below the threshold, renormalizes, recomputes the iterate.
  void cleanup() {
    std::size_t keep = 0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (weights_[i] > kDropThreshold) {
        if (keep != i) {
          atoms_[keep] = std::move(atoms_[i]);
          weights_[keep] = weights_[i];
        }
        ++keep;
      }
    }
    atoms_.resize(keep);
    weights_.resize(keep);
    if (atoms_.empty()) throw NumericFailure("active set lost all its weight");
    double total = 0.0;
    for (double w : weights_) total += w;
    if (total != 1.0)
      for (double& w : weights_) w /= total;
    recompute_iterate();
  }

  void recompute_iterate() {
    iterate_ = Point::Zero(atoms_.front().size());
    for (std::size_t i = 0; i < atoms_.size(); ++i) iterate_ += weights_[i] * atoms_[i];
  }

  /// Largest deviation from the invariants: |sum w - 1| and the
  /// reconstruction error of the stored iterate.
  double weight_sum_error() const {
    double total = 0.0;
    for (double w : weights_) total += w;
    return std::abs(total - 1.0);
  }

  double reconstruction_error() const {
    Point rebuilt = Point::Zero(iterate_.size());
    for (std::size_t i = 0; i < atoms_.size(); ++i) rebuilt += weights_[i] * atoms_[i];
    return (rebuilt - iterate_).cwiseAbs().maxCoeff();
  }

  std::size_t storage_bytes() const {
    std::size_t bytes = weights_.size() * sizeof(double);
    for (const auto& a : atoms_) bytes += static_cast<std::size_t>(a.size()) * sizeof(double);
    return bytes;
  }

 private:
  std::vector<Point> atoms_;
  std::vector<double> weights_;
  Point iterate_;
};

enum class UpdateKind { fw_step, away_step, drop, replace };

/// Applies one coefficient update of the away-step family.
///   fw_step:   lambda <- (1-g) lambda, lambda_atom += g   (g <= 1)
///   away_step: lambda <- (1+g) lambda, lambda_atom -= g   (g <= l/(1-l))
///   drop:      away step at its maximal size, removing the atom
///   replace:   active set becomes {atom}
inline ActiveSet active_set_update(ActiveSet active, UpdateKind kind, const Point& atom,
                                   double gamma) {
  require(!active.empty(), "update of an empty active set");
  require(std::isfinite(gamma) && gamma >= 0.0, "step size must be finite and non-negative");
  switch (kind) {
    case UpdateKind::replace:
      active.reset(atom);
      return active;
    case UpdateKind::fw_step: {
      require(gamma <= 1.0, "FW step size exceeds 1");
      if (gamma == 1.0) {
        active.reset(atom);
        return active;
      }
      std::vector<double> w = active.weights();
      for (double& wi : w) wi *= (1.0 - gamma);
      if (auto idx = active.find(atom)) {
        w[*idx] += gamma;
      } else if (gamma > 0.0) {
        active.add_atom(atom, 0.0);
        w.push_back(gamma);
      }
      active.set_weights(std::move(w));
      return active;
    }
    case UpdateKind::away_step:
    case UpdateKind::drop: {
      auto idx = active.find(atom);
      require(idx.has_value(), "away atom not in the active set");
      const double lambda = active.weights()[*idx];
      if (lambda >= 1.0) {
        require(gamma == 0.0, "away step from a singleton active set");
        return active;
      }
      const double gamma_max = lambda / (1.0 - lambda);
      if (kind == UpdateKind::drop) gamma = gamma_max;
      require(gamma <= gamma_max * (1.0 + 1e-12), "away step exceeds its maximal size");
      std::vector<double> w = active.weights();
      for (double& wi : w) wi *= (1.0 + gamma);
      if (gamma >= gamma_max) {
        w[*idx] = 0.0;
      } else {
        w[*idx] -= gamma;
      }
      active.set_weights(std::move(w));
      return active;
    }
  }
  return active;
}

/// Pairwise update: move `amount` of weight from atom `from` to atom `to`.
inline ActiveSet pairwise_update(ActiveSet active, std::size_t from, const Point& to,
                                 double amount) {
  require(from < active.size(), "pairwise source index out of range");
  const double lambda = active.weights()[from];
  require(amount >= 0.0 && amount <= lambda * (1.0 + 1e-12), "pairwise step exceeds source weight");
  std::vector<double> w = active.weights();
  w[from] = amount >= lambda ? 0.0 : w[from] - amount;
  if (auto idx = active.find(to)) {
    w[*idx] += amount;
  } else if (amount > 0.0) {
    active.add_atom(to, 0.0);
    w.push_back(amount);
  }
  active.set_weights(std::move(w));
  return active;
}

/// <grad f(x), v^A - v^FW> over the active set and the region's LMO.
template <typename Region>
double strong_fw_gap(const Objective& objective, const ActiveSet& active, const Region& region) {
  require(!active.empty(), "strong FW gap needs a non-empty active set");
  const Point g = objective.checked_gradient(active.iterate());
  const Point v_fw = region.lmo(g);
  const auto prods = active.products(g);
  return prods[argmax_index(prods)] - g.dot(v_fw);
}

/// Central differences per coordinate; returns
/// max_i |fd_i - grad_i| / max(1, |grad_i|).
inline double finite_diff_check(const Objective& objective, const Point& x, double h) {
  require(h > 0.0, "finite-difference step must be positive");
  const Point g = objective.checked_gradient(x);
  double worst = 0.0;
  Point probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = objective.value(probe);
    probe[i] = x[i] - h;
    const double down = objective.value(probe);
    probe[i] = x[i];
    const double fd = (up - down) / (2.0 * h);
    if (!std::isfinite(fd)) throw NumericFailure("non-finite finite difference");
    worst = std::max(worst, std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])));
  }
  return worst;
}

}  // namespace condgrad
