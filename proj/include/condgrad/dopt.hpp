#pragma once

#include "condgrad/core.hpp"
#include "condgrad/trace.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <memory>

namespace condgrad {

/// Design weights and the quantities FW needs, kept current by rank-1
/// recurrences. norms[i] = a_i' V^-1 a_i = -<grad f, e_i>.
struct DesignState {
  std::shared_ptr<const Eigen::MatrixXd> a;  // n x d, one vector per row
  Point x;
  Eigen::MatrixXd V_inv;
  double log_det = 0.0;
  Point norms;

  Eigen::Index n() const { return a->rows(); }
  Eigen::Index d() const { return a->cols(); }
  Point gradient() const { return -norms; }
};

inline Eigen::MatrixXd dopt_information(const Eigen::MatrixXd& a, const Point& x) {
  return a.transpose() * x.asDiagonal() * a;
}

/// Builds the state at x from scratch.
inline DesignState dopt_state(std::shared_ptr<const Eigen::MatrixXd> a, Point x) {
  require(a && a->rows() > 0 && a->cols() > 0, "design needs vectors");
  require(x.size() == a->rows(), "design weights have the wrong length");
  DesignState s;
  s.a = std::move(a);
  s.x = std::move(x);
  const Eigen::MatrixXd V = dopt_information(*s.a, s.x);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(V);
  const Eigen::VectorXd diag = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || (diag.array() <= 0.0).any())
    throw ContractViolation("design vectors do not span the space (singular information matrix)");
  s.log_det = diag.array().log().sum();
  if (!std::isfinite(s.log_det)) throw ContractViolation("design vectors do not span the space");
  s.V_inv = ldlt.solve(Eigen::MatrixXd::Identity(V.rows(), V.cols()));
  s.norms = (*s.a * s.V_inv).cwiseProduct(*s.a).rowwise().sum();
  return s;
}

inline DesignState dopt_state(const Eigen::MatrixXd& a, Point x) {
  return dopt_state(std::make_shared<const Eigen::MatrixXd>(a), std::move(x));
}

/// x <- (1 - gamma) x + gamma e_i. Negative gamma is an away step.
/// det V+ = (1 - g + g m)(1 - g)^(d-1) det V, V+^-1 by Sherman-Morrison and
/// m_j+ = (m_j - g (a_j' V^-1 a_i)^2 / (1 - g + g m)) / (1 - g).
inline DesignState dopt_rank1_update(DesignState s, Eigen::Index i, double gamma) {
  require(i >= 0 && i < s.n(), "design index out of range");
  require(std::isfinite(gamma) && gamma < 1.0, "design step must be finite and below 1");
  require(s.x[i] * (1.0 - gamma) + gamma >= -1e-15, "away step exceeds the weight of its vector");
  if (gamma == 0.0) return s;
  const double m = s.norms[i];
  const double denom = 1.0 - gamma + gamma * m;
  if (!(denom > 0.0)) throw NumericFailure("rank-1 design update lost positive definiteness");
  const double d = static_cast<double>(s.d());
  const Point u = s.V_inv * s.a->row(i).transpose();
  const Point cross = *s.a * u;
  s.V_inv = (s.V_inv - (gamma / denom) * u * u.transpose()) / (1.0 - gamma);
  s.norms = (s.norms - (gamma / denom) * cross.cwiseAbs2()) / (1.0 - gamma);
  s.log_det += std::log(denom) + (d - 1.0) * std::log1p(-gamma);
  s.x *= 1.0 - gamma;
  s.x[i] = std::max(s.x[i] + gamma, 0.0);
  return s;
}

/// Exact minimizer of -ln det V along x + g (e_i - x): g = (m/d - 1)/(m - 1).
inline double dopt_step(double m, Eigen::Index d) {
  const double dd = static_cast<double>(d);
  if (m == 1.0) return 0.0;
  return (m / dd - 1.0) / (m - 1.0);
}

/// -ln det V(x) as an Objective over the weights.
inline Objective dopt_objective(const Eigen::MatrixXd& a) {
  auto data = std::make_shared<const Eigen::MatrixXd>(a);
  Objective obj;
  obj.value = [data](const Point& x) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(dopt_information(*data, x));
    const Eigen::VectorXd diag = ldlt.vectorD();
    if ((diag.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
    return -diag.array().log().sum();
  };
  obj.gradient = [data](const Point& x) -> Point {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(dopt_information(*data, x));
    const Eigen::MatrixXd W = ldlt.solve(data->transpose());
    return -(data->cwiseProduct(W.transpose())).rowwise().sum();
  };
  obj.convex = true;
  return obj;
}

enum class DoptVariant { fw, afw };

struct DoptResult {
  DesignState state;
  double fw_gap = 0.0;
  std::int64_t iterations = 0;
  bool converged = false;
  RunTrace trace;
};

/// FW (or away-step FW) for D-optimal design from x0 = 1/n with closed-form
/// steps. The state is rebuilt from scratch every `refresh_every` steps.
inline DoptResult dopt_design(const Eigen::MatrixXd& a, double tol, DoptVariant variant = DoptVariant::fw,
                              std::int64_t max_iters = 100000, std::int64_t refresh_every = 50,
                              std::int64_t record_every = 1) {
  require(tol > 0.0, "tol must be positive");
  require(refresh_every >= 1 && record_every >= 1, "refresh and record periods must be positive");
  const Eigen::Index n = a.rows();
  const Eigen::Index d = a.cols();
  auto data = std::make_shared<const Eigen::MatrixXd>(a);
  DoptResult out;
  out.state = dopt_state(data, Point::Constant(n, 1.0 / static_cast<double>(n)));
  DesignState& s = out.state;
  Counters c;
  double last_step = 0.0;
  for (std::int64_t t = 0;; ++t) {
    if (t > 0 && t % refresh_every == 0) s = dopt_state(data, s.x);
    Eigen::Index i_fw = 0;
    const double m_max = s.norms.maxCoeff(&i_fw);
    const double gap = m_max - static_cast<double>(d);
    ++c.foo;
    ++c.lmo;
    const bool done = gap <= tol || t == max_iters;
    if (done || t % record_every == 0) {
      std::int64_t support = 0;
      for (Eigen::Index j = 0; j < n; ++j) support += s.x[j] > 0.0;
      TraceRow row;
      row.t = t;
      row.f = -s.log_det;
      row.fw_gap = gap;
      row.primal_gap = gap;
      row.step_size = last_step;
      row.lmo_calls = c.lmo;
      row.foo_calls = c.foo;
      row.active_set_size = support;
      out.trace.rows.push_back(row);
    }
    out.fw_gap = gap;
    out.iterations = t;
    if (done) {
      out.converged = gap <= tol;
      break;
    }

    Eigen::Index i_away = -1;
    double m_min = std::numeric_limits<double>::infinity();
    if (variant == DoptVariant::afw) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (s.x[j] > 0.0 && s.x[j] < 1.0 && s.norms[j] < m_min) {
          m_min = s.norms[j];
          i_away = j;
        }
      }
    }
    if (i_away >= 0 && static_cast<double>(d) - m_min > gap) {
      const double lambda = s.x[i_away];
      const double gamma_min = -lambda / (1.0 - lambda);
      const double gamma = m_min > 1.0 ? std::max(dopt_step(m_min, d), gamma_min) : gamma_min;
      s = dopt_rank1_update(std::move(s), i_away, gamma);
      if (gamma == gamma_min) s.x[i_away] = 0.0;
      last_step = gamma;
      continue;
    }
    const double gamma = dopt_step(m_max, d);
    if (gamma >= 1.0) {
      Point e = Point::Zero(n);
      e[i_fw] = 1.0;
      s = dopt_state(data, std::move(e));
    } else {
      s = dopt_rank1_update(std::move(s), i_fw, gamma);
    }
    last_step = gamma;
  }
  return out;
}

}  // namespace condgrad
