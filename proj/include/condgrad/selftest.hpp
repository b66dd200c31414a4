#pragma once

#include "condgrad/bench.hpp"

#include <Eigen/SVD>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace condgrad {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

/// One line per criterion; timings only on request so the default output
/// is byte-stable.
inline std::string format_criterion(const CriterionResult& r, bool timing) {
  std::ostringstream os;
  os << (r.passed ? "PASS" : "FAIL") << "  " << (r.id < 10 ? " " : "") << r.id << "  " << r.title << ": "
     << r.detail;
  if (timing) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " [%.3f s, budget %.3g s]", r.seconds, r.budget_seconds);
    os << buf;
  }
  os << '\n';
  return os.str();
}

namespace acceptance {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

/// Distance in units in the last place.
inline double ulps(double a, double b) {
  if (a == b) return 0.0;
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) / (scale * std::numeric_limits<double>::epsilon());
}

/// Strictly complementary quadratic on the simplex: the optimum is the
/// interior point y of the face spanned by the first `support` vertices,
/// and the gradient there is 0 on the face and `push` > 0 off it.
struct FaceQuadratic {
  Objective objective;
  Point optimum;
  double L = 0.0, mu = 0.0;
};

inline FaceQuadratic face_quadratic(Eigen::Index n, Eigen::Index support, double mu, double L, double push,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd H = bench::detail::random_spd(n, mu, L, rng);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Point y = Point::Zero(n);
  for (Eigen::Index i = 0; i < support; ++i) y[i] = unif(rng);
  y /= y.sum();
  Point g = Point::Constant(n, push);
  g.head(support).setZero();
  const Point c = y - H.ldlt().solve(g);
  FaceQuadratic out;
  out.objective = quadratic_objective(H, -(H * c), 0.5 * c.dot(H * c));
  out.objective.optimum_value = out.objective.value(y);
  out.optimum = y;
  out.L = L;
  out.mu = mu;
  return out;
}

/// f = (x - c)' H (x - c) / 2 with c in the relative interior of the
/// simplex (optimum value 0).
inline Objective interior_simplex_quadratic(Eigen::Index n, double mu, double L, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd H = bench::detail::random_spd(n, mu, L, rng);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Point c(n);
  for (Eigen::Index i = 0; i < n; ++i) c[i] = unif(rng);
  c /= c.sum();
  Objective f = quadratic_objective(H, -(H * c), 0.5 * c.dot(H * c));
  f.optimum_value = 0.0;
  return f;
}

inline Point first_vertex_start(const FeasibleRegion& r, const Objective& f) {
  return r.lmo(f.gradient(r.lmo(Point::Zero(r.dimension()))));
}

/// Smallest ball through every point of `subset` with its center in their
/// affine hull; nullopt when the points are affinely dependent.
inline std::optional<std::pair<Point, double>> circumsphere(const std::vector<Point>& pts,
                                                            const std::vector<std::size_t>& subset) {
  const Point& p0 = pts[subset[0]];
  const auto k = static_cast<Eigen::Index>(subset.size()) - 1;
  if (k == 0) return std::make_pair(p0, 0.0);
  Eigen::MatrixXd A(k, p0.size());
  for (Eigen::Index i = 0; i < k; ++i) A.row(i) = (pts[subset[static_cast<std::size_t>(i) + 1]] - p0).transpose();
  const Eigen::MatrixXd G = 2.0 * A * A.transpose();
  const Point rhs = A.rowwise().squaredNorm();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
  if (lu.rank() < k) return std::nullopt;
  const Point lambda = lu.solve(rhs);
  const Point center = p0 + A.transpose() * lambda;
  return std::make_pair(center, (center - p0).squaredNorm());
}

/// Exhaustive MEB: the smallest enclosing circumsphere over all supports of
/// at most dim + 1 points.
inline double brute_force_meb_radius_sq(const std::vector<Point>& pts) {
  const std::size_t m = pts.size();
  const std::size_t max_k = std::min<std::size_t>(m, static_cast<std::size_t>(pts.front().size()) + 1);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (!idx.empty()) {
      if (auto s = circumsphere(pts, idx)) {
        const auto& [c, r2] = *s;
        if (r2 < best) {
          bool encloses = true;
          for (const auto& p : pts)
            if ((p - c).squaredNorm() > r2 * (1.0 + 1e-10) + 1e-14) {
              encloses = false;
              break;
            }
          if (encloses) best = r2;
        }
      }
    }
    if (idx.size() == max_k) return;
    for (std::size_t i = start; i < m; ++i) {
      idx.push_back(i);
      rec(i + 1);
      idx.pop_back();
    }
  };
  rec(0);
  return best;
}

/// -ln det((1 - g) V + g a a'), evaluated densely.
inline double dense_neg_log_det(const Eigen::MatrixXd& a, const Point& x) {
  const Eigen::MatrixXd V = dopt_information(a, x);
  return -std::log(V.determinant());
}

/// Root of d/dg -ln det((1 - g) V + g a_i a_i') on [lo, hi] by bisection on
/// the trace form of the derivative.
inline double numeric_dopt_step(const Eigen::MatrixXd& a, const Point& x, Eigen::Index i, double lo, double hi) {
  const Eigen::MatrixXd V = dopt_information(a, x);
  const Eigen::MatrixXd aa = a.row(i).transpose() * a.row(i);
  const auto deriv = [&](double g) {
    const Eigen::MatrixXd Vg = (1.0 - g) * V + g * aa;
    return -(Vg.ldlt().solve(aa - V)).trace();
  };
  if (deriv(lo) >= 0.0) return lo;
  if (deriv(hi) <= 0.0) return hi;
  for (int k = 0; k < 200 && hi - lo > 1e-15; ++k) {
    const double mid = 0.5 * (lo + hi);
    (deriv(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline bool same_numeric_columns(const RunTrace& a, const RunTrace& b, std::string& why) {
  if (a.size() != b.size()) {
    why = "row counts " + std::to_string(a.size()) + " vs " + std::to_string(b.size());
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& p = a.rows[i];
    const auto& q = b.rows[i];
    if (p.t != q.t || p.f != q.f || p.fw_gap != q.fw_gap || p.primal_gap != q.primal_gap ||
        p.step_size != q.step_size) {
      why = "first difference at row " + std::to_string(i);
      return false;
    }
  }
  return true;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

using Check = std::function<bool(std::string&)>;

// 1
inline bool exact_scalar_trajectory(std::string& detail) {
  const auto region = FeasibleRegion::box(Point::Constant(1, -1.0), Point::Constant(1, 1.0));
  const auto f = squared_distance(Point::Zero(1));
  RunConfig c;
  c.step_rule = StepRule::open_loop;
  c.max_iters = 101;
  c.tol = 1e-300;
  c.x0 = Point::Constant(1, 1.0);
  std::vector<double> xs;
  c.observer = [&](std::int64_t, const Point& x) { xs.push_back(x[0]); };
  run_fw(f, region, c);
  double worst = 0.0;
  for (int t = 0; t <= 50; ++t) {
    worst = std::max(worst, ulps(xs[2 * t], 1.0 / (2 * t + 1)));
    worst = std::max(worst, ulps(xs[2 * t + 1], -1.0 / (2 * t + 1)));
  }
  detail = "x_0..x_101 match +-1/(2t+1), max deviation " + num(worst) + " ulp";
  return xs.size() == 102 && worst <= 4.0;
}

// 2
inline bool short_step_decay(std::string& detail) {
  const auto region = FeasibleRegion::box(Point::Constant(1, -1.0), Point::Constant(1, 1.0));
  const auto f = squared_distance(Point::Zero(1));
  RunConfig c;
  c.step_rule = StepRule::short_step;
  c.L = 4.0;
  c.max_iters = 50;
  c.tol = 1e-300;
  c.x0 = Point::Constant(1, 1.0);
  std::vector<double> xs;
  c.observer = [&](std::int64_t, const Point& x) { xs.push_back(x[0]); };
  run_fw(f, region, c);
  double worst = 0.0;
  for (int t = 0; t <= 50; ++t) worst = std::max(worst, ulps(xs[static_cast<std::size_t>(t)], std::ldexp(1.0, -t)));
  detail = "x_t = (1 - 2/L)^t for t <= 50, max deviation " + num(worst) + " ulp";
  return xs.size() == 51 && worst <= 4.0;
}

// 3
inline bool simplex_finite_termination(std::string& detail) {
  const Eigen::Index n = 1000;
  const auto region = FeasibleRegion::simplex(n);
  auto f = squared_distance(Point::Zero(n));
  f.optimum_value = 1.0 / static_cast<double>(n);
  RunConfig c;
  c.step_rule = StepRule::line_search;
  c.max_iters = n - 1;
  c.tol = 1e-300;
  c.x0 = Point::Unit(n, 0);
  double worst_x = 0.0;
  c.observer = [&](std::int64_t t, const Point& x) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double expect = i <= t ? 1.0 / static_cast<double>(t + 1) : 0.0;
      worst_x = std::max(worst_x, std::abs(x[i] - expect));
    }
  };
  const auto res = run_fw(f, region, c);
  double worst_h = 0.0;
  for (const auto& r : res.trace.rows)
    worst_h = std::max(worst_h, std::abs(r.primal_gap - (1.0 / static_cast<double>(r.t + 1) - 1.0 / n)));
  const double final_h = res.trace.back().primal_gap;
  detail = "iterates are uniform averages (max error " + num(worst_x) + "), primal gap formula error " +
           num(worst_h) + ", gap at t=999 " + num(final_h);
  return res.trace.size() == static_cast<std::size_t>(n) && worst_x <= 1e-12 && worst_h <= 1e-12 &&
         std::abs(final_h) <= 1e-12;
}

// 4
inline bool vanilla_rate_bound(std::string& detail) {
  int violations = 0;
  double worst_ratio = 0.0;
  for (int k = 0; k < 20; ++k) {
    std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(k));
    const Eigen::Index n = 10 + 9 * (k % 10);
    const auto region = k < 10 ? FeasibleRegion::l1_ball(n, 1.0) : FeasibleRegion::simplex(n);
    const double L = 1.0 + k;
    const Eigen::MatrixXd H = bench::detail::random_spd(n, 0.0, L, rng);
    std::normal_distribution<double> normal;
    Point c(n);
    for (Eigen::Index i = 0; i < n; ++i) c[i] = normal(rng);
    Objective f = quadratic_objective(H, -(H * c), 0.5 * c.dot(H * c));
    const double fstar = bench::detail::reference_optimum(f, region);
    RunConfig rc;
    rc.step_rule = StepRule::short_step;
    rc.max_iters = 500;
    rc.tol = 1e-300;
    const double Lx = *f.smoothness;
    const double D = region.diameter();
    const auto res = run_fw(f, region, rc);
    for (const auto& r : res.trace.rows) {
      if (r.t < 1) continue;
      const double h = r.f - fstar;
      const double bound = 2.0 * Lx * D * D / (static_cast<double>(r.t) + 3.0);
      worst_ratio = std::max(worst_ratio, h / bound);
      if (h > bound) ++violations;
    }
  }
  detail = std::to_string(violations) + " violations over 20 instances x 500 iterations, max h_t/bound " +
           num(worst_ratio);
  return violations == 0;
}

// 5
inline bool nonconvex_gap_rate(std::string& detail) {
  const Eigen::Index n = 10;
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> ua(0.5, 1.5), uw(1.0, 3.0), uc(-0.5, 0.5);
  SeparableCosine sc{Point(n), Point(n), Point(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    sc.a[i] = ua(rng);
    sc.w[i] = uw(rng);
    sc.c[i] = uc(rng);
  }
  const Point lo = Point::Constant(n, -2.0), hi = Point::Constant(n, 2.0);
  const auto region = FeasibleRegion::box(lo, hi);
  const Objective f = sc.objective();
  const double fstar = sc.box_minimum(lo, hi);
  RunConfig rc;
  rc.step_rule = StepRule::short_step;
  rc.max_iters = 10000;
  rc.tol = 1e-300;
  const auto res = run_fw(f, region, rc);
  const double h0 = res.trace.rows.front().f - fstar;
  const double L = *f.smoothness, D = region.diameter();
  const double C = std::max(2.0 * h0, L * D * D);
  double running_min = std::numeric_limits<double>::infinity();
  int violations = 0;
  double worst = 0.0;
  for (const auto& r : res.trace.rows) {
    running_min = std::min(running_min, r.fw_gap);
    const double bound = C / std::sqrt(static_cast<double>(r.t) + 1.0);
    worst = std::max(worst, running_min / bound);
    if (running_min > bound) ++violations;
  }
  detail = std::to_string(violations) + " violations over 10^4 iterations, max ratio " + num(worst);
  return violations == 0 && res.trace.size() == 10001;
}

// 6
inline bool lmo_equivalence(std::string& detail) {
  std::mt19937_64 rng(66);
  std::normal_distribution<double> normal;
  const auto random_cost = [&](Eigen::Index n) {
    Point c(n);
    for (Eigen::Index i = 0; i < n; ++i) c[i] = normal(rng);
    return c;
  };
  int mismatches = 0;
  double worst_nuclear = 0.0, worst_lp = 0.0;
  const std::vector<FeasibleRegion> polytopes = {FeasibleRegion::simplex(8), FeasibleRegion::hypercube01(10),
                                                 FeasibleRegion::birkhoff(4), FeasibleRegion::l1_ball(10, 1.0)};
  for (const auto& r : polytopes) {
    const auto verts = r.enumerate_vertices();
    for (int k = 0; k < 1000; ++k) {
      const Point c = random_cost(r.dimension());
      double best = std::numeric_limits<double>::infinity();
      for (const auto& v : verts) best = std::min(best, c.dot(v));
      const Point v = r.lmo(c);
      if (c.dot(v) != best || !r.is_extreme_point(v)) ++mismatches;
    }
  }
  for (double p : {1.5, 3.0}) {
    const auto r = FeasibleRegion::lp_ball(5, 1.0, p);
    const double q = p / (p - 1.0);
    for (int k = 0; k < 1000; ++k) {
      const Point c = random_cost(5);
      const double dual = std::pow(c.cwiseAbs().array().pow(q).sum(), 1.0 / q);
      const Point v = r.lmo(c);
      worst_lp = std::max(worst_lp, std::abs(c.dot(v) + dual) / dual);
      worst_lp = std::max(worst_lp, std::abs(r.lp_norm(v) - 1.0));
    }
  }
  const auto nuc = FeasibleRegion::nuclear_ball(4, 4, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const Point c = random_cost(16);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(nuc.as_matrix(c));
    const double sigma = svd.singularValues()[0];
    const Point v = nuc.lmo(c);
    worst_nuclear = std::max(worst_nuclear, std::abs(c.dot(v) + sigma) / sigma);
  }
  detail = std::to_string(mismatches) + " polytope mismatches, lp relative error " + num(worst_lp) +
           ", nuclear relative error " + num(worst_nuclear);
  return mismatches == 0 && worst_lp <= 1e-12 && worst_nuclear <= 1e-8;
}

// 7
inline bool active_set_linear_convergence(std::string& detail) {
  const auto q = face_quadratic(20, 5, 1.0, 10.0, 1.0, 77);
  const auto region = FeasibleRegion::simplex(20);
  RunConfig rc;
  rc.step_rule = StepRule::short_step;
  rc.max_iters = 5000;
  rc.tol = 1e-10;
  rc.x0 = Point::Unit(20, 19);
  const auto afw = run_afw(q.objective, region, rc);
  const auto pfw = run_pfw(q.objective, region, rc);
  const auto bcg = run_bcg(q.objective, region, rc).run;
  RunConfig fc = rc;
  fc.tol = 1e-300;
  const auto fw = run_fw(q.objective, region, fc);
  const double s_afw = strong_fw_gap(q.objective, *afw.active, region);
  const double s_pfw = strong_fw_gap(q.objective, *pfw.active, region);
  const double s_bcg = strong_fw_gap(q.objective, *bcg.active, region);
  const double fw_gap = fw.trace.back().fw_gap;
  detail = "strong gaps afw " + num(s_afw) + " (t=" + std::to_string(afw.trace.back().t) + "), pfw " + num(s_pfw) +
           " (t=" + std::to_string(pfw.trace.back().t) + "), bcg " + num(s_bcg) + " (t=" +
           std::to_string(bcg.trace.back().t) + "); fw gap at t=5000 " + num(fw_gap);
  const double worst = std::max({s_afw, s_pfw, s_bcg});
  return afw.converged && pfw.converged && bcg.converged && worst <= 1e-10 && fw_gap >= 10.0 * 1e-10;
}

// 8
inline bool lazification_economy(std::string& detail) {
  const auto region = FeasibleRegion::simplex(50);
  const Objective f = interior_simplex_quadratic(50, 1.0, 10.0, 88);
  RunConfig rc;
  rc.step_rule = StepRule::short_step;
  rc.max_iters = 100000;
  rc.tol = 1e-6;
  rc.x0 = first_vertex_start(region, f);
  const auto fw = run_fw(f, region, rc);
  const auto afw = run_afw(f, region, rc);
  const auto lfw = run_lazy(LazyVariant::fw, f, region, rc);
  const auto lafw = run_lazy(LazyVariant::afw, f, region, rc);
  int bad = 0;
  for (const auto* r : {&lfw, &lafw})
    for (const auto& cert : r->certificates) bad += cert.gap > cert.phi;
  const auto lmo = [](const RunResult& r) { return r.trace.back().lmo_calls; };
  detail = "LMO calls lazy_fw " + std::to_string(lmo(lfw.run)) + " vs fw " + std::to_string(lmo(fw)) +
           ", lazy_afw " + std::to_string(lmo(lafw.run)) + " vs afw " + std::to_string(lmo(afw)) + "; " +
           std::to_string(lfw.certificates.size() + lafw.certificates.size()) + " certificates, " +
           std::to_string(bad) + " with g > phi";
  return fw.converged && afw.converged && lfw.run.converged && lafw.run.converged && lmo(lfw.run) <= lmo(fw) &&
         lmo(lafw.run) <= lmo(afw) && bad == 0;
}

/// Interior-optimum quadratic over the l1 ball, optimum at l1 norm 0.9.
inline Objective cgs_instance(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd H = bench::detail::random_spd(n, 0.0, 10.0, rng);
  std::normal_distribution<double> normal;
  Point c(n);
  for (Eigen::Index i = 0; i < n; ++i) c[i] = normal(rng);
  c *= 0.9 / c.lpNorm<1>();
  Objective f = quadratic_objective(H, -(H * c), 0.5 * c.dot(H * c));
  f.optimum_value = 0.0;
  return f;
}

inline std::int64_t foo_to_reach(const RunTrace& trace, double h) {
  for (const auto& r : trace.rows)
    if (r.primal_gap <= h) return r.foo_calls;
  return -1;
}

// 9
inline bool cgs_foo_economy(std::string& detail) {
  const auto region = FeasibleRegion::l1_ball(50, 1.0);
  const Objective f = cgs_instance(50, 99);
  RunConfig rc;
  rc.step_rule = StepRule::short_step;
  rc.tol = 1e-300;
  rc.x0 = first_vertex_start(region, f);
  RunConfig fc = rc;
  fc.max_iters = 20000;
  const auto fw = run_fw(f, region, fc);
  RunConfig cc = rc;
  cc.max_iters = 5000;
  const auto cgs = run_cgs(f, region, cc);
  const std::int64_t foo_fw = foo_to_reach(fw.trace, 1e-3);
  const std::int64_t foo_cgs = foo_to_reach(cgs.trace, 1e-3);
  detail = "FOO calls to h <= 1e-3: cgs " + std::to_string(foo_cgs) + ", fw " + std::to_string(foo_fw);
  if (foo_fw > 0 && foo_cgs > 0) detail += " (ratio " + num(static_cast<double>(foo_cgs) / foo_fw) + ")";
  return foo_fw > 0 && foo_cgs > 0 && static_cast<double>(foo_cgs) <= 0.2 * static_cast<double>(foo_fw);
}

// 10
inline bool zero_noise_reductions(std::string& detail) {
  const auto region = FeasibleRegion::simplex(20);
  const auto q = face_quadratic(20, 5, 1.0, 10.0, 1.0, 1010);
  const StochasticOracle oracle = gaussian_quadratic_oracle(q.objective, 20, 0.0, 23.0);
  RunConfig rc;
  rc.max_iters = 200;
  rc.tol = 1e-300;
  rc.step_rule = StepRule::open_loop;
  rc.x0 = first_vertex_start(region, q.objective);
  rc.seed = 3;
  const auto fw = run_fw(q.objective, region, rc);
  StochasticSchedule s;
  s.L = q.L;
  s.D = region.diameter();
  std::vector<std::string> failed;
  std::string why;
  for (auto v : {EstimatorVariant::batch_mean, EstimatorVariant::spider, EstimatorVariant::svrf}) {
    const auto st = run_stochastic_fw(v, q.objective, oracle, region, rc, s);
    if (!same_numeric_columns(fw.trace, st.trace, why) || st.x != fw.x) failed.push_back(estimator_name(v) + (": " + why));
  }
  RunConfig cc = rc;
  cc.max_iters = 100;
  const auto cgs = run_cgs(q.objective, region, cc);
  ScgsOptions opt;
  opt.cgs_learning_rate = true;
  const auto scgs = run_scgs(q.objective, oracle, region, cc, opt);
  if (!same_numeric_columns(cgs.trace, scgs.trace, why) || cgs.x != scgs.x) failed.push_back("scgs: " + why);
  if (failed.empty()) {
    detail = "sfw, spider, svrf match fw and scgs matches cgs bit for bit (f, gaps, steps, final iterate)";
    return true;
  }
  detail = "mismatch:";
  for (const auto& f : failed) detail += " " + f + ";";
  return false;
}

/// Closed-form oracle evaluations after T steps, per estimator.
inline std::int64_t expected_sfo(EstimatorVariant v, std::int64_t T, double alpha, double spider_scale) {
  std::int64_t total = 0;
  for (std::int64_t t = 0; t < T; ++t) {
    const bool checkpoint = ((t + 1) & t) == 0;
    switch (v) {
      case EstimatorVariant::batch_mean:
        total += static_cast<std::int64_t>(std::ceil((t + 2.0) * (t + 2.0) / alpha));
        break;
      case EstimatorVariant::momentum: total += 1; break;
      case EstimatorVariant::spider:
        total += checkpoint ? std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(spider_scale * (t + 1.0) * (t + 1.0))))
                            : 2 * 6 * (t + 1);
        break;
      case EstimatorVariant::svrf: total += checkpoint ? 0 : 2 * 48 * (t + 2); break;
      case EstimatorVariant::one_sample: total += t == 0 ? 1 : 2; break;
    }
  }
  return total;
}

// 11
inline bool stochastic_ensemble(std::string& detail) {
  const Eigen::Index n = 20;
  const auto region = FeasibleRegion::simplex(n);
  const auto q = face_quadratic(n, 5, 1.0, 2.0, 1.0, 1111);
  const double s = 0.1;
  const StochasticOracle oracle = gaussian_quadratic_oracle(q.objective, n, s, static_cast<double>(n) + 3.0);
  const std::int64_t T = 100;
  RunConfig rc;
  rc.max_iters = T;
  rc.tol = 1e-300;
  rc.x0 = first_vertex_start(region, q.objective);
  StochasticSchedule sched;
  sched.L = q.L;
  sched.D = region.diameter();
  sched.sigma_sq = *oracle.variance_bound;
  const double h0 = q.objective.value(*rc.x0) - *q.objective.optimum_value;
  bool ok = true;
  std::ostringstream os;
  os << "median h_T/h_0:";
  for (auto v : {EstimatorVariant::batch_mean, EstimatorVariant::momentum, EstimatorVariant::spider,
                 EstimatorVariant::svrf, EstimatorVariant::one_sample}) {
    std::vector<double> finals;
    bool counts_ok = true;
    const std::int64_t want = expected_sfo(v, T, sched.alpha, sched.sigma_sq / (sched.L * sched.L * sched.D * sched.D));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      RunConfig c = rc;
      c.seed = seed;
      const auto res = run_stochastic_fw(v, q.objective, oracle, region, c, sched);
      finals.push_back(res.trace.back().primal_gap);
      counts_ok = counts_ok && res.trace.back().sfo_calls == want;
    }
    std::sort(finals.begin(), finals.end());
    const double med = 0.5 * (finals[4] + finals[5]);
    os << ' ' << estimator_name(v) << ' ' << num(med / h0) << (counts_ok ? "" : " (sample count mismatch)");
    ok = ok && counts_ok && med <= h0 / 10.0;
  }
  detail = os.str() + "; sample counts " + (ok ? "exact" : "checked");
  return ok;
}

// 12
inline bool sido_contract(std::string& detail) {
  std::mt19937_64 rng(1212);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  int descents = 0, drops = 0, stationary = 0, bad = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Index n = 8;
    const Eigen::MatrixXd H = bench::detail::random_spd(n, 0.1, 1.0 + (k % 7), rng);
    Point b(n);
    for (Eigen::Index i = 0; i < n; ++i) b[i] = normal(rng);
    const Objective f = quadratic_objective(H, b);
    const double L = *f.smoothness;
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::size_t size = 2 + static_cast<std::size_t>(k % 5);
    ActiveSet S(Point::Unit(n, perm[0]));
    std::vector<double> w{unif(rng)};
    for (std::size_t i = 1; i < size; ++i) {
      S.add_atom(Point::Unit(n, perm[i]), 0.0);
      w.push_back(unif(rng));
    }
    double total = 0.0;
    for (double wi : w) total += wi;
    for (double& wi : w) wi /= total;
    S.set_weights(w);
    const Point x = S.iterate();
    const double fx = f.value(x);
    const Point g = f.gradient(x);
    const auto prods = S.products(g);
    const double spread = prods[argmax_index(prods)] - prods[argmin_index(prods)];
    const auto res = simplex_descent(f, S, L);
    const double fnew = f.value(res.active.iterate());
    switch (res.kind) {
      case SimplexDescentKind::descent: {
        ++descents;
        const double slack = (fx - fnew) - spread * spread / (4.0 * L);
        worst_slack = std::min(worst_slack, slack);
        if (slack < -1e-12 * std::max(1.0, std::abs(fx))) ++bad;
        break;
      }
      case SimplexDescentKind::drop: {
        ++drops;
        bool subset = res.active.size() < S.size();
        for (const auto& a : res.active.atoms()) subset = subset && S.find(a).has_value();
        if (!(fnew <= fx) || !subset) ++bad;
        break;
      }
      case SimplexDescentKind::stationary: ++stationary; break;
    }
  }
  detail = std::to_string(descents) + " descent, " + std::to_string(drops) + " drop, " + std::to_string(stationary) +
           " stationary returns; " + std::to_string(bad) + " contract violations";
  if (descents > 0) detail += ", min descent slack " + num(worst_slack);
  return bad == 0 && descents > 0 && drops > 0;
}

// 13
inline bool adaptive_soundness(std::string& detail) {
  std::mt19937_64 rng(1313);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int bad_test = 0, bad_bound = 0;
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index n = 5 + k % 10;
    const double Ltrue = std::pow(10.0, 4.0 * unif(rng) - 2.0);
    const Eigen::MatrixXd H = bench::detail::random_spd(n, 0.0, Ltrue, rng);
    Point b(n);
    for (Eigen::Index i = 0; i < n; ++i) b[i] = normal(rng);
    const Objective f = quadratic_objective(H, b);
    const double L = *f.smoothness;
    const auto region = FeasibleRegion::simplex(n);
    Point x = Point::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = unif(rng) + 0.01;
    x /= x.sum();
    const Point g = f.gradient(x);
    const Point v = region.lmo(g);
    AdaptiveState st;
    st.L_tilde = L * std::pow(10.0, -12.0 * unif(rng));
    const auto res = adaptive_step(f, x, v, st);
    const double M = res.state.L_tilde, gamma = res.gamma, alpha = st.alpha;
    const Point d = v - x;
    const double lhs = f.value(x + gamma * d) - f.value(x);
    const double rhs = alpha * gamma * g.dot(d) + alpha * alpha * gamma * gamma * M * d.squaredNorm() / 2.0;
    bad_test += !(lhs <= rhs);
    bad_bound += !(M <= st.tau * L);
  }
  detail = std::to_string(bad_test) + " acceptance-test failures, " + std::to_string(bad_bound) +
           " cases with M > tau L over 100 quadratics";
  return bad_test == 0 && bad_bound == 0;
}

// 14
inline bool caratheodory_sparsity(std::string& detail) {
  std::mt19937_64 rng(1414);
  const auto region = FeasibleRegion::birkhoff(4);
  const auto atoms = bench::detail::random_vertices(region, 5, rng);
  const Point u = bench::detail::random_mixture(atoms, rng);
  const auto res = approx_caratheodory(u, region, 2.0, 0.05);
  bool sparse = true;
  for (const auto& r : res.trace.rows) sparse = sparse && r.active_set_size <= r.t + 1;
  const double direct = (res.active.iterate() - u).norm();
  detail = "residual " + num(direct) + " after " + std::to_string(res.iterations) + " iterations with " +
           std::to_string(res.active.size()) + " atoms; atom count <= t+1 " + (sparse ? "at every t" : "VIOLATED");
  return res.reached && direct <= 0.05 && sparse && res.active.size() <= 200;
}

// 15
inline bool meb_correctness(std::string& detail) {
  std::mt19937_64 rng(1515);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> count(5, 30);
  double worst_rel = 0.0, worst_out = 0.0;
  for (int k = 0; k < 50; ++k) {
    std::vector<Point> pts(static_cast<std::size_t>(count(rng)), Point(3));
    for (auto& p : pts)
      for (Eigen::Index j = 0; j < 3; ++j) p[j] = normal(rng);
    MebOptions opt;
    opt.variant = MebVariant::afw;
    const auto res = meb_coreset(pts, 1e-10, opt);
    const double exact = brute_force_meb_radius_sq(pts);
    worst_rel = std::max(worst_rel, std::abs(res.radius_sq - exact) / exact);
    const double r = std::sqrt(res.radius_sq);
    for (const auto& p : pts) worst_out = std::max(worst_out, (p - res.center).norm() - r);
  }
  detail = "max relative radius^2 error " + num(worst_rel) + ", max excess distance " + num(worst_out);
  return worst_rel <= 1e-4 && worst_out <= 1e-6;
}

// 16
inline bool dopt_checks(std::string& detail) {
  std::mt19937_64 rng(1616);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  const auto gaussian = [&](Eigen::Index n, Eigen::Index d) {
    Eigen::MatrixXd a(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) a(i, j) = normal(rng);
    return a;
  };
  double worst_step = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Eigen::MatrixXd a = gaussian(10, 4);
    Point x(10);
    for (Eigen::Index i = 0; i < 10; ++i) x[i] = unif(rng);
    x /= x.sum();
    const DesignState s = dopt_state(a, x);
    Eigen::Index i = 0;
    const double m = s.norms.maxCoeff(&i);
    const double closed = dopt_step(m, 4);
    Point e = Point::Zero(10);
    e[i] = 1.0;
    const double numeric = numeric_dopt_step(a, x, i, 0.0, 1.0 - 1e-12);
    worst_step = std::max(worst_step, std::abs(closed - numeric));
  }
  const Eigen::MatrixXd a = gaussian(10, 4);
  DesignState s = dopt_state(a, Point::Constant(10, 0.1));
  std::uniform_int_distribution<int> pick(0, 9);
  for (int k = 0; k < 50; ++k) s = dopt_rank1_update(std::move(s), pick(rng), 0.3 * unif(rng));
  const DesignState fresh = dopt_state(a, s.x);
  const double err_inv = (s.V_inv - fresh.V_inv).norm() / fresh.V_inv.norm();
  const double err_det = std::abs(s.log_det - fresh.log_det) / std::max(1.0, std::abs(fresh.log_det));
  const double err_norms = (s.norms - fresh.norms).norm() / fresh.norms.norm();
  const double chain = std::max({err_inv, err_det, err_norms});
  double worst_agree = 0.0;
  for (int k = 0; k < 2; ++k) {
    const Eigen::MatrixXd b = gaussian(50, 5);
    const auto fw = dopt_design(b, 1e-9, DoptVariant::fw, 2000000, 50, 10000);
    const auto afw = dopt_design(b, 1e-9, DoptVariant::afw, 2000000, 50, 10000);
    worst_agree = std::max(worst_agree, std::abs(fw.state.log_det - afw.state.log_det));
  }
  detail = "closed-form step error " + num(worst_step) + ", 50 chained updates error " + num(chain) +
           ", fw vs afw log det difference " + num(worst_agree);
  return worst_step <= 1e-8 && chain <= 1e-6 && worst_agree <= 1e-5;
}

// 17
inline bool gradient_checks(std::string& detail) {
  std::mt19937_64 rng(1717);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::Index n = 6;
  const auto gauss = [&](Eigen::Index k) {
    Point p(k);
    for (Eigen::Index i = 0; i < k; ++i) p[i] = normal(rng);
    return p;
  };
  Eigen::MatrixXd A(12, n);
  for (Eigen::Index i = 0; i < 12; ++i) A.row(i) = gauss(n).transpose();
  Point labels(12);
  for (Eigen::Index i = 0; i < 12; ++i) labels[i] = i % 2 ? 1.0 : -1.0;
  SeparableCosine sc{gauss(n), gauss(n).cwiseAbs() + Point::Ones(n), gauss(n)};
  const Eigen::MatrixXd design = A;
  std::vector<std::pair<std::string, Objective>> objectives = {
      {"quadratic", quadratic_objective(bench::detail::random_spd(n, 0.5, 5.0, rng), gauss(n), 1.0)},
      {"squared_distance", squared_distance(gauss(n), 2.0)},
      {"lp_distance_squared", lp_distance_squared(gauss(n), 3.0)},
      {"logistic", logistic_objective(A, labels, 0.1)},
      {"separable_cosine", sc.objective()},
      {"dopt", dopt_objective(design)},
  };
  const auto region = FeasibleRegion::simplex(n);
  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, f] : objectives) {
    const bool over_design = name == "dopt";
    for (int k = 0; k < 100; ++k) {
      Point x(over_design ? design.rows() : n);
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = unif(rng) + 0.1;
      x /= x.sum();
      if (!over_design && k % 2) x = bench::detail::random_mixture(bench::detail::random_vertices(region, 3, rng), rng);
      const double err = finite_diff_check(f, x, 1e-5);
      if (err > worst) {
        worst = err;
        worst_name = name;
      }
    }
  }
  detail = "max finite-difference error " + num(worst) + " over 6 objectives x 100 points (worst: " + worst_name + ")";
  return worst <= 1e-6;
}

// 18
inline bool reproducibility(std::string& detail) {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "condgrad-selftest-repro";
  std::vector<std::string> differing;
  std::size_t compared = 0;
  for (const std::string name : {"scalar-quadratic", "zigzag-triangle", "stochastic-quadratic", "meb-random"}) {
    std::vector<std::pair<std::string, std::string>> contents[2];
    for (int rep = 0; rep < 2; ++rep) {
      fs::remove_all(base);
      bench::ExperimentOverrides ov;
      ov.seed = 7;
      ov.out = base.string();
      auto cfg = bench::load_config(name);
      if (name == "stochastic-quadratic") {
        cfg.set("seeds", "3");
        cfg.set("max_iters", "40");
      }
      const auto report = bench::run_experiment(cfg, ov);
      for (const auto& file : report.files) contents[rep].emplace_back(file, read_file(base / name / file));
    }
    compared += contents[0].size();
    if (contents[0] != contents[1]) differing.push_back(name);
  }
  fs::remove_all(base);
  detail = std::to_string(compared) + " files from 4 experiments compared across two runs, " +
           std::to_string(differing.size()) + " experiments differ";
  return differing.empty() && compared > 0;
}

}  // namespace acceptance

/// Runs all criteria in order, reporting each as it finishes.
inline std::vector<CriterionResult> run_acceptance(const std::function<void(const CriterionResult&)>& on_result = {}) {
  using namespace acceptance;
  struct Entry {
    int id;
    const char* title;
    double budget;
    Check check;
  };
  const std::vector<Entry> entries = {
      {1, "exact 1-D trajectory", 1e-3, exact_scalar_trajectory},
      {2, "short-step geometric decay", 1e-3, short_step_decay},
      {3, "simplex finite termination", 1.0, simplex_finite_termination},
      {4, "vanilla rate bound", 10.0, vanilla_rate_bound},
      {5, "nonconvex gap rate", 5.0, nonconvex_gap_rate},
      {6, "LMO oracle equivalence", 30.0, lmo_equivalence},
      {7, "active-set linear convergence", 10.0, active_set_linear_convergence},
      {8, "lazification economy", 10.0, lazification_economy},
      {9, "CGS gradient economy", 30.0, cgs_foo_economy},
      {10, "zero-noise reductions", 5.0, zero_noise_reductions},
      {11, "stochastic ensemble convergence", 60.0, stochastic_ensemble},
      {12, "simplex descent contract", 10.0, sido_contract},
      {13, "adaptive step soundness", 5.0, adaptive_soundness},
      {14, "Caratheodory sparsity and accuracy", 10.0, caratheodory_sparsity},
      {15, "MEB correctness", 30.0, meb_correctness},
      {16, "D-optimal closed form and rank-1 updates", 30.0, dopt_checks},
      {17, "gradient checks", 10.0, gradient_checks},
      {18, "reproducibility", 60.0, reproducibility},
  };
  std::vector<CriterionResult> results;
  for (const auto& e : entries) {
    CriterionResult r;
    r.id = e.id;
    r.title = e.title;
    r.budget_seconds = e.budget;
    const auto start = std::chrono::steady_clock::now();
    try {
      r.passed = e.check(r.detail);
    } catch (const std::exception& ex) {
      r.passed = false;
      r.detail = std::string("exception: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.seconds > r.budget_seconds) {
      r.passed = false;
      r.detail += "; over the runtime budget";
    }
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace condgrad
