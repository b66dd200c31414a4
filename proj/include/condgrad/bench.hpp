#pragma once

#include "condgrad/active_set_methods.hpp"
#include "condgrad/caratheodory.hpp"
#include "condgrad/dopt.hpp"
#include "condgrad/lazy.hpp"
#include "condgrad/meb.hpp"
#include "condgrad/sliding.hpp"
#include "condgrad/stochastic.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace condgrad::bench {

/// Invalid configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Line-based key=value configuration with dotted keys. Reads are tracked
/// so that unknown keys can be reported.
class Config {
 public:
  static Config parse(std::istream& is, const std::string& source = "config") {
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key=value");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
      c.values_[key] = trim(line.substr(eq + 1));
    }
    return c;
  }

  static Config parse_string(const std::string& text, const std::string& source = "config") {
    std::istringstream is(text);
    return parse(is, source);
  }

  /// Later entries win.
  void merge(const Config& other) {
    for (const auto& [k, v] : other.values_) values_[k] = v;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get(const std::string& key) const {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(key + ": missing required value");
    return it->second;
  }

  std::string get(const std::string& key, const std::string& fallback) const {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback, double lo = -HUGE_VAL, double hi = HUGE_VAL) const {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    const std::string s = get(key);
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected a number, got '" + s + "'");
    }
    if (!(v >= lo && v <= hi))
      throw ConfigError(key + ": value " + s + " out of range [" + format_double(lo) + ", " + format_double(hi) + "]");
    return v;
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback, std::int64_t lo = INT64_MIN,
                       std::int64_t hi = INT64_MAX) const {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    const std::string s = get(key);
    std::int64_t v = 0;
    try {
      std::size_t used = 0;
      v = std::stoll(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected an integer, got '" + s + "'");
    }
    if (v < lo || v > hi)
      throw ConfigError(key + ": value " + s + " out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const std::string s = get(key, fallback ? "true" : "false");
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + s + "'");
  }

  std::vector<std::string> get_list(const std::string& key, const std::string& fallback) const {
    std::vector<std::string> out;
    std::istringstream is(get(key, fallback));
    std::string item;
    while (std::getline(is, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
  }

  /// Keys present in the file but never read.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  /// Sorted dump of every key read (with its effective value) plus every
  /// key set explicitly.
  std::string dump() const {
    std::map<std::string, std::string> all = resolved_;
    for (const auto& [k, v] : values_) all[k] = v;
    std::ostringstream os;
    for (const auto& [k, v] : all) os << k << '=' << v << '\n';
    return os.str();
  }

  /// Records the effective value of a defaulted key for dump().
  void resolve(const std::string& key, const std::string& value) const { resolved_[key] = value; }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
  mutable std::map<std::string, std::string> resolved_;
};

struct ExperimentSpec {
  std::string name;
  std::string description;
  std::string defaults;  // key=value lines
};

inline const std::vector<ExperimentSpec>& catalog() {
  static const std::vector<ExperimentSpec> specs = {
      {"scalar-quadratic", "f = x^2 on [-1, 1] from x0 = 1 with open-loop steps (closed-form zigzag)",
       "problem.kind=scalar_quadratic\nalgorithms=fw\nstep.rule=open_loop\nmax_iters=100\ntol=1e-12\n"},
      {"lower-bound-simplex", "f = ||x||^2 on the simplex from e_1: primal gap >= 1/(t+1) - 1/n for LMO-based methods",
       "problem.kind=simplex_norm\nproblem.n=1000\nalgorithms=fw,afw,pfw,lazy_fw\nstep.rule=linesearch\n"
       "max_iters=999\ntol=1e-12\n"},
      {"zigzag-triangle", "f = 2x^2 + y^2 on a triangle with the optimum on an edge: FW zigzags, away-step methods do not",
       "problem.kind=triangle\nalgorithms=fw,afw,pfw,fcfw,boostfw\nstep.rule=linesearch\nmax_iters=1000\ntol=1e-9\n"},
      {"stepsize-comparison-l1", "strongly convex quadratic over the l1 ball under each step rule",
       "problem.kind=quadratic\nregion.kind=l1_ball\nregion.n=100\nregion.radius=1\nproblem.mu=1\nproblem.L=100\n"
       "problem.center=face\nproblem.support=5\nalgorithms=fw\nstep.rule=open_loop,short,linesearch,adaptive\nmax_iters=2000\ntol=1e-8\n"},
      {"stepsize-comparison-l2", "strongly convex quadratic over the l2 ball under each step rule",
       "problem.kind=quadratic\nregion.kind=lp_ball\nregion.p=2\nregion.n=100\nregion.radius=1\nproblem.mu=1\n"
       "problem.L=100\nproblem.center=exterior\nalgorithms=fw\nstep.rule=open_loop,short,linesearch,adaptive\n"
       "max_iters=2000\ntol=1e-8\n"},
      {"birkhoff-quadratic", "quadratic over Birkhoff(8) with a sparse optimum: pairwise FW vs decomposition-invariant PFW",
       "problem.kind=quadratic\nregion.kind=birkhoff\nregion.n=8\nproblem.mu=1\nproblem.L=10\nproblem.center=sparse\n"
       "problem.support=3\nalgorithms=pfw,dipfw\nstep.rule=linesearch\nmax_iters=20000\ntol=1e-8\n"},
      {"lazy-spectrahedron", "matrix completion style quadratic over the nuclear-norm ball: FW vs lazy FW",
       "problem.kind=quadratic\nregion.kind=nuclear_ball\nregion.rows=10\nregion.cols=10\nregion.radius=1\n"
       "problem.mu=1\nproblem.L=1\nproblem.center=exterior\nalgorithms=fw,lazy_fw\nstep.rule=short\n"
       "max_iters=2000\ntol=1e-4\n"},
      {"nep-hypercube", "optimum on a low-dimensional face of the 0/1 hypercube: FW vs NEP-FW",
       "problem.kind=quadratic\nregion.kind=hypercube01\nregion.n=32\nproblem.mu=1\nproblem.L=1\n"
       "problem.center=sparse\nproblem.support=2\nalgorithms=fw,nepfw\nstep.rule=open_loop\nmax_iters=200\n"
       "tol=1e-12\n"},
      {"nep-simplex", "optimum on a low-dimensional face of the simplex: FW vs NEP-FW",
       "problem.kind=quadratic\nregion.kind=simplex\nregion.n=32\nproblem.mu=1\nproblem.L=1\n"
       "problem.center=sparse\nproblem.support=5\nalgorithms=fw,nepfw\nstep.rule=open_loop\nmax_iters=200\n"
       "tol=1e-12\n"},
      {"cgs-vs-fw", "interior optimum over the l1 ball: gradient calls of CGS vs FW",
       "problem.kind=quadratic\nregion.kind=l1_ball\nregion.n=50\nregion.radius=1\nproblem.mu=0\nproblem.L=10\n"
       "problem.center=interior\nproblem.depth=0.95\nalgorithms=fw,cgs\nstep.rule=short\nmax_iters=20000\ntol=1e-4\n"},
      {"bcg-vs-afw", "strongly convex quadratic over the simplex with the optimum on a face: BCG vs AFW",
       "problem.kind=quadratic\nregion.kind=simplex\nregion.n=50\nproblem.mu=1\nproblem.L=10\n"
       "problem.center=face\nproblem.support=10\nalgorithms=fw,afw,bcg\nstep.rule=short\nmax_iters=20000\ntol=1e-8\n"},
      {"stochastic-quadratic", "Gaussian-noise quadratic on the simplex: five stochastic estimators over 10 seeds",
       "problem.kind=stochastic_quadratic\nregion.kind=simplex\nregion.n=20\nproblem.mu=1\nproblem.L=2\n"
       "problem.center=exterior\nproblem.noise=0.1\nalgorithms=sfw,momentum,spider,svrf,one_sample\nseeds=10\n"
       "max_iters=100\ntol=1e-12\n"},
      {"caratheodory-birkhoff", "sparse approximation of a 5-atom mixture in Birkhoff(4)",
       "problem.kind=caratheodory\nregion.kind=birkhoff\nregion.n=4\nproblem.atoms=5\nproblem.p=2\nproblem.eps=0.05\n"
       "algorithms=caratheodory\nstep.rule=open_loop\nmax_iters=10000\ntol=1e-12\n"},
      {"meb-random", "minimum enclosing ball coreset of 200 random points in R^3",
       "problem.kind=meb\nproblem.points=200\nproblem.dim=3\nalgorithms=meb,meb_afw\nmax_iters=100000\n"
       "record_every=100\ntol=1e-6\n"},
      {"dopt-gaussian", "D-optimal design for 50 Gaussian vectors in R^5: FW vs away-step FW",
       "problem.kind=dopt\nproblem.points=50\nproblem.dim=5\nalgorithms=dopt_fw,dopt_afw\nmax_iters=200000\n"
       "tol=1e-6\n"},
  };
  return specs;
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// Catalog names closest to `name`: substring matches and names within
/// edit distance max(3, |name|/3), best first.
inline std::vector<std::string> nearest_experiments(const std::string& name) {
  std::vector<std::pair<std::size_t, std::string>> scored;
  const std::size_t limit = std::max<std::size_t>(3, name.size() / 3);
  for (const auto& s : catalog()) {
    const std::size_t d = edit_distance(name, s.name);
    const bool sub = !name.empty() && s.name.find(name) != std::string::npos;
    if (d <= limit || sub) scored.emplace_back(sub ? 0 : d, s.name);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::string> out;
  for (const auto& [d, n] : scored) out.push_back(n);
  return out;
}

inline const ExperimentSpec* find_experiment(const std::string& name) {
  for (const auto& s : catalog())
    if (s.name == name) return &s;
  return nullptr;
}

/// Human-readable catalog, or one name per line when machine_readable.
inline std::string list_experiments(bool machine_readable) {
  std::ostringstream os;
  std::size_t width = 0;
  for (const auto& s : catalog()) width = std::max(width, s.name.size());
  for (const auto& s : catalog()) {
    if (machine_readable) {
      os << s.name << '\n';
    } else {
      os << s.name << std::string(width + 2 - s.name.size(), ' ') << s.description << '\n';
    }
  }
  return os.str();
}

/// Resolves a catalog name or a config file path into a full config. The
/// experiment's defaults sit under the file's own entries.
inline Config load_config(const std::string& target) {
  if (const auto* spec = find_experiment(target)) {
    Config c = Config::parse_string(spec->defaults, spec->name);
    c.set("name", spec->name);
    return c;
  }
  if (std::filesystem::is_regular_file(target)) {
    std::ifstream in(target);
    Config file = Config::parse(in, target);
    Config c;
    if (file.has("experiment")) {
      const std::string base = file.get("experiment");
      const auto* spec = find_experiment(base);
      if (!spec) throw ConfigError("experiment: unknown experiment '" + base + "'");
      c = Config::parse_string(spec->defaults, spec->name);
      c.set("name", spec->name);
    }
    c.merge(file);
    if (!c.has("name")) c.set("name", std::filesystem::path(target).stem().string());
    return c;
  }
  std::string msg = "unknown experiment '" + target + "'";
  const auto near = nearest_experiments(target);
  if (!near.empty()) {
    msg += "; did you mean:";
    for (const auto& n : near) msg += " " + n;
  }
  msg += " (see 'list')";
  throw ConfigError(msg);
}

/// A built instance: objective, region, start point and extras.
struct Instance {
  std::string kind;
  std::optional<FeasibleRegion> region;
  Objective objective;
  std::optional<Point> x0;
  std::optional<StochasticOracle> oracle;
  // Caratheodory target, MEB points, D-opt vectors.
  Point target;
  std::vector<Point> points;
  Eigen::MatrixXd vectors;
};

namespace detail {

inline FeasibleRegion build_region(const Config& c) {
  const std::string kind = c.get("region.kind");
  const auto n = c.get_int("region.n", 10, 1, 100000000);
  if (kind == "simplex") return FeasibleRegion::simplex(n);
  if (kind == "l1_ball") return FeasibleRegion::l1_ball(n, c.get_double("region.radius", 1.0, 1e-300));
  if (kind == "lp_ball")
    return FeasibleRegion::lp_ball(n, c.get_double("region.radius", 1.0, 1e-300), c.get_double("region.p", 2.0, 1.0));
  if (kind == "box") {
    const double lo = c.get_double("region.lower", -1.0);
    const double hi = c.get_double("region.upper", 1.0, lo);
    return FeasibleRegion::box(Point::Constant(n, lo), Point::Constant(n, hi));
  }
  if (kind == "hypercube01") return FeasibleRegion::hypercube01(n);
  if (kind == "birkhoff") return FeasibleRegion::birkhoff(n);
  if (kind == "nuclear_ball")
    return FeasibleRegion::nuclear_ball(c.get_int("region.rows", 5, 1, 100000), c.get_int("region.cols", 5, 1, 100000),
                                        c.get_double("region.radius", 1.0, 1e-300));
  throw ConfigError("region.kind: unknown region '" + kind +
                    "' (simplex, l1_ball, lp_ball, box, hypercube01, birkhoff, nuclear_ball)");
}

inline Point region_center(const FeasibleRegion& r) {
  const Eigen::Index n = r.dimension();
  switch (r.kind()) {
    case RegionKind::simplex: return Point::Constant(n, 1.0 / static_cast<double>(n));
    case RegionKind::birkhoff: return Point::Constant(n, 1.0 / static_cast<double>(r.rows()));
    case RegionKind::hypercube01: return Point::Constant(n, 0.5);
    case RegionKind::box: return 0.5 * (r.lower() + r.upper());
    default: return Point::Zero(n);
  }
}

/// Distinct vertices from LMO calls on Gaussian costs.
inline std::vector<Point> random_vertices(const FeasibleRegion& r, std::size_t k, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<Point> out;
  for (int attempt = 0; out.size() < k && attempt < 100 * static_cast<int>(k) + 100; ++attempt) {
    Point cost(r.dimension());
    for (Eigen::Index i = 0; i < cost.size(); ++i) cost[i] = normal(rng);
    Point v = r.lmo(cost);
    if (std::none_of(out.begin(), out.end(), [&](const Point& w) { return (w - v).norm() < 1e-12; }))
      out.push_back(std::move(v));
  }
  return out;
}

inline Point random_mixture(const std::vector<Point>& atoms, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  std::vector<double> w(atoms.size());
  double total = 0.0;
  for (double& wi : w) total += (wi = unif(rng));
  Point x = Point::Zero(atoms.front().size());
  for (std::size_t i = 0; i < atoms.size(); ++i) x += (w[i] / total) * atoms[i];
  return x;
}

/// H = Q' diag(mu .. L) Q with Q from a Gaussian QR.
inline Eigen::MatrixXd random_spd(Eigen::Index n, double mu, double L, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = normal(rng);
  const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ();
  Point eig(n);
  for (Eigen::Index i = 0; i < n; ++i)
    eig[i] = n == 1 ? L : mu + (L - mu) * static_cast<double>(i) / static_cast<double>(n - 1);
  return Q * eig.asDiagonal() * Q.transpose();
}

/// High-accuracy reference value of min f over the region.
inline double reference_optimum(const Objective& f, const FeasibleRegion& r) {
  RunConfig rc;
  rc.step_rule = StepRule::line_search;
  rc.tol = 1e-12;
  rc.max_iters = 200000;
  rc.record_every = 1000000;
  const bool polytope = r.kind() != RegionKind::lp_ball && r.kind() != RegionKind::nuclear_ball;
  const RunResult res = polytope ? run_pfw(f, r, rc) : run_fw(f, r, rc);
  return f.value(res.x);
}

}  // namespace detail

/// Builds the problem named by problem.kind. Instance randomness comes from
/// `seed`.
inline Instance build_instance(const Config& c, std::uint64_t seed) {
  Instance inst;
  inst.kind = c.get("problem.kind");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const std::string& k = inst.kind;
  if (k == "scalar_quadratic") {
    inst.region = FeasibleRegion::box(Point::Constant(1, -1.0), Point::Constant(1, 1.0));
    inst.objective = squared_distance(Point::Zero(1));
    inst.objective.optimum_value = 0.0;
    inst.x0 = Point::Constant(1, c.get_double("problem.x0", 1.0, -1.0, 1.0));
  } else if (k == "simplex_norm") {
    const auto n = c.get_int("problem.n", 1000, 1, 10000000);
    inst.region = FeasibleRegion::simplex(n);
    inst.objective = squared_distance(Point::Zero(n));
    inst.objective.optimum_value = 1.0 / static_cast<double>(n);
    inst.x0 = Point::Unit(n, 0);
  } else if (k == "triangle") {
    Point a(2), b(2), d(2);
    a << -1.0, 0.0;
    b << 1.0, 0.0;
    d << 0.0, 1.0;
    inst.region = FeasibleRegion::vertex_hull({a, b, d});
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2, 2);
    H(0, 0) = 4.0;
    H(1, 1) = 2.0;
    inst.objective = quadratic_objective(H, Point::Zero(2));
    inst.objective.optimum_value = 0.0;
    inst.x0 = d;
  } else if (k == "quadratic" || k == "stochastic_quadratic") {
    const FeasibleRegion region = detail::build_region(c);
    const double mu = c.get_double("problem.mu", 1.0, 0.0);
    const double L = c.get_double("problem.L", 10.0, mu);
    if (L <= 0.0) throw ConfigError("problem.L: must be positive");
    const std::string center = c.get("problem.center", "interior");
    const Eigen::Index n = region.dimension();
    const Eigen::MatrixXd H = detail::random_spd(n, mu, L, rng);
    Point target;
    std::optional<Point> optimum;
    bool known = true;
    if (center == "interior") {
      const auto atoms = detail::random_vertices(region, static_cast<std::size_t>(std::min<Eigen::Index>(n + 1, 20)), rng);
      const double depth = c.get_double("problem.depth", 0.5, 0.0, 1.0 - 1e-12);
      target = depth * detail::random_mixture(atoms, rng) + (1.0 - depth) * detail::region_center(region);
    } else if (center == "sparse") {
      const auto support = c.get_int("problem.support", 3, 1, 1000);
      const auto atoms = detail::random_vertices(region, static_cast<std::size_t>(support), rng);
      target = detail::random_mixture(atoms, rng);
    } else if (center == "face") {
      // y in the relative interior of the face minimizing <g, .>, and
      // grad f(y) = g, so y is optimal with strict complementarity.
      if (region.kind() != RegionKind::simplex && region.kind() != RegionKind::l1_ball)
        throw ConfigError("problem.center: face is defined for simplex and l1_ball regions");
      if (mu <= 0.0) throw ConfigError("problem.center: face needs problem.mu > 0");
      const auto support = c.get_int("problem.support", 3, 1, n);
      const double push = c.get_double("problem.push", 1.0, 1e-300);
      std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), Eigen::Index{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      std::uniform_real_distribution<double> unif(0.5, 1.5);
      std::bernoulli_distribution coin;
      Point y = Point::Zero(n);
      Point g = Point::Zero(n);
      const bool l1 = region.kind() == RegionKind::l1_ball;
      const double r = l1 ? region.radius() : 1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index j = perm[static_cast<std::size_t>(i)];
        const double sign = l1 && coin(rng) ? -1.0 : 1.0;
        if (i < support) {
          y[j] = sign * unif(rng);
          g[j] = l1 ? -sign * push : 0.0;
        } else {
          g[j] = l1 ? push * (unif(rng) - 1.0) : push * unif(rng);
        }
      }
      y *= r / y.cwiseAbs().sum();
      target = y - H.ldlt().solve(g);
      optimum = y;
    } else if (center == "exterior") {
      const Point mid = detail::region_center(region);
      const auto atoms = detail::random_vertices(region, 2, rng);
      target = mid + 1.5 * (detail::random_mixture(atoms, rng) - mid) + 0.5 * (atoms.front() - mid);
      known = false;
    } else {
      throw ConfigError("problem.center: expected interior, sparse, face or exterior, got '" + center + "'");
    }
    inst.objective = quadratic_objective(H, -(H * target), 0.5 * target.dot(H * target));
    if (optimum) {
      inst.objective.optimum_value = inst.objective.value(*optimum);
    } else if (known) {
      inst.objective.optimum_value = 0.0;
    } else if (c.get_bool("problem.reference", true)) {
      inst.objective.optimum_value = detail::reference_optimum(inst.objective, region);
    }
    inst.region = region;
    inst.x0 = region.lmo(inst.objective.gradient(region.lmo(Point::Zero(n))));
    if (k == "stochastic_quadratic") {
      if (region.kind() != RegionKind::simplex)
        throw ConfigError("region.kind: the stochastic quadratic is defined on the simplex only");
      const double noise = c.get_double("problem.noise", 0.1, 0.0);
      inst.oracle = gaussian_quadratic_oracle(inst.objective, n, noise, static_cast<double>(n) + 3.0);
    }
  } else if (k == "caratheodory") {
    const FeasibleRegion region = detail::build_region(c);
    const auto atoms = detail::random_vertices(region, static_cast<std::size_t>(c.get_int("problem.atoms", 5, 1, 1000)), rng);
    inst.target = detail::random_mixture(atoms, rng);
    inst.region = region;
    inst.objective = lp_distance_squared(inst.target, c.get_double("problem.p", 2.0, 2.0, 1e6));
    inst.objective.optimum_value = 0.0;
  } else if (k == "meb") {
    const std::string file = c.get("problem.points_file", "");
    if (!file.empty()) {
      std::ifstream in(file);
      if (!in) throw ConfigError("problem.points_file: cannot open '" + file + "'");
      inst.points = load_points(in);
    } else {
      const auto m = c.get_int("problem.points", 200, 1, 10000000);
      const auto dim = c.get_int("problem.dim", 3, 1, 100000);
      for (std::int64_t i = 0; i < m; ++i) {
        Point a(dim);
        for (Eigen::Index j = 0; j < dim; ++j) a[j] = normal(rng);
        inst.points.push_back(std::move(a));
      }
    }
  } else if (k == "dopt") {
    const auto m = c.get_int("problem.points", 50, 1, 10000000);
    const auto dim = c.get_int("problem.dim", 5, 1, 10000);
    if (m < dim) throw ConfigError("problem.points: need at least problem.dim vectors");
    inst.vectors.resize(m, dim);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < dim; ++j) inst.vectors(i, j) = normal(rng);
    inst.objective = dopt_objective(inst.vectors);
  } else {
    throw ConfigError("problem.kind: unknown problem '" + k +
                      "' (scalar_quadratic, simplex_norm, triangle, quadratic, stochastic_quadratic, caratheodory, "
                      "meb, dopt)");
  }
  return inst;
}

/// One finished run, ready to serialize.
struct RunOutcome {
  std::string label;
  std::uint64_t seed = 0;
  RunTrace trace;
  bool converged = false;
  std::size_t active_set_bytes = 0;
  std::vector<std::pair<std::string, std::string>> extra;
};

inline const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names = {
      "fw", "afw", "pfw", "fcfw", "dipfw", "lazy_fw", "lazy_afw", "bcg", "cgs", "nepfw", "boostfw",
      "sfw", "momentum", "spider", "svrf", "one_sample", "scgs", "caratheodory", "meb", "meb_afw", "dopt_fw", "dopt_afw"};
  return names;
}

namespace detail {

inline RunConfig run_config(const Config& c, const std::string& rule) {
  RunConfig rc;
  rc.max_iters = c.get_int("max_iters", 1000, 0);
  rc.tol = c.get_double("tol", 1e-6, 1e-300);
  try {
    rc.step_rule = parse_step_rule(rule);
  } catch (const ContractViolation&) {
    throw ConfigError("step.rule: unknown step rule '" + rule + "' (open_loop, short, linesearch, adaptive)");
  }
  rc.open_loop_shift = static_cast<int>(c.get_int("step.shift", 2, 2, 1000000));
  rc.adaptive.tau = c.get_double("step.tau", 2.0, 1.0 + 1e-12);
  rc.adaptive.eta = c.get_double("step.eta", 0.9, 1e-12, 1.0);
  rc.adaptive.alpha = c.get_double("step.alpha", 0.5, 1e-12, 1.0);
  if (c.has("step.L0")) rc.adaptive_L0 = c.get_double("step.L0", 1.0, 1e-300);
  if (c.has("step.L")) rc.L = c.get_double("step.L", 1.0, 1e-300);
  rc.record_every = c.get_int("record_every", 1, 1);
  return rc;
}

inline std::vector<std::pair<std::string, std::string>> counter_fields(const Counters& k) {
  return {{"cache_hits", std::to_string(k.cache_hits)},   {"negative_calls", std::to_string(k.negative_calls)},
          {"fw_steps", std::to_string(k.fw_steps)},       {"away_steps", std::to_string(k.away_steps)},
          {"drop_steps", std::to_string(k.drop_steps)},   {"pairwise_steps", std::to_string(k.pairwise_steps)},
          {"descent_steps", std::to_string(k.descent_steps)}, {"inner_iterations", std::to_string(k.inner_iterations)}};
}

inline RunOutcome from_result(RunResult r) {
  RunOutcome o;
  o.trace = std::move(r.trace);
  o.converged = r.converged;
  o.active_set_bytes = r.active_set_bytes;
  o.extra = counter_fields(r.counters);
  return o;
}

inline bool is_stochastic(const std::string& a) {
  return a == "sfw" || a == "momentum" || a == "spider" || a == "svrf" || a == "one_sample" || a == "scgs";
}

inline RunOutcome run_one(const std::string& algo, const Config& c, const Instance& inst, const RunConfig& rc,
                          std::uint64_t seed) {
  const auto need_region = [&]() -> const FeasibleRegion& {
    if (!inst.region) throw ConfigError("algorithms: '" + algo + "' needs a region-based problem");
    return *inst.region;
  };
  const auto need_kind = [&](const char* kind) {
    if (inst.kind != kind)
      throw ConfigError("algorithms: '" + algo + "' needs problem.kind=" + kind + ", got " + inst.kind);
  };
  RunConfig cfg = rc;
  cfg.seed = seed;
  cfg.x0 = inst.x0;
  if (algo == "caratheodory") {
    need_kind("caratheodory");
    const double p = c.get_double("problem.p", 2.0, 2.0, 1e6);
    const double eps = c.get_double("problem.eps", 0.05, 1e-300);
    cfg.x0.reset();
    auto res = approx_caratheodory(inst.target, need_region(), p, eps, cfg);
    RunOutcome o;
    o.trace = std::move(res.trace);
    o.converged = res.reached;
    o.active_set_bytes = res.active.storage_bytes();
    o.extra = {{"atoms", std::to_string(res.active.size())}, {"residual_norm", format_double(res.residual_norm)}};
    return o;
  }
  if (algo == "meb" || algo == "meb_afw") {
    need_kind("meb");
    MebOptions opt;
    opt.variant = algo == "meb" ? MebVariant::fw : MebVariant::afw;
    opt.max_iters = cfg.max_iters;
    opt.record_every = cfg.record_every;
    auto res = meb_coreset(inst.points, cfg.tol, opt);
    RunOutcome o;
    o.trace = std::move(res.trace);
    o.converged = res.fw_gap <= cfg.tol;
    std::ostringstream center;
    for (Eigen::Index i = 0; i < res.center.size(); ++i) center << (i ? " " : "") << format_double(res.center[i]);
    o.extra = {{"radius_sq", format_double(res.radius_sq)},
               {"center", center.str()},
               {"coreset_size", std::to_string(res.coreset_indices.size())}};
    return o;
  }
  if (algo == "dopt_fw" || algo == "dopt_afw") {
    need_kind("dopt");
    auto res = dopt_design(inst.vectors, cfg.tol, algo == "dopt_fw" ? DoptVariant::fw : DoptVariant::afw,
                           cfg.max_iters, c.get_int("dopt.refresh", 50, 1), cfg.record_every);
    RunOutcome o;
    o.trace = std::move(res.trace);
    o.converged = res.converged;
    o.extra = {{"log_det", format_double(res.state.log_det)}};
    return o;
  }
  const FeasibleRegion& region = need_region();
  if (is_stochastic(algo)) {
    if (!inst.oracle) throw ConfigError("algorithms: '" + algo + "' needs problem.kind=stochastic_quadratic");
    const double L = *inst.objective.smoothness;
    if (algo == "scgs") {
      ScgsOptions opt;
      opt.batch_cap = c.get_int("stochastic.batch_cap", 1000000, 1);
      return from_result(run_scgs(inst.objective, *inst.oracle, region, cfg, opt));
    }
    StochasticSchedule s;
    s.alpha = c.get_double("stochastic.alpha", 1.0, 1e-300);
    if (c.has("stochastic.batch")) s.fixed_batch = c.get_int("stochastic.batch", 1, 1);
    s.L = L;
    s.D = region.diameter();
    s.sigma_sq = inst.oracle->variance_bound.value_or(0.0);
    s.batch_cap = c.get_int("stochastic.batch_cap", 1000000, 1);
    const EstimatorVariant v = algo == "sfw"        ? EstimatorVariant::batch_mean
                               : algo == "momentum" ? EstimatorVariant::momentum
                               : algo == "spider"   ? EstimatorVariant::spider
                               : algo == "svrf"     ? EstimatorVariant::svrf
                                                    : EstimatorVariant::one_sample;
    return from_result(run_stochastic_fw(v, inst.objective, *inst.oracle, region, cfg, s));
  }
  if (inst.kind == "caratheodory" || inst.kind == "meb" || inst.kind == "dopt")
    throw ConfigError("algorithms: '" + algo + "' does not apply to problem.kind=" + inst.kind);
  if (algo == "fw") return from_result(run_fw(inst.objective, region, cfg));
  if (algo == "afw") return from_result(run_afw(inst.objective, region, cfg));
  if (algo == "pfw") return from_result(run_pfw(inst.objective, region, cfg));
  if (algo == "fcfw") return from_result(run_fcfw(inst.objective, region, cfg));
  if (algo == "dipfw") {
    DipfwOptions opt;
    opt.power_of_two = c.get_bool("dipfw.power_of_two", false);
    if (opt.power_of_two) {
      opt.mu = c.get_double("dipfw.mu", inst.objective.strong_convexity.value_or(0.0), 1e-300);
      opt.sparsity = static_cast<int>(c.get_int("dipfw.sparsity", 1, 1));
    }
    return from_result(run_dipfw(inst.objective, region, cfg, opt));
  }
  if (algo == "lazy_fw" || algo == "lazy_afw") {
    LazyOptions opt;
    opt.K = c.get_double("lazy.K", 1.0, 1.0);
    opt.cache_capacity = static_cast<std::size_t>(c.get_int("lazy.cache", 256, 1));
    auto res = run_lazy(algo == "lazy_fw" ? LazyVariant::fw : LazyVariant::afw, inst.objective, region, cfg, opt);
    auto o = from_result(std::move(res.run));
    o.extra.emplace_back("negative_certificates", std::to_string(res.certificates.size()));
    return o;
  }
  if (algo == "bcg") {
    BcgOptions opt;
    opt.K = c.get_double("bcg.K", 1.0, 1.0);
    opt.prune_every = c.get_int("bcg.prune_every", 100, 0);
    auto res = run_bcg(inst.objective, region, cfg, opt);
    return from_result(std::move(res.run));
  }
  if (algo == "cgs") {
    CgsSchedule s;
    const std::string mode = c.get("cgs.mode", "standard");
    if (mode == "standard") s.mode = CgsMode::standard;
    else if (mode == "fixed_horizon") s.mode = CgsMode::fixed_horizon;
    else if (mode == "restart") s.mode = CgsMode::restart;
    else throw ConfigError("cgs.mode: expected standard, fixed_horizon or restart, got '" + mode + "'");
    s.horizon = c.get_int("cgs.horizon", 0, 0);
    return from_result(run_cgs(inst.objective, region, cfg, s));
  }
  if (algo == "nepfw") return from_result(run_nepfw(inst.objective, region, cfg));
  if (algo == "boostfw") {
    BoostConfig b;
    b.K = static_cast<int>(c.get_int("boost.K", 1000, 1, 1000000));
    b.delta = c.get_double("boost.delta", 1e-3, 1e-300, 1.0 - 1e-16);
    return from_result(run_boostfw(inst.objective, region, cfg, b));
  }
  throw ConfigError("algorithms: unknown algorithm '" + algo + "'");
}

/// Pointwise median over seeds of every column; rows align by position and
/// the shortest trace bounds the length.
inline RunTrace median_trace(const std::vector<const RunTrace*>& traces) {
  RunTrace out;
  std::size_t len = traces.front()->size();
  for (const auto* t : traces) len = std::min(len, t->size());
  const auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  for (std::size_t i = 0; i < len; ++i) {
    TraceRow r = traces.front()->rows[i];
    std::vector<double> f, g, h, s, lmo, foo, sfo, act;
    for (const auto* t : traces) {
      const TraceRow& q = t->rows[i];
      f.push_back(q.f);
      g.push_back(q.fw_gap);
      h.push_back(q.primal_gap);
      s.push_back(q.step_size);
      lmo.push_back(static_cast<double>(q.lmo_calls));
      foo.push_back(static_cast<double>(q.foo_calls));
      sfo.push_back(static_cast<double>(q.sfo_calls));
      act.push_back(static_cast<double>(q.active_set_size));
    }
    r.f = median(f);
    r.fw_gap = median(g);
    r.primal_gap = median(h);
    r.step_size = median(s);
    r.lmo_calls = static_cast<std::int64_t>(median(lmo));
    r.foo_calls = static_cast<std::int64_t>(median(foo));
    r.sfo_calls = static_cast<std::int64_t>(median(sfo));
    r.active_set_size = static_cast<std::int64_t>(median(act));
    r.wall_time_ns = 0;
    out.rows.push_back(r);
  }
  return out;
}

}  // namespace detail

struct ExperimentReport {
  std::string name;
  std::string resolved_config;
  std::vector<RunOutcome> runs;
  std::string summary;
  std::vector<std::string> files;  // written paths, relative to the output directory
};

struct ExperimentOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> max_iters;
  std::optional<double> tol;
  std::optional<std::string> out;
  bool record_time = false;
};

inline std::string summary_block(const RunOutcome& o) {
  std::ostringstream os;
  const TraceRow last = o.trace.empty() ? TraceRow{} : o.trace.back();
  os << '[' << o.label << " seed=" << o.seed << "]\n";
  os << "iterations=" << last.t << '\n';
  os << "converged=" << (o.converged ? "true" : "false") << '\n';
  os << "f=" << format_double(last.f) << '\n';
  os << "fw_gap=" << format_double(last.fw_gap) << '\n';
  os << "primal_gap=" << format_double(last.primal_gap) << '\n';
  os << "primal_gap_exact=" << (o.trace.primal_gap_exact ? "true" : "false") << '\n';
  os << "lmo_calls=" << last.lmo_calls << '\n';
  os << "foo_calls=" << last.foo_calls << '\n';
  os << "sfo_calls=" << last.sfo_calls << '\n';
  os << "active_set_size=" << last.active_set_size << '\n';
  os << "active_set_bytes=" << o.active_set_bytes << '\n';
  os << "wall_time_ns=" << last.wall_time_ns << '\n';
  for (const auto& [k, v] : o.extra) os << k << '=' << v << '\n';
  return os.str();
}

/// Runs every (algorithm, step rule, seed) combination of the config and
/// writes <out>/<name>/{config.txt, summary.txt, <run>.csv}. Output is
/// byte-identical across reruns unless record_time is set.
inline ExperimentReport run_experiment(Config config, const ExperimentOverrides& ov = {}) {
  if (ov.seed) config.set("seed", std::to_string(*ov.seed));
  if (ov.max_iters) config.set("max_iters", std::to_string(*ov.max_iters));
  if (ov.tol) config.set("tol", format_double(*ov.tol));
  if (ov.out) config.set("out", *ov.out);
  ExperimentReport report;
  report.name = config.get("name", "experiment");
  const auto seed = static_cast<std::uint64_t>(config.get_int("seed", 0, 0));
  const auto seeds = config.get_int("seeds", 1, 1, 100000);
  const auto algorithms = config.get_list("algorithms", "fw");
  const auto rules = config.get_list("step.rule", "short");
  const std::string out_dir = config.get("out", "results");
  for (const auto& a : algorithms) {
    if (std::find(algorithm_names().begin(), algorithm_names().end(), a) != algorithm_names().end()) continue;
    std::string msg = "algorithms: unknown algorithm '" + a + "' (";
    for (std::size_t i = 0; i < algorithm_names().size(); ++i) msg += (i ? ", " : "") + algorithm_names()[i];
    throw ConfigError(msg + ")");
  }
  std::vector<RunConfig> rcs;
  for (const auto& r : rules) {
    rcs.push_back(detail::run_config(config, r));
    rcs.back().record_time = ov.record_time;
  }
  const Instance inst = build_instance(config, seed);
  for (const auto& a : algorithms) {
    const bool stochastic = detail::is_stochastic(a);
    const std::int64_t reps = stochastic ? seeds : 1;
    for (std::size_t ri = 0; ri < rules.size(); ++ri) {
      const bool uses_rule = !(stochastic || a == "nepfw" || a == "cgs" || a == "meb" || a == "dopt_fw" ||
                               a == "dopt_afw");
      if (!uses_rule && ri > 0) continue;
      std::vector<std::size_t> group;
      for (std::int64_t s = 0; s < reps; ++s) {
        RunOutcome o = detail::run_one(a, config, inst, rcs[ri], seed + static_cast<std::uint64_t>(s));
        o.label = a + (uses_rule && rules.size() > 1 ? "-" + rules[ri] : "");
        o.seed = seed + static_cast<std::uint64_t>(s);
        group.push_back(report.runs.size());
        report.runs.push_back(std::move(o));
      }
      if (group.size() > 1) {
        std::vector<const RunTrace*> traces;
        for (auto gi : group) traces.push_back(&report.runs[gi].trace);
        RunOutcome med;
        med.label = report.runs[group.front()].label + "-median";
        med.seed = seed;
        med.trace = detail::median_trace(traces);
        report.runs.push_back(std::move(med));
      }
    }
  }
  const auto unused = config.unused_keys();
  if (!unused.empty()) {
    std::string msg = unused.front() + ": unknown key";
    if (unused.size() > 1) msg += " (also: " + std::to_string(unused.size() - 1) + " more)";
    throw ConfigError(msg);
  }
  config.resolve("seed", std::to_string(seed));
  config.resolve("seeds", std::to_string(seeds));
  config.resolve("out", out_dir);
  report.resolved_config = config.dump();

  std::ostringstream summary;
  summary << "experiment=" << report.name << '\n';
  for (const auto& o : report.runs) summary << '\n' << summary_block(o);
  report.summary = summary.str();

  const std::filesystem::path dir = std::filesystem::path(out_dir) / report.name;
  std::filesystem::create_directories(dir);
  const auto write = [&](const std::string& file, const std::string& text) {
    std::ofstream f(dir / file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / file).string());
    f << text;
    report.files.push_back(file);
  };
  write("config.txt", report.resolved_config);
  write("summary.txt", report.summary);
  for (const auto& o : report.runs) write(o.label + "_seed" + std::to_string(o.seed) + ".csv", o.trace.to_csv());
  return report;
}

}  // namespace condgrad::bench
