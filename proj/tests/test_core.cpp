#include "condgrad/condgrad.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

#include <random>
#include <sstream>

using namespace condgrad;

namespace {

Point vec(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

Point gaussian(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Point p(n);
  for (Eigen::Index i = 0; i < n; ++i) p[i] = normal(rng);
  return p;
}

Eigen::MatrixXd spd(Eigen::Index n, std::mt19937_64& rng, double shift = 0.1) {
  Eigen::MatrixXd B(n, n);
  for (Eigen::Index j = 0; j < n; ++j) B.col(j) = gaussian(n, rng);
  return B.transpose() * B / static_cast<double>(n) + shift * Eigen::MatrixXd::Identity(n, n);
}

FeasibleRegion unit_interval() { return FeasibleRegion::box(vec({-1.0}), vec({1.0})); }

Point random_simplex_point(Eigen::Index n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e;
  Point p(n);
  for (Eigen::Index i = 0; i < n; ++i) p[i] = e(rng);
  return p / p.sum();
}

}  // namespace

// ---- gaps ----

TEST(FwGap, ZeroAtSimplexBarycenter) {
  const auto r = FeasibleRegion::simplex(3);
  const auto rep = fw_gap(squared_distance(Point::Zero(3)), Point::Constant(3, 1.0 / 3.0), r);
  EXPECT_NEAR(rep.fw_gap, 0.0, 1e-15);
}

TEST(FwGap, VertexStartPicksLowestIndexTie) {
  const auto rep = fw_gap(squared_distance(Point::Zero(3)), Point::Unit(3, 0), FeasibleRegion::simplex(3));
  EXPECT_DOUBLE_EQ(rep.fw_gap, 2.0);
  EXPECT_EQ(rep.fw_vertex, Point::Unit(3, 1));
}

TEST(FwGap, ScalarQuadraticStartState) {
  const auto rep = fw_gap(squared_distance(Point::Zero(1)), vec({1.0}), unit_interval());
  EXPECT_DOUBLE_EQ(rep.fw_gap, 4.0);
  EXPECT_DOUBLE_EQ(rep.fw_vertex[0], -1.0);
}

TEST(FwGap, NonFiniteGradientIsNumericFailure) {
  Objective f = squared_distance(Point::Zero(1));
  f.gradient = [](const Point&) { return vec({std::nan("")}); };
  EXPECT_THROW(fw_gap(f, vec({0.0}), unit_interval()), NumericFailure);
}

TEST(FwGap, NonNegativeAndBoundsPrimalGap) {
  std::mt19937_64 rng(1);
  const auto r = FeasibleRegion::simplex(4);
  for (int k = 0; k < 50; ++k) {
    const Eigen::MatrixXd H = spd(4, rng);
    const Objective f = quadratic_objective(H, gaussian(4, rng));
    // Reference optimum from a fine grid over the simplex.
    double fstar = std::numeric_limits<double>::infinity();
    const int m = 30;
    for (int a = 0; a <= m; ++a)
      for (int b = 0; a + b <= m; ++b)
        for (int c = 0; a + b + c <= m; ++c) fstar = std::min(fstar, f.value(vec({a * 1.0, b * 1.0, c * 1.0, m - a - b - c * 1.0}) / m));
    const Point x = random_simplex_point(4, rng);
    const double g = fw_gap(f, x, r).fw_gap;
    EXPECT_GE(g, 0.0);
    EXPECT_GE(g + 1e-12, f.value(x) - fstar);
  }
}

TEST(StrongFwGap, SingletonVertex) {
  const ActiveSet s(Point::Unit(3, 0));
  EXPECT_DOUBLE_EQ(strong_fw_gap(squared_distance(Point::Zero(3)), s, FeasibleRegion::simplex(3)), 2.0);
}

TEST(StrongFwGap, ZeroAtOptimumWithEqualProducts) {
  ActiveSet s(Point::Unit(3, 0));
  s.add_atom(Point::Unit(3, 1), 0.0);
  s.add_atom(Point::Unit(3, 2), 0.0);
  s.set_weights({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  EXPECT_NEAR(strong_fw_gap(squared_distance(Point::Zero(3)), s, FeasibleRegion::simplex(3)), 0.0, 1e-15);
}

TEST(StrongFwGap, MatchesBruteForceAndDominatesFwGap) {
  std::mt19937_64 rng(2);
  const auto r = FeasibleRegion::simplex(5);
  const auto verts = r.enumerate_vertices();
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  for (int k = 0; k < 100; ++k) {
    const Objective f = quadratic_objective(spd(5, rng), gaussian(5, rng));
    std::vector<std::size_t> idx{0, 1, 2, 3, 4};
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t m = 1 + static_cast<std::size_t>(k % 4);
    ActiveSet s(verts[idx[0]]);
    std::vector<double> w{unif(rng)};
    for (std::size_t i = 1; i < m; ++i) {
      s.add_atom(verts[idx[i]], 0.0);
      w.push_back(unif(rng));
    }
    double total = 0.0;
    for (double x : w) total += x;
    for (double& x : w) x /= total;
    s.set_weights(w);
    const Point g = f.gradient(s.iterate());
    double amax = -std::numeric_limits<double>::infinity(), vmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) amax = std::max(amax, g.dot(verts[idx[i]]));
    for (const auto& v : verts) vmin = std::min(vmin, g.dot(v));
    const double sg = strong_fw_gap(f, s, r);
    EXPECT_NEAR(sg, amax - vmin, 1e-12);
    EXPECT_GE(sg + 1e-12, fw_gap(f, s.iterate(), r).fw_gap);
  }
}

TEST(StrongFwGap, EmptyActiveSetIsContractViolation) {
  ActiveSet s(Point::Unit(2, 0));
  s.remove_atom(0);
  EXPECT_THROW(strong_fw_gap(squared_distance(Point::Zero(2)), s, FeasibleRegion::simplex(2)), ContractViolation);
}

// ---- active sets ----

TEST(ActiveSetUpdate, FullFwStepReplacesSet) {
  ActiveSet s(Point::Unit(3, 0));
  s = active_set_update(s, UpdateKind::fw_step, Point::Unit(3, 1), 0.5);
  s = active_set_update(s, UpdateKind::fw_step, Point::Unit(3, 2), 1.0);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.atoms()[0], Point::Unit(3, 2));
  EXPECT_EQ(s.weights()[0], 1.0);
}

TEST(ActiveSetUpdate, ThirdStepGivesTwoThirdsOneThird) {
  ActiveSet s(Point::Unit(3, 0));
  s = active_set_update(s, UpdateKind::fw_step, Point::Unit(3, 1), 1.0 / 3.0);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s.weights()[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.weights()[1], 1.0 / 3.0, 1e-15);
}

TEST(ActiveSetUpdate, MaximalAwayStepDropsAtom) {
  ActiveSet s(Point::Unit(3, 0));
  s = active_set_update(s, UpdateKind::fw_step, Point::Unit(3, 1), 0.25);
  const double lambda = s.weights()[1];
  s = active_set_update(s, UpdateKind::away_step, Point::Unit(3, 1), lambda / (1.0 - lambda));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.atoms()[0], Point::Unit(3, 0));
}

TEST(ActiveSetUpdate, OutOfRangeStepsAreRejected) {
  ActiveSet s(Point::Unit(3, 0));
  s = active_set_update(s, UpdateKind::fw_step, Point::Unit(3, 1), 0.5);
  EXPECT_THROW(active_set_update(s, UpdateKind::fw_step, Point::Unit(3, 2), 1.5), ContractViolation);
  EXPECT_THROW(active_set_update(s, UpdateKind::away_step, Point::Unit(3, 1), 1.5), ContractViolation);
  EXPECT_THROW(active_set_update(s, UpdateKind::fw_step, Point::Unit(3, 2), -0.1), ContractViolation);
}

TEST(ActiveSetUpdate, InvariantsSurviveRandomSequences) {
  std::mt19937_64 rng(3);
  const auto r = FeasibleRegion::birkhoff(3);
  const auto verts = r.enumerate_vertices();
  std::uniform_int_distribution<std::size_t> pick(0, verts.size() - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ActiveSet s(verts[0]);
  for (int k = 0; k < 2000; ++k) {
    const Point& v = verts[pick(rng)];
    const auto found = s.find(v);
    if (found && s.size() > 1 && unif(rng) < 0.4) {
      const double lambda = s.weights()[*found];
      const double gmax = lambda / (1.0 - lambda);
      s = active_set_update(s, unif(rng) < 0.3 ? UpdateKind::drop : UpdateKind::away_step, v, unif(rng) * gmax);
    } else {
      s = active_set_update(s, UpdateKind::fw_step, v, unif(rng));
    }
    ASSERT_LE(s.weight_sum_error(), 1e-12);
    ASSERT_LE(s.reconstruction_error(), 1e-10);
    for (double w : s.weights()) ASSERT_GT(w, ActiveSet::kDropThreshold);
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j) ASSERT_NE(s.atoms()[i], s.atoms()[j]);
  }
}

TEST(PairwiseUpdate, MovesWeightBetweenAtoms) {
  ActiveSet s(Point::Unit(3, 0));
  s = active_set_update(s, UpdateKind::fw_step, Point::Unit(3, 1), 0.5);
  s = pairwise_update(s, 0, Point::Unit(3, 2), 0.5);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR((s.iterate() - vec({0.0, 0.5, 0.5})).norm(), 0.0, 1e-15);
}

// ---- finite differences ----

TEST(FiniteDiff, QuadraticNorm) {
  EXPECT_LE(finite_diff_check(squared_distance(Point::Zero(2)), vec({1.0, 2.0}), 1e-5), 1e-7);
}

TEST(FiniteDiff, DoptAtUniformWeights) {
  std::mt19937_64 rng(4);
  Eigen::MatrixXd a(8, 3);
  for (Eigen::Index i = 0; i < 8; ++i) a.row(i) = gaussian(3, rng).transpose();
  const Objective f = dopt_objective(a);
  const Point x = Point::Constant(8, 1.0 / 8.0);
  EXPECT_LE(finite_diff_check(f, x, 1e-6), 1e-5);
  // Gradient coordinate i is -a_i' V^-1 a_i.
  const Eigen::MatrixXd V = a.transpose() * x.asDiagonal() * a;
  const Point g = f.gradient(x);
  for (Eigen::Index i = 0; i < 8; ++i)
    EXPECT_NEAR(g[i], -a.row(i).dot(V.ldlt().solve(a.row(i).transpose())), 1e-10);
}

TEST(FiniteDiff, Logistic) {
  std::mt19937_64 rng(5);
  Eigen::MatrixXd A(20, 6);
  for (Eigen::Index i = 0; i < 20; ++i) A.row(i) = gaussian(6, rng).transpose();
  Point y(20);
  for (Eigen::Index i = 0; i < 20; ++i) y[i] = i % 3 ? 1.0 : -1.0;
  const Objective f = logistic_objective(A, y, 0.05);
  for (int k = 0; k < 20; ++k) EXPECT_LE(finite_diff_check(f, gaussian(6, rng), 1e-5), 1e-6);
}

TEST(Objectives, SmoothnessInequalityOnSegments) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd A(15, 5);
  for (Eigen::Index i = 0; i < 15; ++i) A.row(i) = gaussian(5, rng).transpose();
  const Point y = Point::Ones(15);
  SeparableCosine sc{gaussian(5, rng), gaussian(5, rng).cwiseAbs(), gaussian(5, rng)};
  const std::vector<Objective> objs = {quadratic_objective(spd(5, rng), gaussian(5, rng)),
                                       squared_distance(gaussian(5, rng), 3.0),
                                       lp_distance_squared(gaussian(5, rng), 4.0),
                                       logistic_objective(A, y, 0.1), sc.objective()};
  for (const auto& f : objs) {
    ASSERT_TRUE(f.smoothness.has_value());
    for (int k = 0; k < 200; ++k) {
      const Point x = gaussian(5, rng), z = gaussian(5, rng);
      const double bound = f.value(x) + f.gradient(x).dot(z - x) + *f.smoothness / 2.0 * (z - x).squaredNorm();
      EXPECT_LE(f.value(z), bound + 1e-9 * (1.0 + std::abs(bound)));
    }
  }
}

// ---- LMOs ----

TEST(Lmo, SimplexPicksMinimumCoordinate) {
  EXPECT_EQ(FeasibleRegion::simplex(3).lmo(vec({3.0, -1.0, 2.0})), Point::Unit(3, 1));
}

TEST(Lmo, L1BallSignedVertex) {
  EXPECT_EQ(FeasibleRegion::l1_ball(3, 2.0).lmo(vec({1.0, -3.0, 2.0})), vec({0.0, 2.0, 0.0}));
}

TEST(Lmo, NuclearBallDiagonalCost) {
  const auto r = FeasibleRegion::nuclear_ball(2, 2, 1.0);
  const Point c = r.flatten((Eigen::Matrix2d() << 2.0, 0.0, 0.0, -1.0).finished());
  const Eigen::MatrixXd v = r.as_matrix(r.lmo(c));
  EXPECT_NEAR(v(0, 0), -1.0, 1e-10);
  EXPECT_NEAR(v.norm(), 1.0, 1e-10);
}

TEST(Lmo, BirkhoffIdentityPermutation) {
  const auto r = FeasibleRegion::birkhoff(2);
  const Point c = r.flatten((Eigen::Matrix2d() << 1.0, 2.0, 3.0, 0.0).finished());
  EXPECT_EQ(r.as_matrix(r.lmo(c)), Eigen::MatrixXd::Identity(2, 2));
}

TEST(Lmo, L2Ball) {
  const Point v = FeasibleRegion::lp_ball(2, 1.0, 2.0).lmo(vec({3.0, 4.0}));
  EXPECT_NEAR(v[0], -0.6, 1e-15);
  EXPECT_NEAR(v[1], -0.8, 1e-15);
}

TEST(Lmo, BoxAndHypercube) {
  const auto box = FeasibleRegion::box(vec({-1.0, 0.0, 2.0}), vec({1.0, 5.0, 3.0}));
  EXPECT_EQ(box.lmo(vec({1.0, -1.0, 0.0})), vec({-1.0, 5.0, 2.0}));
  EXPECT_EQ(FeasibleRegion::hypercube01(3).lmo(vec({1.0, -1.0, 0.0})), vec({0.0, 1.0, 0.0}));
}

TEST(Lmo, MatchesBruteForceOnEnumerableRegions) {
  std::mt19937_64 rng(7);
  for (const auto& r : {FeasibleRegion::simplex(6), FeasibleRegion::hypercube01(5), FeasibleRegion::birkhoff(3),
                        FeasibleRegion::l1_ball(4, 1.5)}) {
    const auto verts = r.enumerate_vertices();
    for (int k = 0; k < 300; ++k) {
      const Point c = gaussian(r.dimension(), rng);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& v : verts) best = std::min(best, c.dot(v));
      const Point v = r.lmo(c);
      EXPECT_EQ(c.dot(v), best);
      EXPECT_TRUE(r.contains(v));
      EXPECT_TRUE(r.is_extreme_point(v));
    }
  }
}

TEST(Lmo, LpBallMatchesDualNorm) {
  std::mt19937_64 rng(8);
  for (double p : {1.5, 2.0, 3.0, 7.0}) {
    const auto r = FeasibleRegion::lp_ball(6, 2.0, p);
    const double q = p / (p - 1.0);
    for (int k = 0; k < 200; ++k) {
      const Point c = gaussian(6, rng);
      const double dual = std::pow(c.cwiseAbs().array().pow(q).sum(), 1.0 / q);
      const Point v = r.lmo(c);
      EXPECT_NEAR(c.dot(v), -2.0 * dual, 1e-12 * dual);
      EXPECT_TRUE(r.contains(v));
    }
  }
}

TEST(Lmo, NuclearBallMatchesSvd) {
  std::mt19937_64 rng(9);
  const auto r = FeasibleRegion::nuclear_ball(5, 3, 2.0);
  for (int k = 0; k < 200; ++k) {
    const Point c = gaussian(15, rng);
    const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(r.as_matrix(c)).singularValues()[0];
    EXPECT_NEAR(c.dot(r.lmo(c)), -2.0 * sigma, 1e-8 * sigma);
  }
}

TEST(Lmo, DiameterIsNeverExceeded) {
  std::mt19937_64 rng(10);
  for (const auto& r : {FeasibleRegion::simplex(5), FeasibleRegion::l1_ball(5, 2.0), FeasibleRegion::lp_ball(5, 1.0, 3.0),
                        FeasibleRegion::lp_ball(5, 1.0, 1.5), FeasibleRegion::box(Point::Zero(5), Point::Constant(5, 2.0)),
                        FeasibleRegion::hypercube01(5), FeasibleRegion::birkhoff(3), FeasibleRegion::nuclear_ball(2, 3, 1.0)}) {
    const double D = r.diameter();
    for (int k = 0; k < 200; ++k) {
      const Point a = r.lmo(gaussian(r.dimension(), rng)), b = r.lmo(gaussian(r.dimension(), rng));
      EXPECT_LE((a - b).norm(), D * (1.0 + 1e-12));
    }
  }
}

TEST(EnumerateVertices, SmallRegions) {
  EXPECT_EQ(FeasibleRegion::simplex(3).enumerate_vertices().size(), 3u);
  EXPECT_EQ(FeasibleRegion::hypercube01(2).enumerate_vertices().size(), 4u);
  EXPECT_EQ(FeasibleRegion::birkhoff(3).enumerate_vertices().size(), 6u);
  EXPECT_THROW(FeasibleRegion::lp_ball(3, 1.0, 2.0).enumerate_vertices(), CapabilityError);
  EXPECT_THROW(FeasibleRegion::hypercube01(17).enumerate_vertices(), CapabilityError);
}

TEST(Regions, ConstructorContracts) {
  EXPECT_THROW(FeasibleRegion::l1_ball(3, 0.0), ContractViolation);
  EXPECT_THROW(FeasibleRegion::lp_ball(3, 1.0, 0.5), ContractViolation);
  EXPECT_THROW(FeasibleRegion::box(vec({1.0}), vec({0.0})), ContractViolation);
}

// ---- nearest extreme point ----

TEST(Nep, ZeroLambdaIsLmo) {
  std::mt19937_64 rng(11);
  for (const auto& r : {FeasibleRegion::simplex(5), FeasibleRegion::hypercube01(5), FeasibleRegion::birkhoff(3),
                        FeasibleRegion::lp_ball(5, 1.0, 2.0)}) {
    for (int k = 0; k < 1000; ++k) {
      const Point c = gaussian(r.dimension(), rng);
      EXPECT_EQ(r.nep(c, 0.0, r.lmo(gaussian(r.dimension(), rng))), r.lmo(c));
    }
  }
}

TEST(Nep, NearestBinaryVector) {
  EXPECT_EQ(FeasibleRegion::hypercube01(2).nep(vec({0.0, 0.0}), 1.0, vec({0.9, 0.1})), vec({1.0, 0.0}));
}

TEST(Nep, SimplexMatchesBruteForce) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unif(0.0, 3.0);
  const auto r = FeasibleRegion::simplex(3);
  for (int k = 0; k < 500; ++k) {
    const Point c = gaussian(3, rng), x = random_simplex_point(3, rng);
    const double lambda = unif(rng);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : r.enumerate_vertices()) best = std::min(best, c.dot(v) + lambda * (v - x).squaredNorm());
    const Point v = r.nep(c, lambda, x);
    EXPECT_NEAR(c.dot(v) + lambda * (v - x).squaredNorm(), best, 1e-12);
  }
}

TEST(Nep, UnsupportedRegion) {
  EXPECT_THROW(FeasibleRegion::lp_ball(4, 1.0, 3.0).nep(Point::Zero(4), 1.0, Point::Zero(4)), CapabilityError);
}

// ---- weak separation ----

TEST(WeakSeparation, PositiveThenCacheHit) {
  const auto r = unit_interval();
  WeakSeparationCache cache(4);
  Counters c;
  auto ans = weak_separation(r, cache, vec({2.0}), vec({1.0}), 2.0, 1.0, c);
  ASSERT_TRUE(ans.positive);
  EXPECT_EQ(ans.vertex[0], -1.0);
  EXPECT_FALSE(ans.from_cache);
  EXPECT_EQ(c.lmo, 1);
  ans = weak_separation(r, cache, vec({2.0}), vec({1.0}), 2.0, 1.0, c);
  ASSERT_TRUE(ans.positive);
  EXPECT_TRUE(ans.from_cache);
  EXPECT_EQ(c.lmo, 1);
  EXPECT_EQ(c.cache_hits, 1);
}

TEST(WeakSeparation, NegativeAtOptimum) {
  WeakSeparationCache cache;
  Counters c;
  const auto ans = weak_separation(unit_interval(), cache, vec({0.0}), vec({0.0}), 1.0, 1.0, c);
  EXPECT_FALSE(ans.positive);
  EXPECT_EQ(c.negative_calls, 1);
  EXPECT_EQ(ans.gap, 0.0);
}

TEST(WeakSeparation, AnswersHonourThresholds) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unif(0.01, 2.0);
  const auto r = FeasibleRegion::simplex(8);
  WeakSeparationCache cache(3);
  Counters counters;
  for (int k = 0; k < 1000; ++k) {
    const Point c = gaussian(8, rng), x = random_simplex_point(8, rng);
    const double phi = unif(rng), K = 1.0 + unif(rng);
    const auto ans = weak_separation(r, cache, c, x, phi, K, counters);
    if (ans.positive) {
      EXPECT_GT(c.dot(x - ans.vertex), phi / K);
    } else {
      EXPECT_LE(ans.gap, phi / K);
      EXPECT_NEAR(ans.gap, c.dot(x - r.lmo(c)), 1e-12);
    }
    EXPECT_LE(cache.size(), cache.capacity());
    for (const auto& a : cache.atoms()) EXPECT_TRUE(r.is_extreme_point(a));
  }
}

// ---- step rules ----

TEST(OpenLoop, Values) {
  EXPECT_EQ(open_loop_step(0), 1.0);
  EXPECT_EQ(open_loop_step(2), 0.5);
  EXPECT_DOUBLE_EQ(open_loop_step(5, 7), 1.0 / 6.0);
}

TEST(ShortStep, Values) {
  EXPECT_EQ(short_step({0, 4.0, 1.0, 1.0, 2.0}), 1.0);
  EXPECT_EQ(short_step({0, 1.0, 1.0, 1.0, 2.0}), 0.5);
  EXPECT_EQ(short_step({0, 4.0, 4.0, 1.0, 4.0}), 0.25);
  EXPECT_EQ(short_step({0, -1.0, 1.0, 1.0, 2.0}), 0.0);
  EXPECT_THROW(short_step({0, 1.0, 0.0, 1.0, 2.0}), ContractViolation);
}

TEST(LineSearch, ScalarQuadraticOneStep) {
  EXPECT_EQ(line_search(squared_distance(Point::Zero(1)), vec({1.0}), vec({2.0}), 1.0), 0.5);
}

TEST(LineSearch, TriangleFirstStep) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2, 2);
  H(0, 0) = 4.0;
  H(1, 1) = 2.0;
  const Objective f = quadratic_objective(H, Point::Zero(2));
  const Point x = vec({0.0, 1.0}), d = vec({1.0, 1.0});
  const double gamma = line_search(f, x, d, 1.0);
  EXPECT_NEAR(gamma, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR((x - gamma * d - vec({-1.0 / 3.0, 2.0 / 3.0})).norm(), 0.0, 1e-15);
  // Golden section on the same segment agrees.
  Objective generic = f;
  generic.curvature = nullptr;
  EXPECT_NEAR(line_search(generic, x, d, 1.0), 1.0 / 3.0, 1e-7);
}

TEST(LineSearch, NoDescentDirection) {
  EXPECT_EQ(line_search(squared_distance(Point::Zero(1)), vec({1.0}), vec({-1.0}), 1.0), 0.0);
}

TEST(LineSearch, NeverIncreasesObjective) {
  std::mt19937_64 rng(14);
  SeparableCosine sc{gaussian(4, rng), gaussian(4, rng).cwiseAbs() + Point::Ones(4), gaussian(4, rng)};
  const Objective f = sc.objective();
  for (int k = 0; k < 500; ++k) {
    const Point x = gaussian(4, rng), d = gaussian(4, rng);
    const double gamma = line_search(f, x, d, 1.0);
    EXPECT_GE(gamma, 0.0);
    EXPECT_LE(gamma, 1.0);
    EXPECT_LE(f.value(x - gamma * d), f.value(x));
  }
}

TEST(Adaptive, HandEvaluatedFirstTrial) {
  AdaptiveState st;
  st.L_tilde = 4.0;
  st.eta = 0.9;
  st.tau = 2.0;
  st.alpha = 1.0;
  const auto res = adaptive_step(squared_distance(Point::Zero(1)), vec({1.0}), vec({-1.0}), st);
  EXPECT_DOUBLE_EQ(res.state.L_tilde, 3.6);
  EXPECT_DOUBLE_EQ(res.gamma, 4.0 / (3.6 * 4.0));
  EXPECT_EQ(res.trials, 1);
}

TEST(Adaptive, ExactSmoothnessAcceptedAtFirstTrial) {
  std::mt19937_64 rng(15);
  const auto r = FeasibleRegion::simplex(6);
  for (int k = 0; k < 50; ++k) {
    const Objective f = quadratic_objective(spd(6, rng), gaussian(6, rng));
    const Point x = random_simplex_point(6, rng);
    AdaptiveState st;
    st.L_tilde = *f.smoothness;
    st.eta = 1.0;
    st.alpha = 1.0;
    const auto res = adaptive_step(f, x, r.lmo(f.gradient(x)), st);
    EXPECT_EQ(res.trials, 1);
  }
}

TEST(Adaptive, TinyEstimateGrowsButStaysBelowTauL) {
  std::mt19937_64 rng(16);
  const auto r = FeasibleRegion::simplex(6);
  for (int k = 0; k < 50; ++k) {
    const Objective f = quadratic_objective(1e3 * spd(6, rng), gaussian(6, rng));
    const Point x = random_simplex_point(6, rng);
    const Point v = r.lmo(f.gradient(x));
    AdaptiveState st;
    st.L_tilde = 1e-12;
    const auto res = adaptive_step(f, x, v, st);
    EXPECT_GT(res.trials, 1);
    EXPECT_LE(res.state.L_tilde, st.tau * *f.smoothness);
    EXPECT_LE(res.gamma, 1.0);
    const Point d = v - x;
    const double slope = f.gradient(x).dot(d);
    const double M = res.state.L_tilde, g = res.gamma;
    EXPECT_LE(f.value(x + g * d) - f.value(x),
              st.alpha * g * slope + st.alpha * st.alpha * g * g * M * d.squaredNorm() / 2.0 + 1e-9);
  }
}

TEST(Adaptive, RejectsAscentDirection) {
  AdaptiveState st;
  EXPECT_THROW(adaptive_step(squared_distance(Point::Zero(1)), vec({1.0}), vec({2.0}), st), ContractViolation);
}

// ---- traces ----

TEST(Trace, CsvRoundTripAndFormat) {
  RunConfig c;
  c.step_rule = StepRule::open_loop;
  c.max_iters = 5;
  c.tol = 1e-300;
  const auto res = run_fw(squared_distance(Point::Zero(1)), unit_interval(), c);
  const std::string csv = res.trace.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), RunTrace::kHeader);
  std::istringstream in(csv);
  const RunTrace back = RunTrace::read_csv(in);
  ASSERT_EQ(back.size(), res.trace.size());
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back.rows[i], res.trace.rows[i]);
  EXPECT_EQ(format_double(1.0 / 3.0), "0.33333333333333331");
}

TEST(Trace, RowsAndCountersAreMonotone) {
  std::mt19937_64 rng(17);
  const Objective f = quadratic_objective(spd(10, rng), gaussian(10, rng));
  RunConfig c;
  c.max_iters = 200;
  c.record_every = 7;
  const auto res = run_afw(f, FeasibleRegion::simplex(10), c);
  for (std::size_t i = 1; i < res.trace.size(); ++i) {
    const auto& a = res.trace.rows[i - 1];
    const auto& b = res.trace.rows[i];
    EXPECT_LT(a.t, b.t);
    EXPECT_LE(a.lmo_calls, b.lmo_calls);
    EXPECT_LE(a.foo_calls, b.foo_calls);
    EXPECT_EQ(b.wall_time_ns, 0);
  }
}

TEST(Contains, VertexHullMembership) {
  const auto tri = FeasibleRegion::vertex_hull({vec({-1.0, 0.0}), vec({1.0, 0.0}), vec({0.0, 1.0})});
  EXPECT_TRUE(tri.contains(vec({0.0, 0.0})));
  EXPECT_TRUE(tri.contains(vec({0.2, 0.3})));
  EXPECT_TRUE(tri.contains(vec({0.0, 1.0})));
  EXPECT_FALSE(tri.contains(vec({0.0, -1e-6})));
  EXPECT_FALSE(tri.contains(vec({0.6, 0.6})));
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto cube = FeasibleRegion::hypercube01(3);
  const auto hull = FeasibleRegion::vertex_hull(cube.enumerate_vertices());
  for (int k = 0; k < 200; ++k) {
    Point x(3);
    for (Eigen::Index i = 0; i < 3; ++i) x[i] = 1.4 * unif(rng) - 0.2;
    EXPECT_EQ(hull.contains(x), cube.contains(x)) << x.transpose();
  }
}
