#include <filesystem>
#include <random>

#include "doctest.h"
#include "lagot/action.hpp"
#include "oracles.hpp"

using namespace lagot;

namespace {

LagrangianSpec pendulum() {
  return LagrangianSpec(Mat::identity(1), Potential::cosine(1.0, Vec(1.0)));
}

Winding w1(int k) { return Winding{{k, 0}, 1}; }

TorusPoint pt(double x) { return wrap(Vec(x)); }

double free_cost(double dx, double tau) {
  double best = INFINITY;
  for (int k = -3; k <= 3; ++k) best = std::min(best, (dx + k) * (dx + k) / (2 * tau));
  return best;
}

}  // namespace

TEST_CASE("discrete action on simple curves") {
  const auto spec = free_particle();
  for (int n : {1, 7, 64}) {
    auto c = DiscreteCurve::straight(pt(0.0), pt(0.0), w1(1), 0.0, 1.0, n);
    CHECK(discrete_action(spec, c) == doctest::Approx(0.5).epsilon(1e-15));
  }
  auto still = DiscreteCurve::straight(pt(0.3), pt(0.3), w1(0), 0.0, 1.0, 64);
  CHECK(discrete_action(spec, still) == 0.0);
}

TEST_CASE("discrete action matches a refined quadrature of the continuous action") {
  const auto spec = pendulum();
  auto c = DiscreteCurve::straight(pt(0.0), pt(0.5), w1(0), 0.0, 1.0, 64);
  // The straight curve x(t) = t/2 has constant velocity 1/2.
  const double exact = oracle::simpson(
      [&](double t) { return eval_L(spec, Vec(0.5 * t), Vec(0.5), t); }, 0.0, 1.0, 128);
  CHECK(std::abs(discrete_action(spec, c) - exact) <= 1e-3);
}

TEST_CASE("action gradient matches central differences") {
  const auto spec = LagrangianSpec(Mat::diagonal(Vec(1.3)),
                                   Potential::traveling(0.4, Vec(1.0), 1.0), 1.0);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 0.05);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto c = DiscreteCurve::straight(pt(0.1), pt(0.6), w1(0), 0.0, 1.0, 32);
    for (std::size_t k = 1; k + 1 < c.points.size(); ++k) c.points[k][0] += n(rng);
    const auto g = action_gradient(spec, c);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double eps = 1e-6;
      auto cp = c, cm = c;
      cp.points[k + 1][0] += eps;
      cm.points[k + 1][0] -= eps;
      const double fd = (discrete_action(spec, cp) - discrete_action(spec, cm)) / (2 * eps);
      worst = std::max(worst, std::abs(fd - g[k][0]) / std::max(std::abs(g[k][0]), 1e-3));
    }
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("free particle costs are exact") {
  const auto spec = free_particle();
  const CostResult r = minimize_bvp(spec, pt(0.2), pt(0.7), 0.0, 1.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(0.125).epsilon(1e-12));
  // Two classes tie; the lexicographically smallest winding wins.
  CHECK(r.curve.winding.k[0] == -1);

  const CostResult same = minimize_bvp(spec, pt(0.4), pt(0.4), 0.0, 1.0);
  CHECK(same.value == 0.0);
  for (const auto& p : same.curve.points) CHECK(p[0] == doctest::Approx(0.4));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double x = u(rng), y = u(rng), T = 0.25 + u(rng);
    const double v = minimize_bvp(spec, pt(x), pt(y), 0.0, T).value;
    CHECK(std::abs(v - free_cost(y - x, T)) <= 1e-9);
  }
}

TEST_CASE("pendulum cost agrees with the shooting oracle") {
  const auto spec = pendulum();
  // 64 knots per unit time leaves an O(h^2) gap of ~1.7e-4 on this instance;
  // 128 knots bring it to ~4e-5.
  ActionOptions opts;
  opts.knots_per_unit_time = 128;
  const CostResult r = minimize_bvp(spec, pt(0.0), pt(0.5), 0.0, 1.0, opts);
  REQUIRE(r.converged);
  const double shot = oracle::shooting_cost_1d(spec, 0.0, 0.5, 0.0, 1.0);
  MESSAGE("bvp " << r.value << " shooting " << shot);
  CHECK(std::abs(r.value - shot) <= 1e-4);
}

TEST_CASE("converged curves are discrete extremals") {
  const auto spec = pendulum();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    const CostResult r = minimize_bvp(spec, pt(u(rng)), pt(u(rng)), 0.0, 1.0);
    REQUIRE(r.converged);
    CHECK(euler_lagrange_residual(spec, r.curve) <= 1e-8);
    CHECK(r.grad_norm <= 1e-9);
  }
}

TEST_CASE("cost is subadditive in time") {
  const auto spec = pendulum();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = -INFINITY;
  for (int i = 0; i < 200; ++i) {
    const auto x = pt(u(rng)), y = pt(u(rng)), z = pt(u(rng));
    const double t = (1 + i % 3) * 0.25;
    const double lhs = minimize_bvp(spec, x, z, 0.0, 1.0).value;
    const double rhs = minimize_bvp(spec, x, y, 0.0, t).value +
                       minimize_bvp(spec, y, z, t, 1.0).value;
    worst = std::max(worst, lhs - rhs);
  }
  MESSAGE("worst subadditivity excess " << worst);
  CHECK(worst <= 1e-6);
}

TEST_CASE("refinement converges at second order") {
  const auto spec = pendulum();
  std::vector<double> values;
  for (int kpu : {16, 32, 64, 128}) {
    ActionOptions opts;
    opts.knots_per_unit_time = kpu;
    values.push_back(minimize_bvp(spec, pt(0.1), pt(0.35), 0.0, 1.0, opts).value);
  }
  for (std::size_t i = 2; i < values.size(); ++i) {
    const double ratio = (values[i - 2] - values[i - 1]) / (values[i - 1] - values[i]);
    MESSAGE("refinement ratio " << ratio);
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
  }
}

TEST_CASE("non-convergence is reported with the best attempt") {
  ActionOptions opts;
  opts.max_descent_iterations = 0;
  opts.max_newton_iterations = 0;
  try {
    minimize_bvp(pendulum(), pt(0.0), pt(0.3), 0.0, 1.0, opts);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.code() == ErrorCode::kConvergence);
    CHECK(!e.best_attempt().curve.points.empty());
  }
  CHECK_THROWS_AS(minimize_bvp(pendulum(), pt(0.0), pt(0.3), 1.0, 1.0), InvalidInput);
}

TEST_CASE("cost matrices") {
  const auto spec = free_particle();
  const auto one = cost_matrix(spec, {pt(0.3)}, {pt(0.3)}, 0.0, 1.0);
  CHECK(one.values == std::vector<double>{0.0});

  const auto m = cost_matrix(spec, {pt(0.0), pt(0.5)}, {pt(0.1), pt(0.6)}, 0.0, 1.0);
  CHECK(m(0, 0) == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(m(0, 1) == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(m(1, 0) == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(m(1, 1) == doctest::Approx(0.005).epsilon(1e-12));

  const auto pend = pendulum();
  std::vector<TorusPoint> pts;
  for (int i = 0; i < 8; ++i) pts.push_back(pt(i / 8.0 + 0.03));
  const auto sym = cost_matrix(pend, pts, pts, 0.0, 1.0);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) CHECK(std::abs(sym(i, j) - sym(j, i)) <= 1e-8);
}

TEST_CASE("cost matrix disk cache") {
  const auto dir = std::filesystem::temp_directory_path() / "lagot_test_cache";
  std::filesystem::remove_all(dir);
  const auto spec = pendulum();
  std::vector<TorusPoint> pts;
  for (int i = 0; i < 4; ++i) pts.push_back(pt(i / 4.0));
  CostMatrixStats first, second;
  const auto a = cost_matrix(spec, pts, pts, 0.0, 1.0, {}, CostCache{dir}, &first);
  const auto b = cost_matrix(spec, pts, pts, 0.0, 1.0, {}, CostCache{dir}, &second);
  CHECK(first.computed == 16);
  CHECK(first.cache_hits == 0);
  CHECK(second.cache_hits == 16);
  CHECK(second.computed == 0);
  CHECK(a.values == b.values);
  // A different time span must not hit.
  CostMatrixStats third;
  cost_matrix(spec, pts, pts, 0.0, 0.5, {}, CostCache{dir}, &third);
  CHECK(third.cache_hits == 0);
  std::filesystem::remove_all(dir);
}
