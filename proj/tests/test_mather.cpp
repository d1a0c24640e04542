#include <cmath>
#include <random>

#include "doctest.h"
#include "lagot/mather.hpp"
#include "oracles.hpp"

using namespace lagot;

namespace {

LagrangianSpec pendulum() {
  return LagrangianSpec(Mat::identity(1), Potential::cosine(1.0, Vec(1.0)));
}

LagrangianSpec two_well() {
  return LagrangianSpec(Mat::identity(1), Potential::cosine(1.0, Vec(2.0)));
}

LagrangianSpec traveling() {
  return LagrangianSpec(Mat::identity(1), Potential::traveling(0.2, Vec(1.0), 1.0), 1.0);
}

double max_potential(const LagrangianSpec& spec) {
  double m = -INFINITY;
  for (int i = 0; i < 4096; ++i)
    for (int k = 0; k < 16; ++k)
      m = std::max(m, spec.potential().value(Vec(i / 4096.0), k / 16.0));
  return m;
}

std::vector<std::vector<double>> dense(const CostMatrix& c) {
  std::vector<std::vector<double>> w(c.rows, std::vector<double>(c.cols));
  for (std::size_t i = 0; i < c.rows; ++i)
    for (std::size_t j = 0; j < c.cols; ++j) w[i][j] = c(i, j);
  return w;
}

}  // namespace

TEST_CASE("equal-marginals LP agrees with the minimum mean cycle") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<TorusPoint> nodes;
  for (int i = 0; i < 12; ++i) nodes.push_back(wrap(Vec(i / 12.0)));
  for (int trial = 0; trial < 10; ++trial) {
    CostMatrix c{12, 12, 0.0, 1.0, std::vector<double>(144)};
    for (double& v : c.values) v = u(rng);
    const MatherSolution s = alpha_lp(c, nodes);
    CHECK(s.alpha == doctest::Approx(oracle::min_mean_cycle(dense(c))).epsilon(1e-12));
    CHECK(s.marginal_gap <= 1e-10);
    double total = 0.0;
    for (double v : s.plan.coupling) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  const GridSpec grid(16, 1);
  const auto pc = cost_matrix(traveling(), grid.nodes(), grid.nodes(), 0.0, 1.0);
  CHECK(alpha_lp(pc, grid.nodes()).alpha ==
        doctest::Approx(oracle::min_mean_cycle(dense(pc))).epsilon(1e-12));
}

TEST_CASE("free particle: alpha is zero on the diagonal") {
  const GridSpec grid(16, 1);
  MatherSolution s = alpha_lp(free_particle(), grid);
  CHECK(std::abs(s.alpha) <= 1e-12);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j)
      if (s.plan(i, j) > 1e-12) CHECK(i == j);
  const auto& m0 = mather_measure(s, free_particle());
  for (const auto& a : m0) CHECK(a.v.norm() <= 1e-12);
  CHECK(invariance_defect(m0, free_particle()) <= 1e-9);
  CHECK(graph_check(m0, 0.0).max_ratio == 0.0);

  const auto two = alpha_T_check(free_particle(), grid, {1, 2});
  CHECK(std::abs(two.alphas[0]) <= 1e-12);
  CHECK(std::abs(two.alphas[1]) <= 1e-12);
}

TEST_CASE("pendulum: alpha = -max V at the upper equilibrium") {
  const auto spec = pendulum();
  const GridSpec grid(32, 1);
  const auto c = cost_matrix(spec, grid.nodes(), grid.nodes(), 0.0, 1.0);
  MatherSolution s = alpha_lp(c, grid.nodes());
  CHECK(s.alpha == doctest::Approx(-1.0).epsilon(1e-9));
  // Two-sided sandwich: -max V <= alpha <= best one-step cycle.
  double best_loop = INFINITY;
  for (std::size_t i = 0; i < 32; ++i) best_loop = std::min(best_loop, c(i, i));
  CHECK(s.alpha >= -max_potential(spec) - 1e-9);
  CHECK(s.alpha <= best_loop + 1e-12);

  const auto& m0 = mather_measure(s, spec);
  REQUIRE(!m0.empty());
  for (const auto& a : m0) {
    CHECK(distance(a.x, wrap(Vec(0.0))) <= 1e-12);
    CHECK(a.v.norm() <= 1e-9);
  }
  CHECK(invariance_defect(m0, spec) <= 1e-6);
  CHECK(graph_check(m0, 1.0).ok);

  const auto rep = alpha_T_check(spec, GridSpec(16, 1), {1, 2});
  CHECK(rep.max_deviation <= 2e-3);
}

TEST_CASE("alpha is below C(mu, mu) for sampled measures") {
  const auto spec = traveling();
  const GridSpec grid(16, 1);
  const auto nodes = grid.nodes();
  const auto c = cost_matrix(spec, nodes, nodes, 0.0, 1.0);
  const double alpha = alpha_lp(c, nodes).alpha;
  std::mt19937_64 rng(32);
  std::exponential_distribution<double> e(1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> w(16);
    for (double& v : w) v = e(rng);
    const auto mu = DiscreteMeasure::normalized(nodes, w);
    CHECK(alpha <= solve_transport(c, mu.weights(), mu.weights()).primal.value + 1e-12);
  }
}

TEST_CASE("two wells: optimal atoms sit at maxima of V with zero velocity") {
  const auto spec = two_well();
  const GridSpec grid(32, 1);
  const auto c = cost_matrix(spec, grid.nodes(), grid.nodes(), 0.0, 1.0);
  MatherSolution s = alpha_lp(c, grid.nodes());
  CHECK(s.alpha == doctest::Approx(-1.0).epsilon(1e-9));
  // Both resting states are optimal; the LP returns one vertex.
  CHECK(c(0, 0) == doctest::Approx(s.alpha).epsilon(1e-12));
  CHECK(c(16, 16) == doctest::Approx(s.alpha).epsilon(1e-12));
  const auto& m0 = mather_measure(s, spec);
  for (const auto& a : m0) {
    const double dx = std::min(distance(a.x, wrap(Vec(0.0))), distance(a.x, wrap(Vec(0.5))));
    CHECK(dx <= 1e-12);
    CHECK(a.v.norm() <= 1e-9);
  }
  // The half-half mixture of the two resting measures is also optimal and
  // still lies on a Lipschitz graph.
  std::vector<PhaseAtom> mix{{wrap(Vec(0.0)), Vec(0.0), 0.5}, {wrap(Vec(0.5)), Vec(0.0), 0.5}};
  CHECK(0.5 * c(0, 0) + 0.5 * c(16, 16) == doctest::Approx(s.alpha).epsilon(1e-12));
  CHECK(graph_check(mix, 0.0).ok);
  CHECK(invariance_defect(mix, spec) <= 1e-6);
}

TEST_CASE("traveling wave: refinement, invariance and time horizons") {
  const auto spec = traveling();
  MatherSolution coarse = alpha_lp(spec, GridSpec(32, 1));
  MatherSolution fine = alpha_lp(spec, GridSpec(64, 1));
  MESSAGE("alpha 32: " << coarse.alpha << " 64: " << fine.alpha);
  CHECK(std::abs(coarse.alpha - fine.alpha) <= 2e-3);
  CHECK(fine.alpha >= -max_potential(spec) - 1e-9);
  const auto& m0 = mather_measure(fine, spec);
  const double defect = invariance_defect(m0, spec);
  MESSAGE("invariance defect " << defect << " on " << m0.size() << " atoms");
  CHECK(defect <= 5.0 / 64);
  const auto g = graph_check(m0, 1e6);
  CHECK(std::isfinite(g.max_ratio));
}

TEST_CASE("non-periodic specs are rejected") {
  const auto spec = LagrangianSpec(Mat::identity(1), Potential::traveling(0.2, Vec(1.0), 0.5), 2.0);
  CHECK_THROWS_AS(alpha_lp(spec, GridSpec(8, 1)), InvalidInput);
  CHECK_THROWS_AS(alpha_lp(free_particle(), GridSpec(8, 1), 0), InvalidInput);
}
