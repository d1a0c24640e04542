#include <random>

#include "doctest.h"
#include "lagot/dynamics.hpp"
#include "lagot/error.hpp"

using namespace lagot;

namespace {

LagrangianSpec pendulum() {
  return LagrangianSpec(Mat::identity(1), Potential::cosine(1.0, Vec(1.0)));
}

LagrangianSpec scaled(double a) {
  return LagrangianSpec(Mat::diagonal(Vec(a)), Potential::zero(1));
}

}  // namespace

TEST_CASE("Lagrangian values") {
  CHECK(eval_L(free_particle(), Vec(0.3), Vec(1.0), 0.0) == 0.5);
  CHECK(eval_L(pendulum(), Vec(0.0), Vec(0.0), 0.0) == -1.0);
  CHECK(eval_L(scaled(2.0), Vec(0.0), Vec(1.0), 0.0) == 1.0);
}

TEST_CASE("Hamiltonian values") {
  CHECK(eval_H(free_particle(), Vec(0.3), Vec(1.0), 0.0) == 0.5);
  CHECK(eval_H(pendulum(), Vec(0.0), Vec(0.0), 0.0) == 1.0);
  CHECK(eval_H(scaled(2.0), Vec(0.0), Vec(2.0), 0.0) == 1.0);
}

TEST_CASE("Legendre maps are mutually inverse") {
  const TorusPoint x = wrap(Vec(0.1));
  CHECK(legendre_v_to_p(free_particle(), x, {Vec(0.3)}, 0.0).p[0] == 0.3);
  CHECK(legendre_v_to_p(scaled(2.0), x, {Vec(1.0)}, 0.0).p[0] == 2.0);

  Mat a;
  a.dim = 2;
  a(0, 0) = 2.0;
  a(0, 1) = a(1, 0) = 0.5;
  a(1, 1) = 1.0;
  LagrangianSpec spec(a, Potential::zero(2));
  const TorusPoint x2 = wrap(Vec(0.1, 0.2));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int i = 0; i < 100; ++i) {
    const Vec v(n(rng), n(rng));
    const Vec back = legendre_p_to_v(spec, x2, legendre_v_to_p(spec, x2, {v}, 0.0), 0.0).v;
    CHECK((back - v).norm_inf() <= 1e-14);
  }
}

TEST_CASE("kinetic matrix must be positive definite") {
  CHECK_THROWS_AS(LagrangianSpec(Mat::diagonal(Vec(-1.0)), Potential::zero(1)),
                  InvalidInput);
  Mat a;
  a.dim = 2;
  a(0, 0) = 1.0;
  a(0, 1) = a(1, 0) = 2.0;
  a(1, 1) = 1.0;
  CHECK_THROWS_AS(LagrangianSpec(a, Potential::zero(2)), InvalidInput);
  CHECK_THROWS_AS(LagrangianSpec(Mat::identity(1), Potential::zero(2)), InvalidInput);
}

TEST_CASE("time period must be compatible with the potential") {
  CHECK_NOTHROW(LagrangianSpec(Mat::identity(1),
                               Potential::traveling(0.2, Vec(1.0), 1.0), 1.0));
  CHECK_THROWS_AS(LagrangianSpec(Mat::identity(1),
                                 Potential::traveling(0.2, Vec(1.0), 0.5), 1.0),
                  InvalidInput);
}

TEST_CASE("free flow is straight motion") {
  PhasePoint p{wrap(Vec(0.0)), {Vec(1.0)}, 0.0};
  const PhasePoint q = flow(free_particle(), p, 0.0, 0.5);
  CHECK(q.x[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(q.v.v[0] == doctest::Approx(1.0).epsilon(1e-14));
  const PhasePoint same = flow(free_particle(), p, 0.3, 0.3);
  CHECK(same.x == p.x);
  CHECK(same.v.v == p.v.v);
}

TEST_CASE("pendulum equilibrium is fixed") {
  PhasePoint p{wrap(Vec(0.5)), {Vec(0.0)}, 0.0};
  const PhasePoint q = flow(pendulum(), p, 0.0, 3.0);
  CHECK(std::abs(q.x[0] - 0.5) <= 1e-10);
  CHECK(std::abs(q.v.v[0]) <= 1e-10);
}

TEST_CASE("flow composition") {
  const LagrangianSpec spec = pendulum();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double r = u(rng), s = u(rng), t = u(rng);
    HamiltonianState y{Vec(u(rng)), Vec(2.0 * u(rng) - 1.0)};
    auto steps = [](double a, double b) {
      return static_cast<long>(std::ceil(std::abs(b - a) * 1000 - 1e-9));
    };
    const auto direct = flow_hamiltonian(spec, y, r, t, steps(r, t));
    const auto mid = flow_hamiltonian(spec, y, r, s, steps(r, s));
    const auto composed = flow_hamiltonian(spec, mid, s, t, steps(s, t));
    worst = std::max({worst, (direct.x - composed.x).norm_inf(),
                      (direct.p - composed.p).norm_inf()});
  }
  MESSAGE("flow composition defect: " << worst);
  CHECK(worst <= 1e-8);
}

TEST_CASE("energy is conserved for autonomous potentials") {
  const LagrangianSpec spec = pendulum();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    HamiltonianState y{Vec(u(rng)), Vec(4.0 * u(rng) - 2.0)};
    const double e0 = eval_H(spec, y.x, y.p, 0.0);
    const auto z = flow_hamiltonian(spec, y, 0.0, 1.0, 1000);
    CHECK(std::abs(eval_H(spec, z.x, z.p, 1.0) - e0) <= 1e-8);
  }
}

TEST_CASE("L is the Legendre transform of H") {
  const LagrangianSpec spec(Mat::diagonal(Vec(1.5)), Potential::cosine(0.7, Vec(2.0)));
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Vec x(u(rng));
    const Vec v(4.0 * u(rng) - 2.0);
    const double t = u(rng);
    // Coarse scan, then refine around the coarse maximizer.
    double best_p = 0.0, best = -INFINITY;
    for (int k = -400; k <= 400; ++k) {
      const double p = k * 0.01;
      const double val = p * v[0] - eval_H(spec, x, Vec(p), t);
      if (val > best) best = val, best_p = p;
    }
    for (int k = -1000; k <= 1000; ++k) {
      const double p = best_p + k * 1e-5;
      best = std::max(best, p * v[0] - eval_H(spec, x, Vec(p), t));
    }
    CHECK(std::abs(best - eval_L(spec, x, v, t)) <= 1e-6);
  }
}

TEST_CASE("divergent integration is reported") {
  const LagrangianSpec spec = free_particle();
  HamiltonianState y{Vec(0.0), Vec(1e308)};
  CHECK_THROWS_AS(flow_hamiltonian(spec, y, 0.0, 10.0, 10), DivergenceError);
}
