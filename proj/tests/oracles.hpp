#pragma once

// Independent reference computations used only by the tests. None of these
// call into the minimizers or solvers they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "lagot/dynamics.hpp"

namespace oracle {

// Action along the Hamiltonian trajectory from (x0, p0) over [s, t],
// integrating (x, p, S) with RK4. Returns the lifted endpoint and action.
struct Shot {
  double end = 0.0;
  double action = 0.0;
};

inline Shot shoot_1d(const lagot::LagrangianSpec& spec, double x0, double p0,
                     double s, double t, int steps) {
  const double a_inv = spec.kinetic_inverse()(0, 0);
  const auto& pot = spec.potential();
  struct St {
    double x, p, a;
  };
  auto rhs = [&](const St& y, double tau) {
    const double v = a_inv * y.p;
    const double lag = 0.5 * spec.kinetic()(0, 0) * v * v -
                       pot.value(lagot::Vec(y.x), tau);
    return St{v, -pot.gradient(lagot::Vec(y.x), tau)[0], lag};
  };
  St y{x0, p0, 0.0};
  const double h = (t - s) / steps;
  for (int k = 0; k < steps; ++k) {
    const double tau = s + k * h;
    const St k1 = rhs(y, tau);
    const St k2 = rhs({y.x + 0.5 * h * k1.x, y.p + 0.5 * h * k1.p, 0}, tau + 0.5 * h);
    const St k3 = rhs({y.x + 0.5 * h * k2.x, y.p + 0.5 * h * k2.p, 0}, tau + 0.5 * h);
    const St k4 = rhs({y.x + h * k3.x, y.p + h * k3.p, 0}, tau + h);
    y.x += h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    y.p += h / 6 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
    y.a += h / 6 * (k1.a + 2 * k2.a + 2 * k3.a + k4.a);
  }
  return {y.x, y.a};
}

// Minimal action among extremals from x to any lift y + k, |k| <= range,
// found by scanning `samples` initial momenta in [-pmax, pmax], bracketing
// endpoint crossings and refining each by bisection.
inline double shooting_cost_1d(const lagot::LagrangianSpec& spec, double x,
                               double y, double s, double t, int samples = 4000,
                               double pmax = 6.0, int range = 2, int steps = 2000) {
  std::vector<double> ps(static_cast<std::size_t>(samples));
  std::vector<double> ends(ps.size());
  for (int i = 0; i < samples; ++i) {
    ps[i] = -pmax + 2.0 * pmax * i / (samples - 1);
    ends[i] = shoot_1d(spec, x, ps[i], s, t, steps).end;
  }
  double best = std::numeric_limits<double>::infinity();
  for (int k = -range; k <= range; ++k) {
    const double target = y + k;
    for (int i = 0; i + 1 < samples; ++i) {
      const double f0 = ends[i] - target, f1 = ends[i + 1] - target;
      if (f0 == 0.0 || f0 * f1 < 0.0) {
        double lo = ps[i], hi = ps[i + 1], flo = f0;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = shoot_1d(spec, x, mid, s, t, steps).end - target;
          if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        best = std::min(best, shoot_1d(spec, x, 0.5 * (lo + hi), s, t, steps).action);
      }
    }
  }
  return best;
}

// Composite Simpson rule for f on [a, b] with n (even) intervals.
template <class F>
double simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Minimum of sum_i cost[i][perm[i]] over all permutations.
inline double brute_force_assignment(const std::vector<std::vector<double>>& cost) {
  std::vector<int> perm(cost.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += cost[i][perm[i]];
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Karp's minimum mean cycle on a complete digraph with self-loops.
inline double min_mean_cycle(const std::vector<std::vector<double>>& w) {
  const std::size_t n = w.size();
  const double inf = std::numeric_limits<double>::infinity();
  // d[k][v]: min weight of a walk with exactly k edges ending at v, from any start.
  std::vector<std::vector<double>> d(n + 1, std::vector<double>(n, inf));
  for (std::size_t v = 0; v < n; ++v) d[0][v] = 0.0;
  for (std::size_t k = 1; k <= n; ++k)
    for (std::size_t u = 0; u < n; ++u)
      if (d[k - 1][u] < inf)
        for (std::size_t v = 0; v < n; ++v)
          d[k][v] = std::min(d[k][v], d[k - 1][u] + w[u][v]);
  double best = inf;
  for (std::size_t v = 0; v < n; ++v) {
    double worst = -inf;
    for (std::size_t k = 0; k < n; ++k)
      worst = std::max(worst, (d[n][v] - d[k][v]) / static_cast<double>(n - k));
    best = std::min(best, worst);
  }
  return best;
}

}  // namespace oracle
