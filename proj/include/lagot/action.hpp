#pragma once

// Discrete action minimization: the cost c_s^t(x, y) as the minimal action
// over curves from x at time s to y at time t, searched over a range of
// winding classes.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lagot/dynamics.hpp"
#include "lagot/error.hpp"
#include "lagot/manifold.hpp"

namespace lagot {

struct ActionOptions {
  // Knot spacing is 1 / knots_per_unit_time, so curves over [s, t] with s, t
  // on that lattice can be concatenated into valid curves over longer spans.
  int knots_per_unit_time = 64;
  int min_knots = 4;
  int winding_range = 2;
  // Bound on the discrete Euler-Lagrange residual, max_k |dS/dq_k|_inf / h.
  double tolerance = 1e-9;
  int max_descent_iterations = 500;
  int max_newton_iterations = 200;
};

int knots_for(double duration, const ActionOptions& opts);

// Uniform time knots from s to t, positions lifted to the universal cover.
struct DiscreteCurve {
  std::vector<double> times;
  std::vector<Vec> points;
  Winding winding;

  static DiscreteCurve straight(const TorusPoint& x, const TorusPoint& y,
                                const Winding& winding, double s, double t,
                                int knots);

  std::size_t segments() const { return points.size() - 1; }
  double step() const { return (times.back() - times.front()) / segments(); }
  double start_time() const { return times.front(); }
  double end_time() const { return times.back(); }
  // Piecewise-linear position, lifted and wrapped.
  Vec lifted_at(double t) const;
  TorusPoint at(double t) const { return wrap(lifted_at(t)); }
  // Velocity of the segment containing t.
  Vec segment_velocity(double t) const;
};

struct CostResult {
  double value = 0.0;
  DiscreteCurve curve;
  bool converged = false;
  double grad_norm = 0.0;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, CostResult best)
      : Error(ErrorCode::kConvergence, what), best_(std::move(best)) {}
  const CostResult& best_attempt() const { return best_; }

 private:
  CostResult best_;
};

// Midpoint rule: sum_k h L((q_k + q_{k+1})/2, (q_{k+1} - q_k)/h, t_k + h/2).
double discrete_action(const LagrangianSpec& spec, const DiscreteCurve& curve);

// dS/dq_k for the interior knots k = 1..N-1.
std::vector<Vec> action_gradient(const LagrangianSpec& spec,
                                 const DiscreteCurve& curve);

// Discrete Euler-Lagrange residual max_k |dS/dq_k|_inf / h.
double euler_lagrange_residual(const LagrangianSpec& spec,
                               const DiscreteCurve& curve);

// Discrete Legendre transforms at the endpoints: p_0 = -dS/dq_0 and
// p_N = dS/dq_N. Second-order accurate momenta of the continuous extremal.
Vec initial_momentum(const LagrangianSpec& spec, const DiscreteCurve& curve);
Vec final_momentum(const LagrangianSpec& spec, const DiscreteCurve& curve);
Vec initial_velocity(const LagrangianSpec& spec, const DiscreteCurve& curve);
Vec final_velocity(const LagrangianSpec& spec, const DiscreteCurve& curve);

// Minimizes the discrete action in a single winding class, starting from the
// straight curve. Never throws on non-convergence; check `converged`.
CostResult minimize_in_class(const LagrangianSpec& spec, const TorusPoint& x,
                             const TorusPoint& y, const Winding& winding,
                             double s, double t, const ActionOptions& opts = {});

// Best result over the winding classes in range. Ties are broken by the
// lexicographically smallest winding. Throws ConvergenceError when no class
// converges.
CostResult minimize_bvp(const LagrangianSpec& spec, const TorusPoint& x,
                        const TorusPoint& y, double s, double t,
                        const ActionOptions& opts = {});

struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double s = 0.0;
  double t = 0.0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

struct CostCache {
  std::filesystem::path directory;
};

struct CostMatrixStats {
  std::size_t cache_hits = 0;  // entries served from the disk cache
  std::size_t computed = 0;    // entries obtained by minimization
};

// Entry (i, j) is minimize_bvp(sources[i], targets[j], s, t).value. With a
// cache, matrices are stored as flat little-endian doubles plus a JSON
// sidecar, written to a temporary name and renamed into place.
CostMatrix cost_matrix(const LagrangianSpec& spec,
                       const std::vector<TorusPoint>& sources,
                       const std::vector<TorusPoint>& targets, double s,
                       double t, const ActionOptions& opts = {},
                       const std::optional<CostCache>& cache = std::nullopt,
                       CostMatrixStats* stats = nullptr);

std::string cost_matrix_key(const LagrangianSpec& spec,
                            const std::vector<TorusPoint>& sources,
                            const std::vector<TorusPoint>& targets, double s,
                            double t, const ActionOptions& opts);

void write_cost_matrix_csv(const CostMatrix& m, const std::filesystem::path& path);

}  // namespace lagot
