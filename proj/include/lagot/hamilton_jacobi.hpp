#pragma once

// Semi-discrete Lax-Oleinik operators: the forward value u(x, t) propagated
// from phi0 and the backward value u_hat(x, t) propagated from phi1, both
// evaluated on grid nodes. Their contact set approximates the transport set,
// on which the interpolation velocity field X is read off.

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "lagot/action.hpp"
#include "lagot/dynamics.hpp"
#include "lagot/kantorovich.hpp"
#include "lagot/manifold.hpp"

namespace lagot {

struct GridField {
  GridSpec grid;
  std::vector<double> values;  // one per grid node
  double time = 0.0;
};

struct LaxOleinikResult {
  GridField field;
  // Optimizing boundary atom per node (first index on ties) and every index
  // within 1e-12 of the optimum.
  std::vector<std::size_t> arg;
  std::vector<std::vector<std::size_t>> arg_set;
  // Value of the optimizing branch (phi0(arg) + c(arg, .) forward) at the
  // neighbours of each node, ordered axis by axis as (+1, -1).
  std::vector<std::array<double, 4>> branch_neighbors;
};

// u(x, t) = min_i phi0(i) + c_0^t(x_i, x). `cost` is sources x grid nodes on
// [0, t]. Throws MissingDependency for an empty cost matrix.
LaxOleinikResult lax_oleinik_forward(const std::vector<double>& phi0, const CostMatrix& cost,
                                     const GridSpec& grid);
// u_hat(x, t) = max_j phi1(j) - c_t^T(x, y_j). `cost` is grid nodes x targets
// on [t, T].
LaxOleinikResult lax_oleinik_backward(const std::vector<double>& phi1, const CostMatrix& cost,
                                      const GridSpec& grid);

struct TransportSetMask {
  GridSpec grid;
  double time = 0.0;
  double tolerance = 0.0;
  std::vector<bool> mask;
  std::size_t count() const;
};

TransportSetMask transport_set(const GridField& u, const GridField& u_hat, double tol);

// Default contact tolerance: 10 * cost_accuracy plus twice the worst gap
// u - u_hat at a node half a cell from an exact contact point, estimated by
// the quadratic growth 1/2 lambda_max(A) d (h/2)^2 (1/t + 1/(T - t)).
double mask_tolerance(const LagrangianSpec& spec, const GridSpec& grid, double t, double T,
                      double cost_accuracy = 1e-9);

// Largest u_hat - u over the grid (<= 0 when the ordering holds).
double ordering_violation(const GridField& u, const GridField& u_hat);

struct FieldSlice {
  double time = 0.0;
  TransportSetMask mask;
  // Per grid node; meaningful only where mask is set.
  std::vector<Vec> from_extremal;  // final velocity of the argmin extremal
  std::vector<Vec> from_gradient;  // dH/dp(x, D_x u, t)
  double deviation = 0.0;          // sup over the mask of |difference|
};

struct VectorFieldEstimate {
  std::vector<FieldSlice> slices;
  bool empty() const;
};

// Velocity at time t of the minimizing extremal from the argmin source atom
// to each masked node, together with the gradient-based estimate from
// centered differences of u along the active branch (which agree with plain
// centered differences of u wherever the neighbours share the argmin).
FieldSlice velocity_field(const LagrangianSpec& spec, const TransportSetMask& mask,
                          const LaxOleinikResult& forward,
                          const std::vector<TorusPoint>& sources,
                          const ActionOptions& opts = {});

struct LipschitzEstimate {
  double epsilon = 0.0;
  double K = 0.0;
  std::size_t pairs = 0;
  bool defined = false;  // at least two masked nodes among the used slices
};

// K(eps) = max |X - X'| / dist over masked node pairs on the same slice with
// dist <= radius and slice time in [eps, T - eps].
std::vector<LipschitzEstimate> lipschitz_estimate(const VectorFieldEstimate& field, double T,
                                                  const std::vector<double>& epsilons,
                                                  double radius = 0.25);

struct SubsolutionReport {
  double max_residual = 0.0;       // max of dt u + H over smooth nodes
  double max_abs_on_mask = 0.0;    // max |dt u + H| over smooth masked nodes
  std::size_t smooth_nodes = 0;
};

// Residual of dt u + H(x, D_x u, t) from slices at t - dt, t, t + dt, checked
// where the second differences of u are bounded by `curvature_bound`.
SubsolutionReport subsolution_residual(const LagrangianSpec& spec, const GridField& before,
                                       const GridField& at, const GridField& after,
                                       const TransportSetMask* mask = nullptr,
                                       double curvature_bound = 1e3);

// Full semi-discrete analysis for one optimal pair: u, u_hat, mask and field
// at each requested interior time.
struct TransportSetAnalysis {
  std::vector<double> times;
  std::vector<LaxOleinikResult> forward;
  std::vector<LaxOleinikResult> backward;
  VectorFieldEstimate field;
  double ordering_violation = -INFINITY;  // max over times of u_hat - u
};

TransportSetAnalysis analyze_transport_set(const LagrangianSpec& spec, const DiscreteMeasure& mu0,
                                           const DiscreteMeasure& mu1, const PotentialPair& pair,
                                           double T, const GridSpec& grid,
                                           const std::vector<double>& times,
                                           const ActionOptions& opts = {},
                                           const std::optional<CostCache>& cache = std::nullopt,
                                           double mask_slack = 1.0);

// CSV with columns x1[,x2],value.
void write_field_csv(const GridField& f, const std::filesystem::path& path);
// Whitespace-separated matrix for gnuplot's `matrix` keyword. One line per
// field for 1-D grids (time along rows); a single 2-D field is written as
// n lines of n values.
void write_field_matrix(const std::vector<GridField>& fields, const std::filesystem::path& path);

}  // namespace lagot
