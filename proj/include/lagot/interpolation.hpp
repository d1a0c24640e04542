#pragma once

// Displacement interpolation between two discrete measures: every plan cell
// of positive mass becomes a particle moving along its minimizing extremal.
// The checks below certify the path against the triangle equality, the
// Eulerian field and the continuity equation.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "lagot/action.hpp"
#include "lagot/hamilton_jacobi.hpp"
#include "lagot/kantorovich.hpp"

namespace lagot {

struct Particle {
  std::size_t source = 0;
  std::size_t target = 0;
  double mass = 0.0;
  DiscreteCurve curve;
};

struct InterpolationPath {
  double T = 1.0;
  std::vector<double> times;
  std::vector<Particle> particles;
  std::vector<DiscreteMeasure> measures;  // one per entry of `times`

  // sum_k m_k delta_{gamma_k(t)}; one atom per particle.
  DiscreteMeasure measure_at(double t) const;
};

// Throws ConvergenceError naming the plan cell "(i,j)" whose extremal failed.
InterpolationPath interpolate(const TransportPlan& plan, const DiscreteMeasure& mu0,
                              const DiscreteMeasure& mu1, const LagrangianSpec& spec, double T,
                              const std::vector<double>& times, const ActionOptions& opts = {},
                              double mass_threshold = 1e-12);

// Largest deviation of the path's end measures from mu0 and mu1, in atom
// position and in aggregated weight.
double boundary_error(const InterpolationPath& path, const DiscreteMeasure& mu0,
                      const DiscreteMeasure& mu1);

struct TriangleReport {
  double t1 = 0.0, t2 = 0.0, t3 = 0.0;
  double c13 = 0.0, c12 = 0.0, c23 = 0.0;
  double defect = 0.0;  // |c13 - c12 - c23|
  double tolerance = 0.0;
  bool pass = false;
};

// Solves the three Kantorovich problems between the path's measures at the
// given times. Default tolerance: cost_accuracy times the atom count.
TriangleReport verify_triangle(const InterpolationPath& path, const LagrangianSpec& spec,
                               double t1, double t2, double t3, const ActionOptions& opts = {},
                               double cost_accuracy = 1e-9);

struct FlowReport {
  double s = 0.0, t = 0.0;
  double max_deviation = 0.0;   // particle-wise distance after integration
  double wasserstein1 = 0.0;    // pushed-forward measure vs mu_t
  double max_lookup_distance = 0.0;
  bool coverage_warning = false;  // some lookup landed beyond 2 cells
};

// Moves each particle from its time-s position with the velocity of the
// nearest masked node on the nearest field slice (forward Euler,
// `steps_per_unit_time` steps) and compares with its time-t position.
FlowReport flow_consistency(const InterpolationPath& path, const VectorFieldEstimate& field,
                            double s, double t, int steps_per_unit_time = 1024,
                            std::uint64_t seed = 0);

// f(x, t) = trig(2 pi k.x) (t / T)^power, trig = cos or sin.
struct TestFunction {
  Vec wavevector;
  bool sine = false;
  int power = 0;

  double value(const Vec& x, double t, double T) const;
  double time_derivative(const Vec& x, double t, double T) const;
  Vec gradient(const Vec& x, double t, double T) const;
};

// Products of the modes 1, cos, sin (|k|_inf <= 1) with t^0, t^1, t^2.
std::vector<TestFunction> default_test_functions(int dim);

struct ContinuityReport {
  std::vector<double> residuals;  // one per test function
  double max_residual = 0.0;
};

// sum_k m_k int_0^T (d_t f + grad f . gamma_k') dt - (int f_T dmu1 - int f_0 dmu0)
// with two-point Gauss quadrature on every curve segment.
ContinuityReport continuity_residual(const InterpolationPath& path, const DiscreteMeasure& mu0,
                                     const DiscreteMeasure& mu1,
                                     const std::vector<TestFunction>& functions);

// Largest velocity difference between particles that are within
// `radius` of each other at an interior sampled time.
double crossing_defect(const InterpolationPath& path, double radius = 1e-9);

// |sum_k m_k c_s^t(gamma_k(s), gamma_k(t)) - C_s^t(mu_s, mu_t)|.
double restriction_gap(const InterpolationPath& path, const LagrangianSpec& spec, double s,
                       double t, const ActionOptions& opts = {});

// Long format: t,particle,x1[,x2],weight for every sampled time.
void write_interpolation_csv(const InterpolationPath& path, const std::filesystem::path& file);
// One file per particle (particle_<k>.csv: t,x1[,x2]) with a blank line
// wherever the wrapped path jumps across the boundary. Returns the file names.
std::vector<std::string> write_trajectories(const InterpolationPath& path,
                                            const std::filesystem::path& dir);

}  // namespace lagot
