#pragma once

// Mechanical Lagrangians L(x, v, t) = 1/2 v^T A v - V(x, t) on the flat torus,
// their Legendre-dual Hamiltonians H(x, p, t) = 1/2 p^T A^{-1} p + V(x, t), and
// the associated flows.

#include <optional>
#include <string>
#include <vector>

#include "lagot/manifold.hpp"

namespace lagot {

// Symmetric d x d matrix, d in {1, 2}.
struct Mat {
  std::array<double, 4> a{};
  int dim = 1;

  static Mat identity(int d);
  static Mat diagonal(const Vec& diag);
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i * 2 + j)]; }
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i * 2 + j)]; }
  Vec apply(const Vec& v) const;
  double quad(const Vec& v) const { return v.dot(apply(v)); }
};

// One term a * cos(2 pi (k . x - c t) + phase).
struct CosineMode {
  double amplitude = 0.0;
  Vec wavevector;
  double speed = 0.0;
  double phase = 0.0;
};

// Potential V(x, t) given as a finite sum of cosine modes. The named
// constructors are the built-ins selectable from configuration files.
class Potential {
 public:
  static Potential zero(int dim);
  static Potential cosine(double amplitude, const Vec& wavevector);
  static Potential two_mode(double a1, const Vec& k1, double a2, const Vec& k2);
  static Potential traveling(double amplitude, const Vec& wavevector, double speed);

  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  const std::vector<CosineMode>& modes() const { return modes_; }
  bool time_dependent() const;

  double value(const Vec& x, double t) const;
  Vec gradient(const Vec& x, double t) const;
  Mat hessian(const Vec& x, double t) const;
  double time_derivative(const Vec& x, double t) const;
  // Upper bound on |V| over M x R.
  double sup_abs() const;

  // Canonical text form; equal potentials give equal strings.
  std::string describe() const;

 private:
  Potential(std::string name, int dim, std::vector<CosineMode> modes);
  std::string name_;
  int dim_ = 1;
  std::vector<CosineMode> modes_;
};

// Immutable once constructed. Construction rejects a kinetic matrix that is
// not symmetric positive definite.
class LagrangianSpec {
 public:
  LagrangianSpec(const Mat& kinetic, Potential potential,
                 std::optional<double> time_period = std::nullopt);

  int dim() const { return kinetic_.dim; }
  const Mat& kinetic() const { return kinetic_; }
  const Mat& kinetic_inverse() const { return kinetic_inv_; }
  const Potential& potential() const { return potential_; }
  std::optional<double> time_period() const { return period_; }
  double kinetic_min_eigenvalue() const { return lambda_min_; }
  double kinetic_max_eigenvalue() const { return lambda_max_; }

  std::string describe() const;

 private:
  Mat kinetic_;
  Mat kinetic_inv_;
  Potential potential_;
  std::optional<double> period_;
  double lambda_min_ = 1.0;
  double lambda_max_ = 1.0;
};

LagrangianSpec free_particle(int dim = 1);

struct PhasePoint {
  TorusPoint x;
  TangentVec v;
  double t = 0.0;
};

// Positions are lifted (unwrapped) so that trajectories can be followed in
// the universal cover.
struct HamiltonianState {
  Vec x;
  Vec p;
};

double eval_L(const LagrangianSpec& spec, const Vec& x, const Vec& v, double t);
double eval_H(const LagrangianSpec& spec, const Vec& x, const Vec& p, double t);
inline double eval_L(const LagrangianSpec& spec, const TorusPoint& x,
                     const TangentVec& v, double t) {
  return eval_L(spec, x.coords(), v.v, t);
}
inline double eval_H(const LagrangianSpec& spec, const TorusPoint& x,
                     const Covec& p, double t) {
  return eval_H(spec, x.coords(), p.p, t);
}

Covec legendre_v_to_p(const LagrangianSpec& spec, const TorusPoint& x,
                      const TangentVec& v, double t);
TangentVec legendre_p_to_v(const LagrangianSpec& spec, const TorusPoint& x,
                           const Covec& p, double t);

// Classical fourth-order Runge-Kutta on x' = dH/dp, p' = -dH/dx with
// `total_steps` equal steps from time s to time t (t < s integrates
// backwards). Throws DivergenceError on a non-finite state.
HamiltonianState flow_hamiltonian(const LagrangianSpec& spec,
                                  HamiltonianState start, double s, double t,
                                  long total_steps);

// Euler-Lagrange flow psi_s^t. `steps_per_unit_time` fixes the step size;
// the number of steps is ceil(|t - s| * steps_per_unit_time).
PhasePoint flow(const LagrangianSpec& spec, const PhasePoint& start, double s,
                double t, int steps_per_unit_time = 1000);

}  // namespace lagot
