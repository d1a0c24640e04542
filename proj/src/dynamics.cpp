#include "lagot/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "lagot/error.hpp"

namespace lagot {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void check_dim(const Vec& v, int dim, const char* what) {
  if (v.dim != dim)
    throw InvalidInput(std::string(what) + " has dimension " +
                       std::to_string(v.dim) + ", expected " +
                       std::to_string(dim));
}

}  // namespace

Mat Mat::identity(int d) {
  Mat m;
  m.dim = d;
  for (int i = 0; i < d; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::diagonal(const Vec& diag) {
  Mat m;
  m.dim = diag.dim;
  for (int i = 0; i < diag.dim; ++i) m(i, i) = diag[i];
  return m;
}

Vec Mat::apply(const Vec& v) const {
  Vec out = Vec::zero(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) out[i] += (*this)(i, j) * v[j];
  return out;
}

Potential::Potential(std::string name, int dim, std::vector<CosineMode> modes)
    : name_(std::move(name)), dim_(dim), modes_(std::move(modes)) {
  for (const auto& m : modes_) {
    check_dim(m.wavevector, dim_, "wavevector");
    if (!std::isfinite(m.amplitude) || !std::isfinite(m.speed) ||
        !std::isfinite(m.phase) || !m.wavevector.finite())
      throw InvalidInput("potential parameters must be finite");
    for (int i = 0; i < dim_; ++i) {
      if (m.wavevector[i] != std::round(m.wavevector[i]))
        throw InvalidInput("wavevector components must be integers");
    }
  }
}

Potential Potential::zero(int dim) { return Potential("zero", dim, {}); }

Potential Potential::cosine(double amplitude, const Vec& wavevector) {
  return Potential("cosine", wavevector.dim, {{amplitude, wavevector, 0.0, 0.0}});
}

Potential Potential::two_mode(double a1, const Vec& k1, double a2,
                              const Vec& k2) {
  return Potential("two_mode", k1.dim,
                   {{a1, k1, 0.0, 0.0}, {a2, k2, 0.0, 0.0}});
}

Potential Potential::traveling(double amplitude, const Vec& wavevector,
                               double speed) {
  return Potential("traveling", wavevector.dim,
                   {{amplitude, wavevector, speed, 0.0}});
}

bool Potential::time_dependent() const {
  for (const auto& m : modes_)
    if (m.speed != 0.0 && m.amplitude != 0.0) return true;
  return false;
}

double Potential::value(const Vec& x, double t) const {
  double v = 0.0;
  for (const auto& m : modes_)
    v += m.amplitude *
         std::cos(kTwoPi * (m.wavevector.dot(x) - m.speed * t) + m.phase);
  return v;
}

Vec Potential::gradient(const Vec& x, double t) const {
  Vec g = Vec::zero(dim_);
  for (const auto& m : modes_) {
    const double s =
        std::sin(kTwoPi * (m.wavevector.dot(x) - m.speed * t) + m.phase);
    g += m.wavevector * (-m.amplitude * kTwoPi * s);
  }
  return g;
}

Mat Potential::hessian(const Vec& x, double t) const {
  Mat h;
  h.dim = dim_;
  for (const auto& m : modes_) {
    const double c =
        std::cos(kTwoPi * (m.wavevector.dot(x) - m.speed * t) + m.phase);
    const double f = -m.amplitude * kTwoPi * kTwoPi * c;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        h(i, j) += f * m.wavevector[i] * m.wavevector[j];
  }
  return h;
}

double Potential::time_derivative(const Vec& x, double t) const {
  double d = 0.0;
  for (const auto& m : modes_) {
    const double s =
        std::sin(kTwoPi * (m.wavevector.dot(x) - m.speed * t) + m.phase);
    d += m.amplitude * kTwoPi * m.speed * s;
  }
  return d;
}

double Potential::sup_abs() const {
  double s = 0.0;
  for (const auto& m : modes_) s += std::abs(m.amplitude);
  return s;
}

std::string Potential::describe() const {
  std::ostringstream os;
  os << name_ << "/d" << dim_;
  for (const auto& m : modes_) {
    os << "[a=" << fmt_double(m.amplitude) << ",k=";
    for (int i = 0; i < dim_; ++i) os << (i ? ":" : "") << fmt_double(m.wavevector[i]);
    os << ",c=" << fmt_double(m.speed) << ",ph=" << fmt_double(m.phase) << "]";
  }
  return os.str();
}

LagrangianSpec::LagrangianSpec(const Mat& kinetic, Potential potential,
                               std::optional<double> time_period)
    : kinetic_(kinetic),
      potential_(std::move(potential)),
      period_(time_period) {
  const int d = kinetic_.dim;
  if (d < 1 || d > kMaxDim) throw InvalidInput("kinetic matrix must be 1x1 or 2x2");
  if (potential_.dim() != d)
    throw InvalidInput("potential dimension does not match kinetic matrix");
  for (double e : kinetic_.a)
    if (!std::isfinite(e)) throw InvalidInput("kinetic matrix must be finite");
  if (d == 1) {
    if (!(kinetic_(0, 0) > 0.0))
      throw InvalidInput("kinetic matrix is not positive definite");
    kinetic_inv_ = Mat::identity(1);
    kinetic_inv_(0, 0) = 1.0 / kinetic_(0, 0);
    lambda_min_ = lambda_max_ = kinetic_(0, 0);
  } else {
    const double a = kinetic_(0, 0), b = kinetic_(0, 1), c = kinetic_(1, 1);
    if (std::abs(b - kinetic_(1, 0)) > 1e-12 * (std::abs(a) + std::abs(c)))
      throw InvalidInput("kinetic matrix is not symmetric");
    // Cholesky: a > 0 and the Schur complement c - b^2/a > 0.
    if (!(a > 0.0) || !(c - b * b / a > 0.0))
      throw InvalidInput("kinetic matrix is not positive definite");
    const double det = a * c - b * b;
    kinetic_inv_.dim = 2;
    kinetic_inv_(0, 0) = c / det;
    kinetic_inv_(1, 1) = a / det;
    kinetic_inv_(0, 1) = kinetic_inv_(1, 0) = -b / det;
    const double mean = 0.5 * (a + c);
    const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    lambda_min_ = mean - rad;
    lambda_max_ = mean + rad;
  }
  if (period_) {
    if (!(*period_ > 0.0) || !std::isfinite(*period_))
      throw InvalidInput("time period must be positive");
    for (const auto& m : potential_.modes()) {
      const double cycles = m.speed * *period_;
      if (std::abs(cycles - std::round(cycles)) > 1e-12)
        throw InvalidInput("potential is not periodic with the given time period");
    }
  }
  // Sampled boundedness check of V over a coarse space-time lattice.
  constexpr int kSamples = 16;
  for (int i = 0; i < kSamples; ++i)
    for (int j = 0; j < kSamples; ++j) {
      Vec x = Vec::zero(d);
      x[0] = static_cast<double>(i) / kSamples;
      if (d == 2) x[1] = static_cast<double>(j) / kSamples;
      if (!std::isfinite(potential_.value(x, static_cast<double>(j) / kSamples)))
        throw InvalidInput("potential is not finite");
    }
}

std::string LagrangianSpec::describe() const {
  std::ostringstream os;
  os << "A=";
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) os << fmt_double(kinetic_(i, j)) << ";";
  os << " V=" << potential_.describe();
  os << " period=" << (period_ ? fmt_double(*period_) : std::string("none"));
  return os.str();
}

LagrangianSpec free_particle(int dim) {
  return LagrangianSpec(Mat::identity(dim), Potential::zero(dim));
}

double eval_L(const LagrangianSpec& spec, const Vec& x, const Vec& v, double t) {
  return 0.5 * spec.kinetic().quad(v) - spec.potential().value(x, t);
}

double eval_H(const LagrangianSpec& spec, const Vec& x, const Vec& p, double t) {
  return 0.5 * spec.kinetic_inverse().quad(p) + spec.potential().value(x, t);
}

Covec legendre_v_to_p(const LagrangianSpec& spec, const TorusPoint&,
                      const TangentVec& v, double) {
  return {spec.kinetic().apply(v.v)};
}

TangentVec legendre_p_to_v(const LagrangianSpec& spec, const TorusPoint&,
                           const Covec& p, double) {
  return {spec.kinetic_inverse().apply(p.p)};
}

HamiltonianState flow_hamiltonian(const LagrangianSpec& spec,
                                  HamiltonianState y, double s, double t,
                                  long total_steps) {
  if (total_steps <= 0 || t == s) return y;
  const double h = (t - s) / static_cast<double>(total_steps);
  const Mat& ainv = spec.kinetic_inverse();
  const Potential& pot = spec.potential();
  auto rhs = [&](const HamiltonianState& st, double tau) {
    return HamiltonianState{ainv.apply(st.p), -pot.gradient(st.x, tau)};
  };
  for (long k = 0; k < total_steps; ++k) {
    const double tau = s + static_cast<double>(k) * h;
    const HamiltonianState k1 = rhs(y, tau);
    const HamiltonianState k2 =
        rhs({y.x + k1.x * (0.5 * h), y.p + k1.p * (0.5 * h)}, tau + 0.5 * h);
    const HamiltonianState k3 =
        rhs({y.x + k2.x * (0.5 * h), y.p + k2.p * (0.5 * h)}, tau + 0.5 * h);
    const HamiltonianState k4 = rhs({y.x + k3.x * h, y.p + k3.p * h}, tau + h);
    y.x += (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x) * (h / 6.0);
    y.p += (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p) * (h / 6.0);
    if (!y.x.finite() || !y.p.finite())
      throw DivergenceError("non-finite state while integrating the flow at t=" +
                            std::to_string(tau + h));
  }
  return y;
}

PhasePoint flow(const LagrangianSpec& spec, const PhasePoint& start, double s,
                double t, int steps_per_unit_time) {
  if (steps_per_unit_time <= 0)
    throw InvalidInput("steps per unit time must be positive");
  const long steps =
      static_cast<long>(std::ceil(std::abs(t - s) * steps_per_unit_time - 1e-9));
  HamiltonianState y{start.x.coords(),
                     legendre_v_to_p(spec, start.x, start.v, s).p};
  y = flow_hamiltonian(spec, y, s, t, steps);
  PhasePoint out;
  out.x = wrap(y.x);
  out.v = legendre_p_to_v(spec, out.x, Covec{y.p}, t);
  out.t = t;
  return out;
}

}  // namespace lagot
