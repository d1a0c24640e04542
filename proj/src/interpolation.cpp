#include "lagot/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "util.hpp"

namespace lagot {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

DiscreteMeasure particle_measure(const std::vector<TorusPoint>& atoms,
                                 const std::vector<double>& masses) {
  double total = 0.0;
  for (double m : masses) total += m;
  if (std::abs(total - 1.0) <= 1e-12) return DiscreteMeasure(atoms, masses);
  return DiscreteMeasure::normalized(atoms, masses);
}

// Velocity at knot times is the mean of the two adjacent segments.
Vec velocity_at(const DiscreteCurve& c, double t) {
  const double h = c.step();
  const double pos = (t - c.start_time()) / h;
  const double k = std::round(pos);
  if (std::abs(pos - k) < 1e-9 && k > 0 && k < static_cast<double>(c.segments())) {
    const auto i = static_cast<std::size_t>(k);
    return (c.points[i + 1] - c.points[i - 1]) * (0.5 / h);
  }
  return c.segment_velocity(t);
}

const FieldSlice& nearest_slice(const VectorFieldEstimate& field, double t) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < field.slices.size(); ++i)
    if (std::abs(field.slices[i].time - t) < std::abs(field.slices[best].time - t)) best = i;
  return field.slices[best];
}

}  // namespace

DiscreteMeasure InterpolationPath::measure_at(double t) const {
  std::vector<TorusPoint> atoms;
  std::vector<double> masses;
  for (const Particle& p : particles) {
    atoms.push_back(p.curve.at(t));
    masses.push_back(p.mass);
  }
  return particle_measure(atoms, masses);
}

InterpolationPath interpolate(const TransportPlan& plan, const DiscreteMeasure& mu0,
                              const DiscreteMeasure& mu1, const LagrangianSpec& spec, double T,
                              const std::vector<double>& times, const ActionOptions& opts,
                              double mass_threshold) {
  if (plan.rows != mu0.size() || plan.cols != mu1.size())
    throw InvalidInput("plan shape does not match the measures");
  for (double t : times)
    if (t < 0.0 || t > T) throw InvalidInput("interpolation times must lie in [0, T]");
  InterpolationPath path;
  path.T = T;
  path.times = times;
  for (std::size_t i = 0; i < plan.rows; ++i)
    for (std::size_t j = 0; j < plan.cols; ++j)
      if (plan(i, j) > mass_threshold) path.particles.push_back({i, j, plan(i, j), {}});
  if (path.particles.empty()) throw InvalidInput("plan carries no mass");
  detail::parallel_for(path.particles.size(), [&](std::size_t k) {
    Particle& p = path.particles[k];
    try {
      p.curve = minimize_bvp(spec, mu0.atom(p.source), mu1.atom(p.target), 0.0, T, opts).curve;
    } catch (const ConvergenceError& e) {
      std::ostringstream os;
      os << "extremal for plan cell (" << p.source << "," << p.target << ") did not converge: "
         << e.what();
      throw ConvergenceError(os.str(), e.best_attempt());
    }
  });
  for (double t : times) path.measures.push_back(path.measure_at(t));
  return path;
}

double boundary_error(const InterpolationPath& path, const DiscreteMeasure& mu0,
                      const DiscreteMeasure& mu1) {
  double worst = 0.0;
  std::vector<double> w0(mu0.size(), 0.0), w1(mu1.size(), 0.0);
  for (const Particle& p : path.particles) {
    worst = std::max(worst, distance(p.curve.at(0.0), mu0.atom(p.source)));
    worst = std::max(worst, distance(p.curve.at(path.T), mu1.atom(p.target)));
    w0[p.source] += p.mass;
    w1[p.target] += p.mass;
  }
  for (std::size_t i = 0; i < w0.size(); ++i) worst = std::max(worst, std::abs(w0[i] - mu0.weight(i)));
  for (std::size_t j = 0; j < w1.size(); ++j) worst = std::max(worst, std::abs(w1[j] - mu1.weight(j)));
  return worst;
}

TriangleReport verify_triangle(const InterpolationPath& path, const LagrangianSpec& spec,
                               double t1, double t2, double t3, const ActionOptions& opts,
                               double cost_accuracy) {
  if (!(t1 < t2 && t2 < t3)) throw InvalidInput("triangle check needs t1 < t2 < t3");
  const DiscreteMeasure m1 = path.measure_at(t1);
  const DiscreteMeasure m2 = path.measure_at(t2);
  const DiscreteMeasure m3 = path.measure_at(t3);
  auto kantorovich = [&](const DiscreteMeasure& a, const DiscreteMeasure& b, double s, double t) {
    const CostMatrix c = cost_matrix(spec, a.atoms(), b.atoms(), s, t, opts);
    return solve_transport(c, a.weights(), b.weights()).primal.value;
  };
  TriangleReport r;
  r.t1 = t1;
  r.t2 = t2;
  r.t3 = t3;
  r.c13 = kantorovich(m1, m3, t1, t3);
  r.c12 = kantorovich(m1, m2, t1, t2);
  r.c23 = kantorovich(m2, m3, t2, t3);
  r.defect = std::abs(r.c13 - r.c12 - r.c23);
  r.tolerance = cost_accuracy * static_cast<double>(path.particles.size());
  r.pass = r.defect <= r.tolerance;
  return r;
}

FlowReport flow_consistency(const InterpolationPath& path, const VectorFieldEstimate& field,
                            double s, double t, int steps_per_unit_time, std::uint64_t seed) {
  if (field.empty()) throw InvalidInput("flow consistency needs a nonempty field");
  if (!(s < t)) throw InvalidInput("flow consistency needs s < t");
  FlowReport rep;
  rep.s = s;
  rep.t = t;
  const long steps = std::max(1L, static_cast<long>(std::ceil((t - s) * steps_per_unit_time)));
  const double dt = (t - s) / static_cast<double>(steps);
  std::vector<TorusPoint> ends;
  std::vector<double> masses;
  for (const Particle& p : path.particles) {
    Vec x = p.curve.lifted_at(s);
    for (long k = 0; k < steps; ++k) {
      const double tau = s + (static_cast<double>(k) + 0.5) * dt;
      const FieldSlice& slice = nearest_slice(field, tau);
      const GridSpec& grid = slice.mask.grid;
      const TorusPoint here = wrap(x);
      std::size_t node = grid.nearest(here);
      double dist = distance(grid.node(node), here);
      if (!slice.mask.mask[node]) {
        dist = INFINITY;
        for (std::size_t n = 0; n < grid.size(); ++n) {
          if (!slice.mask.mask[n]) continue;
          const double d = distance(grid.node(n), here);
          if (d < dist) {
            dist = d;
            node = n;
          }
        }
      }
      if (!std::isfinite(dist)) continue;  // empty slice: particle holds still
      rep.max_lookup_distance = std::max(rep.max_lookup_distance, dist);
      x += slice.from_extremal[node] * dt;
    }
    const TorusPoint end = wrap(x);
    rep.max_deviation = std::max(rep.max_deviation, distance(end, p.curve.at(t)));
    ends.push_back(end);
    masses.push_back(p.mass);
  }
  const GridSpec& g0 = field.slices.front().mask.grid;
  rep.coverage_warning = rep.max_lookup_distance > 2.0 * g0.spacing();
  rep.wasserstein1 = wasserstein1(particle_measure(ends, masses), path.measure_at(t), seed);
  return rep;
}

double TestFunction::value(const Vec& x, double t, double T) const {
  const double arg = kTwoPi * wavevector.dot(x);
  return (sine ? std::sin(arg) : std::cos(arg)) * std::pow(t / T, power);
}

double TestFunction::time_derivative(const Vec& x, double t, double T) const {
  if (power == 0) return 0.0;
  const double arg = kTwoPi * wavevector.dot(x);
  return (sine ? std::sin(arg) : std::cos(arg)) * power * std::pow(t / T, power - 1) / T;
}

Vec TestFunction::gradient(const Vec& x, double t, double T) const {
  const double arg = kTwoPi * wavevector.dot(x);
  const double d = sine ? std::cos(arg) : -std::sin(arg);
  return wavevector * (kTwoPi * d * std::pow(t / T, power));
}

std::vector<TestFunction> default_test_functions(int dim) {
  std::vector<Vec> ks;
  if (dim == 1) {
    ks = {Vec(0.0), Vec(1.0)};
  } else {
    ks = {Vec(0.0, 0.0), Vec(1.0, 0.0), Vec(0.0, 1.0), Vec(1.0, 1.0), Vec(1.0, -1.0)};
  }
  std::vector<TestFunction> out;
  for (int p = 0; p <= 2; ++p)
    for (const Vec& k : ks) {
      out.push_back({k, false, p});
      if (k.norm_inf() > 0) out.push_back({k, true, p});
    }
  return out;
}

ContinuityReport continuity_residual(const InterpolationPath& path, const DiscreteMeasure& mu0,
                                     const DiscreteMeasure& mu1,
                                     const std::vector<TestFunction>& functions) {
  static const double g = 0.5 / std::sqrt(3.0);
  ContinuityReport rep;
  const double T = path.T;
  for (const TestFunction& f : functions) {
    double flux = 0.0;
    for (const Particle& p : path.particles) {
      const DiscreteCurve& c = p.curve;
      const double h = c.step();
      double integral = 0.0;
      for (std::size_t k = 0; k < c.segments(); ++k) {
        const Vec v = (c.points[k + 1] - c.points[k]) * (1.0 / h);
        for (double node : {0.5 - g, 0.5 + g}) {
          const double tau = c.times[k] + node * h;
          const Vec x = c.points[k] + v * (node * h);
          integral += 0.5 * h * (f.time_derivative(x, tau, T) + f.gradient(x, tau, T).dot(v));
        }
      }
      flux += p.mass * integral;
    }
    double boundary = 0.0;
    for (std::size_t j = 0; j < mu1.size(); ++j)
      boundary += mu1.weight(j) * f.value(mu1.atom(j).coords(), T, T);
    for (std::size_t i = 0; i < mu0.size(); ++i)
      boundary -= mu0.weight(i) * f.value(mu0.atom(i).coords(), 0.0, T);
    rep.residuals.push_back(flux - boundary);
    rep.max_residual = std::max(rep.max_residual, std::abs(flux - boundary));
  }
  return rep;
}

double crossing_defect(const InterpolationPath& path, double radius) {
  double worst = 0.0;
  for (double t : path.times) {
    if (t <= 0.0 || t >= path.T) continue;
    for (std::size_t a = 0; a < path.particles.size(); ++a)
      for (std::size_t b = a + 1; b < path.particles.size(); ++b) {
        const auto& ca = path.particles[a].curve;
        const auto& cb = path.particles[b].curve;
        if (distance(ca.at(t), cb.at(t)) > radius) continue;
        worst = std::max(worst, (velocity_at(ca, t) - velocity_at(cb, t)).norm());
      }
  }
  return worst;
}

double restriction_gap(const InterpolationPath& path, const LagrangianSpec& spec, double s,
                       double t, const ActionOptions& opts) {
  const DiscreteMeasure ms = path.measure_at(s);
  const DiscreteMeasure mt = path.measure_at(t);
  const CostMatrix c = cost_matrix(spec, ms.atoms(), mt.atoms(), s, t, opts);
  double induced = 0.0;
  for (std::size_t k = 0; k < path.particles.size(); ++k) induced += ms.weight(k) * c(k, k);
  return std::abs(induced - solve_transport(c, ms.weights(), mt.weights()).primal.value);
}

void write_interpolation_csv(const InterpolationPath& path, const std::filesystem::path& file) {
  const int d = path.particles.front().curve.points.front().dim;
  std::string out = d == 1 ? "t,particle,x1,weight\n" : "t,particle,x1,x2,weight\n";
  for (std::size_t ti = 0; ti < path.times.size(); ++ti) {
    const DiscreteMeasure& m = path.measures[ti];
    for (std::size_t k = 0; k < m.size(); ++k) {
      out += detail::fmt(path.times[ti]) + "," + std::to_string(k) + ",";
      for (int a = 0; a < d; ++a) out += detail::fmt(m.atom(k)[a]) + ",";
      out += detail::fmt(m.weight(k)) + "\n";
    }
  }
  detail::write_file_atomic(file, out);
}

std::vector<std::string> write_trajectories(const InterpolationPath& path,
                                            const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> names;
  for (std::size_t k = 0; k < path.particles.size(); ++k) {
    const DiscreteCurve& c = path.particles[k].curve;
    const int d = c.points.front().dim;
    std::string out = d == 1 ? "t,x1\n" : "t,x1,x2\n";
    std::vector<double> prev;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      const TorusPoint x = wrap(c.points[i]);
      bool jump = false;
      for (int a = 0; a < d; ++a)
        if (!prev.empty() && std::abs(x[a] - prev[static_cast<std::size_t>(a)]) > 0.5) jump = true;
      if (jump) out += "\n";
      out += detail::fmt(c.times[i]);
      for (int a = 0; a < d; ++a) out += "," + detail::fmt(x[a]);
      out += "\n";
      prev.assign(x.coords().c.begin(), x.coords().c.begin() + d);
    }
    const std::string name = "particle_" + std::to_string(k) + ".csv";
    detail::write_file_atomic(dir / name, out);
    names.push_back(name);
  }
  return names;
}

}  // namespace lagot
