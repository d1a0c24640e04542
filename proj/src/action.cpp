#include "lagot/action.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "util.hpp"

namespace lagot {

namespace {

// ---- 2x2 block helpers (blocks are general, not necessarily symmetric) ----

Mat mat_zero(int d) {
  Mat m;
  m.dim = d;
  return m;
}

Mat mat_add(const Mat& a, const Mat& b, double sb = 1.0) {
  Mat m = a;
  for (std::size_t i = 0; i < 4; ++i) m.a[i] += sb * b.a[i];
  return m;
}

Mat mat_scale(const Mat& a, double s) {
  Mat m = a;
  for (double& e : m.a) e *= s;
  return m;
}

Mat mat_mul(const Mat& a, const Mat& b) {
  Mat m = mat_zero(a.dim);
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j)
      for (int k = 0; k < a.dim; ++k) m(i, j) += a(i, k) * b(k, j);
  return m;
}

Mat mat_transpose(const Mat& a) {
  Mat m = a;
  if (a.dim == 2) std::swap(m(0, 1), m(1, 0));
  return m;
}

// Inverse of a symmetric block; returns false unless positive definite.
bool spd_inverse(const Mat& a, Mat& inv) {
  inv = mat_zero(a.dim);
  if (a.dim == 1) {
    if (!(a(0, 0) > 0.0)) return false;
    inv(0, 0) = 1.0 / a(0, 0);
    return true;
  }
  const double b = 0.5 * (a(0, 1) + a(1, 0));
  const double det = a(0, 0) * a(1, 1) - b * b;
  if (!(a(0, 0) > 0.0) || !(det > 0.0)) return false;
  inv(0, 0) = a(1, 1) / det;
  inv(1, 1) = a(0, 0) / det;
  inv(0, 1) = inv(1, 0) = -b / det;
  return true;
}

// Block-tridiagonal symmetric matrix: diag[k] and upper[k] = H_{k,k+1}.
struct BlockTridiag {
  std::vector<Mat> diag;
  std::vector<Mat> upper;
};

// Solves (H + shift I) x = rhs by block elimination. Returns false when some
// pivot block is not positive definite, i.e. H + shift I is not SPD.
bool solve_spd(const BlockTridiag& h, double shift, const std::vector<Vec>& rhs,
               std::vector<Vec>& x) {
  const std::size_t n = h.diag.size();
  if (n == 0) {
    x.clear();
    return true;
  }
  const int d = h.diag[0].dim;
  Mat eye = Mat::identity(d);
  std::vector<Mat> dinv(n);
  std::vector<Vec> y(n);
  Mat dk = mat_add(h.diag[0], eye, shift);
  if (!spd_inverse(dk, dinv[0])) return false;
  y[0] = rhs[0];
  for (std::size_t k = 1; k < n; ++k) {
    // L_k = H_{k,k-1} D_{k-1}^{-1}, with H_{k,k-1} = upper[k-1]^T.
    const Mat lower = mat_transpose(h.upper[k - 1]);
    const Mat lk = mat_mul(lower, dinv[k - 1]);
    dk = mat_add(mat_add(h.diag[k], eye, shift), mat_mul(lk, h.upper[k - 1]), -1.0);
    if (!spd_inverse(dk, dinv[k])) return false;
    y[k] = rhs[k] - lk.apply(y[k - 1]);
  }
  x.assign(n, Vec::zero(d));
  x[n - 1] = dinv[n - 1].apply(y[n - 1]);
  for (std::size_t k = n - 1; k-- > 0;) {
    x[k] = dinv[k].apply(y[k] - h.upper[k].apply(x[k + 1]));
  }
  return true;
}

struct Segment {
  Vec mid;
  Vec vel;
  double time;
};

Segment segment(const DiscreteCurve& c, std::size_t k, double h) {
  return {(c.points[k] + c.points[k + 1]) * 0.5,
          (c.points[k + 1] - c.points[k]) * (1.0 / h),
          c.times.front() + (static_cast<double>(k) + 0.5) * h};
}

BlockTridiag action_hessian(const LagrangianSpec& spec, const DiscreteCurve& c) {
  const std::size_t n_seg = c.segments();
  const double h = c.step();
  const int d = spec.dim();
  const Mat a_over_h = mat_scale(spec.kinetic(), 1.0 / h);
  std::vector<Mat> seg_v(n_seg);
  for (std::size_t k = 0; k < n_seg; ++k) {
    const Segment sg = segment(c, k, h);
    seg_v[k] = mat_scale(spec.potential().hessian(sg.mid, sg.time), -0.25 * h);
  }
  BlockTridiag out;
  if (n_seg < 2) return out;
  out.diag.resize(n_seg - 1, mat_zero(d));
  out.upper.resize(n_seg >= 3 ? n_seg - 2 : 0, mat_zero(d));
  for (std::size_t k = 1; k < n_seg; ++k) {
    out.diag[k - 1] =
        mat_add(mat_add(mat_scale(a_over_h, 2.0), seg_v[k - 1]), seg_v[k]);
    if (k + 1 < n_seg) out.upper[k - 1] = mat_add(mat_scale(a_over_h, -1.0), seg_v[k]);
  }
  return out;
}

double inf_norm(const std::vector<Vec>& g) {
  double m = 0.0;
  for (const auto& v : g) m = std::max(m, v.norm_inf());
  return m;
}

double dot(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
  return s;
}

DiscreteCurve moved(const DiscreteCurve& c, const std::vector<Vec>& dir, double alpha) {
  DiscreteCurve out = c;
  for (std::size_t k = 0; k < dir.size(); ++k) out.points[k + 1] += dir[k] * alpha;
  return out;
}

bool hessian_is_pd(const BlockTridiag& h) {
  std::vector<Vec> rhs(h.diag.size(), Vec::zero(h.diag.empty() ? 1 : h.diag[0].dim));
  std::vector<Vec> x;
  return solve_spd(h, 0.0, rhs, x);
}

}  // namespace

int knots_for(double duration, const ActionOptions& opts) {
  const auto k = static_cast<long>(std::llround(duration * opts.knots_per_unit_time));
  return static_cast<int>(std::max<long>(k, opts.min_knots));
}

DiscreteCurve DiscreteCurve::straight(const TorusPoint& x, const TorusPoint& y,
                                      const Winding& winding, double s, double t,
                                      int knots) {
  DiscreteCurve c;
  c.winding = winding;
  const Vec d = displacement(x, y, winding).v;
  c.times.resize(static_cast<std::size_t>(knots) + 1);
  c.points.resize(static_cast<std::size_t>(knots) + 1);
  for (int k = 0; k <= knots; ++k) {
    const double f = static_cast<double>(k) / knots;
    c.times[static_cast<std::size_t>(k)] = s + f * (t - s);
    c.points[static_cast<std::size_t>(k)] = x.coords() + d * f;
  }
  c.times.back() = t;
  c.points.back() = x.coords() + d;
  return c;
}

Vec DiscreteCurve::lifted_at(double t) const {
  if (t <= times.front()) return points.front();
  if (t >= times.back()) return points.back();
  const double h = step();
  auto k = static_cast<std::size_t>((t - times.front()) / h);
  k = std::min(k, segments() - 1);
  const double f = (t - times[k]) / h;
  if (f <= 1e-12) return points[k];
  if (f >= 1.0 - 1e-12) return points[k + 1];
  return points[k] + (points[k + 1] - points[k]) * f;
}

Vec DiscreteCurve::segment_velocity(double t) const {
  const double h = step();
  double pos = (t - times.front()) / h;
  auto k = pos <= 0.0 ? std::size_t{0} : static_cast<std::size_t>(pos);
  k = std::min(k, segments() - 1);
  return (points[k + 1] - points[k]) * (1.0 / h);
}

double discrete_action(const LagrangianSpec& spec, const DiscreteCurve& curve) {
  const double h = curve.step();
  double s = 0.0;
  for (std::size_t k = 0; k < curve.segments(); ++k) {
    const Segment sg = segment(curve, k, h);
    s += h * eval_L(spec, sg.mid, sg.vel, sg.time);
  }
  return s;
}

std::vector<Vec> action_gradient(const LagrangianSpec& spec,
                                 const DiscreteCurve& curve) {
  const std::size_t n_seg = curve.segments();
  const double h = curve.step();
  const int d = spec.dim();
  // Per segment: d/dq_left = -A v - (h/2) grad V, d/dq_right = A v - (h/2) grad V.
  std::vector<Vec> left(n_seg), right(n_seg);
  for (std::size_t k = 0; k < n_seg; ++k) {
    const Segment sg = segment(curve, k, h);
    const Vec av = spec.kinetic().apply(sg.vel);
    const Vec gv = spec.potential().gradient(sg.mid, sg.time) * (0.5 * h);
    left[k] = -av - gv;
    right[k] = av - gv;
  }
  std::vector<Vec> g(n_seg > 0 ? n_seg - 1 : 0, Vec::zero(d));
  for (std::size_t k = 1; k < n_seg; ++k) g[k - 1] = right[k - 1] + left[k];
  return g;
}

double euler_lagrange_residual(const LagrangianSpec& spec,
                               const DiscreteCurve& curve) {
  return inf_norm(action_gradient(spec, curve)) / curve.step();
}

Vec initial_momentum(const LagrangianSpec& spec, const DiscreteCurve& curve) {
  const double h = curve.step();
  const Segment sg = segment(curve, 0, h);
  return spec.kinetic().apply(sg.vel) +
         spec.potential().gradient(sg.mid, sg.time) * (0.5 * h);
}

Vec final_momentum(const LagrangianSpec& spec, const DiscreteCurve& curve) {
  const double h = curve.step();
  const Segment sg = segment(curve, curve.segments() - 1, h);
  return spec.kinetic().apply(sg.vel) -
         spec.potential().gradient(sg.mid, sg.time) * (0.5 * h);
}

Vec initial_velocity(const LagrangianSpec& spec, const DiscreteCurve& curve) {
  return spec.kinetic_inverse().apply(initial_momentum(spec, curve));
}

Vec final_velocity(const LagrangianSpec& spec, const DiscreteCurve& curve) {
  return spec.kinetic_inverse().apply(final_momentum(spec, curve));
}

namespace {

CostResult minimize_from_straight(const LagrangianSpec& spec, const TorusPoint& x,
                                  const TorusPoint& y, const Winding& winding,
                                  double s, double t, const ActionOptions& opts,
                                  int descent_iterations) {
  DiscreteCurve curve =
      DiscreteCurve::straight(x, y, winding, s, t, knots_for(t - s, opts));
  const double h = curve.step();
  double value = discrete_action(spec, curve);
  std::vector<Vec> grad = action_gradient(spec, curve);
  double residual = inf_norm(grad) / h;

  auto finish = [&](bool ok) {
    CostResult r;
    r.value = value;
    r.converged = ok;
    r.grad_norm = residual;
    r.curve = std::move(curve);
    return r;
  };
  if (residual <= opts.tolerance || grad.empty()) return finish(true);

  // Gradient descent with backtracking until the Hessian becomes positive
  // definite, then damped Newton.
  double step = h / (4.0 * spec.kinetic_max_eigenvalue());
  for (int it = 0; it < descent_iterations; ++it) {
    if (hessian_is_pd(action_hessian(spec, curve))) break;
    const double g2 = dot(grad, grad);
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      DiscreteCurve trial = moved(curve, grad, -step);
      const double v = discrete_action(spec, trial);
      if (v <= value - 1e-4 * step * g2) {
        curve = std::move(trial);
        value = v;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    step *= 2.0;
    grad = action_gradient(spec, curve);
    residual = inf_norm(grad) / h;
    if (residual <= opts.tolerance) return finish(true);
  }

  const double shift_floor = 1e-8 * spec.kinetic_max_eigenvalue() / h;
  double shift = 0.0;
  std::vector<Vec> dir;
  std::vector<Vec> neg_grad(grad.size());
  for (int it = 0; it < opts.max_newton_iterations; ++it) {
    if (residual <= opts.tolerance) return finish(true);
    const BlockTridiag hess = action_hessian(spec, curve);
    for (std::size_t k = 0; k < grad.size(); ++k) neg_grad[k] = -grad[k];
    bool factored = false;
    for (int tries = 0; tries < 60; ++tries) {
      if (solve_spd(hess, shift, neg_grad, dir)) {
        factored = true;
        break;
      }
      shift = std::max(2.0 * shift, shift_floor);
    }
    if (!factored) break;
    const double slope = dot(grad, dir);
    bool accepted = false;
    double alpha = 1.0;
    for (int bt = 0; bt < 50; ++bt) {
      DiscreteCurve trial = moved(curve, dir, alpha);
      const double v = discrete_action(spec, trial);
      if (!std::isfinite(v)) {
        alpha *= 0.5;
        continue;
      }
      const bool armijo = v <= value + 1e-4 * alpha * slope;
      bool flat_but_better = false;
      if (!armijo && v <= value + 1e-13 * (1.0 + std::abs(value))) {
        // Near the optimum the action no longer resolves progress; accept
        // steps that shrink the residual.
        flat_but_better =
            euler_lagrange_residual(spec, trial) < residual;
      }
      if (armijo || flat_but_better) {
        curve = std::move(trial);
        value = v;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (shift >= 1e12 * shift_floor) break;
      shift = std::max(10.0 * shift, shift_floor);
      continue;
    }
    shift = alpha == 1.0 ? shift * 0.1 : shift;
    if (shift < shift_floor) shift = 0.0;
    grad = action_gradient(spec, curve);
    residual = inf_norm(grad) / h;
  }
  return finish(residual <= opts.tolerance);
}

}  // namespace

CostResult minimize_in_class(const LagrangianSpec& spec, const TorusPoint& x,
                             const TorusPoint& y, const Winding& winding,
                             double s, double t, const ActionOptions& opts) {
  if (!(s < t)) throw InvalidInput("minimize_bvp requires s < t");
  if (x.dim() != spec.dim() || y.dim() != spec.dim())
    throw InvalidInput("endpoint dimension does not match the Lagrangian");
  // Shifted Newton from the straight curve is enough almost always; the
  // descent warm-up is only a fallback.
  CostResult r = minimize_from_straight(spec, x, y, winding, s, t, opts, 0);
  if (r.converged || opts.max_descent_iterations <= 0) return r;
  CostResult retry = minimize_from_straight(spec, x, y, winding, s, t, opts,
                                            opts.max_descent_iterations);
  return retry.converged || retry.value < r.value ? retry : r;
}

CostResult minimize_bvp(const LagrangianSpec& spec, const TorusPoint& x,
                        const TorusPoint& y, double s, double t,
                        const ActionOptions& opts) {
  if (!(s < t)) throw InvalidInput("minimize_bvp requires s < t");
  const double tau = t - s;
  const double vmax = spec.potential().sup_abs();
  const double lmin = spec.kinetic_min_eigenvalue();
  struct Candidate {
    Winding w;
    double lower_bound;
  };
  std::vector<Candidate> cands;
  for (const Winding& w : windings_in_range(spec.dim(), opts.winding_range)) {
    const double dn = displacement(x, y, w).v.norm();
    // Cauchy-Schwarz on the kinetic term plus |V| <= vmax; valid for the
    // discrete action as well.
    cands.push_back({w, 0.5 * lmin * dn * dn / tau - tau * vmax});
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.lower_bound < b.lower_bound;
                   });
  std::optional<CostResult> best;
  std::optional<CostResult> best_failed;
  for (const Candidate& c : cands) {
    if (best && c.lower_bound > best->value + 1e-12 * (1.0 + std::abs(best->value)))
      continue;
    CostResult r = minimize_in_class(spec, x, y, c.w, s, t, opts);
    if (!r.converged) {
      if (!best_failed || r.value < best_failed->value) best_failed = std::move(r);
      continue;
    }
    if (!best) {
      best = std::move(r);
      continue;
    }
    const double tie = 1e-12 * (1.0 + std::abs(best->value));
    if (r.value < best->value - tie ||
        (std::abs(r.value - best->value) <= tie &&
         r.curve.winding < best->curve.winding)) {
      best = std::move(r);
    }
  }
  if (!best) {
    std::ostringstream os;
    os << "no winding class converged for x=" << x[0] << (x.dim() == 2 ? "," : "")
       << (x.dim() == 2 ? std::to_string(x[1]) : std::string()) << " y=" << y[0]
       << " on [" << s << ", " << t << "]";
    throw ConvergenceError(os.str(), best_failed ? *best_failed : CostResult{});
  }
  return *best;
}

std::string cost_matrix_key(const LagrangianSpec& spec,
                            const std::vector<TorusPoint>& sources,
                            const std::vector<TorusPoint>& targets, double s,
                            double t, const ActionOptions& opts) {
  std::ostringstream os;
  os << spec.describe() << "|s=" << detail::fmt(s) << "|t=" << detail::fmt(t)
     << "|kpu=" << opts.knots_per_unit_time << "|mk=" << opts.min_knots
     << "|wr=" << opts.winding_range << "|tol=" << detail::fmt(opts.tolerance)
     << "|gd=" << opts.max_descent_iterations << "|nt=" << opts.max_newton_iterations;
  std::uint64_t h = detail::fnv1a(os.str());
  auto hash_points = [&](const std::vector<TorusPoint>& pts) {
    std::string buf = "|n=" + std::to_string(pts.size());
    for (const auto& p : pts)
      for (int i = 0; i < p.dim(); ++i) buf += "," + detail::fmt(p[i]);
    h = detail::fnv1a(buf, h);
  };
  hash_points(sources);
  hash_points(targets);
  return detail::hex64(h);
}

namespace {

std::optional<CostMatrix> load_cached(const std::filesystem::path& bin,
                                      const std::filesystem::path& side,
                                      const std::string& key, std::size_t rows,
                                      std::size_t cols, double s, double t) {
  std::error_code ec;
  if (!std::filesystem::exists(bin, ec) || !std::filesystem::exists(side, ec))
    return std::nullopt;
  try {
    auto header = nlohmann::json::parse(detail::read_file(side));
    if (header.at("key").get<std::string>() != key ||
        header.at("rows").get<std::size_t>() != rows ||
        header.at("cols").get<std::size_t>() != cols)
      return std::nullopt;
    const std::string data = detail::read_file(bin);
    if (data.size() != rows * cols * sizeof(double)) return std::nullopt;
    CostMatrix m{rows, cols, s, t, std::vector<double>(rows * cols)};
    std::memcpy(m.values.data(), data.data(), data.size());
    return m;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

CostMatrix cost_matrix(const LagrangianSpec& spec,
                       const std::vector<TorusPoint>& sources,
                       const std::vector<TorusPoint>& targets, double s,
                       double t, const ActionOptions& opts,
                       const std::optional<CostCache>& cache,
                       CostMatrixStats* stats) {
  if (sources.empty() || targets.empty())
    throw InvalidInput("cost_matrix needs nonempty point lists");
  if (!(s < t)) throw InvalidInput("cost_matrix requires s < t");
  const std::size_t rows = sources.size(), cols = targets.size();
  std::string key;
  std::filesystem::path bin, side;
  if (cache) {
    key = cost_matrix_key(spec, sources, targets, s, t, opts);
    bin = cache->directory / ("cost_" + key + ".bin");
    side = cache->directory / ("cost_" + key + ".json");
    if (auto hit = load_cached(bin, side, key, rows, cols, s, t)) {
      if (stats) stats->cache_hits += rows * cols;
      return *hit;
    }
  }
  CostMatrix m{rows, cols, s, t, std::vector<double>(rows * cols)};
  detail::parallel_for(rows, [&](std::size_t i) {
    for (std::size_t j = 0; j < cols; ++j) {
      try {
        m(i, j) = minimize_bvp(spec, sources[i], targets[j], s, t, opts).value;
      } catch (const ConvergenceError& e) {
        throw ConvergenceError("cost matrix entry (" + std::to_string(i) + "," +
                                   std::to_string(j) + "): " + e.what(),
                               e.best_attempt());
      }
    }
  });
  if (stats) stats->computed += rows * cols;
  if (cache) {
    std::string data(rows * cols * sizeof(double), '\0');
    std::memcpy(data.data(), m.values.data(), data.size());
    nlohmann::json header = {
        {"format", "lagot-cost-matrix-v1"},
        {"key", key},
        {"spec", spec.describe()},
        {"rows", rows},
        {"cols", cols},
        {"s", s},
        {"t", t},
        {"knots_per_unit_time", opts.knots_per_unit_time},
        {"winding_range", opts.winding_range},
        {"tolerance", opts.tolerance},
        {"byte_order", "little"},
    };
    // Data first, sidecar last: a reader that sees the sidecar sees the data.
    detail::write_file_atomic(bin, data);
    detail::write_file_atomic(side, header.dump(2) + "\n");
  }
  return m;
}

void write_cost_matrix_csv(const CostMatrix& m, const std::filesystem::path& path) {
  std::string out;
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j) out += ',';
      out += detail::fmt(m(i, j));
    }
    out += '\n';
  }
  detail::write_file_atomic(path, out);
}

}  // namespace lagot
