#include "lagot/hamilton_jacobi.hpp"

#include <algorithm>
#include <cmath>

#include "util.hpp"

namespace lagot {
namespace {

void check_cost(const CostMatrix& cost, std::size_t boundary, std::size_t nodes, bool forward) {
  if (cost.rows == 0 || cost.cols == 0 || cost.values.empty())
    throw MissingDependency("Lax-Oleinik operator needs a cost matrix");
  const std::size_t b = forward ? cost.rows : cost.cols;
  const std::size_t g = forward ? cost.cols : cost.rows;
  if (b != boundary || g != nodes)
    throw InvalidInput("cost matrix shape does not match the boundary data and grid");
}

constexpr double kTie = 1e-12;

template <class Branch>
void fill_branches(LaxOleinikResult& r, const GridSpec& grid, Branch&& value) {
  r.branch_neighbors.assign(grid.size(), {0.0, 0.0, 0.0, 0.0});
  for (std::size_t x = 0; x < grid.size(); ++x)
    for (int ax = 0; ax < grid.dim(); ++ax) {
      r.branch_neighbors[x][2 * ax] = value(r.arg[x], grid.neighbor(x, ax, 1));
      r.branch_neighbors[x][2 * ax + 1] = value(r.arg[x], grid.neighbor(x, ax, -1));
    }
}

}  // namespace

LaxOleinikResult lax_oleinik_forward(const std::vector<double>& phi0, const CostMatrix& cost,
                                     const GridSpec& grid) {
  check_cost(cost, phi0.size(), grid.size(), true);
  LaxOleinikResult r{GridField{grid, std::vector<double>(grid.size()), cost.t}, {}, {}, {}};
  r.arg.resize(grid.size());
  r.arg_set.resize(grid.size());
  for (std::size_t x = 0; x < grid.size(); ++x) {
    double best = INFINITY;
    for (std::size_t i = 0; i < phi0.size(); ++i) {
      const double v = phi0[i] + cost(i, x);
      if (v < best) {
        best = v;
        r.arg[x] = i;
      }
    }
    r.field.values[x] = best;
    for (std::size_t i = 0; i < phi0.size(); ++i)
      if (phi0[i] + cost(i, x) <= best + kTie * (1.0 + std::abs(best))) r.arg_set[x].push_back(i);
  }
  fill_branches(r, grid, [&](std::size_t b, std::size_t x) { return phi0[b] + cost(b, x); });
  return r;
}

LaxOleinikResult lax_oleinik_backward(const std::vector<double>& phi1, const CostMatrix& cost,
                                      const GridSpec& grid) {
  check_cost(cost, phi1.size(), grid.size(), false);
  LaxOleinikResult r{GridField{grid, std::vector<double>(grid.size()), cost.s}, {}, {}, {}};
  r.arg.resize(grid.size());
  r.arg_set.resize(grid.size());
  for (std::size_t x = 0; x < grid.size(); ++x) {
    double best = -INFINITY;
    for (std::size_t j = 0; j < phi1.size(); ++j) {
      const double v = phi1[j] - cost(x, j);
      if (v > best) {
        best = v;
        r.arg[x] = j;
      }
    }
    r.field.values[x] = best;
    for (std::size_t j = 0; j < phi1.size(); ++j)
      if (phi1[j] - cost(x, j) >= best - kTie * (1.0 + std::abs(best))) r.arg_set[x].push_back(j);
  }
  fill_branches(r, grid, [&](std::size_t b, std::size_t x) { return phi1[b] - cost(x, b); });
  return r;
}

std::size_t TransportSetMask::count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

TransportSetMask transport_set(const GridField& u, const GridField& u_hat, double tol) {
  if (u.values.size() != u_hat.values.size() || u.grid.size() != u.values.size())
    throw InvalidInput("u and u_hat live on different grids");
  if (std::abs(u.time - u_hat.time) > 1e-12)
    throw InvalidInput("u and u_hat are at different times");
  TransportSetMask m{u.grid, u.time, tol, std::vector<bool>(u.values.size())};
  for (std::size_t k = 0; k < u.values.size(); ++k)
    m.mask[k] = u.values[k] - u_hat.values[k] <= tol;
  return m;
}

double mask_tolerance(const LagrangianSpec& spec, const GridSpec& grid, double t, double T,
                      double cost_accuracy) {
  if (!(t > 0.0 && t < T)) throw InvalidInput("mask tolerance needs an interior time");
  const double half = 0.5 * grid.spacing();
  const double gap = 0.5 * spec.kinetic_max_eigenvalue() * grid.dim() * half * half *
                     (1.0 / t + 1.0 / (T - t));
  return 10.0 * cost_accuracy + 2.0 * gap;
}

double ordering_violation(const GridField& u, const GridField& u_hat) {
  double worst = -INFINITY;
  for (std::size_t k = 0; k < u.values.size(); ++k)
    worst = std::max(worst, u_hat.values[k] - u.values[k]);
  return worst;
}

bool VectorFieldEstimate::empty() const {
  for (const auto& s : slices)
    if (s.mask.count() > 0) return false;
  return true;
}

FieldSlice velocity_field(const LagrangianSpec& spec, const TransportSetMask& mask,
                          const LaxOleinikResult& forward,
                          const std::vector<TorusPoint>& sources, const ActionOptions& opts) {
  const GridSpec& grid = mask.grid;
  const double t = mask.time;
  const int d = grid.dim();
  FieldSlice s{t, mask, std::vector<Vec>(grid.size(), Vec::zero(d)),
               std::vector<Vec>(grid.size(), Vec::zero(d)), 0.0};
  std::vector<std::size_t> masked;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (mask.mask[k]) masked.push_back(k);
  if (masked.empty()) return s;

  detail::parallel_for(masked.size(), [&](std::size_t m) {
    const std::size_t k = masked[m];
    const CostResult r =
        minimize_bvp(spec, sources[forward.arg[k]], grid.node(k), 0.0, t, opts);
    s.from_extremal[k] = final_velocity(spec, r.curve);
  });

  const double h = grid.spacing();
  for (std::size_t k : masked) {
    Vec du = Vec::zero(d);
    const auto& nb = forward.branch_neighbors[k];
    for (int ax = 0; ax < d; ++ax) du[ax] = (nb[2 * ax] - nb[2 * ax + 1]) / (2.0 * h);
    s.from_gradient[k] = spec.kinetic_inverse().apply(du);
    s.deviation = std::max(s.deviation, (s.from_gradient[k] - s.from_extremal[k]).norm());
  }
  return s;
}

std::vector<LipschitzEstimate> lipschitz_estimate(const VectorFieldEstimate& field, double T,
                                                  const std::vector<double>& epsilons,
                                                  double radius) {
  // Per-slice maxima first; K(eps) is then a max over the admitted slices, so
  // it is non-increasing in eps by construction.
  struct SliceMax {
    double K = 0.0;
    std::size_t pairs = 0, masked = 0;
  };
  std::vector<SliceMax> per(field.slices.size());
  for (std::size_t si = 0; si < field.slices.size(); ++si) {
    const FieldSlice& s = field.slices[si];
    const GridSpec& grid = s.mask.grid;
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < grid.size(); ++k)
      if (s.mask.mask[k]) idx.push_back(k);
    per[si].masked = idx.size();
    for (std::size_t a = 0; a < idx.size(); ++a) {
      const TorusPoint xa = grid.node(idx[a]);
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        const double dist = distance(xa, grid.node(idx[b]));
        if (dist > radius || dist <= 0.0) continue;
        ++per[si].pairs;
        per[si].K = std::max(
            per[si].K, (s.from_extremal[idx[a]] - s.from_extremal[idx[b]]).norm() / dist);
      }
    }
  }
  std::vector<LipschitzEstimate> out;
  for (double eps : epsilons) {
    LipschitzEstimate e;
    e.epsilon = eps;
    std::size_t masked = 0;
    for (std::size_t si = 0; si < field.slices.size(); ++si) {
      const double t = field.slices[si].time;
      if (t < eps - 1e-12 || t > T - eps + 1e-12) continue;
      e.K = std::max(e.K, per[si].K);
      e.pairs += per[si].pairs;
      masked += per[si].masked;
    }
    e.defined = masked >= 2;
    out.push_back(e);
  }
  return out;
}

SubsolutionReport subsolution_residual(const LagrangianSpec& spec, const GridField& before,
                                       const GridField& at, const GridField& after,
                                       const TransportSetMask* mask, double curvature_bound) {
  const GridSpec& grid = at.grid;
  const double dt = 0.5 * (after.time - before.time);
  if (!(dt > 0.0)) throw InvalidInput("subsolution residual needs increasing slice times");
  const double h = grid.spacing();
  const int d = grid.dim();
  SubsolutionReport rep;
  rep.max_residual = -INFINITY;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    bool smooth = true;
    Vec du = Vec::zero(d);
    for (const GridField* f : {&before, &at, &after})
      for (int ax = 0; ax < d; ++ax) {
        const double up = f->values[grid.neighbor(k, ax, 1)];
        const double down = f->values[grid.neighbor(k, ax, -1)];
        if (std::abs(up - 2.0 * f->values[k] + down) / (h * h) > curvature_bound) smooth = false;
        if (f == &at) du[ax] = (up - down) / (2.0 * h);
      }
    if (!smooth) continue;
    ++rep.smooth_nodes;
    const double ut = (after.values[k] - before.values[k]) / (2.0 * dt);
    const double res = ut + eval_H(spec, grid.node(k).coords(), du, at.time);
    rep.max_residual = std::max(rep.max_residual, res);
    if (mask && mask->mask[k]) rep.max_abs_on_mask = std::max(rep.max_abs_on_mask, std::abs(res));
  }
  return rep;
}

TransportSetAnalysis analyze_transport_set(const LagrangianSpec& spec, const DiscreteMeasure& mu0,
                                           const DiscreteMeasure& mu1, const PotentialPair& pair,
                                           double T, const GridSpec& grid,
                                           const std::vector<double>& times,
                                           const ActionOptions& opts,
                                           const std::optional<CostCache>& cache,
                                           double mask_slack) {
  if (pair.phi0.size() != mu0.size() || pair.phi1.size() != mu1.size())
    throw InvalidInput("potential pair does not match the measures");
  const auto nodes = grid.nodes();
  TransportSetAnalysis a;
  a.times = times;
  for (double t : times) {
    const CostMatrix cf = cost_matrix(spec, mu0.atoms(), nodes, 0.0, t, opts, cache);
    const CostMatrix cb = cost_matrix(spec, nodes, mu1.atoms(), t, T, opts, cache);
    a.forward.push_back(lax_oleinik_forward(pair.phi0, cf, grid));
    a.backward.push_back(lax_oleinik_backward(pair.phi1, cb, grid));
    const GridField& u = a.forward.back().field;
    const GridField& uh = a.backward.back().field;
    a.ordering_violation = std::max(a.ordering_violation, ordering_violation(u, uh));
    const double tol = mask_slack * mask_tolerance(spec, grid, t, T, opts.tolerance);
    const TransportSetMask mask = transport_set(u, uh, tol);
    a.field.slices.push_back(velocity_field(spec, mask, a.forward.back(), mu0.atoms(), opts));
  }
  return a;
}

void write_field_csv(const GridField& f, const std::filesystem::path& path) {
  const int d = f.grid.dim();
  std::string out = d == 1 ? "x1,value\n" : "x1,x2,value\n";
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    const TorusPoint x = f.grid.node(k);
    for (int ax = 0; ax < d; ++ax) out += detail::fmt(x[ax]) + ",";
    out += detail::fmt(f.values[k]) + "\n";
  }
  detail::write_file_atomic(path, out);
}

void write_field_matrix(const std::vector<GridField>& fields, const std::filesystem::path& path) {
  std::string out;
  if (fields.empty()) throw InvalidInput("no fields to write");
  if (fields.front().grid.dim() == 1) {
    for (const GridField& f : fields) {
      for (std::size_t k = 0; k < f.values.size(); ++k)
        out += (k ? " " : "") + detail::fmt(f.values[k]);
      out += "\n";
    }
  } else {
    if (fields.size() != 1) throw InvalidInput("2-D matrices are written one field at a time");
    const GridField& f = fields.front();
    const auto n = static_cast<std::size_t>(f.grid.n_per_axis());
    // Row index = second axis so that gnuplot's x runs along the first axis.
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) out += (c ? " " : "") + detail::fmt(f.values[c * n + r]);
      out += "\n";
    }
  }
  detail::write_file_atomic(path, out);
}

}  // namespace lagot
