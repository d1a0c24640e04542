#include "lagot/mather.hpp"

#include <algorithm>
#include <cmath>

#include "lp.hpp"
#include "util.hpp"

namespace lagot {

bool is_one_periodic(const LagrangianSpec& spec) {
  for (const CosineMode& m : spec.potential().modes())
    if (m.amplitude != 0.0 && std::abs(m.speed - std::round(m.speed)) > 1e-12) return false;
  return true;
}

MatherSolution alpha_lp(const CostMatrix& cost, const std::vector<TorusPoint>& nodes) {
  const std::size_t n = cost.rows;
  if (n == 0 || cost.cols != n || nodes.size() != n)
    throw InvalidInput("alpha_lp needs a square cost matrix on the given nodes");
  const double T = cost.t - cost.s;
  if (!(T > 0.0)) throw InvalidInput("alpha_lp needs a positive time span");
  for (double v : cost.values)
    if (!std::isfinite(v)) throw InvalidInput("cost matrix has non-finite entries");

  // Rows 0..n-2: balance (out - in) at node i; row n-1: total mass. The
  // balance row of the last node is implied by the others.
  const int rows = static_cast<int>(n);
  const int norm_row = rows - 1;
  std::vector<detail::LpColumn> cols(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      auto& c = cols[i * n + j];
      c.cost = cost(i, j);
      if (i != j) {
        if (static_cast<int>(i) < norm_row) c.entries.emplace_back(static_cast<int>(i), 1.0);
        if (static_cast<int>(j) < norm_row) c.entries.emplace_back(static_cast<int>(j), -1.0);
      }
      c.entries.emplace_back(norm_row, 1.0);
    }
  std::vector<double> rhs(n, 0.0);
  rhs[n - 1] = 1.0;
  const detail::LpResult lp = detail::solve_lp(rows, cols, rhs);
  if (lp.status != detail::LpStatus::kOptimal)
    throw SolverError("equal-marginals LP did not reach optimality");

  MatherSolution sol;
  sol.T = T;
  sol.alpha = lp.objective / T;
  sol.nodes = nodes;
  sol.lp_iterations = lp.iterations;
  sol.plan = TransportPlan{n, n, lp.x};
  const auto rs = sol.plan.row_sums();
  const auto cs = sol.plan.col_sums();
  std::vector<TorusPoint> atoms;
  std::vector<double> weights;
  for (std::size_t i = 0; i < n; ++i) {
    sol.marginal_gap = std::max(sol.marginal_gap, std::abs(rs[i] - cs[i]));
    if (rs[i] > 1e-12) {
      sol.support.push_back(i);
      atoms.push_back(nodes[i]);
      weights.push_back(rs[i]);
    }
  }
  sol.mu = DiscreteMeasure::normalized(std::move(atoms), std::move(weights));
  return sol;
}

MatherSolution alpha_lp(const LagrangianSpec& spec, const GridSpec& grid, int T,
                        const MatherOptions& opts, const std::optional<CostCache>& cache) {
  if (T < 1) throw InvalidInput("alpha_lp needs an integer horizon T >= 1");
  if (!is_one_periodic(spec))
    throw InvalidInput("alpha_lp needs a Lagrangian that is 1-periodic in time");
  if (grid.dim() != spec.dim()) throw InvalidInput("grid dimension does not match the Lagrangian");
  const auto nodes = grid.nodes();
  const CostMatrix c = cost_matrix(spec, nodes, nodes, 0.0, static_cast<double>(T),
                                   opts.action, cache);
  return alpha_lp(c, nodes);
}

const std::vector<PhaseAtom>& mather_measure(MatherSolution& solution,
                                             const LagrangianSpec& spec,
                                             const MatherOptions& opts) {
  struct Cell {
    std::size_t i, j;
    double mass;
  };
  std::vector<Cell> cells;
  const TransportPlan& plan = solution.plan;
  for (std::size_t i = 0; i < plan.rows; ++i)
    for (std::size_t j = 0; j < plan.cols; ++j)
      if (plan(i, j) > opts.mass_threshold) cells.push_back({i, j, plan(i, j)});
  std::vector<PhaseAtom> atoms(cells.size(), PhaseAtom{solution.nodes.front(), Vec(), 0.0});
  detail::parallel_for(cells.size(), [&](std::size_t k) {
    const Cell& c = cells[k];
    const CostResult r = minimize_bvp(spec, solution.nodes[c.i], solution.nodes[c.j], 0.0,
                                      solution.T, opts.action);
    atoms[k] = PhaseAtom{solution.nodes[c.i], initial_velocity(spec, r.curve), c.mass};
  });
  solution.m0 = std::move(atoms);
  return solution.m0;
}

double invariance_defect(const std::vector<PhaseAtom>& m0, const LagrangianSpec& spec,
                         double T, int steps_per_unit_time) {
  if (m0.empty()) throw InvalidInput("invariance check needs a nonempty measure");
  const std::size_t k = m0.size();
  std::vector<std::optional<PhasePoint>> image(k);
  detail::parallel_for(k, [&](std::size_t a) {
    image[a] = flow(spec, PhasePoint{m0[a].x, TangentVec{m0[a].v}, 0.0}, 0.0, T,
                    steps_per_unit_time);
  });
  CostMatrix c{k, k, 0.0, T, std::vector<double>(k * k)};
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      c(a, b) = distance(m0[a].x, image[b]->x) + (m0[a].v - image[b]->v.v).norm();
  std::vector<double> w(k);
  double total = 0.0;
  for (std::size_t a = 0; a < k; ++a) total += m0[a].mass;
  for (std::size_t a = 0; a < k; ++a) w[a] = m0[a].mass / total;
  return solve_transport(c, w, w).primal.value;
}

AlphaTReport alpha_T_check(const LagrangianSpec& spec, const GridSpec& grid,
                           const std::vector<int>& T_values, const MatherOptions& opts,
                           const std::optional<CostCache>& cache) {
  AlphaTReport rep;
  rep.T_values = T_values;
  for (int T : T_values) rep.alphas.push_back(alpha_lp(spec, grid, T, opts, cache).alpha);
  for (double a : rep.alphas)
    rep.max_deviation = std::max(rep.max_deviation, std::abs(a - rep.alphas.front()));
  return rep;
}

GraphReport graph_check(const std::vector<PhaseAtom>& m0, double K, double merge_tolerance) {
  GraphReport rep;
  if (m0.size() < 2) {
    rep.vacuous = true;
    return rep;
  }
  for (std::size_t a = 0; a < m0.size(); ++a)
    for (std::size_t b = a + 1; b < m0.size(); ++b) {
      const double dx = distance(m0[a].x, m0[b].x);
      const double dv = (m0[a].v - m0[b].v).norm();
      if (dv > K * dx + merge_tolerance) rep.ok = false;
      const double ratio = dx > 1e-9 ? dv / dx : (dv > merge_tolerance ? INFINITY : 0.0);
      if (ratio > rep.max_ratio) {
        rep.max_ratio = ratio;
        rep.worst_a = a;
        rep.worst_b = b;
      }
    }
  return rep;
}

void write_phase_atoms_csv(const std::vector<PhaseAtom>& m0, const std::filesystem::path& path) {
  const int d = m0.empty() ? 1 : m0.front().x.dim();
  std::string out = d == 1 ? "x1,v1,mass\n" : "x1,x2,v1,v2,mass\n";
  for (const PhaseAtom& a : m0) {
    for (int k = 0; k < d; ++k) out += detail::fmt(a.x[k]) + ",";
    for (int k = 0; k < d; ++k) out += detail::fmt(a.v[k]) + ",";
    out += detail::fmt(a.mass) + "\n";
  }
  detail::write_file_atomic(path, out);
}

}  // namespace lagot
