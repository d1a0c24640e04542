#pragma once

// Time-periodic mode: Mather's alpha as the minimum of C_0^T(mu, mu) / T over
// probability measures on a grid, the phase-space measure carried by the
// optimal closed plan, and certificates for invariance and the Lipschitz
// graph property.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "lagot/action.hpp"
#include "lagot/dynamics.hpp"
#include "lagot/kantorovich.hpp"
#include "lagot/manifold.hpp"

namespace lagot {

struct PhaseAtom {
  TorusPoint x;
  Vec v;
  double mass = 0.0;
};

struct MatherSolution {
  double alpha = 0.0;
  double T = 1.0;
  std::vector<TorusPoint> nodes;  // grid nodes the LP ran on
  // Common marginal of the plan, restricted to nodes of positive mass.
  std::optional<DiscreteMeasure> mu;
  std::vector<std::size_t> support;  // node index of each atom of mu
  TransportPlan plan;                // nodes x nodes, equal marginals
  std::vector<PhaseAtom> m0;
  std::size_t lp_iterations = 0;
  double marginal_gap = 0.0;  // |row sums - column sums|_inf
};

struct MatherOptions {
  ActionOptions action;
  double mass_threshold = 1e-12;
  int steps_per_unit_time = 1000;
};

// True when V(x, t + 1) = V(x, t) for every mode.
bool is_one_periodic(const LagrangianSpec& spec);

// Solves min sum c_ij eta_ij over eta >= 0 with equal row and column sums and
// total mass 1; alpha = optimum / T with T = cost.t - cost.s. Throws
// SolverError if the LP does not reach optimality.
MatherSolution alpha_lp(const CostMatrix& cost, const std::vector<TorusPoint>& nodes);
// Builds c_0^T on the grid first. Throws InvalidInput unless the spec is
// 1-periodic in time and T is a positive integer.
MatherSolution alpha_lp(const LagrangianSpec& spec, const GridSpec& grid, int T = 1,
                        const MatherOptions& opts = {},
                        const std::optional<CostCache>& cache = std::nullopt);

// Initial velocities of the minimizing extremals x_i -> x_j over [0, T] for
// each plan cell of positive mass. Fills solution.m0 and returns it.
const std::vector<PhaseAtom>& mather_measure(MatherSolution& solution,
                                             const LagrangianSpec& spec,
                                             const MatherOptions& opts = {});

// Wasserstein-1 distance, for the metric dist(x, x') + |v - v'|, between m0
// and its image under the time-T flow.
double invariance_defect(const std::vector<PhaseAtom>& m0, const LagrangianSpec& spec,
                         double T = 1.0, int steps_per_unit_time = 1000);

struct AlphaTReport {
  std::vector<int> T_values;
  std::vector<double> alphas;
  double max_deviation = 0.0;  // max |alpha_T - alpha_1| (first entry as reference)
};

AlphaTReport alpha_T_check(const LagrangianSpec& spec, const GridSpec& grid,
                           const std::vector<int>& T_values, const MatherOptions& opts = {},
                           const std::optional<CostCache>& cache = std::nullopt);

struct GraphReport {
  double max_ratio = 0.0;  // max |v - v'| / dist(x, x') over distinct positions
  std::size_t worst_a = 0;
  std::size_t worst_b = 0;
  bool ok = true;
  bool vacuous = false;  // fewer than two atoms
};

// Checks |v - v'| <= K dist(x, x') + merge_tolerance for all atom pairs.
GraphReport graph_check(const std::vector<PhaseAtom>& m0, double K,
                        double merge_tolerance = 1e-6);

// Columns x1[,x2],v1[,v2],mass.
void write_phase_atoms_csv(const std::vector<PhaseAtom>& m0, const std::filesystem::path& path);

}  // namespace lagot
