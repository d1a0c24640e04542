#pragma once

// Discrete Monge-Kantorovich problem: exact primal plans by network simplex on
// the bipartite transportation polytope, dual potential pairs, optimality
// certificates and Monge-map extraction.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lagot/action.hpp"
#include "lagot/dynamics.hpp"
#include "lagot/manifold.hpp"

namespace lagot {

// Probability measure with finitely many atoms. Weights are non-negative and
// sum to 1 within 1e-12.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::vector<TorusPoint> atoms, std::vector<double> weights);
  // Rescales non-negative weights to unit mass before validating.
  static DiscreteMeasure normalized(std::vector<TorusPoint> atoms,
                                    std::vector<double> weights);
  static DiscreteMeasure dirac(const TorusPoint& x);
  static DiscreteMeasure uniform(std::vector<TorusPoint> atoms);

  std::size_t size() const { return atoms_.size(); }
  int dim() const { return atoms_.front().dim(); }
  const std::vector<TorusPoint>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  const TorusPoint& atom(std::size_t i) const { return atoms_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

 private:
  std::vector<TorusPoint> atoms_;
  std::vector<double> weights_;
};

struct TransportPlan {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> coupling;  // row-major, rows x cols

  double operator()(std::size_t i, std::size_t j) const { return coupling[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return coupling[i * cols + j]; }
  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
  // Largest deviation of the marginals from the given weights.
  double marginal_residual(const std::vector<double>& w0,
                           const std::vector<double>& w1) const;
};

// phi1(j) - phi0(i) <= c_ij for an admissible pair.
struct PotentialPair {
  std::vector<double> phi0;
  std::vector<double> phi1;
};

struct PrimalSolution {
  TransportPlan plan;
  double value = 0.0;
};

struct DualSolution {
  PotentialPair pair;
  double value = 0.0;
};

struct TransportSolution {
  PrimalSolution primal;
  DualSolution dual;
  std::size_t pivots = 0;
};

// Network simplex with Bland's rule: the lowest-index improving cell enters
// and the lowest-index blocking cell leaves. Throws ImbalanceError if total
// masses differ by more than 1e-12.
TransportSolution solve_transport(const CostMatrix& cost,
                                  const std::vector<double>& w0,
                                  const std::vector<double>& w1);
PrimalSolution solve_primal(const CostMatrix& cost, const DiscreteMeasure& mu0,
                            const DiscreteMeasure& mu1);
// Node potentials of the final basis, tightened by the two c-transforms so
// that the pair is admissible. value = sum phi1 mu1 - sum phi0 mu0.
DualSolution solve_dual(const CostMatrix& cost, const DiscreteMeasure& mu0,
                        const DiscreteMeasure& mu1);

// Replaces phi1 by min_i phi0(i) + c_ij, then phi0 by max_j phi1(j) - c_ij.
PotentialPair c_transform_tighten(const CostMatrix& cost, PotentialPair pair);
double dual_value(const PotentialPair& pair, const std::vector<double>& w0,
                  const std::vector<double>& w1);
// Largest violation of phi1(j) - phi0(i) <= c_ij (0 when admissible).
double admissibility_violation(const CostMatrix& cost, const PotentialPair& pair);

struct SlacknessReport {
  double worst = 0.0;
  std::size_t worst_i = 0;
  std::size_t worst_j = 0;
  std::size_t violations = 0;
  bool ok = true;
};

// |phi1(j) - phi0(i) - c_ij| on every cell carrying more than
// mass_threshold; `violations` counts cells above tol.
SlacknessReport check_slackness(const TransportPlan& plan, const PotentialPair& pair,
                                const CostMatrix& cost, double tol,
                                double mass_threshold = 1e-10);

// The admissible pair built from phi1 = c(x_i0, .) followed by a c-transform.
PotentialPair constructed_pair(const CostMatrix& cost, std::size_t i0);

// max over pairs of phi1(j) - phi0(i): a lower bound on c_ij for admissible
// pairs.
double cost_from_pairs(std::size_t i, std::size_t j,
                       const std::vector<PotentialPair>& pairs);

// Centered-difference gradient of a potential sampled on every node of a
// grid, with a second-difference bound marking nodes where it is trusted.
struct PotentialGradient {
  std::vector<Covec> gradient;
  std::vector<bool> differentiable;
  double lipschitz = 0.0;
};

PotentialGradient differentiate_on_grid(const GridSpec& grid,
                                        const std::vector<double>& values,
                                        double second_difference_factor = 10.0);

struct MapOptions {
  double mass_threshold = 1e-10;
  double degenerate_fraction = 0.1;
  int steps_per_unit_time = 1000;
};

struct MapExtraction {
  bool is_map = false;
  // Support column of each row when the row has exactly one; otherwise the
  // column of largest mass.
  std::vector<std::size_t> plan_image;
  // pi o psi_0^T(x, dH/dp(x, dphi0(x), 0)) per source atom.
  std::vector<TorusPoint> analytic_image;
  std::vector<bool> differentiable;
  double nondifferentiable_fraction = 0.0;
  bool degenerate_warning = false;
};

MapExtraction extract_map(const TransportPlan& plan, const DiscreteMeasure& mu0,
                          const PotentialGradient& dphi0, const LagrangianSpec& spec,
                          double T, const MapOptions& opts = {});

// Wasserstein-1 for the flat distance. Circles use the CDF formula; the 2-torus
// uses the exact LP, subsampling deterministically (by `seed`) beyond
// `max_atoms` atoms.
double wasserstein1(const DiscreteMeasure& a, const DiscreteMeasure& b,
                    std::uint64_t seed = 0, std::size_t max_atoms = 256);
double wasserstein1_circle(const DiscreteMeasure& a, const DiscreteMeasure& b);

// CSV: one row per atom, columns x1[,x2],weight. A leading non-numeric line
// is taken as a header.
DiscreteMeasure load_measure_csv(const std::filesystem::path& path);
void write_measure_csv(const DiscreteMeasure& mu, const std::filesystem::path& path);
// CSV rows i,j,mass for every cell above mass_threshold.
void write_plan_csv(const TransportPlan& plan, const std::filesystem::path& path,
                    double mass_threshold = 0.0);
void write_potentials_csv(const PotentialPair& pair, const std::filesystem::path& path);
// {"primal_value", "dual_value", "rows", "cols", "support": [[i, j, mass]...],
//  "phi0": [...], "phi1": [...]}
void write_transport_json(const TransportSolution& sol, const std::filesystem::path& path,
                          double mass_threshold = 0.0);

}  // namespace lagot
