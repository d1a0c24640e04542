#include "lagot/kantorovich.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "lagot/error.hpp"
#include "util.hpp"

namespace lagot {

// ---------------------------------------------------------------------------
// Measures and plans

DiscreteMeasure::DiscreteMeasure(std::vector<TorusPoint> atoms,
                                 std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.empty()) throw InvalidInput("a measure needs at least one atom");
  if (atoms_.size() != weights_.size())
    throw InvalidInput("atom and weight counts differ");
  const int d = atoms_.front().dim();
  double total = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i].dim() != d) throw InvalidInput("atoms have mixed dimensions");
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i]))
      throw InvalidInput("weights must be finite and non-negative");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidInput("weights sum to " + detail::fmt(total) + ", not 1");
}

DiscreteMeasure DiscreteMeasure::normalized(std::vector<TorusPoint> atoms,
                                            std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw InvalidInput("weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidInput("total mass must be positive");
  for (double& w : weights) w /= total;
  return DiscreteMeasure(std::move(atoms), std::move(weights));
}

DiscreteMeasure DiscreteMeasure::dirac(const TorusPoint& x) {
  return DiscreteMeasure({x}, {1.0});
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<TorusPoint> atoms) {
  std::vector<double> w(atoms.size(), 1.0);
  return normalized(std::move(atoms), std::move(w));
}

std::vector<double> TransportPlan::row_sums() const {
  std::vector<double> r(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) r[i] += (*this)(i, j);
  return r;
}

std::vector<double> TransportPlan::col_sums() const {
  std::vector<double> c(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) c[j] += (*this)(i, j);
  return c;
}

double TransportPlan::marginal_residual(const std::vector<double>& w0,
                                        const std::vector<double>& w1) const {
  double worst = 0.0;
  const auto r = row_sums();
  const auto c = col_sums();
  for (std::size_t i = 0; i < rows; ++i) worst = std::max(worst, std::abs(r[i] - w0[i]));
  for (std::size_t j = 0; j < cols; ++j) worst = std::max(worst, std::abs(c[j] - w1[j]));
  return worst;
}

// ---------------------------------------------------------------------------
// Network simplex on the transportation polytope.
//
// Nodes 0..m-1 are sources, m..m+n-1 sinks. The basis is a spanning tree of
// m+n-1 cells; cell (i, j) has index i*n + j, which is the order used by both
// pivot rules.

namespace {

class TransportationSimplex {
 public:
  TransportationSimplex(const CostMatrix& cost, const std::vector<double>& w0,
                        const std::vector<double>& w1)
      : c_(cost), m_(cost.rows), n_(cost.cols), w0_(w0), w1_(w1) {}

  TransportSolution run() {
    northwest_corner();
    double cmax = 0.0;
    for (double v : c_.values) cmax = std::max(cmax, std::abs(v));
    const double price_tol = 1e-13 * (1.0 + cmax);
    std::size_t pivots = 0;
    // Bland's rule terminates; the cap only guards against numerical trouble.
    const std::size_t max_pivots = 50 * (m_ + n_) * (m_ + n_) + 10000;
    for (;;) {
      compute_potentials();
      std::size_t enter = kNone;
      for (std::size_t i = 0; i < m_ && enter == kNone; ++i)
        for (std::size_t j = 0; j < n_; ++j) {
          if (in_basis_[i * n_ + j]) continue;
          if (c_(i, j) - phi1_[j] + phi0_[i] < -price_tol) {
            enter = i * n_ + j;
            break;
          }
        }
      if (enter == kNone) break;
      if (++pivots > max_pivots)
        throw SolverError("network simplex exceeded its pivot limit");
      pivot(enter);
    }
    TransportSolution sol;
    sol.pivots = pivots;
    TransportPlan plan{m_, n_, std::vector<double>(m_ * n_, 0.0)};
    for (const Cell& cell : cells_) plan(cell.i, cell.j) = std::max(0.0, cell.flow);
    double value = 0.0;
    for (std::size_t k = 0; k < plan.coupling.size(); ++k)
      value += plan.coupling[k] * c_.values[k];
    sol.primal = {std::move(plan), value};
    PotentialPair pair{phi0_, phi1_};
    pair = c_transform_tighten(c_, std::move(pair));
    sol.dual.value = dual_value(pair, w0_, w1_);
    sol.dual.pair = std::move(pair);
    return sol;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  struct Cell {
    std::size_t i, j;
    double flow;
  };

  void northwest_corner() {
    in_basis_.assign(m_ * n_, false);
    std::size_t i = 0, j = 0;
    double a = w0_[0], b = w1_[0];
    for (;;) {
      const double f = std::min(a, b);
      add_cell(i, j, f);
      a -= f;
      b -= f;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i < m_ - 1 && (a <= b || j == n_ - 1)) {
        a = w0_[++i];
      } else {
        b = w1_[++j];
      }
    }
  }

  void add_cell(std::size_t i, std::size_t j, double flow) {
    cells_.push_back({i, j, flow});
    in_basis_[i * n_ + j] = true;
  }

  // Builds the tree adjacency, parent links and depths from node 0, and the
  // potentials with phi0(0) = 0 and phi1(j) - phi0(i) = c_ij on the tree.
  void compute_potentials() {
    const std::size_t nodes = m_ + n_;
    adj_.assign(nodes, {});
    for (std::size_t k = 0; k < cells_.size(); ++k) {
      adj_[cells_[k].i].push_back(k);
      adj_[m_ + cells_[k].j].push_back(k);
    }
    parent_cell_.assign(nodes, kNone);
    depth_.assign(nodes, 0);
    phi0_.assign(m_, 0.0);
    phi1_.assign(n_, 0.0);
    std::vector<bool> seen(nodes, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t k : adj_[u]) {
        const Cell& cell = cells_[k];
        const std::size_t v = (u < m_) ? m_ + cell.j : cell.i;
        if (seen[v]) continue;
        seen[v] = true;
        parent_cell_[v] = k;
        depth_[v] = depth_[u] + 1;
        if (v >= m_)
          phi1_[cell.j] = phi0_[cell.i] + c_(cell.i, cell.j);
        else
          phi0_[cell.i] = phi1_[cell.j] - c_(cell.i, cell.j);
        stack.push_back(v);
      }
    }
  }

  std::size_t other_end(std::size_t node, std::size_t k) const {
    return node < m_ ? m_ + cells_[k].j : cells_[k].i;
  }

  void pivot(std::size_t enter) {
    const std::size_t ei = enter / n_, ej = enter % n_;
    // Tree path from sink node (m + ej) to source node ei through their
    // common ancestor; cells alternate -, +, -, ... starting at the sink.
    std::vector<std::size_t> from_sink, from_source;
    std::size_t a = m_ + ej, b = ei;
    while (depth_[a] > depth_[b]) {
      from_sink.push_back(parent_cell_[a]);
      a = other_end(a, parent_cell_[a]);
    }
    while (depth_[b] > depth_[a]) {
      from_source.push_back(parent_cell_[b]);
      b = other_end(b, parent_cell_[b]);
    }
    while (a != b) {
      from_sink.push_back(parent_cell_[a]);
      a = other_end(a, parent_cell_[a]);
      from_source.push_back(parent_cell_[b]);
      b = other_end(b, parent_cell_[b]);
    }
    std::vector<std::size_t> path = from_sink;
    path.insert(path.end(), from_source.rbegin(), from_source.rend());

    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < path.size(); p += 2)
      theta = std::min(theta, cells_[path[p]].flow);
    theta = std::max(theta, 0.0);
    const double tie = 1e-15 + 1e-13 * theta;
    std::size_t leave = kNone, leave_index = kNone;
    for (std::size_t p = 0; p < path.size(); p += 2) {
      const Cell& cell = cells_[path[p]];
      if (cell.flow <= theta + tie) {
        const std::size_t idx = cell.i * n_ + cell.j;
        if (idx < leave_index) {
          leave_index = idx;
          leave = path[p];
        }
      }
    }
    for (std::size_t p = 0; p < path.size(); ++p) {
      Cell& cell = cells_[path[p]];
      cell.flow += (p % 2 == 0) ? -theta : theta;
      if (cell.flow < 0.0) cell.flow = 0.0;
    }
    in_basis_[leave_index] = false;
    cells_[leave] = {ei, ej, theta};
    in_basis_[enter] = true;
  }

  const CostMatrix& c_;
  std::size_t m_, n_;
  const std::vector<double>& w0_;
  const std::vector<double>& w1_;
  std::vector<Cell> cells_;
  std::vector<bool> in_basis_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> parent_cell_;
  std::vector<std::size_t> depth_;
  std::vector<double> phi0_, phi1_;
};

void check_problem(const CostMatrix& cost, const std::vector<double>& w0,
                   const std::vector<double>& w1) {
  if (cost.rows != w0.size() || cost.cols != w1.size())
    throw InvalidInput("cost matrix dimensions do not match the measures");
  if (w0.empty() || w1.empty()) throw InvalidInput("empty measure");
  for (double v : cost.values)
    if (!std::isfinite(v)) throw InvalidInput("cost matrix has non-finite entries");
  const double s0 = std::accumulate(w0.begin(), w0.end(), 0.0);
  const double s1 = std::accumulate(w1.begin(), w1.end(), 0.0);
  if (std::abs(s0 - s1) > 1e-12)
    throw ImbalanceError("marginal masses differ: " + detail::fmt(s0) + " vs " +
                         detail::fmt(s1));
}

}  // namespace

TransportSolution solve_transport(const CostMatrix& cost, const std::vector<double>& w0,
                                  const std::vector<double>& w1) {
  check_problem(cost, w0, w1);
  return TransportationSimplex(cost, w0, w1).run();
}

PrimalSolution solve_primal(const CostMatrix& cost, const DiscreteMeasure& mu0,
                            const DiscreteMeasure& mu1) {
  return solve_transport(cost, mu0.weights(), mu1.weights()).primal;
}

DualSolution solve_dual(const CostMatrix& cost, const DiscreteMeasure& mu0,
                        const DiscreteMeasure& mu1) {
  return solve_transport(cost, mu0.weights(), mu1.weights()).dual;
}

PotentialPair c_transform_tighten(const CostMatrix& cost, PotentialPair pair) {
  for (std::size_t j = 0; j < cost.cols; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cost.rows; ++i)
      best = std::min(best, pair.phi0[i] + cost(i, j));
    pair.phi1[j] = best;
  }
  for (std::size_t i = 0; i < cost.rows; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cost.cols; ++j)
      best = std::max(best, pair.phi1[j] - cost(i, j));
    pair.phi0[i] = best;
  }
  return pair;
}

double dual_value(const PotentialPair& pair, const std::vector<double>& w0,
                  const std::vector<double>& w1) {
  double v = 0.0;
  for (std::size_t j = 0; j < w1.size(); ++j) v += pair.phi1[j] * w1[j];
  for (std::size_t i = 0; i < w0.size(); ++i) v -= pair.phi0[i] * w0[i];
  return v;
}

double admissibility_violation(const CostMatrix& cost, const PotentialPair& pair) {
  double worst = 0.0;
  for (std::size_t i = 0; i < cost.rows; ++i)
    for (std::size_t j = 0; j < cost.cols; ++j)
      worst = std::max(worst, pair.phi1[j] - pair.phi0[i] - cost(i, j));
  return worst;
}

SlacknessReport check_slackness(const TransportPlan& plan, const PotentialPair& pair,
                                const CostMatrix& cost, double tol,
                                double mass_threshold) {
  SlacknessReport rep;
  for (std::size_t i = 0; i < plan.rows; ++i)
    for (std::size_t j = 0; j < plan.cols; ++j) {
      if (!(plan(i, j) > mass_threshold)) continue;
      const double gap = std::abs(pair.phi1[j] - pair.phi0[i] - cost(i, j));
      if (gap > tol) ++rep.violations;
      if (gap > rep.worst) {
        rep.worst = gap;
        rep.worst_i = i;
        rep.worst_j = j;
      }
    }
  rep.ok = rep.violations == 0;
  return rep;
}

PotentialPair constructed_pair(const CostMatrix& cost, std::size_t i0) {
  PotentialPair pair;
  pair.phi1.resize(cost.cols);
  for (std::size_t j = 0; j < cost.cols; ++j) pair.phi1[j] = cost(i0, j);
  pair.phi0.assign(cost.rows, 0.0);
  for (std::size_t i = 0; i < cost.rows; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cost.cols; ++j)
      best = std::max(best, pair.phi1[j] - cost(i, j));
    pair.phi0[i] = best;
  }
  return pair;
}

double cost_from_pairs(std::size_t i, std::size_t j,
                       const std::vector<PotentialPair>& pairs) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : pairs) best = std::max(best, p.phi1[j] - p.phi0[i]);
  return best;
}

// ---------------------------------------------------------------------------
// Map extraction

PotentialGradient differentiate_on_grid(const GridSpec& grid,
                                        const std::vector<double>& values,
                                        double second_difference_factor) {
  if (values.size() != grid.size())
    throw InvalidInput("potential does not cover the grid");
  const double h = grid.spacing();
  PotentialGradient out;
  out.gradient.resize(values.size());
  out.differentiable.assign(values.size(), true);
  for (std::size_t k = 0; k < values.size(); ++k)
    for (int ax = 0; ax < grid.dim(); ++ax)
      out.lipschitz = std::max(
          out.lipschitz, std::abs(values[grid.neighbor(k, ax, 1)] - values[k]) / h);
  const double bound = second_difference_factor * out.lipschitz;
  for (std::size_t k = 0; k < values.size(); ++k) {
    Vec g = Vec::zero(grid.dim());
    for (int ax = 0; ax < grid.dim(); ++ax) {
      const double up = values[grid.neighbor(k, ax, 1)];
      const double down = values[grid.neighbor(k, ax, -1)];
      g[ax] = (up - down) / (2.0 * h);
      const double second = (up - 2.0 * values[k] + down) / (h * h);
      if (std::abs(second) > bound) out.differentiable[k] = false;
    }
    out.gradient[k] = Covec{g};
  }
  return out;
}

MapExtraction extract_map(const TransportPlan& plan, const DiscreteMeasure& mu0,
                          const PotentialGradient& dphi0, const LagrangianSpec& spec,
                          double T, const MapOptions& opts) {
  if (plan.rows != mu0.size() || dphi0.gradient.size() != mu0.size())
    throw InvalidInput("plan, measure and potential gradient sizes differ");
  MapExtraction out;
  out.is_map = true;
  out.plan_image.resize(plan.rows);
  out.analytic_image.resize(plan.rows);
  out.differentiable = dphi0.differentiable;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < plan.rows; ++i) {
    std::size_t support = 0, arg = 0;
    double heaviest = -1.0;
    for (std::size_t j = 0; j < plan.cols; ++j) {
      const double m = plan(i, j);
      if (m > opts.mass_threshold) ++support;
      if (m > heaviest) {
        heaviest = m;
        arg = j;
      }
    }
    // Rows without mass impose nothing.
    if (support > 1) out.is_map = false;
    out.plan_image[i] = arg;
    const TorusPoint& x = mu0.atom(i);
    const TangentVec v = legendre_p_to_v(spec, x, dphi0.gradient[i], 0.0);
    out.analytic_image[i] =
        flow(spec, PhasePoint{x, v, 0.0}, 0.0, T, opts.steps_per_unit_time).x;
    if (!dphi0.differentiable[i]) ++bad;
  }
  out.nondifferentiable_fraction = static_cast<double>(bad) / plan.rows;
  out.degenerate_warning = out.nondifferentiable_fraction > opts.degenerate_fraction;
  return out;
}

// ---------------------------------------------------------------------------
// Wasserstein-1

double wasserstein1_circle(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.dim() != 1 || b.dim() != 1) throw InvalidInput("circle W1 needs 1-D measures");
  // F(x) = a[0, x] - b[0, x] is piecewise constant; W1 = min_c int |F - c|,
  // attained at a weighted median of F.
  std::vector<std::pair<double, double>> events;
  for (std::size_t i = 0; i < a.size(); ++i) events.emplace_back(a.atom(i)[0], a.weight(i));
  for (std::size_t j = 0; j < b.size(); ++j) events.emplace_back(b.atom(j)[0], -b.weight(j));
  std::sort(events.begin(), events.end());
  std::vector<std::pair<double, double>> pieces;  // (F value, length)
  double f = 0.0;
  for (std::size_t k = 0; k < events.size(); ++k) {
    f += events[k].second;
    const double next = (k + 1 < events.size()) ? events[k + 1].first : 1.0 + events[0].first;
    const double len = next - events[k].first;
    if (len > 0.0) pieces.emplace_back(f, len);
  }
  if (pieces.empty()) return 0.0;
  auto sorted = pieces;
  std::sort(sorted.begin(), sorted.end());
  double half = 0.0;
  for (const auto& p : sorted) half += p.second;
  half *= 0.5;
  double acc = 0.0, median = sorted.back().first;
  for (const auto& p : sorted) {
    acc += p.second;
    if (acc >= half) {
      median = p.first;
      break;
    }
  }
  double w = 0.0;
  for (const auto& p : pieces) w += p.second * std::abs(p.first - median);
  return w;
}

namespace {

DiscreteMeasure subsample(const DiscreteMeasure& mu, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(mu.weights().begin(), mu.weights().end());
  std::vector<TorusPoint> atoms;
  atoms.reserve(count);
  for (std::size_t k = 0; k < count; ++k) atoms.push_back(mu.atom(pick(rng)));
  return DiscreteMeasure::uniform(std::move(atoms));
}

}  // namespace

double wasserstein1(const DiscreteMeasure& a, const DiscreteMeasure& b,
                    std::uint64_t seed, std::size_t max_atoms) {
  if (a.dim() != b.dim()) throw InvalidInput("measures live on different tori");
  if (a.dim() == 1) return wasserstein1_circle(a, b);
  const DiscreteMeasure sa = a.size() > max_atoms ? subsample(a, max_atoms, seed) : a;
  const DiscreteMeasure sb = b.size() > max_atoms ? subsample(b, max_atoms, seed + 1) : b;
  CostMatrix c{sa.size(), sb.size(), 0.0, 0.0, std::vector<double>(sa.size() * sb.size())};
  for (std::size_t i = 0; i < sa.size(); ++i)
    for (std::size_t j = 0; j < sb.size(); ++j) c(i, j) = distance(sa.atom(i), sb.atom(j));
  return solve_primal(c, sa, sb).value;
}

// ---------------------------------------------------------------------------
// Files

DiscreteMeasure load_measure_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open measure file " + path.string());
  std::vector<TorusPoint> atoms;
  std::vector<double> weights;
  std::string line;
  std::size_t lineno = 0;
  int dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(cell, &used));
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (atoms.empty() && dim == 0) continue;  // header
      throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": non-numeric row");
    }
    if (fields.size() < 2 || fields.size() > 3)
      throw InvalidInput(path.string() + ":" + std::to_string(lineno) +
                         ": expected x1[,x2],weight");
    const int d = static_cast<int>(fields.size()) - 1;
    if (dim == 0) dim = d;
    if (d != dim) throw InvalidInput(path.string() + ": inconsistent column count");
    atoms.push_back(wrap(std::span<const double>(fields.data(), static_cast<std::size_t>(d))));
    weights.push_back(fields.back());
  }
  if (atoms.empty()) throw InvalidInput(path.string() + ": no atoms");
  return DiscreteMeasure::normalized(std::move(atoms), std::move(weights));
}

void write_measure_csv(const DiscreteMeasure& mu, const std::filesystem::path& path) {
  std::string out = mu.dim() == 1 ? "x1,weight\n" : "x1,x2,weight\n";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (int d = 0; d < mu.dim(); ++d) out += detail::fmt(mu.atom(i)[d]) + ",";
    out += detail::fmt(mu.weight(i)) + "\n";
  }
  detail::write_file_atomic(path, out);
}

void write_plan_csv(const TransportPlan& plan, const std::filesystem::path& path,
                    double mass_threshold) {
  std::string out = "i,j,mass\n";
  for (std::size_t i = 0; i < plan.rows; ++i)
    for (std::size_t j = 0; j < plan.cols; ++j)
      if (plan(i, j) > mass_threshold)
        out += std::to_string(i) + "," + std::to_string(j) + "," + detail::fmt(plan(i, j)) + "\n";
  detail::write_file_atomic(path, out);
}

void write_potentials_csv(const PotentialPair& pair, const std::filesystem::path& path) {
  std::string out = "side,index,value\n";
  for (std::size_t i = 0; i < pair.phi0.size(); ++i)
    out += "phi0," + std::to_string(i) + "," + detail::fmt(pair.phi0[i]) + "\n";
  for (std::size_t j = 0; j < pair.phi1.size(); ++j)
    out += "phi1," + std::to_string(j) + "," + detail::fmt(pair.phi1[j]) + "\n";
  detail::write_file_atomic(path, out);
}

void write_transport_json(const TransportSolution& sol, const std::filesystem::path& path,
                          double mass_threshold) {
  nlohmann::json j;
  j["primal_value"] = sol.primal.value;
  j["dual_value"] = sol.dual.value;
  j["rows"] = sol.primal.plan.rows;
  j["cols"] = sol.primal.plan.cols;
  nlohmann::json support = nlohmann::json::array();
  const auto& plan = sol.primal.plan;
  for (std::size_t r = 0; r < plan.rows; ++r)
    for (std::size_t c = 0; c < plan.cols; ++c)
      if (plan(r, c) > mass_threshold) support.push_back({r, c, plan(r, c)});
  j["support"] = std::move(support);
  j["phi0"] = sol.dual.pair.phi0;
  j["phi1"] = sol.dual.pair.phi1;
  detail::write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace lagot
