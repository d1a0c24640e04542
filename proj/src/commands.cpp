#include "lagot/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"
#include "lagot/hamilton_jacobi.hpp"
#include "lagot/instances.hpp"
#include "lagot/interpolation.hpp"
#include "lagot/kantorovich.hpp"
#include "lagot/mather.hpp"
#include "util.hpp"

namespace lagot {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Appends timestamped lines to <out>/run.log and echoes them to stderr.
class RunLog {
 public:
  RunLog(const fs::path& dir, std::string_view command, CommandOutput& out) : out_(out) {
    fs::create_directories(dir);
    file_.open(dir / "run.log", std::ios::app);
    info(std::string(command) + " started");
  }

  void info(const std::string& msg) {
    out_.messages.push_back(msg);
    std::cerr << "[lagot] " << msg << "\n";
    if (file_) {
      const auto now = std::chrono::system_clock::now();
      const std::time_t tt = std::chrono::system_clock::to_time_t(now);
      std::tm tm{};
      gmtime_r(&tt, &tm);
      file_ << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << " " << msg << "\n";
      file_.flush();
    }
  }

 private:
  CommandOutput& out_;
  std::ofstream file_;
};

void write_json(const fs::path& path, const json& j) { detail::write_file_atomic(path, j.dump(2) + "\n"); }

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string fmt_short(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

json point_json(const TorusPoint& x) {
  json a = json::array();
  for (int i = 0; i < x.dim(); ++i) a.push_back(x[i]);
  return a;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.dim; ++i) a.push_back(v[i]);
  return a;
}

const DiscreteMeasure& need(const std::optional<DiscreteMeasure>& mu, const char* name) {
  if (!mu) throw ConfigError(std::string("transport needs [problem] ") + name + " or an instance");
  return *mu;
}

// Source atoms sitting exactly on the nodes of a 1-D grid of their own size,
// which is when the potential can be differentiated for the analytic map.
bool atoms_on_grid(const DiscreteMeasure& mu) {
  if (mu.dim() != 1) return false;
  const GridSpec g(static_cast<int>(mu.size()), 1);
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (distance(mu.atom(i), g.node(i)) > 1e-15) return false;
  return true;
}

bool uniform_weights(const DiscreteMeasure& mu) {
  for (double w : mu.weights())
    if (std::abs(w - mu.weights().front()) > 1e-15) return false;
  return true;
}

json triangle_json(const TriangleReport& r) {
  return {{"t1", r.t1}, {"t2", r.t2}, {"t3", r.t3}, {"c13", r.c13}, {"c12", r.c12},
          {"c23", r.c23}, {"defect", r.defect}, {"tolerance", r.tolerance}, {"pass", r.pass}};
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return 0;
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidInput:
    case ErrorCode::kImbalance: return 2;
    case ErrorCode::kConvergence:
    case ErrorCode::kDivergence:
    case ErrorCode::kSolver: return 3;
    case ErrorCode::kMissingDependency: return 4;
    default: return 1;
  }
}

CommandOutput run_cost(const RunConfig& c) {
  CommandOutput out;
  RunLog log(c.out_dir, "cost", out);
  const GridSpec grid(c.grid_n, c.spec.dim());
  const auto nodes = grid.nodes();
  CostMatrixStats stats;
  const CostMatrix m =
      cost_matrix(c.spec, nodes, nodes, 0.0, c.T, c.action, CostCache{c.cache_path()}, &stats);
  log.info("cost matrix " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
           ": cache hits " + std::to_string(stats.cache_hits) + ", computed " +
           std::to_string(stats.computed));
  if (c.wants("csv")) {
    write_cost_matrix_csv(m, c.out_dir / "cost.csv");
    out.files.push_back("cost.csv");
  }
  double lo = INFINITY, hi = -INFINITY, diag = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) {
      lo = std::min(lo, m(i, j));
      hi = std::max(hi, m(i, j));
      if (i == j) diag = std::max(diag, std::abs(m(i, j)));
    }
  json j{{"spec", c.spec.describe()},
         {"grid_n", c.grid_n},
         {"dim", c.spec.dim()},
         {"s", m.s},
         {"t", m.t},
         {"rows", m.rows},
         {"cols", m.cols},
         {"min", lo},
         {"max", hi},
         {"max_abs_diagonal", diag},
         {"cache_key", cost_matrix_key(c.spec, nodes, nodes, 0.0, c.T, c.action)},
         {"knots_per_unit_time", c.action.knots_per_unit_time},
         {"winding_range", c.action.winding_range},
         {"tolerance", c.action.tolerance}};
  write_json(c.out_dir / "cost.json", j);
  out.files.push_back("cost.json");
  log.info("cost done");
  return out;
}

CommandOutput run_transport(const RunConfig& c) {
  CommandOutput out;
  RunLog log(c.out_dir, "transport", out);
  const DiscreteMeasure& mu0 = need(c.mu0, "mu0");
  const DiscreteMeasure& mu1 = need(c.mu1, "mu1");
  const LagrangianSpec& spec = c.spec;
  const double T = c.T;
  const int d = spec.dim();
  const GridSpec grid(c.grid_n, d);
  const CostCache cache{c.cache_path()};
  std::mt19937_64 rng(c.seed);

  CostMatrixStats stats;
  const CostMatrix cost = cost_matrix(spec, mu0.atoms(), mu1.atoms(), 0.0, T, c.action, cache, &stats);
  log.info("atom cost matrix " + std::to_string(cost.rows) + "x" + std::to_string(cost.cols) +
           ": cache hits " + std::to_string(stats.cache_hits));
  const TransportSolution sol = solve_transport(cost, mu0.weights(), mu1.weights());
  const TransportPlan& plan = sol.primal.plan;
  const PotentialPair& pair = sol.dual.pair;
  const double gap = std::abs(sol.primal.value - sol.dual.value);
  const SlacknessReport slack = check_slackness(plan, pair, cost, 1e-9);
  log.info("primal " + fmt_short(sol.primal.value) + ", duality gap " + fmt_short(gap));

  // Map structure of the plan.
  constexpr double kMass = 1e-10;
  bool is_map = true;
  std::vector<std::size_t> image(plan.rows, 0);
  for (std::size_t i = 0; i < plan.rows; ++i) {
    std::size_t support = 0;
    double heaviest = -1.0;
    for (std::size_t j = 0; j < plan.cols; ++j) {
      if (plan(i, j) > kMass) ++support;
      if (plan(i, j) > heaviest) {
        heaviest = plan(i, j);
        image[i] = j;
      }
    }
    if (support > 1) is_map = false;
  }
  json map_j{{"is_map", is_map}, {"image", image}};
  if (d == 1 && mu0.size() == mu1.size() && uniform_weights(mu0) && uniform_weights(mu1)) {
    const auto oracle = monotone_rearrangement(mu0, mu1);
    double err = 0.0;
    for (std::size_t i = 0; i < plan.rows; ++i)
      err = std::max(err, distance(mu1.atom(image[i]), mu1.atom(oracle[i])));
    map_j["monotone_oracle_error"] = err;
  } else {
    map_j["monotone_oracle_error"] = nullptr;
  }
  if (mu0.size() >= 16 && atoms_on_grid(mu0)) {
    const GridSpec g0(static_cast<int>(mu0.size()), 1);
    MapOptions mo;
    mo.steps_per_unit_time = c.steps_per_unit_time;
    const MapExtraction ex =
        extract_map(plan, mu0, differentiate_on_grid(g0, pair.phi0), spec, T, mo);
    double err = 0.0;
    for (std::size_t i = 0; i < plan.rows; ++i)
      if (ex.differentiable[i])
        err = std::max(err, distance(ex.analytic_image[i], mu1.atom(image[i])));
    map_j["analytic_image_error"] = err;
    map_j["nondifferentiable_fraction"] = ex.nondifferentiable_fraction;
    map_j["degenerate_warning"] = ex.degenerate_warning;
  } else {
    map_j["analytic_image_error"] = nullptr;
    map_j["nondifferentiable_fraction"] = nullptr;
    map_j["degenerate_warning"] = nullptr;
  }

  // Hamilton-Jacobi analysis on the grid.
  const std::vector<double> slices = c.slice_times();
  const TransportSetAnalysis hj =
      analyze_transport_set(spec, mu0, mu1, pair, T, grid, slices, c.action, cache, c.mask_slack);
  json masks = json::array();
  double field_dev = 0.0;
  std::size_t masked_total = 0;
  for (const FieldSlice& s : hj.field.slices) {
    masks.push_back({{"t", s.time}, {"tolerance", s.mask.tolerance}, {"count", s.mask.count()}});
    masked_total += s.mask.count();
    field_dev = std::max(field_dev, s.deviation);
  }
  log.info("transport set: " + std::to_string(masked_total) + " masked nodes over " +
           std::to_string(slices.size()) + " slices, ordering violation " +
           fmt_short(hj.ordering_violation));

  const auto eps = c.lipschitz_epsilons();
  const auto khat = lipschitz_estimate(hj.field, T, eps);
  json khat_j = json::array();
  bool monotone = true;
  for (std::size_t k = 0; k < khat.size(); ++k) {
    khat_j.push_back({{"epsilon", khat[k].epsilon},
                      {"K", khat[k].K},
                      {"pairs", khat[k].pairs},
                      {"defined", khat[k].defined}});
    if (k > 0 && khat[k].K > khat[k - 1].K) monotone = false;
  }

  // Interpolation.
  std::vector<double> times{0.0};
  times.insert(times.end(), slices.begin(), slices.end());
  times.push_back(T);
  const InterpolationPath path = interpolate(plan, mu0, mu1, spec, T, times, c.action);
  json tri = json::array();
  for (double f : {0.25, 0.5, 0.75})
    tri.push_back(triangle_json(verify_triangle(path, spec, 0.0, f * T, T, c.action, c.cost_accuracy)));
  json rtri = json::array();
  if (times.size() >= 3) {
    for (int k = 0; k < c.random_triples; ++k) {
      std::vector<std::size_t> idx(times.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      std::vector<std::size_t> pick;
      std::sample(idx.begin(), idx.end(), std::back_inserter(pick), 3, rng);
      std::sort(pick.begin(), pick.end());
      rtri.push_back(triangle_json(verify_triangle(path, spec, times[pick[0]], times[pick[1]],
                                                   times[pick[2]], c.action, c.cost_accuracy)));
    }
  }
  json flow_j;
  if (!hj.field.empty()) {
    // Window [T/4, 3T/4] when slices allow it; near the end points the field
    // fans out from the atoms and nearest-node lookups are least reliable.
    double fs = slices.front(), ft = slices.back();
    for (double t : slices)
      if (t >= 0.25 * T - 1e-12) {
        fs = t;
        break;
      }
    for (double t : slices)
      if (t <= 0.75 * T + 1e-12 && t > fs) ft = t;
    const FlowReport fr = flow_consistency(path, hj.field, fs, ft, 1024, rng());
    flow_j = {{"s", fr.s},
              {"t", fr.t},
              {"max_deviation", fr.max_deviation},
              {"wasserstein1", fr.wasserstein1},
              {"max_lookup_distance", fr.max_lookup_distance},
              {"coverage_warning", fr.coverage_warning},
              {"bound", 2.0 * grid.spacing()}};
  } else {
    log.info("empty transport set: flow consistency skipped");
  }
  const ContinuityReport cont = continuity_residual(path, mu0, mu1, default_test_functions(d));

  // Artifacts.
  if (c.wants("csv")) {
    write_measure_csv(mu0, c.out_dir / "mu0.csv");
    write_measure_csv(mu1, c.out_dir / "mu1.csv");
    write_cost_matrix_csv(cost, c.out_dir / "cost.csv");
    write_plan_csv(plan, c.out_dir / "plan.csv", kMass);
    write_potentials_csv(pair, c.out_dir / "potentials.csv");
    for (const char* f : {"mu0.csv", "mu1.csv", "cost.csv", "plan.csv", "potentials.csv"})
      out.files.push_back(f);

    std::string fields = "t";
    for (int a = 0; a < d; ++a) fields += ",x" + std::to_string(a + 1);
    fields += ",u,u_hat,mask";
    for (int a = 0; a < d; ++a) fields += ",X" + std::to_string(a + 1);
    for (int a = 0; a < d; ++a) fields += ",X_grad" + std::to_string(a + 1);
    fields += "\n";
    for (std::size_t s = 0; s < slices.size(); ++s) {
      const FieldSlice& fs_ = hj.field.slices[s];
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const TorusPoint x = grid.node(k);
        fields += detail::fmt(slices[s]);
        for (int a = 0; a < d; ++a) fields += "," + detail::fmt(x[a]);
        fields += "," + detail::fmt(hj.forward[s].field.values[k]) + "," +
                  detail::fmt(hj.backward[s].field.values[k]) + "," +
                  (fs_.mask.mask[k] ? "1" : "0");
        for (int a = 0; a < d; ++a)
          fields += "," + (fs_.mask.mask[k] ? detail::fmt(fs_.from_extremal[k][a]) : std::string());
        for (int a = 0; a < d; ++a)
          fields += "," + (fs_.mask.mask[k] ? detail::fmt(fs_.from_gradient[k][a]) : std::string());
        fields += "\n";
      }
    }
    detail::write_file_atomic(c.out_dir / "fields.csv", fields);
    out.files.push_back("fields.csv");
    write_interpolation_csv(path, c.out_dir / "interpolation.csv");
    out.files.push_back("interpolation.csv");
  }
  std::vector<std::string> traj = write_trajectories(path, c.out_dir / "trajectories");
  for (const auto& n : traj) out.files.push_back("trajectories/" + n);
  if (c.wants("dat")) {
    std::vector<GridField> u, uh;
    if (d == 1) {
      for (std::size_t s = 0; s < slices.size(); ++s) {
        u.push_back(hj.forward[s].field);
        uh.push_back(hj.backward[s].field);
      }
    } else {
      const std::size_t mid = slices.size() / 2;
      u.push_back(hj.forward[mid].field);
      uh.push_back(hj.backward[mid].field);
    }
    write_field_matrix(u, c.out_dir / "u.dat");
    write_field_matrix(uh, c.out_dir / "u_hat.dat");
    out.files.push_back("u.dat");
    out.files.push_back("u_hat.dat");
  }

  json cert{{"command", "transport"},
            {"instance", c.instance},
            {"spec", spec.describe()},
            {"dim", d},
            {"T", T},
            {"grid_n", c.grid_n},
            {"seed", c.seed},
            {"source_atoms", mu0.size()},
            {"target_atoms", mu1.size()},
            {"primal_value", sol.primal.value},
            {"dual_value", sol.dual.value},
            {"duality_gap", gap},
            {"slackness_max", slack.worst},
            {"admissibility_violation", admissibility_violation(cost, pair)},
            {"marginal_residual", plan.marginal_residual(mu0.weights(), mu1.weights())},
            {"is_map", is_map},
            {"map", map_j},
            {"slice_times", slices},
            {"mask", masks},
            {"transport_set_empty", masked_total == 0},
            {"ordering_violation", hj.ordering_violation},
            {"field_deviation", field_dev},
            {"K_hat", khat_j},
            {"K_hat_monotone", monotone},
            {"interpolation_times", times},
            {"particles", path.particles.size()},
            {"boundary_error", boundary_error(path, mu0, mu1)},
            {"triangle_defects", tri},
            {"random_triangle_defects", rtri},
            {"flow_deviation", flow_j.is_null() ? json(nullptr) : flow_j["max_deviation"]},
            {"flow", flow_j},
            {"continuity_max_residual", cont.max_residual},
            {"crossing_defect", crossing_defect(path)},
            {"trajectory_files", traj}};
  write_json(c.out_dir / "certificate.json", cert);
  out.files.push_back("certificate.json");
  log.info("transport done");
  return out;
}

CommandOutput run_mather(const RunConfig& c) {
  CommandOutput out;
  RunLog log(c.out_dir, "mather", out);
  const LagrangianSpec& spec = c.spec;
  if (!is_one_periodic(spec)) throw ConfigError("mather needs a spec that is 1-periodic in time");
  const GridSpec grid(c.grid_n, spec.dim());
  const CostCache cache{c.cache_path()};
  MatherOptions mo;
  mo.action = c.action;
  mo.steps_per_unit_time = c.steps_per_unit_time;

  MatherSolution sol = alpha_lp(spec, grid, 1, mo, cache);
  mather_measure(sol, spec, mo);
  log.info("alpha " + fmt_short(sol.alpha) + " on " + std::to_string(sol.m0.size()) + " atoms, " +
           std::to_string(sol.lp_iterations) + " LP iterations");
  const double inv = invariance_defect(sol.m0, spec, 1.0, c.steps_per_unit_time);

  // Lipschitz bound from the transport problem mu -> mu over one period.
  const DiscreteMeasure& mu = *sol.mu;
  const CostMatrix cmu = cost_matrix(spec, mu.atoms(), mu.atoms(), 0.0, 1.0, c.action, cache);
  const TransportSolution tmu = solve_transport(cmu, mu.weights(), mu.weights());
  std::vector<double> slices;
  for (int k = 1; k < 8; ++k) slices.push_back(k / 8.0);
  const auto hj = analyze_transport_set(spec, mu, mu, tmu.dual.pair, 1.0, grid, slices, c.action,
                                        cache, c.mask_slack);
  const auto kh = lipschitz_estimate(hj.field, 1.0, {0.25});
  const double K = kh.front().defined ? kh.front().K : INFINITY;
  const GraphReport gr = graph_check(sol.m0, K);

  const AlphaTReport ar = alpha_T_check(spec, grid, c.T_values, mo, cache);
  log.info("alpha_T max deviation " + fmt_short(ar.max_deviation));

  json atoms = json::array();
  for (const PhaseAtom& a : sol.m0)
    atoms.push_back({{"x", point_json(a.x)}, {"v", vec_json(a.v)}, {"mass", a.mass}});
  json j{{"command", "mather"},
         {"spec", spec.describe()},
         {"dim", spec.dim()},
         {"grid_n", c.grid_n},
         {"seed", c.seed},
         {"alpha", sol.alpha},
         {"T", sol.T},
         {"lp_iterations", sol.lp_iterations},
         {"marginal_gap", sol.marginal_gap},
         {"support_size", sol.m0.size()},
         {"invariance_defect", inv},
         {"graph_constant", gr.max_ratio},
         {"graph_K_bound", number_or_null(K)},
         {"graph_ok", gr.ok},
         {"graph_vacuous", gr.vacuous},
         {"graph_worst_pair", {gr.worst_a, gr.worst_b}},
         {"alpha_T", {{"T_values", ar.T_values}, {"alphas", ar.alphas}, {"max_deviation", ar.max_deviation}}},
         {"atoms", atoms}};
  write_json(c.out_dir / "mather.json", j);
  out.files.push_back("mather.json");
  if (c.wants("csv")) {
    write_phase_atoms_csv(sol.m0, c.out_dir / "mather_atoms.csv");
    write_measure_csv(mu, c.out_dir / "mu.csv");
    std::string at = "T,alpha\n";
    for (std::size_t k = 0; k < ar.T_values.size(); ++k)
      at += std::to_string(ar.T_values[k]) + "," + detail::fmt(ar.alphas[k]) + "\n";
    detail::write_file_atomic(c.out_dir / "alpha_T.csv", at);
    for (const char* f : {"mather_atoms.csv", "mu.csv", "alpha_T.csv"}) out.files.push_back(f);
  }
  log.info("mather done");
  return out;
}

namespace {

std::vector<std::vector<double>> read_matrix(const fs::path& p) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(detail::read_file(p));
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> r;
    double v;
    while (ls >> v) r.push_back(v);
    if (!r.empty()) rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<std::vector<double>> read_csv_rows(const fs::path& p) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(detail::read_file(p));
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;  // header
    }
    if (line.empty()) continue;
    std::vector<double> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) r.push_back(cell.empty() ? NAN : std::stod(cell));
    rows.push_back(std::move(r));
  }
  return rows;
}

void require(const fs::path& p) {
  if (!fs::exists(p)) throw MissingDependency("missing artifact " + p.string());
}

}  // namespace

CommandOutput run_plot(const RunConfig& c) {
  const fs::path dir = c.out_dir;
  const bool transport = fs::exists(dir / "certificate.json");
  const bool mather = fs::exists(dir / "mather_atoms.csv") || fs::exists(dir / "mather.json");
  if (!transport && !mather)
    throw MissingDependency("no transport or mather artifacts in " + dir.string());
  CommandOutput out;
  RunLog log(dir, "plot", out);
  const fs::path pd = dir / "plots";

  if (transport) {
    const json cert = json::parse(detail::read_file(dir / "certificate.json"));
    for (const char* f : {"u.dat", "u_hat.dat", "interpolation.csv"}) require(dir / f);
    for (const auto& n : cert.at("trajectory_files")) require(dir / "trajectories" / n.get<std::string>());

    // u - u_hat heat map.
    const auto u = read_matrix(dir / "u.dat");
    const auto uh = read_matrix(dir / "u_hat.dat");
    if (u.size() != uh.size()) throw InvalidInput("u.dat and u_hat.dat differ in shape");
    std::string gap;
    for (std::size_t r = 0; r < u.size(); ++r) {
      if (u[r].size() != uh[r].size()) throw InvalidInput("u.dat and u_hat.dat differ in shape");
      for (std::size_t k = 0; k < u[r].size(); ++k)
        gap += (k ? " " : "") + detail::fmt(u[r][k] - uh[r][k]);
      gap += "\n";
    }
    detail::write_file_atomic(pd / "gap.dat", gap);
    const bool empty = cert.at("transport_set_empty").get<bool>();
    const int dim = cert.at("dim").get<int>();
    std::string gp = "# u - u_hat; zero on the transport set\nset terminal pngcairo size 800,600\n"
                     "set output 'gap.png'\nset view map\nset palette rgb 33,13,10\n";
    if (dim == 1) {
      gp += "set xlabel 'x (node index)'\nset ylabel 't (slice index)'\n";
    } else {
      gp += "set xlabel 'x1 (node index)'\nset ylabel 'x2 (node index)'\n";
    }
    if (empty) gp += "set label 1 'empty transport set' at graph 0.5,0.5 center front\n";
    gp += "plot 'gap.dat' matrix with image notitle\n";
    detail::write_file_atomic(pd / "gap.gp", gp);
    out.files.insert(out.files.end(), {"plots/gap.dat", "plots/gap.gp"});

    // Particle trajectories.
    std::string tr = "set terminal pngcairo size 800,600\nset output 'trajectories.png'\n"
                     "set datafile separator ','\nset xlabel 'x1'\nset ylabel 't'\n"
                     "set xrange [0:1]\nplot \\\n";
    const auto& names = cert.at("trajectory_files");
    for (std::size_t k = 0; k < names.size(); ++k)
      tr += "  '../trajectories/" + names[k].get<std::string>() + "' skip 1 using 2:1 with lines notitle" +
            (k + 1 < names.size() ? ", \\\n" : "\n");
    detail::write_file_atomic(pd / "trajectories.gp", tr);
    out.files.push_back("plots/trajectories.gp");

    // mu_t snapshots, one gnuplot index block per time.
    const auto rows = read_csv_rows(dir / "interpolation.csv");
    std::map<double, std::vector<const std::vector<double>*>> by_time;
    for (const auto& r : rows) by_time[r.front()].push_back(&r);
    std::string snap;
    std::vector<double> ts;
    for (const auto& [t, rs] : by_time) {
      if (!ts.empty()) snap += "\n\n";
      ts.push_back(t);
      snap += "# t = " + detail::fmt(t) + "\n";
      for (const auto* r : rs) {
        for (std::size_t k = 2; k < r->size(); ++k) snap += (k > 2 ? " " : "") + detail::fmt((*r)[k]);
        snap += "\n";
      }
    }
    detail::write_file_atomic(pd / "snapshots.dat", snap);
    std::string sg = "set terminal pngcairo size 800,600\nset output 'snapshots.png'\n";
    if (dim == 1) {
      sg += "set xlabel 'x1'\nset ylabel 'weight'\nset xrange [0:1]\nplot \\\n";
      for (std::size_t k = 0; k < ts.size(); ++k)
        sg += "  'snapshots.dat' index " + std::to_string(k) + " using 1:2 with impulses title 't = " +
              detail::fmt(ts[k]) + "'" + (k + 1 < ts.size() ? ", \\\n" : "\n");
    } else {
      sg += "set xlabel 'x1'\nset ylabel 'x2'\nset xrange [0:1]\nset yrange [0:1]\nplot \\\n";
      for (std::size_t k = 0; k < ts.size(); ++k)
        sg += "  'snapshots.dat' index " + std::to_string(k) +
              " using 1:2:(0.5 + 20*$3) with points pt 7 ps variable title 't = " + detail::fmt(ts[k]) +
              "'" + (k + 1 < ts.size() ? ", \\\n" : "\n");
    }
    detail::write_file_atomic(pd / "snapshots.gp", sg);
    out.files.insert(out.files.end(), {"plots/snapshots.dat", "plots/snapshots.gp"});
    if (empty) log.info("empty transport set: heat map annotated");
  }

  if (mather) {
    require(dir / "mather_atoms.csv");
    const auto rows = read_csv_rows(dir / "mather_atoms.csv");
    std::string data = "# x v mass\n";
    int dim = 1;
    for (const auto& r : rows) {
      dim = static_cast<int>(r.size() - 1) / 2;
      for (std::size_t k = 0; k < r.size(); ++k) data += (k ? " " : "") + detail::fmt(r[k]);
      data += "\n";
    }
    detail::write_file_atomic(pd / "phase.dat", data);
    std::string gp = "set terminal pngcairo size 800,600\nset output 'phase.png'\n"
                     "set xlabel 'x1'\nset ylabel 'v1'\nset xrange [0:1]\n";
    gp += dim == 1 ? "plot 'phase.dat' using 1:2:(1 + 4*$3) with points pt 7 ps variable title 'Mather atoms'\n"
                   : "plot 'phase.dat' using 1:3:(1 + 4*$5) with points pt 7 ps variable title 'Mather atoms'\n";
    detail::write_file_atomic(pd / "phase.gp", gp);
    out.files.insert(out.files.end(), {"plots/phase.dat", "plots/phase.gp"});
  }
  log.info("plot done");
  return out;
}

CommandOutput run_command(std::string_view name, const RunConfig& config) {
  if (name == "cost") return run_cost(config);
  if (name == "transport") return run_transport(config);
  if (name == "mather") return run_mather(config);
  if (name == "plot") return run_plot(config);
  throw ConfigError("unknown command '" + std::string(name) + "'");
}

}  // namespace lagot
