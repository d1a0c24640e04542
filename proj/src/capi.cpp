#include "lagot/lagot.h"

#include <exception>
#include <new>
#include <string>

#include "lagot/commands.hpp"
#include "lagot/config.hpp"
#include "lagot/instances.hpp"
#include "lagot/kantorovich.hpp"
#include "lagot/mather.hpp"

#ifndef LAGOT_VERSION
#define LAGOT_VERSION "0.0.0"
#endif

struct lagot_spec {
  lagot::LagrangianSpec spec;
};
struct lagot_measure {
  lagot::DiscreteMeasure mu;
};
struct lagot_cost_matrix {
  lagot::CostMatrix m;
};
struct lagot_transport {
  lagot::TransportSolution sol;
};
struct lagot_config {
  lagot::RunConfig config;
};

namespace {

thread_local std::string g_last_error;

lagot_status fail(lagot_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs fn and converts any exception into a status plus last-error message.
template <class Fn>
lagot_status guarded(Fn&& fn) {
  try {
    fn();
    return LAGOT_OK;
  } catch (const lagot::Error& e) {
    return fail(static_cast<lagot_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(LAGOT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LAGOT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LAGOT_ERR_INTERNAL, "unknown error");
  }
}

#define LAGOT_REQUIRE(cond, what) \
  if (!(cond)) return fail(LAGOT_ERR_INVALID, what)

lagot::Vec vec_of(const double* xs, int dim) {
  lagot::Vec v = lagot::Vec::zero(dim);
  for (int i = 0; i < dim; ++i) v[i] = xs[i];
  return v;
}

}  // namespace

extern "C" {

const char* lagot_version(void) { return LAGOT_VERSION; }

const char* lagot_last_error(void) { return g_last_error.c_str(); }

const char* lagot_status_name(lagot_status status) {
  switch (status) {
    case LAGOT_OK: return "ok";
    case LAGOT_ERR_INVALID: return "invalid input";
    case LAGOT_ERR_CONFIG: return "configuration error";
    case LAGOT_ERR_CONVERGENCE: return "convergence failure";
    case LAGOT_ERR_MISSING_DEPENDENCY: return "missing dependency";
    case LAGOT_ERR_DIVERGENCE: return "divergence";
    case LAGOT_ERR_IMBALANCE: return "mass imbalance";
    case LAGOT_ERR_SOLVER: return "solver failure";
    case LAGOT_ERR_IO: return "i/o error";
    case LAGOT_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

int lagot_exit_code(lagot_status status) {
  if (status == LAGOT_ERR_INTERNAL) return 1;
  return lagot::exit_code_for(static_cast<lagot::ErrorCode>(status));
}

lagot_status lagot_spec_builtin(const char* name, int dim, lagot_spec** out) {
  LAGOT_REQUIRE(name && out, "null argument");
  return guarded([&] { *out = new lagot_spec{lagot::builtin_spec(name, dim)}; });
}

lagot_status lagot_spec_create(int dim, const double* kinetic, double amplitude,
                               const double* wavevector, double speed, double time_period,
                               lagot_spec** out) {
  LAGOT_REQUIRE(kinetic && wavevector && out, "null argument");
  LAGOT_REQUIRE(dim == 1 || dim == 2, "dimension must be 1 or 2");
  return guarded([&] {
    lagot::Mat a = lagot::Mat::identity(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) a(i, j) = kinetic[i * dim + j];
    const lagot::Vec k = vec_of(wavevector, dim);
    lagot::Potential v = amplitude == 0.0 ? lagot::Potential::zero(dim)
                         : speed == 0.0   ? lagot::Potential::cosine(amplitude, k)
                                          : lagot::Potential::traveling(amplitude, k, speed);
    std::optional<double> period;
    if (time_period > 0.0) period = time_period;
    *out = new lagot_spec{lagot::LagrangianSpec(a, std::move(v), period)};
  });
}

int lagot_spec_dim(const lagot_spec* spec) { return spec ? spec->spec.dim() : 0; }

void lagot_spec_destroy(lagot_spec* spec) { delete spec; }

lagot_status lagot_cost(const lagot_spec* spec, const double* x, const double* y, double s,
                        double t, double* value) {
  LAGOT_REQUIRE(spec && x && y && value, "null argument");
  return guarded([&] {
    const int d = spec->spec.dim();
    *value = lagot::minimize_bvp(spec->spec, lagot::wrap(vec_of(x, d)), lagot::wrap(vec_of(y, d)), s, t)
                 .value;
  });
}

lagot_status lagot_measure_create(int dim, size_t n, const double* points, const double* weights,
                                  lagot_measure** out) {
  LAGOT_REQUIRE(points && weights && out, "null argument");
  LAGOT_REQUIRE(dim == 1 || dim == 2, "dimension must be 1 or 2");
  LAGOT_REQUIRE(n > 0, "a measure needs at least one atom");
  return guarded([&] {
    std::vector<lagot::TorusPoint> atoms;
    for (size_t i = 0; i < n; ++i) atoms.push_back(lagot::wrap(vec_of(points + i * dim, dim)));
    *out = new lagot_measure{
        lagot::DiscreteMeasure::normalized(std::move(atoms), std::vector<double>(weights, weights + n))};
  });
}

lagot_status lagot_measure_load_csv(const char* path, lagot_measure** out) {
  LAGOT_REQUIRE(path && out, "null argument");
  return guarded([&] { *out = new lagot_measure{lagot::load_measure_csv(path)}; });
}

size_t lagot_measure_size(const lagot_measure* mu) { return mu ? mu->mu.size() : 0; }

void lagot_measure_destroy(lagot_measure* mu) { delete mu; }

lagot_status lagot_cost_matrix_compute(const lagot_spec* spec, const lagot_measure* mu0,
                                       const lagot_measure* mu1, double s, double t,
                                       const char* cache_dir, lagot_cost_matrix** out) {
  LAGOT_REQUIRE(spec && mu0 && mu1 && out, "null argument");
  return guarded([&] {
    std::optional<lagot::CostCache> cache;
    if (cache_dir) cache = lagot::CostCache{cache_dir};
    *out = new lagot_cost_matrix{
        lagot::cost_matrix(spec->spec, mu0->mu.atoms(), mu1->mu.atoms(), s, t, {}, cache)};
  });
}

lagot_status lagot_cost_matrix_data(const lagot_cost_matrix* m, size_t* rows, size_t* cols,
                                    const double** values) {
  LAGOT_REQUIRE(m && rows && cols && values, "null argument");
  *rows = m->m.rows;
  *cols = m->m.cols;
  *values = m->m.values.data();
  return LAGOT_OK;
}

void lagot_cost_matrix_destroy(lagot_cost_matrix* m) { delete m; }

lagot_status lagot_transport_solve(const lagot_cost_matrix* cost, const lagot_measure* mu0,
                                   const lagot_measure* mu1, lagot_transport** out) {
  LAGOT_REQUIRE(cost && mu0 && mu1 && out, "null argument");
  LAGOT_REQUIRE(cost->m.rows == mu0->mu.size() && cost->m.cols == mu1->mu.size(),
                "cost matrix shape does not match the measures");
  return guarded([&] {
    *out = new lagot_transport{lagot::solve_transport(cost->m, mu0->mu.weights(), mu1->mu.weights())};
  });
}

lagot_status lagot_transport_values(const lagot_transport* tr, double* primal, double* dual) {
  LAGOT_REQUIRE(tr && primal && dual, "null argument");
  *primal = tr->sol.primal.value;
  *dual = tr->sol.dual.value;
  return LAGOT_OK;
}

lagot_status lagot_transport_plan(const lagot_transport* tr, double* plan, size_t capacity) {
  LAGOT_REQUIRE(tr && plan, "null argument");
  const auto& c = tr->sol.primal.plan.coupling;
  LAGOT_REQUIRE(capacity >= c.size(), "plan buffer too small");
  std::copy(c.begin(), c.end(), plan);
  return LAGOT_OK;
}

lagot_status lagot_transport_potentials(const lagot_transport* tr, double* phi0, double* phi1) {
  LAGOT_REQUIRE(tr && phi0 && phi1, "null argument");
  const auto& p = tr->sol.dual.pair;
  std::copy(p.phi0.begin(), p.phi0.end(), phi0);
  std::copy(p.phi1.begin(), p.phi1.end(), phi1);
  return LAGOT_OK;
}

void lagot_transport_destroy(lagot_transport* tr) { delete tr; }

lagot_status lagot_mather_alpha(const lagot_spec* spec, int grid_n, int T, double* alpha) {
  LAGOT_REQUIRE(spec && alpha, "null argument");
  LAGOT_REQUIRE(grid_n >= 2, "grid needs at least 2 nodes per axis");
  return guarded([&] {
    *alpha = lagot::alpha_lp(spec->spec, lagot::GridSpec(grid_n, spec->spec.dim()), T).alpha;
  });
}

lagot_status lagot_config_load(const char* path, lagot_config** out) {
  LAGOT_REQUIRE(path && out, "null argument");
  return guarded([&] { *out = new lagot_config{lagot::load_config(path)}; });
}

lagot_status lagot_config_set_out_dir(lagot_config* config, const char* dir) {
  LAGOT_REQUIRE(config && dir && *dir, "null argument");
  config->config.out_dir = dir;
  return LAGOT_OK;
}

lagot_status lagot_config_set_seed(lagot_config* config, uint64_t seed) {
  LAGOT_REQUIRE(config, "null argument");
  config->config.seed = seed;
  return LAGOT_OK;
}

void lagot_config_destroy(lagot_config* config) { delete config; }

lagot_status lagot_run(const lagot_config* config, const char* command) {
  LAGOT_REQUIRE(config && command, "null argument");
  return guarded([&] { lagot::run_command(command, config->config); });
}

}  // extern "C"
