/* C interface to liblagot: Lagrangian optimal transport on flat tori.
 *
 * Every function returns a lagot_status. On failure the message of the last
 * error on the calling thread is available from lagot_last_error() until the
 * next failing call on that thread. Handles are opaque; each create or load function
 * has a matching *_destroy, and destroy functions accept NULL.
 *
 * Points are arrays of `dim` doubles in [0, 1)^dim (other values are wrapped);
 * point lists are row-major n x dim.
 */
#ifndef LAGOT_LAGOT_H
#define LAGOT_LAGOT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LAGOT_API __declspec(dllexport)
#else
#define LAGOT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lagot_status {
  LAGOT_OK = 0,
  LAGOT_ERR_INVALID = 1,
  LAGOT_ERR_CONFIG = 2,
  LAGOT_ERR_CONVERGENCE = 3,
  LAGOT_ERR_MISSING_DEPENDENCY = 4,
  LAGOT_ERR_DIVERGENCE = 5,
  LAGOT_ERR_IMBALANCE = 6,
  LAGOT_ERR_SOLVER = 7,
  LAGOT_ERR_IO = 8,
  LAGOT_ERR_INTERNAL = 9
} lagot_status;

typedef struct lagot_spec lagot_spec;
typedef struct lagot_measure lagot_measure;
typedef struct lagot_cost_matrix lagot_cost_matrix;
typedef struct lagot_transport lagot_transport;
typedef struct lagot_config lagot_config;

LAGOT_API const char* lagot_version(void);
LAGOT_API const char* lagot_last_error(void);
LAGOT_API const char* lagot_status_name(lagot_status status);
/* Process exit code for a status: 0 ok, 2 config, 3 convergence,
 * 4 missing dependency, 1 otherwise. */
LAGOT_API int lagot_exit_code(lagot_status status);

/* ---- Lagrangians ------------------------------------------------------- */

/* "free", "pendulum", "two_well" or "traveling". */
LAGOT_API lagot_status lagot_spec_builtin(const char* name, int dim, lagot_spec** out);
/* L = 1/2 v^T A v - V with V = amplitude cos(2 pi (k.x - speed t)).
 * `kinetic` holds dim*dim entries, row-major; time_period <= 0 means none. */
LAGOT_API lagot_status lagot_spec_create(int dim, const double* kinetic, double amplitude,
                                         const double* wavevector, double speed,
                                         double time_period, lagot_spec** out);
LAGOT_API int lagot_spec_dim(const lagot_spec* spec);
LAGOT_API void lagot_spec_destroy(lagot_spec* spec);

/* c_s^t(x, y), searched over windings in [-2, 2]^dim. */
LAGOT_API lagot_status lagot_cost(const lagot_spec* spec, const double* x, const double* y,
                                  double s, double t, double* value);

/* ---- Measures ---------------------------------------------------------- */

/* Weights are rescaled to unit mass. */
LAGOT_API lagot_status lagot_measure_create(int dim, size_t n, const double* points,
                                            const double* weights, lagot_measure** out);
LAGOT_API lagot_status lagot_measure_load_csv(const char* path, lagot_measure** out);
LAGOT_API size_t lagot_measure_size(const lagot_measure* mu);
LAGOT_API void lagot_measure_destroy(lagot_measure* mu);

/* ---- Cost matrices and transport ---------------------------------------- */

/* cache_dir may be NULL for no disk cache. */
LAGOT_API lagot_status lagot_cost_matrix_compute(const lagot_spec* spec, const lagot_measure* mu0,
                                                 const lagot_measure* mu1, double s, double t,
                                                 const char* cache_dir, lagot_cost_matrix** out);
/* `values` stays valid until the matrix is destroyed. */
LAGOT_API lagot_status lagot_cost_matrix_data(const lagot_cost_matrix* m, size_t* rows,
                                              size_t* cols, const double** values);
LAGOT_API void lagot_cost_matrix_destroy(lagot_cost_matrix* m);

LAGOT_API lagot_status lagot_transport_solve(const lagot_cost_matrix* cost,
                                             const lagot_measure* mu0, const lagot_measure* mu1,
                                             lagot_transport** out);
LAGOT_API lagot_status lagot_transport_values(const lagot_transport* tr, double* primal,
                                              double* dual);
/* Copies the rows x cols coupling into `plan`, which must hold rows*cols. */
LAGOT_API lagot_status lagot_transport_plan(const lagot_transport* tr, double* plan, size_t capacity);
/* Copies phi0 (rows values) and phi1 (cols values). */
LAGOT_API lagot_status lagot_transport_potentials(const lagot_transport* tr, double* phi0,
                                                  double* phi1);
LAGOT_API void lagot_transport_destroy(lagot_transport* tr);

/* ---- Mather ------------------------------------------------------------ */

/* alpha = min over invariant measures of the period-T action / T on an
 * n-per-axis grid. The spec must be 1-periodic in time. */
LAGOT_API lagot_status lagot_mather_alpha(const lagot_spec* spec, int grid_n, int T, double* alpha);

/* ---- Configured runs ----------------------------------------------------- */

LAGOT_API lagot_status lagot_config_load(const char* path, lagot_config** out);
LAGOT_API lagot_status lagot_config_set_out_dir(lagot_config* config, const char* dir);
LAGOT_API lagot_status lagot_config_set_seed(lagot_config* config, uint64_t seed);
LAGOT_API void lagot_config_destroy(lagot_config* config);

/* Runs "cost", "transport", "mather" or "plot" and writes its artifacts. */
LAGOT_API lagot_status lagot_run(const lagot_config* config, const char* command);

#ifdef __cplusplus
}
#endif

#endif /* LAGOT_LAGOT_H */
