/* C interface to the random diffraction library. */
#ifndef RDIFF_RDIFF_H
#define RDIFF_RDIFF_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rdiff_status {
  RDIFF_OK = 0,
  RDIFF_E_INVALID_ARGUMENT = 1,
  RDIFF_E_DOMAIN = 2,
  RDIFF_E_NUMERIC = 3,
  RDIFF_E_IO = 4,
  RDIFF_E_CONFIG = 5,
  RDIFF_E_INTERNAL = 6
} rdiff_status;

typedef enum rdiff_model { RDIFF_MODEL_A = 0, RDIFF_MODEL_B = 1 } rdiff_model;

typedef enum rdiff_theorem {
  RDIFF_THEOREM_A_SIMPLE = 0,
  RDIFF_THEOREM_A_ADDITION = 1,
  RDIFF_THEOREM_B_SIMPLE = 2,
  RDIFF_THEOREM_B_ADDITION = 3
} rdiff_theorem;

typedef struct rdiff_pointset rdiff_pointset;
typedef struct rdiff_spec rdiff_spec;
typedef struct rdiff_observable rdiff_observable;

/* Message of the last failing call on this thread; never NULL. */
const char* rdiff_last_error(void);

/* Strings returned through char** are owned by the caller. */
void rdiff_string_free(char* s);

/* Point sets. */
rdiff_status rdiff_pointset_lattice(int dim, double spacing, double radius, rdiff_pointset** out);
rdiff_status rdiff_pointset_fibonacci(int n_points, double short_len, rdiff_pointset** out);
rdiff_status rdiff_pointset_hardcore(int dim, double min_dist, double radius, uint64_t seed, rdiff_pointset** out);
rdiff_status rdiff_pointset_from_coords(int dim, const double* coords, size_t n_points, double min_dist,
                                        rdiff_pointset** out);
rdiff_status rdiff_pointset_from_csv(const char* text, rdiff_pointset** out);
void rdiff_pointset_free(rdiff_pointset* ps);
size_t rdiff_pointset_size(const rdiff_pointset* ps);
int rdiff_pointset_dim(const rdiff_pointset* ps);
/* Copies size * dim coordinates into `out`. */
rdiff_status rdiff_pointset_coords(const rdiff_pointset* ps, double* out, size_t capacity);
/* Exact minimal distance; +inf and *single_point = 1 for one-point sets. */
rdiff_status rdiff_pointset_min_distance(const rdiff_pointset* ps, double* value, int* single_point);
rdiff_status rdiff_pointset_to_csv(const rdiff_pointset* ps, char** out);

/* Scatterer specifications, JSON encoded. */
rdiff_status rdiff_spec_from_json(const char* json, rdiff_spec** out);
rdiff_status rdiff_spec_bernoulli(double plus, double minus, double p_plus, rdiff_spec** out);
rdiff_status rdiff_spec_symmetric_dislocations(int dim, double delta0, rdiff_spec** out);
void rdiff_spec_free(rdiff_spec* spec);
rdiff_model rdiff_spec_model(const rdiff_spec* spec);

/* Observables. */
rdiff_status rdiff_observable_gaussian(int dim, double sigma, rdiff_observable** out);
void rdiff_observable_free(rdiff_observable* obs);

/* Norms. */
rdiff_status rdiff_gamma_norm(const rdiff_observable* obs, const rdiff_pointset* ps, double* out);
rdiff_status rdiff_gamma_delta_seminorm(const rdiff_observable* obs, const rdiff_pointset* ps, double delta,
                                        double* out);
rdiff_status rdiff_sobolev_norm(const rdiff_observable* obs, double a, double* out);
rdiff_status rdiff_sobolev_d_norm(const rdiff_observable* obs, double a, double* out);

/* Correlation functionals; values are complex (re, im). */
rdiff_status rdiff_autocorr(const rdiff_pointset* ps, const rdiff_spec* spec, const rdiff_observable* obs,
                            uint64_t seed, double* re, double* im);
rdiff_status rdiff_exact_mean(const rdiff_pointset* ps, const rdiff_spec* spec, const rdiff_observable* obs,
                              double* re, double* im);
/* Exact E|X_r|^2 and the normalized s_r (model A) or q_r (model B). */
rdiff_status rdiff_exact_variance(const rdiff_pointset* ps, const rdiff_spec* spec, const rdiff_observable* obs,
                                  double* variance, double* normalized);

/* Rate functions and constants. `precise` selects d = log(1 + lambda*) / 2. */
rdiff_status rdiff_constants_json(int precise, char** out);
rdiff_status rdiff_rate_J(double eps_bar, double d, double D, double* out);
rdiff_status rdiff_rate_j(double eps_bar, double s, double d, double D, double* out);
rdiff_status rdiff_h(double u, double v, double* out);
rdiff_status rdiff_ld_bound(double epsilon, size_t cardinality, double scale, double s, rdiff_theorem which,
                            int precise, double* out);
rdiff_status rdiff_laplace_gap_bound(size_t cardinality, double scale, rdiff_model model, int precise, double* out);

/* Runs a CLI command. `config_json` may be NULL for "constants". When
 * `out_dir` is non-NULL the output files are written there, only after the
 * command succeeded. `report` (optional) receives report.json, `text`
 * (optional) a human-readable summary, `pass` whether every verdict passed. */
rdiff_status rdiff_run_command(const char* command, const char* config_json, uint64_t seed, int has_seed,
                               const char* out_dir, int threads, int timestamps, char** report, char** text,
                               int* pass);

#ifdef __cplusplus
}
#endif

#endif
