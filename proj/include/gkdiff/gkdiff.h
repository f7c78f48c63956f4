/* SPDX-License-Identifier: Apache-2.0 */
#ifndef GKDIFF_GKDIFF_H
#define GKDIFF_GKDIFF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(GKDIFF_BUILDING)
#    define GKD_API __declspec(dllexport)
#  else
#    define GKD_API __declspec(dllimport)
#  endif
#else
#  define GKD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gkd_status {
    GKD_OK = 0,
    GKD_ERR_INVALID_ARGUMENT = 1,
    GKD_ERR_VALIDATION = 2,
    GKD_ERR_NONCONVERGED = 3,
    GKD_ERR_IO = 4,
    GKD_ERR_GRID_MISMATCH = 5,
    GKD_ERR_INTERNAL = 6
} gkd_status;

/* Opaque handles. */
typedef struct gkd_config gkd_config;
typedef struct gkd_table gkd_table;

typedef struct gkd_run_options {
    const char* out_dir; /* NULL or "": use outputs.dir from the config */
    unsigned threads;    /* 0: hardware concurrency */
} gkd_run_options;

GKD_API const char* gkd_version(void);
GKD_API const char* gkd_status_string(gkd_status status);
/* Message of the last failing call on this thread ("" if none). */
GKD_API const char* gkd_last_error(void);
/* Config key named by the last GKD_ERR_VALIDATION on this thread ("" if none). */
GKD_API const char* gkd_last_error_field(void);
/* One-line result of the last successful gkd_run_* call on this thread. */
GKD_API const char* gkd_last_summary(void);

/* Configuration (TOML). */
GKD_API gkd_status gkd_config_load(const char* path, gkd_config** out);
GKD_API gkd_status gkd_config_parse(const char* text, gkd_config** out);
GKD_API void gkd_config_free(gkd_config* cfg);
GKD_API gkd_status gkd_config_hash(const gkd_config* cfg, uint64_t* out);
/* Canonical TOML text. Writes at most cap bytes including the terminator;
 * *needed receives the full length plus one. */
GKD_API gkd_status gkd_config_canonical(const gkd_config* cfg, char* buf, size_t cap, size_t* needed);

/* Closed forms and coefficients. */
GKD_API gkd_status gkd_scaling_exponent(double alpha, double* out);
/* a(e) of the config's correlation model by adaptive quadrature. */
GKD_API gkd_status gkd_diffusion_coefficient(const gkd_config* cfg, double e, double* out);
/* K in a(e) = K e^{alpha/2} for the config's temporal envelope and n. */
GKD_API gkd_status gkd_richardson_coefficient(const gkd_config* cfg, double alpha, double* out);
/* Work-integral Monte Carlo estimate of a(e) for the config's field. */
GKD_API gkd_status gkd_mc_work_oracle(const gkd_config* cfg, double e, int window, size_t samples, uint64_t seed,
                                      unsigned threads, double* estimate, double* std_error);

/* Exact field-free gyration over time t. */
GKD_API gkd_status gkd_free_flow(const double x[2], const double v[2], double t, double eps, double x_out[2],
                                 double v_out[2]);
/* L1, L2, W1 between two densities on the uniform grid of `cells` cells on [0, e_max]. */
GKD_API gkd_status gkd_compare(size_t cells, double e_max, const double* p, const double* q, double out[3]);

/* Coefficient tables. */
GKD_API gkd_status gkd_table_compute(const gkd_config* cfg, const double* e, size_t count, unsigned threads,
                                     gkd_table** out);
GKD_API gkd_status gkd_table_size(const gkd_table* table, size_t* out);
GKD_API gkd_status gkd_table_get(const gkd_table* table, size_t index, double* e, double* a);
GKD_API gkd_status gkd_table_interpolate(const gkd_table* table, double e, double* a);
GKD_API void gkd_table_free(gkd_table* table);

/* Pipelines; each writes its files and manifest.json to the output directory. */
GKD_API gkd_status gkd_run_coeff(const gkd_config* cfg, const double* e, size_t count, int mc,
                                 const gkd_run_options* opts);
GKD_API gkd_status gkd_run_field_validate(const gkd_config* cfg, int lags, int realizations,
                                          const gkd_run_options* opts);
GKD_API gkd_status gkd_run_simulate(const gkd_config* cfg, double eps, const gkd_run_options* opts);
GKD_API gkd_status gkd_run_she(const gkd_config* cfg, const gkd_run_options* opts);
/* *passed is set to 1 when every epsilon ran and L1 decreased beyond stderr. */
GKD_API gkd_status gkd_run_study(const gkd_config* cfg, const gkd_run_options* opts, int* passed);
GKD_API gkd_status gkd_run_scaling(double alpha, const gkd_run_options* opts);
/* opts may be NULL; out receives L1, L2, W1. */
GKD_API gkd_status gkd_run_compare(const char* a_csv, const char* b_csv, const gkd_run_options* opts, double out[3]);

#ifdef __cplusplus
}
#endif

#endif /* GKDIFF_GKDIFF_H */
