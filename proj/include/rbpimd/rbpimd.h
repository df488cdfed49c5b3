#ifndef RBPIMD_RBPIMD_H
#define RBPIMD_RBPIMD_H

#include <stddef.h>
#include <stdint.h>

#if defined(RBPIMD_BUILDING_LIBRARY)
#define RBP_API __attribute__((visibility("default")))
#else
#define RBP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rbp_status {
    RBP_OK = 0,
    RBP_INVALID_ARGUMENT = 1,
    RBP_CONFIG = 2,
    RBP_SINGULARITY = 3,
    RBP_IO = 4,
    RBP_INTERNAL = 5
} rbp_status;

typedef struct rbp_config rbp_config;
typedef struct rbp_ring rbp_ring;
typedef struct rbp_sampler rbp_sampler;

/* Message of the last failed call on this thread; "" after success. */
RBP_API const char* rbp_last_error(void);
RBP_API const char* rbp_version(void);
/* Frees strings returned through char** out-parameters. */
RBP_API void rbp_string_free(char* s);

/* ---- configuration ---- */

RBP_API rbp_status rbp_config_create(rbp_config** out);
RBP_API void rbp_config_destroy(rbp_config* cfg);
/* Applies a named preset on top of the current values. */
RBP_API rbp_status rbp_config_load_preset(rbp_config* cfg, const char* name);
RBP_API rbp_status rbp_config_load_file(rbp_config* cfg, const char* path);
RBP_API rbp_status rbp_config_set(rbp_config* cfg, const char* key, const char* value);
/* Current value of `key` as text; free with rbp_string_free. */
RBP_API rbp_status rbp_config_get(const rbp_config* cfg, const char* key, char** value);
/* Derives dependent defaults (alpha, potential) and checks consistency. */
RBP_API rbp_status rbp_config_validate(rbp_config* cfg);
/* All keys as "key = value" lines; free with rbp_string_free. */
RBP_API rbp_status rbp_config_dump(const rbp_config* cfg, char** text);
/* Newline-separated preset names; free with rbp_string_free. */
RBP_API rbp_status rbp_preset_list(char** names);

/* Validates cfg, runs a command ("run", "error-table", "ensemble", "strong-error",
   "rejection-table", "spectrum-check"), writes its files to out_dir and returns the
   summary JSON (may be NULL to discard). */
RBP_API rbp_status rbp_run_experiment(rbp_config* cfg, const char* command, const char* out_dir,
                                      unsigned threads, char** summary_json);

/* ---- ring operator (L + alpha I) on N x n_cols row-major blocks ---- */

RBP_API rbp_status rbp_ring_create(size_t n_beads, double mass, double beta, double alpha,
                                   rbp_ring** out);
RBP_API void rbp_ring_destroy(rbp_ring* ring);
/* Writes the N eigenvalues of L (without alpha) in mode order. */
RBP_API rbp_status rbp_ring_eigenvalues(const rbp_ring* ring, double* out, size_t n);
RBP_API rbp_status rbp_ring_apply(const rbp_ring* ring, const double* x, double* out,
                                  size_t n_cols);
RBP_API rbp_status rbp_ring_solve(const rbp_ring* ring, const double* b, double* out,
                                  size_t n_cols);
RBP_API rbp_status rbp_ring_solve_tridiagonal(const rbp_ring* ring, const double* b, double* out,
                                              size_t n_cols);
RBP_API rbp_status rbp_ring_sqrt_inverse_apply(const rbp_ring* ring, const double* x, double* out,
                                               size_t n_cols);
/* Draws n_cols independent N(0, (L + alpha I)^{-1}) columns from a stream seeded by `seed`. */
RBP_API rbp_status rbp_ring_sample(const rbp_ring* ring, uint64_t seed, double* out,
                                   size_t n_cols);

/* ---- sampler: one trajectory of the configured method ---- */

typedef struct rbp_sampler_stats {
    double time;
    uint64_t steps;
    uint64_t metropolis_tests;
    uint64_t rejections;
    uint64_t pair_evals;
} rbp_sampler_stats;

/* Validates cfg and builds a sampler for its system and method. */
RBP_API rbp_status rbp_sampler_create(rbp_config* cfg, uint64_t trajectory_id, rbp_sampler** out);
RBP_API void rbp_sampler_destroy(rbp_sampler* s);
RBP_API rbp_status rbp_sampler_step(rbp_sampler* s, size_t n_steps);
/* Shape of the state arrays: n_beads x n_particles x 3, bead-major. */
RBP_API rbp_status rbp_sampler_shape(const rbp_sampler* s, size_t* n_beads, size_t* n_particles);
RBP_API rbp_status rbp_sampler_positions(const rbp_sampler* s, double* out, size_t len);
RBP_API rbp_status rbp_sampler_velocities(const rbp_sampler* s, double* out, size_t len);
RBP_API rbp_status rbp_sampler_set_state(rbp_sampler* s, const double* q, const double* v,
                                         size_t len);
/* Weight of the configured observable at the current positions. */
RBP_API rbp_status rbp_sampler_weight(rbp_sampler* s, double* out);
RBP_API rbp_status rbp_sampler_stats_get(const rbp_sampler* s, rbp_sampler_stats* out);
RBP_API rbp_status rbp_sampler_save_snapshot(const rbp_sampler* s, const char* path);
RBP_API rbp_status rbp_sampler_load_snapshot(rbp_sampler* s, const char* path);

#ifdef __cplusplus
}
#endif

#endif
