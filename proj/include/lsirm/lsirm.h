/* C interface to the latent space item response model engine.
 *
 * All functions return LSIRM_OK on success; on failure they return a status
 * code and leave a human-readable message retrievable through
 * lsirm_last_error() (thread-local). Handles are opaque and must be released
 * with their matching *_free function.
 */
#ifndef LSIRM_H
#define LSIRM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lsirm_status {
  LSIRM_OK = 0,
  LSIRM_ERR_INVALID_ARGUMENT = 1,
  LSIRM_ERR_INVALID_STATE = 2,
  LSIRM_ERR_PARSE = 3,
  LSIRM_ERR_VALIDATION = 4,
  LSIRM_ERR_IO = 5,
  LSIRM_ERR_INTEGRITY = 6,
  LSIRM_ERR_INTERNAL = 7
} lsirm_status;

typedef enum lsirm_model { LSIRM_MODEL_1PL = 0, LSIRM_MODEL_2PL = 1 } lsirm_model;

typedef enum lsirm_family { LSIRM_FAMILY_BINARY = 0, LSIRM_FAMILY_NORMAL = 1 } lsirm_family;

typedef enum lsirm_gamma_mode {
  LSIRM_GAMMA_FREE = 0,
  LSIRM_GAMMA_FIXED = 1, /* gamma fixed at 1 */
  LSIRM_GAMMA_SPIKESLAB = 2
} lsirm_gamma_mode;

typedef enum lsirm_missing_mode {
  LSIRM_MISSING_COMPLETE = 0,
  LSIRM_MISSING_MCAR = 1,
  LSIRM_MISSING_MAR = 2
} lsirm_missing_mode;

typedef enum lsirm_layout { LSIRM_LAYOUT_PRIOR = 0, LSIRM_LAYOUT_CLUSTERED = 1 } lsirm_layout;

typedef struct lsirm_matrix lsirm_matrix;
typedef struct lsirm_fit lsirm_fit;

const char* lsirm_version(void);

/* Message describing the most recent failure on this thread. */
const char* lsirm_last_error(void);

/* Releases strings returned through char** out-parameters. */
void lsirm_string_free(char* s);

/* ---- response data ---- */

lsirm_status lsirm_matrix_read_csv(const char* path, const char* missing_code, int has_header,
                                   lsirm_family family, lsirm_matrix** out);

/* values is row-major n*p; observed may be NULL for fully observed data. */
lsirm_status lsirm_matrix_create(int32_t n, int32_t p, lsirm_family family, const double* values,
                                 const uint8_t* observed, lsirm_matrix** out);

lsirm_status lsirm_matrix_complete_cases(const lsirm_matrix* in, lsirm_matrix** out);

lsirm_status lsirm_matrix_dims(const lsirm_matrix* m, int32_t* n, int32_t* p, int64_t* n_missing);

lsirm_status lsirm_matrix_write_csv(const lsirm_matrix* m, const char* path,
                                    const char* missing_code);

void lsirm_matrix_free(lsirm_matrix* m);

/* ---- fitting ---- */

/* Defaults mirror the package argument tables; call lsirm_options_init first. */
typedef struct lsirm_options {
  int32_t model;        /* lsirm_model */
  int32_t family;       /* lsirm_family */
  int32_t gamma_mode;   /* lsirm_gamma_mode */
  int32_t missing_mode; /* lsirm_missing_mode */
  int32_t ndim;
  int32_t niter, nburn, nthin, nprint;
  uint64_t seed;
  double pr_mean_theta;
  double pr_mean_beta, pr_sd_beta;
  double pr_mean_alpha, pr_sd_alpha;
  double pr_mean_gamma, pr_sd_gamma;
  double pr_spike_mean, pr_spike_sd; /* spike component of the spike-and-slab prior */
  double pr_a_theta, pr_b_theta;
  double pr_a_eps, pr_b_eps;
  double jump_theta, jump_beta, jump_alpha, jump_gamma, jump_z, jump_w;
} lsirm_options;

lsirm_status lsirm_options_init(lsirm_options* opts);

/* Receives one preformatted progress line per nprint sweeps. */
typedef void (*lsirm_progress_fn)(const char* line, void* user);

/* Runs the chain, aligns the latent draws and computes point estimates. When
 * progress is NULL, progress lines go to standard output. */
lsirm_status lsirm_fit_run(const lsirm_matrix* data, const lsirm_options* opts,
                           lsirm_progress_fn progress, void* user, lsirm_fit** out);

/* Writes sample blocks, manifest.json, summary.json and data.csv. */
lsirm_status lsirm_fit_save(const lsirm_fit* fit, const char* dir);

lsirm_status lsirm_fit_load(const char* dir, lsirm_fit** out);

void lsirm_fit_free(lsirm_fit* fit);

lsirm_status lsirm_fit_dims(const lsirm_fit* fit, int32_t* n, int32_t* p, int32_t* ndim,
                            int32_t* n_samples, int64_t* n_missing);

/* Copies the named quantity into buf (pass buf = NULL to query the length).
 * Names: theta_estimate, beta_estimate, alpha_estimate, gamma_estimate,
 * sigma_theta_estimate, sigma_eps_estimate, pi_estimate, imp_estimate,
 * z_estimate, w_estimate (row-major), accept_theta, accept_beta, accept_alpha,
 * accept_z, accept_w, accept_gamma, log_posterior, gamma_samples,
 * reference_index. */
lsirm_status lsirm_fit_get(const lsirm_fit* fit, const char* name, double* buf, int64_t buflen,
                           int64_t* len_out);

lsirm_status lsirm_fit_summary_json(const lsirm_fit* fit, char** json_out);

/* Human-readable tables; also written as CSV files when table_dir is given. */
lsirm_status lsirm_fit_summarize_text(const lsirm_fit* fit, const char* table_dir, char** text_out);

/* Writes aligned point-estimate coordinates; rotate_oblimin != 0 applies the
 * oblimin rotation first and records the transform in the sidecar JSON. */
lsirm_status lsirm_fit_export_map(const lsirm_fit* fit, const char* csv_path, int rotate_oblimin,
                                  const char* sidecar_json_path);

/* ---- synthetic data ---- */

typedef struct lsirm_synth_options {
  int32_t n, p;
  int32_t model;  /* lsirm_model */
  int32_t family; /* lsirm_family */
  int32_t ndim;
  double gamma; /* 0 recovers the plain IRT model */
  double sigma_sq;
  double sigma_eps_sq;
  double missing_rate; /* uniform-random masking, MCAR by construction */
  int32_t layout;      /* lsirm_layout */
  int32_t n_clusters;
  double cluster_radius, cluster_spread;
  uint64_t seed;
} lsirm_synth_options;

lsirm_status lsirm_synth_init(lsirm_synth_options* opts);

lsirm_status lsirm_synth_generate(const lsirm_synth_options* opts, const char* csv_path,
                                  const char* truth_json_path);

#ifdef __cplusplus
}
#endif

#endif /* LSIRM_H */
