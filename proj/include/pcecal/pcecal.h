#ifndef PCECAL_H
#define PCECAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(PCECAL_BUILDING)
#define PCECAL_API __attribute__((visibility("default")))
#else
#define PCECAL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every function returning pcecal_status leaves a message retrievable with
 * pcecal_last_error() on the calling thread when it fails. Output handles are
 * only written on success. Matrices are row-major. */

typedef enum pcecal_status {
    PCECAL_OK = 0,
    PCECAL_E_INVALID_ARGUMENT = 1,
    PCECAL_E_DOMAIN = 2,
    PCECAL_E_SHAPE = 3,
    PCECAL_E_PRECONDITION = 4,
    PCECAL_E_NUMERICAL = 5,
    PCECAL_E_CAPACITY = 6,
    PCECAL_E_IO = 7,
    PCECAL_E_PARSE = 8,
    PCECAL_E_PARTIAL = 9,
    PCECAL_E_INTERNAL = 10
} pcecal_status;

PCECAL_API const char* pcecal_version(void);
PCECAL_API const char* pcecal_last_error(void);
PCECAL_API const char* pcecal_status_name(pcecal_status status);

/* ---- parameter space ---------------------------------------------------- */

typedef struct pcecal_space pcecal_space;

/* nominal may be NULL; otherwise entries that are NaN mean "no default". */
PCECAL_API pcecal_status pcecal_space_create(size_t dim, const char* const* names, const double* lower,
                                             const double* upper, const double* nominal, pcecal_space** out);
PCECAL_API void pcecal_space_free(pcecal_space* space);
PCECAL_API size_t pcecal_space_dim(const pcecal_space* space);
PCECAL_API const char* pcecal_space_name(const pcecal_space* space, size_t i);
PCECAL_API pcecal_status pcecal_space_bounds(const pcecal_space* space, size_t i, double* lower, double* upper);
PCECAL_API pcecal_status pcecal_space_nominal(const pcecal_space* space, double* p);
PCECAL_API pcecal_status pcecal_space_to_canonical(const pcecal_space* space, const double* p, double* xi);
PCECAL_API pcecal_status pcecal_space_from_canonical(const pcecal_space* space, const double* xi, double* p);
/* -inf outside the box. */
PCECAL_API double pcecal_space_log_prior(const pcecal_space* space, const double* p);

/* ---- basis ---------------------------------------------------------------- */

PCECAL_API pcecal_status pcecal_basis_size(size_t dim, unsigned order, size_t* size);
/* alpha receives dim entries. */
PCECAL_API pcecal_status pcecal_basis_index(size_t dim, unsigned order, size_t k, unsigned* alpha);

/* ---- designs -------------------------------------------------------------- */

typedef struct pcecal_design pcecal_design;

PCECAL_API pcecal_status pcecal_design_smolyak(size_t dim, int level, pcecal_design** out);
PCECAL_API pcecal_status pcecal_design_random(size_t dim, size_t n, uint64_t seed, pcecal_design** out);
/* weights may be NULL. */
PCECAL_API pcecal_status pcecal_design_from_nodes(size_t n, size_t dim, const double* nodes, const double* weights,
                                                  pcecal_design** out);
/* Lower-level Smolyak grid nested in a Smolyak design. */
PCECAL_API pcecal_status pcecal_design_subset(const pcecal_design* design, int lower_level, pcecal_design** out);
PCECAL_API pcecal_status pcecal_design_read(const char* path, pcecal_design** out);
PCECAL_API pcecal_status pcecal_design_write(const pcecal_design* design, const char* path);
PCECAL_API void pcecal_design_free(pcecal_design* design);
PCECAL_API size_t pcecal_design_size(const pcecal_design* design);
PCECAL_API size_t pcecal_design_dim(const pcecal_design* design);
/* -1 unless the design is a Smolyak grid. */
PCECAL_API int pcecal_design_level(const pcecal_design* design);
PCECAL_API int pcecal_design_has_weights(const pcecal_design* design);
PCECAL_API pcecal_status pcecal_design_nodes(const pcecal_design* design, double* nodes);
PCECAL_API pcecal_status pcecal_design_weights(const pcecal_design* design, double* weights);

/* ---- ensembles ------------------------------------------------------------ */

typedef struct pcecal_ensemble pcecal_ensemble;

PCECAL_API pcecal_status pcecal_ensemble_create(const pcecal_design* design, const double* values,
                                                pcecal_ensemble** out);
PCECAL_API pcecal_status pcecal_ensemble_read(const char* path, pcecal_ensemble** out);
PCECAL_API pcecal_status pcecal_ensemble_write(const pcecal_ensemble* ensemble, const char* path);
/* Rows of the ensemble at the nodes of design, which supplies the weights. */
PCECAL_API pcecal_status pcecal_ensemble_restrict(const pcecal_ensemble* ensemble, const pcecal_design* design,
                                                  pcecal_ensemble** out);
PCECAL_API void pcecal_ensemble_free(pcecal_ensemble* ensemble);
PCECAL_API size_t pcecal_ensemble_size(const pcecal_ensemble* ensemble);
PCECAL_API size_t pcecal_ensemble_dim(const pcecal_ensemble* ensemble);
PCECAL_API int pcecal_ensemble_has_weights(const pcecal_ensemble* ensemble);
PCECAL_API pcecal_status pcecal_ensemble_nodes(const pcecal_ensemble* ensemble, double* nodes);
PCECAL_API pcecal_status pcecal_ensemble_values(const pcecal_ensemble* ensemble, double* values);

/* ---- forward models ------------------------------------------------------- */

typedef struct pcecal_expansion pcecal_expansion;

/* Output range of the bundled smooth 5D model and its default noise level (5% of it). */
PCECAL_API double pcecal_smooth_model_range(void);
PCECAL_API double pcecal_smooth_model_default_sigma(void);
/* values receives design size entries; noise is a hash of (seed, node). */
PCECAL_API pcecal_status pcecal_evaluate_smooth(const pcecal_design* design, double noise_sigma, uint64_t seed,
                                                double* values);
PCECAL_API pcecal_status pcecal_evaluate_planted(const pcecal_design* design, const pcecal_expansion* truth,
                                                 double noise_sigma, uint64_t seed, double* values);

typedef struct pcecal_external_spec {
    const char* work_dir;
    const char* input_template; /* NULL or "" -> one "name = value" line per parameter */
    const char* input_file;     /* NULL -> "input.txt" */
    const char* command;        /* NULL or "" -> manifest only */
    const char* output_file;    /* NULL -> "output.txt" */
    const char* output_key;     /* NULL or "" -> use output_column */
    long output_column;         /* < 0 -> unset */
    double timeout_seconds;     /* <= 0 -> no limit */
} pcecal_external_spec;

typedef struct pcecal_run_summary {
    size_t completed;
    size_t pending;
    size_t failed;
} pcecal_run_summary;

PCECAL_API void pcecal_external_spec_default(pcecal_external_spec* spec);
/* Returns PCECAL_E_PARTIAL with *out set to the completed rows (or NULL when
 * none completed) when some nodes are still pending. */
PCECAL_API pcecal_status pcecal_run_ensemble(const pcecal_external_spec* spec, const pcecal_design* design,
                                             const pcecal_space* space, pcecal_ensemble** out,
                                             pcecal_run_summary* summary);

/* ---- fitting ---------------------------------------------------------------- */

PCECAL_API pcecal_status pcecal_fit_nisp(const pcecal_ensemble* ensemble, unsigned order, pcecal_expansion** out);

typedef struct pcecal_bpdn_options {
    int has_delta;            /* nonzero -> use delta, else cross-validate */
    double delta;             /* absolute residual budget */
    size_t cv_folds;
    const double* delta_grid; /* relative to |E|_2; NULL -> default grid */
    size_t n_delta_grid;
    size_t max_iters;
    double opt_tol;
    uint64_t seed;
    unsigned threads;         /* 0 -> hardware concurrency */
} pcecal_bpdn_options;

typedef struct pcecal_bpdn_report pcecal_bpdn_report;

typedef struct pcecal_bpdn_summary {
    double chosen_delta;
    double residual_norm;
    double l1_norm;
    size_t iterations;
    int converged;
    int cross_validated;
    const char* exit_reason; /* static string */
} pcecal_bpdn_summary;

PCECAL_API void pcecal_bpdn_options_default(pcecal_bpdn_options* options);
/* report may be NULL. */
PCECAL_API pcecal_status pcecal_fit_bpdn(const pcecal_ensemble* ensemble, unsigned order,
                                         const pcecal_bpdn_options* options, pcecal_expansion** out,
                                         pcecal_bpdn_report** report);
PCECAL_API void pcecal_bpdn_report_free(pcecal_bpdn_report* report);
PCECAL_API void pcecal_bpdn_report_summary(const pcecal_bpdn_report* report, pcecal_bpdn_summary* summary);
PCECAL_API size_t pcecal_bpdn_report_cv_folds(const pcecal_bpdn_report* report);
PCECAL_API size_t pcecal_bpdn_report_cv_grid_size(const pcecal_bpdn_report* report);
/* grid, mean_errors: grid size; errors: folds x grid. Any may be NULL. */
PCECAL_API pcecal_status pcecal_bpdn_report_cv(const pcecal_bpdn_report* report, double* grid, double* mean_errors,
                                               double* errors);
PCECAL_API pcecal_status pcecal_bpdn_report_write_cv(const pcecal_bpdn_report* report, const char* path);

/* ---- surrogate ------------------------------------------------------------ */

typedef enum pcecal_fit_method { PCECAL_FIT_NISP = 0, PCECAL_FIT_BPDN = 1 } pcecal_fit_method;

PCECAL_API pcecal_status pcecal_expansion_create(size_t dim, unsigned order, const double* coefficients,
                                                 pcecal_fit_method method, pcecal_expansion** out);
PCECAL_API pcecal_status pcecal_expansion_read(const char* path, pcecal_expansion** out);
PCECAL_API pcecal_status pcecal_expansion_write(const pcecal_expansion* expansion, const char* path);
PCECAL_API void pcecal_expansion_free(pcecal_expansion* expansion);
PCECAL_API size_t pcecal_expansion_dim(const pcecal_expansion* expansion);
PCECAL_API unsigned pcecal_expansion_order(const pcecal_expansion* expansion);
PCECAL_API size_t pcecal_expansion_size(const pcecal_expansion* expansion);
PCECAL_API pcecal_fit_method pcecal_expansion_method(const pcecal_expansion* expansion);
PCECAL_API pcecal_status pcecal_expansion_coefficients(const pcecal_expansion* expansion, double* coefficients);
/* Appends a provenance entry carried into the coefficient file. */
PCECAL_API pcecal_status pcecal_expansion_add_metadata(pcecal_expansion* expansion, const char* key,
                                                       const char* value);
PCECAL_API size_t pcecal_expansion_metadata_count(const pcecal_expansion* expansion);
PCECAL_API pcecal_status pcecal_expansion_metadata(const pcecal_expansion* expansion, size_t i, const char** key,
                                                   const char** value);

PCECAL_API pcecal_status pcecal_expansion_eval(const pcecal_expansion* expansion, const double* xi, double* value);
PCECAL_API pcecal_status pcecal_expansion_predict(const pcecal_expansion* expansion, const pcecal_design* design,
                                                  double* values);
PCECAL_API double pcecal_expansion_mean(const pcecal_expansion* expansion);
PCECAL_API double pcecal_expansion_variance(const pcecal_expansion* expansion);
/* indices receives dim entries. */
PCECAL_API pcecal_status pcecal_expansion_total_sensitivity(const pcecal_expansion* expansion, double* indices);
PCECAL_API pcecal_status pcecal_expansion_nre(const pcecal_expansion* expansion, const pcecal_ensemble* ensemble,
                                              double* nre);
/* ratios and degrees receive size entries: |e_k/e_0| and total degree of term k. */
PCECAL_API pcecal_status pcecal_expansion_spectrum(const pcecal_expansion* expansion, double* ratios,
                                                   unsigned* degrees);
/* means receives order + 1 entries. */
PCECAL_API pcecal_status pcecal_expansion_band_means(const pcecal_expansion* expansion, double* means);
PCECAL_API pcecal_status pcecal_expansion_write_spectrum(const pcecal_expansion* expansion, const char* path);
/* fixed may be NULL (origin). x and y receive points entries. */
PCECAL_API pcecal_status pcecal_expansion_response_slice(const pcecal_expansion* expansion, size_t axis,
                                                         const double* fixed, size_t points, double* x, double* y);
/* z receives points x points entries, z[a * points + b] at (x[a], y[b]). */
PCECAL_API pcecal_status pcecal_expansion_response_surface(const pcecal_expansion* expansion, size_t axis_i,
                                                           size_t axis_j, const double* fixed, size_t points,
                                                           double* x, double* y, double* z);

/* ---- densities ------------------------------------------------------------ */

typedef struct pcecal_density pcecal_density;

/* bandwidth <= 0 -> Silverman's rule. */
PCECAL_API pcecal_status pcecal_kde(const double* samples, size_t n, size_t n_grid, double bandwidth,
                                    pcecal_density** out);
PCECAL_API pcecal_status pcecal_expansion_sample_pdf(const pcecal_expansion* expansion, size_t n_samples,
                                                     uint64_t seed, size_t n_grid, pcecal_density** out);
PCECAL_API void pcecal_density_free(pcecal_density* density);
PCECAL_API size_t pcecal_density_size(const pcecal_density* density);
PCECAL_API double pcecal_density_bandwidth(const pcecal_density* density);
PCECAL_API double pcecal_density_integral(const pcecal_density* density);
PCECAL_API pcecal_status pcecal_density_values(const pcecal_density* density, double* grid, double* values);
/* label may be NULL. */
PCECAL_API pcecal_status pcecal_density_write(const pcecal_density* density, const char* label, const char* path);

/* ---- calibration ---------------------------------------------------------- */

typedef struct pcecal_mcmc_options {
    double ke;
    double alpha;
    double beta;
    size_t n_iters;
    size_t burn_in;
    const double* proposal_scales; /* dim entries in canonical units; NULL -> 0.1 */
    uint64_t seed;
    size_t tune_iters;             /* discarded adaptive pre-run */
    int has_fixed_scale;           /* nonzero -> hold S at fixed_scale */
    double fixed_scale;
    const double* initial;         /* physical start; NULL -> nominal */
} pcecal_mcmc_options;

/* Cost statistic E(p) at physical p; return NaN to signal failure. */
typedef double (*pcecal_cost_fn)(const double* p, size_t dim, void* user);

typedef struct pcecal_chain pcecal_chain;

PCECAL_API void pcecal_mcmc_options_default(pcecal_mcmc_options* options);
PCECAL_API pcecal_status pcecal_mcmc_run(const pcecal_space* space, const pcecal_expansion* surrogate,
                                         const pcecal_mcmc_options* options, pcecal_chain** out);
PCECAL_API pcecal_status pcecal_mcmc_run_cost(const pcecal_space* space, pcecal_cost_fn cost, void* user,
                                              const pcecal_mcmc_options* options, pcecal_chain** out);
/* Scaled log-posterior of (p, S) with the surrogate as cost; -inf outside the support. */
PCECAL_API pcecal_status pcecal_log_posterior(const pcecal_space* space, const pcecal_expansion* surrogate,
                                              double ke, double alpha, double beta, const double* p, double scale,
                                              double* value);

PCECAL_API pcecal_status pcecal_chain_read(const char* path, pcecal_chain** out);
/* Writes rows from burn-in on. */
PCECAL_API pcecal_status pcecal_chain_write(const pcecal_chain* chain, const char* path);
PCECAL_API void pcecal_chain_free(pcecal_chain* chain);
PCECAL_API size_t pcecal_chain_size(const pcecal_chain* chain);
PCECAL_API size_t pcecal_chain_dim(const pcecal_chain* chain);
PCECAL_API size_t pcecal_chain_burn_in(const pcecal_chain* chain);
PCECAL_API double pcecal_chain_acceptance_rate(const pcecal_chain* chain);
PCECAL_API const char* pcecal_chain_name(const pcecal_chain* chain, size_t i);
/* coord < dim selects a parameter, coord == dim selects S. values receives size - from entries. */
PCECAL_API pcecal_status pcecal_chain_column(const pcecal_chain* chain, size_t coord, size_t from, double* values);
PCECAL_API pcecal_status pcecal_chain_log_posterior(const pcecal_chain* chain, double* values);
PCECAL_API pcecal_status pcecal_chain_proposal_scales(const pcecal_chain* chain, double* scales);
/* (size - from) x (dim + 1) cumulative means of parameters and S. */
PCECAL_API pcecal_status pcecal_chain_running_mean(const pcecal_chain* chain, size_t from, double* means);

#ifdef __cplusplus
}
#endif

#endif
