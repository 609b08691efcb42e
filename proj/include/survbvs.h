/*
 * survbvs - Bayesian variable selection for censored survival data.
 *
 * C API for the shared library. All functions return one of the status
 * codes below; on failure survbvs_last_error() describes the problem.
 * Handles are opaque and must be released with the matching _free call.
 * Output strings are heap-allocated; release with survbvs_free_string.
 *
 * All runs are deterministic given (inputs, seed, config), independent of
 * the thread count.
 */

#ifndef SURVBVS_H
#define SURVBVS_H

#ifdef __cplusplus
extern "C" {
#endif

#define SURVBVS_OK 0
#define SURVBVS_ERR_VALIDATION 2 /* bad input data or config */
#define SURVBVS_ERR_NUMERIC 3    /* numerical failure */

typedef struct survbvs_dataset survbvs_dataset;

const char* survbvs_version(void);

/* Message for the most recent failing call on this thread. */
const char* survbvs_last_error(void);

/*
 * Load a CSV/TSV file (header row required). fixed_cols is a comma-separated
 * list of column names always kept in every model (may be NULL or empty).
 * Categorical fixed columns are expanded to reference-coded indicators.
 * standardize != 0 centers/scales the non-fixed columns.
 */
int survbvs_dataset_read_csv(const char* path, const char* time_col,
                             const char* status_col, const char* fixed_cols,
                             int standardize, survbvs_dataset** out);

/*
 * Build a dataset from arrays. design is row-major n x p. column_names may
 * be NULL (columns are named x1..xp). fixed_cols holds 0-based indices.
 */
int survbvs_dataset_from_arrays(int n, int p, const double* times,
                                const int* status, const double* design,
                                const char* const* column_names,
                                const int* fixed_cols, int n_fixed,
                                int standardize, survbvs_dataset** out);

int survbvs_dataset_n(const survbvs_dataset* ds);
int survbvs_dataset_p(const survbvs_dataset* ds);
int survbvs_dataset_n_events(const survbvs_dataset* ds);
void survbvs_dataset_free(survbvs_dataset* ds);

/*
 * Pipeline runs. config_json may be NULL/empty for defaults; see the
 * library README for the key reference. Each call fills *out with a
 * malloc'd report (JSON for select, CSV for the others).
 */
int survbvs_select(const survbvs_dataset* ds, const char* config_json,
                   char** out);
int survbvs_tune(const survbvs_dataset* ds, const char* config_json,
                 char** out);
int survbvs_simulate(const char* config_json, char** out);
int survbvs_evaluate(const survbvs_dataset* ds, const char* config_json,
                     char** out);
int survbvs_predict(const survbvs_dataset* ds, const char* config_json,
                    char** out);

void survbvs_free_string(char* s);

#ifdef __cplusplus
}
#endif

#endif /* SURVBVS_H */
