#ifndef SERPBIAS_H
#define SERPBIAS_H

/* Generated by cbindgen from serpbias-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a serpbias call. `OK` is zero; everything else is an error.
typedef enum SerpbiasStatus {
  SERPBIAS_STATUS_OK = 0,
  // A required pointer argument was null.
  SERPBIAS_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  SERPBIAS_STATUS_INVALID_UTF8 = 2,
  // A file could not be read or written.
  SERPBIAS_STATUS_IO = 3,
  // An input file exists but its contents are malformed.
  SERPBIAS_STATUS_MALFORMED = 4,
  // Arguments or data violate an invariant.
  SERPBIAS_STATUS_INVALID = 5,
  // A statistic is undefined for the given sample.
  SERPBIAS_STATUS_DEGENERATE = 6,
  // An internal panic was caught at the boundary.
  SERPBIAS_STATUS_PANIC = 7,
} SerpbiasStatus;

// Loaded, validated dataset handle.
typedef struct SerpbiasDataset SerpbiasDataset;

// Aggregated stance labels handle.
typedef struct SerpbiasLabels SerpbiasLabels;

// Completed audit handle.
typedef struct SerpbiasReport SerpbiasReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Returns the error message of the most recent failing call on this
// thread, or NULL if none. Free with `serpbias_string_free`.
char *serpbias_last_error_message(void);

// Frees a string returned by this library. NULL is a no-op.
//
// # Safety
// `s` must be NULL or a pointer obtained from this library and not yet
// freed.
void serpbias_string_free(char *s);

// Loads and validates a dataset from a TOML manifest path.
//
// # Safety
// `manifest_path` must be a NUL-terminated string; `out` must be a
// valid pointer.
enum SerpbiasStatus serpbias_dataset_load(const char *manifest_path, struct SerpbiasDataset **out);

// Returns a short human-readable description of a dataset, e.g.
// "8 SERPs, 2 topics". Free with `serpbias_string_free`.
//
// # Safety
// `dataset` must be a live handle from `serpbias_dataset_load`.
char *serpbias_dataset_summary(const struct SerpbiasDataset *dataset);

// Frees a dataset handle. NULL is a no-op.
//
// # Safety
// `dataset` must be NULL or a live handle, not yet freed.
void serpbias_dataset_free(struct SerpbiasDataset *dataset);

// Creates an empty label store.
//
// # Safety
// `out` must be a valid pointer.
enum SerpbiasStatus serpbias_labels_new(struct SerpbiasLabels **out);

// Loads a judgments CSV ("doc_id,worker_id,stance") into the store
// under the given location ("UK" or "US"). May be called repeatedly.
//
// # Safety
// `labels` must be a live handle; `location` and `path` must be
// NUL-terminated strings.
enum SerpbiasStatus serpbias_labels_load(struct SerpbiasLabels *labels,
                                         const char *location,
                                         const char *path);

// Frees a label store handle. NULL is a no-op.
//
// # Safety
// `labels` must be NULL or a live handle, not yet freed.
void serpbias_labels_free(struct SerpbiasLabels *labels);

// Runs the default audit plan: existence tests on mean bias, paired
// engine and location comparisons, and retrieval-performance tests,
// with Bonferroni correction over the bias-test family.
//
// `k` is the rank cutoff (10 in the standard protocol);
// `rbp_persistence` is the RBP parameter in (0, 1).
//
// # Safety
// `dataset` and `labels` must be live handles; `out` must be a valid
// pointer.
enum SerpbiasStatus serpbias_audit_run(const struct SerpbiasDataset *dataset,
                                       const struct SerpbiasLabels *labels,
                                       double alpha,
                                       size_t k,
                                       double rbp_persistence,
                                       struct SerpbiasReport **out);

// Returns the full audit result as a JSON document. Free with
// `serpbias_string_free`.
//
// # Safety
// `report` must be a live handle from `serpbias_audit_run`.
char *serpbias_report_summary_json(const struct SerpbiasReport *report);

// Writes every rendered output (tables, figure data, summary.json)
// under `out_dir`, using default engine names and numeric p-values.
//
// # Safety
// `report` must be a live handle; `out_dir` must be a NUL-terminated
// string.
enum SerpbiasStatus serpbias_report_write(const struct SerpbiasReport *report, const char *out_dir);

// Frees a report handle. NULL is a no-op.
//
// # Safety
// `report` must be NULL or a live handle, not yet freed.
void serpbias_report_free(struct SerpbiasReport *report);

// Two-tailed p-value of a t statistic with `df` degrees of freedom.
// Returns NaN if `df` is zero.
double serpbias_t_two_tailed_p(double t, uint32_t df);

// Bonferroni correction: writes `alpha / m` and the uncorrected
// family-wise error rate `1 - (1 - alpha)^m` to the output pointers.
//
// # Safety
// `adjusted_alpha_out` and `fwer_out` must each be NULL or valid.
enum SerpbiasStatus serpbias_bonferroni(double alpha,
                                        uint32_t m,
                                        double *adjusted_alpha_out,
                                        double *fwer_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SERPBIAS_H */
