#ifndef EEGWPD_H
#define EEGWPD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define EEGWPD_SEGMENT_FEATURES 96

#define EEGWPD_AGGREGATED_FEATURES 4032

typedef enum EegwpdStatus {
  EEGWPD_STATUS_OK = 0,
  EEGWPD_STATUS_NULL_POINTER = 1,
  EEGWPD_STATUS_INVALID_ARGUMENT = 2,
  EEGWPD_STATUS_IO = 3,
  EEGWPD_STATUS_CORRUPT_MODEL = 4,
  EEGWPD_STATUS_UNSUPPORTED_VERSION = 5,
  EEGWPD_STATUS_SHAPE_MISMATCH = 6,
  EEGWPD_STATUS_SIGNAL_ERROR = 7,
  EEGWPD_STATUS_FEATURE_ERROR = 8,
  EEGWPD_STATUS_UNDEFINED_METRIC = 9,
  EEGWPD_STATUS_PANIC = 10,
} EegwpdStatus;

typedef enum EegwpdExtension {
  EEGWPD_EXTENSION_PERIODIC = 0,
  EEGWPD_EXTENSION_SYMMETRIC = 1,
} EegwpdExtension;

/**
 * Opaque trained model.
 */
typedef struct EegwpdModel EegwpdModel;

/**
 * Percentages in `[0, 100]`.
 */
typedef struct EegwpdMetrics {
  double accuracy;
  double sensitivity;
  double specificity;
} EegwpdMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *eegwpd_last_error_message(void);

/**
 * Loads a `WPDM` model file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum EegwpdStatus eegwpd_model_load(const char *path, struct EegwpdModel **out);

/**
 * Releases a model. NULL is ignored.
 *
 * # Safety
 * `model` must come from [`eegwpd_model_load`] and not be freed twice.
 */
void eegwpd_model_free(struct EegwpdModel *model);

/**
 * Number of features a row must have, or 0 for NULL.
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
size_t eegwpd_model_feature_count(const struct EegwpdModel *model);

/**
 * Probability of the abnormal class for one feature row.
 *
 * # Safety
 * `row` must point to `len` doubles and `out` to one writable double.
 */
enum EegwpdStatus eegwpd_model_predict_proba(const struct EegwpdModel *model,
                                             const double *row,
                                             size_t len,
                                             double *out);

/**
 * Probabilities for `rows` row-major feature rows of `cols` values.
 *
 * # Safety
 * `data` must point to `rows * cols` doubles and `out` to `rows` doubles.
 */
enum EegwpdStatus eegwpd_model_predict_batch(const struct EegwpdModel *model,
                                             const double *data,
                                             size_t rows,
                                             size_t cols,
                                             double *out);

/**
 * The 96 features of one segment (16 sub-bands × MAV, AVP, SD, RMAV,
 * SKEW, KURT), standardized across the vector when `normalize` is nonzero.
 *
 * # Safety
 * `segment` must point to `len` doubles and `out` to 96 writable doubles.
 */
enum EegwpdStatus eegwpd_segment_features(const double *segment,
                                          size_t len,
                                          enum EegwpdExtension extension,
                                          int32_t normalize,
                                          double *out);

/**
 * The 4032-value aggregated vector of a recording given as `n_channels`
 * rows of `n_samples` values with their electrode labels.
 *
 * # Safety
 * `data` must point to `n_channels * n_samples` doubles, `labels` to
 * `n_channels` NUL-terminated strings and `out` to 4032 doubles.
 */
enum EegwpdStatus eegwpd_recording_features(const double *data,
                                            const char *const *labels,
                                            size_t n_channels,
                                            size_t n_samples,
                                            double sample_rate,
                                            enum EegwpdExtension extension,
                                            double *out);

/**
 * Accuracy, sensitivity and specificity from confusion counts.
 *
 * # Safety
 * `out` must point to a writable [`EegwpdMetrics`].
 */
enum EegwpdStatus eegwpd_metrics(uint64_t tp,
                                 uint64_t fn_,
                                 uint64_t tn,
                                 uint64_t fp,
                                 struct EegwpdMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EEGWPD_H */
