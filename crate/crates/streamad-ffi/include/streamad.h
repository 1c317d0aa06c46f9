/* C interface for the streamad streaming anomaly-detection library.
 *
 * All functions are thread-compatible: a detector handle must not be used
 * from two threads at once, but distinct handles are independent. Error
 * codes are negative; streamad_last_error() returns the most recent error
 * message for the calling thread.
 */

#ifndef STREAMAD_H
#define STREAMAD_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define STREAMAD_OK 0
#define STREAMAD_ERR_NULL (-1)
#define STREAMAD_ERR_INVALID (-2)
#define STREAMAD_ERR_RUNTIME (-3)
#define STREAMAD_ERR_PANIC (-4)

#define STREAMAD_KIND_LODA 0
#define STREAMAD_KIND_RSHASH 1
#define STREAMAD_KIND_XSTREAM 2

/* Opaque detector handle. */
typedef struct StreamadDetector StreamadDetector;

/* Create a detector of the given kind over `dimension` features.
 * r = 0 selects the kind's default ensemble size. fixed_point != 0 selects
 * Q16.16 truncate-and-wrap arithmetic. Returns NULL on error. */
StreamadDetector *streamad_detector_new(int kind,
                                        size_t dimension,
                                        size_t r,
                                        uint64_t seed,
                                        int fixed_point);

/* Destroy a handle. NULL is a no-op. */
void streamad_detector_free(StreamadDetector *det);

/* Calibrate on n_samples row-major samples (n_samples * dimension doubles). */
int streamad_detector_calibrate(StreamadDetector *det,
                                const double *data,
                                size_t n_samples);

/* Score one sample; len must equal the detector dimension. */
int streamad_detector_process(StreamadDetector *det,
                              const double *features,
                              size_t len,
                              double *score_out);

/* Score n_samples row-major samples into scores_out (n_samples doubles). */
int streamad_detector_process_stream(StreamadDetector *det,
                                     const double *data,
                                     size_t n_samples,
                                     double *scores_out);

/* Clear window state and op counters; calibration is kept. */
int streamad_detector_reset(StreamadDetector *det);

/* Operations executed so far under the documented counting policy. */
int streamad_detector_ops(const StreamadDetector *det, uint64_t *ops_out);

/* Rank-based ROC-AUC of scores against binary labels (1 = anomaly). */
int streamad_auc(const double *scores,
                 const uint8_t *labels,
                 size_t n,
                 double *auc_out);

/* Deterministic synthetic labeled stream: n * d doubles into features_out,
 * n bytes into labels_out. */
int streamad_gen_synthetic(size_t n,
                           size_t d,
                           double contamination,
                           uint64_t seed,
                           double *features_out,
                           uint8_t *labels_out);

/* Message of the most recent error on this thread (NUL-terminated; valid
 * until the next failing call on the same thread). */
const char *streamad_last_error(void);

#ifdef __cplusplus
}
#endif

#endif /* STREAMAD_H */
