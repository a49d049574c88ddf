/* SPDX-License-Identifier: Apache-2.0 */
#ifndef WILDFIRE_WILDFIRE_H
#define WILDFIRE_WILDFIRE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(WFD_BUILDING_LIBRARY)
#define WFD_API __attribute__((visibility("default")))
#else
#define WFD_API
#endif

typedef enum wfd_status {
    WFD_OK = 0,
    WFD_CONFIG_ERROR = 1,
    WFD_DATA_ERROR = 2,
    WFD_IO_ERROR = 3,
    WFD_INTERNAL_ERROR = 4,
    WFD_INVALID_ARGUMENT = 5
} wfd_status;

WFD_API const char* wfd_version(void);
WFD_API const char* wfd_status_name(wfd_status status);
/* Process exit code: 0 success, 1 user/config/io, 2 data, 3 internal. */
WFD_API int wfd_exit_code(wfd_status status);

/* Details of the last failure on the calling thread; empty strings after success. */
WFD_API const char* wfd_last_error_message(void);
WFD_API const char* wfd_last_error_kind(void);
WFD_API const char* wfd_last_error_category(void);

typedef struct wfd_run_options {
    const char* config_path; /* NULL: built-in defaults */
    const char* out_dir;     /* NULL: paths.out from the config */
    const char* model;       /* rf, gbt or lstm */
    const char* input;
    const char* output;
    size_t threads;
    uint64_t seed;
    int has_seed;
    int split_year;
    int has_split_year;
} wfd_run_options;

WFD_API void wfd_run_options_init(wfd_run_options* options);
/* ingest, tune, train, evaluate, report, predict or synth. */
WFD_API wfd_status wfd_run(const char* subcommand, const wfd_run_options* options);

typedef struct wfd_model wfd_model;

WFD_API wfd_status wfd_model_load(const char* path, wfd_model** out);
WFD_API void wfd_model_free(wfd_model* model);
/* "rf", "gbt" or "lstm"; owned by the handle. */
WFD_API const char* wfd_model_kind(const wfd_model* model);
/* Day-unit predictions for rows in the cleaned CSV layout (CONT_DATE may be
 * empty). Writes at most `capacity` values and always sets *count to the
 * number of rows. */
WFD_API wfd_status wfd_model_predict_days(const wfd_model* model, const char* csv_text, double* out, size_t capacity,
                                          size_t* count);

/* Area-weighted centroid of a WKT or GeoJSON (multi)polygon. */
WFD_API wfd_status wfd_polygon_centroid(const char* text, double* latitude, double* longitude);

WFD_API wfd_status wfd_compute_metrics(const double* true_days, const double* pred_days, size_t n, double* mae,
                                       double* rmse, double* r2, int* r2_defined);
WFD_API double wfd_inverse_transform(double pred_log);

#ifdef __cplusplus
}
#endif

#endif
