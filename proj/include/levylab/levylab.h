#ifndef LEVYLAB_H
#define LEVYLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LEVYLAB_API __declspec(dllexport)
#else
#define LEVYLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum levylab_status {
    LEVYLAB_OK = 0,
    LEVYLAB_PARAMETER_DOMAIN = 1,
    LEVYLAB_UNSUPPORTED_PARAMETRIZATION = 2,
    LEVYLAB_NUMERICAL = 3,
    LEVYLAB_FIT = 4,
    LEVYLAB_SHAPE = 5,
    LEVYLAB_ARGUMENT = 6,
    LEVYLAB_INSUFFICIENT_DATA = 7,
    LEVYLAB_DEGENERATE_DATA = 8,
    LEVYLAB_GRID_TOO_SMALL = 9,
    LEVYLAB_DRIFT_OVERFLOW = 10,
    LEVYLAB_CONFIG = 11,
    LEVYLAB_IO = 12,
    LEVYLAB_INTERNAL = 100
} levylab_status;

typedef struct levylab_config levylab_config;
typedef struct levylab_result levylab_result;

LEVYLAB_API const char* levylab_version(void);
/* Message of the last failure on the calling thread; empty when none. */
LEVYLAB_API const char* levylab_last_error(void);
LEVYLAB_API const char* levylab_status_name(levylab_status status);
/* Process exit code for a status: 0 success, 2 configuration, 1 numerical. */
LEVYLAB_API int levylab_exit_code(levylab_status status);

/* JSON object listing run options and subcommands with their parameters. The
   pointer stays valid for the lifetime of the process. */
LEVYLAB_API const char* levylab_schema_json(void);

LEVYLAB_API levylab_status levylab_config_create(const char* subcommand, levylab_config** out);
LEVYLAB_API void levylab_config_destroy(levylab_config* config);
LEVYLAB_API levylab_status levylab_config_load_file(levylab_config* config, const char* path);
/* key may be "name", "run.name" or "<section>.name". */
LEVYLAB_API levylab_status levylab_config_set(levylab_config* config, const char* key, const char* value);
/* Caller frees *out with levylab_string_free. */
LEVYLAB_API levylab_status levylab_config_resolved_ini(const levylab_config* config, char** out);
LEVYLAB_API void levylab_string_free(char* s);

LEVYLAB_API levylab_status levylab_run(const levylab_config* config, levylab_result** out);
/* Borrowed from the result; valid until levylab_result_destroy. */
LEVYLAB_API const char* levylab_result_summary_json(const levylab_result* result);
LEVYLAB_API const char* levylab_result_output_dir(const levylab_result* result);
LEVYLAB_API void levylab_result_destroy(levylab_result* result);

/* S_alpha(sigma, theta, mu) draws from stream (seed, stream_id) into out[0..n). */
LEVYLAB_API levylab_status levylab_stable_sample(double alpha, double sigma, double theta, double mu, uint64_t seed,
                                                 uint64_t stream_id, size_t n, double* out);
LEVYLAB_API levylab_status levylab_stable_pdf(double alpha, double sigma, double theta, double mu, double x,
                                              double* out);
/* Fractional Langevin drift on the quartic objective. */
LEVYLAB_API levylab_status levylab_quartic_drift(double w, double epsilon, double alpha, double theta, double h,
                                                 int K, int p, int q, int use_h0, double* out);
LEVYLAB_API levylab_status levylab_h0(double alpha, double epsilon, double* out);

#ifdef __cplusplus
}
#endif

#endif
