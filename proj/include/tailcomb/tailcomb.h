/* C interface to the tailcomb library.
 *
 * Objects are opaque handles created by tc_*_create/parse/load and released
 * with the matching tc_*_free. Every fallible call returns a tc_status; on
 * failure tc_last_error() describes the problem (thread-local, valid until
 * the next call on the same thread). Strings returned through char** are
 * heap-allocated and released with tc_string_free.
 */
#ifndef TAILCOMB_TAILCOMB_H
#define TAILCOMB_TAILCOMB_H

#include <stddef.h>
#include <stdint.h>

#if defined(TAILCOMB_BUILDING_LIBRARY)
#define TAILCOMB_API __attribute__((visibility("default")))
#else
#define TAILCOMB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tc_status {
  TC_OK = 0,
  TC_ERR_DOMAIN = 1,    /* argument outside the mathematical domain */
  TC_ERR_CONFIG = 2,    /* inconsistent or malformed configuration */
  TC_ERR_NUMERICAL = 3, /* numerical routine failed */
  TC_ERR_INTERNAL = 4,
  TC_ERR_NULL_ARG = 5
} tc_status;

typedef enum tc_tail_scale { TC_PARETO1 = 0, TC_CAUCHY = 1, TC_FRECHET1 = 2 } tc_tail_scale;

typedef enum tc_honesty { TC_CALIBRATED = 0, TC_STRICTLY_HONEST = 1, TC_LIBERAL = 2 } tc_honesty;

typedef enum tc_direction { TC_TOP_EIGEN = 0, TC_BOTTOM_EIGEN = 1 } tc_direction;

typedef struct tc_combiner tc_combiner;
typedef struct tc_test tc_test;
typedef struct tc_measure tc_measure;
typedef struct tc_model tc_model;

TAILCOMB_API const char* tc_version(void);
TAILCOMB_API const char* tc_last_error(void);
TAILCOMB_API void tc_string_free(char* s);

/* Scalar functions. */
TAILCOMB_API tc_status tc_transform(tc_tail_scale scale, double p, double* out);
TAILCOMB_API tc_status tc_survival(tc_tail_scale scale, double x, double* out);
TAILCOMB_API tc_status tc_student_t_cdf(double x, double nu, double* out);
TAILCOMB_API tc_status tc_sidak_screen(double p_min, size_t m, double* out);
TAILCOMB_API tc_status tc_t_copula_lambda(double nu, double rho, double* out);

/* Combiners, e.g. "linear:w=0.5,0.5", "tippett", "powermean:gamma=2",
 * "maxlinear:blocks=1,2/3,4;w=0.5,0.5" (1-based block indices). */
TAILCOMB_API tc_status tc_combiner_parse(const char* spec, size_t d, tc_combiner** out);
TAILCOMB_API void tc_combiner_free(tc_combiner* c);
TAILCOMB_API size_t tc_combiner_dimension(const tc_combiner* c);
TAILCOMB_API tc_status tc_combiner_evaluate(const tc_combiner* c, const double* x, size_t n,
                                            double* out);
TAILCOMB_API tc_status tc_combiner_describe(const tc_combiner* c, char** out);

/* Options for tc_test_create. Zero-initialize and fill what applies.
 * Blocks are given as a flat list of 1-based indices plus per-block sizes. */
typedef struct tc_test_options {
  const double* weights;
  size_t n_weights;
  double gamma;
  const size_t* block_indices;
  const size_t* block_sizes;
  size_t n_blocks;
} tc_test_options;

/* name is one of pct, cct, tippett, fct, powermean; d is the number of input
 * p-values. `options` may be NULL. */
TAILCOMB_API tc_status tc_test_create(const char* name, size_t d, const tc_test_options* options,
                                      tc_test** out);
/* Same grammar as the CLI: "pct", "powermean:gamma=2", "fct:blocks=1,2/3,4". */
TAILCOMB_API tc_status tc_test_parse(const char* spec, size_t d, tc_test** out);
TAILCOMB_API void tc_test_free(tc_test* t);
TAILCOMB_API size_t tc_test_dimension(const tc_test* t);
TAILCOMB_API tc_status tc_combined_pvalue(const tc_test* t, const double* p, size_t n,
                                          double* out);

/* Angular measures (JSON document, schema version 1). */
TAILCOMB_API tc_status tc_measure_from_json(const char* json, tc_measure** out);
TAILCOMB_API tc_status tc_measure_load(const char* path, tc_measure** out);
TAILCOMB_API void tc_measure_free(tc_measure* m);
TAILCOMB_API size_t tc_measure_dimension(const tc_measure* m);
/* beta <= 0 keeps the measure's own tail index. */
TAILCOMB_API tc_status tc_asymptotic_ratio(const tc_combiner* c, const tc_measure* m, double beta,
                                           double* out);
TAILCOMB_API tc_status tc_classify(const tc_combiner* c, const tc_measure* m, double beta,
                                   double tol, tc_honesty* out);

/* Null models: preset string ("t,nu=1,d=10,sigma=ar:0.5") or model file. */
TAILCOMB_API tc_status tc_model_load(const char* preset_or_path, tc_model** out);
TAILCOMB_API tc_status tc_model_from_json(const char* json, tc_model** out);
TAILCOMB_API void tc_model_free(tc_model* m);
TAILCOMB_API size_t tc_model_dimension(const tc_model* m);
TAILCOMB_API tc_status tc_model_fingerprint(const tc_model* m, char** out);

/* Experiments. CSV/JSON output is returned as a string. workers = 0 uses
 * every hardware thread; results do not depend on it. */
TAILCOMB_API tc_status tc_calibrate(const tc_model* model, const char* const* tests,
                                    size_t n_tests, const double* alphas, size_t n_alphas,
                                    uint64_t n, uint64_t seed, unsigned workers, char** csv);
/* Merges calibration CSVs (e.g. one per model) into one sorted CSV. */
TAILCOMB_API tc_status tc_calibration_csv_merge(const char* const* csvs, size_t n_csvs,
                                                char** out);
/* Newline-separated warnings for a calibration run (empty if none). */
TAILCOMB_API tc_status tc_calibration_warnings(uint64_t n, const double* alphas, size_t n_alphas,
                                               char** out);
TAILCOMB_API tc_status tc_tailscale(const tc_model* model, const tc_combiner* c,
                                    const double* thresholds, size_t n_thresholds, uint64_t n,
                                    uint64_t seed, unsigned workers, char** csv);

typedef struct tc_power_config {
  double nu;
  size_t d;
  const char* sigma; /* "ar:<rho>" or "exch:<rho>" */
  tc_direction direction;
  const double* effects;
  size_t n_effects;
  double alpha;
  uint64_t n;
  uint64_t seed;
  const char* const* tests;
  size_t n_tests;
  unsigned workers;
} tc_power_config;

/* Expands "start:stop:count" (inclusive) or a comma list into `out`, which
 * holds `capacity` values; `*count` receives the grid length. */
TAILCOMB_API tc_status tc_parse_effect_grid(const char* text, double* out, size_t capacity,
                                            size_t* count);
TAILCOMB_API tc_status tc_power(const tc_power_config* config, char** csv);
TAILCOMB_API tc_status tc_falsify(const tc_combiner* c, size_t d, double beta, size_t n_atoms,
                                  uint64_t budget, uint64_t seed, char** json);

#ifdef __cplusplus
}
#endif

#endif /* TAILCOMB_TAILCOMB_H */
