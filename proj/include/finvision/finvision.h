/* finvision — multi-agent trading backtest engine, C API.
 *
 * The engine is driven through an opaque handle created from a JSON config
 * file. All functions return fv_status; on failure fv_last_error() carries a
 * human-readable message for the calling thread. Strings returned through
 * out-parameters are heap-allocated and must be released with fv_string_free.
 */
#ifndef FINVISION_H
#define FINVISION_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FINVISION_API __declspec(dllexport)
#else
#define FINVISION_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fv_status {
    FV_OK = 0,
    FV_ERR_INTERNAL = 1,
    FV_ERR_CONFIG = 2,   /* bad configuration / arguments */
    FV_ERR_DATA = 3,     /* unreadable or invalid market data */
    FV_ERR_GATEWAY = 4,  /* LLM backend failure after retries */
    FV_ERR_INVALID = 5   /* invalid call (null handle, bad parameter) */
} fv_status;

/* Library version, static storage. */
FINVISION_API const char* fv_version(void);

/* Message for the last failing call on this thread, static storage. */
FINVISION_API const char* fv_last_error(void);

FINVISION_API void fv_string_free(char* s);

/* --- engine ---------------------------------------------------------------- */

typedef struct fv_engine fv_engine;

/* Creates an engine from a JSON config file. overrides_json may be NULL or a
 * JSON object merged over the file (RFC 7386 semantics). */
FINVISION_API fv_status fv_engine_create(const char* config_path, const char* overrides_json,
                                         fv_engine** out_engine);
FINVISION_API void fv_engine_destroy(fv_engine* engine);

/* Runs the backtest and writes the report files into the configured output
 * directory. resume != 0 continues from the checkpoint when one exists. */
FINVISION_API fv_status fv_engine_run(fv_engine* engine, int resume);

/* Rule-based baseline with the same report layout: "bh", "macd" or "kdj-rsi". */
FINVISION_API fv_status fv_engine_run_baseline(fv_engine* engine, const char* strategy);

/* Renders the agent-facing charts for one trading day ("YYYY-MM-DD"). */
FINVISION_API fv_status fv_engine_render_charts(fv_engine* engine, const char* date);

/* report.json content of the last completed run/baseline, as a string. */
FINVISION_API fv_status fv_engine_report_json(fv_engine* engine, char** out_json);

/* --- response cache ---------------------------------------------------------- */

FINVISION_API fv_status fv_cache_stats(const char* cache_dir, uint64_t* out_entries,
                                       uint64_t* out_bytes);
FINVISION_API fv_status fv_cache_clear(const char* cache_dir);

/* --- evaluation metrics ------------------------------------------------------ */

/* Annual rate of return over an equity curve: simple scaling by C/T. */
FINVISION_API fv_status fv_metrics_arr(const double* values, size_t count,
                                       int annual_trading_days, double* out);

/* Annualized Sharpe ratio of daily simple returns (sample stddev). */
FINVISION_API fv_status fv_metrics_sharpe(const double* values, size_t count,
                                          double risk_free_daily, double annualization,
                                          double* out);

/* Maximum drawdown in [0, 1]. */
FINVISION_API fv_status fv_metrics_mdd(const double* values, size_t count, double* out);

#ifdef __cplusplus
}
#endif

#endif /* FINVISION_H */
