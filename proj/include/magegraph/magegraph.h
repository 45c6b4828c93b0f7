#ifndef MAGEGRAPH_H
#define MAGEGRAPH_H

/*
 * C API for the magegraph forecasting library.
 *
 * All functionality runs through an opaque run handle: create it, load a
 * config file, layer key=value overrides on top, then execute pipeline
 * commands. Functions return mg_status; on failure mg_run_last_error()
 * holds a human-readable message valid until the next call on the same
 * handle. Handles are not thread-safe; use one per thread.
 */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mg_status {
    MG_OK = 0,
    /* Config, schema, data, or usage problems. CLI exit code 2. */
    MG_ERROR_USAGE = 2,
    /* Non-finite values or failed numeric invariants. CLI exit code 3. */
    MG_ERROR_NUMERIC = 3
} mg_status;

typedef struct mg_run mg_run;

/* Library version as "major.minor.patch". */
const char* mg_version(void);

/* Fresh run handle with built-in default config; NULL only on allocation
 * failure. Release with mg_run_free. */
mg_run* mg_run_new(void);
void mg_run_free(mg_run* run);

/* Replace the handle's config with the contents of a config file. */
mg_status mg_run_load_config(mg_run* run, const char* path);

/* Override one config value, e.g. mg_run_set(run, "train.epochs", "25"). */
mg_status mg_run_set(mg_run* run, const char* dotted_key, const char* value);

/* Execute one pipeline command: synth, preprocess, build-graph, train,
 * evaluate, calibrate, or entropy-report. */
mg_status mg_run_exec(mg_run* run, const char* command);

/* Message for the last failure on this handle; empty string when the last
 * call succeeded. */
const char* mg_run_last_error(const mg_run* run);

/* Great-circle distance in kilometers between two lat/lon points. */
mg_status mg_haversine_km(double lat1, double lon1, double lat2, double lon2, double* out_km);

#ifdef __cplusplus
}
#endif

#endif /* MAGEGRAPH_H */
