#ifndef RABI_H
#define RABI_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RabiStatus {
  RABI_STATUS_OK = 0,
  RABI_STATUS_NULL_POINTER = 1,
  RABI_STATUS_INVALID_UTF8 = 2,
  // Config text, preset name or model parameters rejected.
  RABI_STATUS_INVALID_CONFIG = 3,
  // Table/column index, summary key or buffer length out of range.
  RABI_STATUS_OUT_OF_RANGE = 4,
  // Integration or linear-algebra failure.
  RABI_STATUS_NUMERICAL = 5,
  // A validity or leakage monitor escalated to an error.
  RABI_STATUS_VALIDITY = 6,
  RABI_STATUS_IO = 7,
  RABI_STATUS_PANIC = 8,
} RabiStatus;

// A parsed, validated run configuration.
typedef struct RabiConfig RabiConfig;

// Tables and summary values of one run.
typedef struct RabiOutput RabiOutput;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static NUL-terminated string.
const char *rabi_version(void);

// Message of the last failed call on this thread, or NULL after a
// successful call. Valid until the next call into the library.
const char *rabi_last_error_message(void);

// # Safety
// `s` must come from this library or be NULL.
void rabi_string_free(char *s);

// Parses config text (`key = value` lines).
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum RabiStatus rabi_config_parse(const char *text, struct RabiConfig **out);

// A named preset; `physical_omega` selects the physical qubit splitting.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum RabiStatus rabi_config_from_preset(const char *name,
                                        bool physical_omega,
                                        struct RabiConfig **out);

// Canonical text of a config; free with `rabi_string_free`.
//
// # Safety
// `config` must be a live handle; `out` must be writable.
enum RabiStatus rabi_config_to_text(const struct RabiConfig *config, char **out);

// # Safety
// `config` must come from this library or be NULL, and not be used again.
void rabi_config_free(struct RabiConfig *config);

// Runs the task named in the config. A breached validity monitor is not a
// failure; query it with `rabi_output_flagged`.
//
// # Safety
// `config` must be a live handle; `out` must be writable.
enum RabiStatus rabi_run(const struct RabiConfig *config, struct RabiOutput **out);

// # Safety
// `output` must come from this library or be NULL, and not be used again.
void rabi_output_free(struct RabiOutput *output);

// # Safety
// `output` must be a live handle; `out` must be writable.
enum RabiStatus rabi_output_flagged(const struct RabiOutput *output, bool *out);

// Looks up a scalar from the run summary (e.g. `max_infidelity`).
//
// # Safety
// `output` must be a live handle, `key` NUL-terminated, `out` writable.
enum RabiStatus rabi_output_summary(const struct RabiOutput *output, const char *key, double *out);

// # Safety
// `output` must be a live handle; `out` must be writable.
enum RabiStatus rabi_output_table_count(const struct RabiOutput *output, size_t *out);

// File name of a table (e.g. `equivalence.csv`); free with `rabi_string_free`.
//
// # Safety
// `output` must be a live handle; `out` must be writable.
enum RabiStatus rabi_output_table_name(const struct RabiOutput *output,
                                       size_t table_index,
                                       char **out);

// # Safety
// `output` must be a live handle; `out` must be writable.
enum RabiStatus rabi_output_table_rows(const struct RabiOutput *output,
                                       size_t table_index,
                                       size_t *out);

// # Safety
// `output` must be a live handle; `out` must be writable.
enum RabiStatus rabi_output_column_count(const struct RabiOutput *output,
                                         size_t table_index,
                                         size_t *out);

// # Safety
// `output` must be a live handle; `out` must be writable.
enum RabiStatus rabi_output_column_name(const struct RabiOutput *output,
                                        size_t table_index,
                                        size_t column_index,
                                        char **out);

// Copies a column into `buffer`, which must hold at least the table's row
// count. Flag columns come out as 0.0/1.0.
//
// # Safety
// `output` must be a live handle and `buffer` valid for `len` doubles.
enum RabiStatus rabi_output_copy_column(const struct RabiOutput *output,
                                        size_t table_index,
                                        size_t column_index,
                                        double *buffer,
                                        size_t len);

// Writes every table as CSV (with config metadata) into `dir`.
//
// # Safety
// `output` must be a live handle; `dir` NUL-terminated.
enum RabiStatus rabi_output_write(const struct RabiOutput *output, const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RABI_H */
