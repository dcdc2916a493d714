#ifndef LOOPFINDER_H
#define LOOPFINDER_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum LfStatus {
  LF_STATUS_OK = 0,
  LF_STATUS_NULL_ARGUMENT = 1,
  LF_STATUS_INVALID_UTF8 = 2,
  LF_STATUS_PARSE_ERROR = 3,
  LF_STATUS_MODES_ERROR = 4,
  LF_STATUS_RESOURCE_ERROR = 5,
  // An internal error; the message names the panic.
  LF_STATUS_INTERNAL = 6,
} LfStatus;

// A parsed program. Opaque to C.
typedef struct LfProgram LfProgram;

// Analysis settings; fill with [`lf_options_default`] before changing fields.
typedef struct LfOptions {
  size_t max;
  size_t pool_cap;
  size_t pair_cap;
  size_t passes;
  // Nonzero runs the oracle on every condition.
  int oracle;
  size_t oracle_depth;
  size_t samples;
  uint64_t seed;
} LfOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Writes default settings into `opts`.
//
// # Safety
// `opts` must be null or point to writable memory for one `LfOptions`.
enum LfStatus lf_options_default(struct LfOptions *opts);

// Parses program text. On success `*out` receives a handle to release with
// [`lf_program_free`].
//
// # Safety
// `source` must be a NUL-terminated string and `out` a valid pointer.
enum LfStatus lf_program_parse(const char *source, struct LfProgram **out);

// Releases a program handle. Null is ignored.
//
// # Safety
// `program` must come from [`lf_program_parse`] and not be used afterwards.
void lf_program_free(struct LfProgram *program);

// Number of clauses in the program.
//
// # Safety
// `program` must be a live handle and `out` a valid pointer.
enum LfStatus lf_program_clause_count(const struct LfProgram *program, size_t *out);

// Stamped binary-clause pool after `max` iterations, one `<stamp> <clause>`
// line per entry.
//
// # Safety
// `program` must be a live handle and `out` a valid pointer.
enum LfStatus lf_unfold_dump(const struct LfProgram *program,
                             size_t max,
                             size_t pool_cap,
                             char **out);

// Full analysis as a JSON document. `opts` may be null for defaults.
//
// # Safety
// `program` must be a live handle, `opts` null or valid, `out` valid.
enum LfStatus lf_analyze_json(const struct LfProgram *program,
                              const struct LfOptions *opts,
                              char **out);

// Analysis against terminating modes given as JSON (`{"name/arity": [[1], ...]}`).
// `*optimal` is set to 1 when no undecided mode remains, 0 otherwise.
//
// # Safety
// `program` must be a live handle, `modes_json` a NUL-terminated string,
// `opts` null or valid, `optimal` and `out` valid.
enum LfStatus lf_optimal_json(const struct LfProgram *program,
                              const struct LfOptions *opts,
                              const char *modes_json,
                              int *optimal,
                              char **out);

// Releases a string produced by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void lf_string_free(char *s);

// Message for the last failure on this thread, or null. The pointer stays
// valid until the next call into the library on the same thread.
const char *lf_last_error_message(void);

// Library version, a static string.
const char *lf_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOOPFINDER_H */
