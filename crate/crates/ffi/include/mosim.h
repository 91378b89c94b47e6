#ifndef MOSIM_H
#define MOSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MosimFormat {
  MOSIM_FORMAT_JSONL = 0,
  MOSIM_FORMAT_CSV = 1,
} MosimFormat;

// Result of a library call. The first four values match the exit codes of
// the `mosim` command.
typedef enum MosimStatus {
  MOSIM_STATUS_OK = 0,
  // The trace was produced but does not verify.
  MOSIM_STATUS_VERIFY_FAILED = 1,
  // Malformed sentence, lexicon, configuration or program.
  MOSIM_STATUS_INVALID_INPUT = 2,
  // No run of the compiled program succeeds within its bounds.
  MOSIM_STATUS_SEARCH_FAILED = 3,
  MOSIM_STATUS_NULL_ARGUMENT = 4,
  MOSIM_STATUS_INVALID_UTF8 = 5,
  // A bug inside the library; the handle arguments are still valid.
  MOSIM_STATUS_INTERNAL = 6,
} MosimStatus;

// A lexicon: the builtin entries plus anything loaded on top.
typedef struct MosimLexicon MosimLexicon;

// A finished simulation together with the lexicon it was built from.
typedef struct MosimSimulation MosimSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until
// the next library call on the same thread.
const char *mosim_last_error(void);

// Library version as a static string.
const char *mosim_version(void);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void mosim_string_free(char *s);

// The builtin lexicon. Never null.
struct MosimLexicon *mosim_lexicon_builtin(void);

// Loads a JSON lexicon document on top of the builtin entries.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum MosimStatus mosim_lexicon_load(const char *json, struct MosimLexicon **out);

// # Safety
// `lex` must be null or a handle from this library, not yet freed.
void mosim_lexicon_free(struct MosimLexicon *lex);

// Parses a sentence and writes its event frame as JSON to `out_json`.
//
// # Safety
// `lex` must be a live handle, `sentence` a NUL-terminated string and
// `out_json` writable.
enum MosimStatus mosim_parse(const struct MosimLexicon *lex, const char *sentence, char **out_json);

// Simulates `sentence`. `config_json` may be null for the defaults; `seed`
// always overrides the configuration's seed.
//
// # Safety
// `lex` must be a live handle, the strings NUL-terminated (or
// `config_json` null) and `out` writable.
enum MosimStatus mosim_simulate(const struct MosimLexicon *lex,
                                const char *sentence,
                                const char *config_json,
                                uint64_t seed,
                                struct MosimSimulation **out);

// # Safety
// `sim` must be null or a handle from this library, not yet freed.
void mosim_simulation_free(struct MosimSimulation *sim);

// Number of states in the trace, initial state included; 0 for null.
//
// # Safety
// `sim` must be null or a live handle.
size_t mosim_simulation_frame_count(const struct MosimSimulation *sim);

// Serializes the trace file into a new string.
//
// # Safety
// `sim` must be a live handle and `out` writable.
enum MosimStatus mosim_simulation_trace(const struct MosimSimulation *sim,
                                        enum MosimFormat format,
                                        char **out);

// Verifies the trace. Returns `Ok` if every check passes and
// `VerifyFailed` otherwise; the report JSON goes to `out_report` unless
// it is null.
//
// # Safety
// `sim` must be a live handle; `out_report` null or writable.
enum MosimStatus mosim_simulation_verify(const struct MosimSimulation *sim, char **out_report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOSIM_H */
