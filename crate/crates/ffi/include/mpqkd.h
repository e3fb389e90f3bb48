#ifndef MPQKD_H
#define MPQKD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MpqkdBackend {
  MPQKD_BACKEND_AUTO = 0,
  MPQKD_BACKEND_DENSE = 1,
  MPQKD_BACKEND_TABLEAU = 2,
  MPQKD_BACKEND_CLASSICAL = 3,
} MpqkdBackend;

typedef enum MpqkdProtocol {
  MPQKD_PROTOCOL_ENTANGLED = 0,
  MPQKD_PROTOCOL_CSS = 1,
  MPQKD_PROTOCOL_PREPARE_MEASURE = 2,
} MpqkdProtocol;

typedef enum MpqkdStatus {
  MPQKD_STATUS_OK = 0,
  MPQKD_STATUS_NULL_POINTER = 1,
  MPQKD_STATUS_INVALID_ARGUMENT = 2,
  MPQKD_STATUS_PARSE_ERROR = 3,
  MPQKD_STATUS_BACKEND_LIMIT = 4,
  MPQKD_STATUS_DECODE_FAILURE = 5,
  MPQKD_STATUS_INTERNAL = 6,
  MPQKD_STATUS_PANIC = 7,
} MpqkdStatus;

// Session parameters.
typedef struct MpqkdConfig MpqkdConfig;

// Outcome of one session.
typedef struct MpqkdSession MpqkdSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *mpqkd_last_error(void);

// Creates a configuration with default settings.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum MpqkdStatus mpqkd_config_new(size_t parties, size_t n, struct MpqkdConfig **out);

// Parses an experiment file in `key = value` form. The protocol named in
// the text becomes the default for [`mpqkd_run_config`].
//
// # Safety
// `text` must be a NUL-terminated string and `out` writable.
enum MpqkdStatus mpqkd_config_parse(const char *text, struct MpqkdConfig **out);

// # Safety
// `config` must be NULL or a handle from this library not yet freed.
void mpqkd_config_free(struct MpqkdConfig *config);

// # Safety
// `config` must be a live handle.
enum MpqkdStatus mpqkd_config_set_seed(struct MpqkdConfig *config, uint64_t seed);

// Confidence factor `c ≥ 0` of the error threshold.
//
// # Safety
// `config` must be a live handle.
enum MpqkdStatus mpqkd_config_set_confidence(struct MpqkdConfig *config, double c);

// Independent Pauli noise on every transmitted qubit.
//
// # Safety
// `config` must be a live handle.
enum MpqkdStatus mpqkd_config_set_channel(struct MpqkdConfig *config,
                                          double px,
                                          double py,
                                          double pz);

// Intercept-resend attack on receiver `link`, or on every link when 0.
//
// # Safety
// `config` must be a live handle.
enum MpqkdStatus mpqkd_config_set_intercept_resend(struct MpqkdConfig *config, size_t link);

// # Safety
// `config` must be a live handle.
enum MpqkdStatus mpqkd_config_set_backend(struct MpqkdConfig *config, enum MpqkdBackend backend);

// Runs one session of `protocol`.
//
// # Safety
// `config` must be a live handle and `out` writable.
enum MpqkdStatus mpqkd_run_session(const struct MpqkdConfig *config,
                                   enum MpqkdProtocol protocol,
                                   struct MpqkdSession **out);

// Runs one session of the protocol named when the config was parsed.
//
// # Safety
// `config` must be a live handle and `out` writable.
enum MpqkdStatus mpqkd_run_config(const struct MpqkdConfig *config, struct MpqkdSession **out);

// # Safety
// `session` must be NULL or a handle from this library not yet freed.
void mpqkd_session_free(struct MpqkdSession *session);

// 1 if the session aborted, 0 if not, -1 for a NULL handle.
//
// # Safety
// `session` must be NULL or a live handle.
int32_t mpqkd_session_aborted(const struct MpqkdSession *session);

// 1 if every party holds the same key, 0 if not or aborted, -1 for NULL.
//
// # Safety
// `session` must be NULL or a live handle.
int32_t mpqkd_session_keys_equal(const struct MpqkdSession *session);

// Key length in bits; 0 when aborted or NULL.
//
// # Safety
// `session` must be NULL or a live handle.
size_t mpqkd_session_key_len(const struct MpqkdSession *session);

// Observed check-bit error rate; NaN for NULL.
//
// # Safety
// `session` must be NULL or a live handle.
double mpqkd_session_qber(const struct MpqkdSession *session);

// Error threshold `t` the parties derived.
//
// # Safety
// `session` must be NULL or a live handle.
size_t mpqkd_session_threshold(const struct MpqkdSession *session);

// Static name of the abort reason, or NULL when the session finished.
//
// # Safety
// `session` must be NULL or a live handle.
const char *mpqkd_session_abort_reason(const struct MpqkdSession *session);

// Copies party `party`'s key as one byte (0 or 1) per bit into `buf`.
//
// # Safety
// `session` must be a live handle and `buf` must hold `len` bytes.
enum MpqkdStatus mpqkd_session_key(const struct MpqkdSession *session,
                                   size_t party,
                                   uint8_t *buf,
                                   size_t len);

// Hamming `[7,4,3]` syndrome of a 7-byte word of 0/1 values, written as
// three 0/1 bytes.
//
// # Safety
// `word` must point to 7 readable bytes and `syndrome` to 3 writable ones.
enum MpqkdStatus mpqkd_hamming74_syndrome(const uint8_t *word, uint8_t *syndrome);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MPQKD_H */
