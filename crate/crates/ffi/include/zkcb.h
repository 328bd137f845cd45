#ifndef ZKCB_H
#define ZKCB_H

/* Generated by cbindgen from zkcb-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Exact wire length of a receipt payload.
#define ZKCB_RECEIPT_LEN 203

// Result of every fallible call.
typedef enum {
  ZKCB_STATUS_OK = 0,
  // A required pointer argument was null.
  ZKCB_STATUS_NULL_ARGUMENT = 1,
  // Input bytes failed strict decoding.
  ZKCB_STATUS_MALFORMED = 2,
  // A 32-byte field encoding was not canonical (value >= r).
  ZKCB_STATUS_NON_CANONICAL_FIELD = 3,
  // Scenario JSON was invalid or internally inconsistent.
  ZKCB_STATUS_INVALID_SCENARIO = 4,
  // A string argument was not valid UTF-8.
  ZKCB_STATUS_INVALID_UTF8 = 5,
  // The provided output buffer is too small.
  ZKCB_STATUS_BUFFER_TOO_SMALL = 6,
  // An internal panic was caught at the boundary.
  ZKCB_STATUS_INTERNAL_PANIC = 7,
} ZkcbStatus;

// Opaque simulation trace handle. Free with `zkcb_trace_free`.
typedef struct ZkcbTrace ZkcbTrace;

// Opaque decoded VAA handle. Free with `zkcb_vaa_free`.
typedef struct ZkcbVaa ZkcbVaa;

// Fixed-width receipt payload, field for field the canonical encoding.
typedef struct {
  uint8_t version;
  uint16_t orig_emitter_chain;
  uint8_t orig_emitter[32];
  uint64_t orig_sequence;
  uint8_t commitment[32];
  uint8_t aztec_key[32];
  uint8_t leaf_index[32];
  uint8_t secret_hash[32];
  uint8_t result_hash[32];
} ZkcbReceipt;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Keccak-256 over `data_len` bytes at `data` into `out32`.
//
// # Safety
// `data` must point to `data_len` readable bytes (or be null when
// `data_len` is 0); `out32` must point to 32 writable bytes.
ZkcbStatus zkcb_keccak256(const uint8_t *data, size_t data_len, uint8_t *out32);

// Canonical reduction of a big-endian 256-bit integer into the BN254 scalar
// field; writes the 32-byte big-endian canonical representative.
//
// # Safety
// `bytes32` must point to 32 readable bytes; `out32` to 32 writable bytes.
ZkcbStatus zkcb_to_field(const uint8_t *bytes32, uint8_t *out32);

// Domain separation tag for (emitter_chain, emitter_address, sequence).
//
// # Safety
// `emitter32` must point to 32 readable bytes; `out32` to 32 writable bytes.
ZkcbStatus zkcb_domain_tag(uint16_t emitter_chain,
                           const uint8_t *emitter32,
                           uint64_t sequence,
                           uint8_t *out32);

// Domain-separated field commitment `toField(Keccak-256(dom || m))`,
// written as 32 big-endian bytes.
//
// # Safety
// `dom32` must point to 32 readable bytes; `m` to `m_len` readable bytes
// (null allowed when `m_len` is 0); `out32` to 32 writable bytes.
ZkcbStatus zkcb_commitment(const uint8_t *dom32, const uint8_t *m, size_t m_len, uint8_t *out32);

// Secret hash of a canonical field element (32 big-endian bytes).
// Returns `NON_CANONICAL_FIELD` when the encoding is >= the field modulus.
//
// # Safety
// `secret32` must point to 32 readable bytes; `out32` to 32 writable bytes.
ZkcbStatus zkcb_secret_hash(const uint8_t *secret32, uint8_t *out32);

// Strictly decodes a VAA; on success stores a heap handle in `*out`.
//
// # Safety
// `bytes` must point to `len` readable bytes; `out` must be a valid
// pointer-to-pointer. The returned handle must be freed with
// `zkcb_vaa_free`.
ZkcbStatus zkcb_vaa_decode(const uint8_t *bytes, size_t len, ZkcbVaa **out);

// Releases a VAA handle. Null is a no-op.
//
// # Safety
// `vaa` must be null or a pointer previously returned by
// `zkcb_vaa_decode` that has not been freed yet.
void zkcb_vaa_free(ZkcbVaa *vaa);

// # Safety
// `vaa` must be a live handle from `zkcb_vaa_decode`.
uint64_t zkcb_vaa_sequence(const ZkcbVaa *vaa);

// # Safety
// `vaa` must be a live handle from `zkcb_vaa_decode`.
uint16_t zkcb_vaa_emitter_chain(const ZkcbVaa *vaa);

// # Safety
// `vaa` must be a live handle from `zkcb_vaa_decode`.
uint8_t zkcb_vaa_consistency_level(const ZkcbVaa *vaa);

// Copies the 32-byte emitter address.
//
// # Safety
// `vaa` must be a live handle; `out32` must point to 32 writable bytes.
ZkcbStatus zkcb_vaa_emitter_address(const ZkcbVaa *vaa, uint8_t *out32);

// # Safety
// `vaa` must be a live handle from `zkcb_vaa_decode`.
size_t zkcb_vaa_payload_len(const ZkcbVaa *vaa);

// Copies the payload into `out` (capacity `cap`).
//
// # Safety
// `vaa` must be a live handle; `out` must point to `cap` writable bytes.
ZkcbStatus zkcb_vaa_payload(const ZkcbVaa *vaa, uint8_t *out, size_t cap);

// The replay-lock body hash `h`.
//
// # Safety
// `vaa` must be a live handle; `out32` must point to 32 writable bytes.
ZkcbStatus zkcb_vaa_hash(const ZkcbVaa *vaa, uint8_t *out32);

// Re-encodes a decoded VAA. `*len` carries the capacity of `out` on entry
// and the written length on exit; call with `out == NULL` to query the size.
//
// # Safety
// `vaa` must be a live handle; `len` must be a valid pointer; `out`, when
// non-null, must point to `*len` writable bytes.
ZkcbStatus zkcb_vaa_encode(const ZkcbVaa *vaa, uint8_t *out, size_t *len);

// Decodes a 203-byte receipt payload into `*out`.
//
// # Safety
// `bytes` must point to `len` readable bytes; `out` must be a valid
// pointer to a `ZkcbReceipt`.
ZkcbStatus zkcb_receipt_decode(const uint8_t *bytes, size_t len, ZkcbReceipt *out);

// Encodes a receipt into exactly 203 bytes at `out`.
//
// # Safety
// `receipt` must be a valid pointer; `out` must point to 203 writable
// bytes.
ZkcbStatus zkcb_receipt_encode(const ZkcbReceipt *receipt, uint8_t *out);

// Runs a scenario (JSON, as accepted by `zkcb run`) under `seed` and stores
// a trace handle in `*out`.
//
// # Safety
// `scenario_json` must be a valid NUL-terminated C string; `out` must be a
// valid pointer-to-pointer. The handle must be freed with
// `zkcb_trace_free`.
ZkcbStatus zkcb_run_scenario(const char *scenario_json, uint64_t seed, ZkcbTrace **out);

// Releases a trace handle. Null is a no-op.
//
// # Safety
// `trace` must be null or a live handle from `zkcb_run_scenario`.
void zkcb_trace_free(ZkcbTrace *trace);

// True when no property outside the legacy path is violated.
//
// # Safety
// `trace` must be a live handle from `zkcb_run_scenario`.
bool zkcb_trace_ok(const ZkcbTrace *trace);

// Number of records in the trace.
//
// # Safety
// `trace` must be a live handle from `zkcb_run_scenario`.
size_t zkcb_trace_record_count(const ZkcbTrace *trace);

// The full trace report as JSONL; free with `zkcb_string_free`. Returns
// null on failure.
//
// # Safety
// `trace` must be a live handle from `zkcb_run_scenario`.
char *zkcb_trace_to_jsonl(const ZkcbTrace *trace);

// The verdict summary as a JSON object; free with `zkcb_string_free`.
//
// # Safety
// `trace` must be a live handle from `zkcb_run_scenario`.
char *zkcb_trace_verdicts_json(const ZkcbTrace *trace);

// Frees a string returned by this library. Null is a no-op.
//
// # Safety
// `s` must be null or a pointer returned by a `zkcb_*` string function
// that has not been freed yet.
void zkcb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZKCB_H */
