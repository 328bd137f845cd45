//! C ABI for the bridge library: hashing and commitment primitives, strict
//! VAA/receipt codecs, and the scenario runner, exposed through opaque
//! handles and status codes. The header `include/zkcb.h` is generated by
//! cbindgen at build time.
//!
//! Conventions: every output buffer is caller-allocated; 32-byte parameters
//! point to exactly 32 readable/writable bytes; functions never panic across
//! the boundary (panics surface as `ZKCB_STATUS_INTERNAL_PANIC`).

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use zkcb_core::codec::{
    decode_receipt, decode_vaa, encode_receipt, encode_vaa, vaa_body_hash, ReceiptPayload, Vaa,
};
use zkcb_core::crypto::{commitment, domain_tag, keccak256, secret_hash, to_field, Digest32, FieldElement};
use zkcb_core::sim::{run_scenario, ScenarioSpec, TraceReport};
use zkcb_core::types::Bytes32;

/// Exact wire length of a receipt payload.
pub const ZKCB_RECEIPT_LEN: usize = 203;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ZkcbStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Input bytes failed strict decoding.
    Malformed = 2,
    /// A 32-byte field encoding was not canonical (value >= r).
    NonCanonicalField = 3,
    /// Scenario JSON was invalid or internally inconsistent.
    InvalidScenario = 4,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 5,
    /// The provided output buffer is too small.
    BufferTooSmall = 6,
    /// An internal panic was caught at the boundary.
    InternalPanic = 7,
}

/// Opaque decoded VAA handle. Free with `zkcb_vaa_free`.
pub struct ZkcbVaa {
    inner: Vaa,
}

/// Opaque simulation trace handle. Free with `zkcb_trace_free`.
pub struct ZkcbTrace {
    report: TraceReport,
}

/// Fixed-width receipt payload, field for field the canonical encoding.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct ZkcbReceipt {
    pub version: u8,
    pub orig_emitter_chain: u16,
    pub orig_emitter: [u8; 32],
    pub orig_sequence: u64,
    pub commitment: [u8; 32],
    pub aztec_key: [u8; 32],
    pub leaf_index: [u8; 32],
    pub secret_hash: [u8; 32],
    pub result_hash: [u8; 32],
}

fn guarded<F: FnOnce() -> ZkcbStatus>(f: F) -> ZkcbStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(ZkcbStatus::InternalPanic)
}

unsafe fn read_32(ptr: *const u8) -> Option<[u8; 32]> {
    if ptr.is_null() {
        return None;
    }
    let mut out = [0u8; 32];
    ptr::copy_nonoverlapping(ptr, out.as_mut_ptr(), 32);
    Some(out)
}

unsafe fn write_32(dst: *mut u8, src: &[u8; 32]) -> ZkcbStatus {
    if dst.is_null() {
        return ZkcbStatus::NullArgument;
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, 32);
    ZkcbStatus::Ok
}

unsafe fn read_slice<'a>(data: *const u8, len: usize) -> Option<&'a [u8]> {
    if len == 0 {
        return Some(&[]);
    }
    if data.is_null() {
        return None;
    }
    Some(slice::from_raw_parts(data, len))
}

/// Keccak-256 over `data_len` bytes at `data` into `out32`.
///
/// # Safety
/// `data` must point to `data_len` readable bytes (or be null when
/// `data_len` is 0); `out32` must point to 32 writable bytes.
#[no_mangle]
pub unsafe extern "C" fn zkcb_keccak256(
    data: *const u8,
    data_len: usize,
    out32: *mut u8,
) -> ZkcbStatus {
    guarded(|| {
        let Some(input) = read_slice(data, data_len) else {
            return ZkcbStatus::NullArgument;
        };
        write_32(out32, &keccak256(input).0)
    })
}

/// Canonical reduction of a big-endian 256-bit integer into the BN254 scalar
/// field; writes the 32-byte big-endian canonical representative.
///
/// # Safety
/// `bytes32` must point to 32 readable bytes; `out32` to 32 writable bytes.
#[no_mangle]
pub unsafe extern "C" fn zkcb_to_field(bytes32: *const u8, out32: *mut u8) -> ZkcbStatus {
    guarded(|| {
        let Some(input) = read_32(bytes32) else {
            return ZkcbStatus::NullArgument;
        };
        write_32(out32, &to_field(&Digest32(input)).to_be_bytes())
    })
}

/// Domain separation tag for (emitter_chain, emitter_address, sequence).
///
/// # Safety
/// `emitter32` must point to 32 readable bytes; `out32` to 32 writable bytes.
#[no_mangle]
pub unsafe extern "C" fn zkcb_domain_tag(
    emitter_chain: u16,
    emitter32: *const u8,
    sequence: u64,
    out32: *mut u8,
) -> ZkcbStatus {
    guarded(|| {
        let Some(emitter) = read_32(emitter32) else {
            return ZkcbStatus::NullArgument;
        };
        write_32(out32, &domain_tag(emitter_chain, &Bytes32(emitter), sequence).0)
    })
}

/// Domain-separated field commitment `toField(Keccak-256(dom || m))`,
/// written as 32 big-endian bytes.
///
/// # Safety
/// `dom32` must point to 32 readable bytes; `m` to `m_len` readable bytes
/// (null allowed when `m_len` is 0); `out32` to 32 writable bytes.
#[no_mangle]
pub unsafe extern "C" fn zkcb_commitment(
    dom32: *const u8,
    m: *const u8,
    m_len: usize,
    out32: *mut u8,
) -> ZkcbStatus {
    guarded(|| {
        let Some(dom) = read_32(dom32) else {
            return ZkcbStatus::NullArgument;
        };
        let Some(message) = read_slice(m, m_len) else {
            return ZkcbStatus::NullArgument;
        };
        write_32(out32, &commitment(&Digest32(dom), message).to_be_bytes())
    })
}

/// Secret hash of a canonical field element (32 big-endian bytes).
/// Returns `NON_CANONICAL_FIELD` when the encoding is >= the field modulus.
///
/// # Safety
/// `secret32` must point to 32 readable bytes; `out32` to 32 writable bytes.
#[no_mangle]
pub unsafe extern "C" fn zkcb_secret_hash(secret32: *const u8, out32: *mut u8) -> ZkcbStatus {
    guarded(|| {
        let Some(bytes) = read_32(secret32) else {
            return ZkcbStatus::NullArgument;
        };
        match FieldElement::try_from_be_bytes(&bytes) {
            Ok(s) => write_32(out32, &secret_hash(&s).0),
            Err(_) => ZkcbStatus::NonCanonicalField,
        }
    })
}

/// Strictly decodes a VAA; on success stores a heap handle in `*out`.
///
/// # Safety
/// `bytes` must point to `len` readable bytes; `out` must be a valid
/// pointer-to-pointer. The returned handle must be freed with
/// `zkcb_vaa_free`.
#[no_mangle]
pub unsafe extern "C" fn zkcb_vaa_decode(
    bytes: *const u8,
    len: usize,
    out: *mut *mut ZkcbVaa,
) -> ZkcbStatus {
    guarded(|| {
        if out.is_null() {
            return ZkcbStatus::NullArgument;
        }
        let Some(input) = read_slice(bytes, len) else {
            return ZkcbStatus::NullArgument;
        };
        match decode_vaa(input) {
            Ok(vaa) => {
                *out = Box::into_raw(Box::new(ZkcbVaa { inner: vaa }));
                ZkcbStatus::Ok
            }
            Err(_) => ZkcbStatus::Malformed,
        }
    })
}

/// Releases a VAA handle. Null is a no-op.
///
/// # Safety
/// `vaa` must be null or a pointer previously returned by
/// `zkcb_vaa_decode` that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn zkcb_vaa_free(vaa: *mut ZkcbVaa) {
    if !vaa.is_null() {
        drop(Box::from_raw(vaa));
    }
}

/// # Safety
/// `vaa` must be a live handle from `zkcb_vaa_decode`.
#[no_mangle]
pub unsafe extern "C" fn zkcb_vaa_sequence(vaa: *const ZkcbVaa) -> u64 {
    vaa.as_ref().map(|v| v.inner.body.sequence).unwrap_or(0)
}

/// # Safety
/// `vaa` must be a live handle from `zkcb_vaa_decode`.
#[no_mangle]
pub unsafe extern "C" fn zkcb_vaa_emitter_chain(vaa: *const ZkcbVaa) -> u16 {
    vaa.as_ref().map(|v| v.inner.body.emitter_chain).unwrap_or(0)
}

/// # Safety
/// `vaa` must be a live handle from `zkcb_vaa_decode`.
#[no_mangle]
pub unsafe extern "C" fn zkcb_vaa_consistency_level(vaa: *const ZkcbVaa) -> u8 {
    vaa.as_ref().map(|v| v.inner.body.consistency_level).unwrap_or(0)
}

/// Copies the 32-byte emitter address.
///
/// # Safety
/// `vaa` must be a live handle; `out32` must point to 32 writable bytes.
#[no_mangle]
pub unsafe extern "C" fn zkcb_vaa_emitter_address(
    vaa: *const ZkcbVaa,
    out32: *mut u8,
) -> ZkcbStatus {
    guarded(|| match vaa.as_ref() {
        Some(v) => write_32(out32, &v.inner.body.emitter_address.0),
        None => ZkcbStatus::NullArgument,
    })
}

/// # Safety
/// `vaa` must be a live handle from `zkcb_vaa_decode`.
#[no_mangle]
pub unsafe extern "C" fn zkcb_vaa_payload_len(vaa: *const ZkcbVaa) -> usize {
    vaa.as_ref().map(|v| v.inner.body.payload.len()).unwrap_or(0)
}

/// Copies the payload into `out` (capacity `cap`).
///
/// # Safety
/// `vaa` must be a live handle; `out` must point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn zkcb_vaa_payload(
    vaa: *const ZkcbVaa,
    out: *mut u8,
    cap: usize,
) -> ZkcbStatus {
    guarded(|| {
        let Some(v) = vaa.as_ref() else {
            return ZkcbStatus::NullArgument;
        };
        let payload = &v.inner.body.payload;
        if out.is_null() {
            return ZkcbStatus::NullArgument;
        }
        if cap < payload.len() {
            return ZkcbStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(payload.as_ptr(), out, payload.len());
        ZkcbStatus::Ok
    })
}

/// The replay-lock body hash `h`.
///
/// # Safety
/// `vaa` must be a live handle; `out32` must point to 32 writable bytes.
#[no_mangle]
pub unsafe extern "C" fn zkcb_vaa_hash(vaa: *const ZkcbVaa, out32: *mut u8) -> ZkcbStatus {
    guarded(|| match vaa.as_ref() {
        Some(v) => write_32(out32, &vaa_body_hash(&v.inner.body).0),
        None => ZkcbStatus::NullArgument,
    })
}

/// Re-encodes a decoded VAA. `*len` carries the capacity of `out` on entry
/// and the written length on exit; call with `out == NULL` to query the size.
///
/// # Safety
/// `vaa` must be a live handle; `len` must be a valid pointer; `out`, when
/// non-null, must point to `*len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn zkcb_vaa_encode(
    vaa: *const ZkcbVaa,
    out: *mut u8,
    len: *mut usize,
) -> ZkcbStatus {
    guarded(|| {
        let Some(v) = vaa.as_ref() else {
            return ZkcbStatus::NullArgument;
        };
        if len.is_null() {
            return ZkcbStatus::NullArgument;
        }
        let encoded = encode_vaa(&v.inner);
        if out.is_null() {
            *len = encoded.len();
            return ZkcbStatus::Ok;
        }
        if *len < encoded.len() {
            *len = encoded.len();
            return ZkcbStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(encoded.as_ptr(), out, encoded.len());
        *len = encoded.len();
        ZkcbStatus::Ok
    })
}

fn receipt_to_c(r: &ReceiptPayload) -> ZkcbReceipt {
    ZkcbReceipt {
        version: r.version,
        orig_emitter_chain: r.orig_emitter_chain,
        orig_emitter: r.orig_emitter.0,
        orig_sequence: r.orig_sequence,
        commitment: r.commitment.0,
        aztec_key: r.aztec_key.0,
        leaf_index: r.leaf_index.0,
        secret_hash: r.secret_hash.0,
        result_hash: r.result_hash.0,
    }
}

fn receipt_from_c(r: &ZkcbReceipt) -> ReceiptPayload {
    ReceiptPayload {
        version: r.version,
        orig_emitter_chain: r.orig_emitter_chain,
        orig_emitter: Bytes32(r.orig_emitter),
        orig_sequence: r.orig_sequence,
        commitment: Bytes32(r.commitment),
        aztec_key: Digest32(r.aztec_key),
        leaf_index: Bytes32(r.leaf_index),
        secret_hash: Digest32(r.secret_hash),
        result_hash: Digest32(r.result_hash),
    }
}

/// Decodes a 203-byte receipt payload into `*out`.
///
/// # Safety
/// `bytes` must point to `len` readable bytes; `out` must be a valid
/// pointer to a `ZkcbReceipt`.
#[no_mangle]
pub unsafe extern "C" fn zkcb_receipt_decode(
    bytes: *const u8,
    len: usize,
    out: *mut ZkcbReceipt,
) -> ZkcbStatus {
    guarded(|| {
        if out.is_null() {
            return ZkcbStatus::NullArgument;
        }
        let Some(input) = read_slice(bytes, len) else {
            return ZkcbStatus::NullArgument;
        };
        match decode_receipt(input) {
            Ok(r) => {
                *out = receipt_to_c(&r);
                ZkcbStatus::Ok
            }
            Err(_) => ZkcbStatus::Malformed,
        }
    })
}

/// Encodes a receipt into exactly 203 bytes at `out`.
///
/// # Safety
/// `receipt` must be a valid pointer; `out` must point to 203 writable
/// bytes.
#[no_mangle]
pub unsafe extern "C" fn zkcb_receipt_encode(
    receipt: *const ZkcbReceipt,
    out: *mut u8,
) -> ZkcbStatus {
    guarded(|| {
        let Some(r) = receipt.as_ref() else {
            return ZkcbStatus::NullArgument;
        };
        if out.is_null() {
            return ZkcbStatus::NullArgument;
        }
        let encoded = encode_receipt(&receipt_from_c(r));
        ptr::copy_nonoverlapping(encoded.as_ptr(), out, encoded.len());
        ZkcbStatus::Ok
    })
}

/// Runs a scenario (JSON, as accepted by `zkcb run`) under `seed` and stores
/// a trace handle in `*out`.
///
/// # Safety
/// `scenario_json` must be a valid NUL-terminated C string; `out` must be a
/// valid pointer-to-pointer. The handle must be freed with
/// `zkcb_trace_free`.
#[no_mangle]
pub unsafe extern "C" fn zkcb_run_scenario(
    scenario_json: *const c_char,
    seed: u64,
    out: *mut *mut ZkcbTrace,
) -> ZkcbStatus {
    guarded(|| {
        if scenario_json.is_null() || out.is_null() {
            return ZkcbStatus::NullArgument;
        }
        let Ok(json) = CStr::from_ptr(scenario_json).to_str() else {
            return ZkcbStatus::InvalidUtf8;
        };
        let Ok(spec) = serde_json::from_str::<ScenarioSpec>(json) else {
            return ZkcbStatus::InvalidScenario;
        };
        match run_scenario(&spec, seed) {
            Ok(report) => {
                *out = Box::into_raw(Box::new(ZkcbTrace { report }));
                ZkcbStatus::Ok
            }
            Err(_) => ZkcbStatus::InvalidScenario,
        }
    })
}

/// Releases a trace handle. Null is a no-op.
///
/// # Safety
/// `trace` must be null or a live handle from `zkcb_run_scenario`.
#[no_mangle]
pub unsafe extern "C" fn zkcb_trace_free(trace: *mut ZkcbTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// True when no property outside the legacy path is violated.
///
/// # Safety
/// `trace` must be a live handle from `zkcb_run_scenario`.
#[no_mangle]
pub unsafe extern "C" fn zkcb_trace_ok(trace: *const ZkcbTrace) -> bool {
    trace.as_ref().map(|t| t.report.verdicts.all_non_legacy_pass()).unwrap_or(false)
}

/// Number of records in the trace.
///
/// # Safety
/// `trace` must be a live handle from `zkcb_run_scenario`.
#[no_mangle]
pub unsafe extern "C" fn zkcb_trace_record_count(trace: *const ZkcbTrace) -> usize {
    trace.as_ref().map(|t| t.report.records.len()).unwrap_or(0)
}

fn to_cstring(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// The full trace report as JSONL; free with `zkcb_string_free`. Returns
/// null on failure.
///
/// # Safety
/// `trace` must be a live handle from `zkcb_run_scenario`.
#[no_mangle]
pub unsafe extern "C" fn zkcb_trace_to_jsonl(trace: *const ZkcbTrace) -> *mut c_char {
    catch_unwind(AssertUnwindSafe(|| {
        trace.as_ref().map(|t| to_cstring(t.report.to_jsonl(None))).unwrap_or(ptr::null_mut())
    }))
    .unwrap_or(ptr::null_mut())
}

/// The verdict summary as a JSON object; free with `zkcb_string_free`.
///
/// # Safety
/// `trace` must be a live handle from `zkcb_run_scenario`.
#[no_mangle]
pub unsafe extern "C" fn zkcb_trace_verdicts_json(trace: *const ZkcbTrace) -> *mut c_char {
    catch_unwind(AssertUnwindSafe(|| {
        trace
            .as_ref()
            .and_then(|t| serde_json::to_string(&t.report.verdicts).ok())
            .map(to_cstring)
            .unwrap_or(ptr::null_mut())
    }))
    .unwrap_or(ptr::null_mut())
}

/// Frees a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be null or a pointer returned by a `zkcb_*` string function
/// that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn zkcb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
