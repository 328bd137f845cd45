//! Exercises the C ABI exactly as a foreign caller would: raw pointers,
//! caller-allocated buffers, opaque handles, and status codes.

use std::ffi::{CStr, CString};
use std::ptr;

use zkcb_ffi::*;

#[test]
fn keccak_matches_reference_vector() {
    let mut out = [0u8; 32];
    let status = unsafe { zkcb_keccak256(ptr::null(), 0, out.as_mut_ptr()) };
    assert_eq!(status, ZkcbStatus::Ok);
    assert_eq!(
        hex::encode(out),
        "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"
    );
}

#[test]
fn null_out_pointer_is_reported() {
    let status = unsafe { zkcb_keccak256(ptr::null(), 0, ptr::null_mut()) };
    assert_eq!(status, ZkcbStatus::NullArgument);
}

#[test]
fn commitment_composes_from_primitives() {
    let emitter = {
        let mut e = [0u8; 32];
        e[31] = 1;
        e
    };
    let mut dom = [0u8; 32];
    let status = unsafe { zkcb_domain_tag(1, emitter.as_ptr(), 0, dom.as_mut_ptr()) };
    assert_eq!(status, ZkcbStatus::Ok);

    let message = b"hello";
    let mut c = [0u8; 32];
    let status =
        unsafe { zkcb_commitment(dom.as_ptr(), message.as_ptr(), message.len(), c.as_mut_ptr()) };
    assert_eq!(status, ZkcbStatus::Ok);

    // Independent composition through the two lower-level calls.
    let mut preimage = dom.to_vec();
    preimage.extend_from_slice(message);
    let mut digest = [0u8; 32];
    unsafe { zkcb_keccak256(preimage.as_ptr(), preimage.len(), digest.as_mut_ptr()) };
    let mut reduced = [0u8; 32];
    unsafe { zkcb_to_field(digest.as_ptr(), reduced.as_mut_ptr()) };
    assert_eq!(c, reduced);
}

#[test]
fn secret_hash_rejects_non_canonical_encodings() {
    let mut out = [0u8; 32];
    let status = unsafe { zkcb_secret_hash([0xFF; 32].as_ptr(), out.as_mut_ptr()) };
    assert_eq!(status, ZkcbStatus::NonCanonicalField);

    let mut small = [0u8; 32];
    small[31] = 42;
    let status = unsafe { zkcb_secret_hash(small.as_ptr(), out.as_mut_ptr()) };
    assert_eq!(status, ZkcbStatus::Ok);
}

#[test]
fn receipt_round_trips_through_the_pod_struct() {
    let receipt = ZkcbReceipt {
        version: 1,
        orig_emitter_chain: 1,
        orig_emitter: [7; 32],
        orig_sequence: 42,
        commitment: [1; 32],
        aztec_key: [2; 32],
        leaf_index: [0; 32],
        secret_hash: [3; 32],
        result_hash: [4; 32],
    };
    let mut wire = [0u8; ZKCB_RECEIPT_LEN];
    assert_eq!(unsafe { zkcb_receipt_encode(&receipt, wire.as_mut_ptr()) }, ZkcbStatus::Ok);
    assert_eq!(wire[0], 1);

    let mut back = ZkcbReceipt {
        version: 0,
        orig_emitter_chain: 0,
        orig_emitter: [0; 32],
        orig_sequence: 0,
        commitment: [0; 32],
        aztec_key: [0; 32],
        leaf_index: [0; 32],
        secret_hash: [0; 32],
        result_hash: [0; 32],
    };
    assert_eq!(
        unsafe { zkcb_receipt_decode(wire.as_ptr(), wire.len(), &mut back) },
        ZkcbStatus::Ok
    );
    assert_eq!(back.orig_sequence, 42);
    assert_eq!(back.secret_hash, [3; 32]);

    // Truncation is rejected.
    assert_eq!(
        unsafe { zkcb_receipt_decode(wire.as_ptr(), wire.len() - 1, &mut back) },
        ZkcbStatus::Malformed
    );
}

#[test]
fn vaa_decode_rejects_garbage_and_frees_cleanly() {
    let mut handle: *mut ZkcbVaa = ptr::null_mut();
    let status = unsafe { zkcb_vaa_decode([0u8; 3].as_ptr(), 3, &mut handle) };
    assert_eq!(status, ZkcbStatus::Malformed);
    assert!(handle.is_null());
    unsafe { zkcb_vaa_free(handle) };
}

#[test]
fn scenario_runs_end_to_end_through_the_abi() {
    let scenario = r#"{
        "name": "ffi-smoke",
        "guardians": 5,
        "posts": [{ "at_tick": 0, "batch_id": 1, "message": "0x686921", "finality": "confirmed" }]
    }"#;
    let json = CString::new(scenario).unwrap();
    let mut trace: *mut ZkcbTrace = ptr::null_mut();
    let status = unsafe { zkcb_run_scenario(json.as_ptr(), 7, &mut trace) };
    assert_eq!(status, ZkcbStatus::Ok);
    assert!(!trace.is_null());

    assert!(unsafe { zkcb_trace_ok(trace) });
    assert!(unsafe { zkcb_trace_record_count(trace) } > 3);

    let verdicts = unsafe { zkcb_trace_verdicts_json(trace) };
    assert!(!verdicts.is_null());
    let text = unsafe { CStr::from_ptr(verdicts) }.to_str().unwrap().to_string();
    assert!(text.contains("\"replay_safety\""));
    unsafe { zkcb_string_free(verdicts) };

    let jsonl = unsafe { zkcb_trace_to_jsonl(trace) };
    assert!(!jsonl.is_null());
    let text = unsafe { CStr::from_ptr(jsonl) }.to_str().unwrap().to_string();
    assert!(text.lines().count() > 3);
    unsafe { zkcb_string_free(jsonl) };

    unsafe { zkcb_trace_free(trace) };
}

#[test]
fn bad_scenario_json_is_invalid_scenario() {
    let json = CString::new("{\"nope\":true}").unwrap();
    let mut trace: *mut ZkcbTrace = ptr::null_mut();
    let status = unsafe { zkcb_run_scenario(json.as_ptr(), 0, &mut trace) };
    assert_eq!(status, ZkcbStatus::InvalidScenario);
    assert!(trace.is_null());
}

#[test]
fn generated_header_declares_the_surface() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/zkcb.h");
    let text = std::fs::read_to_string(header).expect("cbindgen header exists");
    for symbol in [
        "zkcb_keccak256",
        "zkcb_to_field",
        "zkcb_domain_tag",
        "zkcb_commitment",
        "zkcb_secret_hash",
        "zkcb_vaa_decode",
        "zkcb_vaa_hash",
        "zkcb_receipt_encode",
        "zkcb_receipt_decode",
        "zkcb_run_scenario",
        "zkcb_trace_ok",
        "zkcb_string_free",
        "ZkcbStatus",
        "ZkcbReceipt",
    ] {
        assert!(text.contains(symbol), "header missing {symbol}");
    }
}
