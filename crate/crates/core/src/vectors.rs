//! Golden vectors: a versioned JSON file of known-answer values for every
//! hashing, reduction, and codec primitive, regenerable with `zkcb
//! gen-vectors` and re-checked bit-exactly with `zkcb verify-vectors`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codec::{
    decode_receipt, decode_vaa, encode_bound_payload, encode_receipt, encode_vaa,
    parse_bound_payload, vaa_body_hash, BoundPayload, ReceiptPayload, SignatureEntry, Vaa, VaaBody,
};
use crate::crypto::{
    commitment, domain_tag, keccak256, secret_hash, to_field, Digest32, FieldElement,
    GuardianSignature, BN254_SCALAR_MODULUS_BE,
};
use crate::types::{decode_hex, decode_hex_exact, Bytes32};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorEntry {
    pub op: String,
    pub inputs: BTreeMap<String, String>,
    pub output: String,
}

fn hex(bytes: &[u8]) -> String {
    format!("0x{}", ::hex::encode(bytes))
}

fn entry(op: &str, inputs: &[(&str, String)], output: String) -> VectorEntry {
    VectorEntry {
        op: op.to_string(),
        inputs: inputs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        output,
    }
}

/// A fixed, deterministic VAA whose signature bytes are synthetic patterns;
/// codec vectors exercise the wire layout, not signature validity.
fn sample_vaa() -> Vaa {
    let payload = encode_bound_payload(&BoundPayload {
        secret_hash: secret_hash(&FieldElement::from_u64(7)),
        message: b"golden vector message".to_vec(),
    });
    let signatures = (0..2u8)
        .map(|i| {
            let mut sig = [0u8; 65];
            for (j, b) in sig.iter_mut().enumerate() {
                *b = (j as u8).wrapping_mul(3).wrapping_add(i);
            }
            sig[64] = i % 2;
            SignatureEntry { index: i * 3, signature: GuardianSignature(sig) }
        })
        .collect();
    Vaa {
        body: VaaBody {
            version: 1,
            guardian_set_index: 2,
            timestamp: 1_718_000_000,
            nonce: 11,
            emitter_chain: 1,
            emitter_address: Bytes32::from_u64_be(1),
            sequence: 42,
            consistency_level: 1,
            payload,
        },
        signatures,
    }
}

fn sample_receipt() -> ReceiptPayload {
    let c = commitment(&domain_tag(1, &Bytes32::from_u64_be(1), 42), b"golden vector message");
    ReceiptPayload {
        version: 1,
        orig_emitter_chain: 1,
        orig_emitter: Bytes32::from_u64_be(1),
        orig_sequence: 42,
        commitment: c.to_bytes32(),
        aztec_key: keccak256(b"golden aztec key"),
        leaf_index: Bytes32::from_u64_be(3),
        secret_hash: secret_hash(&FieldElement::from_u64(7)),
        result_hash: keccak256(b"golden result"),
    }
}

/// The canonical vector set.
pub fn generate() -> Vec<VectorEntry> {
    let mut out = Vec::new();

    for data in [&b""[..], b"abc", b"ZKCB/v1"] {
        out.push(entry("keccak256", &[("data", hex(data))], hex(&keccak256(data).0)));
    }

    for input in [[0u8; 32], BN254_SCALAR_MODULUS_BE, [0xFF; 32]] {
        out.push(entry(
            "to_field",
            &[("bytes", hex(&input))],
            hex(&to_field(&Digest32(input)).to_be_bytes()),
        ));
    }

    let emitter = Bytes32::from_u64_be(1);
    for (chain, emitter, seq) in
        [(1u16, emitter, 0u64), (1, emitter, 1), (2, Bytes32(keccak256(b"emitter").0), 7)]
    {
        out.push(entry(
            "domain_tag",
            &[
                ("emitter_chain", hex(&chain.to_be_bytes())),
                ("emitter_address", hex(&emitter.0)),
                ("sequence", hex(&seq.to_be_bytes())),
            ],
            hex(&domain_tag(chain, &emitter, seq).0),
        ));
    }

    for (dom, m) in [(keccak256(b""), &b""[..]), (domain_tag(1, &emitter, 0), b"hello")] {
        out.push(entry(
            "commitment",
            &[("dom", hex(&dom.0)), ("m", hex(m))],
            hex(&commitment(&dom, m).to_be_bytes()),
        ));
    }

    for s in [0u64, 1, 42] {
        let f = FieldElement::from_u64(s);
        out.push(entry(
            "secret_hash",
            &[("s", hex(&f.to_be_bytes()))],
            hex(&secret_hash(&f).0),
        ));
    }

    let vaa = sample_vaa();
    let vaa_bytes = encode_vaa(&vaa);
    out.push(entry("vaa_roundtrip", &[("bytes", hex(&vaa_bytes))], hex(&vaa_bytes)));
    out.push(entry(
        "vaa_body_hash",
        &[("bytes", hex(&vaa_bytes))],
        hex(&vaa_body_hash(&vaa.body).0),
    ));

    let bound = encode_bound_payload(&BoundPayload {
        secret_hash: secret_hash(&FieldElement::from_u64(1)),
        message: b"hello".to_vec(),
    });
    out.push(entry("bound_payload_roundtrip", &[("bytes", hex(&bound))], hex(&bound)));

    let receipt_bytes = encode_receipt(&sample_receipt());
    out.push(entry("receipt_roundtrip", &[("bytes", hex(&receipt_bytes))], hex(&receipt_bytes)));

    out
}

fn need<'a>(e: &'a VectorEntry, key: &str) -> Result<&'a str, String> {
    e.inputs.get(key).map(|s| s.as_str()).ok_or_else(|| format!("op {}: missing input {key}", e.op))
}

fn recompute(e: &VectorEntry) -> Result<String, String> {
    let out = match e.op.as_str() {
        "keccak256" => {
            let data = decode_hex(need(e, "data")?).map_err(|err| err.to_string())?;
            hex(&keccak256(&data).0)
        }
        "to_field" => {
            let bytes = decode_hex_exact::<32>(need(e, "bytes")?)?;
            hex(&to_field(&Digest32(bytes)).to_be_bytes())
        }
        "domain_tag" => {
            let chain = u16::from_be_bytes(decode_hex_exact::<2>(need(e, "emitter_chain")?)?);
            let emitter = Bytes32(decode_hex_exact::<32>(need(e, "emitter_address")?)?);
            let seq = u64::from_be_bytes(decode_hex_exact::<8>(need(e, "sequence")?)?);
            hex(&domain_tag(chain, &emitter, seq).0)
        }
        "commitment" => {
            let dom = Digest32(decode_hex_exact::<32>(need(e, "dom")?)?);
            let m = decode_hex(need(e, "m")?).map_err(|err| err.to_string())?;
            hex(&commitment(&dom, &m).to_be_bytes())
        }
        "secret_hash" => {
            let s = FieldElement::try_from_be_bytes(&decode_hex_exact::<32>(need(e, "s")?)?)
                .map_err(|err| err.to_string())?;
            hex(&secret_hash(&s).0)
        }
        "vaa_roundtrip" => {
            let bytes = decode_hex(need(e, "bytes")?).map_err(|err| err.to_string())?;
            let vaa = decode_vaa(&bytes).map_err(|err| err.to_string())?;
            hex(&encode_vaa(&vaa))
        }
        "vaa_body_hash" => {
            let bytes = decode_hex(need(e, "bytes")?).map_err(|err| err.to_string())?;
            let vaa = decode_vaa(&bytes).map_err(|err| err.to_string())?;
            hex(&vaa_body_hash(&vaa.body).0)
        }
        "bound_payload_roundtrip" => {
            let bytes = decode_hex(need(e, "bytes")?).map_err(|err| err.to_string())?;
            let p = parse_bound_payload(&bytes).map_err(|err| err.to_string())?;
            hex(&encode_bound_payload(&p))
        }
        "receipt_roundtrip" => {
            let bytes = decode_hex(need(e, "bytes")?).map_err(|err| err.to_string())?;
            let r = decode_receipt(&bytes).map_err(|err| err.to_string())?;
            hex(&encode_receipt(&r))
        }
        other => return Err(format!("unknown vector op {other}")),
    };
    Ok(out)
}

/// Recomputes every entry; returns one message per mismatch.
pub fn verify(entries: &[VectorEntry]) -> Result<(), Vec<String>> {
    let mut problems = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        match recompute(e) {
            Ok(got) if got == e.output => {}
            Ok(got) => problems.push(format!(
                "entry {i} (op {}): expected {}, recomputed {got}",
                e.op, e.output
            )),
            Err(err) => problems.push(format!("entry {i} (op {}): {err}", e.op)),
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems)
    }
}
