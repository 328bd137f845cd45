//! Bit-exact serialization of VAAs, the bound payload, and the canonical
//! receipt payload, with strict parsers.
//!
//! Every multi-byte integer is big-endian on the wire. Parsers consume the
//! whole buffer and reject anything the encoder could not have produced:
//! truncated input, trailing bytes, oversized payloads, and out-of-order
//! guardian indices.

use serde::{Deserialize, Serialize};

use crate::crypto::{keccak256, Digest32, GuardianSignature};
use crate::types::{hexvec, Bytes32, ChainId, Sequence};

/// Upper bound on VAA payload length (64 KiB).
pub const MAX_PAYLOAD_LEN: usize = 64 * 1024;

/// Exact wire length of a [`ReceiptPayload`].
pub const RECEIPT_PAYLOAD_LEN: usize = 1 + 2 + 32 + 8 + 32 + 32 + 32 + 32 + 32;

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum CodecError {
    #[error("malformed VAA: {0}")]
    MalformedVaa(&'static str),
    #[error("bound payload too short: need at least 32 bytes, got {0}")]
    PayloadTooShort(usize),
    #[error("malformed receipt: expected exactly {RECEIPT_PAYLOAD_LEN} bytes, got {0}")]
    MalformedReceipt(usize),
    #[error("unsupported receipt version {0} (require 1)")]
    UnsupportedVersion(u8),
}

/// The signed portion of a VAA.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VaaBody {
    pub version: u8,
    pub guardian_set_index: u32,
    pub timestamp: u32,
    pub nonce: u32,
    pub emitter_chain: ChainId,
    pub emitter_address: Bytes32,
    pub sequence: Sequence,
    pub consistency_level: u8,
    #[serde(with = "hexvec")]
    pub payload: Vec<u8>,
}

impl VaaBody {
    /// Canonical body serialization, the preimage of [`vaa_body_hash`]:
    /// version (1) || guardian_set_index (4) || timestamp (4) || nonce (4) ||
    /// emitter_chain (2) || emitter_address (32) || sequence (8) ||
    /// consistency_level (1) || payload_len (4) || payload.
    pub fn serialize(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(60 + self.payload.len());
        out.push(self.version);
        out.extend_from_slice(&self.guardian_set_index.to_be_bytes());
        out.extend_from_slice(&self.timestamp.to_be_bytes());
        out.extend_from_slice(&self.nonce.to_be_bytes());
        out.extend_from_slice(&self.emitter_chain.to_be_bytes());
        out.extend_from_slice(&self.emitter_address.0);
        out.extend_from_slice(&self.sequence.to_be_bytes());
        out.push(self.consistency_level);
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }
}

/// A signed verifiable action approval: body plus guardian signatures keyed
/// by strictly increasing guardian index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vaa {
    #[serde(flatten)]
    pub body: VaaBody,
    pub signatures: Vec<SignatureEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureEntry {
    pub index: u8,
    pub signature: GuardianSignature,
}

impl Vaa {
    pub fn signature_pairs(&self) -> Vec<(u8, GuardianSignature)> {
        self.signatures.iter().map(|e| (e.index, e.signature)).collect()
    }
}

/// The replay-lock hash `h`: a single Keccak-256 over the serialized body.
/// The guardian signing digest is `Keccak-256(h)`.
pub fn vaa_body_hash(body: &VaaBody) -> Digest32 {
    keccak256(&body.serialize())
}

/// VAA wire layout: version (1) || guardian_set_index (4) || num_signatures
/// (1) || (guardian_index (1) || signature (65))* || body without its leading
/// version/guardian_set_index fields.
pub fn encode_vaa(vaa: &Vaa) -> Vec<u8> {
    let body = vaa.body.serialize();
    let mut out = Vec::with_capacity(body.len() + 2 + 66 * vaa.signatures.len());
    out.push(vaa.body.version);
    out.extend_from_slice(&vaa.body.guardian_set_index.to_be_bytes());
    out.push(vaa.signatures.len() as u8);
    for entry in &vaa.signatures {
        out.push(entry.index);
        out.extend_from_slice(&entry.signature.0);
    }
    // Body fields after version + guardian_set_index.
    out.extend_from_slice(&body[5..]);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.buf.len() - self.pos < n {
            return Err(CodecError::MalformedVaa("truncated"));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CodecError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn bytes32(&mut self) -> Result<Bytes32, CodecError> {
        Ok(Bytes32(self.take(32)?.try_into().unwrap()))
    }

    fn finish(&self) -> Result<(), CodecError> {
        if self.pos != self.buf.len() {
            return Err(CodecError::MalformedVaa("trailing bytes"));
        }
        Ok(())
    }
}

pub fn decode_vaa(buf: &[u8]) -> Result<Vaa, CodecError> {
    let mut r = Reader::new(buf);
    let version = r.u8()?;
    let guardian_set_index = r.u32()?;
    let sig_count = r.u8()? as usize;
    let mut signatures = Vec::with_capacity(sig_count);
    let mut prev: Option<u8> = None;
    for _ in 0..sig_count {
        let index = r.u8()?;
        if let Some(p) = prev {
            if index <= p {
                return Err(CodecError::MalformedVaa("guardian indices not strictly increasing"));
            }
        }
        prev = Some(index);
        let signature = GuardianSignature(r.take(65)?.try_into().unwrap());
        signatures.push(SignatureEntry { index, signature });
    }
    let timestamp = r.u32()?;
    let nonce = r.u32()?;
    let emitter_chain = r.u16()?;
    let emitter_address = r.bytes32()?;
    let sequence = r.u64()?;
    let consistency_level = r.u8()?;
    let payload_len = r.u32()? as usize;
    if payload_len > MAX_PAYLOAD_LEN {
        return Err(CodecError::MalformedVaa("payload exceeds maximum length"));
    }
    let payload = r.take(payload_len)?.to_vec();
    r.finish()?;
    Ok(Vaa {
        body: VaaBody {
            version,
            guardian_set_index,
            timestamp,
            nonce,
            emitter_chain,
            emitter_address,
            sequence,
            consistency_level,
            payload,
        },
        signatures,
    })
}

/// The bound VAA payload `secretHash || m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundPayload {
    pub secret_hash: Digest32,
    #[serde(with = "hexvec")]
    pub message: Vec<u8>,
}

pub fn encode_bound_payload(p: &BoundPayload) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + p.message.len());
    out.extend_from_slice(&p.secret_hash.0);
    out.extend_from_slice(&p.message);
    out
}

/// First 32 bytes are the secret hash, the remainder (possibly empty) is the
/// opaque user message.
pub fn parse_bound_payload(buf: &[u8]) -> Result<BoundPayload, CodecError> {
    if buf.len() < 32 {
        return Err(CodecError::PayloadTooShort(buf.len()));
    }
    Ok(BoundPayload {
        secret_hash: Digest32(buf[..32].try_into().unwrap()),
        message: buf[32..].to_vec(),
    })
}

/// Canonical receipt record binding the origin triple to the Aztec
/// consumption facts. Always exactly [`RECEIPT_PAYLOAD_LEN`] bytes on the
/// wire; `leaf_index` is a full-width big-endian uint256.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiptPayload {
    pub version: u8,
    pub orig_emitter_chain: ChainId,
    pub orig_emitter: Bytes32,
    pub orig_sequence: Sequence,
    pub commitment: Bytes32,
    pub aztec_key: Digest32,
    pub leaf_index: Bytes32,
    pub secret_hash: Digest32,
    pub result_hash: Digest32,
}

impl ReceiptPayload {
    pub fn require_version_1(&self) -> Result<(), CodecError> {
        if self.version != 1 {
            return Err(CodecError::UnsupportedVersion(self.version));
        }
        Ok(())
    }
}

pub fn encode_receipt(r: &ReceiptPayload) -> Vec<u8> {
    let mut out = Vec::with_capacity(RECEIPT_PAYLOAD_LEN);
    out.push(r.version);
    out.extend_from_slice(&r.orig_emitter_chain.to_be_bytes());
    out.extend_from_slice(&r.orig_emitter.0);
    out.extend_from_slice(&r.orig_sequence.to_be_bytes());
    out.extend_from_slice(&r.commitment.0);
    out.extend_from_slice(&r.aztec_key.0);
    out.extend_from_slice(&r.leaf_index.0);
    out.extend_from_slice(&r.secret_hash.0);
    out.extend_from_slice(&r.result_hash.0);
    debug_assert_eq!(out.len(), RECEIPT_PAYLOAD_LEN);
    out
}

pub fn decode_receipt(buf: &[u8]) -> Result<ReceiptPayload, CodecError> {
    if buf.len() != RECEIPT_PAYLOAD_LEN {
        return Err(CodecError::MalformedReceipt(buf.len()));
    }
    let mut r = Reader::new(buf);
    let receipt = ReceiptPayload {
        version: r.u8().unwrap(),
        orig_emitter_chain: r.u16().unwrap(),
        orig_emitter: r.bytes32().unwrap(),
        orig_sequence: r.u64().unwrap(),
        commitment: r.bytes32().unwrap(),
        aztec_key: Digest32(r.take(32).unwrap().try_into().unwrap()),
        leaf_index: r.bytes32().unwrap(),
        secret_hash: Digest32(r.take(32).unwrap().try_into().unwrap()),
        result_hash: Digest32(r.take(32).unwrap().try_into().unwrap()),
    };
    Ok(receipt)
}
