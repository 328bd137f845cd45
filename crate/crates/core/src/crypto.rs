//! Hashing, BN254 scalar-field reduction, domain separation, secret
//! commitments, and guardian signature primitives.
//!
//! Everything here is a pure function of its inputs; values are immutable
//! after construction and safe to share across threads.

use k256::ecdsa::{RecoveryId, Signature, SigningKey, VerifyingKey};
use sha3::{Digest as _, Keccak256};

use crate::types::{hex_byte_newtype, Bytes32, ChainId, Sequence};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

hex_byte_newtype!(
    /// A 32-byte hash output. Houses every Keccak-256 digest in the protocol:
    /// domain tags, secret hashes, and VAA body hashes.
    Digest32,
    32
);

hex_byte_newtype!(
    /// 20-byte recoverable signer address: the low 20 bytes of
    /// Keccak-256 over the uncompressed secp256k1 public key.
    GuardianAddress,
    20
);

hex_byte_newtype!(
    /// Recoverable ECDSA signature, `r || s || v` with `v` in {0, 1}.
    GuardianSignature,
    65
);

/// ASCII prefix of the domain separation tag preimage.
pub const DOMAIN_TAG_PREFIX: &[u8; 7] = b"ZKCB/v1";

/// BN254 scalar field modulus `r`, big-endian.
///
/// Decimal value (cross-checked at test time against an independent
/// arbitrary-precision computation):
/// 21888242871839275222246405745257275088548364400416034343698204186575808495617
pub const BN254_SCALAR_MODULUS_BE: [u8; 32] = [
    0x30, 0x64, 0x4e, 0x72, 0xe1, 0x31, 0xa0, 0x29, 0xb8, 0x50, 0x45, 0xb6, 0x81, 0x81, 0x58,
    0x5d, 0x28, 0x33, 0xe8, 0x48, 0x79, 0xb9, 0x70, 0x91, 0x43, 0xe1, 0xf5, 0x93, 0xf0, 0x00,
    0x00, 0x01,
];

pub const BN254_SCALAR_MODULUS_DECIMAL: &str =
    "21888242871839275222246405745257275088548364400416034343698204186575808495617";

// Little-endian u64 limbs of the modulus, least significant first.
const R_LIMBS: [u64; 4] = [
    0x43e1f593f0000001,
    0x2833e84879b97091,
    0xb85045b68181585d,
    0x30644e72e131a029,
];

/// An element of the BN254 scalar field, always the canonical representative
/// (`0 <= value < r`). Stored as four little-endian u64 limbs.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElement {
    limbs: [u64; 4],
}

fn limbs_from_be(bytes: &[u8; 32]) -> [u64; 4] {
    let mut limbs = [0u64; 4];
    for (i, limb) in limbs.iter_mut().enumerate() {
        let start = 32 - 8 * (i + 1);
        *limb = u64::from_be_bytes(bytes[start..start + 8].try_into().unwrap());
    }
    limbs
}

fn limbs_lt(a: &[u64; 4], b: &[u64; 4]) -> bool {
    for i in (0..4).rev() {
        if a[i] != b[i] {
            return a[i] < b[i];
        }
    }
    false
}

fn limbs_sub_assign(a: &mut [u64; 4], b: &[u64; 4]) {
    let mut borrow = false;
    for i in 0..4 {
        let (d, b1) = a[i].overflowing_sub(b[i]);
        let (d, b2) = d.overflowing_sub(borrow as u64);
        a[i] = d;
        borrow = b1 || b2;
    }
    debug_assert!(!borrow, "subtraction underflow");
}

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement { limbs: [0; 4] };

    pub fn from_u64(v: u64) -> Self {
        FieldElement { limbs: [v, 0, 0, 0] }
    }

    /// Interprets `bytes` as a big-endian 256-bit integer and reduces mod `r`.
    ///
    /// `r` exceeds 2^253, so at most five conditional subtractions are needed.
    pub fn from_be_bytes_reduced(bytes: &[u8; 32]) -> Self {
        let mut limbs = limbs_from_be(bytes);
        while !limbs_lt(&limbs, &R_LIMBS) {
            limbs_sub_assign(&mut limbs, &R_LIMBS);
        }
        FieldElement { limbs }
    }

    /// Accepts only canonical encodings (value < r).
    pub fn try_from_be_bytes(bytes: &[u8; 32]) -> Result<Self, NonCanonicalFieldBytes> {
        let limbs = limbs_from_be(bytes);
        if limbs_lt(&limbs, &R_LIMBS) {
            Ok(FieldElement { limbs })
        } else {
            Err(NonCanonicalFieldBytes)
        }
    }

    pub fn to_be_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        for (i, limb) in self.limbs.iter().enumerate() {
            let start = 32 - 8 * (i + 1);
            out[start..start + 8].copy_from_slice(&limb.to_be_bytes());
        }
        out
    }

    pub fn to_bytes32(&self) -> Bytes32 {
        Bytes32(self.to_be_bytes())
    }

    pub fn is_zero(&self) -> bool {
        self.limbs == [0; 4]
    }

    pub fn to_hex(&self) -> String {
        format!("0x{}", hex::encode(self.to_be_bytes()))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_hex())
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement({})", self.to_hex())
    }
}

impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for FieldElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let bytes = crate::types::decode_hex_exact::<32>(&s).map_err(D::Error::custom)?;
        FieldElement::try_from_be_bytes(&bytes).map_err(D::Error::custom)
    }
}

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
#[error("32-byte string is not a canonical field element (value >= r)")]
pub struct NonCanonicalFieldBytes;

/// Keccak-256 over `data`. Empty input is allowed.
pub fn keccak256(data: &[u8]) -> Digest32 {
    Digest32(Keccak256::digest(data).into())
}

/// Keccak-256 over the concatenation of `parts`, without materializing the
/// concatenated buffer.
pub fn keccak256_concat(parts: &[&[u8]]) -> Digest32 {
    let mut hasher = Keccak256::new();
    for p in parts {
        hasher.update(p);
    }
    Digest32(hasher.finalize().into())
}

/// Canonical reduction of a 32-byte digest, interpreted big-endian, into the
/// scalar field.
pub fn to_field(d: &Digest32) -> FieldElement {
    FieldElement::from_be_bytes_reduced(&d.0)
}

/// Per-origin domain separation tag:
/// `Keccak-256("ZKCB/v1" || chain (2 bytes BE) || emitter (32 bytes) || sequence (8 bytes BE))`.
pub fn domain_tag(emitter_chain: ChainId, emitter_address: &Bytes32, sequence: Sequence) -> Digest32 {
    keccak256_concat(&[
        DOMAIN_TAG_PREFIX,
        &emitter_chain.to_be_bytes(),
        &emitter_address.0,
        &sequence.to_be_bytes(),
    ])
}

/// Domain-separated field commitment to a user message:
/// `toField(Keccak-256(dom || m))`.
pub fn commitment(dom: &Digest32, m: &[u8]) -> FieldElement {
    to_field(&keccak256_concat(&[&dom.0, m]))
}

/// Hash of a consumer secret: Keccak-256 over the 32-byte big-endian field
/// encoding of `s`. Kept behind this one function so an Aztec-native hash can
/// replace it without touching callers.
pub fn secret_hash(s: &FieldElement) -> Digest32 {
    keccak256(&s.to_be_bytes())
}

/// A guardian's secp256k1 signing key plus its recoverable address.
#[derive(Clone)]
pub struct GuardianKeyPair {
    signing: SigningKey,
    address: GuardianAddress,
}

impl GuardianKeyPair {
    pub fn generate(rng: &mut (impl rand_chacha::rand_core::CryptoRng + rand_chacha::rand_core::RngCore)) -> Self {
        let signing = SigningKey::random(rng);
        let address = address_of(signing.verifying_key());
        GuardianKeyPair { signing, address }
    }

    pub fn address(&self) -> GuardianAddress {
        self.address
    }
}

impl fmt::Debug for GuardianKeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GuardianKeyPair({})", self.address.to_hex())
    }
}

fn address_of(key: &VerifyingKey) -> GuardianAddress {
    let point = key.to_encoded_point(false);
    // Skip the 0x04 uncompressed-point marker, keep the low 20 digest bytes.
    let digest = keccak256(&point.as_bytes()[1..]);
    let mut addr = [0u8; 20];
    addr.copy_from_slice(&digest.0[12..]);
    GuardianAddress(addr)
}

/// Signs the 32-byte digest directly; `recover_signer(d, sig)` yields the
/// signer's address.
pub fn sign_digest(d: &Digest32, key: &GuardianKeyPair) -> GuardianSignature {
    let (sig, recid): (Signature, RecoveryId) = key
        .signing
        .sign_prehash_recoverable(&d.0)
        .expect("signing a 32-byte digest cannot fail");
    let mut out = [0u8; 65];
    out[..64].copy_from_slice(&sig.to_bytes());
    out[64] = recid.to_byte();
    GuardianSignature(out)
}

/// Recovers the signer address, or `None` for malformed signatures.
pub fn recover_signer(d: &Digest32, sig: &GuardianSignature) -> Option<GuardianAddress> {
    let recid = RecoveryId::from_byte(sig.0[64])?;
    let sig = Signature::from_slice(&sig.0[..64]).ok()?;
    let key = VerifyingKey::recover_from_prehash(&d.0, &sig, recid).ok()?;
    Some(address_of(&key))
}

/// The guardian committee: ordered addresses plus the quorum threshold
/// `floor(2n/3) + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuardianSet {
    pub index: u32,
    pub keys: Vec<GuardianAddress>,
    pub quorum: usize,
}

impl GuardianSet {
    pub fn new(index: u32, keys: Vec<GuardianAddress>) -> Self {
        assert!(keys.len() <= 256, "guardian indices are u8");
        let quorum = quorum_for(keys.len());
        for (i, a) in keys.iter().enumerate() {
            assert!(
                !keys[..i].contains(a),
                "guardian addresses must be distinct"
            );
        }
        GuardianSet { index, keys, quorum }
    }
}

pub fn quorum_for(n: usize) -> usize {
    2 * n / 3 + 1
}

/// Quorum verification over a VAA body digest.
///
/// The digest guardians actually sign is `Keccak-256(body_digest)`, mirroring
/// the deployed double-hash convention. Returns true iff the list holds at
/// least `set.quorum` entries, guardian indices are strictly increasing and in
/// range, and every signature recovers to the listed guardian's address.
/// Malformed signatures make the whole list invalid; nothing panics.
pub fn verify_quorum(
    body_digest: &Digest32,
    sigs: &[(u8, GuardianSignature)],
    set: &GuardianSet,
) -> bool {
    if sigs.len() < set.quorum {
        return false;
    }
    let signing_digest = keccak256(&body_digest.0);
    let mut prev: Option<u8> = None;
    for (index, sig) in sigs {
        if let Some(p) = prev {
            if *index <= p {
                return false;
            }
        }
        prev = Some(*index);
        let Some(expected) = set.keys.get(*index as usize) else {
            return false;
        };
        match recover_signer(&signing_digest, sig) {
            Some(addr) if addr == *expected => {}
            _ => return false,
        }
    }
    true
}
