//! Simulated Solana-side program: posts Wormhole messages with explicit
//! finality and records receipt VAAs under the normative ownership, origin,
//! key, and version checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codec::{self, ReceiptPayload, Vaa, MAX_PAYLOAD_LEN};
use crate::crypto::{verify_quorum, GuardianSet};
use crate::types::{hexvec, AccountOwnerId, Bytes32, ChainId, Finality, Sequence, SlotNumber};

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum OriginError {
    #[error("payload of {len} bytes exceeds the {max}-byte maximum")]
    PayloadTooLarge { len: usize, max: usize },
    #[error("posted-VAA account is not owned by Wormhole Core")]
    WrongAccountOwner,
    #[error("receipt origin ({chain}, {emitter}) is not allowlisted")]
    OriginNotAllowlisted { chain: ChainId, emitter: Bytes32 },
    #[error("receipt sequence {found} does not match the PDA key {expected}")]
    SequenceKeyMismatch { expected: Sequence, found: Sequence },
    #[error("unsupported receipt version {0} (require 1)")]
    UnsupportedVersion(u8),
    #[error("invalid receipt VAA: {0}")]
    InvalidVaa(String),
    #[error("a receipt for origin sequence {0} is already recorded")]
    DuplicateReceipt(Sequence),
}

/// A message handed to Wormhole Core for guardian observation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostedMessage {
    pub batch_id: u32,
    #[serde(with = "hexvec")]
    pub payload: Vec<u8>,
    pub finality: Finality,
    pub sequence: Sequence,
    pub post_slot: SlotNumber,
}

/// A VAA as it appears on Solana: account data plus the owning program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PostedVaaAccount {
    pub owner: AccountOwnerId,
    pub vaa: Vaa,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordedReceipt {
    pub receipt: ReceiptPayload,
    pub recorded_at: SlotNumber,
}

/// Fixed configuration of the origin program.
#[derive(Clone, Debug)]
pub struct OriginConfig {
    pub emitter_chain: ChainId,
    pub emitter_address: Bytes32,
    pub wormhole_core_owner: AccountOwnerId,
    /// The (chain, emitter) pair a receipt's origin triple must name.
    pub allowlist: (ChainId, Bytes32),
    pub guardian_set: GuardianSet,
    /// Reproduces the v0.1.0 recorder, which skips checks (i)-(iv).
    pub v0_1_0_compat: bool,
}

/// Origin program state: the monotonic sequence counter and the recorded
/// receipts keyed by origin sequence.
#[derive(Clone, Debug)]
pub struct OriginState {
    pub config: OriginConfig,
    next_sequence: Sequence,
    receipts: BTreeMap<Sequence, RecordedReceipt>,
}

impl OriginState {
    pub fn new(config: OriginConfig) -> Self {
        OriginState { config, next_sequence: 0, receipts: BTreeMap::new() }
    }

    pub fn next_sequence(&self) -> Sequence {
        self.next_sequence
    }

    pub fn receipts(&self) -> &BTreeMap<Sequence, RecordedReceipt> {
        &self.receipts
    }

    /// Posts a message to Wormhole Core. The returned message carries the
    /// current sequence; the counter advances by exactly one.
    pub fn post_wormhole_message(
        &mut self,
        batch_id: u32,
        payload: Vec<u8>,
        finality: Finality,
        current_slot: SlotNumber,
    ) -> Result<PostedMessage, OriginError> {
        if payload.len() > MAX_PAYLOAD_LEN {
            return Err(OriginError::PayloadTooLarge { len: payload.len(), max: MAX_PAYLOAD_LEN });
        }
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        Ok(PostedMessage { batch_id, payload, finality, sequence, post_slot: current_slot })
    }

    /// Records a receipt VAA after the normative checks:
    /// (i) the account is owned by Wormhole Core, (ii) the receipt's origin
    /// pair is allowlisted, (iii) its sequence matches the PDA key, (iv) its
    /// version is 1 -- plus quorum verification of the carrying VAA and a
    /// one-receipt-per-sequence rule. With `v0_1_0_compat` set, checks
    /// (i)-(iv) are skipped to reproduce the historic weaker recorder.
    pub fn record_receipt_from_vaa(
        &mut self,
        account: &PostedVaaAccount,
        pda_sequence_key: Sequence,
        current_slot: SlotNumber,
    ) -> Result<&RecordedReceipt, OriginError> {
        let compat = self.config.v0_1_0_compat;
        if !compat && account.owner != self.config.wormhole_core_owner {
            return Err(OriginError::WrongAccountOwner);
        }
        let body_hash = codec::vaa_body_hash(&account.vaa.body);
        if !verify_quorum(&body_hash, &account.vaa.signature_pairs(), &self.config.guardian_set) {
            return Err(OriginError::InvalidVaa("guardian quorum verification failed".into()));
        }
        let receipt = codec::decode_receipt(&account.vaa.body.payload)
            .map_err(|e| OriginError::InvalidVaa(e.to_string()))?;
        if !compat {
            let origin = (receipt.orig_emitter_chain, receipt.orig_emitter);
            if origin != self.config.allowlist {
                return Err(OriginError::OriginNotAllowlisted {
                    chain: origin.0,
                    emitter: origin.1,
                });
            }
            if receipt.orig_sequence != pda_sequence_key {
                return Err(OriginError::SequenceKeyMismatch {
                    expected: pda_sequence_key,
                    found: receipt.orig_sequence,
                });
            }
            if receipt.version != 1 {
                return Err(OriginError::UnsupportedVersion(receipt.version));
            }
        }
        let key = receipt.orig_sequence;
        if self.receipts.contains_key(&key) {
            return Err(OriginError::DuplicateReceipt(key));
        }
        self.receipts.insert(key, RecordedReceipt { receipt, recorded_at: current_slot });
        Ok(&self.receipts[&key])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{encode_receipt, SignatureEntry, VaaBody};
    use crate::crypto::{keccak256, sign_digest, GuardianKeyPair};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn keys(n: usize) -> Vec<GuardianKeyPair> {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        (0..n).map(|_| GuardianKeyPair::generate(&mut rng)).collect()
    }

    fn fixture() -> (OriginState, Vec<GuardianKeyPair>) {
        let guardian_keys = keys(5);
        let set = GuardianSet::new(0, guardian_keys.iter().map(|k| k.address()).collect());
        let config = OriginConfig {
            emitter_chain: 1,
            emitter_address: Bytes32::from_u64_be(1),
            wormhole_core_owner: AccountOwnerId([0xC0; 32]),
            allowlist: (1, Bytes32::from_u64_be(1)),
            guardian_set: set,
            v0_1_0_compat: false,
        };
        (OriginState::new(config), guardian_keys)
    }

    fn receipt_for(seq: Sequence) -> ReceiptPayload {
        ReceiptPayload {
            version: 1,
            orig_emitter_chain: 1,
            orig_emitter: Bytes32::from_u64_be(1),
            orig_sequence: seq,
            commitment: Bytes32::from_u64_be(9),
            aztec_key: keccak256(b"key"),
            leaf_index: Bytes32::from_u64_be(0),
            secret_hash: keccak256(b"sh"),
            result_hash: keccak256(b"rh"),
        }
    }

    fn signed_receipt_vaa(receipt: &ReceiptPayload, guardian_keys: &[GuardianKeyPair]) -> Vaa {
        let body = VaaBody {
            version: 1,
            guardian_set_index: 0,
            timestamp: 0,
            nonce: 0,
            emitter_chain: 2,
            emitter_address: Bytes32::from_u64_be(0xEE),
            sequence: 0,
            consistency_level: 1,
            payload: encode_receipt(receipt),
        };
        let signing = keccak256(&codec::vaa_body_hash(&body).0);
        let signatures = guardian_keys
            .iter()
            .enumerate()
            .map(|(i, k)| SignatureEntry { index: i as u8, signature: sign_digest(&signing, k) })
            .collect();
        Vaa { body, signatures }
    }

    fn account(vaa: Vaa) -> PostedVaaAccount {
        PostedVaaAccount { owner: AccountOwnerId([0xC0; 32]), vaa }
    }

    #[test]
    fn sequences_start_at_zero_and_increment() {
        let (mut origin, _) = fixture();
        for expected in 0..3 {
            let msg = origin
                .post_wormhole_message(0, b"m".to_vec(), Finality::Confirmed, expected)
                .unwrap();
            assert_eq!(msg.sequence, expected);
        }
        assert_eq!(origin.next_sequence(), 3);
    }

    #[test]
    fn oversized_payload_rejected() {
        let (mut origin, _) = fixture();
        let err = origin
            .post_wormhole_message(0, vec![0; MAX_PAYLOAD_LEN + 1], Finality::Confirmed, 0)
            .unwrap_err();
        assert!(matches!(err, OriginError::PayloadTooLarge { .. }));
        // The failed post must not consume a sequence number.
        assert_eq!(origin.next_sequence(), 0);
    }

    #[test]
    fn valid_receipt_recorded_once() {
        let (mut origin, gk) = fixture();
        let vaa = signed_receipt_vaa(&receipt_for(4), &gk);
        origin.record_receipt_from_vaa(&account(vaa.clone()), 4, 10).unwrap();
        assert_eq!(origin.receipts().len(), 1);
        assert_eq!(origin.receipts()[&4].recorded_at, 10);

        let err = origin.record_receipt_from_vaa(&account(vaa), 4, 11).unwrap_err();
        assert_eq!(err, OriginError::DuplicateReceipt(4));
        assert_eq!(origin.receipts().len(), 1);
    }

    #[test]
    fn check_i_wrong_owner() {
        let (mut origin, gk) = fixture();
        let vaa = signed_receipt_vaa(&receipt_for(0), &gk);
        let acct = PostedVaaAccount { owner: AccountOwnerId([0x01; 32]), vaa };
        assert_eq!(
            origin.record_receipt_from_vaa(&acct, 0, 0).unwrap_err(),
            OriginError::WrongAccountOwner
        );
    }

    #[test]
    fn check_ii_origin_not_allowlisted() {
        let (mut origin, gk) = fixture();
        let mut receipt = receipt_for(0);
        receipt.orig_emitter = Bytes32::from_u64_be(0xBAD);
        let vaa = signed_receipt_vaa(&receipt, &gk);
        assert!(matches!(
            origin.record_receipt_from_vaa(&account(vaa), 0, 0).unwrap_err(),
            OriginError::OriginNotAllowlisted { .. }
        ));
    }

    #[test]
    fn check_iii_sequence_key_mismatch() {
        let (mut origin, gk) = fixture();
        let vaa = signed_receipt_vaa(&receipt_for(5), &gk);
        assert_eq!(
            origin.record_receipt_from_vaa(&account(vaa), 6, 0).unwrap_err(),
            OriginError::SequenceKeyMismatch { expected: 6, found: 5 }
        );
    }

    #[test]
    fn check_iv_unsupported_version() {
        let (mut origin, gk) = fixture();
        let mut receipt = receipt_for(0);
        receipt.version = 2;
        let vaa = signed_receipt_vaa(&receipt, &gk);
        assert_eq!(
            origin.record_receipt_from_vaa(&account(vaa), 0, 0).unwrap_err(),
            OriginError::UnsupportedVersion(2)
        );
    }

    #[test]
    fn unsigned_receipt_vaa_rejected() {
        let (mut origin, gk) = fixture();
        let mut vaa = signed_receipt_vaa(&receipt_for(0), &gk);
        vaa.signatures.clear();
        assert!(matches!(
            origin.record_receipt_from_vaa(&account(vaa), 0, 0).unwrap_err(),
            OriginError::InvalidVaa(_)
        ));
    }

    #[test]
    fn compat_mode_skips_normative_checks_but_not_quorum() {
        let (mut origin, gk) = fixture();
        origin.config.v0_1_0_compat = true;

        // Version 2, wrong origin, wrong owner, wrong PDA key: all accepted.
        let mut receipt = receipt_for(3);
        receipt.version = 2;
        receipt.orig_emitter = Bytes32::from_u64_be(0xBAD);
        let vaa = signed_receipt_vaa(&receipt, &gk);
        let acct = PostedVaaAccount { owner: AccountOwnerId([0x01; 32]), vaa };
        origin.record_receipt_from_vaa(&acct, 99, 0).unwrap();
        assert_eq!(origin.receipts().len(), 1);

        // Quorum is still enforced even in compat mode.
        let mut unsigned = signed_receipt_vaa(&receipt_for(7), &gk);
        unsigned.signatures.truncate(1);
        let acct = PostedVaaAccount { owner: AccountOwnerId([0x01; 32]), vaa: unsigned };
        assert!(matches!(
            origin.record_receipt_from_vaa(&acct, 7, 0).unwrap_err(),
            OriginError::InvalidVaa(_)
        ));
    }

    #[test]
    fn emitted_sequences_have_no_gaps() {
        let (mut origin, _) = fixture();
        let mut seqs = Vec::new();
        for slot in 0..20 {
            let m = origin
                .post_wormhole_message(0, vec![], Finality::Finalized, slot)
                .unwrap();
            seqs.push(m.sequence);
        }
        assert_eq!(seqs, (0..20).collect::<Vec<_>>());
    }
}
