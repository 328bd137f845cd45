//! The EVM Portal state machine: VAA verification, origin check, atomic
//! replay lock, bound-payload parsing, commitment derivation, and inbox
//! enqueue -- on both the normative and the legacy interface.
//!
//! Transition order follows the protocol's preconditions exactly: signature
//! and well-formedness first, then the configured origin pair, then the
//! replay lock on the body hash, then payload parsing. A failure at any point
//! leaves the portal, the inbox, and the event log untouched.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::aztec::AztecState;
use crate::codec::{
    self, parse_bound_payload, ReceiptPayload, Vaa, RECEIPT_PAYLOAD_LEN,
};
use crate::crypto::{
    commitment, domain_tag, keccak256_concat, to_field, verify_quorum, Digest32, FieldElement,
    GuardianSet,
};
use crate::types::{hexvec, Bytes32, ChainId, PortalAddress, Sequence};

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum PortalError {
    #[error("invalid VAA: {0}")]
    InvalidVaa(String),
    #[error("VAA origin ({chain}, {emitter}) does not match the configured origin")]
    WrongOrigin { chain: ChainId, emitter: Bytes32 },
    #[error("VAA body hash {0} was already consumed")]
    AlreadyConsumed(Digest32),
    #[error("bound payload too short: need at least 32 bytes, got {0}")]
    PayloadTooShort(usize),
    #[error("legacy consumeWithSecret path is disabled")]
    LegacyDisabled,
    #[error("no consumption recorded for body hash {0}")]
    UnknownConsumption(Digest32),
}

/// Immutable Portal deployment parameters.
#[derive(Clone, Debug)]
pub struct PortalConfig {
    pub emitter_chain: ChainId,
    pub emitter: Bytes32,
    /// The Portal's own L1 address, used as the inbox leaf sender.
    pub portal_address: PortalAddress,
    pub l2_instance: Bytes32,
    pub rollup_version: u32,
    pub guardian_set: GuardianSet,
    pub legacy_enabled: bool,
}

/// Facts retained per consumed body hash so a receipt can be published later.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsumedEntry {
    pub sequence: Sequence,
    pub commitment: FieldElement,
}

/// Portal events, emitted in order, one JSON object per line when logged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PortalEvent {
    VaaConsumed {
        h: Digest32,
        seq: Sequence,
        #[serde(with = "hexvec")]
        payload: Vec<u8>,
        aztec_key: Digest32,
    },
    InboxEnqueued {
        h: Digest32,
        seq: Sequence,
        c: FieldElement,
        key: Digest32,
        leaf_index: u64,
        secret_hash: Digest32,
    },
}

/// Summary of a successful consume, so callers need not scan events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnqueueResult {
    pub h: Digest32,
    pub sequence: Sequence,
    pub commitment: FieldElement,
    pub secret_hash: Digest32,
    pub aztec_key: Digest32,
    pub leaf_index: u64,
}

/// Facts observed on Aztec that go into a receipt alongside the Portal's own
/// record of the consumption.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AztecFacts {
    pub aztec_key: Digest32,
    pub leaf_index: u64,
    pub secret_hash: Digest32,
    pub result_hash: Digest32,
}

/// Portal state: configuration plus the grow-only consumed set (keyed by
/// body hash, carrying the facts needed for receipts) and the event log.
#[derive(Clone, Debug)]
pub struct Portal {
    pub config: PortalConfig,
    consumed: BTreeMap<Digest32, ConsumedEntry>,
    events: Vec<PortalEvent>,
}

impl Portal {
    pub fn new(config: PortalConfig) -> Self {
        Portal { config, consumed: BTreeMap::new(), events: Vec::new() }
    }

    pub fn consumed_len(&self) -> usize {
        self.consumed.len()
    }

    pub fn is_consumed(&self, h: &Digest32) -> bool {
        self.consumed.contains_key(h)
    }

    pub fn consumed_entry(&self, h: &Digest32) -> Option<&ConsumedEntry> {
        self.consumed.get(h)
    }

    pub fn events(&self) -> &[PortalEvent] {
        &self.events
    }

    /// The event log as JSONL, one event per line, hex-encoded byte fields.
    pub fn events_jsonl(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            out.push_str(&serde_json::to_string(event).expect("events serialize"));
            out.push('\n');
        }
        out
    }

    /// Normative entry point: verifies the VAA, checks the configured origin,
    /// enforces the replay lock on the body hash, parses `secretHash || m`
    /// from the attested payload, computes the domain-separated commitment,
    /// and enqueues `(c, secretHash)` into the Aztec inbox.
    pub fn consume(
        &mut self,
        aztec: &mut AztecState,
        encoded_vaa: &[u8],
    ) -> Result<EnqueueResult, PortalError> {
        let (vaa, h) = self.verify_and_admit(encoded_vaa)?;
        let bound = parse_bound_payload(&vaa.body.payload)
            .map_err(|_| PortalError::PayloadTooShort(vaa.body.payload.len()))?;
        let dom = domain_tag(vaa.body.emitter_chain, &vaa.body.emitter_address, vaa.body.sequence);
        let c = commitment(&dom, &bound.message);
        Ok(self.commit(aztec, vaa, h, c, bound.secret_hash))
    }

    /// Legacy `consumeWithSecret` path, kept behind the feature flag. The
    /// secret hash comes from the caller rather than the payload, and the
    /// whole payload is treated as the message with no domain tag:
    /// `c = toField(Keccak-256(payload))`. The replay lock still applies.
    pub fn consume_with_secret(
        &mut self,
        aztec: &mut AztecState,
        encoded_vaa: &[u8],
        secret_hash: Digest32,
    ) -> Result<EnqueueResult, PortalError> {
        if !self.config.legacy_enabled {
            return Err(PortalError::LegacyDisabled);
        }
        let (vaa, h) = self.verify_and_admit(encoded_vaa)?;
        let c = to_field(&crate::crypto::keccak256(&vaa.body.payload));
        Ok(self.commit(aztec, vaa, h, c, secret_hash))
    }

    /// Builds the version-1 receipt for a previously consumed VAA, combining
    /// the Portal's own record of the origin triple and commitment with the
    /// caller-observed Aztec facts.
    pub fn publish_receipt(
        &self,
        h: &Digest32,
        facts: &AztecFacts,
    ) -> Result<ReceiptPayload, PortalError> {
        let entry = self.consumed.get(h).ok_or(PortalError::UnknownConsumption(*h))?;
        let receipt = ReceiptPayload {
            version: 1,
            orig_emitter_chain: self.config.emitter_chain,
            orig_emitter: self.config.emitter,
            orig_sequence: entry.sequence,
            commitment: entry.commitment.to_bytes32(),
            aztec_key: facts.aztec_key,
            leaf_index: Bytes32::from_u64_be(facts.leaf_index),
            secret_hash: facts.secret_hash,
            result_hash: facts.result_hash,
        };
        debug_assert_eq!(codec::encode_receipt(&receipt).len(), RECEIPT_PAYLOAD_LEN);
        Ok(receipt)
    }

    /// Preconditions shared by both interfaces, in order: decode and quorum
    /// verification, origin equality, replay lock. No state is touched.
    fn verify_and_admit(&self, encoded_vaa: &[u8]) -> Result<(Vaa, Digest32), PortalError> {
        let vaa = codec::decode_vaa(encoded_vaa).map_err(|e| PortalError::InvalidVaa(e.to_string()))?;
        let h = codec::vaa_body_hash(&vaa.body);
        if !verify_quorum(&h, &vaa.signature_pairs(), &self.config.guardian_set) {
            return Err(PortalError::InvalidVaa("guardian quorum verification failed".into()));
        }
        if vaa.body.emitter_chain != self.config.emitter_chain
            || vaa.body.emitter_address != self.config.emitter
        {
            return Err(PortalError::WrongOrigin {
                chain: vaa.body.emitter_chain,
                emitter: vaa.body.emitter_address,
            });
        }
        if self.consumed.contains_key(&h) {
            return Err(PortalError::AlreadyConsumed(h));
        }
        Ok((vaa, h))
    }

    /// The atomic tail of a successful transition: locks the body hash,
    /// enqueues to the inbox, and emits VaaConsumed then InboxEnqueued.
    fn commit(
        &mut self,
        aztec: &mut AztecState,
        vaa: Vaa,
        h: Digest32,
        c: FieldElement,
        secret_hash: Digest32,
    ) -> EnqueueResult {
        let sequence = vaa.body.sequence;
        self.consumed.insert(h, ConsumedEntry { sequence, commitment: c });
        let leaf_index = aztec.inbox_enqueue(
            c,
            secret_hash,
            self.config.portal_address,
            (self.config.l2_instance, self.config.rollup_version),
        );
        let aztec_key = aztec_key(
            &self.config.l2_instance,
            self.config.rollup_version,
            &c,
            &secret_hash,
            leaf_index,
        );
        self.events.push(PortalEvent::VaaConsumed {
            h,
            seq: sequence,
            payload: vaa.body.payload,
            aztec_key,
        });
        self.events.push(PortalEvent::InboxEnqueued {
            h,
            seq: sequence,
            c,
            key: aztec_key,
            leaf_index,
            secret_hash,
        });
        EnqueueResult { h, sequence, commitment: c, secret_hash, aztec_key, leaf_index }
    }
}

/// Injective key over the enqueued tuple, carried in events and receipts:
/// `Keccak-256(l2_instance || rollup_version (4 BE) || c (32 BE) ||
/// secret_hash || leaf_index (32 BE))`.
pub fn aztec_key(
    l2_instance: &Bytes32,
    rollup_version: u32,
    c: &FieldElement,
    secret_hash: &Digest32,
    leaf_index: u64,
) -> Digest32 {
    keccak256_concat(&[
        &l2_instance.0,
        &rollup_version.to_be_bytes(),
        &c.to_be_bytes(),
        &secret_hash.0,
        &Bytes32::from_u64_be(leaf_index).0,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{encode_vaa, vaa_body_hash, BoundPayload, SignatureEntry, VaaBody};
    use crate::crypto::{keccak256, secret_hash as hash_secret, sign_digest, GuardianKeyPair};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const EMITTER: Bytes32 = Bytes32([1u8; 32]);
    const PORTAL_ADDR: PortalAddress = PortalAddress([0xAB; 20]);
    const L2: Bytes32 = Bytes32([0x22; 32]);

    struct Fixture {
        portal: Portal,
        aztec: AztecState,
        keys: Vec<GuardianKeyPair>,
    }

    fn fixture(legacy: bool) -> Fixture {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let keys: Vec<GuardianKeyPair> =
            (0..5).map(|_| GuardianKeyPair::generate(&mut rng)).collect();
        let set = GuardianSet::new(0, keys.iter().map(|k| k.address()).collect());
        let portal = Portal::new(PortalConfig {
            emitter_chain: 1,
            emitter: EMITTER,
            portal_address: PORTAL_ADDR,
            l2_instance: L2,
            rollup_version: 1,
            guardian_set: set,
            legacy_enabled: legacy,
        });
        let mut aztec = AztecState::new();
        aztec.set_portal_once(PORTAL_ADDR).unwrap();
        Fixture { portal, aztec, keys }
    }

    fn bound_payload(secret: u64, message: &[u8]) -> Vec<u8> {
        codec::encode_bound_payload(&BoundPayload {
            secret_hash: hash_secret(&FieldElement::from_u64(secret)),
            message: message.to_vec(),
        })
    }

    fn signed_vaa(fx: &Fixture, sequence: Sequence, payload: Vec<u8>) -> Vaa {
        signed_vaa_from(fx, 1, EMITTER, sequence, payload)
    }

    fn signed_vaa_from(
        fx: &Fixture,
        chain: ChainId,
        emitter: Bytes32,
        sequence: Sequence,
        payload: Vec<u8>,
    ) -> Vaa {
        let body = VaaBody {
            version: 1,
            guardian_set_index: 0,
            timestamp: 0,
            nonce: 0,
            emitter_chain: chain,
            emitter_address: emitter,
            sequence,
            consistency_level: 1,
            payload,
        };
        let signing = keccak256(&vaa_body_hash(&body).0);
        let signatures = fx
            .keys
            .iter()
            .enumerate()
            .map(|(i, k)| SignatureEntry { index: i as u8, signature: sign_digest(&signing, k) })
            .collect();
        Vaa { body, signatures }
    }

    #[test]
    fn normative_consume_enqueues_bound_parameters() {
        let mut fx = fixture(false);
        let vaa = signed_vaa(&fx, 0, bound_payload(7, b"hello"));
        let res = fx.portal.consume(&mut fx.aztec, &encode_vaa(&vaa)).unwrap();

        assert_eq!(fx.portal.consumed_len(), 1);
        assert_eq!(fx.portal.events().len(), 2);
        assert_eq!(fx.aztec.leaves().len(), 1);

        let expected_sh = hash_secret(&FieldElement::from_u64(7));
        let dom = domain_tag(1, &EMITTER, 0);
        let expected_c = commitment(&dom, b"hello");
        assert_eq!(res.secret_hash, expected_sh);
        assert_eq!(res.commitment, expected_c);
        assert_eq!(res.leaf_index, 0);

        let leaf = &fx.aztec.leaves()[0];
        assert_eq!(leaf.content, expected_c);
        assert_eq!(leaf.secret_hash, expected_sh);
        assert_eq!(leaf.sender, PORTAL_ADDR);

        match &fx.portal.events()[1] {
            PortalEvent::InboxEnqueued { c, secret_hash, leaf_index, .. } => {
                assert_eq!(*c, expected_c);
                assert_eq!(*secret_hash, expected_sh);
                assert_eq!(*leaf_index, 0);
            }
            other => panic!("expected InboxEnqueued, got {other:?}"),
        }
    }

    #[test]
    fn replay_rejected_atomically() {
        let mut fx = fixture(false);
        let encoded = encode_vaa(&signed_vaa(&fx, 0, bound_payload(7, b"m")));
        fx.portal.consume(&mut fx.aztec, &encoded).unwrap();

        let consumed_before = fx.portal.consumed_len();
        let events_before = fx.portal.events().to_vec();
        let aztec_before = fx.aztec.clone();

        let err = fx.portal.consume(&mut fx.aztec, &encoded).unwrap_err();
        assert!(matches!(err, PortalError::AlreadyConsumed(_)));
        assert_eq!(fx.portal.consumed_len(), consumed_before);
        assert_eq!(fx.portal.events(), events_before.as_slice());
        assert_eq!(fx.aztec, aztec_before);
    }

    #[test]
    fn wrong_origin_rejected() {
        let mut fx = fixture(false);
        let vaa = signed_vaa_from(&fx, 1, Bytes32([9u8; 32]), 0, bound_payload(7, b"m"));
        let err = fx.portal.consume(&mut fx.aztec, &encode_vaa(&vaa)).unwrap_err();
        assert!(matches!(err, PortalError::WrongOrigin { .. }));
        assert_eq!(fx.portal.consumed_len(), 0);
        assert!(fx.portal.events().is_empty());
    }

    #[test]
    fn invalid_signature_precedes_origin_check() {
        let mut fx = fixture(false);
        // Wrong origin AND broken signatures: the error must be InvalidVaa.
        let mut vaa = signed_vaa_from(&fx, 1, Bytes32([9u8; 32]), 0, bound_payload(7, b"m"));
        vaa.signatures.truncate(1);
        let err = fx.portal.consume(&mut fx.aztec, &encode_vaa(&vaa)).unwrap_err();
        assert!(matches!(err, PortalError::InvalidVaa(_)));
    }

    #[test]
    fn wrong_origin_precedes_payload_check() {
        let mut fx = fixture(false);
        // Foreign emitter AND an under-length payload: origin wins.
        let vaa = signed_vaa_from(&fx, 1, Bytes32([9u8; 32]), 0, vec![0u8; 5]);
        let err = fx.portal.consume(&mut fx.aztec, &encode_vaa(&vaa)).unwrap_err();
        assert!(matches!(err, PortalError::WrongOrigin { .. }));
    }

    #[test]
    fn tampered_payload_fails_verification() {
        let mut fx = fixture(false);
        let vaa = signed_vaa(&fx, 0, bound_payload(7, b"message"));
        let mut bytes = encode_vaa(&vaa);
        let n = bytes.len();
        bytes[n - 1] ^= 0xFF;
        let err = fx.portal.consume(&mut fx.aztec, &bytes).unwrap_err();
        assert!(matches!(err, PortalError::InvalidVaa(_)));
    }

    #[test]
    fn short_payload_rejected_without_locking() {
        let mut fx = fixture(false);
        let vaa = signed_vaa(&fx, 0, vec![0u8; 31]);
        let err = fx.portal.consume(&mut fx.aztec, &encode_vaa(&vaa)).unwrap_err();
        assert_eq!(err, PortalError::PayloadTooShort(31));
        // The body hash must NOT be locked by the failed attempt.
        assert_eq!(fx.portal.consumed_len(), 0);
        assert!(fx.portal.events().is_empty());
        assert_eq!(fx.aztec.leaves().len(), 0);
    }

    #[test]
    fn zero_secret_hash_sentinel_is_accepted() {
        let mut fx = fixture(false);
        let payload = codec::encode_bound_payload(&BoundPayload {
            secret_hash: Digest32([0u8; 32]),
            message: b"compat".to_vec(),
        });
        let vaa = signed_vaa(&fx, 0, payload);
        let res = fx.portal.consume(&mut fx.aztec, &encode_vaa(&vaa)).unwrap();
        assert_eq!(res.secret_hash, Digest32([0u8; 32]));
    }

    #[test]
    fn legacy_gate_and_caller_chosen_secret() {
        let mut fx = fixture(false);
        let encoded = encode_vaa(&signed_vaa(&fx, 0, bound_payload(7, b"m")));
        let chosen = keccak256(b"attacker choice");
        assert_eq!(
            fx.portal.consume_with_secret(&mut fx.aztec, &encoded, chosen).unwrap_err(),
            PortalError::LegacyDisabled
        );

        let mut fx = fixture(true);
        let payload = bound_payload(7, b"m");
        let encoded = encode_vaa(&signed_vaa(&fx, 0, payload.clone()));
        let res = fx.portal.consume_with_secret(&mut fx.aztec, &encoded, chosen).unwrap();
        // The enqueued secret hash is the caller's, regardless of the payload.
        assert_eq!(res.secret_hash, chosen);
        assert_ne!(res.secret_hash, hash_secret(&FieldElement::from_u64(7)));
        // Legacy commitment covers the whole payload without a domain tag.
        assert_eq!(res.commitment, to_field(&keccak256(&payload)));
    }

    #[test]
    fn legacy_replay_lock_still_holds() {
        let mut fx = fixture(true);
        let encoded = encode_vaa(&signed_vaa(&fx, 0, bound_payload(7, b"m")));
        fx.portal
            .consume_with_secret(&mut fx.aztec, &encoded, keccak256(b"first"))
            .unwrap();
        let err = fx
            .portal
            .consume_with_secret(&mut fx.aztec, &encoded, keccak256(b"second"))
            .unwrap_err();
        assert!(matches!(err, PortalError::AlreadyConsumed(_)));
    }

    #[test]
    fn migration_delta_same_payload_two_interfaces_two_commitments() {
        let payload = bound_payload(7, b"same payload");

        let mut normative = fixture(false);
        let vaa = signed_vaa(&normative, 0, payload.clone());
        let a = normative.portal.consume(&mut normative.aztec, &encode_vaa(&vaa)).unwrap();

        let mut legacy = fixture(true);
        let vaa = signed_vaa(&legacy, 0, payload);
        let b = legacy
            .portal
            .consume_with_secret(&mut legacy.aztec, &encode_vaa(&vaa), a.secret_hash)
            .unwrap();

        assert_ne!(a.commitment, b.commitment);
    }

    #[test]
    fn publish_receipt_round_trips_and_copies_origin_triple() {
        let mut fx = fixture(false);
        let vaa = signed_vaa(&fx, 3, bound_payload(7, b"m"));
        let res = fx.portal.consume(&mut fx.aztec, &encode_vaa(&vaa)).unwrap();

        let facts = AztecFacts {
            aztec_key: res.aztec_key,
            leaf_index: res.leaf_index,
            secret_hash: res.secret_hash,
            result_hash: keccak256(b"result"),
        };
        let receipt = fx.portal.publish_receipt(&res.h, &facts).unwrap();
        assert_eq!(receipt.version, 1);
        assert_eq!(receipt.orig_emitter_chain, 1);
        assert_eq!(receipt.orig_emitter, EMITTER);
        assert_eq!(receipt.orig_sequence, 3);
        assert_eq!(receipt.commitment, res.commitment.to_bytes32());
        let bytes = codec::encode_receipt(&receipt);
        assert_eq!(codec::decode_receipt(&bytes).unwrap(), receipt);

        let unknown = keccak256(b"never consumed");
        assert_eq!(
            fx.portal.publish_receipt(&unknown, &facts).unwrap_err(),
            PortalError::UnknownConsumption(unknown)
        );
    }

    #[test]
    fn event_log_serializes_to_jsonl() {
        let mut fx = fixture(false);
        let vaa = signed_vaa(&fx, 0, bound_payload(7, b"m"));
        fx.portal.consume(&mut fx.aztec, &encode_vaa(&vaa)).unwrap();
        let jsonl = fx.portal.events_jsonl();
        let lines: Vec<&str> = jsonl.lines().collect();
        assert_eq!(lines.len(), 2);
        let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(first["kind"], "vaa_consumed");
        assert!(first["h"].as_str().unwrap().starts_with("0x"));
        let second: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(second["kind"], "inbox_enqueued");
        assert_eq!(second["leaf_index"], 0);
    }

    #[test]
    fn enqueued_commitment_recomputable_from_event_payload() {
        let mut fx = fixture(false);
        for seq in 0..4u64 {
            let msg = format!("message {seq}");
            let vaa = signed_vaa(&fx, seq, bound_payload(seq + 1, msg.as_bytes()));
            fx.portal.consume(&mut fx.aztec, &encode_vaa(&vaa)).unwrap();
        }
        let events = fx.portal.events().to_vec();
        for pair in events.chunks(2) {
            let (payload, seq) = match &pair[0] {
                PortalEvent::VaaConsumed { payload, seq, .. } => (payload.clone(), *seq),
                other => panic!("expected VaaConsumed, got {other:?}"),
            };
            let c = match &pair[1] {
                PortalEvent::InboxEnqueued { c, .. } => *c,
                other => panic!("expected InboxEnqueued, got {other:?}"),
            };
            let bound = parse_bound_payload(&payload).unwrap();
            let dom = domain_tag(1, &EMITTER, seq);
            assert_eq!(commitment(&dom, &bound.message), c);
        }
    }
}
