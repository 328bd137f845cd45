//! Simulated Wormhole guardian committee: observes posted messages and emits
//! quorum-signed VAAs only once the requested finality delay has elapsed.
//!
//! Guardians are honest and never equivocate; reorgs are the only way an
//! observed message can fail to be attested.

use std::collections::BTreeSet;

use crate::codec::{vaa_body_hash, SignatureEntry, Vaa, VaaBody};
use crate::crypto::{keccak256, sign_digest, GuardianKeyPair, GuardianSet};
use crate::origin::PostedMessage;
use crate::types::{Bytes32, ChainId, Finality, Sequence, SlotNumber};

/// Slot delays a message must age before guardians sign it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FinalityPolicy {
    pub confirmed_delay: u64,
    pub finalized_delay: u64,
}

impl FinalityPolicy {
    pub fn new(confirmed_delay: u64, finalized_delay: u64) -> Self {
        assert!(confirmed_delay <= finalized_delay);
        FinalityPolicy { confirmed_delay, finalized_delay }
    }

    pub fn delay_for(&self, finality: Finality) -> u64 {
        match finality {
            Finality::Confirmed => self.confirmed_delay,
            Finality::Finalized => self.finalized_delay,
        }
    }
}

impl Default for FinalityPolicy {
    fn default() -> Self {
        FinalityPolicy { confirmed_delay: 2, finalized_delay: 32 }
    }
}

#[derive(Clone, Debug)]
struct ObservedMessage {
    message: PostedMessage,
    emitter_chain: ChainId,
    emitter_address: Bytes32,
}

/// Outcome of a reorg applied to the guardian view of the origin chain.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReorgOutcome {
    /// Slots strictly greater than this were reverted.
    pub reverted_after_slot: SlotNumber,
    /// Pending (not yet attested) messages dropped from the queue.
    pub dropped: Vec<(Sequence, SlotNumber)>,
}

/// One logical guardian node standing in for the whole committee.
#[derive(Clone, Debug)]
pub struct GuardianNode {
    pub set: GuardianSet,
    keys: Vec<GuardianKeyPair>,
    pub policy: FinalityPolicy,
    observed: Vec<ObservedMessage>,
    seen: BTreeSet<(Bytes32, Sequence)>,
}

impl GuardianNode {
    pub fn new(keys: Vec<GuardianKeyPair>, set_index: u32, policy: FinalityPolicy) -> Self {
        let set = GuardianSet::new(set_index, keys.iter().map(|k| k.address()).collect());
        GuardianNode { set, keys, policy, observed: Vec::new(), seen: BTreeSet::new() }
    }

    pub fn pending(&self) -> usize {
        self.observed.len()
    }

    /// Enqueues a posted message for signing once its finality delay elapses.
    /// A second observation of the same (emitter, sequence) is ignored.
    pub fn observe(&mut self, message: PostedMessage, emitter_chain: ChainId, emitter_address: Bytes32) {
        if !self.seen.insert((emitter_address, message.sequence)) {
            return;
        }
        self.observed.push(ObservedMessage { message, emitter_chain, emitter_address });
    }

    /// Emits one quorum-signed VAA for every observed message whose
    /// `post_slot + delay(finality)` is at or before `current_slot`.
    pub fn emit_ready_vaas(&mut self, current_slot: SlotNumber) -> Vec<Vaa> {
        let mut ready = Vec::new();
        let mut remaining = Vec::with_capacity(self.observed.len());
        for obs in self.observed.drain(..) {
            let due = obs.message.post_slot + self.policy.delay_for(obs.message.finality);
            if due <= current_slot {
                ready.push(obs);
            } else {
                remaining.push(obs);
            }
        }
        self.observed = remaining;
        ready
            .into_iter()
            .map(|obs| {
                let body = VaaBody {
                    version: 1,
                    guardian_set_index: self.set.index,
                    timestamp: obs.message.post_slot as u32,
                    nonce: obs.message.batch_id,
                    emitter_chain: obs.emitter_chain,
                    emitter_address: obs.emitter_address,
                    sequence: obs.message.sequence,
                    consistency_level: obs.message.finality.consistency_level(),
                    payload: obs.message.payload,
                };
                self.sign_body(body)
            })
            .collect()
    }

    /// Signs an arbitrary body with the full committee (used for origin
    /// messages that reached finality and for receipt VAAs on the EVM side).
    pub fn sign_body(&self, body: VaaBody) -> Vaa {
        let signing_digest = keccak256(&vaa_body_hash(&body).0);
        let signatures = self
            .keys
            .iter()
            .enumerate()
            .map(|(i, k)| SignatureEntry { index: i as u8, signature: sign_digest(&signing_digest, k) })
            .collect();
        Vaa { body, signatures }
    }

    /// Applies a reorg of `depth` slots observed at `current_slot`. Slots at
    /// or below the finalized frontier (`current_slot - finalized_delay`)
    /// can never revert, so the effective depth is clamped. Pending messages
    /// posted in a reverted slot are dropped before they are ever attested.
    pub fn handle_reorg(&mut self, current_slot: SlotNumber, depth: u64) -> ReorgOutcome {
        let requested_after = current_slot.saturating_sub(depth);
        let frontier = current_slot.saturating_sub(self.policy.finalized_delay);
        let reverted_after_slot = requested_after.max(frontier);

        let mut dropped = Vec::new();
        self.observed.retain(|obs| {
            if obs.message.post_slot > reverted_after_slot {
                dropped.push((obs.message.sequence, obs.message.post_slot));
                false
            } else {
                true
            }
        });
        for (seq, _) in &dropped {
            // Allow a canonical-chain replacement to be observed later.
            self.seen.retain(|(_, s)| s != seq);
        }
        ReorgOutcome { reverted_after_slot, dropped }
    }
}
