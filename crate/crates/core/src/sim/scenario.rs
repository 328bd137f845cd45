//! Scenario descriptions: the JSON file format consumed by `run` and by the
//! randomized campaign generator.

use serde::{Deserialize, Serialize};

use crate::crypto::{Digest32, FieldElement};
use crate::relayer::RelayerConfig;
use crate::types::{hexvec, Bytes32, Finality};

/// A complete simulation scenario: actor configuration, scheduled posts, and
/// scheduled adversary actions. Unset fields take protocol defaults.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    /// Committee size; quorum is always floor(2n/3) + 1.
    pub guardians: u8,
    pub confirmed_delay: u64,
    pub finalized_delay: u64,
    /// A rollup block is produced every this-many scheduler ticks.
    pub rollup_interval: u64,
    pub tick_budget: u64,
    /// With fairness on, dropped deliveries are eventually redelivered and
    /// every relayer sees every available VAA.
    pub fairness: bool,
    pub legacy_enabled: bool,
    /// Reproduces the v0.1.0 receipt recorder (skips its checks (i)-(iv)).
    pub v0_1_0_compat: bool,
    /// Publish and record a receipt VAA after each Aztec consumption.
    pub receipts: bool,
    /// Optional fault injected into the receipt path, for mutation testing.
    pub receipt_mutation: Option<ReceiptMutation>,
    pub relayers: Vec<RelayerConfig>,
    pub posts: Vec<PostSpec>,
    /// Ordered, tick-scheduled adversary actions.
    pub adversary: Vec<AdversaryEvent>,
    /// Probabilistic adversary: each tick inside the window, one random
    /// action fires with the given probability, drawn from the run seed.
    pub random_adversary: Option<RandomAdversary>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            name: "unnamed".to_string(),
            guardians: 19,
            confirmed_delay: 2,
            finalized_delay: 32,
            rollup_interval: 4,
            tick_budget: 200,
            fairness: true,
            legacy_enabled: false,
            v0_1_0_compat: false,
            receipts: false,
            receipt_mutation: None,
            relayers: vec![RelayerConfig::default()],
            posts: Vec::new(),
            adversary: Vec::new(),
            random_adversary: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomAdversary {
    pub probability_percent: u8,
    pub from_tick: u64,
    pub until_tick: u64,
}

impl Default for RandomAdversary {
    fn default() -> Self {
        RandomAdversary { probability_percent: 25, from_tick: 2, until_tick: 40 }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.guardians == 0 {
            return Err("guardians must be at least 1".into());
        }
        if self.rollup_interval == 0 {
            return Err("rollup_interval must be at least 1".into());
        }
        if self.tick_budget == 0 {
            return Err("tick_budget must be at least 1".into());
        }
        if self.confirmed_delay > self.finalized_delay {
            return Err("confirmed_delay must not exceed finalized_delay".into());
        }
        for r in &self.relayers {
            if r.base_backoff == 0 || r.max_retries == 0 || r.backoff_multiplier == 0 {
                return Err("relayer backoff parameters must be at least 1".into());
            }
        }
        if let Some(ra) = &self.random_adversary {
            if ra.probability_percent > 100 {
                return Err("random adversary probability must be at most 100".into());
            }
        }
        Ok(())
    }

    pub fn honest_relayer_count(&self) -> usize {
        self.relayers.iter().filter(|r| r.honest).count()
    }
}

/// One origin-chain message post.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PostSpec {
    pub at_tick: u64,
    pub batch_id: u32,
    /// The opaque user message `m`; the harness prepends the secret hash.
    #[serde(with = "hexvec")]
    pub message: Vec<u8>,
    pub finality: Finality,
    /// Consumer secret; derived from the run seed when absent.
    pub secret: Option<FieldElement>,
    /// Post from this emitter instead of the configured origin. Guardians
    /// sign it honestly; the Portal must reject it as WrongOrigin.
    pub foreign_emitter: Option<Bytes32>,
}

impl Default for PostSpec {
    fn default() -> Self {
        PostSpec {
            at_tick: 0,
            batch_id: 0,
            message: b"hello".to_vec(),
            finality: Finality::Confirmed,
            secret: None,
            foreign_emitter: None,
        }
    }
}

/// An adversary action scheduled at a tick.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdversaryEvent {
    pub at_tick: u64,
    #[serde(flatten)]
    pub action: AdversaryAction,
}

/// The rushing-adversary action vocabulary. Actions referencing a VAA pick
/// their target from the public pool by origin sequence (`target_sequence`),
/// defaulting to the oldest pool entry; a missing target is a logged no-op.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdversaryAction {
    /// Re-submit an already-available VAA `times` times.
    DuplicateSubmit {
        #[serde(default)]
        target_sequence: Option<u64>,
        #[serde(default = "one")]
        times: u32,
    },
    /// Permute the delivery order of the public VAA pool.
    ReorderQueue,
    /// Race a legacy `consumeWithSecret` with an adversary-chosen hash.
    FrontRunWithSecret {
        secret_hash: Digest32,
        #[serde(default)]
        target_sequence: Option<u64>,
    },
    /// Submit a copy of a signed VAA with the emitter swapped. The original
    /// signatures no longer cover the altered body.
    ForgeEmitter {
        emitter: Bytes32,
        #[serde(default)]
        target_sequence: Option<u64>,
    },
    /// Submit a copy with all signatures stripped.
    UnsignedVaa {
        #[serde(default)]
        target_sequence: Option<u64>,
    },
    /// Submit a copy with one payload byte overwritten in flight.
    TamperPayload {
        byte_index: usize,
        byte_value: u8,
        #[serde(default)]
        target_sequence: Option<u64>,
    },
    /// Remove a pool entry. With fairness on it is redelivered after
    /// `redeliver_after` ticks; with fairness off it is gone.
    DropDelivery {
        #[serde(default)]
        target_sequence: Option<u64>,
        #[serde(default = "three")]
        redeliver_after: u64,
    },
    /// Revert origin slots newer than `max(now - depth, finalized frontier)`.
    ReorgSlots { depth: u64 },
}

fn one() -> u32 {
    1
}

fn three() -> u64 {
    3
}

impl AdversaryAction {
    pub fn kind_name(&self) -> &'static str {
        match self {
            AdversaryAction::DuplicateSubmit { .. } => "duplicate_submit",
            AdversaryAction::ReorderQueue => "reorder_queue",
            AdversaryAction::FrontRunWithSecret { .. } => "front_run_with_secret",
            AdversaryAction::ForgeEmitter { .. } => "forge_emitter",
            AdversaryAction::UnsignedVaa { .. } => "unsigned_vaa",
            AdversaryAction::TamperPayload { .. } => "tamper_payload",
            AdversaryAction::DropDelivery { .. } => "drop_delivery",
            AdversaryAction::ReorgSlots { .. } => "reorg_slots",
        }
    }
}

/// Faults injectable into the receipt pipeline, one per normative check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReceiptMutation {
    /// (i) posted-VAA account owned by the wrong program.
    WrongAccountOwner,
    /// (ii) receipt origin pair not on the allowlist.
    WrongOriginPair,
    /// (iii) receipt recorded under the wrong PDA sequence key.
    WrongPdaKey,
    /// (iv) receipt version set to 2.
    WrongVersion,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        assert_eq!(ScenarioSpec::default().validate(), Ok(()));
    }

    #[test]
    fn zero_guardians_invalid() {
        let spec = ScenarioSpec { guardians: 0, ..Default::default() };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn json_round_trip_with_adversary() {
        let spec = ScenarioSpec {
            name: "rt".into(),
            posts: vec![PostSpec { secret: Some(FieldElement::from_u64(9)), ..Default::default() }],
            adversary: vec![
                AdversaryEvent {
                    at_tick: 3,
                    action: AdversaryAction::DuplicateSubmit { target_sequence: Some(0), times: 5 },
                },
                AdversaryEvent { at_tick: 4, action: AdversaryAction::ReorgSlots { depth: 8 } },
            ],
            ..Default::default()
        };
        let json = serde_json::to_string_pretty(&spec).unwrap();
        let back: ScenarioSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.name, "rt");
        assert_eq!(back.adversary.len(), 2);
        assert_eq!(back.adversary[0].action.kind_name(), "duplicate_submit");
    }

    #[test]
    fn unknown_fields_rejected() {
        let err = serde_json::from_str::<ScenarioSpec>(r#"{"name":"x","bogus":1}"#);
        assert!(err.is_err());
    }
}
