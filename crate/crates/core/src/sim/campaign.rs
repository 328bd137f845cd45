//! Randomized adversarial campaigns: a seeded generator for scenario
//! variations plus a runner that checks every safety property over many
//! seeds. Scenarios share nothing, so campaign runs are order-independent.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::relayer::RelayerConfig;
use crate::types::{Bytes32, Finality};

use super::checker::Verdict;
use super::scenario::{AdversaryAction, AdversaryEvent, PostSpec, ScenarioSpec};
use super::world::run_scenario;

/// Builds one randomized adversarial scenario. Every scenario includes at
/// least one DuplicateSubmit burst; forgery, signature stripping, payload
/// tampering, reordering, delivery drops, reorgs, foreign-emitter posts, and
/// extra racing relayers are mixed in per seed.
pub fn adversarial_scenario(seed: u64) -> ScenarioSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut posts = vec![PostSpec {
        at_tick: 0,
        batch_id: 1,
        message: b"campaign message 0".to_vec(),
        finality: Finality::Confirmed,
        secret: None,
        foreign_emitter: None,
    }];
    let extra_posts = (rng.next_u32() % 3) as u64;
    for i in 0..extra_posts {
        let finalized = rng.next_u32() % 4 == 0;
        posts.push(PostSpec {
            at_tick: 1 + i,
            batch_id: 2 + i as u32,
            message: format!("campaign message {}", i + 1).into_bytes(),
            finality: if finalized { Finality::Finalized } else { Finality::Confirmed },
            secret: None,
            foreign_emitter: None,
        });
    }
    if rng.next_u32() % 3 == 0 {
        posts.push(PostSpec {
            at_tick: 2,
            batch_id: 90,
            message: b"foreign interloper".to_vec(),
            finality: Finality::Confirmed,
            secret: None,
            foreign_emitter: Some(Bytes32::from_u64_be(0xF0E1)),
        });
    }

    let mut adversary = vec![AdversaryEvent {
        at_tick: 3 + (rng.next_u32() % 4) as u64,
        action: AdversaryAction::DuplicateSubmit {
            target_sequence: Some(0),
            times: 1 + rng.next_u32() % 4,
        },
    }];
    if rng.next_u32() % 2 == 0 {
        adversary.push(AdversaryEvent {
            at_tick: 4,
            action: AdversaryAction::ForgeEmitter {
                emitter: Bytes32::from_u64_be(0xDEAD),
                target_sequence: None,
            },
        });
    }
    if rng.next_u32() % 2 == 0 {
        adversary.push(AdversaryEvent {
            at_tick: 5,
            action: AdversaryAction::UnsignedVaa { target_sequence: None },
        });
    }
    if rng.next_u32() % 2 == 0 {
        adversary.push(AdversaryEvent {
            at_tick: 5,
            action: AdversaryAction::TamperPayload {
                byte_index: (rng.next_u32() % 64) as usize,
                byte_value: (rng.next_u32() % 256) as u8,
                target_sequence: None,
            },
        });
    }
    if rng.next_u32() % 2 == 0 {
        adversary.push(AdversaryEvent { at_tick: 3, action: AdversaryAction::ReorderQueue });
    }
    if rng.next_u32() % 3 == 0 {
        adversary.push(AdversaryEvent {
            at_tick: 2,
            action: AdversaryAction::DropDelivery { target_sequence: None, redeliver_after: 3 },
        });
    }
    if rng.next_u32() % 4 == 0 {
        adversary.push(AdversaryEvent {
            at_tick: 8 + (rng.next_u32() % 8) as u64,
            action: AdversaryAction::ReorgSlots { depth: 1 + (rng.next_u32() % 12) as u64 },
        });
    }

    let mut relayers = vec![RelayerConfig::default()];
    if rng.next_u32() % 2 == 0 {
        relayers.push(RelayerConfig::default());
    }
    if rng.next_u32() % 3 == 0 {
        relayers.push(RelayerConfig { honest: false, ..RelayerConfig::default() });
    }

    let random_adversary = (rng.next_u32() % 3 == 0).then(|| super::scenario::RandomAdversary {
        probability_percent: 20 + (rng.next_u32() % 40) as u8,
        from_tick: 2,
        until_tick: 30,
    });

    ScenarioSpec {
        name: format!("campaign-{seed}"),
        guardians: 5,
        tick_budget: 120,
        relayers,
        posts,
        adversary,
        random_adversary,
        receipts: rng.next_u32() % 4 == 0,
        ..Default::default()
    }
}

#[derive(Clone, Debug)]
pub struct CampaignFailure {
    pub seed: u64,
    pub property: &'static str,
    pub witnesses: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct CampaignOutcome {
    pub scenarios: u64,
    pub portal_consumptions: u64,
    pub portal_rejections: u64,
    /// How often each adversary action kind actually ran across the campaign.
    pub adversary_actions: std::collections::BTreeMap<String, u64>,
    pub failures: Vec<CampaignFailure>,
}

impl CampaignOutcome {
    pub fn clean(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs `count` seeded adversarial scenarios and collects every violated
/// safety or liveness property (none are legacy scenarios, so every
/// violation counts).
pub fn run_campaign(start_seed: u64, count: u64) -> CampaignOutcome {
    let mut outcome = CampaignOutcome::default();
    for seed in start_seed..start_seed + count {
        let spec = adversarial_scenario(seed);
        let report = run_scenario(&spec, seed).expect("generated scenarios are valid");
        outcome.scenarios += 1;
        for record in &report.records {
            match &record.event {
                super::trace::TraceEvent::VaaConsumed { .. } => outcome.portal_consumptions += 1,
                super::trace::TraceEvent::PortalRejected { .. } => outcome.portal_rejections += 1,
                super::trace::TraceEvent::AdversaryAction { kind, .. } => {
                    *outcome.adversary_actions.entry(kind.clone()).or_default() += 1;
                }
                super::trace::TraceEvent::SlotsReorged { .. } => {
                    *outcome.adversary_actions.entry("reorg_slots".to_string()).or_default() += 1;
                }
                _ => {}
            }
        }
        for (name, verdict) in report.verdicts.iter_named() {
            if let Verdict::Violated { witnesses, .. } = verdict {
                outcome.failures.push(CampaignFailure {
                    seed,
                    property: name,
                    witnesses: witnesses.clone(),
                });
            }
        }
    }
    outcome
}
