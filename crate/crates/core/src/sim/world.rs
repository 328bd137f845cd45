//! The deterministic discrete-event harness: composes origin, guardians,
//! portal, inbox, relayers, and a rushing network adversary under a
//! round-robin scheduler, one origin slot per tick.
//!
//! Per tick, in order: scheduled posts, guardian emission, rollup inclusion,
//! adversary actions (pre-empting deliveries), then each relayer. Identical
//! seeds and scenarios produce bit-identical traces.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aztec::AztecState;
use crate::codec::{self, encode_vaa, VaaBody};
use crate::crypto::{
    keccak256, keccak256_concat, quorum_for, secret_hash, Digest32, FieldElement, GuardianKeyPair,
};
use crate::guardians::{FinalityPolicy, GuardianNode};
use crate::origin::{OriginConfig, OriginState, PostedMessage, PostedVaaAccount};
use crate::portal::{AztecFacts, Portal, PortalConfig};
use crate::relayer::{relayer_step, RelayerState, StepAction, TaskKind, TaskOutcome, TaskSuccess, WorldAccess};
use crate::types::{AccountOwnerId, Bytes32, ChainId, Finality, PortalAddress, Sequence, SlotNumber};

use super::checker::check_properties;
use super::scenario::{AdversaryAction, AdversaryEvent, ReceiptMutation, ScenarioSpec};
use super::trace::{StateSnapshot, TraceEvent, TraceRecord, TraceReport};

/// Wormhole chain id of the origin (Solana).
pub const ORIGIN_CHAIN: ChainId = 1;
/// Wormhole chain id of the Portal's chain (Ethereum).
pub const EVM_CHAIN: ChainId = 2;

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

/// Runs a scenario to quiescence or its tick budget and returns the trace
/// with verdicts attached.
pub fn run_scenario(spec: &ScenarioSpec, seed: u64) -> Result<TraceReport, SimError> {
    let world = World::new(spec.clone(), seed)?;
    Ok(world.run())
}

struct PoolEntry {
    bytes: Vec<u8>,
    h: Digest32,
    sequence: Sequence,
    visible_from: u64,
}

struct PostedInfo {
    post_slot: SlotNumber,
}

#[derive(Clone)]
struct EnqueueFacts {
    h: Digest32,
    key: Digest32,
    secret_hash: Digest32,
}

struct PreparedPost {
    at_tick: u64,
    batch_id: u32,
    message: Vec<u8>,
    finality: Finality,
    secret: FieldElement,
    foreign_emitter: Option<Bytes32>,
}

pub struct World {
    spec: ScenarioSpec,
    seed: u64,
    rng: ChaCha8Rng,
    tick: u64,

    origin: OriginState,
    guardians: GuardianNode,
    portal: Portal,
    aztec: AztecState,
    relayers: Vec<RelayerState>,

    pool: Vec<PoolEntry>,
    posted: BTreeMap<(Bytes32, Sequence), PostedInfo>,
    posts_pending: VecDeque<PreparedPost>,
    adversary_pending: VecDeque<AdversaryEvent>,

    foreign_next_seq: Sequence,
    receipt_next_seq: Sequence,
    receipt_published_leaves: BTreeSet<u64>,
    enqueue_facts: BTreeMap<u64, EnqueueFacts>,
    portal_events_seen: usize,

    origin_emitter: Bytes32,
    portal_evm_emitter: Bytes32,
    wormhole_core_owner: AccountOwnerId,

    records: Vec<TraceRecord>,
}

impl World {
    pub fn new(spec: ScenarioSpec, seed: u64) -> Result<Self, SimError> {
        spec.validate().map_err(SimError::InvalidScenario)?;
        for post in &spec.posts {
            if post.message.len() + 32 > codec::MAX_PAYLOAD_LEN {
                return Err(SimError::InvalidScenario("post message exceeds payload bound".into()));
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let keys: Vec<GuardianKeyPair> =
            (0..spec.guardians).map(|_| GuardianKeyPair::generate(&mut rng)).collect();
        let policy = FinalityPolicy::new(spec.confirmed_delay, spec.finalized_delay);
        let guardians = GuardianNode::new(keys, 0, policy);

        let origin_emitter = Bytes32::from_u64_be(1);
        let portal_address = {
            let d = keccak256(b"zkcb/portal");
            let mut a = [0u8; 20];
            a.copy_from_slice(&d.0[12..]);
            PortalAddress(a)
        };
        let mut portal_evm_emitter = Bytes32::default();
        portal_evm_emitter.0[12..].copy_from_slice(&portal_address.0);
        let l2_instance = Bytes32(keccak256(b"zkcb/aztec-l2").0);
        let wormhole_core_owner = AccountOwnerId(keccak256(b"zkcb/wormhole-core").0);

        let portal = Portal::new(PortalConfig {
            emitter_chain: ORIGIN_CHAIN,
            emitter: origin_emitter,
            portal_address,
            l2_instance,
            rollup_version: 1,
            guardian_set: guardians.set.clone(),
            legacy_enabled: spec.legacy_enabled,
        });

        let mut aztec = AztecState::new();
        aztec.set_portal_once(portal_address).expect("fresh state");

        let origin = OriginState::new(OriginConfig {
            emitter_chain: ORIGIN_CHAIN,
            emitter_address: origin_emitter,
            wormhole_core_owner,
            allowlist: (ORIGIN_CHAIN, origin_emitter),
            guardian_set: guardians.set.clone(),
            v0_1_0_compat: spec.v0_1_0_compat,
        });

        let relayers = spec
            .relayers
            .iter()
            .enumerate()
            .map(|(i, cfg)| RelayerState::new(i, cfg.clone()))
            .collect();

        let mut posts: Vec<_> = spec.posts.clone();
        posts.sort_by_key(|p| p.at_tick);
        let posts_pending = posts
            .into_iter()
            .map(|p| {
                let secret = p.secret.unwrap_or_else(|| {
                    let mut b = [0u8; 32];
                    rng.fill_bytes(&mut b);
                    FieldElement::from_be_bytes_reduced(&b)
                });
                PreparedPost {
                    at_tick: p.at_tick,
                    batch_id: p.batch_id,
                    message: p.message,
                    finality: p.finality,
                    secret,
                    foreign_emitter: p.foreign_emitter,
                }
            })
            .collect();

        let mut adversary: Vec<_> = spec.adversary.clone();
        adversary.sort_by_key(|a| a.at_tick);

        let mut world = World {
            seed,
            rng,
            tick: 0,
            origin,
            guardians,
            portal,
            aztec,
            relayers,
            pool: Vec::new(),
            posted: BTreeMap::new(),
            posts_pending,
            adversary_pending: adversary.into(),
            foreign_next_seq: 0,
            receipt_next_seq: 0,
            receipt_published_leaves: BTreeSet::new(),
            enqueue_facts: BTreeMap::new(),
            portal_events_seen: 0,
            origin_emitter,
            portal_evm_emitter,
            wormhole_core_owner,
            records: Vec::new(),
            spec,
        };

        world.record(TraceEvent::ScenarioStart {
            scenario: world.spec.name.clone(),
            seed,
            emitter_chain: ORIGIN_CHAIN,
            emitter: origin_emitter,
            portal_address,
            l2_instance,
            rollup_version: 1,
            legacy_enabled: world.spec.legacy_enabled,
            fairness: world.spec.fairness,
            confirmed_delay: world.spec.confirmed_delay,
            finalized_delay: world.spec.finalized_delay,
            rollup_interval: world.spec.rollup_interval,
            guardians: world.spec.guardians,
            quorum: quorum_for(world.spec.guardians as usize) as u8,
            tick_budget: world.spec.tick_budget,
            honest_relayers: world.spec.honest_relayer_count() as u64,
            receipts: world.spec.receipts,
        });
        Ok(world)
    }

    pub fn run(mut self) -> TraceReport {
        let mut quiescent = false;
        let mut final_tick = 0;
        for tick in 0..self.spec.tick_budget {
            self.tick = tick;
            final_tick = tick;
            self.step(tick);
            if self.is_quiescent(tick) {
                quiescent = true;
                break;
            }
        }
        self.record(TraceEvent::ScenarioEnd { final_tick, quiescent });

        let verdicts = check_properties(&self.records);
        TraceReport {
            scenario: self.spec.name.clone(),
            seed: self.seed,
            records: self.records,
            verdicts,
        }
    }

    fn step(&mut self, tick: u64) {
        self.post_phase(tick);
        self.emission_phase(tick);
        self.rollup_phase(tick);
        self.adversary_phase(tick);
        self.relayer_phase(tick);
    }

    fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            consumed: self.portal.consumed_len() as u64,
            leaves: self.aztec.leaves().len() as u64,
            included: self.aztec.included_count() as u64,
            consumer_count: self.aztec.consumer.count,
            receipts: self.origin.receipts().len() as u64,
        }
    }

    fn record(&mut self, event: TraceEvent) {
        let state = self.snapshot();
        self.records.push(TraceRecord { tick: self.tick, slot: self.tick, event, state });
    }

    fn post_phase(&mut self, tick: u64) {
        while self.posts_pending.front().map(|p| p.at_tick <= tick).unwrap_or(false) {
            let post = self.posts_pending.pop_front().unwrap();
            let payload = {
                let mut p = secret_hash(&post.secret).0.to_vec();
                p.extend_from_slice(&post.message);
                p
            };
            let (message, emitter) = match post.foreign_emitter {
                Some(foreign) => {
                    let sequence = self.foreign_next_seq;
                    self.foreign_next_seq += 1;
                    let msg = PostedMessage {
                        batch_id: post.batch_id,
                        payload: payload.clone(),
                        finality: post.finality,
                        sequence,
                        post_slot: tick,
                    };
                    (msg, foreign)
                }
                None => {
                    let msg = self
                        .origin
                        .post_wormhole_message(post.batch_id, payload.clone(), post.finality, tick)
                        .expect("payload bound checked at scenario validation");
                    // The honest flow: the posting operator's relayers hold
                    // the secret for later Aztec consumption.
                    for relayer in &mut self.relayers {
                        if relayer.config.honest {
                            relayer.secrets.insert(msg.sequence, post.secret);
                        }
                    }
                    (msg, self.origin_emitter)
                }
            };
            self.posted.insert((emitter, message.sequence), PostedInfo { post_slot: tick });
            self.guardians.observe(message.clone(), ORIGIN_CHAIN, emitter);
            self.record(TraceEvent::MessagePosted {
                sequence: message.sequence,
                batch_id: message.batch_id,
                finality: message.finality,
                post_slot: tick,
                emitter_chain: ORIGIN_CHAIN,
                emitter,
                payload,
            });
        }
    }

    fn emission_phase(&mut self, tick: u64) {
        let vaas = self.guardians.emit_ready_vaas(tick);
        for vaa in vaas {
            let h = codec::vaa_body_hash(&vaa.body);
            let consistency = Finality::from_consistency_level(vaa.body.consistency_level)
                .expect("guardians emit known levels");
            self.record(TraceEvent::VaaEmitted {
                sequence: vaa.body.sequence,
                consistency,
                post_slot: vaa.body.timestamp as u64,
                emitter_chain: vaa.body.emitter_chain,
                emitter: vaa.body.emitter_address,
                h,
            });
            self.pool.push(PoolEntry {
                bytes: encode_vaa(&vaa),
                h,
                sequence: vaa.body.sequence,
                visible_from: tick,
            });
        }
    }

    fn rollup_phase(&mut self, tick: u64) {
        if tick > 0 && tick.is_multiple_of(self.spec.rollup_interval) {
            let (block, included) = self.aztec.rollup_tick();
            self.record(TraceEvent::RollupTicked { block, included: included as u64 });
        }
    }

    fn adversary_phase(&mut self, tick: u64) {
        while self.adversary_pending.front().map(|a| a.at_tick <= tick).unwrap_or(false) {
            let event = self.adversary_pending.pop_front().unwrap();
            self.apply_adversary(event.action, tick);
        }
        if let Some(ra) = self.spec.random_adversary {
            if tick >= ra.from_tick
                && tick < ra.until_tick
                && self.rng.next_u64() % 100 < ra.probability_percent as u64
            {
                let action = self.random_action();
                self.apply_adversary(action, tick);
            }
        }
    }

    /// One adversary action drawn from the run seed. Legacy front-running is
    /// excluded; it needs the legacy flag and a chosen hash, so it is only
    /// ever scheduled explicitly.
    fn random_action(&mut self) -> AdversaryAction {
        match self.rng.next_u64() % 6 {
            0 => AdversaryAction::DuplicateSubmit {
                target_sequence: None,
                times: 1 + (self.rng.next_u64() % 3) as u32,
            },
            1 => AdversaryAction::ReorderQueue,
            2 => AdversaryAction::UnsignedVaa { target_sequence: None },
            3 => AdversaryAction::TamperPayload {
                byte_index: (self.rng.next_u64() % 64) as usize,
                byte_value: (self.rng.next_u64() % 256) as u8,
                target_sequence: None,
            },
            4 => AdversaryAction::DropDelivery {
                target_sequence: None,
                redeliver_after: 2 + self.rng.next_u64() % 4,
            },
            _ => AdversaryAction::ForgeEmitter {
                emitter: Bytes32::from_u64_be(0xDEAD),
                target_sequence: None,
            },
        }
    }

    fn find_target(&self, target_sequence: Option<Sequence>) -> Option<usize> {
        match target_sequence {
            Some(seq) => self.pool.iter().position(|e| e.sequence == seq),
            None => (!self.pool.is_empty()).then_some(0),
        }
    }

    fn apply_adversary(&mut self, action: AdversaryAction, tick: u64) {
        let kind = action.kind_name().to_string();
        match action {
            AdversaryAction::DuplicateSubmit { target_sequence, times } => {
                let Some(idx) = self.find_target(target_sequence) else {
                    return self.no_target(kind, target_sequence);
                };
                let bytes = self.pool[idx].bytes.clone();
                let seq = self.pool[idx].sequence;
                self.record(TraceEvent::AdversaryAction {
                    kind,
                    target_sequence: Some(seq),
                    detail: format!("submitting {times} duplicate copies"),
                });
                for _ in 0..times {
                    self.adversary_submit(&bytes, None);
                }
            }
            AdversaryAction::ReorderQueue => {
                let n = self.pool.len();
                for i in (1..n).rev() {
                    let j = (self.rng.next_u64() % (i as u64 + 1)) as usize;
                    self.pool.swap(i, j);
                }
                self.record(TraceEvent::AdversaryAction {
                    kind,
                    target_sequence: None,
                    detail: format!("permuted {n} pool entries"),
                });
            }
            AdversaryAction::FrontRunWithSecret { secret_hash, target_sequence } => {
                let Some(idx) = self.find_target(target_sequence) else {
                    return self.no_target(kind, target_sequence);
                };
                let bytes = self.pool[idx].bytes.clone();
                let seq = self.pool[idx].sequence;
                self.record(TraceEvent::AdversaryAction {
                    kind,
                    target_sequence: Some(seq),
                    detail: format!("legacy consumeWithSecret using {secret_hash}"),
                });
                self.adversary_submit(&bytes, Some(secret_hash));
            }
            AdversaryAction::ForgeEmitter { emitter, target_sequence } => {
                let Some(idx) = self.find_target(target_sequence) else {
                    return self.no_target(kind, target_sequence);
                };
                let mut vaa = codec::decode_vaa(&self.pool[idx].bytes).expect("pool entries decode");
                let seq = vaa.body.sequence;
                vaa.body.emitter_address = emitter;
                self.record(TraceEvent::AdversaryAction {
                    kind,
                    target_sequence: Some(seq),
                    detail: format!("forged emitter {emitter}"),
                });
                self.adversary_submit(&encode_vaa(&vaa), None);
            }
            AdversaryAction::UnsignedVaa { target_sequence } => {
                let Some(idx) = self.find_target(target_sequence) else {
                    return self.no_target(kind, target_sequence);
                };
                let mut vaa = codec::decode_vaa(&self.pool[idx].bytes).expect("pool entries decode");
                let seq = vaa.body.sequence;
                vaa.signatures.clear();
                self.record(TraceEvent::AdversaryAction {
                    kind,
                    target_sequence: Some(seq),
                    detail: "stripped all guardian signatures".to_string(),
                });
                self.adversary_submit(&encode_vaa(&vaa), None);
            }
            AdversaryAction::TamperPayload { byte_index, byte_value, target_sequence } => {
                let Some(idx) = self.find_target(target_sequence) else {
                    return self.no_target(kind, target_sequence);
                };
                let mut vaa = codec::decode_vaa(&self.pool[idx].bytes).expect("pool entries decode");
                let seq = vaa.body.sequence;
                if vaa.body.payload.is_empty() {
                    return self.record(TraceEvent::AdversaryAction {
                        kind,
                        target_sequence: Some(seq),
                        detail: "empty payload; nothing to tamper".to_string(),
                    });
                }
                let i = byte_index % vaa.body.payload.len();
                if vaa.body.payload[i] == byte_value {
                    return self.record(TraceEvent::AdversaryAction {
                        kind,
                        target_sequence: Some(seq),
                        detail: format!("byte {i} already equals {byte_value}; no-op"),
                    });
                }
                vaa.body.payload[i] = byte_value;
                self.record(TraceEvent::AdversaryAction {
                    kind,
                    target_sequence: Some(seq),
                    detail: format!("payload byte {i} overwritten with {byte_value}"),
                });
                self.adversary_submit(&encode_vaa(&vaa), None);
            }
            AdversaryAction::DropDelivery { target_sequence, redeliver_after } => {
                let Some(idx) = self.find_target(target_sequence) else {
                    return self.no_target(kind, target_sequence);
                };
                let mut entry = self.pool.remove(idx);
                let seq = entry.sequence;
                let detail = if self.spec.fairness {
                    entry.visible_from = tick + redeliver_after;
                    self.pool.push(entry);
                    format!("delivery delayed until tick {}", tick + redeliver_after)
                } else {
                    "delivery dropped permanently (fairness off)".to_string()
                };
                self.record(TraceEvent::AdversaryAction {
                    kind,
                    target_sequence: Some(seq),
                    detail,
                });
            }
            AdversaryAction::ReorgSlots { depth } => {
                let outcome = self.guardians.handle_reorg(tick, depth);
                let dropped_sequences: Vec<Sequence> =
                    outcome.dropped.iter().map(|(seq, _)| *seq).collect();
                let reverted_sequences: Vec<Sequence> = self
                    .posted
                    .iter()
                    .filter(|((emitter, _), info)| {
                        *emitter == self.origin_emitter
                            && info.post_slot > outcome.reverted_after_slot
                    })
                    .map(|((_, seq), _)| *seq)
                    .collect();
                self.record(TraceEvent::SlotsReorged {
                    depth,
                    reverted_after_slot: outcome.reverted_after_slot,
                    dropped_sequences,
                    reverted_sequences,
                });
            }
        }
    }

    fn no_target(&mut self, kind: String, target_sequence: Option<Sequence>) {
        self.record(TraceEvent::AdversaryAction {
            kind,
            target_sequence,
            detail: "no matching pool entry; no-op".to_string(),
        });
    }

    /// A direct adversary submission to the Portal, normative or legacy.
    fn adversary_submit(&mut self, bytes: &[u8], legacy_secret: Option<Digest32>) {
        let decoded = codec::decode_vaa(bytes).ok();
        let h = decoded.as_ref().map(|v| codec::vaa_body_hash(&v.body));
        let sequence = decoded.as_ref().map(|v| v.body.sequence);
        let legacy = legacy_secret.is_some();
        let result = match legacy_secret {
            Some(sh) => self.portal.consume_with_secret(&mut self.aztec, bytes, sh),
            None => self.portal.consume(&mut self.aztec, bytes),
        };
        match result {
            Ok(_) => self.drain_portal_events(legacy),
            Err(e) => self.record(TraceEvent::PortalRejected {
                caller: "adversary".to_string(),
                legacy,
                error: e.to_string(),
                h,
                sequence,
            }),
        }
    }

    /// Copies newly appended portal events into the trace and indexes the
    /// enqueue facts needed for receipts.
    fn drain_portal_events(&mut self, legacy: bool) {
        use crate::portal::PortalEvent;
        let new: Vec<PortalEvent> = self.portal.events()[self.portal_events_seen..].to_vec();
        self.portal_events_seen = self.portal.events().len();
        for event in new {
            match event {
                PortalEvent::VaaConsumed { h, seq, payload, aztec_key } => {
                    self.record(TraceEvent::VaaConsumed { legacy, h, seq, payload, aztec_key });
                }
                PortalEvent::InboxEnqueued { h, seq, c, key, leaf_index, secret_hash } => {
                    self.enqueue_facts
                        .insert(leaf_index, EnqueueFacts { h, key, secret_hash });
                    self.record(TraceEvent::InboxEnqueued {
                        legacy,
                        h,
                        seq,
                        c,
                        key,
                        leaf_index,
                        secret_hash,
                    });
                }
            }
        }
    }

    fn relayer_phase(&mut self, tick: u64) {
        for idx in 0..self.relayers.len() {
            // Pick up newly visible VAAs from the public pool.
            let fresh: Vec<(Digest32, Vec<u8>, Sequence)> = self
                .pool
                .iter()
                .filter(|e| e.visible_from <= tick && !self.relayers[idx].seen_vaas.contains(&e.h))
                .map(|e| (e.h, e.bytes.clone(), e.sequence))
                .collect();
            for (h, bytes, sequence) in fresh {
                self.relayers[idx].seen_vaas.insert(h);
                self.relayers[idx].enqueue(TaskKind::SubmitVaa { encoded: bytes, sequence }, tick);
            }

            let actions = {
                let relayer = &mut self.relayers[idx];
                let mut access = WorldAccess {
                    portal: &mut self.portal,
                    aztec: &mut self.aztec,
                    origin: &mut self.origin,
                    current_slot: tick,
                };
                relayer_step(relayer, &mut access, tick)
            };
            self.drain_portal_events(false);

            let honest = self.relayers[idx].config.honest;
            for action in &actions {
                self.record_action(idx as u64, honest, action);
            }
            if self.spec.receipts {
                self.receipt_phase(idx, &actions, tick);
            }
        }
    }

    fn record_action(&mut self, relayer: u64, honest: bool, action: &StepAction) {
        let (outcome, detail) = match &action.outcome {
            TaskOutcome::Succeeded(TaskSuccess::VaaConsumed(r)) => {
                ("succeeded".to_string(), format!("consumed h {}", r.h))
            }
            TaskOutcome::Succeeded(TaskSuccess::AlreadyConsumed { h }) => {
                ("already_consumed".to_string(), format!("h {h} was consumed first"))
            }
            TaskOutcome::Succeeded(TaskSuccess::AztecConsumed { leaf_index, count, .. }) => {
                ("succeeded".to_string(), format!("leaf {leaf_index} consumed, count {count}"))
            }
            TaskOutcome::Succeeded(TaskSuccess::ReceiptRecorded { sequence }) => {
                ("succeeded".to_string(), format!("receipt recorded for sequence {sequence}"))
            }
            TaskOutcome::Retried { error, next_eligible_tick } => {
                ("retried".to_string(), format!("{error}; next attempt at tick {next_eligible_tick}"))
            }
            TaskOutcome::Dropped { error } => ("dropped".to_string(), error.clone()),
        };
        self.record(TraceEvent::RelayerTask {
            relayer,
            honest,
            task: action.task_kind.to_string(),
            attempt: action.attempt,
            sequence: action.sequence,
            leaf_index: action.leaf_index,
            outcome,
            detail,
        });

        // Mirror portal/aztec/receipt outcomes as their own events so the
        // checker sees rejections uniformly regardless of the caller.
        let caller = format!("relayer-{relayer}");
        match (&action.outcome, action.task_kind) {
            (TaskOutcome::Succeeded(TaskSuccess::AlreadyConsumed { h }), _) => {
                self.record(TraceEvent::PortalRejected {
                    caller,
                    legacy: false,
                    error: "already consumed".to_string(),
                    h: Some(*h),
                    sequence: action.sequence,
                });
            }
            (TaskOutcome::Dropped { error }, "submit_vaa") => {
                self.record(TraceEvent::PortalRejected {
                    caller,
                    legacy: false,
                    error: error.clone(),
                    h: None,
                    sequence: action.sequence,
                });
            }
            (TaskOutcome::Succeeded(TaskSuccess::AztecConsumed { leaf_index, sequence, count }), _) => {
                let content = self
                    .enqueue_facts
                    .get(leaf_index)
                    .map(|_| self.aztec.leaves()[*leaf_index as usize].content)
                    .unwrap_or_default();
                self.record(TraceEvent::AztecConsumed {
                    caller,
                    leaf_index: *leaf_index,
                    sequence: *sequence,
                    content,
                    count: *count,
                });
            }
            (TaskOutcome::Retried { error, .. }, "consume_on_aztec") => {
                if let Some(leaf_index) = action.leaf_index {
                    self.record(TraceEvent::AztecRejected { caller, leaf_index, error: error.clone() });
                }
            }
            (TaskOutcome::Dropped { error }, "consume_on_aztec") => {
                if let Some(leaf_index) = action.leaf_index {
                    self.record(TraceEvent::AztecRejected { caller, leaf_index, error: error.clone() });
                }
            }
            (TaskOutcome::Succeeded(TaskSuccess::ReceiptRecorded { sequence }), _) => {
                self.record(TraceEvent::ReceiptRecorded { orig_sequence: *sequence, relayer });
            }
            (TaskOutcome::Dropped { error }, "record_receipt") => {
                self.record(TraceEvent::ReceiptRejected { relayer, error: error.clone() });
            }
            _ => {}
        }
    }

    /// After an Aztec consumption: publish the receipt, have the guardians
    /// sign the receipt VAA on the EVM side, and hand the recording task to
    /// the relayer that drove the consumption.
    fn receipt_phase(&mut self, idx: usize, actions: &[StepAction], tick: u64) {
        for action in actions {
            let TaskOutcome::Succeeded(TaskSuccess::AztecConsumed { leaf_index, .. }) =
                &action.outcome
            else {
                continue;
            };
            let leaf_index = *leaf_index;
            if !self.receipt_published_leaves.insert(leaf_index) {
                continue;
            }
            let Some(facts) = self.enqueue_facts.get(&leaf_index).cloned() else {
                continue;
            };
            let result_hash = keccak256_concat(&[b"zkcb/result", &facts.h.0]);
            let receipt = match self.portal.publish_receipt(
                &facts.h,
                &AztecFacts {
                    aztec_key: facts.key,
                    leaf_index,
                    secret_hash: facts.secret_hash,
                    result_hash,
                },
            ) {
                Ok(r) => r,
                Err(e) => {
                    self.record(TraceEvent::ReceiptRejected {
                        relayer: idx as u64,
                        error: e.to_string(),
                    });
                    continue;
                }
            };
            let orig_sequence = receipt.orig_sequence;

            let mut mutated = receipt;
            match self.spec.receipt_mutation {
                Some(ReceiptMutation::WrongOriginPair) => {
                    mutated.orig_emitter = Bytes32::from_u64_be(0xBAD);
                }
                Some(ReceiptMutation::WrongVersion) => mutated.version = 2,
                _ => {}
            }

            let body = VaaBody {
                version: 1,
                guardian_set_index: self.guardians.set.index,
                timestamp: tick as u32,
                nonce: 0,
                emitter_chain: EVM_CHAIN,
                emitter_address: self.portal_evm_emitter,
                sequence: self.receipt_next_seq,
                consistency_level: Finality::Finalized.consistency_level(),
                payload: codec::encode_receipt(&mutated),
            };
            self.receipt_next_seq += 1;
            let vaa = self.guardians.sign_body(body);

            let owner = match self.spec.receipt_mutation {
                Some(ReceiptMutation::WrongAccountOwner) => AccountOwnerId([0x01; 32]),
                _ => self.wormhole_core_owner,
            };
            let pda_sequence_key = match self.spec.receipt_mutation {
                Some(ReceiptMutation::WrongPdaKey) => orig_sequence + 1,
                _ => orig_sequence,
            };
            self.relayers[idx].enqueue(
                TaskKind::RecordReceipt {
                    account: Box::new(PostedVaaAccount { owner, vaa }),
                    pda_sequence_key,
                },
                tick + 1,
            );
            self.record(TraceEvent::ReceiptPublished { h: facts.h, orig_sequence, leaf_index });
        }
    }

    fn is_quiescent(&self, tick: u64) -> bool {
        if !self.posts_pending.is_empty() || !self.adversary_pending.is_empty() {
            return false;
        }
        if self.guardians.pending() > 0 {
            return false;
        }
        if self.relayers.iter().any(|r| r.has_pending_tasks()) {
            return false;
        }
        // Every pool entry must be visible and picked up by every relayer.
        self.pool.iter().all(|e| {
            e.visible_from <= tick
                && self.relayers.iter().all(|r| r.seen_vaas.contains(&e.h))
        })
    }
}
