//! Evaluates the protocol's safety and liveness properties from a trace
//! alone: replay-safety, authenticity, finality alignment, parameter binding,
//! no front-running, single consumption, idempotence, liveness, atomicity.
//!
//! Violations attributable purely to the legacy `consumeWithSecret` path are
//! marked `legacy_only`; the normative guarantees never depend on it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::crypto::{commitment, domain_tag, Digest32, FieldElement};
use crate::types::{Bytes32, ChainId, Finality, Sequence, SlotNumber};

use super::trace::{StateSnapshot, TraceEvent, TraceRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Violated { witnesses: Vec<String>, legacy_only: bool },
    NotApplicable { reason: String },
}

impl Verdict {
    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated { .. })
    }

    pub fn is_non_legacy_violation(&self) -> bool {
        matches!(self, Verdict::Violated { legacy_only: false, .. })
    }

    fn from_witnesses(witnesses: Vec<(String, bool)>) -> Verdict {
        if witnesses.is_empty() {
            return Verdict::Pass;
        }
        let legacy_only = witnesses.iter().all(|(_, legacy)| *legacy);
        Verdict::Violated {
            witnesses: witnesses.into_iter().map(|(w, _)| w).collect(),
            legacy_only,
        }
    }
}

/// One named verdict per checked property, plus observational notes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyVerdicts {
    pub replay_safety: Verdict,
    pub authenticity: Verdict,
    pub finality_alignment: Verdict,
    pub parameter_binding: Verdict,
    pub no_front_running: Verdict,
    pub single_consumption: Verdict,
    pub idempotence: Verdict,
    pub liveness: Verdict,
    pub atomicity: Verdict,
    /// Normative-path enqueues carrying the all-zero secret-hash sentinel,
    /// accepted but surfaced for observability.
    pub zero_secret_enqueues: u64,
}

impl PropertyVerdicts {
    pub fn iter_named(&self) -> Vec<(&'static str, &Verdict)> {
        vec![
            ("replay_safety", &self.replay_safety),
            ("authenticity", &self.authenticity),
            ("finality_alignment", &self.finality_alignment),
            ("parameter_binding", &self.parameter_binding),
            ("no_front_running", &self.no_front_running),
            ("single_consumption", &self.single_consumption),
            ("idempotence", &self.idempotence),
            ("liveness", &self.liveness),
            ("atomicity", &self.atomicity),
        ]
    }

    /// True when no property is violated outside the legacy path.
    pub fn all_non_legacy_pass(&self) -> bool {
        !self.iter_named().iter().any(|(_, v)| v.is_non_legacy_violation())
    }
}

struct Config {
    emitter_chain: ChainId,
    emitter: Bytes32,
    fairness: bool,
    confirmed_delay: u64,
    finalized_delay: u64,
    honest_relayers: u64,
}

fn delay_for(cfg: &Config, f: Finality) -> u64 {
    match f {
        Finality::Confirmed => cfg.confirmed_delay,
        Finality::Finalized => cfg.finalized_delay,
    }
}

/// Computes every verdict from the record log alone.
pub fn check_properties(records: &[TraceRecord]) -> PropertyVerdicts {
    let cfg = records
        .iter()
        .find_map(|r| match &r.event {
            TraceEvent::ScenarioStart {
                emitter_chain,
                emitter,
                fairness,
                confirmed_delay,
                finalized_delay,
                honest_relayers,
                ..
            } => Some(Config {
                emitter_chain: *emitter_chain,
                emitter: *emitter,
                fairness: *fairness,
                confirmed_delay: *confirmed_delay,
                finalized_delay: *finalized_delay,
                honest_relayers: *honest_relayers,
            }),
            _ => None,
        })
        .unwrap_or(Config {
            emitter_chain: 1,
            emitter: Bytes32::from_u64_be(1),
            fairness: true,
            confirmed_delay: 2,
            finalized_delay: 32,
            honest_relayers: 0,
        });

    // Indexes over the log.
    struct Emitted {
        sequence: Sequence,
        consistency: Finality,
        post_slot: SlotNumber,
        emitter_chain: ChainId,
        emitter: Bytes32,
        emitted_slot: SlotNumber,
    }
    struct Consumed {
        seq: Sequence,
        payload: Vec<u8>,
    }
    struct Enqueued {
        legacy: bool,
        seq: Sequence,
        c: FieldElement,
        leaf_index: u64,
        secret_hash: Digest32,
    }

    let mut emitted: BTreeMap<Digest32, Emitted> = BTreeMap::new();
    let mut consumed: BTreeMap<Digest32, Vec<Consumed>> = BTreeMap::new();
    let mut enqueued: BTreeMap<Digest32, Vec<Enqueued>> = BTreeMap::new();
    let mut aztec_consumed: BTreeMap<u64, Vec<(Sequence, u64)>> = BTreeMap::new();
    let mut reverted: BTreeSet<Sequence> = BTreeSet::new();
    let mut honest_consume_leaves: BTreeSet<u64> = BTreeSet::new();
    let mut posted_any = false;

    for r in records {
        match &r.event {
            TraceEvent::MessagePosted { .. } => posted_any = true,
            TraceEvent::VaaEmitted {
                sequence,
                consistency,
                post_slot,
                emitter_chain,
                emitter,
                h,
            } => {
                emitted.insert(
                    *h,
                    Emitted {
                        sequence: *sequence,
                        consistency: *consistency,
                        post_slot: *post_slot,
                        emitter_chain: *emitter_chain,
                        emitter: *emitter,
                        emitted_slot: r.slot,
                    },
                );
            }
            TraceEvent::VaaConsumed { h, seq, payload, .. } => {
                consumed.entry(*h).or_default().push(Consumed { seq: *seq, payload: payload.clone() });
            }
            TraceEvent::InboxEnqueued { legacy, h, seq, c, leaf_index, secret_hash, .. } => {
                enqueued.entry(*h).or_default().push(Enqueued {
                    legacy: *legacy,
                    seq: *seq,
                    c: *c,
                    leaf_index: *leaf_index,
                    secret_hash: *secret_hash,
                });
            }
            TraceEvent::AztecConsumed { leaf_index, sequence, count, .. } => {
                aztec_consumed.entry(*leaf_index).or_default().push((*sequence, *count));
            }
            TraceEvent::SlotsReorged { reverted_sequences, .. } => {
                reverted.extend(reverted_sequences.iter().copied());
            }
            TraceEvent::RelayerTask { honest: true, task, leaf_index: Some(leaf), .. }
                if task == "consume_on_aztec" =>
            {
                honest_consume_leaves.insert(*leaf);
            }
            _ => {}
        }
    }

    // Replay-safety: at most one successful consume per body hash.
    let mut witnesses = Vec::new();
    for (h, list) in &consumed {
        if list.len() > 1 {
            witnesses.push((format!("h {h} consumed {} times", list.len()), false));
        }
    }
    let replay_safety = Verdict::from_witnesses(witnesses);

    // Authenticity: every consumed VAA was guardian-emitted from the
    // configured origin pair.
    let mut witnesses = Vec::new();
    for h in consumed.keys() {
        match emitted.get(h) {
            None => witnesses.push((
                format!("h {h} consumed but never emitted by the guardian set"),
                false,
            )),
            Some(e) => {
                if e.emitter_chain != cfg.emitter_chain || e.emitter != cfg.emitter {
                    witnesses.push((
                        format!(
                            "h {h} consumed from unconfigured origin ({}, {})",
                            e.emitter_chain, e.emitter
                        ),
                        false,
                    ));
                }
            }
        }
    }
    let authenticity = Verdict::from_witnesses(witnesses);

    // Finality alignment: no VAA emitted before its finality delay elapsed.
    let mut witnesses = Vec::new();
    for (h, e) in &emitted {
        let due = e.post_slot + delay_for(&cfg, e.consistency);
        if e.emitted_slot < due {
            witnesses.push((
                format!(
                    "h {h} (seq {}) emitted at slot {} before finality slot {due}",
                    e.sequence, e.emitted_slot
                ),
                false,
            ));
        }
    }
    let finality_alignment = Verdict::from_witnesses(witnesses);

    // Parameter binding: each enqueued (c, secretHash) recomputes exactly
    // from the logged payload under the normative derivation.
    let mut binding_witnesses = Vec::new();
    let mut zero_secret_enqueues = 0u64;
    for (h, enq_list) in &enqueued {
        let payloads = consumed.get(h);
        for e in enq_list {
            if !e.legacy && e.secret_hash == Digest32([0u8; 32]) {
                zero_secret_enqueues += 1;
            }
            let Some(payload) =
                payloads.and_then(|l| l.iter().find(|c| c.seq == e.seq)).map(|c| &c.payload)
            else {
                binding_witnesses.push((
                    format!("enqueue for h {h} has no matching consumed payload"),
                    e.legacy,
                ));
                continue;
            };
            if payload.len() < 32 {
                binding_witnesses.push((
                    format!("h {h}: payload shorter than a secret hash"),
                    e.legacy,
                ));
                continue;
            }
            let expect_secret = Digest32(payload[..32].try_into().unwrap());
            let dom = domain_tag(cfg.emitter_chain, &cfg.emitter, e.seq);
            let expect_c = commitment(&dom, &payload[32..]);
            if e.secret_hash != expect_secret {
                binding_witnesses.push((
                    format!(
                        "h {h}: enqueued secretHash {} differs from payload-derived {}",
                        e.secret_hash, expect_secret
                    ),
                    e.legacy,
                ));
            }
            if e.c != expect_c {
                binding_witnesses.push((
                    format!(
                        "h {h}: enqueued c {} differs from recomputed {}",
                        e.c, expect_c
                    ),
                    e.legacy,
                ));
            }
        }
    }
    let parameter_binding = Verdict::from_witnesses(binding_witnesses.clone());

    // No front-running: a relayer can never bind an accepted h to a pair the
    // body does not determine -- and no h ever maps to two distinct pairs.
    let mut witnesses = binding_witnesses;
    for (h, enq_list) in &enqueued {
        let pairs: BTreeSet<(FieldElement, Digest32)> =
            enq_list.iter().map(|e| (e.c, e.secret_hash)).collect();
        if pairs.len() > 1 {
            let legacy = enq_list.iter().all(|e| e.legacy);
            witnesses.push((
                format!("h {h} enqueued with {} distinct (c, secretHash) pairs", pairs.len()),
                legacy,
            ));
        }
    }
    let no_front_running = Verdict::from_witnesses(witnesses);

    // Single consumption: each leaf consumed at most once; counts ascend 1..n.
    let mut witnesses = Vec::new();
    for (leaf, list) in &aztec_consumed {
        if list.len() > 1 {
            witnesses.push((format!("leaf {leaf} consumed {} times", list.len()), false));
        }
    }
    let mut counts: Vec<u64> =
        aztec_consumed.values().flatten().map(|(_, count)| *count).collect();
    counts.sort_unstable();
    for (i, c) in counts.iter().enumerate() {
        if *c != (i as u64) + 1 {
            witnesses.push((format!("consumer count sequence broken at {c}"), false));
            break;
        }
    }
    let single_consumption = Verdict::from_witnesses(witnesses);

    // Idempotence: per origin sequence, at most one enqueue and one
    // L2 consumption.
    let mut witnesses = Vec::new();
    let mut enqueues_per_seq: BTreeMap<Sequence, u64> = BTreeMap::new();
    let mut leaf_to_seq: BTreeMap<u64, Sequence> = BTreeMap::new();
    for list in enqueued.values() {
        for e in list {
            *enqueues_per_seq.entry(e.seq).or_default() += 1;
            leaf_to_seq.insert(e.leaf_index, e.seq);
        }
    }
    for (seq, n) in &enqueues_per_seq {
        if *n > 1 {
            witnesses.push((format!("sequence {seq} enqueued {n} times"), false));
        }
    }
    let mut consumes_per_seq: BTreeMap<Sequence, u64> = BTreeMap::new();
    for (leaf, list) in &aztec_consumed {
        if let Some(seq) = leaf_to_seq.get(leaf) {
            *consumes_per_seq.entry(*seq).or_default() += list.len() as u64;
        }
    }
    for (seq, n) in &consumes_per_seq {
        if *n > 1 {
            witnesses.push((format!("sequence {seq} consumed {n} times on Aztec"), false));
        }
    }
    let idempotence = Verdict::from_witnesses(witnesses);

    // Liveness, under fairness with at least one honest relayer: every
    // non-reverted emitted VAA from the configured origin is consumed, and
    // every leaf an honest relayer addressed is consumed on Aztec.
    let liveness = if !posted_any {
        Verdict::NotApplicable { reason: "no messages posted".into() }
    } else if !cfg.fairness {
        Verdict::NotApplicable { reason: "fairness disabled".into() }
    } else if cfg.honest_relayers == 0 {
        Verdict::NotApplicable { reason: "no honest relayer".into() }
    } else {
        let mut witnesses = Vec::new();
        for (h, e) in &emitted {
            if e.emitter_chain != cfg.emitter_chain || e.emitter != cfg.emitter {
                continue;
            }
            if reverted.contains(&e.sequence) {
                continue;
            }
            if !consumed.contains_key(h) {
                witnesses.push((
                    format!("emitted VAA (seq {}) never consumed at the Portal", e.sequence),
                    false,
                ));
            }
        }
        for leaf in &honest_consume_leaves {
            if !aztec_consumed.contains_key(leaf) {
                let legacy = enqueued
                    .values()
                    .flatten()
                    .find(|e| e.leaf_index == *leaf)
                    .map(|e| e.legacy)
                    .unwrap_or(false);
                witnesses.push((
                    format!("leaf {leaf} addressed by an honest relayer never consumed"),
                    legacy,
                ));
            }
        }
        Verdict::from_witnesses(witnesses)
    };

    // Atomicity: every rejection leaves the counters exactly as they were,
    // and counters never decrease.
    let mut witnesses = Vec::new();
    let mut prev: Option<&StateSnapshot> = None;
    for r in records {
        if let Some(p) = prev {
            let s = &r.state;
            let rejected = matches!(
                r.event,
                TraceEvent::PortalRejected { .. }
                    | TraceEvent::AztecRejected { .. }
                    | TraceEvent::ReceiptRejected { .. }
            );
            if rejected && *p != r.state {
                witnesses.push((
                    format!("tick {}: {} changed state counters", r.tick, r.event.name()),
                    false,
                ));
            }
            if s.consumed < p.consumed
                || s.leaves < p.leaves
                || s.included < p.included
                || s.consumer_count < p.consumer_count
                || s.receipts < p.receipts
            {
                witnesses.push((
                    format!("tick {}: a state counter decreased", r.tick),
                    false,
                ));
            }
        }
        prev = Some(&r.state);
    }
    let atomicity = Verdict::from_witnesses(witnesses);

    PropertyVerdicts {
        replay_safety,
        authenticity,
        finality_alignment,
        parameter_binding,
        no_front_running,
        single_consumption,
        idempotence,
        liveness,
        atomicity,
        zero_secret_enqueues,
    }
}
