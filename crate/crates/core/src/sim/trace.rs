//! The trace: one JSONL record per observable step, plus the verdict summary.
//!
//! Records are fully self-describing so the property checker works from a
//! trace file alone, and serialization is deterministic byte for byte given
//! the same scenario and seed.

use serde::{Deserialize, Serialize};

use crate::crypto::{Digest32, FieldElement};
use crate::types::{hexvec, Bytes32, ChainId, Finality, PortalAddress, Sequence, SlotNumber};

use super::checker::PropertyVerdicts;

/// Counters snapshotted after every record; the atomicity checker uses them
/// to prove failed transitions left no partial effects.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub consumed: u64,
    pub leaves: u64,
    pub included: u64,
    pub consumer_count: u64,
    pub receipts: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub tick: u64,
    pub slot: SlotNumber,
    #[serde(flatten)]
    pub event: TraceEvent,
    pub state: StateSnapshot,
}

/// Everything observable in a run. Portal events keep the protocol's exact
/// field sets (`h`, `seq`, `payload`, `aztec_key` / `c`, `key`, `leaf_index`,
/// `secret_hash`); the surrounding record adds scheduler metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    ScenarioStart {
        scenario: String,
        seed: u64,
        emitter_chain: ChainId,
        emitter: Bytes32,
        portal_address: PortalAddress,
        l2_instance: Bytes32,
        rollup_version: u32,
        legacy_enabled: bool,
        fairness: bool,
        confirmed_delay: u64,
        finalized_delay: u64,
        rollup_interval: u64,
        guardians: u8,
        quorum: u8,
        tick_budget: u64,
        honest_relayers: u64,
        receipts: bool,
    },
    MessagePosted {
        sequence: Sequence,
        batch_id: u32,
        finality: Finality,
        post_slot: SlotNumber,
        emitter_chain: ChainId,
        emitter: Bytes32,
        #[serde(with = "hexvec")]
        payload: Vec<u8>,
    },
    VaaEmitted {
        sequence: Sequence,
        consistency: Finality,
        post_slot: SlotNumber,
        emitter_chain: ChainId,
        emitter: Bytes32,
        h: Digest32,
    },
    SlotsReorged {
        depth: u64,
        reverted_after_slot: SlotNumber,
        /// Pending guardian-queue messages dropped before attestation.
        dropped_sequences: Vec<Sequence>,
        /// All posted messages whose post slot was reverted.
        reverted_sequences: Vec<Sequence>,
    },
    AdversaryAction {
        kind: String,
        target_sequence: Option<Sequence>,
        detail: String,
    },
    VaaConsumed {
        legacy: bool,
        h: Digest32,
        seq: Sequence,
        #[serde(with = "hexvec")]
        payload: Vec<u8>,
        aztec_key: Digest32,
    },
    InboxEnqueued {
        legacy: bool,
        h: Digest32,
        seq: Sequence,
        c: FieldElement,
        key: Digest32,
        leaf_index: u64,
        secret_hash: Digest32,
    },
    PortalRejected {
        caller: String,
        legacy: bool,
        error: String,
        h: Option<Digest32>,
        sequence: Option<Sequence>,
    },
    RollupTicked {
        block: u64,
        included: u64,
    },
    AztecConsumed {
        caller: String,
        leaf_index: u64,
        sequence: Sequence,
        content: FieldElement,
        count: u64,
    },
    AztecRejected {
        caller: String,
        leaf_index: u64,
        error: String,
    },
    ReceiptPublished {
        h: Digest32,
        orig_sequence: Sequence,
        leaf_index: u64,
    },
    ReceiptRecorded {
        orig_sequence: Sequence,
        relayer: u64,
    },
    ReceiptRejected {
        relayer: u64,
        error: String,
    },
    RelayerTask {
        relayer: u64,
        honest: bool,
        task: String,
        attempt: u32,
        sequence: Option<Sequence>,
        leaf_index: Option<u64>,
        outcome: String,
        detail: String,
    },
    ScenarioEnd {
        final_tick: u64,
        quiescent: bool,
    },
}

impl TraceEvent {
    pub fn name(&self) -> &'static str {
        match self {
            TraceEvent::ScenarioStart { .. } => "scenario_start",
            TraceEvent::MessagePosted { .. } => "message_posted",
            TraceEvent::VaaEmitted { .. } => "vaa_emitted",
            TraceEvent::SlotsReorged { .. } => "slots_reorged",
            TraceEvent::AdversaryAction { .. } => "adversary_action",
            TraceEvent::VaaConsumed { .. } => "vaa_consumed",
            TraceEvent::InboxEnqueued { .. } => "inbox_enqueued",
            TraceEvent::PortalRejected { .. } => "portal_rejected",
            TraceEvent::RollupTicked { .. } => "rollup_ticked",
            TraceEvent::AztecConsumed { .. } => "aztec_consumed",
            TraceEvent::AztecRejected { .. } => "aztec_rejected",
            TraceEvent::ReceiptPublished { .. } => "receipt_published",
            TraceEvent::ReceiptRecorded { .. } => "receipt_recorded",
            TraceEvent::ReceiptRejected { .. } => "receipt_rejected",
            TraceEvent::RelayerTask { .. } => "relayer_task",
            TraceEvent::ScenarioEnd { .. } => "scenario_end",
        }
    }
}

/// A full run: the event log plus computed verdicts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub scenario: String,
    pub seed: u64,
    pub records: Vec<TraceRecord>,
    pub verdicts: PropertyVerdicts,
}

/// The final JSONL line.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct SummaryLine {
    summary: Summary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Summary {
    scenario: String,
    seed: u64,
    verdicts: PropertyVerdicts,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at_unix: Option<u64>,
}

impl TraceReport {
    /// One JSON object per line: every record, then the summary. With
    /// `timestamp` set the summary carries a wall-clock field, deliberately
    /// breaking byte-for-byte reproducibility.
    pub fn to_jsonl(&self, timestamp: Option<u64>) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
            out.push('\n');
        }
        let summary = SummaryLine {
            summary: Summary {
                scenario: self.scenario.clone(),
                seed: self.seed,
                verdicts: self.verdicts.clone(),
                generated_at_unix: timestamp,
            },
        };
        out.push_str(&serde_json::to_string(&summary).expect("summary serializes"));
        out.push('\n');
        out
    }

    /// Parses a JSONL trace and recomputes the verdicts from the records.
    pub fn parse_jsonl(input: &str) -> Result<TraceReport, String> {
        let mut records = Vec::new();
        let mut summary: Option<Summary> = None;
        for (lineno, line) in input.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Ok(s) = serde_json::from_str::<SummaryLine>(line) {
                summary = Some(s.summary);
                continue;
            }
            let record: TraceRecord = serde_json::from_str(line)
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
            records.push(record);
        }
        let verdicts = super::checker::check_properties(&records);
        let (scenario, seed) = match summary {
            Some(s) => (s.scenario, s.seed),
            None => records
                .iter()
                .find_map(|r| match &r.event {
                    TraceEvent::ScenarioStart { scenario, seed, .. } => {
                        Some((scenario.clone(), *seed))
                    }
                    _ => None,
                })
                .unwrap_or_else(|| ("unknown".to_string(), 0)),
        };
        Ok(TraceReport { scenario, seed, records, verdicts })
    }
}
