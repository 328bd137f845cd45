//! Off-chain relayer: ferries VAAs to the Portal, drives Aztec consumption
//! with bounded exponential backoff, and ferries receipt VAAs back to the
//! origin chain.
//!
//! Failures are task outcomes, never errors: retryable ones reschedule with
//! backoff, permanent ones drop the task and log why.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::aztec::{AztecError, AztecState};
use crate::crypto::{Digest32, FieldElement};
use crate::origin::{OriginState, PostedVaaAccount};
use crate::portal::{EnqueueResult, Portal, PortalError, PortalEvent};
use crate::types::{Sequence, SlotNumber};

/// Backoff and honesty parameters for one relayer instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RelayerConfig {
    pub max_retries: u32,
    pub base_backoff: u64,
    pub backoff_multiplier: u64,
    pub backoff_cap: u64,
    pub honest: bool,
}

impl Default for RelayerConfig {
    fn default() -> Self {
        RelayerConfig {
            max_retries: 10,
            base_backoff: 1,
            backoff_multiplier: 2,
            backoff_cap: 16,
            honest: true,
        }
    }
}

/// Delay before retry number `attempt` (0-based): `min(cap, base * mult^attempt)`.
pub fn backoff_delay(config: &RelayerConfig, attempt: u32) -> u64 {
    let factor = config.backoff_multiplier.saturating_pow(attempt);
    config.base_backoff.saturating_mul(factor).min(config.backoff_cap)
}

/// What a task does when it runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TaskKind {
    SubmitVaa { encoded: Vec<u8>, sequence: Sequence },
    ConsumeOnAztec { content: FieldElement, leaf_index: u64, secret: FieldElement, sequence: Sequence },
    RecordReceipt { account: Box<PostedVaaAccount>, pda_sequence_key: Sequence },
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::SubmitVaa { .. } => "submit_vaa",
            TaskKind::ConsumeOnAztec { .. } => "consume_on_aztec",
            TaskKind::RecordReceipt { .. } => "record_receipt",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelayerTask {
    pub kind: TaskKind,
    pub attempt: u32,
    pub next_eligible_tick: u64,
}

/// Outcome of one executed task, in the shape of the task log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TaskOutcome {
    Succeeded(TaskSuccess),
    Retried { error: String, next_eligible_tick: u64 },
    Dropped { error: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TaskSuccess {
    VaaConsumed(EnqueueResult),
    /// The portal already consumed this VAA; dropped, but an honest relayer
    /// derives the Aztec consume task from the portal's event log instead.
    AlreadyConsumed { h: Digest32 },
    AztecConsumed { leaf_index: u64, sequence: Sequence, count: u64 },
    ReceiptRecorded { sequence: Sequence },
}

/// One executed task and its outcome.
#[derive(Clone, Debug)]
pub struct StepAction {
    pub task_kind: &'static str,
    pub attempt: u32,
    /// Origin sequence the task addresses, when known.
    pub sequence: Option<Sequence>,
    /// Inbox leaf the task addresses (consume tasks only).
    pub leaf_index: Option<u64>,
    pub outcome: TaskOutcome,
}

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum RelayerError {
    #[error("no InboxEnqueued event found for body hash {0}")]
    MissingEnqueueEvent(Digest32),
}

/// Mutable references to the on-chain states a relayer acts on.
pub struct WorldAccess<'a> {
    pub portal: &'a mut Portal,
    pub aztec: &'a mut AztecState,
    pub origin: &'a mut OriginState,
    pub current_slot: SlotNumber,
}

/// One relayer instance: config, task queue, held secrets, and the VAAs it
/// has already picked up.
#[derive(Clone, Debug)]
pub struct RelayerState {
    pub id: usize,
    pub config: RelayerConfig,
    pub tasks: Vec<RelayerTask>,
    /// Secrets held for the honest flow, keyed by origin sequence.
    pub secrets: BTreeMap<Sequence, FieldElement>,
    pub seen_vaas: BTreeSet<Digest32>,
}

impl RelayerState {
    pub fn new(id: usize, config: RelayerConfig) -> Self {
        RelayerState {
            id,
            config,
            tasks: Vec::new(),
            secrets: BTreeMap::new(),
            seen_vaas: BTreeSet::new(),
        }
    }

    pub fn enqueue(&mut self, kind: TaskKind, tick: u64) {
        self.tasks.push(RelayerTask { kind, attempt: 0, next_eligible_tick: tick });
    }

    pub fn has_pending_tasks(&self) -> bool {
        !self.tasks.is_empty()
    }
}

/// Reads the consume parameters for `h` off the portal event log and pairs
/// them with the caller-held secret.
pub fn derive_consume_task(
    h: &Digest32,
    secret: FieldElement,
    portal_events: &[PortalEvent],
) -> Result<TaskKind, RelayerError> {
    for event in portal_events {
        if let PortalEvent::InboxEnqueued { h: eh, seq, c, leaf_index, .. } = event {
            if eh == h {
                return Ok(TaskKind::ConsumeOnAztec {
                    content: *c,
                    leaf_index: *leaf_index,
                    secret,
                    sequence: *seq,
                });
            }
        }
    }
    Err(RelayerError::MissingEnqueueEvent(*h))
}

/// Runs every task eligible at `tick`. Retryable failures reschedule with
/// exponential backoff until `max_retries`; permanent failures drop the task;
/// successes enqueue their follow-up (SubmitVaa -> ConsumeOnAztec when the
/// relayer holds the secret).
pub fn relayer_step(
    relayer: &mut RelayerState,
    world: &mut WorldAccess<'_>,
    tick: u64,
) -> Vec<StepAction> {
    let mut actions = Vec::new();
    let mut waiting = Vec::new();
    let mut followups = Vec::new();
    let tasks = std::mem::take(&mut relayer.tasks);

    for mut task in tasks {
        if task.next_eligible_tick > tick {
            waiting.push(task);
            continue;
        }
        let task_kind = task.kind.name();
        let attempt = task.attempt;
        let (sequence, leaf_index) = match &task.kind {
            TaskKind::SubmitVaa { sequence, .. } => (Some(*sequence), None),
            TaskKind::ConsumeOnAztec { sequence, leaf_index, .. } => {
                (Some(*sequence), Some(*leaf_index))
            }
            TaskKind::RecordReceipt { pda_sequence_key, .. } => (Some(*pda_sequence_key), None),
        };
        let outcome = execute(&relayer.config, &relayer.secrets, &mut task, world, &mut followups);
        let outcome = match outcome {
            Flow::Done(o) => o,
            Flow::Retry(error) => {
                if task.attempt + 1 > relayer.config.max_retries {
                    TaskOutcome::Dropped { error: format!("retries exhausted: {error}") }
                } else {
                    let delay = backoff_delay(&relayer.config, task.attempt);
                    task.attempt += 1;
                    task.next_eligible_tick = tick + delay;
                    let next = task.next_eligible_tick;
                    waiting.push(task);
                    TaskOutcome::Retried { error, next_eligible_tick: next }
                }
            }
        };
        actions.push(StepAction { task_kind, attempt, sequence, leaf_index, outcome });
    }

    relayer.tasks = waiting;
    for kind in followups {
        relayer.enqueue(kind, tick);
    }
    actions
}

enum Flow {
    Done(TaskOutcome),
    Retry(String),
}

fn execute(
    config: &RelayerConfig,
    secrets: &BTreeMap<Sequence, FieldElement>,
    task: &mut RelayerTask,
    world: &mut WorldAccess<'_>,
    followups: &mut Vec<TaskKind>,
) -> Flow {
    match &task.kind {
        TaskKind::SubmitVaa { encoded, sequence } => {
            match world.portal.consume(world.aztec, encoded) {
                Ok(result) => {
                    if config.honest {
                        if let Some(secret) = secrets.get(sequence) {
                            followups.push(TaskKind::ConsumeOnAztec {
                                content: result.commitment,
                                leaf_index: result.leaf_index,
                                secret: *secret,
                                sequence: *sequence,
                            });
                        }
                    }
                    Flow::Done(TaskOutcome::Succeeded(TaskSuccess::VaaConsumed(result)))
                }
                Err(PortalError::AlreadyConsumed(h)) => {
                    // Lost the race. An honest relayer with the secret still
                    // drives consumption using the winner's enqueue event.
                    if config.honest {
                        if let Some(secret) = secrets.get(sequence) {
                            if let Ok(kind) =
                                derive_consume_task(&h, *secret, world.portal.events())
                            {
                                followups.push(kind);
                            }
                        }
                    }
                    Flow::Done(TaskOutcome::Succeeded(TaskSuccess::AlreadyConsumed { h }))
                }
                Err(e) => Flow::Done(TaskOutcome::Dropped { error: e.to_string() }),
            }
        }
        TaskKind::ConsumeOnAztec { content, leaf_index, secret, sequence } => {
            match world.aztec.consume_from_inbox(*content, *leaf_index, *secret) {
                Ok(count) => Flow::Done(TaskOutcome::Succeeded(TaskSuccess::AztecConsumed {
                    leaf_index: *leaf_index,
                    sequence: *sequence,
                    count,
                })),
                Err(AztecError::NotYetIncluded(_)) => {
                    Flow::Retry(AztecError::NotYetIncluded(*leaf_index).to_string())
                }
                Err(e) => Flow::Done(TaskOutcome::Dropped { error: e.to_string() }),
            }
        }
        TaskKind::RecordReceipt { account, pda_sequence_key } => {
            match world.origin.record_receipt_from_vaa(account, *pda_sequence_key, world.current_slot)
            {
                Ok(recorded) => Flow::Done(TaskOutcome::Succeeded(TaskSuccess::ReceiptRecorded {
                    sequence: recorded.receipt.orig_sequence,
                })),
                Err(e) => Flow::Done(TaskOutcome::Dropped { error: e.to_string() }),
            }
        }
    }
}
