//! Deterministic seeded discrete-event simulation of the whole bridge, with
//! a rushing network adversary and trace-level property checking.

pub mod campaign;
pub mod checker;
pub mod scenario;
pub mod trace;
pub mod world;

pub use campaign::{adversarial_scenario, run_campaign, CampaignOutcome};
pub use checker::{check_properties, PropertyVerdicts, Verdict};
pub use scenario::{AdversaryAction, AdversaryEvent, PostSpec, ReceiptMutation, ScenarioSpec};
pub use trace::{StateSnapshot, TraceEvent, TraceRecord, TraceReport};
pub use world::{run_scenario, SimError, World, EVM_CHAIN, ORIGIN_CHAIN};
