//! Chain-free, deterministic implementation of the ZKCB/v1 bridge: a Solana
//! origin posts Wormhole messages, a guardian committee signs VAAs after the
//! requested finality, an EVM Portal verifies, replay-locks, and derives a
//! domain-separated field commitment from the bound payload, and an Aztec
//! inbox/consumer redeems each message exactly once against a secret hash.
//!
//! The crate ships the normative codecs and state machines together with a
//! seeded discrete-event simulator ([`sim`]) that drives every actor under an
//! adversarial scheduler and checks the protocol's safety and liveness
//! properties from the resulting trace.

pub mod aztec;
pub mod codec;
pub mod crypto;
pub mod guardians;
pub mod origin;
pub mod portal;
pub mod relayer;
pub mod sim;
pub mod types;
pub mod vectors;

pub use crypto::{Digest32, FieldElement};
pub use types::{Bytes32, ChainId, Finality, PortalAddress, Sequence};
