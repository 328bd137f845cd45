//! Simulated Aztec side: the L1->L2 message inbox, explicit rollup inclusion
//! ticks, and the consumer contract with single-consumption semantics.

use serde::{Deserialize, Serialize};

use crate::crypto::{secret_hash, Digest32, FieldElement};
use crate::types::{BlockNumber, Bytes32, PortalAddress};

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum AztecError {
    #[error("no inbox leaf at index {0}")]
    NoSuchLeaf(u64),
    #[error("leaf {0} is not yet included in a rollup block")]
    NotYetIncluded(u64),
    #[error("leaf {0} was already consumed")]
    AlreadyConsumed(u64),
    #[error("content hash does not match leaf {0}")]
    ContentMismatch(u64),
    #[error("leaf sender does not match the configured portal address")]
    SenderMismatch,
    #[error("secret preimage does not match the leaf's secret hash")]
    BadSecret,
    #[error("portal address was already set")]
    PortalAlreadySet,
}

/// One L1->L2 message: the commitment, its consumption gate, and inclusion
/// status. Indices are assigned sequentially from zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InboxLeaf {
    pub content: FieldElement,
    pub secret_hash: Digest32,
    pub sender: PortalAddress,
    pub recipient: (Bytes32, u32),
    pub leaf_index: u64,
    pub included_in_block: Option<BlockNumber>,
    pub consumed: bool,
}

/// The consumer contract record: portal binding plus last observed values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsumerState {
    pub portal_addr: Option<PortalAddress>,
    pub last_content: FieldElement,
    pub last_leaf: u64,
    pub last_secret: FieldElement,
    pub count: u64,
}

/// Inbox leaves, the rollup inclusion frontier, and the consumer record.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AztecState {
    leaves: Vec<InboxLeaf>,
    pub current_block: BlockNumber,
    pending_frontier: usize,
    pub consumer: ConsumerState,
}

impl AztecState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn leaves(&self) -> &[InboxLeaf] {
        &self.leaves
    }

    pub fn included_count(&self) -> usize {
        self.pending_frontier
    }

    /// Appends a new unconsumed, not-yet-included leaf and returns its index.
    pub fn inbox_enqueue(
        &mut self,
        content: FieldElement,
        secret_hash: Digest32,
        sender: PortalAddress,
        recipient: (Bytes32, u32),
    ) -> u64 {
        let leaf_index = self.leaves.len() as u64;
        self.leaves.push(InboxLeaf {
            content,
            secret_hash,
            sender,
            recipient,
            leaf_index,
            included_in_block: None,
            consumed: false,
        });
        leaf_index
    }

    /// Advances one rollup block; every pending leaf becomes included in it.
    /// Returns the new block number and how many leaves were included.
    pub fn rollup_tick(&mut self) -> (BlockNumber, usize) {
        self.current_block += 1;
        let newly = self.leaves.len() - self.pending_frontier;
        for leaf in &mut self.leaves[self.pending_frontier..] {
            leaf.included_in_block = Some(self.current_block);
        }
        self.pending_frontier = self.leaves.len();
        (self.current_block, newly)
    }

    /// Stores the Portal's L1 address, once.
    pub fn set_portal_once(&mut self, addr: PortalAddress) -> Result<(), AztecError> {
        if self.consumer.portal_addr.is_some() {
            return Err(AztecError::PortalAlreadySet);
        }
        self.consumer.portal_addr = Some(addr);
        Ok(())
    }

    /// Consumes an included, unconsumed leaf whose content, sender, and secret
    /// hash all match. Checks run cheapest first: existence, inclusion,
    /// unconsumed, content, sender, and only then the secret hash. On success
    /// the leaf is marked consumed and the last-observed record updates;
    /// returns the new consumption count.
    pub fn consume_from_inbox(
        &mut self,
        content_hash: FieldElement,
        leaf_index: u64,
        secret: FieldElement,
    ) -> Result<u64, AztecError> {
        let leaf = self
            .leaves
            .get(leaf_index as usize)
            .ok_or(AztecError::NoSuchLeaf(leaf_index))?;
        if leaf.included_in_block.is_none() {
            return Err(AztecError::NotYetIncluded(leaf_index));
        }
        if leaf.consumed {
            return Err(AztecError::AlreadyConsumed(leaf_index));
        }
        if leaf.content != content_hash {
            return Err(AztecError::ContentMismatch(leaf_index));
        }
        if self.consumer.portal_addr != Some(leaf.sender) {
            return Err(AztecError::SenderMismatch);
        }
        if secret_hash(&secret) != leaf.secret_hash {
            return Err(AztecError::BadSecret);
        }
        self.leaves[leaf_index as usize].consumed = true;
        self.consumer.last_content = content_hash;
        self.consumer.last_leaf = leaf_index;
        self.consumer.last_secret = secret;
        self.consumer.count += 1;
        Ok(self.consumer.count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PORTAL: PortalAddress = PortalAddress([0xAB; 20]);
    const RECIPIENT: (Bytes32, u32) = (Bytes32([2u8; 32]), 1);

    fn state_with_portal() -> AztecState {
        let mut s = AztecState::new();
        s.set_portal_once(PORTAL).unwrap();
        s
    }

    fn enqueue_default(s: &mut AztecState, secret: &FieldElement) -> u64 {
        s.inbox_enqueue(FieldElement::from_u64(5), secret_hash(secret), PORTAL, RECIPIENT)
    }

    #[test]
    fn leaf_indices_are_sequential() {
        let mut s = state_with_portal();
        let secret = FieldElement::from_u64(11);
        assert_eq!(enqueue_default(&mut s, &secret), 0);
        assert_eq!(enqueue_default(&mut s, &secret), 1);
    }

    #[test]
    fn consume_requires_inclusion() {
        let mut s = state_with_portal();
        let secret = FieldElement::from_u64(11);
        let leaf = enqueue_default(&mut s, &secret);
        assert_eq!(
            s.consume_from_inbox(FieldElement::from_u64(5), leaf, secret),
            Err(AztecError::NotYetIncluded(leaf))
        );
        s.rollup_tick();
        assert_eq!(s.consume_from_inbox(FieldElement::from_u64(5), leaf, secret), Ok(1));
    }

    #[test]
    fn rollup_tick_includes_all_pending_in_one_block() {
        let mut s = state_with_portal();
        let secret = FieldElement::from_u64(1);
        for _ in 0..3 {
            enqueue_default(&mut s, &secret);
        }
        let (block, included) = s.rollup_tick();
        assert_eq!((block, included), (1, 3));
        assert!(s.leaves().iter().all(|l| l.included_in_block == Some(1)));

        // Leaves enqueued after the tick stay pending until the next one.
        let late = enqueue_default(&mut s, &secret);
        assert!(s.leaves()[late as usize].included_in_block.is_none());
        let (block, included) = s.rollup_tick();
        assert_eq!((block, included), (2, 1));
    }

    #[test]
    fn empty_rollup_tick_only_advances_block() {
        let mut s = state_with_portal();
        assert_eq!(s.rollup_tick(), (1, 0));
        assert_eq!(s.rollup_tick(), (2, 0));
    }

    #[test]
    fn set_portal_is_once_only() {
        let mut s = AztecState::new();
        s.set_portal_once(PORTAL).unwrap();
        assert_eq!(s.set_portal_once(PortalAddress([1; 20])), Err(AztecError::PortalAlreadySet));
        assert_eq!(s.consumer.portal_addr, Some(PORTAL));
    }

    #[test]
    fn consume_before_set_portal_is_sender_mismatch() {
        let mut s = AztecState::new();
        let secret = FieldElement::from_u64(3);
        let leaf = enqueue_default(&mut s, &secret);
        s.rollup_tick();
        assert_eq!(
            s.consume_from_inbox(FieldElement::from_u64(5), leaf, secret),
            Err(AztecError::SenderMismatch)
        );
    }

    #[test]
    fn successful_consume_updates_last_observed_record() {
        let mut s = state_with_portal();
        let secret = FieldElement::from_u64(42);
        let leaf = enqueue_default(&mut s, &secret);
        s.rollup_tick();
        assert_eq!(s.consume_from_inbox(FieldElement::from_u64(5), leaf, secret), Ok(1));
        assert_eq!(s.consumer.last_content, FieldElement::from_u64(5));
        assert_eq!(s.consumer.last_leaf, leaf);
        assert_eq!(s.consumer.last_secret, secret);
        assert_eq!(s.consumer.count, 1);
        assert!(s.leaves()[leaf as usize].consumed);
    }

    #[test]
    fn second_consume_rejected_and_state_unchanged() {
        let mut s = state_with_portal();
        let secret = FieldElement::from_u64(42);
        let leaf = enqueue_default(&mut s, &secret);
        s.rollup_tick();
        s.consume_from_inbox(FieldElement::from_u64(5), leaf, secret).unwrap();
        let snapshot = s.clone();
        assert_eq!(
            s.consume_from_inbox(FieldElement::from_u64(5), leaf, secret),
            Err(AztecError::AlreadyConsumed(leaf))
        );
        assert_eq!(s, snapshot);
    }

    #[test]
    fn error_taxonomy_cheapest_first() {
        let mut s = state_with_portal();
        let secret = FieldElement::from_u64(9);
        let leaf = enqueue_default(&mut s, &secret);

        assert_eq!(
            s.consume_from_inbox(FieldElement::from_u64(5), 99, secret),
            Err(AztecError::NoSuchLeaf(99))
        );
        // Wrong content on an unincluded leaf reports inclusion first.
        assert_eq!(
            s.consume_from_inbox(FieldElement::from_u64(6), leaf, secret),
            Err(AztecError::NotYetIncluded(leaf))
        );
        s.rollup_tick();
        assert_eq!(
            s.consume_from_inbox(FieldElement::from_u64(6), leaf, secret),
            Err(AztecError::ContentMismatch(leaf))
        );
        assert_eq!(
            s.consume_from_inbox(FieldElement::from_u64(5), leaf, FieldElement::from_u64(8)),
            Err(AztecError::BadSecret)
        );
        assert_eq!(s.consumer.count, 0);
    }

    #[test]
    fn sampled_wrong_secrets_always_fail() {
        let mut s = state_with_portal();
        let secret = FieldElement::from_u64(1234);
        let leaf = enqueue_default(&mut s, &secret);
        s.rollup_tick();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let mut b = [0u8; 32];
            rng.fill_bytes(&mut b);
            let wrong = FieldElement::from_be_bytes_reduced(&b);
            if wrong == secret {
                continue;
            }
            assert_eq!(
                s.consume_from_inbox(FieldElement::from_u64(5), leaf, wrong),
                Err(AztecError::BadSecret)
            );
        }
        assert_eq!(s.consumer.count, 0);
        assert_eq!(s.consume_from_inbox(FieldElement::from_u64(5), leaf, secret), Ok(1));
    }
}
