//! Shared wire-level scalar types and fixed-size byte strings.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Wormhole chain identifier, `u16` big-endian on the wire.
pub type ChainId = u16;

/// Per-emitter monotonic message sequence number.
pub type Sequence = u64;

/// Origin-chain slot number. The simulator advances one slot per scheduler tick.
pub type SlotNumber = u64;

/// Aztec rollup block number.
pub type BlockNumber = u64;

/// Strips an optional `0x`/`0X` prefix and decodes hex.
pub fn decode_hex(s: &str) -> Result<Vec<u8>, hex::FromHexError> {
    let s = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    hex::decode(s)
}

pub(crate) fn decode_hex_exact<const N: usize>(s: &str) -> Result<[u8; N], String> {
    let v = decode_hex(s).map_err(|e| e.to_string())?;
    let got = v.len();
    v.try_into().map_err(|_| format!("expected {N} bytes, got {got}"))
}

macro_rules! hex_byte_newtype {
    ($(#[$meta:meta])* $name:ident, $len:expr) => {
        $(#[$meta])*
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub [u8; $len]);

        impl $name {
            pub const LEN: usize = $len;

            pub fn as_bytes(&self) -> &[u8; $len] {
                &self.0
            }

            pub fn to_hex(&self) -> String {
                format!("0x{}", hex::encode(self.0))
            }
        }

        impl Default for $name {
            fn default() -> Self {
                Self([0u8; $len])
            }
        }

        impl From<[u8; $len]> for $name {
            fn from(b: [u8; $len]) -> Self {
                Self(b)
            }
        }

        impl AsRef<[u8]> for $name {
            fn as_ref(&self) -> &[u8] {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.to_hex())
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!(stringify!($name), "({})"), self.to_hex())
            }
        }

        impl std::str::FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                crate::types::decode_hex_exact::<$len>(s).map(Self)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(&self.to_hex())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(D::Error::custom)
            }
        }
    };
}

pub(crate) use hex_byte_newtype;

hex_byte_newtype!(
    /// Opaque 32-byte string: addresses, identifiers, and big-endian `uint256` encodings.
    Bytes32,
    32
);

hex_byte_newtype!(
    /// 20-byte EVM-style address identifying the Portal contract.
    PortalAddress,
    20
);

hex_byte_newtype!(
    /// Opaque owner id of a Solana account (the owning program's id).
    AccountOwnerId,
    32
);

impl Bytes32 {
    /// Left-padded big-endian encoding of a u64 (low 8 bytes carry the value).
    pub fn from_u64_be(v: u64) -> Self {
        let mut b = [0u8; 32];
        b[24..].copy_from_slice(&v.to_be_bytes());
        Self(b)
    }

    /// Reads the value back when the high 24 bytes are zero.
    pub fn as_u64_be(&self) -> Option<u64> {
        if self.0[..24].iter().any(|&b| b != 0) {
            return None;
        }
        Some(u64::from_be_bytes(self.0[24..].try_into().unwrap()))
    }
}

/// Origin finality level requested when posting a message.
///
/// Guardians wait `confirmed_delay` or `finalized_delay` slots before signing,
/// and the level is carried in the VAA body's `consistency_level` byte using
/// the Solana Wormhole convention (Confirmed = 0, Finalized = 1).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Finality {
    Confirmed,
    Finalized,
}

impl Finality {
    pub fn consistency_level(self) -> u8 {
        match self {
            Finality::Confirmed => 0,
            Finality::Finalized => 1,
        }
    }

    pub fn from_consistency_level(level: u8) -> Option<Self> {
        match level {
            0 => Some(Finality::Confirmed),
            1 => Some(Finality::Finalized),
            _ => None,
        }
    }
}

impl fmt::Display for Finality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finality::Confirmed => write!(f, "confirmed"),
            Finality::Finalized => write!(f, "finalized"),
        }
    }
}

/// Serde adapter for variable-length byte fields rendered as `0x`-prefixed hex.
pub mod hexvec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[u8], serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format!("0x{}", hex::encode(v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(deserializer)?;
        decode_hex(&s).map_err(D::Error::custom)
    }
}
