use thiserror::Error;

use crate::assignment::RequestId;
use crate::geometry::{CellId, Point};
use crate::spectrum::{ChannelId, StateKind};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported geometry: tier_count {0} (only 1 or 2 tiers are modelled)")]
    UnsupportedGeometry(u32),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown cell {0}")]
    UnknownCell(CellId),

    #[error("unknown channel {0}")]
    UnknownChannel(ChannelId),

    #[error("illegal transition on channel {channel}: {from} -> {to}")]
    IllegalTransition {
        channel: ChannelId,
        from: StateKind,
        to: StateKind,
    },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("{what} out of domain: {value}")]
    OutOfDomain { what: &'static str, value: f64 },

    #[error("SINR undefined: zero interference and zero noise")]
    UndefinedSinr,

    #[error("request {id} at {position} is outside the reference cell")]
    OutOfScopeRequest { id: RequestId, position: Point },

    #[error("unknown request {0}")]
    UnknownRequest(RequestId),

    #[error("request {0} is already being served")]
    DuplicateRequest(RequestId),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
