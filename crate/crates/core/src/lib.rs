//! Class-based interference management for a seven-cell cluster.
//!
//! The crate is split along the same lines as the simulator itself:
//!
//! * [`geometry`]: hexagonal cluster layout, zones and co-channel interferer sets.
//! * [`spectrum`]: per-cell channel pools and the channel lifecycle state machine.
//! * [`assignment`]: dynamic borrowing, real-time priority swapping, bifurcation
//!   and blocking of donor-band partner cells.
//! * [`propagation`]: Okumura-Hata path loss, SINR, Shannon capacity and outage.
//! * [`scenarios`]: the three evaluation scenarios and distance sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod error;
pub mod geometry;
pub mod propagation;
pub mod scenarios;
pub mod spectrum;

pub use assignment::{
    AssignmentDecision, BorrowPolicy, Borrowed, Displacement, Engine, Outcome, ReleaseOutcome, RequestId, SideEffect,
    TrafficRequest,
};
pub use error::{Error, Result};
pub use geometry::{Band, BandLabel, CellId, CellSite, ClusterLayout, Interferer, Point, ServiceBand, Site, Zone};
pub use propagation::{InterferenceEntry, InterferenceSet, RadioEnvironment};
pub use scenarios::{MetricsRecord, ScenarioKind, ScenarioModel};
pub use spectrum::{Channel, ChannelId, ChannelState, SpectrumPlan, SubBand, SubBandTag, TrafficClass};
