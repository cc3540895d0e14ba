//! Cycle-accurate, reconfigurable N-port round-robin arbiter.
//!
//! The crate is organised around a synchronous arbiter state machine
//! ([`arbiter`]) that supports two policies:
//!
//! - [`Policy::TokenRotate`]: a strict token ring. A port is acknowledged only
//!   when it holds the token and requests (`ack = token & request`); otherwise
//!   the cycle is a turn miss and the token moves on.
//! - [`Policy::SkipScan`]: the token marks where a cyclic search for the next
//!   active requester starts, so non-requesting ports never waste a cycle.
//!
//! Around it sit independent reference models ([`oracle`]), request trace
//! generation and CSV I/O ([`workload`]), fairness and starvation statistics
//! ([`metrics`]), a unit-delay gate model of the grant logic ([`netlist`]),
//! exhaustive equivalence checks ([`verify`]), and the command line front end
//! ([`cli`]).
//!
//! Ports are numbered `0..N`.

pub mod arbiter;
pub mod cli;
pub mod error;
pub mod metrics;
pub mod netlist;
pub mod oracle;
pub mod ports;
pub mod verify;
pub mod workload;

pub use arbiter::{
    classify_turn, compute_ack, Arbiter, ArbiterConfig, ArbiterState, Event, Fsm, Policy,
    StepOutput, Termination, TimeSlice, Turn,
};
pub use error::{Error, Result};
pub use metrics::{analyze, starvation_check, SimReport, Violation};
pub use netlist::{GateGraph, GateKind};
pub use ports::{GrantVector, RequestVector};
pub use workload::{generate, read_trace, write_trace, TraceRecord, WorkloadKind, WorkloadSpec};
