//! The synchronous N-port arbiter.
//!
//! One call to [`Arbiter::step`] is one rising clock edge: the request vector
//! sampled for the cycle goes in, the grant for the same cycle comes out, and
//! the registered state (token, FSM, slice counter) is updated.
//!
//! Cycle semantics shared by both policies:
//!
//! - `reset` is synchronous and active-high. It forces `Idle`, puts the token
//!   back on port 0 and produces a zero grant.
//! - A grantee keeps the bus while it requests and its slice lasts. The slice
//!   counts the cycle the grant was issued in, so a slice of one cycle means a
//!   fresh arbitration decision every cycle.
//! - A grant terminates when the grantee drops its request
//!   ([`Termination::ReleasedByRequest`]) or when its slice has been used up
//!   ([`Termination::SliceExpired`]). Either way the token moves to the next
//!   port in circular order.
//!
//! Policy-specific behaviour is documented on [`Policy`].

use std::fmt;

use crate::error::{Error, Result};
use crate::ports::{GrantVector, RequestVector};

/// Acknowledge rule for one port: access is granted only when the port holds
/// the token and requests.
pub fn compute_ack(token: bool, request: bool) -> bool {
    token && request
}

/// Outcome of the acknowledge rule for one port.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Turn {
    /// Token and request both high: access permitted.
    Hit,
    /// Token or request low: access denied.
    Miss,
}

impl Turn {
    pub fn is_permitted(self) -> bool {
        self == Turn::Hit
    }
}

impl fmt::Display for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Turn::Hit => "Turn hit",
            Turn::Miss => "Turn miss",
        })
    }
}

pub fn classify_turn(token: bool, request: bool) -> Turn {
    if compute_ack(token, request) {
        Turn::Hit
    } else {
        Turn::Miss
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Policy {
    /// Strict token ring. Only the token holder can be acknowledged. When the
    /// holder is not requesting, the cycle is a turn miss and the token
    /// advances one port for the next cycle. The token also advances on
    /// cycles with no request at all. After a release by request the grant
    /// goes low for that cycle and the next port is considered on the next
    /// cycle; after slice expiry the next port is considered in the same
    /// cycle, since the expired slot ended on the previous edge.
    TokenRotate,
    /// Cyclic search for the first requesting port starting at the token.
    /// Non-requesting ports are skipped, a terminated grant is replaced in the
    /// same cycle, and the token stays put while nobody requests.
    #[default]
    SkipScan,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::TokenRotate => "tokenrotate",
            Policy::SkipScan => "skipscan",
        })
    }
}

/// Maximum number of consecutive cycles a grantee may hold the bus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeSlice {
    Cycles(u32),
    /// Hold until the grantee drops its request.
    Unlimited,
}

impl Default for TimeSlice {
    fn default() -> Self {
        TimeSlice::Cycles(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArbiterConfig {
    pub num_ports: usize,
    pub time_slice: TimeSlice,
    pub policy: Policy,
    /// Keep the scan origin on port 0 instead of rotating it. This turns
    /// `SkipScan` into a plain lowest-index-first priority arbiter and exists
    /// to compare against the fixed-priority reference FSM. Not valid with
    /// `TokenRotate`.
    pub pin_token: bool,
}

impl ArbiterConfig {
    pub fn new(num_ports: usize, time_slice: TimeSlice, policy: Policy) -> Self {
        Self {
            num_ports,
            time_slice,
            policy,
            pin_token: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_ports == 0 {
            return Err(Error::Config("num_ports must be at least 1".into()));
        }
        if self.time_slice == TimeSlice::Cycles(0) {
            return Err(Error::Config("time slice must be at least 1 cycle".into()));
        }
        if self.pin_token && self.policy == Policy::TokenRotate {
            return Err(Error::Config(
                "a pinned token is only meaningful with the skipscan policy".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fsm {
    Idle,
    Granted(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArbiterState {
    /// The port whose turn it is. While a port is granted this is the grantee.
    pub token_index: usize,
    pub fsm: Fsm,
    /// Further cycles the current grantee may hold the bus after the cycle
    /// just completed. `None` while idle or when the slice is unlimited.
    pub slice_remaining: Option<u32>,
    /// Number of clock edges seen, reset included.
    pub cycle_count: u64,
}

impl ArbiterState {
    fn initial() -> Self {
        Self {
            token_index: 0,
            fsm: Fsm::Idle,
            slice_remaining: None,
            cycle_count: 0,
        }
    }
}

/// What the arbitration logic decided this cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Event {
    /// No decision: reset, or an idle cycle nobody requested in.
    None,
    /// A new grant was issued to the port.
    TurnHit(usize),
    /// The token holder was not requesting, so nobody was acknowledged.
    TurnMiss(usize),
    /// The current grantee kept the bus.
    Held(usize),
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::None => f.write_str("none"),
            Event::TurnHit(p) => write!(f, "hit:{p}"),
            Event::TurnMiss(p) => write!(f, "miss:{p}"),
            Event::Held(p) => write!(f, "held:{p}"),
        }
    }
}

/// Why a grant ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    SliceExpired(usize),
    ReleasedByRequest(usize),
}

impl Termination {
    pub fn port(self) -> usize {
        match self {
            Termination::SliceExpired(p) | Termination::ReleasedByRequest(p) => p,
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::SliceExpired(p) => write!(f, "expired:{p}"),
            Termination::ReleasedByRequest(p) => write!(f, "released:{p}"),
        }
    }
}

/// Result of one clock edge.
///
/// A grant can end and a new one begin on the same edge, so the termination
/// of the previous grant is reported separately from the arbitration event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StepOutput {
    pub grant: GrantVector,
    pub event: Event,
    pub termination: Option<Termination>,
}

impl StepOutput {
    fn quiet(width: usize) -> Self {
        Self {
            grant: GrantVector::none(width),
            event: Event::None,
            termination: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arbiter {
    config: ArbiterConfig,
    state: ArbiterState,
}

impl Arbiter {
    /// Create an arbiter in the reset state: token on port 0, idle.
    pub fn new(config: ArbiterConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            state: ArbiterState::initial(),
        })
    }

    /// Create an arbiter from an explicit state, e.g. to start from a given
    /// token position.
    pub fn with_state(config: ArbiterConfig, state: ArbiterState) -> Result<Self> {
        config.validate()?;
        let n = config.num_ports;
        if state.token_index >= n {
            return Err(Error::Config(format!(
                "token index {} out of range for {n} ports",
                state.token_index
            )));
        }
        match state.fsm {
            Fsm::Idle if state.slice_remaining.unwrap_or(0) != 0 => {
                return Err(Error::Config("idle state cannot carry a slice".into()));
            }
            Fsm::Granted(p) if p >= n => {
                return Err(Error::Config(format!(
                    "granted port {p} out of range for {n} ports"
                )));
            }
            Fsm::Granted(_) => match (config.time_slice, state.slice_remaining) {
                (TimeSlice::Cycles(s), Some(left)) if left < s => {}
                (TimeSlice::Unlimited, None) => {}
                _ => {
                    return Err(Error::Config(
                        "slice_remaining inconsistent with the configured time slice".into(),
                    ))
                }
            },
            Fsm::Idle => {}
        }
        if config.pin_token && state.token_index != 0 {
            return Err(Error::Config("pinned token must sit on port 0".into()));
        }
        Ok(Self { config, state })
    }

    pub fn config(&self) -> &ArbiterConfig {
        &self.config
    }

    pub fn state(&self) -> &ArbiterState {
        &self.state
    }

    pub fn num_ports(&self) -> usize {
        self.config.num_ports
    }

    /// Advance one clock edge.
    pub fn step(&mut self, requests: &RequestVector, reset: bool) -> Result<StepOutput> {
        let n = self.config.num_ports;
        if requests.len() != n {
            return Err(Error::dimension(n, requests.len()));
        }
        self.state.cycle_count += 1;

        if reset {
            self.state.token_index = 0;
            self.state.fsm = Fsm::Idle;
            self.state.slice_remaining = None;
            return Ok(StepOutput::quiet(n));
        }

        let mut termination = None;
        if let Fsm::Granted(p) = self.state.fsm {
            if !requests.get(p) {
                termination = Some(Termination::ReleasedByRequest(p));
            } else {
                match self.state.slice_remaining {
                    None => return Ok(self.hold(p)),
                    Some(0) => termination = Some(Termination::SliceExpired(p)),
                    Some(left) => {
                        self.state.slice_remaining = Some(left - 1);
                        return Ok(self.hold(p));
                    }
                }
            }

            self.state.fsm = Fsm::Idle;
            self.state.slice_remaining = None;
            self.advance_token_past(p);

            if self.config.policy == Policy::TokenRotate
                && matches!(termination, Some(Termination::ReleasedByRequest(_)))
            {
                // The holder's own slot ends with ack = 0; the next port is
                // looked at on the next edge.
                let event = if requests.any() {
                    Event::TurnMiss(p)
                } else {
                    Event::None
                };
                return Ok(StepOutput {
                    grant: GrantVector::none(n),
                    event,
                    termination,
                });
            }
        }

        let event = match self.config.policy {
            Policy::SkipScan => match requests.first_set_cyclic(self.state.token_index) {
                Some(q) => self.issue(q),
                None => Event::None,
            },
            Policy::TokenRotate => {
                let t = self.state.token_index;
                if requests.get(t) {
                    self.issue(t)
                } else {
                    self.advance_token_past(t);
                    if requests.any() {
                        Event::TurnMiss(t)
                    } else {
                        Event::None
                    }
                }
            }
        };

        let grant = match self.state.fsm {
            Fsm::Granted(q) => GrantVector::one(n, q),
            Fsm::Idle => GrantVector::none(n),
        };
        Ok(StepOutput {
            grant,
            event,
            termination,
        })
    }

    /// Drive the arbiter over a sequence of `(reset, requests)` cycles.
    ///
    /// Dimension errors carry the zero-based index of the offending cycle.
    pub fn run<I, R>(&mut self, trace: I) -> Result<Vec<StepOutput>>
    where
        I: IntoIterator<Item = (bool, R)>,
        R: std::borrow::Borrow<RequestVector>,
    {
        trace
            .into_iter()
            .enumerate()
            .map(|(i, (reset, req))| self.step(req.borrow(), reset).map_err(|e| e.at(i as u64)))
            .collect()
    }

    fn hold(&self, p: usize) -> StepOutput {
        StepOutput {
            grant: GrantVector::one(self.config.num_ports, p),
            event: Event::Held(p),
            termination: None,
        }
    }

    fn issue(&mut self, port: usize) -> Event {
        self.state.fsm = Fsm::Granted(port);
        if !self.config.pin_token {
            self.state.token_index = port;
        }
        self.state.slice_remaining = match self.config.time_slice {
            TimeSlice::Cycles(s) => Some(s - 1),
            TimeSlice::Unlimited => None,
        };
        Event::TurnHit(port)
    }

    fn advance_token_past(&mut self, port: usize) {
        if !self.config.pin_token {
            self.state.token_index = (port + 1) % self.config.num_ports;
        }
    }
}
