//! The AntiJam per-node state machine.
//!
//! Each node keeps an access probability `p`, a counter `c` and a window
//! threshold `T`. Listening nodes raise `p` on idle slots and copy the
//! sender's state (scaled down by `1 + gamma`) on a received beacon. Every
//! node then advances its counter; when the counter passes the threshold and
//! no idle slot was seen within the last `T` slots, the node backs off and
//! widens its threshold.

use serde::{Deserialize, Serialize};

use crate::engine::{Feedback, MacProtocol, Observation};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Largest cap for which the protocol's guarantees are analyzed.
pub const ANALYZED_P_HAT_MAX: f64 = 1.0 / 24.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub gamma: f64,
    pub p_hat: f64,
    /// Starting access probability; defaults to `p_hat`.
    pub initial_p: Option<f64>,
    /// Starting window threshold; defaults to 1.
    #[serde(rename = "initial_T")]
    pub initial_threshold: Option<u32>,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            gamma: 0.1,
            p_hat: ANALYZED_P_HAT_MAX,
            initial_p: None,
            initial_threshold: None,
        }
    }
}

impl ProtocolParams {
    pub fn new(gamma: f64, p_hat: f64) -> Self {
        ProtocolParams {
            gamma,
            p_hat,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::config(format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        if !(self.p_hat > 0.0 && self.p_hat < 1.0) {
            return Err(Error::config(format!(
                "p_hat must lie in (0, 1), got {}",
                self.p_hat
            )));
        }
        if let Some(p) = self.initial_p {
            if !(p > 0.0 && p <= self.p_hat) {
                return Err(Error::config(format!(
                    "initial_p must lie in (0, p_hat], got {p}"
                )));
            }
        }
        if self.initial_threshold == Some(0) {
            return Err(Error::config("initial_T must be >= 1"));
        }
        Ok(())
    }

    /// `false` when `p_hat` exceeds the cap under which the protocol is analyzed.
    /// Such values still run.
    pub fn in_analyzed_regime(&self) -> bool {
        self.p_hat <= ANALYZED_P_HAT_MAX
    }

    pub fn start_p(&self) -> f64 {
        self.initial_p.unwrap_or(self.p_hat)
    }

    pub fn start_threshold(&self) -> u32 {
        self.initial_threshold.unwrap_or(1)
    }

    #[inline]
    fn step(&self) -> f64 {
        1.0 + self.gamma
    }
}

/// State piggybacked on every transmission.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Beacon {
    pub p: f64,
    pub counter: u32,
    pub threshold: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Decision {
    Transmit(Beacon),
    Listen,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeState {
    /// Access probability `p_v`.
    pub p: f64,
    /// Counter `c_v`.
    pub counter: u32,
    /// Window threshold `T_v`.
    pub threshold: u32,
    /// Most recent slot this node observed as idle.
    pub last_idle: Option<u64>,
}

impl NodeState {
    pub fn initial(params: &ProtocolParams) -> Self {
        NodeState {
            p: params.start_p(),
            counter: 1,
            threshold: params.start_threshold(),
            last_idle: None,
        }
    }

    pub fn beacon(&self) -> Beacon {
        Beacon {
            p: self.p,
            counter: self.counter,
            threshold: self.threshold,
        }
    }

    /// Sends with probability `p`. Always consumes exactly one draw.
    #[inline]
    pub fn decide_transmit(&self, rng: &mut StreamRng) -> Decision {
        if rng.bernoulli(self.p) {
            Decision::Transmit(self.beacon())
        } else {
            Decision::Listen
        }
    }

    /// Listener sensed an idle channel in `slot`.
    #[inline]
    pub fn on_idle(self, params: &ProtocolParams, slot: u64) -> Self {
        NodeState {
            p: (self.p * params.step()).min(params.p_hat),
            threshold: self.threshold.saturating_sub(1).max(1),
            last_idle: Some(slot),
            ..self
        }
    }

    /// Listener received `beacon` in `slot`.
    #[inline]
    pub fn on_receive(self, params: &ProtocolParams, beacon: Beacon) -> Self {
        NodeState {
            p: beacon.p / params.step(),
            counter: beacon.counter,
            threshold: beacon.threshold,
            last_idle: self.last_idle,
        }
    }

    /// `true` if an idle slot was observed among the `window` most recent
    /// slots ending at `slot` (inclusive).
    #[inline]
    pub fn saw_idle_within(&self, slot: u64, window: u32) -> bool {
        self.last_idle
            .is_some_and(|idle| slot - idle < u64::from(window))
    }

    /// Counter step and threshold rule, run by every node (sender included)
    /// at the end of `slot` after any observation update.
    #[inline]
    pub fn end_of_slot(self, params: &ProtocolParams, slot: u64) -> Self {
        let mut next = self;
        next.counter += 1;
        if next.counter > self.threshold {
            next.counter = 1;
            if !self.saw_idle_within(slot, self.threshold) {
                next.p = self.p / params.step();
                next.threshold = self.threshold + 2;
            }
        }
        next
    }
}

/// A population of AntiJam nodes sharing one parameter set.
#[derive(Clone, Debug)]
pub struct AntiJamNetwork {
    params: ProtocolParams,
    nodes: Vec<NodeState>,
}

impl AntiJamNetwork {
    pub fn new(n: usize, params: ProtocolParams) -> Self {
        AntiJamNetwork {
            params,
            nodes: vec![NodeState::initial(&params); n],
        }
    }

    pub fn from_states(params: ProtocolParams, nodes: Vec<NodeState>) -> Self {
        AntiJamNetwork { params, nodes }
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.nodes.iter().map(|s| s.p).collect()
    }
}

impl MacProtocol for AntiJamNetwork {
    type Beacon = Beacon;

    fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    fn transmits(&self, node: usize, rng: &mut StreamRng) -> bool {
        matches!(self.nodes[node].decide_transmit(rng), Decision::Transmit(_))
    }

    fn beacon(&self, node: usize) -> Beacon {
        self.nodes[node].beacon()
    }

    #[inline]
    fn feedback(
        &mut self,
        node: usize,
        slot: u64,
        feedback: Feedback<Beacon>,
        _rng: &mut StreamRng,
    ) {
        let params = self.params;
        let state = self.nodes[node];
        let state = match feedback {
            Feedback::Listened(Observation::Idle) => state.on_idle(&params, slot),
            Feedback::Listened(Observation::Received(b)) => state.on_receive(&params, b),
            Feedback::Listened(Observation::Busy) | Feedback::Transmitted { .. } => state,
        };
        self.nodes[node] = state.end_of_slot(&params, slot);
    }

    fn cumulative_p(&self) -> Option<f64> {
        Some(self.nodes.iter().map(|s| s.p).sum())
    }

    fn decide_all(&self, rngs: &mut [StreamRng], transmitting: &mut [bool]) -> (usize, usize) {
        let mut count = 0;
        let mut last = 0;
        for (node, ((state, rng), tx)) in self.nodes.iter().zip(rngs).zip(transmitting).enumerate()
        {
            *tx = rng.bernoulli(state.p);
            if *tx {
                count += 1;
                last = node;
            }
        }
        (count, last)
    }

    fn feedback_all(
        &mut self,
        slot: u64,
        transmitting: &[bool],
        observation: Observation<Beacon>,
        _delivered: bool,
        _rngs: &mut [StreamRng],
    ) {
        let params = self.params;
        for (state, &tx) in self.nodes.iter_mut().zip(transmitting) {
            let observed = match (tx, observation) {
                (false, Observation::Idle) => state.on_idle(&params, slot),
                (false, Observation::Received(b)) => state.on_receive(&params, b),
                _ => *state,
            };
            *state = observed.end_of_slot(&params, slot);
        }
    }
}
