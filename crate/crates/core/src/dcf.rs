//! Slotted 802.11 DCF baseline: binary exponential backoff with freezing,
//! no inter-frame spacing and no RTS/CTS. Success or failure of a
//! transmission is reported to the sender as if by an immediate ACK.

use serde::{Deserialize, Serialize};

use crate::engine::{Feedback, MacProtocol, Observation};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DcfParams {
    pub cw_min: u32,
    pub cw_max: u32,
}

/// 802.11a contention window bounds.
impl Default for DcfParams {
    fn default() -> Self {
        DcfParams {
            cw_min: 15,
            cw_max: 1023,
        }
    }
}

impl DcfParams {
    pub fn validate(&self) -> Result<()> {
        if self.cw_min == 0 {
            return Err(Error::config("cw_min must be >= 1"));
        }
        if self.cw_max < self.cw_min {
            return Err(Error::config(format!(
                "cw_max ({}) must be >= cw_min ({})",
                self.cw_max, self.cw_min
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DcfDecision {
    Transmit,
    Listen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DcfEvent {
    IdleObserved,
    BusyObserved,
    MySuccess,
    MyFailure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DcfNodeState {
    pub cw: u32,
    pub backoff: u32,
}

impl DcfNodeState {
    /// Contention window at `cw_min` with a uniform backoff in `[0, cw_min]`.
    pub fn fresh(params: &DcfParams, rng: &mut StreamRng) -> Self {
        DcfNodeState {
            cw: params.cw_min,
            backoff: rng.upto(params.cw_min),
        }
    }

    #[inline]
    pub fn decide(&self) -> DcfDecision {
        if self.backoff == 0 {
            DcfDecision::Transmit
        } else {
            DcfDecision::Listen
        }
    }

    #[inline]
    pub fn update(self, params: &DcfParams, event: DcfEvent, rng: &mut StreamRng) -> Self {
        match event {
            DcfEvent::IdleObserved => DcfNodeState {
                backoff: self.backoff.saturating_sub(1),
                ..self
            },
            DcfEvent::BusyObserved => self,
            DcfEvent::MySuccess => {
                let cw = params.cw_min;
                DcfNodeState {
                    cw,
                    backoff: rng.upto(cw),
                }
            }
            DcfEvent::MyFailure => {
                let cw = self
                    .cw
                    .saturating_mul(2)
                    .saturating_add(1)
                    .min(params.cw_max);
                DcfNodeState {
                    cw,
                    backoff: rng.upto(cw),
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct DcfNetwork {
    params: DcfParams,
    nodes: Vec<DcfNodeState>,
}

impl DcfNetwork {
    /// One node per stream; each draws its initial backoff from its own stream.
    pub fn new(params: DcfParams, rngs: &mut [StreamRng]) -> Self {
        DcfNetwork {
            nodes: rngs
                .iter_mut()
                .map(|r| DcfNodeState::fresh(&params, r))
                .collect(),
            params,
        }
    }

    pub fn nodes(&self) -> &[DcfNodeState] {
        &self.nodes
    }
}

impl MacProtocol for DcfNetwork {
    type Beacon = ();

    fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    fn transmits(&self, node: usize, _rng: &mut StreamRng) -> bool {
        self.nodes[node].decide() == DcfDecision::Transmit
    }

    fn beacon(&self, _node: usize) {}

    #[inline]
    fn feedback(&mut self, node: usize, _slot: u64, feedback: Feedback<()>, rng: &mut StreamRng) {
        let event = match feedback {
            Feedback::Transmitted { delivered: true } => DcfEvent::MySuccess,
            Feedback::Transmitted { delivered: false } => DcfEvent::MyFailure,
            Feedback::Listened(Observation::Idle) => DcfEvent::IdleObserved,
            Feedback::Listened(Observation::Received(()))
            | Feedback::Listened(Observation::Busy) => DcfEvent::BusyObserved,
        };
        self.nodes[node] = self.nodes[node].update(&self.params, event, rng);
    }

    fn cumulative_p(&self) -> Option<f64> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_stream;

    fn params() -> DcfParams {
        DcfParams::default()
    }

    #[test]
    fn decide_on_backoff() {
        assert_eq!(
            DcfNodeState { cw: 15, backoff: 0 }.decide(),
            DcfDecision::Transmit
        );
        assert_eq!(
            DcfNodeState { cw: 15, backoff: 3 }.decide(),
            DcfDecision::Listen
        );
    }

    #[test]
    fn idle_decrements_busy_freezes() {
        let mut rng = rng_stream(0, 1);
        let s = DcfNodeState { cw: 15, backoff: 4 };
        assert_eq!(
            s.update(&params(), DcfEvent::IdleObserved, &mut rng)
                .backoff,
            3
        );
        assert_eq!(s.update(&params(), DcfEvent::BusyObserved, &mut rng), s);
        let zero = DcfNodeState { cw: 15, backoff: 0 };
        assert_eq!(
            zero.update(&params(), DcfEvent::IdleObserved, &mut rng)
                .backoff,
            0
        );
    }

    #[test]
    fn failure_doubles_window_up_to_cap() {
        let mut rng = rng_stream(0, 1);
        let s =
            DcfNodeState { cw: 15, backoff: 0 }.update(&params(), DcfEvent::MyFailure, &mut rng);
        assert_eq!(s.cw, 31);
        assert!(s.backoff <= 31);
        let s = DcfNodeState {
            cw: 1023,
            backoff: 0,
        }
        .update(&params(), DcfEvent::MyFailure, &mut rng);
        assert_eq!(s.cw, 1023);
        let s = DcfNodeState {
            cw: 511,
            backoff: 0,
        }
        .update(&params(), DcfEvent::MySuccess, &mut rng);
        assert_eq!(s.cw, 15);
        assert!(s.backoff <= 15);
    }

    #[test]
    fn window_trajectory_stays_on_the_doubling_ladder() {
        let p = DcfParams {
            cw_min: 3,
            cw_max: 100,
        };
        let ladder = [3, 7, 15, 31, 63, 100];
        let mut rng = rng_stream(4, 2);
        let mut s = DcfNodeState::fresh(&p, &mut rng);
        for i in 0..10_000u32 {
            let ev = if (i * 7919) % 5 == 0 {
                DcfEvent::MySuccess
            } else {
                DcfEvent::MyFailure
            };
            s = s.update(&p, ev, &mut rng);
            assert!(ladder.contains(&s.cw), "cw {}", s.cw);
            assert!(s.backoff <= s.cw);
        }
    }

    #[test]
    fn fresh_backoff_is_uniform() {
        // Chi-square goodness of fit over 16 cells, 15 degrees of freedom.
        let p = params();
        let mut rng = rng_stream(21, 3);
        let draws = 100_000;
        let mut cells = [0u64; 16];
        for _ in 0..draws {
            cells[DcfNodeState::fresh(&p, &mut rng).backoff as usize] += 1;
        }
        let expected = draws as f64 / 16.0;
        let chi2: f64 = cells
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 99.9th percentile of chi-square with 15 dof is 37.70.
        assert!(chi2 < 37.70, "chi2 {chi2}");
    }

    #[test]
    fn params_validation() {
        assert!(params().validate().is_ok());
        assert!(DcfParams {
            cw_min: 0,
            cw_max: 5
        }
        .validate()
        .is_err());
        assert!(DcfParams {
            cw_min: 31,
            cw_max: 15
        }
        .validate()
        .is_err());
    }
}
