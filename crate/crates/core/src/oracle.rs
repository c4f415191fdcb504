//! Analytical cross-checks.
//!
//! Closed forms for the idle probability `q0` and the single-sender
//! probability `q1` of a probability vector, an exhaustive subset enumeration
//! that computes the same quantities by brute force, the `q0 * p <= q1 <=
//! q0 * p / (1 - p_hat)` relation, and a per-slot checker for the state
//! synchronization facts of the AntiJam protocol.

use std::fmt;

use crate::antijam::{NodeState, ProtocolParams};
use crate::engine::{Outcome, SlotRecord};
use crate::error::{Error, Result};

/// Largest vector size accepted by [`enumerate_q0_q1`].
pub const ENUMERATION_MAX_N: usize = 20;

/// Per-node access probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some(bad) = probs.iter().find(|p| !(0.0..1.0).contains(*p)) {
            return Err(Error::config(format!("probability {bad} outside [0, 1)")));
        }
        Ok(ProbVector(probs))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Cumulative probability `p`.
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Probability that nobody transmits.
pub fn q0(pv: &ProbVector) -> f64 {
    pv.0.iter().map(|p| 1.0 - p).product()
}

/// Probability that exactly one node transmits, via prefix and suffix
/// products of `1 - p`.
pub fn q1(pv: &ProbVector) -> f64 {
    let probs = &pv.0;
    let mut suffix = vec![1.0; probs.len() + 1];
    for i in (0..probs.len()).rev() {
        suffix[i] = suffix[i + 1] * (1.0 - probs[i]);
    }
    let mut prefix = 1.0;
    let mut total = 0.0;
    for (i, p) in probs.iter().enumerate() {
        total += p * prefix * suffix[i + 1];
        prefix *= 1.0 - p;
    }
    total
}

/// `ln q0`, accumulated without forming the product.
pub fn ln_q0(pv: &ProbVector) -> f64 {
    pv.0.iter().map(|p| (-p).ln_1p()).sum()
}

/// `ln q1 = ln q0 + ln sum p / (1 - p)`.
pub fn ln_q1(pv: &ProbVector) -> f64 {
    let odds: f64 = pv.0.iter().map(|p| p / (1.0 - p)).sum();
    ln_q0(pv) + odds.ln()
}

/// `q0` through the log domain.
pub fn q0_log(pv: &ProbVector) -> f64 {
    ln_q0(pv).exp()
}

/// `q1` through the log domain.
pub fn q1_log(pv: &ProbVector) -> f64 {
    ln_q1(pv).exp()
}

/// Brute-force `(q0, q1)` over all `2^n` transmitter subsets.
pub fn enumerate_q0_q1(pv: &ProbVector) -> (f64, f64) {
    let n = pv.len();
    assert!(
        n <= ENUMERATION_MAX_N,
        "enumeration capped at n = {ENUMERATION_MAX_N}"
    );
    let (mut idle, mut single) = (0.0, 0.0);
    for mask in 0u32..(1u32 << n) {
        let senders = mask.count_ones();
        if senders > 1 {
            continue;
        }
        let prob: f64 =
            pv.0.iter()
                .enumerate()
                .map(|(i, &p)| if mask >> i & 1 == 1 { p } else { 1.0 - p })
                .product();
        if senders == 0 {
            idle += prob;
        } else {
            single += prob;
        }
    }
    (idle, single)
}

/// Relative tolerance for [`check_sandwich`].
pub const SANDWICH_REL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SandwichSides {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
}

impl SandwichSides {
    pub fn holds(&self, rel_tol: f64) -> bool {
        le_rel(self.lower, self.middle, rel_tol) && le_rel(self.middle, self.upper, rel_tol)
    }
}

fn le_rel(a: f64, b: f64, rel_tol: f64) -> bool {
    a <= b + rel_tol * a.abs().max(b.abs())
}

/// The three quantities `q0 * p`, `q1`, `q0 * p / (1 - p_hat)`.
pub fn sandwich_sides(pv: &ProbVector, p_hat: f64) -> Result<SandwichSides> {
    if !(p_hat > 0.0 && p_hat < 1.0) {
        return Err(Error::config(format!(
            "p_hat must lie in (0, 1), got {p_hat}"
        )));
    }
    if let Some(p) = pv.0.iter().find(|&&p| p > p_hat) {
        return Err(Error::config(format!("entry {p} exceeds p_hat {p_hat}")));
    }
    let idle = q0(pv);
    let p = pv.sum();
    Ok(SandwichSides {
        lower: idle * p,
        middle: q1(pv),
        upper: idle * p / (1.0 - p_hat),
    })
}

/// Whether `q0 * p <= q1 <= q0 * p / (1 - p_hat)` within [`SANDWICH_REL_TOL`].
pub fn check_sandwich(pv: &ProbVector, p_hat: f64) -> Result<bool> {
    Ok(sandwich_sides(pv, p_hat)?.holds(SANDWICH_REL_TOL))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmpiricalRates {
    pub idle_rate: f64,
    pub success_rate: f64,
    pub slots: u64,
}

/// Observed idle and success frequencies over a segment of slots.
pub fn empirical_rates(records: &[SlotRecord]) -> EmpiricalRates {
    let slots = records.len() as u64;
    let idle = records
        .iter()
        .filter(|r| r.outcome == Outcome::Idle)
        .count();
    let success = records
        .iter()
        .filter(|r| r.outcome == Outcome::Success)
        .count();
    let denom = slots.max(1) as f64;
    EmpiricalRates {
        idle_rate: idle as f64 / denom,
        success_rate: success as f64 / denom,
        slots,
    }
}

/// Standard deviation of a binomial frequency with success probability `p`.
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FactKind {
    /// `p <= p_hat`, `c >= 1`, `T >= 1`.
    Bounds,
    /// Counter and threshold follow the counter rule.
    CounterRule,
    /// Receivers hold the sender's state scaled by `1 / (1 + gamma)`.
    Synchronization,
    /// Idle slot with every node at the cap: cumulative p unchanged.
    IdleAtCap,
    /// Clamp-free idle slot: cumulative p grows by exactly `1 + gamma`.
    IdleGrowth,
    /// Repeat sender: cumulative p unchanged.
    RepeatSender,
    /// New sender: cumulative p shrinks by `1 + gamma`.
    NewSender,
    /// Busy slot: cumulative p unchanged, or shrinks by `1 + gamma` when the
    /// threshold rule fires.
    Busy,
    /// `max p / min p` is 1 or `1 + gamma`.
    Ratio,
}

impl FactKind {
    pub const ALL: [FactKind; 9] = [
        FactKind::Bounds,
        FactKind::CounterRule,
        FactKind::Synchronization,
        FactKind::IdleAtCap,
        FactKind::IdleGrowth,
        FactKind::RepeatSender,
        FactKind::NewSender,
        FactKind::Busy,
        FactKind::Ratio,
    ];
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactViolation {
    pub slot: u64,
    pub kind: FactKind,
    pub detail: String,
}

impl fmt::Display for FactViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "slot {}: {:?}: {}", self.slot, self.kind, self.detail)
    }
}

/// Relative tolerance for exact-factor assertions.
pub const FACT_REL_TOL: f64 = 1e-12;
/// Relative tolerance for the max/min ratio, which compounds rounding from
/// every multiplicative step since the last success.
pub const RATIO_REL_TOL: f64 = 1e-9;

fn close(a: f64, b: f64, rel_tol: f64) -> bool {
    (a - b).abs() <= rel_tol * a.abs().max(b.abs())
}

/// Checks consecutive AntiJam states against the protocol's synchronization
/// facts. Feed it every slot of a run in order.
///
/// Whether the threshold rule fires is recomputed from the channel outcomes
/// in the trace, independently of each node's own idle bookkeeping.
#[derive(Debug)]
pub struct FactChecker {
    params: ProtocolParams,
    last_sender: Option<u32>,
    checks: [u64; FactKind::ALL.len()],
    violations: Vec<FactViolation>,
    /// Slot index of the most recent idle outcome seen in the trace.
    last_idle: Option<u64>,
}

impl FactChecker {
    pub fn new(params: ProtocolParams) -> Self {
        FactChecker {
            params,
            last_sender: None,
            checks: [0; FactKind::ALL.len()],
            violations: Vec::new(),
            last_idle: None,
        }
    }

    pub fn violations(&self) -> &[FactViolation] {
        &self.violations
    }

    /// Number of slots on which `kind` was applicable and checked.
    pub fn checks(&self, kind: FactKind) -> u64 {
        self.checks[kind as usize]
    }

    fn tally(&mut self, slot: u64, kind: FactKind, ok: bool, detail: impl FnOnce() -> String) {
        self.checks[kind as usize] += 1;
        if !ok {
            self.violations.push(FactViolation {
                slot,
                kind,
                detail: detail(),
            });
        }
    }

    /// Whether a node ending `slot` with counter `c` and threshold `t` (after
    /// its observation update) triggers the backoff branch.
    fn fires(&self, slot: u64, c: u32, t: u32) -> bool {
        let idle_in_window = self.last_idle.is_some_and(|i| slot - i < u64::from(t));
        c + 1 > t && !idle_in_window
    }

    /// Checks one slot given node states before and after it.
    pub fn check_slot(&mut self, pre: &[NodeState], record: &SlotRecord, post: &[NodeState]) {
        let t = record.t;
        let step = 1.0 + self.params.gamma;
        let p_hat = self.params.p_hat;
        if record.outcome == Outcome::Idle {
            self.last_idle = Some(t);
        }

        let bounds_ok = post
            .iter()
            .all(|s| s.p > 0.0 && s.p <= p_hat && s.counter >= 1 && s.threshold >= 1);
        self.tally(t, FactKind::Bounds, bounds_ok, || {
            "state out of bounds".into()
        });

        // Counter rule, per node, from the post-observation (c, T).
        let mut any_fire = false;
        let mut counter_ok = true;
        for (v, (a, b)) in pre.iter().zip(post).enumerate() {
            let (c, thr) = match record.outcome {
                Outcome::Idle => (a.counter, a.threshold.saturating_sub(1).max(1)),
                Outcome::Success if record.sender != Some(v as u32) => {
                    let s = pre[record.sender.unwrap() as usize];
                    (s.counter, s.threshold)
                }
                _ => (a.counter, a.threshold),
            };
            let fire = self.fires(t, c, thr);
            any_fire |= fire;
            let expected_c = if c + 1 > thr { 1 } else { c + 1 };
            let expected_t = if fire { thr + 2 } else { thr };
            if b.counter != expected_c || b.threshold != expected_t {
                counter_ok = false;
            }
        }
        self.tally(t, FactKind::CounterRule, counter_ok, || {
            "counter/threshold mismatch".into()
        });

        let pre_sum: f64 = pre.iter().map(|s| s.p).sum();
        let post_sum: f64 = post.iter().map(|s| s.p).sum();

        match record.outcome {
            Outcome::Success => {
                let u = record.sender.expect("success has a sender") as usize;
                let b = pre[u].beacon();
                let fire = self.fires(t, b.counter, b.threshold);
                let sender_p = if fire { b.p / step } else { b.p };
                let expected_c = if b.counter + 1 > b.threshold {
                    1
                } else {
                    b.counter + 1
                };
                let expected_t = if fire { b.threshold + 2 } else { b.threshold };
                let sync_ok = post.iter().enumerate().all(|(v, s)| {
                    let want_p = if v == u { sender_p } else { sender_p / step };
                    close(s.p, want_p, FACT_REL_TOL)
                        && s.counter == expected_c
                        && s.threshold == expected_t
                });
                self.tally(t, FactKind::Synchronization, sync_ok, || {
                    format!("after beacon {b:?} states diverge from the sender's")
                });

                if let Some(last) = self.last_sender {
                    let last = last as usize;
                    let structured = pre
                        .iter()
                        .enumerate()
                        .all(|(v, s)| v == last || close(s.p, pre[last].p / step, FACT_REL_TOL));
                    if structured && !fire {
                        if last == u {
                            self.tally(
                                t,
                                FactKind::RepeatSender,
                                close(post_sum, pre_sum, FACT_REL_TOL),
                                || format!("p {pre_sum} -> {post_sum}"),
                            );
                        } else {
                            self.tally(
                                t,
                                FactKind::NewSender,
                                close(post_sum, pre_sum / step, FACT_REL_TOL),
                                || format!("p {pre_sum} -> {post_sum}, expected / (1 + gamma)"),
                            );
                        }
                    }
                }
                self.last_sender = Some(u as u32);
            }
            Outcome::Idle => {
                if pre.iter().all(|s| s.p == p_hat) {
                    self.tally(
                        t,
                        FactKind::IdleAtCap,
                        close(post_sum, pre_sum, FACT_REL_TOL),
                        || format!("p {pre_sum} -> {post_sum}"),
                    );
                } else if pre
                    .iter()
                    .all(|s| s.p * step <= p_hat * (1.0 + FACT_REL_TOL))
                {
                    self.tally(
                        t,
                        FactKind::IdleGrowth,
                        close(post_sum, pre_sum * step, FACT_REL_TOL),
                        || format!("p {pre_sum} -> {post_sum}, expected * (1 + gamma)"),
                    );
                }
            }
            Outcome::Collision | Outcome::Jammed => {
                let want = if any_fire { pre_sum / step } else { pre_sum };
                self.tally(
                    t,
                    FactKind::Busy,
                    close(post_sum, want, FACT_REL_TOL),
                    || format!("p {pre_sum} -> {post_sum} (threshold fired: {any_fire})"),
                );
            }
        }

        if self.last_sender.is_some() || pre.iter().all(|s| s.p == pre[0].p) {
            let (lo, hi) = post.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), s| {
                (lo.min(s.p), hi.max(s.p))
            });
            let ratio = hi / lo;
            let ok = close(ratio, 1.0, RATIO_REL_TOL) || close(ratio, step, RATIO_REL_TOL);
            self.tally(t, FactKind::Ratio, ok, || format!("max/min = {ratio}"));
        }
    }
}
