//! Reactive jammers under a `(T, 1 - epsilon)` budget.
//!
//! A jammer senses whether the current slot carries any transmission and may
//! then jam it. Whatever the strategy wants, [`AdversaryBudget`] admits a jam
//! only if every length-`T` window keeps at most `floor((1 - epsilon) * T)`
//! jammed slots.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::engine::SlotRecord;
use crate::error::{Error, Result};
use crate::rng::{StreamRng, ADVERSARY_STREAM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Jams busy slots with probability `1 - epsilon`.
    #[serde(rename = "busy-prob")]
    BusyProb,
    /// Jams every busy slot while budget remains.
    #[serde(rename = "busy-det")]
    BusyDet,
    /// Jams every idle slot while budget remains.
    #[serde(rename = "idle-det")]
    IdleDet,
    #[serde(rename = "none")]
    NoJam,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::BusyProb,
        Strategy::BusyDet,
        Strategy::IdleDet,
        Strategy::NoJam,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::BusyProb => "busy-prob",
            Strategy::BusyDet => "busy-det",
            Strategy::IdleDet => "idle-det",
            Strategy::NoJam => "none",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown strategy `{s}` (expected busy-prob, busy-det, idle-det or none)"
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryConfig {
    #[serde(rename = "T")]
    pub window: u32,
    pub epsilon: f64,
    pub strategy: Strategy,
}

impl Default for AdversaryConfig {
    fn default() -> Self {
        AdversaryConfig {
            window: 100,
            epsilon: 0.5,
            strategy: Strategy::BusyDet,
        }
    }
}

impl AdversaryConfig {
    pub fn no_jam() -> Self {
        AdversaryConfig {
            strategy: Strategy::NoJam,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::config("window T must be >= 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::config(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Jams allowed per length-`T` window.
    pub fn capacity(&self) -> u32 {
        jam_capacity(self.window, self.epsilon)
    }
}

/// `floor((1 - epsilon) * window)`, tolerant of products like `0.9 * 10`
/// landing a hair below an integer.
pub fn jam_capacity(window: u32, epsilon: f64) -> u32 {
    let raw = (1.0 - epsilon) * f64::from(window);
    ((raw + 1e-9).floor().max(0.0) as u32).min(window)
}

/// What a reactive jammer senses before deciding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PreSlotView {
    pub active: bool,
}

/// Jam flags of the last `T` slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversaryBudget {
    flags: Vec<bool>,
    /// Index of the oldest flag.
    head: usize,
    jam_count: u32,
    capacity: u32,
}

impl AdversaryBudget {
    /// Empty window: the adversary starts with its full budget.
    pub fn new(window: u32, capacity: u32) -> Self {
        AdversaryBudget {
            flags: vec![false; window as usize],
            head: 0,
            jam_count: 0,
            capacity,
        }
    }

    pub fn for_config(config: &AdversaryConfig) -> Self {
        Self::new(config.window, config.capacity())
    }

    pub fn window(&self) -> usize {
        self.flags.len()
    }

    pub fn jam_count(&self) -> u32 {
        self.jam_count
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    /// Flags from oldest to newest.
    pub fn flags(&self) -> impl Iterator<Item = bool> + '_ {
        self.flags[self.head..]
            .iter()
            .chain(&self.flags[..self.head])
            .copied()
    }

    /// Whether jamming the next slot keeps the window that ends with it
    /// (the `T - 1` most recent slots plus the next one) within capacity.
    #[inline]
    pub fn allows_jam(&self) -> bool {
        let retained = self.jam_count - u32::from(self.flags[self.head]);
        retained < self.capacity
    }

    /// Evicts the oldest flag and appends `jammed`.
    #[inline]
    pub fn record_and_slide(&mut self, jammed: bool) {
        self.jam_count -= u32::from(self.flags[self.head]);
        self.flags[self.head] = jammed;
        self.jam_count += u32::from(jammed);
        self.head += 1;
        if self.head == self.flags.len() {
            self.head = 0;
        }
    }
}

/// Jamming policy. Implementations say what they would like to do; the budget
/// has the final word. `history` holds every earlier slot of the run, so
/// adaptive strategies can use the full protocol history.
pub trait JammingStrategy: Send {
    fn wants_jam(&mut self, view: PreSlotView, history: &[SlotRecord], rng: &mut StreamRng)
        -> bool;
}

#[derive(Clone, Copy, Debug)]
pub struct BuiltinStrategy {
    strategy: Strategy,
    epsilon: f64,
}

impl JammingStrategy for BuiltinStrategy {
    #[inline]
    fn wants_jam(
        &mut self,
        view: PreSlotView,
        _history: &[SlotRecord],
        rng: &mut StreamRng,
    ) -> bool {
        match self.strategy {
            Strategy::BusyProb => view.active && rng.bernoulli(1.0 - self.epsilon),
            Strategy::BusyDet => view.active,
            Strategy::IdleDet => !view.active,
            Strategy::NoJam => false,
        }
    }
}

/// Single-slot jamming decision of a built-in strategy against `budget`.
pub fn decide(
    strategy: Strategy,
    epsilon: f64,
    view: PreSlotView,
    budget: &AdversaryBudget,
    rng: &mut StreamRng,
) -> bool {
    budget.allows_jam() && BuiltinStrategy { strategy, epsilon }.wants_jam(view, &[], rng)
}

pub struct Adversary {
    config: AdversaryConfig,
    budget: AdversaryBudget,
    strategy: Box<dyn JammingStrategy>,
    rng: StreamRng,
}

impl fmt::Debug for Adversary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Adversary")
            .field("config", &self.config)
            .field("budget", &self.budget)
            .finish_non_exhaustive()
    }
}

impl Adversary {
    pub fn new(config: AdversaryConfig, seed: u64) -> Self {
        let builtin = BuiltinStrategy {
            strategy: config.strategy,
            epsilon: config.epsilon,
        };
        Self::with_strategy(config, Box::new(builtin), seed)
    }

    /// Adversary with a custom policy; `config.strategy` is kept only as a label.
    pub fn with_strategy(
        config: AdversaryConfig,
        strategy: Box<dyn JammingStrategy>,
        seed: u64,
    ) -> Self {
        Adversary {
            budget: AdversaryBudget::for_config(&config),
            config,
            strategy,
            rng: StreamRng::new(seed, ADVERSARY_STREAM),
        }
    }

    pub fn config(&self) -> &AdversaryConfig {
        &self.config
    }

    pub fn budget(&self) -> &AdversaryBudget {
        &self.budget
    }

    /// Decides whether to jam the current slot and records the decision.
    /// The strategy is consulted only while the budget allows a jam.
    #[inline]
    pub fn decide_and_record(&mut self, view: PreSlotView, history: &[SlotRecord]) -> bool {
        let jam = self.budget.allows_jam() && self.strategy.wants_jam(view, history, &mut self.rng);
        self.budget.record_and_slide(jam);
        jam
    }
}

/// Largest number of `true` flags in any contiguous run of `window` flags
/// (or in the whole sequence if it is shorter).
pub fn max_jams_in_window(flags: &[bool], window: usize) -> usize {
    assert!(window >= 1);
    let mut count = flags.iter().take(window).filter(|&&f| f).count();
    let mut best = count;
    for i in window..flags.len() {
        count += usize::from(flags[i]);
        count -= usize::from(flags[i - window]);
        best = best.max(count);
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetViolation {
    /// First slot of the offending window.
    pub start: usize,
    pub jams: usize,
    pub capacity: u32,
}

/// Scans every length-`T` window of a jam-flag sequence.
pub fn check_budget(
    flags: &[bool],
    config: &AdversaryConfig,
) -> std::result::Result<(), BudgetViolation> {
    let window = config.window as usize;
    let capacity = config.capacity();
    let mut count = 0usize;
    for (i, &f) in flags.iter().enumerate() {
        count += usize::from(f);
        if i >= window {
            count -= usize::from(flags[i - window]);
        }
        if count > capacity as usize {
            return Err(BudgetViolation {
                start: (i + 1).saturating_sub(window),
                jams: count,
                capacity,
            });
        }
    }
    Ok(())
}
