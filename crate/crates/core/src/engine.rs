//! Synchronized slot loop.
//!
//! Within a slot: every node draws its transmit decision, the adversary sees
//! whether the channel is active and decides to jam, the outcome is resolved,
//! listeners get their observation, and protocol end-of-slot logic runs.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::adversary::{Adversary, AdversaryConfig, PreSlotView};
use crate::antijam::{AntiJamNetwork, ProtocolParams};
use crate::dcf::{DcfNetwork, DcfParams};
use crate::error::{Error, Result};
use crate::rng::{node_stream, StreamRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Idle,
    Success,
    Collision,
    Jammed,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Idle => "Idle",
            Outcome::Success => "Success",
            Outcome::Collision => "Collision",
            Outcome::Jammed => "Jammed",
        }
    }

    /// Busy as seen by a listener: collision or jamming.
    pub fn is_busy(self) -> bool {
        matches!(self, Outcome::Collision | Outcome::Jammed)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Idle" => Ok(Outcome::Idle),
            "Success" => Ok(Outcome::Success),
            "Collision" => Ok(Outcome::Collision),
            "Jammed" => Ok(Outcome::Jammed),
            other => Err(Error::Trace(format!("unknown outcome `{other}`"))),
        }
    }
}

/// Classifies a slot. Jamming dominates regardless of transmitter count.
#[inline]
pub fn resolve_slot(num_transmitters: usize, jammed: bool) -> Outcome {
    match (num_transmitters, jammed) {
        (_, true) => Outcome::Jammed,
        (0, false) => Outcome::Idle,
        (1, false) => Outcome::Success,
        _ => Outcome::Collision,
    }
}

/// What a listening node perceives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Observation<B> {
    Idle,
    Received(B),
    Busy,
}

/// Per-node end-of-slot input. Transmitters get no channel observation; the
/// `delivered` flag is ground truth and only protocols that model an
/// acknowledgement (the DCF baseline) may look at it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Feedback<B> {
    Transmitted { delivered: bool },
    Listened(Observation<B>),
}

/// A population of nodes driven by the slot loop.
pub trait MacProtocol {
    type Beacon: Copy;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Transmit decision for `node` from the pre-slot state.
    fn transmits(&self, node: usize, rng: &mut StreamRng) -> bool;

    /// Message content `node` sends when it transmits.
    fn beacon(&self, node: usize) -> Self::Beacon;

    fn feedback(
        &mut self,
        node: usize,
        slot: u64,
        feedback: Feedback<Self::Beacon>,
        rng: &mut StreamRng,
    );

    /// Sum of access probabilities, for protocols that have them.
    fn cumulative_p(&self) -> Option<f64>;

    /// Draws every node's decision into `transmitting`; returns the number of
    /// transmitters and the highest transmitting node id.
    fn decide_all(&self, rngs: &mut [StreamRng], transmitting: &mut [bool]) -> (usize, usize) {
        let mut count = 0;
        let mut last = 0;
        for (node, (rng, tx)) in rngs.iter_mut().zip(transmitting.iter_mut()).enumerate() {
            *tx = self.transmits(node, rng);
            if *tx {
                count += 1;
                last = node;
            }
        }
        (count, last)
    }

    /// Delivers end-of-slot feedback to every node in id order.
    fn feedback_all(
        &mut self,
        slot: u64,
        transmitting: &[bool],
        observation: Observation<Self::Beacon>,
        delivered: bool,
        rngs: &mut [StreamRng],
    ) {
        for (node, (rng, &tx)) in rngs.iter_mut().zip(transmitting).enumerate() {
            let feedback = if tx {
                Feedback::Transmitted { delivered }
            } else {
                Feedback::Listened(observation)
            };
            self.feedback(node, slot, feedback, rng);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub t: u64,
    pub num_transmitters: u32,
    pub sender: Option<u32>,
    pub jammed: bool,
    pub outcome: Outcome,
    /// Sum of access probabilities at slot start (AntiJam only).
    pub cumulative_p: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ProtocolConfig {
    AntiJam(ProtocolParams),
    Dcf(DcfParams),
}

impl ProtocolConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolConfig::AntiJam(_) => "antijam",
            ProtocolConfig::Dcf(_) => "dcf",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub steps: u64,
    pub seed: u64,
    pub protocol: ProtocolConfig,
    pub adversary: AdversaryConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 1000,
            steps: 100_000,
            seed: 0,
            protocol: ProtocolConfig::AntiJam(ProtocolParams::default()),
            adversary: AdversaryConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n must be >= 1"));
        }
        if u32::try_from(self.n).is_err() {
            return Err(Error::config("n does not fit in 32 bits"));
        }
        if self.steps == 0 {
            return Err(Error::config("steps must be >= 1"));
        }
        match &self.protocol {
            ProtocolConfig::AntiJam(p) => p.validate()?,
            ProtocolConfig::Dcf(p) => p.validate()?,
        }
        self.adversary.validate()
    }
}

/// Result of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub records: Vec<SlotRecord>,
    pub per_node_successes: Vec<u64>,
    pub config: SimConfig,
}

impl RunTrace {
    pub fn jam_flags(&self) -> impl Iterator<Item = bool> + '_ {
        self.records.iter().map(|r| r.jammed)
    }
}

/// Stepwise simulation over any [`MacProtocol`].
pub struct Simulation<P: MacProtocol> {
    protocol: P,
    node_rngs: Vec<StreamRng>,
    adversary: Adversary,
    transmitting: Vec<bool>,
    records: Vec<SlotRecord>,
    per_node_successes: Vec<u64>,
    next_slot: u64,
}

impl<P: MacProtocol> Simulation<P> {
    pub fn new(protocol: P, adversary: Adversary, seed: u64) -> Self {
        let n = protocol.len();
        Simulation {
            node_rngs: (0..n)
                .map(|i| StreamRng::new(seed, node_stream(i)))
                .collect(),
            protocol,
            adversary,
            transmitting: vec![false; n],
            records: Vec::new(),
            per_node_successes: vec![0; n],
            next_slot: 0,
        }
    }

    /// Like [`Simulation::new`] but with caller-supplied node streams, so that
    /// protocols needing randomness at construction can share them.
    pub fn with_streams(protocol: P, adversary: Adversary, node_rngs: Vec<StreamRng>) -> Self {
        let n = protocol.len();
        assert_eq!(node_rngs.len(), n, "one stream per node");
        Simulation {
            node_rngs,
            protocol,
            adversary,
            transmitting: vec![false; n],
            records: Vec::new(),
            per_node_successes: vec![0; n],
            next_slot: 0,
        }
    }

    pub fn protocol(&self) -> &P {
        &self.protocol
    }

    pub fn adversary(&self) -> &Adversary {
        &self.adversary
    }

    pub fn records(&self) -> &[SlotRecord] {
        &self.records
    }

    pub fn per_node_successes(&self) -> &[u64] {
        &self.per_node_successes
    }

    pub fn reserve(&mut self, slots: usize) {
        self.records.reserve(slots);
    }

    /// Runs one slot and returns its record.
    pub fn step(&mut self) -> SlotRecord {
        let t = self.next_slot;
        let cumulative_p = self.protocol.cumulative_p();

        let (num_transmitters, last_sender) = self
            .protocol
            .decide_all(&mut self.node_rngs, &mut self.transmitting);

        let view = PreSlotView {
            active: num_transmitters > 0,
        };
        let jammed = self.adversary.decide_and_record(view, &self.records);
        let outcome = resolve_slot(num_transmitters, jammed);
        let sender = (num_transmitters == 1).then_some(last_sender);

        let observation = match outcome {
            Outcome::Idle => Observation::Idle,
            Outcome::Success => Observation::Received(self.protocol.beacon(last_sender)),
            Outcome::Collision | Outcome::Jammed => Observation::Busy,
        };
        let delivered = outcome == Outcome::Success;
        self.protocol.feedback_all(
            t,
            &self.transmitting,
            observation,
            delivered,
            &mut self.node_rngs,
        );

        if let Some(s) = sender.filter(|_| delivered) {
            self.per_node_successes[s] += 1;
        }

        let record = SlotRecord {
            t,
            num_transmitters: num_transmitters as u32,
            sender: sender.map(|s| s as u32),
            jammed,
            outcome,
            cumulative_p,
        };
        self.records.push(record);
        self.next_slot += 1;
        record
    }

    pub fn run_for(&mut self, slots: u64) {
        self.reserve(slots as usize);
        for _ in 0..slots {
            self.step();
        }
    }

    pub fn into_trace(self, config: SimConfig) -> RunTrace {
        RunTrace {
            records: self.records,
            per_node_successes: self.per_node_successes,
            config,
        }
    }
}

/// Builds the AntiJam simulation for a validated config.
pub fn antijam_simulation(
    config: &SimConfig,
    params: ProtocolParams,
) -> Simulation<AntiJamNetwork> {
    Simulation::new(
        AntiJamNetwork::new(config.n, params),
        Adversary::new(config.adversary, config.seed),
        config.seed,
    )
}

/// Builds the DCF simulation for a validated config. Initial backoffs are
/// drawn from each node's own stream.
pub fn dcf_simulation(config: &SimConfig, params: DcfParams) -> Simulation<DcfNetwork> {
    let mut rngs: Vec<StreamRng> = (0..config.n)
        .map(|i| StreamRng::new(config.seed, node_stream(i)))
        .collect();
    let network = DcfNetwork::new(params, &mut rngs);
    Simulation::with_streams(network, Adversary::new(config.adversary, config.seed), rngs)
}

/// Runs `config.steps` slots of the configured protocol.
pub fn run(config: &SimConfig) -> Result<RunTrace> {
    config.validate()?;
    let trace = match config.protocol {
        ProtocolConfig::AntiJam(params) => {
            let mut sim = antijam_simulation(config, params);
            sim.run_for(config.steps);
            sim.into_trace(*config)
        }
        ProtocolConfig::Dcf(params) => {
            let mut sim = dcf_simulation(config, params);
            sim.run_for(config.steps);
            sim.into_trace(*config)
        }
    };
    Ok(trace)
}

/// Nodes with fixed access probabilities that never update. Used to sample
/// channel statistics for a known probability vector.
#[derive(Clone, Debug)]
pub struct FrozenNetwork {
    probs: Vec<f64>,
}

impl FrozenNetwork {
    pub fn new(probs: Vec<f64>) -> Self {
        FrozenNetwork { probs }
    }
}

impl MacProtocol for FrozenNetwork {
    type Beacon = ();

    fn len(&self) -> usize {
        self.probs.len()
    }

    fn transmits(&self, node: usize, rng: &mut StreamRng) -> bool {
        rng.bernoulli(self.probs[node])
    }

    fn beacon(&self, _node: usize) {}

    fn feedback(
        &mut self,
        _node: usize,
        _slot: u64,
        _feedback: Feedback<()>,
        _rng: &mut StreamRng,
    ) {
    }

    fn cumulative_p(&self) -> Option<f64> {
        Some(self.probs.iter().sum())
    }
}

/// Samples `slots` slots of a frozen probability vector with no jammer.
pub fn sample_frozen(probs: &[f64], slots: u64, seed: u64) -> Vec<SlotRecord> {
    let mut sim = Simulation::new(
        FrozenNetwork::new(probs.to_vec()),
        Adversary::new(AdversaryConfig::no_jam(), seed),
        seed,
    );
    sim.run_for(slots);
    sim.records
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::Strategy;

    #[test]
    fn classification_cases() {
        assert_eq!(resolve_slot(0, false), Outcome::Idle);
        assert_eq!(resolve_slot(1, false), Outcome::Success);
        assert_eq!(resolve_slot(3, false), Outcome::Collision);
        assert_eq!(resolve_slot(2, false), Outcome::Collision);
        assert_eq!(resolve_slot(0, true), Outcome::Jammed);
        assert_eq!(resolve_slot(1, true), Outcome::Jammed);
        assert_eq!(resolve_slot(5, true), Outcome::Jammed);
    }

    #[test]
    fn outcome_words_round_trip() {
        for o in [
            Outcome::Idle,
            Outcome::Success,
            Outcome::Collision,
            Outcome::Jammed,
        ] {
            assert_eq!(o.as_str().parse::<Outcome>().unwrap(), o);
        }
        assert!("idle".parse::<Outcome>().is_err());
    }

    fn single_node_config() -> SimConfig {
        SimConfig {
            n: 1,
            steps: 1,
            seed: 3,
            protocol: ProtocolConfig::AntiJam(ProtocolParams::new(0.1, 1.0 / 24.0)),
            adversary: AdversaryConfig {
                strategy: Strategy::NoJam,
                ..AdversaryConfig::default()
            },
        }
    }

    #[test]
    fn single_node_single_slot() {
        let trace = run(&single_node_config()).unwrap();
        assert_eq!(trace.records.len(), 1);
        let r = trace.records[0];
        assert!(matches!(r.outcome, Outcome::Idle | Outcome::Success));
        assert!(!r.jammed);
        assert_eq!(r.cumulative_p, Some(1.0 / 24.0));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = single_node_config();
        c.n = 0;
        assert!(matches!(run(&c), Err(Error::Config(_))));
        let mut c = single_node_config();
        c.steps = 0;
        assert!(matches!(run(&c), Err(Error::Config(_))));
        let mut c = single_node_config();
        c.protocol = ProtocolConfig::AntiJam(ProtocolParams::new(-1.0, 0.04));
        assert!(matches!(run(&c), Err(Error::Config(_))));
    }

    #[test]
    fn identical_configs_give_identical_traces() {
        let config = SimConfig {
            n: 50,
            steps: 5_000,
            seed: 17,
            ..SimConfig::default()
        };
        assert_eq!(run(&config).unwrap(), run(&config).unwrap());
    }

    #[test]
    fn sender_set_iff_single_transmitter() {
        let config = SimConfig {
            n: 30,
            steps: 20_000,
            seed: 1,
            ..SimConfig::default()
        };
        let trace = run(&config).unwrap();
        for r in &trace.records {
            assert_eq!(r.sender.is_some(), r.num_transmitters == 1);
            assert_eq!(
                r.outcome,
                resolve_slot(r.num_transmitters as usize, r.jammed)
            );
        }
        let successes = trace
            .records
            .iter()
            .filter(|r| r.outcome == Outcome::Success)
            .count() as u64;
        assert_eq!(trace.per_node_successes.iter().sum::<u64>(), successes);
    }

    /// Records which feedback each node received, to check delivery rules.
    struct Probe {
        probs: Vec<f64>,
        log: Vec<(u64, usize, Feedback<usize>)>,
    }

    impl MacProtocol for Probe {
        type Beacon = usize;
        fn len(&self) -> usize {
            self.probs.len()
        }
        fn transmits(&self, node: usize, rng: &mut StreamRng) -> bool {
            rng.bernoulli(self.probs[node])
        }
        fn beacon(&self, node: usize) -> usize {
            node
        }
        fn feedback(
            &mut self,
            node: usize,
            slot: u64,
            feedback: Feedback<usize>,
            _rng: &mut StreamRng,
        ) {
            self.log.push((slot, node, feedback));
        }
        fn cumulative_p(&self) -> Option<f64> {
            None
        }
    }

    #[test]
    fn every_node_gets_exactly_one_feedback_per_slot() {
        for strategy in [Strategy::NoJam, Strategy::BusyDet, Strategy::IdleDet] {
            let probe = Probe {
                probs: vec![0.2; 6],
                log: Vec::new(),
            };
            let adversary = Adversary::new(
                AdversaryConfig {
                    window: 10,
                    epsilon: 0.5,
                    strategy,
                },
                4,
            );
            let mut sim = Simulation::new(probe, adversary, 4);
            sim.run_for(2_000);
            let log = &sim.protocol().log;
            assert_eq!(log.len(), 6 * 2_000);
            for (i, chunk) in log.chunks(6).enumerate() {
                let rec = sim.records()[i];
                let mut transmitters = 0;
                for (node, &(slot, who, fb)) in chunk.iter().enumerate() {
                    assert_eq!((slot, who), (i as u64, node));
                    match fb {
                        Feedback::Transmitted { delivered } => {
                            transmitters += 1;
                            assert_eq!(delivered, rec.outcome == Outcome::Success);
                        }
                        Feedback::Listened(Observation::Idle) => {
                            assert_eq!(rec.outcome, Outcome::Idle)
                        }
                        Feedback::Listened(Observation::Received(from)) => {
                            assert_eq!(rec.outcome, Outcome::Success);
                            assert_eq!(Some(from as u32), rec.sender);
                            assert_ne!(from, node);
                        }
                        Feedback::Listened(Observation::Busy) => assert!(rec.outcome.is_busy()),
                    }
                }
                assert_eq!(transmitters, rec.num_transmitters);
            }
        }
    }

    #[test]
    fn adding_nodes_leaves_existing_streams_untouched() {
        let small = sample_frozen(&[0.3, 0.3], 500, 8);
        let large = sample_frozen(&[0.3, 0.3, 0.0, 0.0], 500, 8);
        // Extra nodes never transmit, so the channel outcome must be identical.
        assert_eq!(small, large);
    }
}
