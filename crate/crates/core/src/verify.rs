//! Property suite behind the `verify` subcommand.

use std::fmt;

use crate::adversary::{check_budget, AdversaryConfig, Strategy};
use crate::antijam::ProtocolParams;
use crate::engine::{self, ProtocolConfig, SimConfig};
use crate::oracle::{self, FactChecker, FactKind, ProbVector};
use crate::rng::StreamRng;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random vectors for the sandwich-bound check.
    pub sandwich_vectors: usize,
    /// Random vectors per size for closed form vs enumeration.
    pub vectors_per_size: usize,
    pub max_enumeration_n: usize,
    /// Nodes and slots of the protocol run used for per-slot checks.
    pub run_n: usize,
    pub run_steps: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 1,
            sandwich_vectors: 1000,
            vectors_per_size: 200,
            max_enumeration_n: 12,
            run_n: 200,
            run_steps: 100_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{status}] {}: {}", self.name, self.detail)
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

/// Vector of `n` entries drawn uniformly from `[0, cap]`.
pub fn random_prob_vector(rng: &mut StreamRng, n: usize, cap: f64) -> ProbVector {
    ProbVector::new((0..n).map(|_| rng.uniform() * cap).collect()).expect("entries below 1")
}

pub fn run(options: &VerifyOptions) -> VerifyReport {
    let mut report = VerifyReport::default();
    let p_hat = 1.0 / 24.0;
    let mut rng = StreamRng::new(options.seed, 0);

    let mut failures = 0;
    for _ in 0..options.sandwich_vectors {
        let n = 1 + rng.upto(199) as usize;
        let pv = random_prob_vector(&mut rng, n, p_hat);
        if !oracle::check_sandwich(&pv, p_hat).unwrap_or(false) {
            failures += 1;
        }
    }
    report.push(
        "sandwich-random",
        failures == 0,
        format!(
            "{failures} of {} random vectors violate q0*p <= q1 <= q0*p/(1-p_hat)",
            options.sandwich_vectors
        ),
    );

    let mut worst: f64 = 0.0;
    let mut sum_violations = 0;
    for n in 1..=options.max_enumeration_n {
        for _ in 0..options.vectors_per_size {
            let pv = random_prob_vector(&mut rng, n, 0.999);
            let (e0, e1) = oracle::enumerate_q0_q1(&pv);
            worst = worst
                .max((oracle::q0(&pv) - e0).abs())
                .max((oracle::q1(&pv) - e1).abs());
            if oracle::q0(&pv) + oracle::q1(&pv) > 1.0 + 1e-12 {
                sum_violations += 1;
            }
        }
    }
    report.push(
        "oracle-enumeration",
        worst <= 1e-12,
        format!(
            "max |closed form - enumeration| = {worst:.3e} for n <= {}",
            options.max_enumeration_n
        ),
    );
    report.push(
        "q0-plus-q1",
        sum_violations == 0,
        format!("{sum_violations} vectors with q0 + q1 > 1"),
    );

    let params = ProtocolParams::new(0.1, p_hat);
    let config = SimConfig {
        n: options.run_n,
        steps: options.run_steps,
        seed: options.seed,
        protocol: ProtocolConfig::AntiJam(params),
        adversary: AdversaryConfig::default(),
    };
    let mut sim = engine::antijam_simulation(&config, params);
    let mut checker = FactChecker::new(params);
    let mut sandwich_failures = 0u64;
    let mut pre = sim.protocol().nodes().to_vec();
    for _ in 0..options.run_steps {
        let pv = ProbVector::new(pre.iter().map(|s| s.p).collect()).expect("p below cap");
        if !oracle::check_sandwich(&pv, p_hat).unwrap_or(false) {
            sandwich_failures += 1;
        }
        let record = sim.step();
        let post = sim.protocol().nodes();
        checker.check_slot(&pre, &record, post);
        pre.clear();
        pre.extend_from_slice(post);
    }
    report.push(
        "sandwich-trace",
        sandwich_failures == 0,
        format!(
            "{sandwich_failures} of {} per-slot snapshots violate the bound",
            options.run_steps
        ),
    );
    let tally: Vec<String> = FactKind::ALL
        .iter()
        .map(|k| format!("{k:?}={}", checker.checks(*k)))
        .collect();
    let first = checker
        .violations()
        .first()
        .map(|v| format!("; first: {v}"))
        .unwrap_or_default();
    report.push(
        "facts",
        checker.violations().is_empty(),
        format!(
            "{} violations over [{}]{first}",
            checker.violations().len(),
            tally.join(", ")
        ),
    );
    let flags: Vec<bool> = sim.records().iter().map(|r| r.jammed).collect();

    let mut budget_ok = check_budget(&flags, &config.adversary).is_ok();
    for strategy in [Strategy::BusyProb, Strategy::IdleDet] {
        let mut c = config;
        c.adversary.strategy = strategy;
        c.steps = options.run_steps.min(20_000);
        let trace = engine::run(&c).expect("valid config");
        let flags: Vec<bool> = trace.jam_flags().collect();
        budget_ok &= check_budget(&flags, &c.adversary).is_ok();
    }
    report.push(
        "budget-window",
        budget_ok,
        "every length-T window within floor((1-eps)T)".into(),
    );

    report
}
