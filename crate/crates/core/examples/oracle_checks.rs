//! Analytical cross-checks: idle/success probabilities of a probability
//! vector, the q0/q1 sandwich bound, and per-slot protocol facts on a live
//! run.
//!
//! ```text
//! cargo run --release --example oracle_checks
//! ```

use jamsim::antijam::ProtocolParams;
use jamsim::engine::{self, SimConfig};
use jamsim::oracle::{self, FactChecker, FactKind, ProbVector};

fn main() -> jamsim::Result<()> {
    let pv = ProbVector::new(vec![0.02, 0.03, 0.04, 1.0 / 24.0])?;
    let (e0, e1) = oracle::enumerate_q0_q1(&pv);
    println!(
        "q0 closed form {:.12}  enumeration {e0:.12}",
        oracle::q0(&pv)
    );
    println!(
        "q1 closed form {:.12}  enumeration {e1:.12}",
        oracle::q1(&pv)
    );
    let sides = oracle::sandwich_sides(&pv, 1.0 / 24.0)?;
    println!(
        "sandwich {sides:?} holds: {}",
        sides.holds(oracle::SANDWICH_REL_TOL)
    );

    // Very large vectors underflow the direct product; the log form does not.
    let big = ProbVector::new(vec![1.0 / 24.0; 100_000])?;
    println!("ln q0 for 10^5 nodes at p_hat: {:.3}", oracle::ln_q0(&big));

    let params = ProtocolParams::default();
    let config = SimConfig {
        n: 200,
        steps: 20_000,
        seed: 9,
        ..SimConfig::default()
    };
    let mut sim = engine::antijam_simulation(&config, params);
    let mut checker = FactChecker::new(params);
    let mut pre = sim.protocol().nodes().to_vec();
    for _ in 0..config.steps {
        let record = sim.step();
        checker.check_slot(&pre, &record, sim.protocol().nodes());
        pre.clear();
        pre.extend_from_slice(sim.protocol().nodes());
    }
    for kind in FactKind::ALL {
        println!("{kind:?}: {} slots checked", checker.checks(kind));
    }
    println!("violations: {}", checker.violations().len());
    Ok(())
}
