//! Cumulative access probability over time: convergence from the initial
//! state and occupancy of the band [1/(2 eps), 2/eps].
//!
//! ```text
//! cargo run --release --example convergence
//! ```

use jamsim::adversary::AdversaryConfig;
use jamsim::engine::{self, SimConfig};
use jamsim::metrics::{
    self, DEFAULT_CONVERGENCE_LOWER, DEFAULT_CONVERGENCE_RUN, DEFAULT_CONVERGENCE_UPPER,
};
use jamsim::Strategy;

fn main() -> jamsim::Result<()> {
    let epsilon = 0.5;
    let config = SimConfig {
        n: 1000,
        steps: 20_000,
        seed: 3,
        adversary: AdversaryConfig {
            window: 100,
            epsilon,
            strategy: Strategy::BusyDet,
        },
        ..SimConfig::default()
    };
    let trace = engine::run(&config)?;
    let converged = metrics::convergence_slot(
        &trace.records,
        DEFAULT_CONVERGENCE_LOWER,
        DEFAULT_CONVERGENCE_UPPER,
        DEFAULT_CONVERGENCE_RUN,
    )?;
    println!(
        "initial cumulative p {:.3}",
        trace.records[0].cumulative_p.unwrap()
    );
    println!("converged into [0.1, 10] at slot {converged:?}");
    println!(
        "fraction of slots in [{:.1}, {:.1}]: {:.4}",
        1.0 / (2.0 * epsilon),
        2.0 / epsilon,
        metrics::band_fraction(&trace.records, epsilon)?
    );
    println!("\n{:>7} {:>12}", "slot", "cumulative p");
    for r in trace.records.iter().step_by(1000) {
        println!("{:>7} {:>12.4}", r.t, r.cumulative_p.unwrap());
    }
    Ok(())
}
