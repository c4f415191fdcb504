//! Per-node success counts: histogram, Jain index and coefficient of
//! variation.
//!
//! ```text
//! cargo run --release --example fairness
//! ```

use jamsim::engine::{self, SimConfig};
use jamsim::metrics;

fn main() -> jamsim::Result<()> {
    let config = SimConfig {
        n: 500,
        steps: 200_000,
        seed: 5,
        ..SimConfig::default()
    };
    let trace = engine::run(&config)?;
    let successes = &trace.per_node_successes;

    let bin = metrics::DEFAULT_FAIRNESS_BIN;
    let histogram = metrics::fairness_histogram(successes, bin);
    let widest = histogram.values().copied().max().unwrap_or(1);
    println!("successes per node (bin width {bin}):");
    for (lower, count) in &histogram {
        let bar = "#".repeat((60 * count / widest) as usize);
        println!("{:>5}-{:<5} {count:>4} {bar}", lower, lower + bin - 1);
    }
    println!(
        "jain index               {:.4}",
        metrics::jain_index(successes)
    );
    println!(
        "coefficient of variation {:.4}",
        metrics::coefficient_of_variation(successes)
    );
    Ok(())
}
