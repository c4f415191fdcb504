//! Throughput of AntiJam under each built-in jamming strategy.
//!
//! ```text
//! cargo run --release --example strategy_comparison
//! ```

use jamsim::adversary::{check_budget, AdversaryConfig};
use jamsim::engine::{self, SimConfig};
use jamsim::metrics;
use jamsim::Strategy;

fn main() -> jamsim::Result<()> {
    let seeds = 1..=3;
    println!("{:<10} {:>10} {:>10}", "strategy", "throughput", "jammed");
    for strategy in Strategy::ALL {
        let (mut tp, mut jammed) = (0.0, 0.0);
        for seed in seeds.clone() {
            let config = SimConfig {
                n: 300,
                steps: 30_000,
                seed,
                adversary: AdversaryConfig {
                    window: 100,
                    epsilon: 0.5,
                    strategy,
                },
                ..SimConfig::default()
            };
            let trace = engine::run(&config)?;
            let flags: Vec<bool> = trace.jam_flags().collect();
            assert!(check_budget(&flags, &config.adversary).is_ok());
            tp += metrics::throughput(&trace.records)?.value;
            jammed += flags.iter().filter(|&&j| j).count() as f64 / flags.len() as f64;
        }
        let k = seeds.clone().count() as f64;
        println!(
            "{:<10} {:>10.4} {:>10.4}",
            strategy.as_str(),
            tp / k,
            jammed / k
        );
    }
    Ok(())
}
