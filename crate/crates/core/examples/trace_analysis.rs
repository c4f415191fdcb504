//! Writes a trace to CSV, reads it back, and recomputes metrics from the
//! file alone.
//!
//! ```text
//! cargo run --release --example trace_analysis
//! ```

use std::fs::File;
use std::io::BufWriter;

use jamsim::engine::{self, Outcome, SimConfig};
use jamsim::metrics;
use jamsim::oracle::empirical_rates;
use jamsim::trace_io::{read_trace, write_trace};

fn main() -> jamsim::Result<()> {
    let config = SimConfig {
        n: 100,
        steps: 10_000,
        seed: 12,
        ..SimConfig::default()
    };
    let trace = engine::run(&config)?;
    let path = std::env::temp_dir().join("jamsim-trace.csv");
    write_trace(&trace.records, BufWriter::new(File::create(&path)?))?;

    let records = read_trace(File::open(&path)?)?;
    assert_eq!(records, trace.records);
    let tp = metrics::throughput(&records)?;
    let rates = empirical_rates(&records);
    let collisions = records
        .iter()
        .filter(|r| r.outcome == Outcome::Collision)
        .count();
    println!("read {} slots from {}", records.len(), path.display());
    println!(
        "throughput {:.4}, idle rate {:.4}, success rate {:.4}, collisions {collisions}",
        tp.value, rates.idle_rate, rates.success_rate
    );
    Ok(())
}
