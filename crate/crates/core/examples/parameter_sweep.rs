//! Sweeps the multiplicative step `gamma` and writes a sweep CSV.
//!
//! Rows run in parallel but the output order, and every row's seed, depend
//! only on the sweep specification.
//!
//! ```text
//! cargo run --release --example parameter_sweep
//! ```

use std::fs::File;

use jamsim::experiment::{self, FlatConfig, SweepAxis, SweepSpec};

fn main() -> jamsim::Result<()> {
    let spec = SweepSpec {
        base: FlatConfig {
            n: 200,
            steps: 20_000,
            ..FlatConfig::default()
        },
        axis: SweepAxis::Gamma,
        values: ["0.02", "0.05", "0.1", "0.2", "0.5"]
            .map(String::from)
            .to_vec(),
        repetitions: 3,
        seed_base: 42,
    };
    let rows = experiment::run_sweep(&spec)?;
    for (value, tp) in experiment::mean_throughput_by_value(&rows) {
        println!("gamma={value:<5} mean throughput {tp:.4}");
    }
    let path = std::env::temp_dir().join("jamsim-gamma-sweep.csv");
    experiment::write_sweep_csv(&rows, File::create(&path)?)?;
    println!("wrote {}", path.display());
    Ok(())
}
