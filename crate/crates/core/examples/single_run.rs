//! One AntiJam run against a busy-deterministic jammer, scored and written
//! to disk.
//!
//! ```text
//! cargo run --release --example single_run
//! ```

use jamsim::experiment::{run_single, FlatConfig};

fn main() -> jamsim::Result<()> {
    let config = FlatConfig {
        n: 200,
        steps: 50_000,
        seed: 1,
        epsilon: 0.5,
        ..FlatConfig::default()
    };
    let out_dir = std::env::temp_dir().join("jamsim-single-run");
    let out = run_single(&config, &out_dir, false)?;
    let r = &out.report;

    println!(
        "n={} eps={} T={} strategy={}",
        config.n, config.epsilon, config.window, config.strategy
    );
    println!(
        "throughput        {:.4} ({} successes / {} non-jammed slots)",
        r.throughput, r.successes, r.non_jammed
    );
    println!("converged at slot {:?}", r.convergence_slot);
    println!(
        "band fraction     {:.4}",
        r.band_fraction.unwrap_or(f64::NAN)
    );
    println!("jain index        {:.4}", r.jain_index);
    println!("trace:  {}", out.trace_path.display());
    println!("report: {}", out.report_path.display());
    Ok(())
}
