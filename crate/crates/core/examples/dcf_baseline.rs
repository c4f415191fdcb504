//! AntiJam against the simplified 802.11 DCF baseline across jammer
//! strengths.
//!
//! ```text
//! cargo run --release --example dcf_baseline
//! ```

use jamsim::adversary::AdversaryConfig;
use jamsim::engine::{self, ProtocolConfig, SimConfig};
use jamsim::metrics;
use jamsim::{DcfParams, ProtocolParams, Strategy};

fn mean_throughput(protocol: ProtocolConfig, epsilon: f64) -> jamsim::Result<f64> {
    let mut total = 0.0;
    for seed in 1..=3 {
        let config = SimConfig {
            n: 300,
            steps: 30_000,
            seed,
            protocol,
            adversary: AdversaryConfig {
                window: 100,
                epsilon,
                strategy: Strategy::BusyDet,
            },
        };
        total += metrics::throughput(&engine::run(&config)?.records)?.value;
    }
    Ok(total / 3.0)
}

fn main() -> jamsim::Result<()> {
    let antijam = ProtocolConfig::AntiJam(ProtocolParams::default());
    let dcf = ProtocolConfig::Dcf(DcfParams::default());
    println!("{:>5} {:>8} {:>8}", "eps", "antijam", "dcf");
    for epsilon in [0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9] {
        println!(
            "{epsilon:>5} {:>8.4} {:>8.4}",
            mean_throughput(antijam, epsilon)?,
            mean_throughput(dcf, epsilon)?
        );
    }
    Ok(())
}
