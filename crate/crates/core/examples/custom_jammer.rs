//! Plugging in a custom jamming policy.
//!
//! This jammer waits for a success, then jams every active slot for the
//! next `burst` slots. The window budget is enforced by the adversary no
//! matter what the policy asks for.
//!
//! ```text
//! cargo run --release --example custom_jammer
//! ```

use jamsim::adversary::{check_budget, Adversary, AdversaryConfig, JammingStrategy, PreSlotView};
use jamsim::antijam::AntiJamNetwork;
use jamsim::engine::{Outcome, Simulation};
use jamsim::metrics;
use jamsim::rng::StreamRng;
use jamsim::{ProtocolParams, SlotRecord, Strategy};

struct AfterSuccess {
    burst: u64,
}

impl JammingStrategy for AfterSuccess {
    fn wants_jam(
        &mut self,
        view: PreSlotView,
        history: &[SlotRecord],
        _rng: &mut StreamRng,
    ) -> bool {
        let recent = history.iter().rev().take(self.burst as usize);
        view.active && recent.into_iter().any(|r| r.outcome == Outcome::Success)
    }
}

fn main() -> jamsim::Result<()> {
    let config = AdversaryConfig {
        window: 100,
        epsilon: 0.3,
        strategy: Strategy::BusyDet,
    };
    let seed = 4;
    for burst in [1, 5, 20] {
        let adversary = Adversary::with_strategy(config, Box::new(AfterSuccess { burst }), seed);
        let network = AntiJamNetwork::new(300, ProtocolParams::default());
        let mut sim = Simulation::new(network, adversary, seed);
        sim.run_for(30_000);
        let flags: Vec<bool> = sim.records().iter().map(|r| r.jammed).collect();
        assert!(check_budget(&flags, &config).is_ok());
        let jam_rate = flags.iter().filter(|&&j| j).count() as f64 / flags.len() as f64;
        let tp = metrics::throughput(sim.records())?.value;
        println!("burst {burst:>2}: throughput {tp:.4}, jammed fraction {jam_rate:.4}");
    }
    Ok(())
}
