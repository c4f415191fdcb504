//! Slotted-channel simulation of jamming-resistant medium access.
//!
//! The crate simulates `n` backlogged nodes sharing one channel in
//! synchronized slots, against a reactive jammer that senses channel activity
//! and may jam at most a `1 - epsilon` fraction of every window of `T` slots.
//! Two protocols are available:
//!
//! * [`antijam`]: multiplicative-weights access probabilities, resynchronized
//!   through a state beacon on every successful transmission.
//! * [`dcf`]: a simplified slotted 802.11 DCF baseline.
//!
//! [`engine::run`] executes one configuration and returns its [`RunTrace`];
//! [`metrics`] turns traces into throughput, convergence and fairness figures;
//! [`oracle`] holds the analytical cross-checks; [`experiment`] writes runs and
//! sweeps to disk.
//!
//! ```
//! use jamsim::{engine, metrics, SimConfig};
//!
//! let config = SimConfig { n: 50, steps: 20_000, seed: 7, ..SimConfig::default() };
//! let trace = engine::run(&config).unwrap();
//! let tp = metrics::throughput(&trace.records).unwrap();
//! assert!(tp.value > 0.0);
//! ```

pub mod adversary;
pub mod antijam;
pub mod dcf;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod oracle;
pub mod rng;
pub mod trace_io;
pub mod verify;

pub use adversary::{AdversaryConfig, Strategy};
pub use antijam::ProtocolParams;
pub use dcf::DcfParams;
pub use engine::{Outcome, ProtocolConfig, RunTrace, SimConfig, SlotRecord};
pub use error::{Error, Result};
pub use experiment::FlatConfig;
pub use metrics::MetricsReport;
