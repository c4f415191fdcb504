//! Experiment runner: flat configs, single runs written to disk, and
//! parameter sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::adversary::{AdversaryConfig, Strategy};
use crate::antijam::ProtocolParams;
use crate::dcf::DcfParams;
use crate::engine::{self, ProtocolConfig, SimConfig};
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::rng::derive_seed;
use crate::trace_io::{SnapshotWriter, TraceWriter};

pub const TRACE_FILE: &str = "trace.csv";
pub const REPORT_FILE: &str = "report.json";
pub const SNAPSHOT_FILE: &str = "nodes.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    AntiJam,
    Dcf,
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "antijam" => Ok(ProtocolKind::AntiJam),
            "dcf" => Ok(ProtocolKind::Dcf),
            other => Err(Error::config(format!(
                "unknown protocol `{other}` (expected antijam or dcf)"
            ))),
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProtocolKind::AntiJam => "antijam",
            ProtocolKind::Dcf => "dcf",
        })
    }
}

/// Fully resolved run configuration in its flat on-disk form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatConfig {
    pub n: usize,
    pub steps: u64,
    pub seed: u64,
    pub protocol: ProtocolKind,
    pub strategy: Strategy,
    pub epsilon: f64,
    #[serde(rename = "T")]
    pub window: u32,
    pub gamma: f64,
    pub p_hat: f64,
    pub initial_p: Option<f64>,
    #[serde(rename = "initial_T")]
    pub initial_threshold: Option<u32>,
    pub cw_min: u32,
    pub cw_max: u32,
}

impl Default for FlatConfig {
    fn default() -> Self {
        FlatConfig::from(&SimConfig::default())
    }
}

impl From<&SimConfig> for FlatConfig {
    fn from(c: &SimConfig) -> Self {
        let (kind, aj, dcf) = match c.protocol {
            ProtocolConfig::AntiJam(p) => (ProtocolKind::AntiJam, p, DcfParams::default()),
            ProtocolConfig::Dcf(p) => (ProtocolKind::Dcf, ProtocolParams::default(), p),
        };
        FlatConfig {
            n: c.n,
            steps: c.steps,
            seed: c.seed,
            protocol: kind,
            strategy: c.adversary.strategy,
            epsilon: c.adversary.epsilon,
            window: c.adversary.window,
            gamma: aj.gamma,
            p_hat: aj.p_hat,
            initial_p: aj.initial_p,
            initial_threshold: aj.initial_threshold,
            cw_min: dcf.cw_min,
            cw_max: dcf.cw_max,
        }
    }
}

impl FlatConfig {
    pub fn to_sim(&self) -> Result<SimConfig> {
        let protocol = match self.protocol {
            ProtocolKind::AntiJam => ProtocolConfig::AntiJam(ProtocolParams {
                gamma: self.gamma,
                p_hat: self.p_hat,
                initial_p: self.initial_p,
                initial_threshold: self.initial_threshold,
            }),
            ProtocolKind::Dcf => ProtocolConfig::Dcf(DcfParams {
                cw_min: self.cw_min,
                cw_max: self.cw_max,
            }),
        };
        let config = SimConfig {
            n: self.n,
            steps: self.steps,
            seed: self.seed,
            protocol,
            adversary: AdversaryConfig {
                window: self.window,
                epsilon: self.epsilon,
                strategy: self.strategy,
            },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(ConfigOverrides::from_json(text)?.apply(FlatConfig::default()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Partial config: every field optional. Used for config files and CLI flags.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub n: Option<usize>,
    pub steps: Option<u64>,
    pub seed: Option<u64>,
    pub protocol: Option<ProtocolKind>,
    pub strategy: Option<Strategy>,
    pub epsilon: Option<f64>,
    #[serde(rename = "T")]
    pub window: Option<u32>,
    pub gamma: Option<f64>,
    pub p_hat: Option<f64>,
    pub initial_p: Option<f64>,
    #[serde(rename = "initial_T")]
    pub initial_threshold: Option<u32>,
    pub cw_min: Option<u32>,
    pub cw_max: Option<u32>,
}

impl ConfigOverrides {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&self, mut base: FlatConfig) -> FlatConfig {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field { base.$field = v; }
            )*};
        }
        set!(n, steps, seed, protocol, strategy, epsilon, window, gamma, p_hat, cw_min, cw_max);
        if self.initial_p.is_some() {
            base.initial_p = self.initial_p;
        }
        if self.initial_threshold.is_some() {
            base.initial_threshold = self.initial_threshold;
        }
        base
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub trace_path: PathBuf,
    pub report_path: PathBuf,
    pub snapshot_path: Option<PathBuf>,
    pub report: MetricsReport,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

/// Runs one configuration and writes `trace.csv` and `report.json` into
/// `out_dir` (created if missing). With `node_snapshots`, AntiJam runs also
/// write every node's state at the start of every slot to `nodes.csv`.
pub fn run_single(config: &FlatConfig, out_dir: &Path, node_snapshots: bool) -> Result<RunOutput> {
    let sim_config = config.to_sim()?;
    fs::create_dir_all(out_dir)?;

    let mut snapshot_path = None;
    let trace = match (sim_config.protocol, node_snapshots) {
        (ProtocolConfig::AntiJam(params), true) => {
            let path = out_dir.join(SNAPSHOT_FILE);
            let mut writer = SnapshotWriter::new(create(&path)?)?;
            let mut sim = engine::antijam_simulation(&sim_config, params);
            sim.reserve(sim_config.steps as usize);
            for t in 0..sim_config.steps {
                writer.write_slot(t, sim.protocol().nodes())?;
                sim.step();
            }
            writer.finish()?;
            snapshot_path = Some(path);
            sim.into_trace(sim_config)
        }
        _ => engine::run(&sim_config)?,
    };

    let report = MetricsReport::from_trace(&trace)?;

    let trace_path = out_dir.join(TRACE_FILE);
    let mut w = TraceWriter::new(create(&trace_path)?)?;
    for r in &trace.records {
        w.write(r)?;
    }
    w.finish()?;

    let report_path = out_dir.join(REPORT_FILE);
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    fs::write(&report_path, json)?;

    Ok(RunOutput {
        trace_path,
        report_path,
        snapshot_path,
        report,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    N,
    Epsilon,
    Gamma,
    PHat,
    Strategy,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(SweepAxis::N),
            "epsilon" => Ok(SweepAxis::Epsilon),
            "gamma" => Ok(SweepAxis::Gamma),
            "p_hat" | "p-hat" => Ok(SweepAxis::PHat),
            "strategy" => Ok(SweepAxis::Strategy),
            other => Err(Error::config(format!(
                "unknown sweep axis `{other}` (expected n, epsilon, gamma, p_hat or strategy)"
            ))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::N => "n",
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::Gamma => "gamma",
            SweepAxis::PHat => "p_hat",
            SweepAxis::Strategy => "strategy",
        })
    }
}

impl SweepAxis {
    /// Returns `base` with this axis set to `value`.
    pub fn apply(self, base: FlatConfig, value: &str) -> Result<FlatConfig> {
        let bad = || Error::config(format!("bad {self} value `{value}`"));
        let mut c = base;
        match self {
            SweepAxis::N => c.n = value.parse().map_err(|_| bad())?,
            SweepAxis::Epsilon => c.epsilon = value.parse().map_err(|_| bad())?,
            SweepAxis::Gamma => c.gamma = value.parse().map_err(|_| bad())?,
            SweepAxis::PHat => c.p_hat = value.parse().map_err(|_| bad())?,
            SweepAxis::Strategy => c.strategy = value.parse()?,
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: FlatConfig,
    pub axis: SweepAxis,
    pub values: Vec<String>,
    pub repetitions: u32,
    pub seed_base: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::config("sweep needs at least one value"));
        }
        if self.repetitions == 0 {
            return Err(Error::config("repetitions must be >= 1"));
        }
        for v in &self.values {
            self.axis.apply(self.base, v)?.to_sim()?;
        }
        Ok(())
    }

    /// Row configs in output order, each with its derived seed.
    pub fn configs(&self) -> Result<Vec<(usize, u32, FlatConfig)>> {
        let mut out = Vec::with_capacity(self.values.len() * self.repetitions as usize);
        for (i, v) in self.values.iter().enumerate() {
            for rep in 0..self.repetitions {
                let mut c = self.axis.apply(self.base, v)?;
                c.seed = derive_seed(self.seed_base, i as u64, u64::from(rep));
                out.push((i, rep, c));
            }
        }
        Ok(out)
    }
}

/// One sweep CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: String,
    pub value_index: usize,
    pub repetition: u32,
    pub seed: u64,
    pub protocol: ProtocolKind,
    pub strategy: Strategy,
    pub n: usize,
    pub steps: u64,
    pub epsilon: f64,
    #[serde(rename = "T")]
    pub window: u32,
    pub gamma: f64,
    pub p_hat: f64,
    pub throughput: f64,
    pub throughput_post_convergence: Option<f64>,
    pub all_jammed: bool,
    pub non_jammed: u64,
    pub successes: u64,
    pub convergence_slot: Option<u64>,
    pub band_fraction: Option<f64>,
    pub jain_index: f64,
}

/// Runs every (value, repetition) pair. Rows may run in parallel; the
/// result is ordered by (value index, repetition).
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let configs = spec.configs()?;
    configs
        .par_iter()
        .map(|(i, rep, config)| {
            let trace = engine::run(&config.to_sim()?)?;
            let m = MetricsReport::from_trace(&trace)?;
            Ok(SweepRow {
                axis: spec.axis,
                value: spec.values[*i].clone(),
                value_index: *i,
                repetition: *rep,
                seed: config.seed,
                protocol: config.protocol,
                strategy: config.strategy,
                n: config.n,
                steps: config.steps,
                epsilon: config.epsilon,
                window: config.window,
                gamma: config.gamma,
                p_hat: config.p_hat,
                throughput: m.throughput,
                throughput_post_convergence: m.throughput_post_convergence,
                all_jammed: m.all_jammed,
                non_jammed: m.non_jammed,
                successes: m.successes,
                convergence_slot: m.convergence_slot,
                band_fraction: m.band_fraction,
                jain_index: m.jain_index,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean throughput per sweep value, in value order.
pub fn mean_throughput_by_value(rows: &[SweepRow]) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64, u32)> = Vec::new();
    for r in rows {
        match out.get_mut(r.value_index) {
            Some(entry) => {
                entry.1 += r.throughput;
                entry.2 += 1;
            }
            None => out.push((r.value.clone(), r.throughput, 1)),
        }
    }
    out.into_iter()
        .map(|(v, s, k)| (v, s / f64::from(k)))
        .collect()
}
