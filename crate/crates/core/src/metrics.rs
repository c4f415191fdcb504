//! Aggregate statistics over run traces.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::engine::{Outcome, RunTrace, SlotRecord};
use crate::error::{Error, Result};
use crate::experiment::FlatConfig;

/// Convergence band used when none is given: `[0.1, 10]` for 5 slots.
pub const DEFAULT_CONVERGENCE_LOWER: f64 = 0.1;
pub const DEFAULT_CONVERGENCE_UPPER: f64 = 10.0;
pub const DEFAULT_CONVERGENCE_RUN: usize = 5;
pub const DEFAULT_FAIRNESS_BIN: u64 = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Throughput {
    pub value: f64,
    pub successes: u64,
    pub non_jammed: u64,
    /// Every slot was jammed; `value` is 0 by convention.
    pub all_jammed: bool,
}

/// Successful slots over non-jammed slots.
pub fn throughput(records: &[SlotRecord]) -> Result<Throughput> {
    if records.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let (successes, non_jammed) = records
        .iter()
        .fold((0u64, 0u64), |(s, nj), r| match r.outcome {
            Outcome::Success => (s + 1, nj + 1),
            Outcome::Jammed => (s, nj),
            Outcome::Idle | Outcome::Collision => (s, nj + 1),
        });
    Ok(Throughput {
        value: if non_jammed == 0 {
            0.0
        } else {
            successes as f64 / non_jammed as f64
        },
        successes,
        non_jammed,
        all_jammed: non_jammed == 0,
    })
}

fn cumulative_column(records: &[SlotRecord], metric: &'static str) -> Result<Vec<f64>> {
    records
        .iter()
        .map(|r| r.cumulative_p.ok_or(Error::UnsupportedMetric(metric)))
        .collect()
}

/// First slot `t` such that `cumulative_p` lies in `[lower, upper]` for slots
/// `t .. t + k`.
pub fn convergence_slot(
    records: &[SlotRecord],
    lower: f64,
    upper: f64,
    k: usize,
) -> Result<Option<u64>> {
    let column = cumulative_column(records, "convergence_slot")?;
    Ok(first_run_in_band(&column, lower, upper, k).map(|i| records[i].t))
}

/// Index of the first run of `k` consecutive values inside `[lower, upper]`.
pub fn first_run_in_band(values: &[f64], lower: f64, upper: f64, k: usize) -> Option<usize> {
    let k = k.max(1);
    let mut run = 0usize;
    for (i, &v) in values.iter().enumerate() {
        if (lower..=upper).contains(&v) {
            run += 1;
            if run == k {
                return Some(i + 1 - k);
            }
        } else {
            run = 0;
        }
    }
    None
}

/// Fraction of slots with `cumulative_p` in `[1 / (2 epsilon), 2 / epsilon]`.
pub fn band_fraction(records: &[SlotRecord], epsilon: f64) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let column = cumulative_column(records, "band_fraction")?;
    Ok(band_fraction_of(&column, epsilon))
}

pub fn band_fraction_of(values: &[f64], epsilon: f64) -> f64 {
    let band = 1.0 / (2.0 * epsilon)..=2.0 / epsilon;
    let inside = values.iter().filter(|v| band.contains(v)).count();
    inside as f64 / values.len() as f64
}

/// Number of nodes per success-count interval `[k * bin, (k + 1) * bin)`,
/// keyed by the interval's lower bound. Empty bins are omitted.
pub fn fairness_histogram(per_node_successes: &[u64], bin_size: u64) -> BTreeMap<u64, u64> {
    let bin_size = bin_size.max(1);
    let mut hist = BTreeMap::new();
    for &s in per_node_successes {
        *hist.entry(s / bin_size * bin_size).or_insert(0) += 1;
    }
    hist
}

/// Jain's fairness index `(sum x)^2 / (n * sum x^2)`; 1 when all are zero.
pub fn jain_index(values: &[u64]) -> f64 {
    if values.is_empty() {
        return 1.0;
    }
    let sum: f64 = values.iter().map(|&x| x as f64).sum();
    let sum_sq: f64 = values.iter().map(|&x| (x as f64) * (x as f64)).sum();
    if sum_sq == 0.0 {
        1.0
    } else {
        sum * sum / (values.len() as f64 * sum_sq)
    }
}

/// Population coefficient of variation (standard deviation over mean).
pub fn coefficient_of_variation(values: &[u64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().map(|&x| x as f64).sum::<f64>() / n;
    if mean == 0.0 {
        return 0.0;
    }
    let var = values
        .iter()
        .map(|&x| (x as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    var.sqrt() / mean
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub throughput: f64,
    /// Throughput over slots from the convergence slot on; `None` if the run
    /// never converged or carries no probabilities.
    pub throughput_post_convergence: Option<f64>,
    pub all_jammed: bool,
    pub non_jammed: u64,
    pub successes: u64,
    pub convergence_slot: Option<u64>,
    pub band_fraction: Option<f64>,
    pub fairness_histogram: BTreeMap<u64, u64>,
    pub jain_index: f64,
    pub config: FlatConfig,
}

impl MetricsReport {
    pub fn from_trace(trace: &RunTrace) -> Result<Self> {
        let tp = throughput(&trace.records)?;
        let has_probabilities = trace.records.iter().all(|r| r.cumulative_p.is_some());
        let (convergence, band) = if has_probabilities {
            (
                convergence_slot(
                    &trace.records,
                    DEFAULT_CONVERGENCE_LOWER,
                    DEFAULT_CONVERGENCE_UPPER,
                    DEFAULT_CONVERGENCE_RUN,
                )?,
                Some(band_fraction(
                    &trace.records,
                    trace.config.adversary.epsilon,
                )?),
            )
        } else {
            (None, None)
        };
        let post = convergence
            .map(|t| throughput(&trace.records[t as usize..]))
            .transpose()?
            .map(|tp| tp.value);
        Ok(MetricsReport {
            throughput: tp.value,
            throughput_post_convergence: post,
            all_jammed: tp.all_jammed,
            non_jammed: tp.non_jammed,
            successes: tp.successes,
            convergence_slot: convergence,
            band_fraction: band,
            fairness_histogram: fairness_histogram(&trace.per_node_successes, DEFAULT_FAIRNESS_BIN),
            jain_index: jain_index(&trace.per_node_successes),
            config: FlatConfig::from(&trace.config),
        })
    }
}
