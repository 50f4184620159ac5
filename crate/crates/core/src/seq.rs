//! Subnetwork equivalence queries.
//!
//! A query names a set of target outputs `Y` and proposes a network whose
//! outputs line up one-to-one with `Y`. The oracle answers whether the proposal
//! matches the target's subnetwork on `Y`. Three oracles share the contract:
//! ground truth on structure, exact equality of subset-zero tables at a fixed
//! bias, and a statistical test against observed draws.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::distribution::{subset_zero_table, BiasSetting, Limits};
use crate::error::{Error, Result};
use crate::network::{induced_subnetwork, NoisyOrNetwork};
use crate::rational::to_f64;
use crate::sampler::{empirical_subset_zero_table, sample, SampleSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqQuery {
    /// Target outputs, in the order matching the candidate's outputs.
    pub outputs: Vec<usize>,
    pub candidate: NoisyOrNetwork,
}

impl SeqQuery {
    pub fn new(outputs: Vec<usize>, candidate: NoisyOrNetwork) -> Result<Self> {
        if candidate.num_outputs() != outputs.len() {
            return Err(Error::InvalidArgument(format!(
                "candidate has {} outputs for a query on {}",
                candidate.num_outputs(),
                outputs.len()
            )));
        }
        Ok(SeqQuery { outputs, candidate })
    }
}

/// Snapshot of an oracle's counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqStats {
    pub queries: usize,
    pub samples: usize,
    pub max_outputs: usize,
}

#[derive(Debug, Default)]
pub struct SeqCounters {
    queries: AtomicUsize,
    samples: AtomicUsize,
    max_outputs: AtomicUsize,
}

impl SeqCounters {
    /// Records one query and returns its zero-based sequence number.
    fn record(&self, outputs: usize) -> usize {
        self.max_outputs.fetch_max(outputs, Ordering::Relaxed);
        self.queries.fetch_add(1, Ordering::Relaxed)
    }

    fn consume(&self, samples: usize) {
        self.samples.fetch_add(samples, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> SeqStats {
        SeqStats {
            queries: self.queries.load(Ordering::Relaxed),
            samples: self.samples.load(Ordering::Relaxed),
            max_outputs: self.max_outputs.load(Ordering::Relaxed),
        }
    }
}

pub trait SeqOracle: Sync {
    fn query(&self, q: &SeqQuery) -> Result<bool>;

    fn stats(&self) -> SeqStats;

    fn name(&self) -> &'static str;
}

fn check_query(target_outputs: usize, q: &SeqQuery) -> Result<()> {
    if q.candidate.num_outputs() != q.outputs.len() {
        return Err(Error::InvalidArgument("candidate outputs do not match the query".into()));
    }
    if let Some(&j) = q.outputs.iter().find(|&&j| j >= target_outputs) {
        return Err(Error::InvalidArgument(format!("query output {j} out of range")));
    }
    Ok(())
}

/// Ground truth: structural equivalence with the induced subnetwork, outputs
/// matched positionally and inputs connected to none of them ignored.
pub struct StructuralOracle {
    target: NoisyOrNetwork,
    counters: SeqCounters,
}

impl StructuralOracle {
    pub fn new(target: NoisyOrNetwork) -> Self {
        StructuralOracle { target, counters: SeqCounters::default() }
    }
}

impl SeqOracle for StructuralOracle {
    fn query(&self, q: &SeqQuery) -> Result<bool> {
        check_query(self.target.num_outputs(), q)?;
        self.counters.record(q.outputs.len());
        let induced = induced_subnetwork(&self.target, &q.outputs)?;
        Ok(induced.network.connected_canonical_form() == q.candidate.connected_canonical_form())
    }

    fn stats(&self) -> SeqStats {
        self.counters.snapshot()
    }

    fn name(&self) -> &'static str {
        "structural"
    }
}

/// YES iff the candidate's subset-zero table over all subsets of its outputs
/// equals the target's, exactly, at the given bias.
pub struct DistributionalOracle {
    target: NoisyOrNetwork,
    bias: BiasSetting,
    limits: Limits,
    counters: SeqCounters,
}

impl DistributionalOracle {
    pub fn new(target: NoisyOrNetwork, bias: BiasSetting) -> Self {
        Self::with_limits(target, bias, Limits::default())
    }

    pub fn with_limits(target: NoisyOrNetwork, bias: BiasSetting, limits: Limits) -> Self {
        DistributionalOracle { target, bias, limits, counters: SeqCounters::default() }
    }
}

impl SeqOracle for DistributionalOracle {
    fn query(&self, q: &SeqQuery) -> Result<bool> {
        check_query(self.target.num_outputs(), q)?;
        self.counters.record(q.outputs.len());
        let own: Vec<usize> = (0..q.outputs.len()).collect();
        let cand = subset_zero_table(&q.candidate, &own, &self.bias, &self.limits)?;
        let truth = subset_zero_table(&self.target, &q.outputs, &self.bias, &self.limits)?;
        Ok(cand.values == truth.values)
    }

    fn stats(&self) -> SeqStats {
        self.counters.snapshot()
    }

    fn name(&self) -> &'static str {
        "distributional"
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeqBudget {
    pub alpha: f64,
    pub delta_per_query: f64,
    /// Draws per query.
    pub sample_size: usize,
}

impl SeqBudget {
    pub fn new(alpha: f64, delta_per_query: f64, sample_size: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha {alpha} must be positive")));
        }
        if !(delta_per_query > 0.0 && delta_per_query < 1.0) {
            return Err(Error::InvalidArgument(format!("delta {delta_per_query} must lie in (0, 1)")));
        }
        Ok(SeqBudget { alpha, delta_per_query, sample_size })
    }

    /// Budget whose sample size meets [`required_sample_size`] for queries on
    /// up to `max_outputs` outputs.
    pub fn derived(alpha: f64, delta_per_query: f64, max_outputs: usize) -> Result<Self> {
        let n = required_sample_size(alpha, delta_per_query, max_outputs)?;
        Self::new(alpha, delta_per_query, n)
    }
}

/// Smallest `N` with `2^(s+1) exp(-2 N (alpha/4)^2) <= delta`, i.e.
/// `ceil(8 / alpha^2 * ln(2^(s+1) / delta))`. At that size every entry of an
/// `s`-output subset-zero table is within `alpha/4` with probability `1 - delta`.
pub fn required_sample_size(alpha: f64, delta: f64, outputs: usize) -> Result<usize> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} must be positive")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta {delta} must lie in (0, 1)")));
    }
    let log_term = (outputs as f64 + 1.0) * std::f64::consts::LN_2 - delta.ln();
    let n = (8.0 / (alpha * alpha) * log_term).ceil();
    if n > usize::MAX as f64 {
        return Err(Error::LimitExceeded { what: "sample size", requested: u128::MAX, limit: usize::MAX as u128 });
    }
    Ok(n as usize)
}

/// Where a statistical oracle gets its draws.
pub enum SampleSource {
    /// One set reused for every query.
    Fixed(SampleSet),
    /// A fresh set per query, drawn from a hidden network. Query `t` uses seed
    /// `seed + t`.
    Fresh { target: NoisyOrNetwork, seed: u64 },
}

/// Max-deviation test: YES iff every subset-zero probability of the candidate
/// is within `alpha / 2` of the observed frequency.
pub struct StatisticalOracle {
    source: SampleSource,
    bias: BiasSetting,
    budget: SeqBudget,
    limits: Limits,
    counters: SeqCounters,
    /// Observed tables of a fixed sample set, by query outputs.
    cache: Mutex<HashMap<Vec<usize>, Vec<f64>>>,
}

impl StatisticalOracle {
    pub fn new(source: SampleSource, bias: BiasSetting, budget: SeqBudget) -> Result<Self> {
        if let SampleSource::Fixed(set) = &source {
            if set.len() < budget.sample_size {
                return Err(Error::InsufficientSamples { needed: budget.sample_size, available: set.len() });
            }
        }
        Ok(StatisticalOracle {
            source,
            bias,
            budget,
            limits: Limits::default(),
            counters: SeqCounters::default(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn budget(&self) -> &SeqBudget {
        &self.budget
    }

    /// Largest gap between the candidate's exact table and the observed one.
    pub fn max_deviation(&self, q: &SeqQuery) -> Result<f64> {
        let t = self.counters.record(q.outputs.len());
        let own: Vec<usize> = (0..q.outputs.len()).collect();
        let exact = subset_zero_table(&q.candidate, &own, &self.bias, &self.limits)?;
        let observed = match &self.source {
            SampleSource::Fixed(set) => {
                check_query(set.num_outputs(), q)?;
                self.counters.consume(set.len());
                let mut cache = self.cache.lock().expect("cache lock");
                match cache.get(&q.outputs) {
                    Some(values) => values.clone(),
                    None => {
                        let values = empirical_subset_zero_table(set, &q.outputs)?.values;
                        cache.insert(q.outputs.clone(), values.clone());
                        values
                    }
                }
            }
            SampleSource::Fresh { target, seed } => {
                check_query(target.num_outputs(), q)?;
                let set = sample(target, &self.bias, self.budget.sample_size, seed.wrapping_add(t as u64));
                self.counters.consume(set.len());
                empirical_subset_zero_table(&set, &q.outputs)?.values
            }
        };
        Ok(exact.values.iter().zip(&observed).fold(0.0f64, |m, (e, o)| m.max((to_f64(e) - o).abs())))
    }
}

impl SeqOracle for StatisticalOracle {
    fn query(&self, q: &SeqQuery) -> Result<bool> {
        Ok(self.max_deviation(q)? <= self.budget.alpha / 2.0)
    }

    fn stats(&self) -> SeqStats {
        self.counters.snapshot()
    }

    fn name(&self) -> &'static str {
        "statistical"
    }
}
