//! Structure recovery from subnetwork equivalence queries.
//!
//! Both algorithms add outputs one at a time to a growing prefix network.
//! The simple variant proposes every bounded wiring of the new output on the
//! full prefix. The basic-block variant first learns how many parents of each
//! weight the new output has (one query round on the output alone), then asks,
//! for each named basic block of the prefix, how many of those parents lie in
//! that block, using only the block's naming outputs plus the new one.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::distribution::BiasSetting;
use crate::error::{Error, Result};
use crate::network::{basic_blocks, induced_subnetwork, validate, NetworkFamily, NoisyOrNetwork, Signature, Subclass};
use crate::rational::{format_rational, Rational};
use crate::sampler::{sample, SampleSet};
use crate::seq::{required_sample_size, SampleSource, SeqBudget, SeqOracle, SeqQuery, StatisticalOracle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Simple,
    BasicBlock,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(Variant::Simple),
            "basic-block" => Ok(Variant::BasicBlock),
            other => Err(Error::Parse(format!("unknown algorithm {other:?}"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Simple => "simple",
            Variant::BasicBlock => "basic-block",
        })
    }
}

/// How far the result is backed by theory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Exact oracle supplied by the caller.
    Exact,
    /// Statistical oracle on a family with unique polynomials.
    Guaranteed,
    /// Statistical oracle on a family without that guarantee.
    BestEffort,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Exact => "exact",
            Regime::Guaranteed => "guaranteed",
            Regime::BestEffort => "best-effort",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionConfig {
    pub num_inputs: usize,
    pub num_outputs: usize,
    pub family: NetworkFamily,
    pub variant: Variant,
    /// Hard cap on queries; `None` means unlimited.
    pub query_budget: Option<usize>,
    /// Commit the last remaining candidate of a round without asking when
    /// every earlier candidate was rejected.
    pub infer_last: bool,
    /// Ask every candidate of each round and warn when more than one is accepted.
    pub exhaustive_rounds: bool,
}

impl ReconstructionConfig {
    pub fn new(num_inputs: usize, num_outputs: usize, family: NetworkFamily) -> Self {
        ReconstructionConfig {
            num_inputs,
            num_outputs,
            family,
            variant: Variant::BasicBlock,
            query_budget: None,
            infer_last: true,
            exhaustive_rounds: false,
        }
    }

    /// `m n k^(2k) l^k`
    pub fn query_bound(&self) -> u128 {
        query_bound(self.num_inputs, self.num_outputs, self.family.fan_in_k(), self.family.ell())
    }
}

pub fn query_bound(m: usize, n: usize, k: usize, ell: usize) -> u128 {
    let k = k as u32;
    (m as u128)
        .saturating_mul(n as u128)
        .saturating_mul((k as u128).saturating_pow(2 * k))
        .saturating_mul((ell as u128).saturating_pow(k))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrace {
    /// Target outputs the round's queries were about.
    pub query_outputs: Vec<usize>,
    /// Position of the named block in the prefix partition; `None` for the
    /// single-output round.
    pub block: Option<usize>,
    pub candidates: usize,
    pub queried: usize,
    pub accepted: usize,
    pub inferred: bool,
    pub yes_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputTrace {
    pub output: usize,
    /// Parent count per family weight, in canonical weight order.
    pub totals: Vec<usize>,
    pub blocks_before: usize,
    pub blocks_after: usize,
    pub rounds: Vec<RoundTrace>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub recovered: NoisyOrNetwork,
    pub variant: Variant,
    pub oracle: String,
    pub regime: Regime,
    pub seq_count: usize,
    pub samples_used: usize,
    pub max_query_outputs: usize,
    pub query_bound: u128,
    pub inferred_commits: usize,
    pub alpha: Option<f64>,
    pub delta_per_query: Option<f64>,
    pub sample_size: Option<usize>,
    pub warnings: Vec<String>,
    pub trace: Vec<OutputTrace>,
    /// Not serialized, so that saved reports are reproducible.
    #[serde(skip)]
    pub wall_time_ms: f64,
}

impl ReconstructionReport {
    /// Line-oriented summary, one `key: value` per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "variant: {}", self.variant);
        let _ = writeln!(s, "oracle: {}", self.oracle);
        let _ = writeln!(s, "regime: {}", self.regime);
        let _ = writeln!(s, "inputs: {}", self.recovered.num_inputs());
        let _ = writeln!(s, "outputs: {}", self.recovered.num_outputs());
        let _ = writeln!(s, "edges: {}", self.recovered.edge_count());
        let _ = writeln!(s, "seq_count: {}", self.seq_count);
        let _ = writeln!(s, "query_bound: {}", self.query_bound);
        let _ = writeln!(s, "within_bound: {}", (self.seq_count as u128) <= self.query_bound);
        let _ = writeln!(s, "max_query_outputs: {}", self.max_query_outputs);
        let _ = writeln!(s, "inferred_commits: {}", self.inferred_commits);
        let _ = writeln!(s, "samples_used: {}", self.samples_used);
        if let Some(a) = self.alpha {
            let _ = writeln!(s, "alpha: {a}");
        }
        if let Some(d) = self.delta_per_query {
            let _ = writeln!(s, "delta_per_query: {d:e}");
        }
        if let Some(n) = self.sample_size {
            let _ = writeln!(s, "sample_size: {n}");
        }
        let _ = writeln!(s, "wall_time_ms: {:.3}", self.wall_time_ms);
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

struct Session<'a> {
    oracle: &'a dyn SeqOracle,
    cfg: &'a ReconstructionConfig,
    seq_count: usize,
    max_query_outputs: usize,
    inferred: usize,
    warnings: Vec<String>,
}

impl<'a> Session<'a> {
    fn new(oracle: &'a dyn SeqOracle, cfg: &'a ReconstructionConfig) -> Result<Self> {
        validate_config(cfg)?;
        Ok(Session { oracle, cfg, seq_count: 0, max_query_outputs: 0, inferred: 0, warnings: Vec::new() })
    }

    fn ask(&mut self, outputs: &[usize], candidate: NoisyOrNetwork) -> Result<bool> {
        if let Some(b) = self.cfg.query_budget {
            if self.seq_count >= b {
                return Err(Error::QueryBudgetExceeded(b));
            }
        }
        self.seq_count += 1;
        self.max_query_outputs = self.max_query_outputs.max(outputs.len());
        self.oracle.query(&SeqQuery::new(outputs.to_vec(), candidate)?)
    }

    /// Runs one round over `count` candidates built on demand and returns the
    /// index of the committed one.
    fn round<F>(
        &mut self,
        output: usize,
        outputs: &[usize],
        block: Option<usize>,
        count: usize,
        allow_infer: bool,
        mut build: F,
    ) -> Result<(usize, RoundTrace)>
    where
        F: FnMut(usize) -> NoisyOrNetwork,
    {
        let mut trace = RoundTrace {
            query_outputs: outputs.to_vec(),
            block,
            candidates: count,
            queried: 0,
            accepted: 0,
            inferred: false,
            yes_count: 0,
        };
        let mut first_yes = None;
        for idx in 0..count {
            let last = idx + 1 == count;
            if last && allow_infer && self.cfg.infer_last && !self.cfg.exhaustive_rounds && first_yes.is_none() {
                trace.inferred = true;
                trace.accepted = idx;
                self.inferred += 1;
                return Ok((idx, trace));
            }
            trace.queried += 1;
            if self.ask(outputs, build(idx))? {
                trace.yes_count += 1;
                if first_yes.is_none() {
                    first_yes = Some(idx);
                }
                if !self.cfg.exhaustive_rounds {
                    break;
                }
            }
        }
        let Some(idx) = first_yes else {
            return Err(Error::NoCandidateAccepted { output, tried: trace.queried });
        };
        if trace.yes_count > 1 {
            self.warnings.push(format!(
                "output {output}: {} candidates accepted on outputs {:?}; committed the first",
                trace.yes_count, outputs
            ));
        }
        trace.accepted = idx;
        Ok((idx, trace))
    }

    fn finish(self, recovered: NoisyOrNetwork, trace: Vec<OutputTrace>, started: Instant) -> ReconstructionReport {
        let stats = self.oracle.stats();
        ReconstructionReport {
            recovered,
            variant: self.cfg.variant,
            oracle: self.oracle.name().to_string(),
            regime: Regime::Exact,
            seq_count: self.seq_count,
            samples_used: stats.samples,
            max_query_outputs: self.max_query_outputs,
            query_bound: self.cfg.query_bound(),
            inferred_commits: self.inferred,
            alpha: None,
            delta_per_query: None,
            sample_size: None,
            warnings: self.warnings,
            trace,
            wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }
}

fn validate_config(cfg: &ReconstructionConfig) -> Result<()> {
    if cfg.query_budget == Some(0) {
        return Err(Error::InvalidArgument("query budget must be positive".into()));
    }
    Ok(())
}

/// Runs the variant selected in `cfg`.
pub fn run(oracle: &dyn SeqOracle, cfg: &ReconstructionConfig) -> Result<ReconstructionReport> {
    match cfg.variant {
        Variant::Simple => reconstruct_simple(oracle, cfg),
        Variant::BasicBlock => reconstruct(oracle, cfg),
    }
}

/// For each output in turn, every parent set of size at most k (by size, then
/// lexicographically) crossed with every weight assignment is proposed on the
/// whole prefix; the first accepted wiring is committed.
pub fn reconstruct_simple(oracle: &dyn SeqOracle, cfg: &ReconstructionConfig) -> Result<ReconstructionReport> {
    let started = Instant::now();
    let mut session = Session::new(oracle, cfg)?;
    let fam = &cfg.family;
    let m = cfg.num_inputs;
    let mut cur = NoisyOrNetwork::empty(m, 0);
    let mut wirings: Vec<BTreeMap<usize, Rational>> = Vec::new();
    for size in 0..=fam.fan_in_k().min(m) {
        for set in lex_subsets(m, size) {
            for_each_assignment(fam.weight_values(), size, |ws| {
                wirings.push(set.iter().copied().zip(ws.iter().cloned()).collect());
            });
        }
    }
    let mut trace = Vec::new();
    for j in 0..cfg.num_outputs {
        let outputs: Vec<usize> = (0..=j).collect();
        let candidates: Vec<NoisyOrNetwork> = wirings
            .iter()
            .filter_map(|w| {
                let mut net = cur.clone();
                net.push_output(w.clone()).ok()?;
                validate(&net, fam).is_valid().then_some(net)
            })
            .collect();
        let blocks_before = named_blocks(&cur);
        let (idx, round) = session.round(j, &outputs, None, candidates.len(), false, |i| candidates[i].clone())?;
        cur = candidates[idx].clone();
        let totals = weight_totals(fam, cur.parents(j));
        trace.push(OutputTrace { output: j, totals, blocks_before, blocks_after: named_blocks(&cur), rounds: vec![round] });
    }
    Ok(session.finish(cur, trace, started))
}

/// Basic-block reconstruction; every query involves at most k + 1 outputs.
pub fn reconstruct(oracle: &dyn SeqOracle, cfg: &ReconstructionConfig) -> Result<ReconstructionReport> {
    let started = Instant::now();
    let mut session = Session::new(oracle, cfg)?;
    let fam = &cfg.family;
    let weights = fam.weight_values();
    let ell = weights.len();
    let m = cfg.num_inputs;
    let mut cur = NoisyOrNetwork::empty(m, 0);
    let mut trace = Vec::new();

    for j in 0..cfg.num_outputs {
        let mut rounds = Vec::new();
        let partition = basic_blocks(&cur);
        let blocks_before = partition.names.iter().filter(|n| n.is_some()).count();

        // parent counts per weight, from the output alone
        let totals_list = total_candidates(fam, m);
        let (idx, round) = session.round(j, &[j], None, totals_list.len(), true, |i| {
            let counts = &totals_list[i];
            let mut net = NoisyOrNetwork::empty(counts.iter().sum(), 1);
            let mut next = 0;
            for (w, &c) in weights.iter().zip(counts) {
                for _ in 0..c {
                    net.set_edge(next, 0, w.clone()).expect("fresh edge");
                    next += 1;
                }
            }
            net
        })?;
        rounds.push(round);
        let totals = totals_list[idx].clone();
        let mut remaining = totals.clone();
        let mut assigned: BTreeMap<usize, Rational> = BTreeMap::new();

        for (pos, (block, name)) in partition.blocks.iter().zip(&partition.names).enumerate() {
            if remaining.iter().all(|&r| r == 0) {
                break;
            }
            let Some(name) = name else { continue };
            let naming = name.outputs();
            let sub = induced_subnetwork(&cur, &naming)?;
            let local_blocks = local_blocks(&sub.network);
            // the block itself is the local block holding its first input
            let first_local = sub.input_map.binary_search(&block.inputs[0]).expect("block lies in its naming subnetwork");
            let own = local_blocks.iter().position(|b| b.contains(&first_local)).expect("local block");
            let spaces = m - sub.network.num_inputs();
            let options = block_candidates(&local_blocks, own, &totals, &remaining, spaces, &sub.network, fam);
            let mut query_outputs = naming.clone();
            query_outputs.push(j);
            let (idx, round) = session.round(j, &query_outputs, Some(pos), options.len(), true, |i| {
                extend_with_output(&sub.network, &local_blocks, weights, &totals, &options[i])
            })?;
            rounds.push(round);
            let chosen = &options[idx];
            let mut members = block.inputs.iter();
            for w in 0..ell {
                let c = chosen[own * ell + w];
                for _ in 0..c {
                    let &i = members.next().ok_or_else(|| Error::InconsistentCounts {
                        output: j,
                        detail: format!("block {pos} has only {} inputs", block.inputs.len()),
                    })?;
                    assigned.insert(i, weights[w].clone());
                }
                remaining[w] = remaining[w].checked_sub(c).ok_or_else(|| Error::InconsistentCounts {
                    output: j,
                    detail: format!("block {pos} claims {c} parents of weight {}", format_rational(&weights[w])),
                })?;
            }
        }

        // whatever is left comes from inputs no earlier output uses
        let spare: Vec<usize> = partition.disconnected().map(|d| partition.blocks[d].inputs.clone()).unwrap_or_default();
        let needed: usize = remaining.iter().sum();
        if needed > spare.len() {
            return Err(Error::InconsistentCounts {
                output: j,
                detail: format!("{needed} parents left for {} unused inputs", spare.len()),
            });
        }
        let mut fresh = spare.into_iter();
        for (w, &c) in remaining.iter().enumerate() {
            for _ in 0..c {
                assigned.insert(fresh.next().expect("checked above"), weights[w].clone());
            }
        }
        cur.push_output(assigned)?;
        let blocks_after = named_blocks(&cur);
        trace.push(OutputTrace { output: j, totals, blocks_before, blocks_after, rounds });
    }
    Ok(session.finish(cur, trace, started))
}

fn named_blocks(net: &NoisyOrNetwork) -> usize {
    basic_blocks(net).names.iter().filter(|n| n.is_some()).count()
}

fn weight_totals(fam: &NetworkFamily, parents: &BTreeMap<usize, Rational>) -> Vec<usize> {
    fam.weight_values().iter().map(|w| parents.values().filter(|v| *v == w).count()).collect()
}

/// Per-weight parent counts a single output may have, by total then
/// lexicographically.
fn total_candidates(fam: &NetworkFamily, m: usize) -> Vec<Vec<usize>> {
    let weights = fam.weight_values();
    let counted: Vec<bool> = weights.iter().map(|w| fam.counts_toward_fan_in(w)).collect();
    let k = fam.fan_in_k();
    let mut out = Vec::new();
    let mut cur = vec![0usize; weights.len()];
    fn rec(pos: usize, cur: &mut Vec<usize>, counted: &[bool], k: usize, m: usize, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        let used: usize = cur[..pos].iter().sum();
        let used_counted: usize = cur[..pos].iter().zip(counted).filter(|(_, c)| **c).map(|(v, _)| v).sum();
        let cap = if counted[pos] { (k - used_counted).min(m - used) } else { m - used };
        for c in 0..=cap {
            cur[pos] = c;
            rec(pos + 1, cur, counted, k, m, out);
        }
        cur[pos] = 0;
    }
    rec(0, &mut cur, &counted, k, m, &mut out);
    out.retain(|c| {
        let mut parents = BTreeMap::new();
        let mut i = 0;
        for (w, &n) in weights.iter().zip(c) {
            for _ in 0..n {
                parents.insert(i, w.clone());
                i += 1;
            }
        }
        let mut net = NoisyOrNetwork::empty(i, 0);
        net.push_output(parents).is_ok() && validate(&net, fam).is_valid()
    });
    out.sort_by_key(|c| c.iter().sum::<usize>());
    out
}

// Inputs of `net` grouped by signature, ordered by smallest member.
fn local_blocks(net: &NoisyOrNetwork) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<Signature, Vec<usize>> = BTreeMap::new();
    for (i, s) in net.signatures().into_iter().enumerate() {
        groups.entry(s).or_default().push(i);
    }
    let mut blocks: Vec<Vec<usize>> = groups.into_values().collect();
    blocks.sort_by_key(|b| b[0]);
    blocks
}

/// Count vectors `n[b * l + w]`: parents of weight `w` taken from local block
/// `b`. Within each weight the counts stay within the output's total, the
/// named block `own` stays within what earlier blocks left, and the rest
/// (fresh inputs) fits into the `spaces` inputs outside the subnetwork.
fn block_candidates(
    blocks: &[Vec<usize>],
    own: usize,
    totals: &[usize],
    remaining: &[usize],
    spaces: usize,
    sub: &NoisyOrNetwork,
    fam: &NetworkFamily,
) -> Vec<Vec<usize>> {
    let ell = totals.len();
    let items = blocks.len() * ell;
    let mut out = Vec::new();
    let mut cur = vec![0usize; items];
    let mut used_w = vec![0usize; ell];
    let mut used_b = vec![0usize; blocks.len()];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        item: usize,
        cur: &mut [usize],
        used_w: &mut [usize],
        used_b: &mut [usize],
        blocks: &[Vec<usize>],
        own: usize,
        totals: &[usize],
        remaining: &[usize],
        spaces: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        let ell = totals.len();
        if item == cur.len() {
            let fresh: usize = totals.iter().zip(used_w.iter()).map(|(t, u)| t - u).sum();
            if fresh <= spaces {
                out.push(cur.to_vec());
            }
            return;
        }
        let (b, w) = (item / ell, item % ell);
        let mut cap = (totals[w] - used_w[w]).min(blocks[b].len() - used_b[b]);
        if b == own {
            cap = cap.min(remaining[w]);
        }
        for c in 0..=cap {
            cur[item] = c;
            used_w[w] += c;
            used_b[b] += c;
            rec(item + 1, cur, used_w, used_b, blocks, own, totals, remaining, spaces, out);
            used_w[w] -= c;
            used_b[b] -= c;
        }
        cur[item] = 0;
    }
    rec(0, &mut cur, &mut used_w, &mut used_b, blocks, own, totals, remaining, spaces, &mut out);
    if fam.subclass() == Subclass::PerInputWeight || fam.subclass() == Subclass::PerOutputWeight {
        let weights = fam.weight_values();
        out.retain(|counts| validate(&extend_with_output(sub, blocks, weights, totals, counts), fam).is_valid());
    }
    out
}

/// `sub` plus one more output wired per `counts`, with fresh inputs appended.
fn extend_with_output(
    sub: &NoisyOrNetwork,
    blocks: &[Vec<usize>],
    weights: &[Rational],
    totals: &[usize],
    counts: &[usize],
) -> NoisyOrNetwork {
    let ell = weights.len();
    let mut parents = BTreeMap::new();
    let mut from_sub = vec![0usize; ell];
    for (b, members) in blocks.iter().enumerate() {
        let mut it = members.iter();
        for w in 0..ell {
            let c = counts[b * ell + w];
            from_sub[w] += c;
            for _ in 0..c {
                parents.insert(*it.next().expect("count within block"), weights[w].clone());
            }
        }
    }
    let mut next = sub.num_inputs();
    for w in 0..ell {
        for _ in 0..totals[w] - from_sub[w] {
            parents.insert(next, weights[w].clone());
            next += 1;
        }
    }
    let mut net = sub.padded(next).expect("growing");
    net.push_output(parents).expect("valid wiring");
    net
}

fn lex_subsets(m: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(m: usize, size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(m, size, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(m, size, 0, &mut cur, &mut out);
    out
}

fn for_each_assignment<F: FnMut(&[Rational])>(values: &[Rational], len: usize, mut f: F) {
    let mut idx = vec![0usize; len];
    loop {
        let ws: Vec<Rational> = idx.iter().map(|&i| values[i].clone()).collect();
        f(&ws);
        let mut p = len;
        loop {
            if p == 0 {
                return;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < values.len() {
                break;
            }
            idx[p] = 0;
        }
    }
}

/// Where the learner's draws come from.
pub enum LearnData {
    Samples(SampleSet),
    /// Draws produced on demand from a hidden network; the learner never sees
    /// its structure.
    Live { target: NoisyOrNetwork, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    pub reconstruction: ReconstructionConfig,
    pub bias: BiasSetting,
    pub alpha: f64,
    pub delta: f64,
    /// With live data, draw a fresh sample per query instead of one shared set.
    pub fresh_per_query: bool,
}

impl LearnConfig {
    /// `delta / (2 m n k^(2k) l^k)`
    pub fn delta_per_query(&self) -> f64 {
        self.delta / (2.0 * self.reconstruction.query_bound().max(1) as f64)
    }

    /// Draws needed so that every table entry of every query is within
    /// `alpha / 4`.
    pub fn sample_size(&self) -> Result<usize> {
        required_sample_size(self.alpha, self.delta_per_query(), self.reconstruction.family.fan_in_k() + 1)
    }
}

/// Learns the structure from observed draws with the statistical oracle.
pub fn end_to_end_learn(data: LearnData, cfg: &LearnConfig) -> Result<ReconstructionReport> {
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta {} must lie in (0, 1)", cfg.delta)));
    }
    if cfg.bias.p_f64() >= 1.0 {
        return Err(Error::DegenerateData("input bias 1 keeps every output at 0".into()));
    }
    let n = cfg.sample_size()?;
    let budget = SeqBudget::new(cfg.alpha, cfg.delta_per_query(), n)?;
    let mut warnings = Vec::new();
    let (source, distinct) = match data {
        LearnData::Samples(set) => {
            if set.num_outputs() != cfg.reconstruction.num_outputs {
                return Err(Error::InvalidArgument(format!(
                    "samples have {} outputs, expected {}",
                    set.num_outputs(),
                    cfg.reconstruction.num_outputs
                )));
            }
            if set.bias() != &cfg.bias {
                warnings.push(format!("sample header bias {} differs from configured {}", set.bias(), cfg.bias));
            }
            if set.len() < n {
                return Err(Error::InsufficientSamples { needed: n, available: set.len() });
            }
            let len = set.len();
            (SampleSource::Fixed(set), Some(len))
        }
        LearnData::Live { target, seed } => {
            if target.num_outputs() != cfg.reconstruction.num_outputs {
                return Err(Error::InvalidArgument("live target has the wrong output count".into()));
            }
            if cfg.fresh_per_query {
                (SampleSource::Fresh { target, seed }, None)
            } else {
                (SampleSource::Fixed(sample(&target, &cfg.bias, n, seed)), Some(n))
            }
        }
    };
    let oracle = StatisticalOracle::new(source, cfg.bias.clone(), budget)?;
    let mut report = run(&oracle, &cfg.reconstruction)?;
    report.regime = if cfg.reconstruction.family.ell() == 1 {
        Regime::Guaranteed
    } else {
        warnings.push("family may lack unique polynomials; result is best-effort".into());
        Regime::BestEffort
    };
    report.samples_used = distinct.unwrap_or(report.samples_used);
    report.alpha = Some(cfg.alpha);
    report.delta_per_query = Some(budget.delta_per_query);
    report.sample_size = Some(n);
    warnings.append(&mut report.warnings);
    report.warnings = warnings;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{subset_zero_table, Limits};
    use crate::network::{random_network, structurally_equivalent};
    use crate::rational::ratio;
    use crate::seq::{DistributionalOracle, StructuralOracle};
    use crate::subset;

    fn one_weight(k: usize) -> NetworkFamily {
        NetworkFamily::one_weight(k, ratio(1, 2)).unwrap()
    }

    #[test]
    fn simple_single_output_two_parents() {
        let target = NoisyOrNetwork::from_edges(3, 1, [(0, 0, ratio(1, 2)), (1, 0, ratio(1, 2))]).unwrap();
        let mut cfg = ReconstructionConfig::new(3, 1, one_weight(2));
        cfg.variant = Variant::Simple;
        let oracle = StructuralOracle::new(target.clone());
        let report = run(&oracle, &cfg).unwrap();
        assert_eq!(report.recovered.fan_in(0), 2);
        assert!(report.recovered.parents(0).values().all(|w| *w == ratio(1, 2)));
        assert!(structurally_equivalent(&report.recovered, &target));
    }

    #[test]
    fn empty_target_needs_only_empty_wirings() {
        let target = NoisyOrNetwork::empty(4, 3);
        let mut cfg = ReconstructionConfig::new(4, 3, one_weight(2));
        cfg.variant = Variant::Simple;
        let report = run(&StructuralOracle::new(target.clone()), &cfg).unwrap();
        assert_eq!(report.recovered, target);
        assert_eq!(report.seq_count, 3);
        cfg.variant = Variant::BasicBlock;
        let report = run(&StructuralOracle::new(target.clone()), &cfg).unwrap();
        assert_eq!(report.recovered, target);
        assert_eq!(report.seq_count, 3);
    }

    #[test]
    fn both_variants_recover_random_targets() {
        for seed in 0..30 {
            let k = 1 + (seed as usize % 2);
            let fam = one_weight(k);
            let target = random_network(&fam, 5, 3, seed).unwrap();
            for variant in [Variant::Simple, Variant::BasicBlock] {
                let mut cfg = ReconstructionConfig::new(5, 3, fam.clone());
                cfg.variant = variant;
                let report = run(&StructuralOracle::new(target.clone()), &cfg).unwrap();
                assert!(structurally_equivalent(&report.recovered, &target), "seed {seed} {variant}");
                if variant == Variant::BasicBlock {
                    assert!(report.max_query_outputs <= k + 1);
                    assert!(report.seq_count as u128 <= cfg.query_bound());
                }
            }
        }
    }

    #[test]
    fn basic_block_handles_several_weights() {
        let fam = NetworkFamily::general(3, vec![ratio(1, 3), ratio(1, 2)]).unwrap();
        for seed in 0..40 {
            let target = random_network(&fam, 9, 7, seed).unwrap();
            let cfg = ReconstructionConfig::new(9, 7, fam.clone());
            let report = reconstruct(&StructuralOracle::new(target.clone()), &cfg).unwrap();
            assert!(structurally_equivalent(&report.recovered, &target), "seed {seed}");
            assert!(report.max_query_outputs <= 4);
            assert!(report.seq_count as u128 <= cfg.query_bound());
            // each output's committed wiring survives later steps
            for (t, out) in report.trace.iter().zip(0..) {
                assert_eq!(t.output, out);
            }
        }
    }

    #[test]
    fn distributional_oracle_drives_reconstruction() {
        let fam = one_weight(2);
        let bias = BiasSetting::new(ratio(1, 3)).unwrap();
        for seed in 0..10 {
            let target = random_network(&fam, 6, 4, seed).unwrap();
            let cfg = ReconstructionConfig::new(6, 4, fam.clone());
            let report = reconstruct(&DistributionalOracle::new(target.clone(), bias.clone()), &cfg).unwrap();
            assert!(structurally_equivalent(&report.recovered, &target), "seed {seed}");
            for y in subset::subsets_up_to(4, 3) {
                let a = subset_zero_table(&report.recovered, &y, &bias, &Limits::default()).unwrap();
                let b = subset_zero_table(&target, &y, &bias, &Limits::default()).unwrap();
                assert_eq!(a.values, b.values);
            }
        }
    }

    #[test]
    fn rejecting_oracle_surfaces_failure() {
        struct Never;
        impl SeqOracle for Never {
            fn query(&self, _: &SeqQuery) -> Result<bool> {
                Ok(false)
            }
            fn stats(&self) -> crate::seq::SeqStats {
                Default::default()
            }
            fn name(&self) -> &'static str {
                "never"
            }
        }
        let mut cfg = ReconstructionConfig::new(3, 2, one_weight(1));
        cfg.infer_last = false;
        assert!(matches!(reconstruct(&Never, &cfg), Err(Error::NoCandidateAccepted { output: 0, .. })));
        cfg.variant = Variant::Simple;
        assert!(matches!(run(&Never, &cfg), Err(Error::NoCandidateAccepted { output: 0, .. })));
    }

    #[test]
    fn query_budget_is_enforced() {
        let fam = one_weight(2);
        let target = random_network(&fam, 6, 4, 1).unwrap();
        let mut cfg = ReconstructionConfig::new(6, 4, fam);
        cfg.query_budget = Some(2);
        assert!(matches!(
            reconstruct(&StructuralOracle::new(target), &cfg),
            Err(Error::QueryBudgetExceeded(2))
        ));
    }

    #[test]
    fn statistical_learning_recovers_small_target() {
        let fam = one_weight(2);
        let target = random_network(&fam, 4, 3, 7).unwrap();
        let cfg = LearnConfig {
            reconstruction: ReconstructionConfig::new(4, 3, fam),
            bias: BiasSetting::new(ratio(1, 2)).unwrap(),
            alpha: 0.05,
            delta: 0.05,
            fresh_per_query: false,
        };
        let report = end_to_end_learn(LearnData::Live { target: target.clone(), seed: 11 }, &cfg).unwrap();
        assert!(structurally_equivalent(&report.recovered, &target));
        assert_eq!(report.regime, Regime::Guaranteed);
        assert_eq!(report.samples_used, cfg.sample_size().unwrap());
    }

    #[test]
    fn bias_one_is_degenerate() {
        let fam = one_weight(2);
        let target = random_network(&fam, 4, 3, 7).unwrap();
        let cfg = LearnConfig {
            reconstruction: ReconstructionConfig::new(4, 3, fam),
            bias: BiasSetting::new(ratio(1, 1)).unwrap(),
            alpha: 0.05,
            delta: 0.05,
            fresh_per_query: false,
        };
        assert!(matches!(end_to_end_learn(LearnData::Live { target, seed: 1 }, &cfg), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn bound_formula() {
        assert_eq!(query_bound(6, 5, 2, 1), 6 * 5 * 16);
        assert_eq!(query_bound(10, 8, 3, 2), 10 * 8 * 729 * 8);
        assert_eq!(query_bound(3, 2, 0, 1), 6);
    }
}
