//! Noisy-OR networks, network families, structural equivalence and basic blocks.
//!
//! A network stores only its edges. An absent `(input, output)` pair means the
//! weight is 1, i.e. the input does not influence the output; every stored
//! weight is strictly below 1.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, format_rational, Rational};

pub const FORMAT_VERSION: u32 = 1;

/// The outputs an input influences, with the weight on each edge, sorted by
/// output index. Two inputs are interchangeable iff their signatures agree.
pub type Signature = Vec<(usize, Rational)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "NetworkFile", try_from = "NetworkFile")]
pub struct NoisyOrNetwork {
    num_inputs: usize,
    num_outputs: usize,
    /// `parents[j]` maps each input connected to output `j` to its weight.
    parents: Vec<BTreeMap<usize, Rational>>,
}

impl NoisyOrNetwork {
    /// A network with no edges.
    pub fn empty(num_inputs: usize, num_outputs: usize) -> Self {
        NoisyOrNetwork {
            num_inputs,
            num_outputs,
            parents: vec![BTreeMap::new(); num_outputs],
        }
    }

    pub fn from_edges<I>(num_inputs: usize, num_outputs: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Rational)>,
    {
        let mut net = Self::empty(num_inputs, num_outputs);
        for (i, j, w) in edges {
            if net.weight(i, j).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate edge ({i}, {j})")));
            }
            net.set_edge(i, j, w)?;
        }
        Ok(net)
    }

    /// Builds a network whose inputs carry the given signatures, in order.
    pub fn from_signatures(num_outputs: usize, signatures: &[Signature]) -> Result<Self> {
        let mut net = Self::empty(signatures.len(), num_outputs);
        for (i, sig) in signatures.iter().enumerate() {
            for (j, w) in sig {
                net.set_edge(i, *j, w.clone())?;
            }
        }
        Ok(net)
    }

    /// Sets the weight of edge `(input, output)`. A weight of exactly 1 removes
    /// the edge.
    pub fn set_edge(&mut self, input: usize, output: usize, weight: Rational) -> Result<()> {
        if input >= self.num_inputs || output >= self.num_outputs {
            return Err(Error::InvalidNetwork(format!(
                "edge ({input}, {output}) out of range for {} inputs x {} outputs",
                self.num_inputs, self.num_outputs
            )));
        }
        if weight.is_negative() || weight > Rational::one() {
            return Err(Error::InvalidNetwork(format!(
                "weight {} on edge ({input}, {output}) outside [0, 1]",
                format_rational(&weight)
            )));
        }
        if weight.is_one() {
            self.parents[output].remove(&input);
        } else {
            self.parents[output].insert(input, weight);
        }
        Ok(())
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    pub fn weight(&self, input: usize, output: usize) -> Option<&Rational> {
        self.parents.get(output)?.get(&input)
    }

    /// Parents of `output` (the set S_j) with their weights.
    pub fn parents(&self, output: usize) -> &BTreeMap<usize, Rational> {
        &self.parents[output]
    }

    pub fn fan_in(&self, output: usize) -> usize {
        self.parents[output].len()
    }

    pub fn max_fan_in(&self) -> usize {
        self.parents.iter().map(BTreeMap::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(BTreeMap::len).sum()
    }

    /// All edges as `(input, output, weight)`, sorted by input then output.
    pub fn edges(&self) -> Vec<(usize, usize, Rational)> {
        let mut edges: Vec<_> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(j, ps)| ps.iter().map(move |(&i, w)| (i, j, w.clone())))
            .collect();
        edges.sort_by_key(|e| (e.0, e.1));
        edges
    }

    /// Signature of every input (the set T_i with weights).
    pub fn signatures(&self) -> Vec<Signature> {
        let mut sigs = vec![Vec::new(); self.num_inputs];
        for (j, ps) in self.parents.iter().enumerate() {
            for (&i, w) in ps {
                sigs[i].push((j, w.clone()));
            }
        }
        sigs
    }

    pub fn signature(&self, input: usize) -> Signature {
        self.parents
            .iter()
            .enumerate()
            .filter_map(|(j, ps)| ps.get(&input).map(|w| (j, w.clone())))
            .collect()
    }

    /// Outputs influenced by `input` (the set T_i).
    pub fn influenced(&self, input: usize) -> Vec<usize> {
        self.signature(input).into_iter().map(|(j, _)| j).collect()
    }

    /// Sorted multiset of input signatures; equal forms iff structurally equivalent
    /// (given equal output counts).
    pub fn canonical_form(&self) -> Vec<Signature> {
        let mut sigs = self.signatures();
        sigs.sort();
        sigs
    }

    /// Canonical form ignoring inputs connected to nothing.
    pub fn connected_canonical_form(&self) -> Vec<Signature> {
        let mut sigs: Vec<_> = self.signatures().into_iter().filter(|s| !s.is_empty()).collect();
        sigs.sort();
        sigs
    }

    /// Distinct weights used anywhere in the network.
    pub fn weights_used(&self) -> BTreeSet<Rational> {
        self.parents.iter().flat_map(|ps| ps.values().cloned()).collect()
    }

    /// Renames inputs: input `i` becomes `perm[i]`.
    pub fn permute_inputs(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.num_inputs {
            return Err(Error::InvalidArgument("permutation length mismatch".into()));
        }
        let mut net = Self::empty(self.num_inputs, self.num_outputs);
        for (i, j, w) in self.edges() {
            net.set_edge(perm[i], j, w)?;
        }
        Ok(net)
    }

    /// Same edges, with additional disconnected inputs appended up to `num_inputs`.
    pub fn padded(&self, num_inputs: usize) -> Result<Self> {
        if num_inputs < self.num_inputs {
            return Err(Error::InvalidArgument(format!(
                "cannot pad {} inputs down to {num_inputs}",
                self.num_inputs
            )));
        }
        Ok(NoisyOrNetwork {
            num_inputs,
            num_outputs: self.num_outputs,
            parents: self.parents.clone(),
        })
    }

    /// Network on the first `count` outputs, all inputs kept.
    pub fn output_prefix(&self, count: usize) -> Self {
        NoisyOrNetwork {
            num_inputs: self.num_inputs,
            num_outputs: count,
            parents: self.parents[..count].to_vec(),
        }
    }

    /// Appends a new output wired to `parents`.
    pub fn push_output(&mut self, parents: BTreeMap<usize, Rational>) -> Result<()> {
        for (&i, w) in &parents {
            if i >= self.num_inputs || w.is_negative() || *w >= Rational::one() {
                return Err(Error::InvalidNetwork(format!(
                    "bad parent {i} with weight {}",
                    format_rational(w)
                )));
            }
        }
        self.parents.push(parents);
        self.num_outputs += 1;
        Ok(())
    }

    pub fn to_file(&self) -> NetworkFile {
        NetworkFile {
            format_version: FORMAT_VERSION,
            num_inputs: self.num_inputs,
            num_outputs: self.num_outputs,
            edges: self
                .edges()
                .into_iter()
                .map(|(input, output, weight)| EdgeRecord { input, output, weight })
                .collect(),
        }
    }

    pub fn from_file(file: NetworkFile) -> Result<Self> {
        if file.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported network format_version {}",
                file.format_version
            )));
        }
        if let Some(e) = file.edges.iter().find(|e| e.weight.is_one()) {
            return Err(Error::InvalidNetwork(format!(
                "edge ({}, {}) has weight 1; missing edges are omitted",
                e.input, e.output
            )));
        }
        let edges = file.edges.into_iter().map(|e| (e.input, e.output, e.weight));
        Self::from_edges(file.num_inputs, file.num_outputs, edges)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("network serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(s)?;
        Self::from_file(file)
    }
}

impl fmt::Display for NoisyOrNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "noisy-OR network: {} inputs, {} outputs", self.num_inputs, self.num_outputs)?;
        for (j, ps) in self.parents.iter().enumerate() {
            let list: Vec<String> = ps
                .iter()
                .map(|(i, w)| format!("X{i}:{}", format_rational(w)))
                .collect();
            writeln!(f, "  Y{j} <- [{}]", list.join(", "))?;
        }
        Ok(())
    }
}

impl From<NoisyOrNetwork> for NetworkFile {
    fn from(net: NoisyOrNetwork) -> Self {
        net.to_file()
    }
}

impl TryFrom<NetworkFile> for NoisyOrNetwork {
    type Error = Error;

    fn try_from(file: NetworkFile) -> Result<Self> {
        NoisyOrNetwork::from_file(file)
    }
}

/// On-disk representation of a network.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkFile {
    pub format_version: u32,
    pub num_inputs: usize,
    pub num_outputs: usize,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub input: usize,
    pub output: usize,
    #[serde(with = "rational::serde_str")]
    pub weight: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subclass {
    General,
    OneWeightValue,
    PerOutputWeight,
    PerInputWeight,
    TwoValueWeakStrong,
}

impl Subclass {
    pub fn as_str(self) -> &'static str {
        match self {
            Subclass::General => "general",
            Subclass::OneWeightValue => "one-weight-value",
            Subclass::PerOutputWeight => "per-output-weight",
            Subclass::PerInputWeight => "per-input-weight",
            Subclass::TwoValueWeakStrong => "two-value-weak-strong",
        }
    }
}

impl std::str::FromStr for Subclass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "general" => Subclass::General,
            "one-weight-value" | "one-weight" => Subclass::OneWeightValue,
            "per-output-weight" => Subclass::PerOutputWeight,
            "per-input-weight" => Subclass::PerInputWeight,
            "two-value-weak-strong" | "weak-strong" => Subclass::TwoValueWeakStrong,
            other => return Err(Error::Parse(format!("unknown subclass {other:?}"))),
        })
    }
}

impl fmt::Display for Subclass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The restriction triple: fan-in bound, allowed weights, subclass.
///
/// Weight values are kept sorted ascending without duplicates; that order is
/// the canonical weight order used by every enumeration. For the weak/strong
/// subclass the smaller value is the strong weight, and the fan-in bound
/// applies only to strong edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FamilyFile", into = "FamilyFile")]
pub struct NetworkFamily {
    fan_in_k: usize,
    weight_values: Vec<Rational>,
    beta: Option<Rational>,
    subclass: Subclass,
}

impl NetworkFamily {
    pub fn new(
        fan_in_k: usize,
        weight_values: Vec<Rational>,
        beta: Option<Rational>,
        subclass: Subclass,
    ) -> Result<Self> {
        let mut values = weight_values;
        values.sort();
        values.dedup();
        if values.is_empty() {
            return Err(Error::InvalidFamily("weight set is empty".into()));
        }
        for v in &values {
            if v.is_negative() || *v >= Rational::one() {
                return Err(Error::InvalidFamily(format!(
                    "weight {} outside [0, 1); 1 encodes a missing edge",
                    format_rational(v)
                )));
            }
        }
        if let Some(b) = &beta {
            if !b.is_positive() || *b > Rational::one() {
                return Err(Error::InvalidFamily(format!("beta {} outside (0, 1]", format_rational(b))));
            }
            if let Some(v) = values.iter().find(|v| !(*v / b).is_integer()) {
                return Err(Error::InvalidFamily(format!(
                    "weight {} is not a multiple of beta {}",
                    format_rational(v),
                    format_rational(b)
                )));
            }
        }
        match subclass {
            Subclass::OneWeightValue if values.len() != 1 => {
                return Err(Error::InvalidFamily("one-weight-value family needs exactly one weight".into()))
            }
            Subclass::TwoValueWeakStrong if values.len() != 2 => {
                return Err(Error::InvalidFamily("weak/strong family needs exactly two weights".into()))
            }
            _ => {}
        }
        Ok(NetworkFamily { fan_in_k, weight_values: values, beta, subclass })
    }

    pub fn one_weight(fan_in_k: usize, weight: Rational) -> Result<Self> {
        Self::new(fan_in_k, vec![weight], None, Subclass::OneWeightValue)
    }

    pub fn general(fan_in_k: usize, weights: Vec<Rational>) -> Result<Self> {
        Self::new(fan_in_k, weights, None, Subclass::General)
    }

    pub fn fan_in_k(&self) -> usize {
        self.fan_in_k
    }

    pub fn weight_values(&self) -> &[Rational] {
        &self.weight_values
    }

    /// Number of weight values (ℓ).
    pub fn ell(&self) -> usize {
        self.weight_values.len()
    }

    pub fn beta(&self) -> Option<&Rational> {
        self.beta.as_ref()
    }

    pub fn subclass(&self) -> Subclass {
        self.subclass
    }

    /// Whether an edge with this weight counts toward the fan-in bound.
    pub fn counts_toward_fan_in(&self, weight: &Rational) -> bool {
        match self.subclass {
            Subclass::TwoValueWeakStrong => *weight == self.weight_values[0],
            _ => true,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("family serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyFile {
    pub fan_in_k: usize,
    #[serde(with = "rational::serde_str_vec")]
    pub weight_values: Vec<Rational>,
    #[serde(default, with = "rational::serde_str_opt", skip_serializing_if = "Option::is_none")]
    pub beta: Option<Rational>,
    pub subclass: Subclass,
}

impl TryFrom<FamilyFile> for NetworkFamily {
    type Error = Error;

    fn try_from(f: FamilyFile) -> Result<Self> {
        NetworkFamily::new(f.fan_in_k, f.weight_values, f.beta, f.subclass)
    }
}

impl From<NetworkFamily> for FamilyFile {
    fn from(f: NetworkFamily) -> Self {
        FamilyFile {
            fan_in_k: f.fan_in_k,
            weight_values: f.weight_values,
            beta: f.beta,
            subclass: f.subclass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    FanInExceeded { output: usize, count: usize, limit: usize },
    WeightNotInFamily { input: usize, output: usize, weight: Rational },
    Subclass(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FanInExceeded { output, count, limit } => {
                write!(f, "fan-in exceeded at output {output} ({count} > {limit})")
            }
            Violation::WeightNotInFamily { input, output, weight } => write!(
                f,
                "weight not in A: {} on edge ({input}, {output})",
                format_rational(weight)
            ),
            Violation::Subclass(msg) => write!(f, "subclass violation: {msg}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `net` against every constraint of `fam` and lists all violations.
pub fn validate(net: &NoisyOrNetwork, fam: &NetworkFamily) -> ValidationReport {
    let mut violations = Vec::new();
    for j in 0..net.num_outputs() {
        let count = net.parents(j).values().filter(|w| fam.counts_toward_fan_in(w)).count();
        if count > fam.fan_in_k() {
            violations.push(Violation::FanInExceeded { output: j, count, limit: fam.fan_in_k() });
        }
    }
    for (i, j, w) in net.edges() {
        if !fam.weight_values().contains(&w) {
            violations.push(Violation::WeightNotInFamily { input: i, output: j, weight: w });
        }
    }
    match fam.subclass() {
        Subclass::General | Subclass::TwoValueWeakStrong => {}
        Subclass::OneWeightValue => {
            let used = net.weights_used();
            if used.len() > 1 {
                violations.push(Violation::Subclass(format!(
                    "one-weight-value network uses {} distinct weights",
                    used.len()
                )));
            }
        }
        Subclass::PerOutputWeight => {
            for j in 0..net.num_outputs() {
                let used: BTreeSet<_> = net.parents(j).values().collect();
                if used.len() > 1 {
                    violations.push(Violation::Subclass(format!(
                        "output {j} uses {} distinct weights",
                        used.len()
                    )));
                }
            }
        }
        Subclass::PerInputWeight => {
            for (i, sig) in net.signatures().iter().enumerate() {
                let used: BTreeSet<_> = sig.iter().map(|(_, w)| w).collect();
                if used.len() > 1 {
                    violations.push(Violation::Subclass(format!(
                        "input {i} uses {} distinct weights",
                        used.len()
                    )));
                }
            }
        }
    }
    ValidationReport { violations }
}

/// True iff some renaming of inputs maps `a` onto `b` weight for weight.
pub fn structurally_equivalent(a: &NoisyOrNetwork, b: &NoisyOrNetwork) -> bool {
    a.num_outputs() == b.num_outputs()
        && a.num_inputs() == b.num_inputs()
        && a.canonical_form() == b.canonical_form()
}

/// One basic block: inputs sharing a signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub inputs: Vec<usize>,
    pub signature: Signature,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    /// Inputs connected to `output` with exactly `weight`.
    Member { output: usize, weight: Rational },
    /// Inputs not connected to `output`.
    Absent { output: usize },
}

impl Literal {
    pub fn output(&self) -> usize {
        match self {
            Literal::Member { output, .. } | Literal::Absent { output } => *output,
        }
    }

    pub fn contains(&self, net: &NoisyOrNetwork, input: usize) -> bool {
        match self {
            Literal::Member { output, weight } => net.weight(input, *output) == Some(weight),
            Literal::Absent { output } => net.weight(input, *output).is_none(),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Member { output, weight } => write!(f, "+{output}@{}", format_rational(weight)),
            Literal::Absent { output } => write!(f, "-{output}"),
        }
    }
}

/// A block written as an intersection of parent sets and their complements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockName {
    pub literals: Vec<Literal>,
}

impl BlockName {
    /// Outputs mentioned by the name, ascending.
    pub fn outputs(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.literals.iter().map(Literal::output).collect();
        set.into_iter().collect()
    }

    /// Inputs of `net` satisfying every literal.
    pub fn members(&self, net: &NoisyOrNetwork) -> Vec<usize> {
        (0..net.num_inputs())
            .filter(|&i| self.literals.iter().all(|l| l.contains(net, i)))
            .collect()
    }
}

impl fmt::Display for BlockName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.literals.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicBlockPartition {
    /// Blocks ordered by their smallest input.
    pub blocks: Vec<Block>,
    /// `None` exactly for the block of inputs connected to nothing.
    pub names: Vec<Option<BlockName>>,
}

impl BasicBlockPartition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Index of the disconnected block, if any input is disconnected.
    pub fn disconnected(&self) -> Option<usize> {
        self.blocks.iter().position(|b| b.signature.is_empty())
    }
}

/// Partitions the inputs by signature and names every connected block.
pub fn basic_blocks(net: &NoisyOrNetwork) -> BasicBlockPartition {
    let sigs = net.signatures();
    let mut by_sig: BTreeMap<&Signature, Vec<usize>> = BTreeMap::new();
    for (i, s) in sigs.iter().enumerate() {
        by_sig.entry(s).or_default().push(i);
    }
    let mut blocks: Vec<Block> = by_sig
        .into_iter()
        .map(|(sig, inputs)| Block { inputs, signature: sig.clone() })
        .collect();
    blocks.sort_by_key(|b| b.inputs[0]);
    let names = blocks
        .iter()
        .map(|b| (!b.signature.is_empty()).then(|| greedy_name(net, &b.inputs, &b.signature)))
        .collect();
    BasicBlockPartition { blocks, names }
}

/// Succinct name of a basic block: at most fan-in many literals whose
/// intersection is exactly the block.
pub fn block_name(net: &NoisyOrNetwork, block: &[usize]) -> Result<BlockName> {
    let mut inputs = block.to_vec();
    inputs.sort_unstable();
    inputs.dedup();
    let Some(&first) = inputs.first() else {
        return Err(Error::NotABasicBlock("empty input set".into()));
    };
    if let Some(&bad) = inputs.iter().find(|&&i| i >= net.num_inputs()) {
        return Err(Error::NotABasicBlock(format!("input {bad} out of range")));
    }
    let sig = net.signature(first);
    let sigs = net.signatures();
    for (i, s) in sigs.iter().enumerate() {
        let inside = inputs.binary_search(&i).is_ok();
        if inside != (*s == sig) {
            return Err(Error::NotABasicBlock(format!(
                "input {i} {} the block but {} its signature",
                if inside { "is in" } else { "is not in" },
                if inside { "does not share" } else { "shares" }
            )));
        }
    }
    if sig.is_empty() {
        return Err(Error::UnnamedBlock);
    }
    Ok(greedy_name(net, &inputs, &sig))
}

// Start from the smallest weighted parent set containing the block, then keep
// intersecting with the literal that shrinks the current set the most (ties to
// the lowest output) until only the block remains. Each step removes at least
// one input, so at most |S_j| literals are used.
fn greedy_name(net: &NoisyOrNetwork, block: &[usize], sig: &Signature) -> BlockName {
    let member_set = |j: usize, w: &Rational| -> Vec<usize> {
        net.parents(j).iter().filter(|(_, v)| *v == w).map(|(&i, _)| i).collect()
    };
    let (start_j, start_w) = sig
        .iter()
        .min_by_key(|(j, w)| (member_set(*j, w).len(), *j))
        .expect("nonempty signature");
    let mut literals = vec![Literal::Member { output: *start_j, weight: start_w.clone() }];
    let mut current = member_set(*start_j, start_w);
    let sig_map: BTreeMap<usize, &Rational> = sig.iter().map(|(j, w)| (*j, w)).collect();
    while current.len() > block.len() {
        let mut best: Option<(usize, Literal, Vec<usize>)> = None;
        for j in 0..net.num_outputs() {
            let lit = match sig_map.get(&j) {
                Some(w) => Literal::Member { output: j, weight: (*w).clone() },
                None => Literal::Absent { output: j },
            };
            let next: Vec<usize> = current.iter().copied().filter(|&i| lit.contains(net, i)).collect();
            if next.len() < current.len() && best.as_ref().is_none_or(|(size, _, _)| next.len() < *size) {
                best = Some((next.len(), lit, next));
            }
        }
        let (_, lit, next) = best.expect("a shrinking literal exists while current exceeds the block");
        literals.push(lit);
        current = next;
    }
    BlockName { literals }
}

/// A subnetwork together with the original indices of its inputs and outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedSubnetwork {
    pub network: NoisyOrNetwork,
    /// `input_map[a]` is the original index of subnetwork input `a`.
    pub input_map: Vec<usize>,
    /// `output_map[b]` is the original index of subnetwork output `b`.
    pub output_map: Vec<usize>,
}

/// The outputs `outputs` (in the given order), every input connected to at
/// least one of them, and the edges between.
pub fn induced_subnetwork(net: &NoisyOrNetwork, outputs: &[usize]) -> Result<InducedSubnetwork> {
    let mut seen = BTreeSet::new();
    for &j in outputs {
        if j >= net.num_outputs() {
            return Err(Error::InvalidArgument(format!("output {j} out of range")));
        }
        if !seen.insert(j) {
            return Err(Error::InvalidArgument(format!("output {j} listed twice")));
        }
    }
    let inputs: BTreeSet<usize> = outputs.iter().flat_map(|&j| net.parents(j).keys().copied()).collect();
    let input_map: Vec<usize> = inputs.into_iter().collect();
    let local: BTreeMap<usize, usize> = input_map.iter().enumerate().map(|(a, &i)| (i, a)).collect();
    let mut sub = NoisyOrNetwork::empty(input_map.len(), outputs.len());
    for (b, &j) in outputs.iter().enumerate() {
        sub.parents[b] = net.parents(j).iter().map(|(i, w)| (local[i], w.clone())).collect();
    }
    Ok(InducedSubnetwork { network: sub, input_map, output_map: outputs.to_vec() })
}

/// Seeded random member of `fam` with `m` inputs and `n` outputs.
///
/// Each output's bounded parent set is uniform among all input subsets of size
/// at most k; weights are uniform over the family's values subject to the
/// subclass. Generation uses ChaCha8 seeded through `seed_from_u64`.
pub fn random_network(fam: &NetworkFamily, m: usize, n: usize, seed: u64) -> Result<NoisyOrNetwork> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("random networks need m, n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = fam.weight_values();
    let pick = |rng: &mut ChaCha8Rng| values[rng.gen_range(0..values.len())].clone();
    let network_weight = pick(&mut rng);
    let input_weights: Vec<Rational> = (0..m).map(|_| pick(&mut rng)).collect();
    let k = fam.fan_in_k().min(m);
    // size s is chosen with probability C(m, s) / sum_t C(m, t)
    let mut binoms = vec![1u128; k + 1];
    for s in 1..=k {
        binoms[s] = binoms[s - 1] * (m - s + 1) as u128 / s as u128;
    }
    let total: u128 = binoms.iter().sum();

    let mut net = NoisyOrNetwork::empty(m, n);
    for j in 0..n {
        let mut r = (rng.gen::<u64>() as u128 * total) >> 64;
        let mut size = 0;
        while r >= binoms[size] {
            r -= binoms[size];
            size += 1;
        }
        let mut chosen: Vec<usize> = index::sample(&mut rng, m, size).into_vec();
        chosen.sort_unstable();
        let output_weight = pick(&mut rng);
        for &i in &chosen {
            let w = match fam.subclass() {
                Subclass::General => pick(&mut rng),
                Subclass::OneWeightValue => network_weight.clone(),
                Subclass::PerOutputWeight => output_weight.clone(),
                Subclass::PerInputWeight => input_weights[i].clone(),
                Subclass::TwoValueWeakStrong => values[0].clone(),
            };
            net.set_edge(i, j, w)?;
        }
        if fam.subclass() == Subclass::TwoValueWeakStrong {
            for i in (0..m).filter(|i| !chosen.contains(i)) {
                if rng.gen_bool(0.5) {
                    net.set_edge(i, j, values[1].clone())?;
                }
            }
        }
    }
    debug_assert!(validate(&net, fam).is_valid());
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn half() -> Rational {
        ratio(1, 2)
    }

    fn net(m: usize, n: usize, edges: &[(usize, usize, (i64, i64))]) -> NoisyOrNetwork {
        NoisyOrNetwork::from_edges(m, n, edges.iter().map(|&(i, j, (a, b))| (i, j, ratio(a, b)))).unwrap()
    }

    #[test]
    fn weight_one_is_not_an_edge() {
        let mut n = NoisyOrNetwork::empty(2, 2);
        n.set_edge(0, 1, half()).unwrap();
        n.set_edge(0, 1, ratio(1, 1)).unwrap();
        assert_eq!(n.edge_count(), 0);
        assert!(n.set_edge(2, 0, half()).is_err());
        assert!(n.set_edge(0, 0, ratio(3, 2)).is_err());
    }

    #[test]
    fn validate_reports_each_violation() {
        let fam = NetworkFamily::general(3, vec![half()]).unwrap();
        let ok = net(3, 2, &[(0, 0, (1, 2)), (1, 0, (1, 2)), (2, 1, (1, 2))]);
        assert!(validate(&ok, &fam).is_valid());

        let wide = net(4, 2, &[(0, 1, (1, 2)), (1, 1, (1, 2)), (2, 1, (1, 2)), (3, 1, (1, 2))]);
        let report = validate(&wide, &fam);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].to_string(), "fan-in exceeded at output 1 (4 > 3)");

        let third = net(1, 1, &[(0, 0, (1, 3))]);
        let report = validate(&third, &fam);
        assert!(matches!(report.violations[0], Violation::WeightNotInFamily { .. }));
        assert!(report.violations[0].to_string().starts_with("weight not in A"));

        let one = NetworkFamily::new(3, vec![half(), ratio(1, 3)], None, Subclass::General).unwrap();
        let two_weights = net(2, 1, &[(0, 0, (1, 2)), (1, 0, (1, 3))]);
        assert!(validate(&two_weights, &one).is_valid());
        let one_w = NetworkFamily::one_weight(3, half()).unwrap();
        let report = validate(&two_weights, &one_w);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::Subclass(_))));
    }

    #[test]
    fn family_invariants() {
        assert!(NetworkFamily::general(2, vec![]).is_err());
        assert!(NetworkFamily::general(2, vec![ratio(1, 1)]).is_err());
        assert!(NetworkFamily::new(2, vec![ratio(1, 4), ratio(3, 4)], Some(ratio(1, 4)), Subclass::General).is_ok());
        assert!(NetworkFamily::new(2, vec![ratio(1, 3)], Some(ratio(1, 4)), Subclass::General).is_err());
        assert!(NetworkFamily::new(2, vec![ratio(1, 3), half()], None, Subclass::OneWeightValue).is_err());
        let fam = NetworkFamily::new(2, vec![ratio(1, 4), ratio(3, 4)], Some(ratio(1, 4)), Subclass::General).unwrap();
        assert_eq!(NetworkFamily::from_json(&fam.to_json()).unwrap(), fam);
    }

    #[test]
    fn equivalence_examples() {
        let a = net(2, 2, &[(0, 0, (1, 2)), (1, 1, (1, 3))]);
        let b = net(2, 2, &[(1, 0, (1, 2)), (0, 1, (1, 3))]);
        assert!(structurally_equivalent(&a, &a));
        assert!(structurally_equivalent(&a, &b));
        let c = net(2, 2, &[(1, 0, (1, 2)), (0, 1, (1, 2))]);
        assert!(!structurally_equivalent(&a, &c));
        assert!(!structurally_equivalent(&a, &a.padded(3).unwrap()));
    }

    #[test]
    fn blocks_group_identical_signatures() {
        let n = net(3, 2, &[(0, 0, (1, 2)), (1, 0, (1, 2)), (2, 1, (1, 2))]);
        let p = basic_blocks(&n);
        let sets: Vec<_> = p.blocks.iter().map(|b| b.inputs.clone()).collect();
        assert_eq!(sets, vec![vec![0, 1], vec![2]]);
        assert!(p.disconnected().is_none());

        let empty = NoisyOrNetwork::empty(5, 3);
        let p = basic_blocks(&empty);
        assert_eq!(p.blocks.len(), 1);
        assert_eq!(p.blocks[0].inputs, vec![0, 1, 2, 3, 4]);
        assert_eq!(p.names, vec![None]);
    }

    #[test]
    fn block_name_examples() {
        // S_0 = {0, 1}, S_1 = {1}
        let n = net(2, 2, &[(0, 0, (1, 2)), (1, 0, (1, 2)), (1, 1, (1, 2))]);
        let name = block_name(&n, &[0]).unwrap();
        assert_eq!(
            name.literals,
            vec![Literal::Member { output: 0, weight: half() }, Literal::Absent { output: 1 }]
        );
        assert_eq!(name.to_string(), "[+0@1/2, -1]");

        let whole = net(2, 1, &[(0, 0, (1, 2)), (1, 0, (1, 2))]);
        let name = block_name(&whole, &[0, 1]).unwrap();
        assert_eq!(name.literals, vec![Literal::Member { output: 0, weight: half() }]);

        assert!(matches!(block_name(&n, &[0, 1]), Err(Error::NotABasicBlock(_))));
        let loose = NoisyOrNetwork::empty(2, 1);
        assert!(matches!(block_name(&loose, &[0, 1]), Err(Error::UnnamedBlock)));
    }

    #[test]
    fn weights_split_blocks_with_equal_connectivity() {
        let n = net(2, 1, &[(0, 0, (1, 2)), (1, 0, (1, 3))]);
        let p = basic_blocks(&n);
        assert_eq!(p.len(), 2);
        for (b, name) in p.blocks.iter().zip(&p.names) {
            assert_eq!(name.as_ref().unwrap().members(&n), b.inputs);
        }
    }

    #[test]
    fn induced_subnetwork_examples() {
        let n = net(8, 3, &[(3, 0, (1, 2)), (7, 0, (1, 2)), (1, 1, (1, 2)), (3, 2, (1, 3))]);
        let sub = induced_subnetwork(&n, &[0]).unwrap();
        assert_eq!(sub.network.num_inputs(), 2);
        assert_eq!(sub.network.num_outputs(), 1);
        assert_eq!(sub.input_map, vec![3, 7]);

        let all = induced_subnetwork(&n, &[0, 1, 2]).unwrap();
        assert_eq!(all.network.num_inputs(), 3);
        assert_eq!(all.input_map, vec![1, 3, 7]);
        assert_eq!(all.network.weight(1, 2), Some(&ratio(1, 3)));

        let none = induced_subnetwork(&n, &[]).unwrap();
        assert_eq!((none.network.num_inputs(), none.network.num_outputs()), (0, 0));
        assert!(induced_subnetwork(&n, &[3]).is_err());
    }

    #[test]
    fn random_networks_are_deterministic_and_valid() {
        let fam = NetworkFamily::one_weight(2, half()).unwrap();
        let a = random_network(&fam, 6, 4, 7).unwrap();
        let b = random_network(&fam, 6, 4, 7).unwrap();
        assert_eq!(a, b);
        assert!(validate(&a, &fam).is_valid());
        let differing = (0..100u64)
            .filter(|&s| random_network(&fam, 6, 4, s).unwrap() != random_network(&fam, 6, 4, s + 1).unwrap())
            .count();
        assert!(differing >= 95, "{differing}");
        assert!(random_network(&fam, 0, 3, 1).is_err());
    }

    #[test]
    fn random_networks_respect_each_subclass() {
        let w = vec![ratio(1, 4), half(), ratio(3, 4)];
        for sub in [Subclass::General, Subclass::PerOutputWeight, Subclass::PerInputWeight] {
            let fam = NetworkFamily::new(3, w.clone(), Some(ratio(1, 4)), sub).unwrap();
            for seed in 0..20 {
                let n = random_network(&fam, 7, 5, seed).unwrap();
                assert!(validate(&n, &fam).is_valid(), "{sub} seed {seed}");
            }
        }
        let fam = NetworkFamily::new(2, vec![ratio(1, 10), ratio(9, 10)], None, Subclass::TwoValueWeakStrong).unwrap();
        for seed in 0..20 {
            let n = random_network(&fam, 7, 5, seed).unwrap();
            assert!(validate(&n, &fam).is_valid());
        }
    }

    #[test]
    fn file_format_round_trip() {
        let n = net(3, 2, &[(0, 0, (1, 2)), (2, 1, (0, 1))]);
        let text = n.to_json();
        assert!(text.contains("\"weight\": \"1/2\""));
        assert!(text.contains("\"format_version\": 1"));
        assert_eq!(NoisyOrNetwork::from_json(&text).unwrap(), n);
        let decimal = r#"{"format_version":1,"num_inputs":1,"num_outputs":1,"edges":[{"input":0,"output":0,"weight":"0.25"}]}"#;
        assert_eq!(NoisyOrNetwork::from_json(decimal).unwrap().weight(0, 0), Some(&ratio(1, 4)));
        let one = r#"{"format_version":1,"num_inputs":1,"num_outputs":1,"edges":[{"input":0,"output":0,"weight":"1"}]}"#;
        assert!(NoisyOrNetwork::from_json(one).is_err());
    }
}
