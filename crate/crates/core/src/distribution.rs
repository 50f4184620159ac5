//! Exact output-distribution quantities of a network under a common input bias.
//!
//! The bias `p` is the probability that each hidden input is 0. All results
//! are exact rationals; `*_f64` variants evaluate the same formulas in floating
//! point and agree with the exact path to within 1e-12.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::NoisyOrNetwork;
use crate::rational::{self, format_rational, to_f64, Rational};
use crate::subset::{self, SubsetTable, HARD_SUBSET_CAP};

/// Tolerance of the float path against the exact path.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiasSetting {
    #[serde(with = "rational::serde_str")]
    p: Rational,
}

impl BiasSetting {
    pub fn new(p: Rational) -> Result<Self> {
        if !rational::is_probability(&p) {
            return Err(Error::InvalidArgument(format!("bias {} outside [0, 1]", format_rational(&p))));
        }
        Ok(BiasSetting { p })
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::new(rational::parse_rational(s)?)
    }

    /// Probability that an input is 0.
    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn p_f64(&self) -> f64 {
        to_f64(&self.p)
    }
}

impl std::fmt::Display for BiasSetting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&format_rational(&self.p))
    }
}

/// Enumeration limits; runtime configuration so callers can pin them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Maximum number of inclusion-exclusion terms for one pattern.
    pub pattern_terms: usize,
    pub brute_force_inputs: usize,
    pub brute_force_outputs: usize,
    /// Maximum output-set size for subset tables.
    pub subset_table: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            pattern_terms: 1 << 16,
            brute_force_inputs: 20,
            brute_force_outputs: 16,
            subset_table: HARD_SUBSET_CAP,
        }
    }
}

// Product of the weights on edges from each input into `outputs`; inputs
// without such edges are absent (their factor is 1).
fn products_into<'a, T, F>(net: &'a NoisyOrNetwork, outputs: &[usize], mut mul: F) -> BTreeMap<usize, T>
where
    F: FnMut(Option<T>, &'a Rational) -> T,
{
    let mut acc: BTreeMap<usize, T> = BTreeMap::new();
    for &j in outputs {
        for (&i, w) in net.parents(j) {
            let prev = acc.remove(&i);
            acc.insert(i, mul(prev, w));
        }
    }
    acc
}

/// Probability that every output in `outputs` is 0:
/// the product over inputs of `p + (1 - p) * prod_{j in T_i ∩ Y} w_ij`.
pub fn prob_all_zero(net: &NoisyOrNetwork, outputs: &[usize], bias: &BiasSetting) -> Rational {
    let outputs = subset::normalize(outputs);
    let p = bias.p();
    let q = Rational::one() - p;
    products_into(net, &outputs, |prev, w| match prev {
        Some(acc) => acc * w,
        None => w.clone(),
    })
    .into_values()
    .fold(Rational::one(), |acc, w| acc * (p + &q * w))
}

pub fn prob_all_zero_f64(net: &NoisyOrNetwork, outputs: &[usize], p: f64) -> f64 {
    let outputs = subset::normalize(outputs);
    let q = 1.0 - p;
    products_into(net, &outputs, |prev, w| prev.unwrap_or(1.0) * to_f64(w))
        .into_values()
        .fold(1.0, |acc, w| acc * (p + q * w))
}

/// Probability of a full output pattern by inclusion-exclusion over the
/// all-zero events of supersets of its zero set.
pub fn pattern_probability(net: &NoisyOrNetwork, pattern: &[bool], bias: &BiasSetting, limits: &Limits) -> Result<Rational> {
    if pattern.len() != net.num_outputs() {
        return Err(Error::InvalidArgument(format!(
            "pattern length {} != {} outputs",
            pattern.len(),
            net.num_outputs()
        )));
    }
    let zeros: Vec<usize> = (0..pattern.len()).filter(|&j| !pattern[j]).collect();
    let ones: Vec<usize> = (0..pattern.len()).filter(|&j| pattern[j]).collect();
    let terms = 1u128 << ones.len().min(127);
    if ones.len() >= 127 || terms > limits.pattern_terms as u128 {
        return Err(Error::LimitExceeded {
            what: "inclusion-exclusion",
            requested: terms,
            limit: limits.pattern_terms as u128,
        });
    }
    let mut total = Rational::zero();
    for mask in 0..(1usize << ones.len()) {
        let mut set = zeros.clone();
        set.extend(subset::mask_to_subset(&ones, mask));
        let term = prob_all_zero(net, &set, bias);
        if mask.count_ones() % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total)
}

fn check_table_size(len: usize, limits: &Limits) -> Result<()> {
    let cap = limits.subset_table.min(HARD_SUBSET_CAP);
    if len > cap {
        return Err(Error::LimitExceeded { what: "subset table", requested: len as u128, limit: cap as u128 });
    }
    Ok(())
}

// Per relevant input, the weight product for every subset mask of `outputs`,
// built by extending the mask without its lowest bit.
fn masked_products<T: Clone>(
    net: &NoisyOrNetwork,
    outputs: &[usize],
    one: T,
    weight: impl Fn(&Rational) -> T,
    mul: impl Fn(&T, &T) -> T,
) -> Vec<Vec<T>> {
    let mut per_input: BTreeMap<usize, Vec<Option<T>>> = BTreeMap::new();
    for (pos, &j) in outputs.iter().enumerate() {
        for (&i, w) in net.parents(j) {
            per_input.entry(i).or_insert_with(|| vec![None; outputs.len()])[pos] = Some(weight(w));
        }
    }
    let size = 1usize << outputs.len();
    per_input
        .into_values()
        .map(|ws| {
            let mut table = Vec::with_capacity(size);
            table.push(one.clone());
            for mask in 1..size {
                let low = mask.trailing_zeros() as usize;
                let rest = &table[mask & (mask - 1)];
                let v = match &ws[low] {
                    Some(w) => mul(rest, w),
                    None => rest.clone(),
                };
                table.push(v);
            }
            table
        })
        .collect()
}

/// All-zero probabilities for every subset of `outputs`, indexed by position mask.
pub fn subset_zero_table(
    net: &NoisyOrNetwork,
    outputs: &[usize],
    bias: &BiasSetting,
    limits: &Limits,
) -> Result<SubsetTable<Rational>> {
    check_table_size(outputs.len(), limits)?;
    check_outputs(net, outputs)?;
    let p = bias.p();
    let q = Rational::one() - p;
    let per_input = masked_products(net, outputs, Rational::one(), Rational::clone, |a, b| a * b);
    let values = (0..1usize << outputs.len())
        .map(|mask| per_input.iter().fold(Rational::one(), |acc, t| acc * (p + &q * &t[mask])))
        .collect();
    Ok(SubsetTable { outputs: outputs.to_vec(), values })
}

pub fn subset_zero_table_f64(net: &NoisyOrNetwork, outputs: &[usize], p: f64, limits: &Limits) -> Result<SubsetTable<f64>> {
    check_table_size(outputs.len(), limits)?;
    check_outputs(net, outputs)?;
    let q = 1.0 - p;
    let per_input = masked_products(net, outputs, 1.0, to_f64, |a, b| a * b);
    let values = (0..1usize << outputs.len())
        .map(|mask| per_input.iter().fold(1.0, |acc, t| acc * (p + q * t[mask])))
        .collect();
    Ok(SubsetTable { outputs: outputs.to_vec(), values })
}

fn check_outputs(net: &NoisyOrNetwork, outputs: &[usize]) -> Result<()> {
    if let Some(&j) = outputs.iter().find(|&&j| j >= net.num_outputs()) {
        return Err(Error::InvalidArgument(format!("output {j} out of range")));
    }
    if subset::normalize(outputs).len() != outputs.len() {
        return Err(Error::InvalidArgument("repeated output in subset".into()));
    }
    Ok(())
}

/// Full joint over all outputs from the subset table by Möbius inversion.
/// Index bit `j` of the result is the value of output `j`.
pub fn pattern_table(net: &NoisyOrNetwork, bias: &BiasSetting, limits: &Limits) -> Result<Vec<Rational>> {
    let outputs: Vec<usize> = (0..net.num_outputs()).collect();
    let zero_table = subset_zero_table(net, &outputs, bias, limits)?;
    let n = outputs.len();
    let full = (1usize << n) - 1;
    // g[Z] = sum_{T ⊇ Z} (-1)^{|T \ Z|} Q(T); the pattern with zero set Z has index full ^ Z
    let mut g = zero_table.values;
    for bit in 0..n {
        for mask in 0..=full {
            if mask >> bit & 1 == 0 {
                let hi = g[mask | 1 << bit].clone();
                g[mask] -= hi;
            }
        }
    }
    let mut out = vec![Rational::zero(); full + 1];
    for (zeros, v) in g.into_iter().enumerate() {
        out[full ^ zeros] = v;
    }
    Ok(out)
}

/// Exact joint over output patterns by summing over all 2^m input assignments.
///
/// Independent of the all-zero product formula: each assignment `x` has weight
/// `p^{#zeros} (1-p)^{#ones}` and outputs are conditionally independent with
/// `Pr[Y_j = 0 | x] = prod_{i in S_j} w_ij^{x_i}`. Index bit `j` is output `j`.
///
/// Arithmetic is done on integer numerators over the fixed denominator
/// `b^m * L^E` (p = a/b, every weight = e/L, E = edge count) and reduced once
/// at the end.
pub fn brute_force_joint(net: &NoisyOrNetwork, bias: &BiasSetting, limits: &Limits) -> Result<Vec<Rational>> {
    let m = net.num_inputs();
    let n = net.num_outputs();
    if m > limits.brute_force_inputs {
        return Err(Error::LimitExceeded {
            what: "brute-force inputs",
            requested: m as u128,
            limit: limits.brute_force_inputs as u128,
        });
    }
    if n > limits.brute_force_outputs {
        return Err(Error::LimitExceeded {
            what: "brute-force outputs",
            requested: n as u128,
            limit: limits.brute_force_outputs as u128,
        });
    }
    let to_uint = |v: &BigInt| v.to_biguint().expect("nonnegative");
    let a = to_uint(bias.p().numer());
    let b = to_uint(bias.p().denom());
    let b_minus_a = &b - &a;

    let mut lcm = BigInt::one();
    for (_, _, w) in net.edges() {
        lcm = lcm.lcm(w.denom());
    }
    let scale = |w: &Rational| to_uint(&(w.numer() * (&lcm / w.denom())));
    let l = to_uint(&lcm);
    let parents: Vec<Vec<(usize, BigUint)>> = (0..n)
        .map(|j| net.parents(j).iter().map(|(&i, w)| (i, scale(w))).collect())
        .collect();
    let full_scale: Vec<BigUint> = parents.iter().map(|ps| num_traits::pow(l.clone(), ps.len())).collect();

    let patterns = 1usize << n;
    // acc[z][y]: sum over assignments with z zero inputs of the scaled Pr[y | x]
    let mut acc = vec![vec![BigUint::zero(); patterns]; m + 1];
    let mut cond = vec![BigUint::zero(); patterns];
    for x in 0u64..(1u64 << m) {
        cond.truncate(1);
        cond[0] = BigUint::one();
        for (j, ps) in parents.iter().enumerate() {
            let mut zero = BigUint::one();
            let mut silent = 0;
            for (i, e) in ps {
                if x >> i & 1 == 1 {
                    zero *= e;
                } else {
                    silent += 1;
                }
            }
            zero *= num_traits::pow(l.clone(), silent);
            let one = &full_scale[j] - &zero;
            let half = 1usize << j;
            cond.resize(half * 2, BigUint::zero());
            for y in 0..half {
                cond[y + half] = &cond[y] * &one;
                cond[y] *= &zero;
            }
        }
        let zeros = m - x.count_ones() as usize;
        for (slot, c) in acc[zeros].iter_mut().zip(&cond) {
            *slot += c;
        }
    }

    let mut numer = vec![BigUint::zero(); patterns];
    for (z, row) in acc.iter().enumerate() {
        let weight = num_traits::pow(a.clone(), z) * num_traits::pow(b_minus_a.clone(), m - z);
        for (slot, v) in numer.iter_mut().zip(row) {
            *slot += &weight * v;
        }
    }
    let denom = BigInt::from(num_traits::pow(b, m) * num_traits::pow(l, net.edge_count()));
    Ok(numer.into_iter().map(|v| Rational::new(BigInt::from(v), denom.clone())).collect())
}

/// Marginal all-zero probability of `outputs` read off a joint table.
pub fn marginal_all_zero(joint: &[Rational], outputs: &[usize]) -> Rational {
    let mask: usize = outputs.iter().map(|&j| 1usize << j).sum();
    joint
        .iter()
        .enumerate()
        .filter(|(y, _)| y & mask == 0)
        .fold(Rational::zero(), |acc, (_, v)| acc + v)
}
