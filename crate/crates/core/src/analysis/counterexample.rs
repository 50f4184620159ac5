//! Search for structurally inequivalent networks with identical output
//! distributions.
//!
//! Each weight-set choice from the grid defines a general family; members are
//! grouped by their full polynomial key (`Q_Y` for every nonempty `Y`), and a
//! collision between inequivalent members is a counterexample.

use std::collections::{BTreeSet, HashMap};

use super::enumerate::enumerate_family;
use crate::error::{Error, Result};
use crate::network::{NetworkFamily, NoisyOrNetwork, Signature};
use crate::poly::{q_polynomial, UnivariatePolynomial};
use crate::rational::{ratio, Rational};
use crate::subset;

#[derive(Clone, Debug)]
pub struct CounterexampleParams {
    pub num_weights: usize,
    pub max_inputs: usize,
    pub num_outputs: usize,
    pub weight_grid: Vec<Rational>,
    /// Enumeration budget per weight set.
    pub budget: usize,
}

impl Default for CounterexampleParams {
    fn default() -> Self {
        CounterexampleParams {
            num_weights: 3,
            max_inputs: 4,
            num_outputs: 2,
            weight_grid: default_weight_grid(),
            budget: 200_000,
        }
    }
}

/// Powers of 1/2 down to 1/16.
pub fn default_weight_grid() -> Vec<Rational> {
    (1..=4).map(|e| ratio(1, 1 << e)).collect()
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub a: NoisyOrNetwork,
    pub b: NoisyOrNetwork,
    /// The weight values used across the pair.
    pub weights: Vec<Rational>,
}

/// Finds two inequivalent networks on at most `max_inputs` inputs whose
/// polynomials agree on every nonempty output set, together using exactly
/// `num_weights` distinct weights from the grid. Among all such pairs the one
/// sharing the fewest input signatures is returned; `None` if there is none or
/// the budget runs out.
pub fn counterexample_search(params: &CounterexampleParams) -> Result<Option<Counterexample>> {
    let grid: Vec<Rational> = params.weight_grid.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if params.num_weights == 0 || params.num_weights > grid.len() {
        return Err(Error::InvalidArgument(format!(
            "need between 1 and {} weight values, got {}",
            grid.len(),
            params.num_weights
        )));
    }
    if params.num_outputs == 0 {
        return Err(Error::InvalidArgument("need at least one output".into()));
    }
    let sets: Vec<Vec<usize>> =
        subset::subsets_up_to(params.num_outputs, params.num_outputs).into_iter().skip(1).collect();
    let mut best: Option<(usize, Counterexample)> = None;
    for combo in combinations(grid.len(), params.num_weights) {
        let weights: Vec<Rational> = combo.iter().map(|&i| grid[i].clone()).collect();
        let fam = NetworkFamily::general(params.max_inputs, weights.clone())?;
        let nets = match enumerate_family(&fam, params.max_inputs, params.num_outputs, params.budget) {
            Ok(nets) => nets,
            Err(Error::BudgetExceeded(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let mut groups: HashMap<Vec<UnivariatePolynomial>, Vec<usize>> = HashMap::new();
        let mut order = Vec::new();
        for (idx, net) in nets.iter().enumerate() {
            let key: Vec<UnivariatePolynomial> = sets.iter().map(|y| q_polynomial(net, y)).collect();
            let group = groups.entry(key).or_default();
            if group.is_empty() {
                order.push(idx);
            }
            group.push(idx);
        }
        let wanted: BTreeSet<Rational> = weights.iter().cloned().collect();
        for lead in order {
            let key: Vec<UnivariatePolynomial> = sets.iter().map(|y| q_polynomial(&nets[lead], y)).collect();
            let members = &groups[&key];
            for (x, &ia) in members.iter().enumerate() {
                for &ib in &members[x + 1..] {
                    let (a, b) = (&nets[ia], &nets[ib]);
                    let used: BTreeSet<Rational> = a.weights_used().union(&b.weights_used()).cloned().collect();
                    if used != wanted {
                        continue;
                    }
                    let shared = shared_signatures(a, b);
                    if best.as_ref().is_none_or(|(s, _)| shared < *s) {
                        let found = Counterexample { a: a.clone(), b: b.clone(), weights: weights.clone() };
                        best = Some((shared, found));
                    }
                }
            }
        }
    }
    Ok(best.map(|(_, c)| c))
}

// Multiset intersection size of the two signature lists, ignoring empty ones.
fn shared_signatures(a: &NoisyOrNetwork, b: &NoisyOrNetwork) -> usize {
    let mut counts: HashMap<Signature, usize> = HashMap::new();
    for s in a.connected_canonical_form() {
        *counts.entry(s).or_default() += 1;
    }
    let mut shared = 0;
    for s in b.connected_canonical_form() {
        if let Some(c) = counts.get_mut(&s) {
            if *c > 0 {
                *c -= 1;
                shared += 1;
            }
        }
    }
    shared
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(n: usize, r: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, r, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, r, 0, &mut cur, &mut out);
    out
}
