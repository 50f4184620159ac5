use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::enumerate::enumerate_family;
use crate::error::{Error, Result};
use crate::network::{NetworkFamily, NoisyOrNetwork, Signature};
use crate::poly::{q_polynomial, UnivariatePolynomial};
use crate::subset;

#[derive(Clone, Debug, Serialize)]
pub struct UniqueVerdict {
    pub holds: bool,
    /// Two inequivalent networks with identical polynomials on every compared set.
    pub witness: Option<(NoisyOrNetwork, NoisyOrNetwork)>,
    /// Equivalence classes compared.
    pub networks: usize,
    /// Smallest `s` such that output sets of size at most `s` already tell every
    /// pair apart; `None` when the verdict fails.
    pub min_witness_size: Option<usize>,
}

/// Pairwise unique-polynomial check over `nets`, comparing `Q_Y` for every
/// nonempty `Y` with `|Y| <= max_subset` (all outputs when `None`).
pub fn unique_polynomials_among(nets: &[NoisyOrNetwork], max_subset: Option<usize>) -> Result<UniqueVerdict> {
    let Some(first) = nets.first() else {
        return Ok(UniqueVerdict { holds: true, witness: None, networks: 0, min_witness_size: Some(0) });
    };
    let n = first.num_outputs();
    if nets.iter().any(|x| x.num_outputs() != n) {
        return Err(Error::InvalidArgument("networks must share the output count".into()));
    }
    let max_subset = max_subset.unwrap_or(n).min(n);
    let mut classes: BTreeMap<Vec<Signature>, &NoisyOrNetwork> = BTreeMap::new();
    for net in nets {
        classes.entry(net.canonical_form()).or_insert(net);
    }
    let reps: Vec<&NoisyOrNetwork> = classes.into_values().collect();
    let sets: Vec<Vec<usize>> = subset::subsets_up_to(n, max_subset).into_iter().skip(1).collect();
    let keys: Vec<Vec<UnivariatePolynomial>> =
        reps.iter().map(|net| sets.iter().map(|y| q_polynomial(net, y)).collect()).collect();

    let mut seen: HashMap<&[UnivariatePolynomial], usize> = HashMap::new();
    for (idx, key) in keys.iter().enumerate() {
        if let Some(&other) = seen.get(key.as_slice()) {
            return Ok(UniqueVerdict {
                holds: false,
                witness: Some((reps[other].clone(), reps[idx].clone())),
                networks: reps.len(),
                min_witness_size: None,
            });
        }
        seen.insert(key, idx);
    }

    // keys list sets by size, so a prefix covers every set up to a given size
    let mut min_size = max_subset;
    for s in 0..max_subset {
        let len = subset::count_subsets_up_to(n, s) as usize;
        let mut prefixes: HashMap<&[UnivariatePolynomial], ()> = HashMap::new();
        if keys.iter().all(|k| prefixes.insert(&k[..len], ()).is_none()) {
            min_size = s;
            break;
        }
    }
    Ok(UniqueVerdict { holds: true, witness: None, networks: reps.len(), min_witness_size: Some(min_size) })
}

/// Exhaustive unique-polynomial check for every member of `fam` at size `(m, n)`.
pub fn unique_polynomials_check(fam: &NetworkFamily, m: usize, n: usize, budget: usize) -> Result<UniqueVerdict> {
    let nets = enumerate_family(fam, m, n, budget)?;
    unique_polynomials_among(&nets, None)
}
