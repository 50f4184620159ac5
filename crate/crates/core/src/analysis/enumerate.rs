use crate::error::{Error, Result};
use crate::network::{validate, NetworkFamily, NoisyOrNetwork, Signature};

pub const DEFAULT_ENUMERATION_BUDGET: usize = 200_000;

/// Every member of `fam` with `m` inputs and `n` outputs, one per structural
/// equivalence class. Each class is emitted as the network whose inputs carry
/// the sorted signature multiset, so classes come out in canonical order.
pub fn enumerate_family(fam: &NetworkFamily, m: usize, n: usize, budget: usize) -> Result<Vec<NoisyOrNetwork>> {
    let types = signature_types(fam, n);
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    let mut degree = vec![0usize; n];
    extend(fam, &types, m, n, 0, &mut chosen, &mut degree, &mut out, budget)?;
    Ok(out)
}

// All signatures over n outputs with weights from the family, sorted.
fn signature_types(fam: &NetworkFamily, n: usize) -> Vec<Signature> {
    let mut types: Vec<Signature> = vec![Vec::new()];
    for j in 0..n {
        let mut next = Vec::with_capacity(types.len() * (fam.ell() + 1));
        for t in &types {
            next.push(t.clone());
            for w in fam.weight_values() {
                let mut s = t.clone();
                s.push((j, w.clone()));
                next.push(s);
            }
        }
        types = next;
    }
    types.sort();
    types
}

#[allow(clippy::too_many_arguments)]
fn extend(
    fam: &NetworkFamily,
    types: &[Signature],
    m: usize,
    n: usize,
    from: usize,
    chosen: &mut Vec<usize>,
    degree: &mut [usize],
    out: &mut Vec<NoisyOrNetwork>,
    budget: usize,
) -> Result<()> {
    if chosen.len() == m {
        let sigs: Vec<Signature> = chosen.iter().map(|&t| types[t].clone()).collect();
        let net = NoisyOrNetwork::from_signatures(n, &sigs)?;
        if validate(&net, fam).is_valid() {
            if out.len() >= budget {
                return Err(Error::BudgetExceeded(budget));
            }
            out.push(net);
        }
        return Ok(());
    }
    for t in from..types.len() {
        let counted: Vec<usize> = types[t]
            .iter()
            .filter(|(_, w)| fam.counts_toward_fan_in(w))
            .map(|(j, _)| *j)
            .collect();
        if counted.iter().any(|&j| degree[j] >= fam.fan_in_k()) {
            continue;
        }
        for &j in &counted {
            degree[j] += 1;
        }
        chosen.push(t);
        extend(fam, types, m, n, t, chosen, degree, out, budget)?;
        chosen.pop();
        for &j in &counted {
            degree[j] -= 1;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::structurally_equivalent;
    use crate::rational::ratio;

    #[test]
    fn classes_are_distinct_and_valid() {
        let fam = NetworkFamily::one_weight(2, ratio(1, 2)).unwrap();
        let nets = enumerate_family(&fam, 3, 2, 10_000).unwrap();
        for (a, x) in nets.iter().enumerate() {
            assert!(validate(x, &fam).is_valid());
            for y in &nets[a + 1..] {
                assert!(!structurally_equivalent(x, y));
            }
        }
        // one output, m = 3, k = 2: 0, 1 or 2 parents
        let single = enumerate_family(&fam, 3, 1, 10_000).unwrap();
        assert_eq!(single.len(), 3);
    }

    #[test]
    fn matches_brute_force_count() {
        // every 0/1 matrix of 3 inputs x 2 outputs with column sums <= 2, up to row permutation
        let fam = NetworkFamily::one_weight(2, ratio(0, 1)).unwrap();
        let nets = enumerate_family(&fam, 3, 2, 10_000).unwrap();
        let mut forms = std::collections::BTreeSet::new();
        for bits in 0u32..64 {
            let mut net = NoisyOrNetwork::empty(3, 2);
            for i in 0..3 {
                for j in 0..2 {
                    if bits >> (i * 2 + j) & 1 == 1 {
                        net.set_edge(i, j, ratio(0, 1)).unwrap();
                    }
                }
            }
            if net.max_fan_in() <= 2 {
                forms.insert(net.canonical_form());
            }
        }
        assert_eq!(nets.len(), forms.len());
    }

    #[test]
    fn budget_is_enforced() {
        let fam = NetworkFamily::general(2, vec![ratio(1, 2), ratio(1, 3)]).unwrap();
        assert!(matches!(enumerate_family(&fam, 4, 3, 10), Err(Error::BudgetExceeded(10))));
    }
}
