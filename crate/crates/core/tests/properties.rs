use std::collections::BTreeSet;

use proptest::prelude::*;

use noisyor::analysis::{good_bias_profile, ProfileOptions};
use noisyor::distribution::{prob_all_zero, subset_zero_table};
use noisyor::network::{basic_blocks, induced_subnetwork, random_network, structurally_equivalent};
use noisyor::poly::q_polynomial;
use noisyor::rational::ratio;
use noisyor::sampler::sample;
use noisyor::seq::{required_sample_size, SampleSource, SeqBudget, SeqOracle, SeqQuery, StatisticalOracle};
use noisyor::{BiasSetting, Limits, NetworkFamily, NoisyOrNetwork, Rational};

fn family(k: usize, ell: usize) -> NetworkFamily {
    let pool = [ratio(1, 2), ratio(1, 3), ratio(3, 4)];
    NetworkFamily::general(k, pool[..ell].to_vec()).unwrap()
}

fn net_strategy(max_m: usize, max_n: usize) -> impl Strategy<Value = NoisyOrNetwork> {
    (1..=3usize, 1..=3usize, 1..=max_m, 1..=max_n, any::<u64>())
        .prop_map(|(k, ell, m, n, seed)| random_network(&family(k, ell), m, n, seed).unwrap())
}

fn bias_strategy() -> impl Strategy<Value = BiasSetting> {
    (2..60i64).prop_flat_map(|den| (1..den).prop_map(move |a| BiasSetting::new(ratio(a, den)).unwrap()))
}

fn perm_of(m: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..m).collect::<Vec<_>>()).prop_shuffle()
}

fn with_perm(max_m: usize, max_n: usize) -> impl Strategy<Value = (NoisyOrNetwork, Vec<usize>)> {
    net_strategy(max_m, max_n).prop_flat_map(|net| {
        let m = net.num_inputs();
        (Just(net), perm_of(m))
    })
}

/// Exhaustive search over input permutations.
fn equivalent_by_search(a: &NoisyOrNetwork, b: &NoisyOrNetwork) -> bool {
    fn go(i: usize, a: &NoisyOrNetwork, b: &NoisyOrNetwork, perm: &mut Vec<usize>, used: &mut [bool]) -> bool {
        if i == a.num_inputs() {
            return a.permute_inputs(perm).unwrap() == *b;
        }
        for t in 0..used.len() {
            if !used[t] {
                used[t] = true;
                perm.push(t);
                if go(i + 1, a, b, perm, used) {
                    return true;
                }
                perm.pop();
                used[t] = false;
            }
        }
        false
    }
    a.num_inputs() == b.num_inputs()
        && a.num_outputs() == b.num_outputs()
        && go(0, a, b, &mut Vec::new(), &mut vec![false; a.num_inputs()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn equivalence_matches_permutation_search(a in net_strategy(6, 3), b in net_strategy(6, 3)) {
        prop_assert_eq!(structurally_equivalent(&a, &b), equivalent_by_search(&a, &b));
        prop_assert_eq!(structurally_equivalent(&a, &b), structurally_equivalent(&b, &a));
        prop_assert!(structurally_equivalent(&a, &a));
    }

    #[test]
    fn equivalence_holds_across_permutations((net, perm) in with_perm(7, 4), other in perm_of(7)) {
        let p = net.permute_inputs(&perm).unwrap();
        prop_assert!(structurally_equivalent(&net, &p));
        prop_assert!(equivalent_by_search(&net, &p));
        let other: Vec<usize> = other.into_iter().filter(|&i| i < net.num_inputs()).collect();
        let q = net.permute_inputs(&other).unwrap();
        // both equivalent to the original, hence to each other
        prop_assert!(structurally_equivalent(&p, &q));
    }

    #[test]
    fn blocks_partition_inputs_and_names_select_them(net in net_strategy(12, 6)) {
        let part = basic_blocks(&net);
        let mut seen = BTreeSet::new();
        for (block, name) in part.blocks.iter().zip(&part.names) {
            for &i in &block.inputs {
                prop_assert!(seen.insert(i));
                prop_assert_eq!(net.signature(i), block.signature.clone());
            }
            if let Some(name) = name {
                prop_assert_eq!(name.members(&net), block.inputs.clone());
                prop_assert!(name.literals.len() <= net.max_fan_in().max(1));
            }
        }
        prop_assert_eq!(seen.len(), net.num_inputs());
    }

    #[test]
    fn induced_subnetwork_keeps_weights(net in net_strategy(10, 5), picks in prop::collection::vec(any::<bool>(), 5)) {
        let outputs: Vec<usize> = (0..net.num_outputs()).filter(|&j| picks[j]).collect();
        let sub = induced_subnetwork(&net, &outputs).unwrap();
        for (a, &i) in sub.input_map.iter().enumerate() {
            for (b, &j) in outputs.iter().enumerate() {
                prop_assert_eq!(sub.network.weight(a, b), net.weight(i, j));
            }
            prop_assert!(outputs.iter().any(|&j| net.weight(i, j).is_some()));
        }
        let connected = (0..net.num_inputs()).filter(|&i| outputs.iter().any(|&j| net.weight(i, j).is_some())).count();
        prop_assert_eq!(sub.input_map.len(), connected);
    }

    #[test]
    fn equivalent_networks_share_tables((net, perm) in with_perm(8, 4), bias in bias_strategy()) {
        let outputs: Vec<usize> = (0..net.num_outputs()).collect();
        let limits = Limits::default();
        let a = subset_zero_table(&net, &outputs, &bias, &limits).unwrap();
        let b = subset_zero_table(&net.permute_inputs(&perm).unwrap(), &outputs, &bias, &limits).unwrap();
        prop_assert_eq!(a.values, b.values);
    }

    #[test]
    fn disconnected_inputs_do_not_matter(net in net_strategy(8, 4), extra in 1..4usize, bias in bias_strategy()) {
        let padded = net.padded(net.num_inputs() + extra).unwrap();
        for mask in 0..1usize << net.num_outputs() {
            let y: Vec<usize> = (0..net.num_outputs()).filter(|j| mask >> j & 1 == 1).collect();
            prop_assert_eq!(prob_all_zero(&net, &y, &bias), prob_all_zero(&padded, &y, &bias));
        }
    }

    #[test]
    fn all_zero_probability_is_monotone(net in net_strategy(8, 4), lo in bias_strategy(), hi in bias_strategy()) {
        let (lo, hi) = if lo.p() <= hi.p() { (lo, hi) } else { (hi, lo) };
        for mask in 0..1usize << net.num_outputs() {
            let y: Vec<usize> = (0..net.num_outputs()).filter(|j| mask >> j & 1 == 1).collect();
            prop_assert!(prob_all_zero(&net, &y, &lo) <= prob_all_zero(&net, &y, &hi));
            for j in 0..net.num_outputs() {
                let mut bigger = y.clone();
                bigger.push(j);
                prop_assert!(prob_all_zero(&net, &bigger, &lo) <= prob_all_zero(&net, &y, &lo));
            }
        }
    }

    #[test]
    fn polynomial_agrees_with_product_formula(net in net_strategy(8, 4), bias in bias_strategy(), mask in 0..16usize) {
        let y: Vec<usize> = (0..net.num_outputs()).filter(|j| mask >> j & 1 == 1).collect();
        let poly = q_polynomial(&net, &y);
        prop_assert_eq!(poly.eval(bias.p()), prob_all_zero(&net, &y, &bias));
        let connected = (0..net.num_inputs()).filter(|&i| y.iter().any(|&j| net.weight(i, j).is_some())).count();
        prop_assert!(poly.degree().unwrap_or(0) <= connected);
    }
}

#[test]
fn identical_pair_family_has_no_good_bias() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/identical_pair");
    let load = |f: &str| NoisyOrNetwork::from_json(&std::fs::read_to_string(dir.join(f)).unwrap()).unwrap();
    let (a, b) = (load("a.json"), load("b.json"));
    assert!(!structurally_equivalent(&a, &b));
    let weights: Vec<Rational> = vec![ratio(1, 16), ratio(1, 8), ratio(1, 4)];
    let fam = NetworkFamily::general(3, weights).unwrap();
    let profile = good_bias_profile(&fam, 4, 2, 1e-12, 200, &ProfileOptions::default()).unwrap();
    assert_eq!(profile.good_measure, 0.0);
    assert_eq!(profile.bad_intervals, vec![(0.0, 1.0)]);
}

fn oracle_for(target: &NoisyOrNetwork, bias: &BiasSetting, alpha: f64, seed: u64) -> StatisticalOracle {
    let outputs = target.num_outputs();
    let budget = SeqBudget::derived(alpha, 0.01, outputs).unwrap();
    let set = sample(target, bias, budget.sample_size, seed);
    StatisticalOracle::new(SampleSource::Fixed(set), bias.clone(), budget).unwrap()
}

#[test]
fn statistical_oracle_accepts_truth_and_rejects_separated_candidates() {
    let w = ratio(1, 2);
    let target = NoisyOrNetwork::from_edges(3, 2, [(0, 0, w.clone()), (1, 0, w.clone()), (1, 1, w.clone())]).unwrap();
    let wrong = NoisyOrNetwork::from_edges(3, 2, [(0, 0, w.clone()), (1, 1, w.clone())]).unwrap();
    let bias = BiasSetting::new(ratio(1, 2)).unwrap();
    let gap = (0..4usize)
        .map(|mask| {
            let y: Vec<usize> = (0..2).filter(|j| mask >> j & 1 == 1).collect();
            noisyor::rational::to_f64(&(prob_all_zero(&target, &y, &bias) - prob_all_zero(&wrong, &y, &bias))).abs()
        })
        .fold(0.0, f64::max);
    let alpha = gap;
    let (mut yes_truth, mut yes_wrong) = (0, 0);
    for seed in 0..40 {
        let oracle = oracle_for(&target, &bias, alpha, seed);
        let truth = SeqQuery::new(vec![0, 1], target.clone()).unwrap();
        let other = SeqQuery::new(vec![0, 1], wrong.clone()).unwrap();
        yes_truth += oracle.query(&truth).unwrap() as usize;
        yes_wrong += oracle.query(&other).unwrap() as usize;
    }
    // failure probability per query is at most 0.01
    assert!(yes_truth >= 39, "truth accepted {yes_truth}/40");
    assert!(yes_wrong <= 1, "wrong accepted {yes_wrong}/40");
}

#[test]
fn sample_size_formula() {
    // ceil(8 / a^2 * ln(2^(s+1) / d))
    for (alpha, delta, s) in [(0.5, 0.5, 1usize), (0.1, 0.01, 3), (0.02, 1e-6, 2)] {
        let expect = (8.0 / (alpha * alpha) * ((2f64).powi(s as i32 + 1) / delta).ln()).ceil() as usize;
        assert_eq!(required_sample_size(alpha, delta, s).unwrap(), expect);
    }
}
