//! Empirical profile of α-good biases.
//!
//! A bias is α-good for a family when every pair of inequivalent members is
//! separated by at least α on some small output set. The profile evaluates
//! the minimum pairwise separation on a uniform grid of biases, then refines
//! the boundaries of bad regions by bisection.

use serde::{Deserialize, Serialize};

use super::enumerate::{enumerate_family, DEFAULT_ENUMERATION_BUDGET};
use crate::error::{Error, Result};
use crate::network::{NetworkFamily, NoisyOrNetwork};
use crate::poly::{eval_coefficients, q_polynomial, UnivariatePolynomial};
use crate::subset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileOptions {
    /// Largest output set compared; `None` means fan-in + 1.
    pub max_subset: Option<usize>,
    pub enumeration_budget: usize,
    pub bisection_steps: usize,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { max_subset: None, enumeration_budget: DEFAULT_ENUMERATION_BUDGET, bisection_steps: 30 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodBiasProfile {
    pub alpha: f64,
    /// Length of `[0, 1]` outside the bad intervals.
    pub good_measure: f64,
    /// Disjoint, sorted intervals where the separation falls below `alpha`.
    pub bad_intervals: Vec<(f64, f64)>,
    pub grid_resolution: usize,
    pub networks: usize,
    pub pairs: usize,
}

impl GoodBiasProfile {
    pub fn is_bad(&self, p: f64) -> bool {
        self.bad_intervals.iter().any(|&(lo, hi)| lo <= p && p <= hi)
    }

    pub fn bad_measure(&self) -> f64 {
        self.bad_intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }
}

/// Minimum pairwise separation of a family sampled on a grid of biases.
#[derive(Clone, Debug)]
pub struct SeparationCurve {
    /// Grid points `(i + 1/2) / grid`.
    pub points: Vec<f64>,
    pub min_separation: Vec<f64>,
    pub networks: usize,
    evaluator: Evaluator,
}

impl SeparationCurve {
    /// Minimum separation at an arbitrary bias.
    pub fn at(&self, p: f64) -> f64 {
        self.evaluator.min_separation(p)
    }
}

#[derive(Clone, Debug)]
struct Evaluator {
    /// Per network, per compared output set, float polynomial coefficients.
    polys: Vec<Vec<Vec<f64>>>,
}

impl Evaluator {
    fn new(nets: &[NoisyOrNetwork], max_subset: usize) -> Self {
        let n = nets.first().map_or(0, NoisyOrNetwork::num_outputs);
        let sets: Vec<Vec<usize>> = subset::subsets_up_to(n, max_subset).into_iter().skip(1).collect();
        let polys = nets
            .iter()
            .map(|net| sets.iter().map(|y| q_polynomial(net, y).to_f64_coefficients()).collect())
            .collect();
        Evaluator { polys }
    }

    // Closest pair in the max-norm: sort by the first coordinate and stop
    // scanning once that coordinate alone exceeds the best distance.
    fn min_separation(&self, p: f64) -> f64 {
        if self.polys.len() < 2 {
            return f64::INFINITY;
        }
        let mut values: Vec<Vec<f64>> = self
            .polys
            .iter()
            .map(|sets| sets.iter().map(|c| eval_coefficients(c, p)).collect())
            .collect();
        values.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut best = f64::INFINITY;
        for (a, va) in values.iter().enumerate() {
            for vb in &values[a + 1..] {
                if vb[0] - va[0] >= best {
                    break;
                }
                let d = va.iter().zip(vb).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                best = best.min(d);
            }
        }
        best
    }
}

pub fn separation_curve(
    fam: &NetworkFamily,
    m: usize,
    n: usize,
    grid: usize,
    options: &ProfileOptions,
) -> Result<SeparationCurve> {
    if grid == 0 {
        return Err(Error::InvalidArgument("grid must have at least one point".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("family needs at least one output".into()));
    }
    let nets = enumerate_family(fam, m, n, options.enumeration_budget)?;
    let max_subset = options.max_subset.unwrap_or(fam.fan_in_k() + 1);
    let evaluator = Evaluator::new(&nets, max_subset);
    let points: Vec<f64> = (0..grid).map(|i| (i as f64 + 0.5) / grid as f64).collect();
    let min_separation = points.iter().map(|&p| evaluator.min_separation(p)).collect();
    Ok(SeparationCurve { points, min_separation, networks: nets.len(), evaluator })
}

/// Profile of α-good biases for `fam` at size `(m, n)`.
pub fn good_bias_profile(
    fam: &NetworkFamily,
    m: usize,
    n: usize,
    alpha: f64,
    grid: usize,
    options: &ProfileOptions,
) -> Result<GoodBiasProfile> {
    let curve = separation_curve(fam, m, n, grid, options)?;
    Ok(profile_from_curve(&curve, alpha, options.bisection_steps))
}

/// Good/bad classification of an existing curve at threshold `alpha`.
pub fn profile_from_curve(curve: &SeparationCurve, alpha: f64, bisection_steps: usize) -> GoodBiasProfile {
    let grid = curve.points.len();
    let good: Vec<bool> = curve.min_separation.iter().map(|&s| s >= alpha).collect();

    let boundary = |good_p: f64, bad_p: f64| -> f64 {
        let (mut g, mut b) = (good_p, bad_p);
        for _ in 0..bisection_steps {
            let mid = 0.5 * (g + b);
            if curve.at(mid) >= alpha {
                g = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (g + b)
    };

    let mut bad_intervals = Vec::new();
    let mut i = 0;
    while i < grid {
        if good[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < grid && !good[i] {
            i += 1;
        }
        let lo = if start == 0 { 0.0 } else { boundary(curve.points[start - 1], curve.points[start]) };
        let hi = if i == grid { 1.0 } else { boundary(curve.points[i], curve.points[i - 1]) };
        bad_intervals.push((lo, hi));
    }
    let networks = curve.networks;
    let bad: f64 = bad_intervals.iter().map(|(lo, hi)| hi - lo).sum();
    GoodBiasProfile {
        alpha,
        good_measure: (1.0 - bad).max(0.0),
        bad_intervals,
        grid_resolution: grid,
        networks,
        pairs: networks * networks.saturating_sub(1) / 2,
    }
}

/// Largest α whose grid good-measure is at least `target`: the
/// `(1 - target)` quantile of the curve's minimum separations.
pub fn alpha_for_good_measure(curve: &SeparationCurve, target: f64) -> f64 {
    let mut seps = curve.min_separation.clone();
    seps.sort_by(f64::total_cmp);
    let grid = seps.len();
    let allowed_bad = ((1.0 - target) * grid as f64).floor() as usize;
    seps[allowed_bad.min(grid - 1)]
}

/// Real roots in `[0, 1]` located by sign changes on a uniform grid and refined
/// by bisection. Endpoints with `|Q| <= tol` count as roots; roots of even
/// multiplicity without a sign change are not detected.
pub fn roots_in_unit_interval(poly: &UnivariatePolynomial, grid: usize, tol: f64) -> Vec<f64> {
    let c = poly.to_f64_coefficients();
    let f = |p: f64| eval_coefficients(&c, p);
    let mut roots = Vec::new();
    if f(0.0).abs() <= tol {
        roots.push(0.0);
    }
    let mut prev_p = 0.0;
    let mut prev = f(0.0);
    for i in 1..=grid {
        let p = i as f64 / grid as f64;
        let v = f(p);
        if prev != 0.0 && v != 0.0 && (prev < 0.0) != (v < 0.0) {
            let (mut lo, mut hi, mut flo) = (prev_p, p, prev);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        } else if v == 0.0 && i < grid {
            roots.push(p);
        }
        prev_p = p;
        prev = v;
    }
    if f(1.0).abs() <= tol {
        roots.push(1.0);
    }
    roots
}
