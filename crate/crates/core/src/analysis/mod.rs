//! Polynomial analysis of families: separation between inequivalent networks,
//! the near-root measure bound, good-bias profiles, exhaustive unique-polynomial
//! checks and the search for distribution-identical inequivalent pairs.

mod counterexample;
mod enumerate;
mod goodbias;
mod unique;

pub use counterexample::{counterexample_search, default_weight_grid, Counterexample, CounterexampleParams};
pub use enumerate::{enumerate_family, DEFAULT_ENUMERATION_BUDGET};
pub use goodbias::{
    alpha_for_good_measure, good_bias_profile, profile_from_curve, roots_in_unit_interval, separation_curve, GoodBiasProfile,
    ProfileOptions, SeparationCurve,
};
pub use unique::{unique_polynomials_among, unique_polynomials_check, UniqueVerdict};

use num_traits::{Signed, Zero};

use crate::distribution::{prob_all_zero, BiasSetting};
use crate::error::{Error, Result};
use crate::network::NoisyOrNetwork;
use crate::rational::Rational;
use crate::subset;

/// Default cap on the number of output subsets a separation may enumerate.
pub const DEFAULT_SUBSET_CAP: u128 = 1 << 20;

/// Bound on the number of points where some of `r` polynomials of degree `d`
/// hits a level, and on the measure of `{p : some |Q_i(p)| <= alpha}` when
/// every leading coefficient is at least `c`: `(d r, 8 d r (alpha / 2c)^(1/d))`.
pub fn near_root_measure_bound(d: usize, r: usize, c: f64, alpha: f64) -> Result<(usize, f64)> {
    if d == 0 || r == 0 {
        return Err(Error::InvalidArgument("degree and polynomial count must be at least 1".into()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("leading-coefficient bound {c} must be positive")));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} must be nonnegative")));
    }
    let dr = d * r;
    Ok((dr, 8.0 * dr as f64 * (alpha / (2.0 * c)).powf(1.0 / d as f64)))
}

fn check_subset_count(n: usize, max_subset: usize, cap: u128) -> Result<()> {
    let count = subset::count_subsets_up_to(n, max_subset);
    if count > cap {
        return Err(Error::LimitExceeded { what: "output subsets", requested: count, limit: cap });
    }
    Ok(())
}

/// Largest gap between the all-zero probabilities of `a` and `b` over nonempty
/// output sets of size at most `max_subset`, at bias `p`.
pub fn separation_at(
    bias: &BiasSetting,
    a: &NoisyOrNetwork,
    b: &NoisyOrNetwork,
    max_subset: usize,
    subset_cap: u128,
) -> Result<Rational> {
    if a.num_outputs() != b.num_outputs() {
        return Err(Error::InvalidArgument(format!(
            "output counts differ: {} vs {}",
            a.num_outputs(),
            b.num_outputs()
        )));
    }
    check_subset_count(a.num_outputs(), max_subset, subset_cap)?;
    let mut best = Rational::zero();
    for y in subset::subsets_up_to(a.num_outputs(), max_subset).into_iter().skip(1) {
        let gap = (prob_all_zero(a, &y, bias) - prob_all_zero(b, &y, bias)).abs();
        if gap > best {
            best = gap;
        }
    }
    Ok(best)
}
