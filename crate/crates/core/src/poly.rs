//! Exact univariate polynomials in the input bias `p`.

use std::fmt;
use std::ops::{Mul, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::network::NoisyOrNetwork;
use crate::rational::{self, format_rational, to_f64, Rational};
use crate::subset;

/// Coefficients indexed by degree; trailing zeros are always trimmed, so the
/// zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnivariatePolynomial {
    #[serde(with = "rational::serde_str_vec")]
    coefficients: Vec<Rational>,
}

impl UnivariatePolynomial {
    pub fn new(mut coefficients: Vec<Rational>) -> Self {
        while coefficients.last().is_some_and(Zero::is_zero) {
            coefficients.pop();
        }
        UnivariatePolynomial { coefficients }
    }

    pub fn zero() -> Self {
        UnivariatePolynomial { coefficients: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `a + b p`
    pub fn linear(a: Rational, b: Rational) -> Self {
        Self::new(vec![a, b])
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.coefficients.last()
    }

    pub fn eval(&self, p: &Rational) -> Rational {
        self.coefficients.iter().rev().fold(Rational::zero(), |acc, c| acc * p + c)
    }

    pub fn eval_f64(&self, p: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * p + to_f64(c))
    }

    /// Float copy of the coefficients for repeated evaluation.
    pub fn to_f64_coefficients(&self) -> Vec<f64> {
        self.coefficients.iter().map(to_f64).collect()
    }
}

pub fn eval_coefficients(coefficients: &[f64], p: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, c| acc * p + c)
}

impl Mul for &UnivariatePolynomial {
    type Output = UnivariatePolynomial;

    fn mul(self, rhs: Self) -> UnivariatePolynomial {
        if self.is_zero() || rhs.is_zero() {
            return UnivariatePolynomial::zero();
        }
        let mut out = vec![Rational::zero(); self.coefficients.len() + rhs.coefficients.len() - 1];
        for (a, x) in self.coefficients.iter().enumerate() {
            for (b, y) in rhs.coefficients.iter().enumerate() {
                out[a + b] += x * y;
            }
        }
        UnivariatePolynomial::new(out)
    }
}

impl Sub for &UnivariatePolynomial {
    type Output = UnivariatePolynomial;

    fn sub(self, rhs: Self) -> UnivariatePolynomial {
        let len = self.coefficients.len().max(rhs.coefficients.len());
        let zero = Rational::zero();
        let out = (0..len)
            .map(|d| self.coefficients.get(d).unwrap_or(&zero) - rhs.coefficients.get(d).unwrap_or(&zero))
            .collect();
        UnivariatePolynomial::new(out)
    }
}

impl fmt::Display for UnivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (d, c) in self.coefficients.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            let mag_s = format_rational(&mag);
            match d {
                0 => f.write_str(&mag_s)?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag_s}*")?;
                    }
                    f.write_str("p")?;
                    if d > 1 {
                        write!(f, "^{d}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// All-zero probability of `outputs` as a polynomial in the input bias:
/// the product over inputs of `w_i + (1 - w_i) p`, with `w_i` the product of
/// the input's weights into `outputs`.
pub fn q_polynomial(net: &NoisyOrNetwork, outputs: &[usize]) -> UnivariatePolynomial {
    let outputs = subset::normalize(outputs);
    let mut products: std::collections::BTreeMap<usize, Rational> = Default::default();
    for &j in &outputs {
        for (&i, w) in net.parents(j) {
            let slot = products.entry(i).or_insert_with(Rational::one);
            *slot *= w;
        }
    }
    products.into_values().fold(UnivariatePolynomial::constant(Rational::one()), |acc, w| {
        let factor = UnivariatePolynomial::linear(w.clone(), Rational::one() - w);
        &acc * &factor
    })
}

/// Exact coefficient-wise identity.
pub fn poly_identical(a: &UnivariatePolynomial, b: &UnivariatePolynomial) -> bool {
    a == b
}
