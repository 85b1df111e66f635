use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;

use super::exponent::Exponent;
use crate::error::{Error, Result};
use crate::poly::Poly;

/// Coefficients smaller than this fraction of the largest one are dropped
/// after a product or sum.
pub const MERGE_TOLERANCE: f64 = 1e-14;

/// A finite sum `sum c_k s^{q_k}` with exact rational exponents.
///
/// Terms are kept sorted by descending exponent with pairwise-distinct
/// exponents and no zero coefficients. The empty sum is the zero polynomial.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FracPoly {
    terms: Vec<(f64, Exponent)>,
}

impl FracPoly {
    pub fn zero() -> Self {
        FracPoly::default()
    }

    pub fn constant(c: f64) -> Self {
        FracPoly::from_terms([(c, Exponent::ZERO)])
    }

    pub fn monomial(c: f64, e: Exponent) -> Self {
        FracPoly::from_terms([(c, e)])
    }

    /// Collects terms, merging equal exponents and dropping negligible
    /// coefficients.
    pub fn from_terms(terms: impl IntoIterator<Item = (f64, Exponent)>) -> Self {
        let mut merged: BTreeMap<Exponent, f64> = BTreeMap::new();
        for (c, e) in terms {
            *merged.entry(e).or_insert(0.0) += c;
        }
        let max = merged.values().fold(0.0f64, |m, c| m.max(c.abs()));
        let cutoff = MERGE_TOLERANCE * max;
        let terms = merged
            .into_iter()
            .rev()
            .filter(|(_, c)| *c != 0.0 && c.abs() >= cutoff)
            .map(|(e, c)| (c, e))
            .collect();
        FracPoly { terms }
    }

    /// Integer-order polynomial from coefficients in descending powers of `s`.
    pub fn from_descending(coeffs: &[f64]) -> Self {
        let n = coeffs.len();
        FracPoly::from_terms(
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| (c, Exponent::integer((n - 1 - i) as u32))),
        )
    }

    pub fn from_poly(p: &Poly) -> Self {
        FracPoly::from_terms(
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(k, &c)| (c, Exponent::integer(k as u32))),
        )
    }

    pub fn terms(&self) -> &[(f64, Exponent)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest exponent; zero for the zero polynomial.
    pub fn degree(&self) -> Exponent {
        self.terms.first().map(|t| t.1).unwrap_or(Exponent::ZERO)
    }

    pub fn is_integer_order(&self) -> bool {
        self.terms.iter().all(|(_, e)| e.is_integer())
    }

    /// Least common multiple of the exponent denominators.
    pub fn commensurate_order(&self) -> u32 {
        self.terms.iter().fold(1u32, |acc, (_, e)| acc.lcm(&e.denom()))
    }

    pub fn coeff_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    /// Converts to an integer-order [`Poly`]; `None` if any exponent is
    /// fractional.
    pub fn to_poly(&self) -> Option<Poly> {
        if !self.is_integer_order() {
            return None;
        }
        let deg = self.degree().numer() as usize;
        let mut c = vec![0.0; deg + 1];
        for &(coef, e) in &self.terms {
            c[e.numer() as usize] = coef;
        }
        Some(Poly::new(c))
    }

    /// Polynomial in `w = s^{1/n}`; `n` must be a multiple of every exponent
    /// denominator.
    pub fn to_commensurate(&self, n: u32) -> Poly {
        let deg = self.degree().scaled_to(n) as usize;
        let mut c = vec![0.0; if self.is_zero() { 0 } else { deg + 1 }];
        for &(coef, e) in &self.terms {
            c[e.scaled_to(n) as usize] = coef;
        }
        Poly::new(c)
    }

    /// `sum c_k s^{q_k}` on the principal branch, `s^q = exp(q Log s)`, with
    /// `0^0 = 1` and `0^q = 0` for `q > 0`. May return non-finite values; see
    /// [`FracPoly::try_eval`].
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        if s == zero {
            return self
                .terms
                .iter()
                .filter(|(_, e)| e.is_zero())
                .map(|(c, _)| Complex64::new(*c, 0.0))
                .sum();
        }
        let log_s = s.ln();
        self.terms
            .iter()
            .map(|&(c, e)| c * principal_pow(s, log_s, e))
            .sum()
    }

    /// Like [`FracPoly::eval`] but reports overflow of any term.
    pub fn try_eval(&self, s: Complex64) -> Result<Complex64> {
        if s == Complex64::new(0.0, 0.0) {
            return Ok(self.eval(s));
        }
        let log_s = s.ln();
        let mut acc = Complex64::new(0.0, 0.0);
        for &(c, e) in &self.terms {
            let term = c * principal_pow(s, log_s, e);
            if !term.is_finite() {
                return Err(Error::Overflow { s });
            }
            acc += term;
        }
        if !acc.is_finite() {
            return Err(Error::Overflow { s });
        }
        Ok(acc)
    }

    pub fn mul(&self, other: &FracPoly) -> FracPoly {
        FracPoly::from_terms(
            self.terms
                .iter()
                .flat_map(|&(a, ea)| other.terms.iter().map(move |&(b, eb)| (a * b, ea + eb))),
        )
    }

    pub fn add(&self, other: &FracPoly) -> FracPoly {
        FracPoly::from_terms(self.terms.iter().chain(other.terms.iter()).copied())
    }

    pub fn scale(&self, k: f64) -> FracPoly {
        FracPoly::from_terms(self.terms.iter().map(|&(c, e)| (k * c, e)))
    }
}

pub(crate) fn principal_pow(s: Complex64, log_s: Complex64, e: Exponent) -> Complex64 {
    if e.is_zero() {
        Complex64::new(1.0, 0.0)
    } else if e.is_integer() && e.numer() <= 16 {
        s.powu(e.numer())
    } else {
        (log_s * e.to_f64()).exp()
    }
}

impl fmt::Display for FracPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, e)) in self.terms.iter().enumerate() {
            let sign = if *c < 0.0 { "-" } else if i > 0 { "+" } else { "" };
            let sep = if i > 0 { " " } else { "" };
            let mag = c.abs();
            write!(f, "{sep}{sign}{}{mag}", if i > 0 { " " } else { "" })?;
            if !e.is_zero() {
                if *e == Exponent::ONE {
                    write!(f, "·s")?;
                } else {
                    write!(f, "·s^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn terms_are_sorted_and_merged() {
        let p = FracPoly::from_terms([
            (1.0, Exponent::ZERO),
            (2.0, Exponent::new(1, 2)),
            (3.0, Exponent::new(2, 4)),
            (0.0, Exponent::ONE),
        ]);
        assert_eq!(p.terms(), &[(5.0, Exponent::new(1, 2)), (1.0, Exponent::ZERO)]);
    }

    #[test]
    fn tiny_coefficients_are_dropped_after_cancellation() {
        let a = FracPoly::from_descending(&[1.0, 1e-15]);
        let b = FracPoly::from_descending(&[1.0, 0.0]);
        assert_eq!(a.add(&b.scale(-1.0)).len(), 0);
        assert_eq!(a.len(), 1);
    }

    #[test]
    fn sqrt_on_principal_branch() {
        let p = FracPoly::monomial(1.0, Exponent::new(1, 2));
        let v = p.eval(Complex64::new(0.0, 1.0));
        assert_relative_eq!(v.re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(v.im, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        // negative real axis takes arg = +pi
        let v = p.eval(Complex64::new(-4.0, 0.0));
        assert_relative_eq!(v.im, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_argument_conventions() {
        let p = FracPoly::from_terms([(2.0, Exponent::new(1, 3)), (5.0, Exponent::ZERO)]);
        assert_eq!(p.eval(Complex64::new(0.0, 0.0)), Complex64::new(5.0, 0.0));
        assert_eq!(FracPoly::zero().eval(Complex64::new(3.0, 1.0)), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn overflow_is_reported() {
        let p = FracPoly::monomial(1.0, Exponent::integer(400));
        assert!(matches!(p.try_eval(Complex64::new(1e10, 0.0)), Err(Error::Overflow { .. })));
        assert!(p.try_eval(Complex64::new(1.0, 0.0)).is_ok());
    }

    #[test]
    fn commensurate_conversion() {
        let p = FracPoly::from_terms([(1.0, Exponent::new(1, 2)), (1.0, Exponent::new(1, 3))]);
        assert_eq!(p.commensurate_order(), 6);
        assert_eq!(p.to_commensurate(6).coeffs(), &[0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn display_lists_terms() {
        let p = FracPoly::from_descending(&[0.5, 0.1]);
        assert_eq!(p.to_string(), "0.5·s + 0.1");
    }
}
