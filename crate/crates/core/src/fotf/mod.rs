//! Fractional-order transfer functions with exact rational exponents.
//!
//! Arithmetic never cancels common factors between numerator and
//! denominator; every factor a transfer function was built from stays in it.

mod canceller;
mod controller;
mod exponent;
mod fracpoly;
mod loops;
mod stability;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

pub use canceller::{canceller, composite_canceller, CancellerSpec};
pub use controller::{controller_tf, ControllerSpec};
pub use exponent::{Exponent, Rational};
pub use fracpoly::{FracPoly, MERGE_TOLERANCE};
pub use loops::{loop_maps, maps_from_parts, LoopMaps, LoopModel};
pub use stability::{stability, Stability, StabilityClass};

use crate::error::{Error, Result};
use crate::poly::Poly;

/// Ratio of two [`FracPoly`]s. The denominator is never the zero polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Fotf {
    num: FracPoly,
    den: FracPoly,
}

impl Fotf {
    pub fn new(num: FracPoly, den: FracPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::invalid("den", "denominator is the zero polynomial"));
        }
        Ok(Fotf { num, den })
    }

    pub fn identity() -> Self {
        Fotf::constant(1.0)
    }

    pub fn constant(k: f64) -> Self {
        Fotf {
            num: FracPoly::constant(k),
            den: FracPoly::constant(1.0),
        }
    }

    /// Integer-order transfer function from descending coefficient lists.
    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Fotf::new(FracPoly::from_descending(num), FracPoly::from_descending(den))
    }

    pub fn num(&self) -> &FracPoly {
        &self.num
    }

    pub fn den(&self) -> &FracPoly {
        &self.den
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval(s) / self.den.eval(s)
    }

    pub fn mul(&self, other: &Fotf) -> Fotf {
        Fotf {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    pub fn add(&self, other: &Fotf) -> Fotf {
        Fotf {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    /// Unity negative feedback around `self`: `n / (n + d)`.
    pub fn feedback(&self) -> Fotf {
        Fotf {
            num: self.num.clone(),
            den: self.num.add(&self.den),
        }
    }

    /// `1/self`; fails when the numerator is zero.
    pub fn reciprocal(&self) -> Result<Fotf> {
        Fotf::new(self.den.clone(), self.num.clone())
    }

    /// Denominator degree minus numerator degree, exactly.
    pub fn relative_degree(&self) -> Rational {
        Rational::difference(self.den.degree(), self.num.degree())
    }

    pub fn commensurate_order(&self) -> u32 {
        num_integer::lcm(self.num.commensurate_order(), self.den.commensurate_order())
    }

    /// Substitutes `w = s^{1/N}` with `N` the lcm of all exponent denominators.
    pub fn commensurate_form(&self) -> CommensurateForm {
        let order = self.commensurate_order();
        CommensurateForm {
            order,
            num: self.num.to_commensurate(order),
            den: self.den.to_commensurate(order),
        }
    }

    /// Divides out the factor `(1 - s/z)` from an integer-order numerator.
    ///
    /// `z` is first refined to the nearest true root by Newton's method so
    /// that rounded published zero locations still deflate exactly; the
    /// returned value is the refined zero.
    pub fn factor_nmp_zero(&self, z: f64) -> Result<(Fotf, f64)> {
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::invalid("z", "must be a positive real"));
        }
        let num = self
            .num
            .to_poly()
            .ok_or_else(|| Error::invalid("num", "numerator must be integer-order"))?;
        if self.den.to_poly().is_none() {
            return Err(Error::invalid("den", "denominator must be integer-order"));
        }
        if num.degree() < 1 {
            return Err(Error::NotAZero {
                value: z,
                residual: 1.0,
            });
        }
        let residual = num.backward_error(Complex64::new(z, 0.0));
        if residual > NMP_ZERO_TOLERANCE {
            return Err(Error::NotAZero { value: z, residual });
        }
        let root = num.polish_real_root(z, 8);
        let (quotient, _) = num.deflate(root);
        // num = (s - r) q = (1 - s/r) (-r q)
        let reduced = Poly::new(quotient.coeffs().iter().map(|c| -root * c).collect());
        Ok((
            Fotf {
                num: FracPoly::from_poly(&reduced),
                den: self.den.clone(),
            },
            root,
        ))
    }
}

/// Scaled-residual gate accepted by [`Fotf::factor_nmp_zero`]. Wide enough
/// for zero locations published to four decimals.
pub const NMP_ZERO_TOLERANCE: f64 = 1e-4;

impl fmt::Display for Fotf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

/// Integer-order image of a [`Fotf`] under `w = s^{1/order}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommensurateForm {
    pub order: u32,
    pub num: Poly,
    pub den: Poly,
}

impl CommensurateForm {
    /// Principal-branch `w = s^{1/order}`.
    pub fn w_of(&self, s: Complex64) -> Complex64 {
        if self.order == 1 || s == Complex64::new(0.0, 0.0) {
            s
        } else {
            (s.ln() / self.order as f64).exp()
        }
    }

    /// Evaluates the original transfer function through the polynomial
    /// image; this is the fast path used by the time- and frequency-domain
    /// routines.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let w = self.w_of(s);
        self.num.eval(w) / self.den.eval(w)
    }

    /// Denominator roots `w` that lie on the principal sheet, mapped back to
    /// the `s` plane. Roots with `|arg w| > pi/order` live on other Riemann
    /// sheets and are not singularities of the principal-branch function.
    pub fn principal_poles(&self) -> Result<Vec<Complex64>> {
        let n = self.order as f64;
        let sheet = PI / n * (1.0 + 1e-9);
        Ok(self
            .den
            .roots()?
            .into_iter()
            .filter(|w| w.norm() == 0.0 || w.arg().abs() <= sheet)
            .map(|w| if self.order == 1 { w } else { w.powf(n) })
            .collect())
    }
}
