use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Fotf;
use crate::error::{Error, Result};

/// Closeness to the sector boundary, in radians, that counts as marginal.
pub const SECTOR_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityClass {
    Stable,
    Marginal,
    Unstable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stability {
    pub class: StabilityClass,
    /// Commensurate order `N` of the tested denominator.
    pub order: u32,
    /// Roots `w` that are unstable (for `Unstable`) or on the boundary (for
    /// `Marginal`).
    pub witnesses: Vec<Complex64>,
    /// Number of roots at `w = 0`.
    pub origin_roots: usize,
    /// Smallest `|arg w| - pi/(2N)` over the nonzero roots.
    pub sector_margin: f64,
}

impl Stability {
    /// Stable, or marginal only because of a single pole at the origin.
    pub fn tracks_steps(&self) -> bool {
        match self.class {
            StabilityClass::Stable => true,
            StabilityClass::Marginal => {
                self.origin_roots == 1 && self.witnesses.iter().all(|w| w.norm() == 0.0)
            }
            StabilityClass::Unstable => false,
        }
    }

    pub fn is_unstable(&self) -> bool {
        self.class == StabilityClass::Unstable
    }
}

/// Sector test on the commensurate denominator: with `w = s^{1/N}`, the
/// system is stable iff every root satisfies `|arg w| > pi/(2N)`.
pub fn stability(f: &Fotf) -> Result<Stability> {
    let cf = f.commensurate_form();
    if cf.den.degree() < 1 {
        return Err(Error::invalid("den", "denominator has no roots to test"));
    }
    let bound = PI / (2.0 * cf.order as f64);
    let roots = cf.den.roots()?;
    let mut unstable = Vec::new();
    let mut boundary = Vec::new();
    let mut origin_roots = 0;
    let mut sector_margin = f64::INFINITY;
    for w in roots {
        if w.norm() == 0.0 {
            origin_roots += 1;
            boundary.push(w);
            continue;
        }
        let margin = w.arg().abs() - bound;
        sector_margin = sector_margin.min(margin);
        if margin < -SECTOR_TOLERANCE {
            unstable.push(w);
        } else if margin <= SECTOR_TOLERANCE {
            boundary.push(w);
        }
    }
    let (class, witnesses) = if !unstable.is_empty() {
        (StabilityClass::Unstable, unstable)
    } else if !boundary.is_empty() {
        (StabilityClass::Marginal, boundary)
    } else {
        (StabilityClass::Stable, Vec::new())
    };
    Ok(Stability {
        class,
        order: cf.order,
        witnesses,
        origin_roots,
        sector_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fotf::{Exponent, FracPoly};

    #[test]
    fn first_order_cases() {
        let s = stability(&Fotf::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(s.class, StabilityClass::Stable);
        let s = stability(&Fotf::from_coeffs(&[1.0], &[1.0, -1.0]).unwrap()).unwrap();
        assert_eq!(s.class, StabilityClass::Unstable);
        assert_eq!(s.witnesses.len(), 1);
    }

    #[test]
    fn half_order_lag_is_stable() {
        let f = Fotf::new(
            FracPoly::constant(1.0),
            FracPoly::from_terms([(1.0, Exponent::new(1, 2)), (1.0, Exponent::ZERO)]),
        )
        .unwrap();
        let s = stability(&f).unwrap();
        assert_eq!(s.order, 2);
        assert_eq!(s.class, StabilityClass::Stable);
        // w = -1: |arg| = pi, bound pi/4
        assert!((s.sector_margin - (PI - PI / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn integrator_is_marginal() {
        let s = stability(&Fotf::from_coeffs(&[1.0], &[1.0, 1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(s.class, StabilityClass::Marginal);
        assert_eq!(s.origin_roots, 1);
        assert!(s.tracks_steps());
        let s = stability(&Fotf::from_coeffs(&[1.0], &[1.0, 0.0, 0.0]).unwrap()).unwrap();
        assert!(!s.tracks_steps());
    }

    #[test]
    fn undamped_oscillator_is_marginal() {
        let s = stability(&Fotf::from_coeffs(&[1.0], &[1.0, 0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(s.class, StabilityClass::Marginal);
        assert!(!s.tracks_steps());
    }

    #[test]
    fn constant_denominator_is_rejected() {
        assert!(stability(&Fotf::constant(2.0)).is_err());
    }
}
