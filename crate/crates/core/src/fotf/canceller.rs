use serde::{Deserialize, Serialize};

use super::exponent::Exponent;
use super::fracpoly::FracPoly;
use super::Fotf;
use crate::error::{Error, Result};

/// Zeros to cancel partially, each with its own fractional degree `nu`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CancellerSpec {
    entries: Vec<(f64, u32)>,
}

impl CancellerSpec {
    pub fn new(entries: Vec<(f64, u32)>) -> Result<Self> {
        for (i, &(z, nu)) in entries.iter().enumerate() {
            validate(z, nu).map_err(|e| match e {
                Error::InvalidArgument { field, reason } => {
                    Error::invalid(format!("{field}[{i}]"), reason)
                }
                other => other,
            })?;
            if entries[..i].iter().any(|&(other, _)| other == z) {
                return Err(Error::invalid(format!("zeros[{i}]"), "duplicate zero location"));
            }
        }
        Ok(CancellerSpec { entries })
    }

    /// Same `nu` for every zero.
    pub fn uniform(zeros: &[f64], nu: u32) -> Result<Self> {
        CancellerSpec::new(zeros.iter().map(|&z| (z, nu)).collect())
    }

    pub fn none() -> Self {
        CancellerSpec::default()
    }

    pub fn entries(&self) -> &[(f64, u32)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn zeros(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn nus(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.1).collect()
    }
}

fn validate(z: f64, nu: u32) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::invalid("zeros", format!("zero location must be positive, got {z}")));
    }
    if nu < 1 {
        return Err(Error::invalid("nu", "must be an integer >= 1"));
    }
    Ok(())
}

/// `Q_{z,nu}(s) = sum_{k=0}^{nu-1} (s/z)^{k/nu}`.
pub(crate) fn partial_sum(z: f64, nu: u32) -> FracPoly {
    FracPoly::from_terms((0..nu).map(|k| {
        let e = Exponent::new(k, nu);
        (z.powf(-e.to_f64()), e)
    }))
}

/// The pre-compensator `1 / Q_{z,nu}(s)`.
///
/// Multiplying a plant that contains `(1 - s/z)` by it leaves
/// `(1 - (s/z)^{1/nu})` in the series connection, since
/// `(1 - x) (1 + x + ... + x^{nu-1}) = 1 - x^nu` with `x = (s/z)^{1/nu}`.
/// `nu = 1` gives the identity.
pub fn canceller(z: f64, nu: u32) -> Result<Fotf> {
    validate(z, nu)?;
    Fotf::new(FracPoly::constant(1.0), partial_sum(z, nu))
}

/// `1 / prod_i Q_{z_i,nu_i}(s)`; the identity for an empty spec.
pub fn composite_canceller(spec: &CancellerSpec) -> Result<Fotf> {
    let mut den = FracPoly::constant(1.0);
    for &(z, nu) in spec.entries() {
        validate(z, nu)?;
        den = den.mul(&partial_sum(z, nu));
    }
    Fotf::new(FracPoly::constant(1.0), den)
}
