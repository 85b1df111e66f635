use serde::{Deserialize, Serialize};

use super::exponent::Exponent;
use super::fracpoly::FracPoly;
use super::Fotf;
use crate::error::{Error, Result};

/// Largest denominator used when rationalizing fractional controller orders.
pub const ORDER_MAX_DENOMINATOR: u32 = 1000;

/// `kp + ki / s^lambda + kd s^mu`. A PD has `ki = 0`; a classical PID has
/// `lambda = mu = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerSpec {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl ControllerSpec {
    pub fn pd(kp: f64, kd: f64) -> Self {
        ControllerSpec {
            kp,
            ki: 0.0,
            kd,
            lambda: 1.0,
            mu: 1.0,
        }
    }

    pub fn pid(kp: f64, ki: f64, kd: f64) -> Self {
        ControllerSpec {
            kp,
            ki,
            kd,
            lambda: 1.0,
            mu: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kp", self.kp), ("ki", self.ki), ("kd", self.kd)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "gain must be finite"));
            }
        }
        for (name, v) in [("lambda", self.lambda), ("mu", self.mu)] {
            if !(v > 0.0 && v <= 2.0) {
                return Err(Error::invalid(name, format!("order must lie in (0, 2], got {v}")));
            }
        }
        Ok(())
    }

    /// The same controller with every gain multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        ControllerSpec {
            kp: k * self.kp,
            ki: k * self.ki,
            kd: k * self.kd,
            ..*self
        }
    }
}

fn order(name: &str, v: f64) -> Result<Exponent> {
    Exponent::approximate(v, ORDER_MAX_DENOMINATOR)
        .ok_or_else(|| Error::invalid(name, format!("cannot represent order {v}")))
}

/// `(kd s^{lambda+mu} + kp s^lambda + ki) / s^lambda`. With `ki = 0` the
/// `s^lambda` factor is removed, so a PD comes out as `(kd s^mu + kp) / 1`.
pub fn controller_tf(c: &ControllerSpec) -> Result<Fotf> {
    c.validate()?;
    let lambda = order("lambda", c.lambda)?;
    let mu = order("mu", c.mu)?;
    if c.ki == 0.0 {
        let num = FracPoly::from_terms([(c.kd, mu), (c.kp, Exponent::ZERO)]);
        return Fotf::new(num, FracPoly::constant(1.0));
    }
    let num = FracPoly::from_terms([
        (c.kd, lambda + mu),
        (c.kp, lambda),
        (c.ki, Exponent::ZERO),
    ]);
    Fotf::new(num, FracPoly::monomial(1.0, lambda))
}
