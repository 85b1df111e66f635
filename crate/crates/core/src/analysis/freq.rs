use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fotf::Fotf;
use crate::ilt::log_grid;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FreqResponse {
    pub omegas: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl FreqResponse {
    pub fn magnitude_db(&self) -> Vec<f64> {
        self.values.iter().map(|v| 20.0 * v.norm().log10()).collect()
    }

    /// Phase in degrees, unwrapped by continuity from the first sample.
    pub fn phase_deg_unwrapped(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.values.len());
        for v in &self.values {
            let raw = v.arg().to_degrees();
            out.push(match out.last() {
                Some(&prev) => nearest_branch(raw, prev),
                None => raw,
            });
        }
        out
    }
}

/// `raw + 360 k` closest to `reference`.
pub(crate) fn nearest_branch(raw: f64, reference: f64) -> f64 {
    raw + 360.0 * ((reference - raw) / 360.0).round()
}

/// `f(jω)` on `n` log-spaced frequencies over `[omega_lo, omega_hi]`.
pub fn freq_response(f: &Fotf, omega_lo: f64, omega_hi: f64, n: usize) -> Result<FreqResponse> {
    if !(omega_lo > 0.0) || !(omega_hi > omega_lo) || !omega_hi.is_finite() {
        return Err(Error::invalid("band", "need 0 < omega_lo < omega_hi < inf"));
    }
    if n < 2 {
        return Err(Error::invalid("n", "need at least two frequencies"));
    }
    let form = f.commensurate_form();
    let omegas = log_grid(omega_lo, omega_hi, n);
    let values = omegas
        .iter()
        .map(|&w| form.eval(Complex64::new(0.0, w)))
        .collect();
    Ok(FreqResponse { omegas, values })
}
