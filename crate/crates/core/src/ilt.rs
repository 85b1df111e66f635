//! Numerical inverse Laplace transform.
//!
//! Two independent contour quadratures are provided:
//!
//! - [`IltMethod::FourierAccel`]: the Bromwich integral on the vertical line
//!   `Re s = shift/t`, discretized with step `pi/t` into an alternating
//!   Fourier series whose tail is summed by Euler (binomial) averaging of the
//!   last `accel_terms` partial sums.
//! - [`IltMethod::Talbot`]: the trapezoidal rule on a deformed contour
//!   `s(θ) = σ + (shift/t)(θ cot θ + i ν θ)`, `θ ∈ (-π, π)`.
//!
//! Both need to know roughly where the singularities of `F` are. A lightly
//! damped pole at `±jω` must be passed by the Fourier series before the
//! acceleration stage starts, and must lie inside the Talbot contour. The
//! [`SpectralHint`] carries those poles; without one, `F` is assumed to have
//! singularities only near the negative real axis and the origin.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fotf::{CommensurateForm, Fotf};

/// Poles whose mode has decayed below `exp(-DECAYED_EXPONENT)` at time `t`
/// are ignored when sizing the contour for that `t`.
const DECAYED_EXPONENT: f64 = 36.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IltMethod {
    FourierAccel,
    Talbot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IltParams {
    /// Contour abscissa scale: the line sits at `shift/t`, the Talbot contour
    /// crosses the real axis at `σ + shift/t`.
    pub shift: f64,
    /// Minimum number of series terms (Fourier) or nodes (Talbot).
    pub series_terms: usize,
    /// Partial sums entering the Euler average.
    pub accel_terms: usize,
    pub method: IltMethod,
}

impl Default for IltParams {
    fn default() -> Self {
        IltParams {
            shift: 9.0,
            series_terms: 80,
            accel_terms: 20,
            method: IltMethod::FourierAccel,
        }
    }
}

impl IltParams {
    pub fn with_method(method: IltMethod) -> Self {
        IltParams {
            method,
            ..IltParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shift > 0.0) || !self.shift.is_finite() {
            return Err(Error::invalid("shift", "must be positive"));
        }
        if self.accel_terms < 1 {
            return Err(Error::invalid("accel_terms", "must be at least 1"));
        }
        if self.series_terms < self.accel_terms {
            return Err(Error::invalid("series_terms", "must be at least accel_terms"));
        }
        Ok(())
    }
}

/// Known singularities of the transform being inverted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpectralHint {
    poles: Vec<Complex64>,
}

impl SpectralHint {
    pub fn new(poles: Vec<Complex64>) -> Self {
        SpectralHint { poles }
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    /// Largest real part over all poles, or `-inf` when there are none.
    pub fn abscissa(&self) -> f64 {
        self.poles.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `|Im p|` among poles whose modes are still visible at `t`.
    pub fn bandwidth_at(&self, t: f64) -> f64 {
        let top = self.abscissa().max(0.0);
        self.poles
            .iter()
            .filter(|p| (p.re - top) * t > -DECAYED_EXPONENT)
            .map(|p| p.im.abs())
            .fold(0.0, f64::max)
    }
}

/// Sampled time function; `times` are strictly increasing and positive.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        Some((*self.times.last()?, *self.values.last()?))
    }
}

/// `n` points uniformly spaced over `(0, horizon]`.
pub fn uniform_grid(horizon: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| horizon * i as f64 / n as f64).collect()
}

/// `n` log-spaced points over `[t0, t1]`.
pub fn log_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![t0];
    }
    let (a, b) = (t0.ln(), t1.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::invalid("times", "all times must be positive and finite"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("times", "times must be strictly increasing"));
    }
    Ok(())
}

/// Inverts `f` on `times`, assuming singularities only near the negative
/// real axis and at the origin.
pub fn invert<F>(f: F, times: &[f64], params: &IltParams) -> Result<TimeSeries>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    invert_with_hint(f, times, params, &SpectralHint::default())
}

/// Inverts `f` on `times` with contours sized from `hint`. `f` must be real
/// on the real axis, so that `f(conj s) = conj f(s)`.
///
/// Each time point is computed independently with a fixed summation order,
/// so the result does not depend on how the grid is split across threads.
pub fn invert_with_hint<F>(
    f: F,
    times: &[f64],
    params: &IltParams,
    hint: &SpectralHint,
) -> Result<TimeSeries>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    params.validate()?;
    check_grid(times)?;
    let values = times
        .par_iter()
        .map(|&t| invert_at(&f, t, params, hint))
        .collect::<Result<Vec<f64>>>()?;
    Ok(TimeSeries {
        times: times.to_vec(),
        values,
    })
}

/// Single-point inversion.
pub fn invert_at<F>(f: &F, t: f64, params: &IltParams, hint: &SpectralHint) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    match params.method {
        IltMethod::FourierAccel => fourier_accel(f, t, params, hint),
        IltMethod::Talbot => talbot(f, t, params, hint),
    }
}

fn eval_checked<F: Fn(Complex64) -> Complex64>(f: &F, s: Complex64, t: f64) -> Result<Complex64> {
    let v = f(s);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteNode { node: s, t })
    }
}

fn fourier_accel<F>(f: &F, t: f64, params: &IltParams, hint: &SpectralHint) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    let sigma = hint.abscissa().max(0.0);
    let a = params.shift / t + sigma;
    let omega = hint.bandwidth_at(t);
    let m = params.accel_terms;
    // the partial sums must run past the highest visible oscillation before
    // the averaging window opens
    let resolve = (2.0 * omega * t / PI).ceil() as usize + m;
    let total = params.series_terms.max(resolve);
    let first = total - m;

    let mut partial = 0.0;
    let mut accelerated = 0.0;
    // binomial weights C(m, j) / 2^m, built incrementally
    let mut weight = 0.5f64.powi(m as i32);
    for k in 0..=total {
        let s = Complex64::new(a, PI * k as f64 / t);
        let term = eval_checked(f, s, t)?.re;
        partial += match k {
            0 => 0.5 * term,
            k if k % 2 == 0 => term,
            _ => -term,
        };
        if k >= first {
            let j = k - first;
            accelerated += weight * partial;
            weight *= (m - j) as f64 / (j + 1) as f64;
        }
    }
    Ok((a * t).exp() / t * accelerated)
}

fn talbot<F>(f: &F, t: f64, params: &IltParams, hint: &SpectralHint) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    let top = hint.abscissa();
    let sigma = if top.is_finite() { (top + 1.0 / t).max(0.0) } else { 0.0 };
    let scale = params.shift / t;
    let omega = hint.bandwidth_at(t);
    // The contour reaches height scale*nu*pi/2 at θ = pi/2 where Re s = σ;
    // put that 20% above the highest visible pole.
    let nu = (2.4 * omega / (scale * PI)).max(1.0);
    let needed = 2 * (1.5 * nu * params.shift).ceil() as usize;
    let mut n = params.series_terms.max(needed);
    n += n % 2;
    let h = 2.0 * PI / n as f64;
    let mut acc = 0.0;
    // θ_k > 0 half of the midpoint rule; the other half is the conjugate.
    for k in n / 2..n {
        let theta = -PI + (k as f64 + 0.5) * h;
        let (sin, cos) = theta.sin_cos();
        let cot = cos / sin;
        let s = Complex64::new(sigma + scale * theta * cot, scale * nu * theta);
        let ds = Complex64::new(scale * (cot - theta / (sin * sin)), scale * nu);
        let fs = eval_checked(f, s, t)?;
        let g = (s * t).exp() * fs * ds;
        if !g.is_finite() {
            if (s * t).exp().norm() == 0.0 {
                continue;
            }
            return Err(Error::NonFiniteNode { node: s, t });
        }
        acc += g.im;
    }
    Ok(2.0 * acc / n as f64)
}

/// A transfer function prepared for repeated inversion: its commensurate
/// polynomial image and its principal-sheet poles.
#[derive(Debug, Clone)]
pub struct PreparedTransform {
    form: CommensurateForm,
    hint: SpectralHint,
}

impl PreparedTransform {
    pub fn new(sys: &Fotf) -> Result<Self> {
        let form = sys.commensurate_form();
        let hint = if form.den.degree() >= 1 {
            SpectralHint::new(form.principal_poles()?)
        } else {
            SpectralHint::default()
        };
        Ok(PreparedTransform { form, hint })
    }

    pub fn hint(&self) -> &SpectralHint {
        &self.hint
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.form.eval(s)
    }

    /// Unit-step response on `times`: the inverse transform of `sys(s)/s`.
    pub fn step(&self, times: &[f64], params: &IltParams) -> Result<TimeSeries> {
        let mut hint = self.hint.clone();
        hint.poles.push(Complex64::new(0.0, 0.0));
        invert_with_hint(|s| self.form.eval(s) / s, times, params, &hint)
    }

    /// Impulse response on `times`.
    pub fn impulse(&self, times: &[f64], params: &IltParams) -> Result<TimeSeries> {
        invert_with_hint(|s| self.form.eval(s), times, params, &self.hint)
    }
}

/// Unit-step response of `sys` on `n_points` uniform samples of `(0, horizon]`.
pub fn step_response(
    sys: &Fotf,
    horizon: f64,
    n_points: usize,
    params: &IltParams,
) -> Result<TimeSeries> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::invalid("horizon_s", "must be positive"));
    }
    if n_points < 1 {
        return Err(Error::invalid("n_points", "must be at least 1"));
    }
    PreparedTransform::new(sys)?.step(&uniform_grid(horizon, n_points), params)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function via the Lanczos approximation (g = 7, 9 terms), with the
/// reflection formula below 1/2.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}
