//! Frequency-domain margins, step-response metrics and `nu` sweeps.

mod freq;
mod margins;
mod metrics;

pub use freq::{freq_response, FreqResponse};
pub use margins::{margins, Margins, POINTS_PER_DECADE};
pub use metrics::{step_metrics, Metrics, SETTLING_BAND, TAIL_FRACTION};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fotf::{loop_maps, stability, CancellerSpec, ControllerSpec, Fotf, LoopMaps, LoopModel};
use crate::fotf::{Stability, StabilityClass};
use crate::ilt::{uniform_grid, IltParams, PreparedTransform, TimeSeries};

/// Default margin sweep band, rad/s.
pub const DEFAULT_BAND: (f64, f64) = (1e-3, 1e3);

/// Everything computed for one closed loop.
#[derive(Debug, Clone)]
pub struct LoopRun {
    pub maps: LoopMaps,
    pub stability: Stability,
    /// Output `y` for a unit step reference.
    pub output: TimeSeries,
    /// Plant input `u` for a unit step reference.
    pub effort: TimeSeries,
    pub metrics: Result<Metrics>,
    pub margins: Margins,
}

impl LoopRun {
    pub fn stable(&self) -> bool {
        self.stability.tracks_steps()
    }
}

/// Full pipeline for one loop: maps, stability, step responses of output and
/// plant input, metrics and margins.
pub fn simulate_loop(
    model: &LoopModel,
    horizon: f64,
    n_points: usize,
    params: &IltParams,
    band: (f64, f64),
) -> Result<LoopRun> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::invalid("horizon_s", "must be positive"));
    }
    if n_points < 2 {
        return Err(Error::invalid("n_points", "must be at least 2"));
    }
    let maps = loop_maps(model)?;
    let stab = stability(&maps.complementary)?;
    let times = uniform_grid(horizon, n_points);
    let closed = PreparedTransform::new(&maps.complementary)?;
    let output = closed.step(&times, params)?;
    let effort = PreparedTransform::new(&maps.effort)?.step(&times, params)?;
    let metrics = step_metrics(&output).and_then(|mut m| {
        let y = &output.values;
        let argmin = (0..y.len()).min_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap();
        let argmax = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap();
        if m.undershoot_frac > 0.0 {
            let lo = refine_extremum(&closed, params, &output, argmin, -m.y_ss.signum())?;
            m.undershoot_frac = (-lo / m.y_ss).max(0.0);
        }
        if m.overshoot_frac > 0.0 {
            let hi = refine_extremum(&closed, params, &output, argmax, m.y_ss.signum())?;
            m.overshoot_frac = (hi / m.y_ss - 1.0).max(0.0);
        }
        m.effort_peak = Some(effort.values.iter().fold(0.0, |a, v| a.max(v.abs())));
        Ok(m)
    });
    let margins = margins(&maps.open_loop, band.0, band.1)?;
    Ok(LoopRun {
        maps,
        stability: stab,
        output,
        effort,
        metrics,
        margins,
    })
}

/// Golden-section search for the extremum of the step response bracketed by
/// the samples around `i`. `sign` is +1 for a maximum, -1 for a minimum.
fn refine_extremum(
    sys: &PreparedTransform,
    params: &IltParams,
    r: &TimeSeries,
    i: usize,
    sign: f64,
) -> Result<f64> {
    let best = r.values[i];
    if i == 0 || i + 1 == r.len() {
        return Ok(best);
    }
    let f = |t: f64| -> Result<f64> { Ok(sign * sys.step(&[t], params)?.values[0]) };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (r.times[i - 1], r.times[i + 1]);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..40 {
        if fc > fd {
            b = d;
            (d, fd) = (c, fc);
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            (c, fc) = (d, fd);
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(sign * (sign * best).max(fc.max(fd)))
}

/// Step response of `C2 C1 / (1 + L)`: the plant input for a unit step
/// reference.
pub fn control_effort(
    m: &LoopModel,
    horizon: f64,
    n_points: usize,
    params: &IltParams,
) -> Result<TimeSeries> {
    let maps = loop_maps(m)?;
    crate::ilt::step_response(&maps.effort, horizon, n_points, params)
}

/// One `nu` configuration: a single value applied to every zero, or one
/// value per zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NuChoice {
    Uniform(u32),
    PerZero(Vec<u32>),
}

impl NuChoice {
    pub fn expand(&self, zeros: &[f64]) -> Result<Vec<u32>> {
        match self {
            NuChoice::Uniform(nu) => Ok(vec![*nu; zeros.len()]),
            NuChoice::PerZero(v) if v.len() == zeros.len() => Ok(v.clone()),
            NuChoice::PerZero(v) if v.len() == 1 => Ok(vec![v[0]; zeros.len()]),
            NuChoice::PerZero(v) => Err(Error::invalid(
                "nu",
                format!("{} values given for {} zeros", v.len(), zeros.len()),
            )),
        }
    }

    pub fn canceller(&self, zeros: &[f64]) -> Result<CancellerSpec> {
        let nus = self.expand(zeros)?;
        CancellerSpec::new(zeros.iter().copied().zip(nus).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub nu: Vec<u32>,
    pub class: StabilityClass,
    pub stable: bool,
    /// Absent for unstable loops and for responses that did not settle.
    pub metrics: Option<Metrics>,
    pub margins: Margins,
}

/// Runs the loop pipeline once per `nu` configuration, in input order.
#[allow(clippy::too_many_arguments)]
pub fn nu_sweep(
    plant: &Fotf,
    zeros: &[f64],
    nus: &[NuChoice],
    c2: &ControllerSpec,
    horizon: f64,
    n_points: usize,
    params: &IltParams,
    band: (f64, f64),
) -> Result<Vec<SweepRow>> {
    use rayon::prelude::*;
    nus.par_iter()
        .map(|choice| {
            let model = LoopModel::new(plant.clone(), choice.canceller(zeros)?, *c2);
            let run = simulate_loop(&model, horizon, n_points, params, band)?;
            let stable = run.stable();
            Ok(SweepRow {
                nu: choice.expand(zeros)?,
                class: run.stability.class,
                stable,
                metrics: if stable { run.metrics.ok() } else { None },
                margins: run.margins,
            })
        })
        .collect()
}
