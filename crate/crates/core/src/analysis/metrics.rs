use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ilt::TimeSeries;

/// Fraction of samples at the end of the record averaged into `y_ss`.
pub const TAIL_FRACTION: f64 = 0.02;
/// Relative spread of the tail above which the response is "not settled".
pub const TAIL_SPREAD_LIMIT: f64 = 0.05;
pub const SETTLING_BAND: f64 = 0.02;
pub const RISE_LO: f64 = 0.1;
pub const RISE_HI: f64 = 0.9;

/// Step-response summary. Fractions are relative to `|y_ss|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `max(0, -min y) / |y_ss|`, measured against the sign of `y_ss`.
    pub undershoot_frac: f64,
    pub overshoot_frac: f64,
    /// 10% to 90% of `y_ss`.
    pub rise_time_s: f64,
    /// Last entry into the ±2% band.
    pub settling_time_s: f64,
    /// `|1 - y_ss|` for a unit step.
    pub ss_error: f64,
    pub y_ss: f64,
    pub effort_peak: Option<f64>,
}

fn first_crossing(times: &[f64], y: &[f64], level: f64) -> f64 {
    if y[0] >= level {
        return times[0];
    }
    for i in 1..y.len() {
        if y[i] >= level {
            let frac = (level - y[i - 1]) / (y[i] - y[i - 1]);
            return times[i - 1] + frac * (times[i] - times[i - 1]);
        }
    }
    *times.last().unwrap()
}

pub fn step_metrics(r: &TimeSeries) -> Result<Metrics> {
    let n = r.len();
    if n == 0 || r.values.len() != n {
        return Err(Error::invalid("response", "empty or mismatched time series"));
    }
    let tail = ((TAIL_FRACTION * n as f64).ceil() as usize).clamp(1, n);
    let window = &r.values[n - tail..];
    let y_ss = window.iter().sum::<f64>() / tail as f64;
    let spread = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - window.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(y_ss.abs() > 0.0) || !(spread <= TAIL_SPREAD_LIMIT * y_ss.abs()) {
        return Err(Error::NotSettled { spread, mean: y_ss });
    }

    // normalized so that the final value is +1
    let y: Vec<f64> = r.values.iter().map(|v| v / y_ss).collect();
    let min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let rise_time_s = first_crossing(&r.times, &y, RISE_HI) - first_crossing(&r.times, &y, RISE_LO);

    let outside = |v: f64| (v - 1.0).abs() > SETTLING_BAND;
    let settling_time_s = match y.iter().rposition(|&v| outside(v)) {
        None => r.times[0],
        Some(i) if i + 1 == n => r.times[n - 1],
        Some(i) => {
            // interpolate the entry into the band between samples i and i+1
            let edge = if y[i] > 1.0 { 1.0 + SETTLING_BAND } else { 1.0 - SETTLING_BAND };
            let frac = (edge - y[i]) / (y[i + 1] - y[i]);
            r.times[i] + frac.clamp(0.0, 1.0) * (r.times[i + 1] - r.times[i])
        }
    };

    Ok(Metrics {
        undershoot_frac: (-min).max(0.0),
        overshoot_frac: (max - 1.0).max(0.0),
        rise_time_s,
        settling_time_s,
        ss_error: (1.0 - y_ss).abs(),
        y_ss,
        effort_peak: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilt::uniform_grid;

    fn sample(t0: f64, t1: f64, n: usize, f: impl Fn(f64) -> f64) -> TimeSeries {
        let times: Vec<f64> = (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        TimeSeries { times, values }
    }

    #[test]
    fn first_order_lag() {
        let m = step_metrics(&sample(0.01, 12.0, 2400, |t| 1.0 - (-t).exp())).unwrap();
        assert_eq!(m.undershoot_frac, 0.0);
        assert!(m.overshoot_frac < 1e-5);
        assert!((m.rise_time_s - 9f64.ln()).abs() < 0.01);
        // enters the 2% band at ln(50) relative to a y_ss slightly below 1
        assert!((m.settling_time_s - 50f64.ln()).abs() < 0.01);
        assert!(m.ss_error < 1e-4);
    }

    #[test]
    fn nonminimum_phase_closed_form() {
        let m = step_metrics(&sample(0.01, 30.0, 3000, |t| {
            1.0 - (-t).exp() - 2.0 * t * (-t).exp()
        }))
        .unwrap();
        assert!((m.undershoot_frac - 0.2131).abs() < 0.002);
    }

    #[test]
    fn negative_final_value_is_normalized() {
        let m = step_metrics(&sample(0.01, 12.0, 1200, |t| -(1.0 - (-t).exp()))).unwrap();
        assert_eq!(m.undershoot_frac, 0.0);
        assert!((m.ss_error - 2.0).abs() < 1e-3);
    }

    #[test]
    fn unsettled_response_is_rejected() {
        let times = uniform_grid(10.0, 100);
        let values = times.iter().map(|t| t.exp()).collect();
        let r = TimeSeries { times, values };
        assert!(matches!(step_metrics(&r), Err(Error::NotSettled { .. })));
    }
}
