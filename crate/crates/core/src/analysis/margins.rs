use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::freq::nearest_branch;
use crate::error::{Error, Result};
use crate::fotf::{CommensurateForm, Fotf};
use crate::ilt::log_grid;

/// Sweep density used to bracket crossovers.
pub const POINTS_PER_DECADE: f64 = 2000.0;
const REFINE_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// `+inf` when the phase never crosses -180° in the band.
    #[serde(serialize_with = "ser_inf", deserialize_with = "de_inf")]
    pub gain_margin_db: f64,
    /// Defined iff a gain crossover was found.
    pub phase_margin_deg: Option<f64>,
    pub omega_gain_crossover: Option<f64>,
    pub omega_phase_crossover: Option<f64>,
}

fn ser_inf<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else if *v < 0.0 {
        s.serialize_str("-inf")
    } else {
        s.serialize_str("nan")
    }
}

fn de_inf<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }
    match Repr::deserialize(d)? {
        Repr::Num(v) => Ok(v),
        Repr::Text(t) => match t.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(serde::de::Error::custom(format!("bad margin value `{other}`"))),
        },
    }
}

fn phase_deg(form: &CommensurateForm, w: f64) -> (f64, f64) {
    let v = form.eval(Complex64::new(0.0, w));
    (v.norm(), v.arg().to_degrees())
}

/// Bisection in log-frequency on `g`, which changes sign over `[lo, hi]`.
fn bisect(mut lo: f64, mut hi: f64, mut g_lo: f64, g: impl Fn(f64) -> f64) -> f64 {
    while hi - lo > REFINE_RTOL * lo {
        let mid = (lo * hi).sqrt();
        let g_mid = g(mid);
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// Gain and phase margins of the open loop `l` from a dense log sweep over
/// `[omega_lo, omega_hi]`, each crossover refined by bisection. Only the
/// first crossover of each kind is reported.
pub fn margins(l: &Fotf, omega_lo: f64, omega_hi: f64) -> Result<Margins> {
    if !(omega_lo > 0.0) || !(omega_hi > omega_lo) || !omega_hi.is_finite() {
        return Err(Error::invalid("band", "need 0 < band_lo < band_hi < inf"));
    }
    let form = l.commensurate_form();
    let decades = (omega_hi / omega_lo).log10();
    let n = (POINTS_PER_DECADE * decades).ceil() as usize + 1;
    let omegas = log_grid(omega_lo, omega_hi, n);

    let mut mags = Vec::with_capacity(n);
    let mut phases: Vec<f64> = Vec::with_capacity(n);
    for &w in &omegas {
        let (m, raw) = phase_deg(&form, w);
        mags.push(m);
        phases.push(match phases.last() {
            Some(&p) => nearest_branch(raw, p),
            None => raw,
        });
    }

    let mut out = Margins {
        gain_margin_db: f64::INFINITY,
        phase_margin_deg: None,
        omega_gain_crossover: None,
        omega_phase_crossover: None,
    };

    for i in 0..n - 1 {
        let (a, b) = (mags[i].ln(), mags[i + 1].ln());
        if a == 0.0 || (a < 0.0) != (b < 0.0) {
            let wc = if a == 0.0 {
                omegas[i]
            } else {
                bisect(omegas[i], omegas[i + 1], a, |w| phase_deg(&form, w).0.ln())
            };
            let phase = nearest_branch(phase_deg(&form, wc).1, phases[i]);
            out.omega_gain_crossover = Some(wc);
            out.phase_margin_deg = Some(wrap_180(180.0 + phase));
            break;
        }
    }

    for i in 0..n - 1 {
        // -180 + 360 k levels crossed between the two samples
        let level = |p: f64| ((p + 180.0) / 360.0).floor();
        let (pa, pb) = (phases[i], phases[i + 1]);
        let on_level = (pa + 180.0).rem_euclid(360.0) == 0.0;
        if on_level || level(pa) != level(pb) {
            let target = if on_level {
                pa
            } else {
                -180.0 + 360.0 * level(pa.max(pb))
            };
            let wc = if on_level {
                omegas[i]
            } else {
                let reference = pa;
                bisect(omegas[i], omegas[i + 1], pa - target, |w| {
                    nearest_branch(phase_deg(&form, w).1, reference) - target
                })
            };
            out.omega_phase_crossover = Some(wc);
            out.gain_margin_db = -20.0 * phase_deg(&form, wc).0.log10();
            break;
        }
    }
    Ok(out)
}

fn wrap_180(x: f64) -> f64 {
    let y = (x + 180.0).rem_euclid(360.0) - 180.0;
    if y == -180.0 {
        180.0
    } else {
        y
    }
}
