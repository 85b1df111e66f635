//! Subcommand bodies. Each returns the process exit code: 0 on success, 2
//! when the results were computed but the loop is unstable.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

use fraccancel::analysis::{Margins, NuChoice, SweepRow};
use fraccancel::bench::{plant_by_name, Scenario};
use fraccancel::ilt::IltParams;
use fraccancel::realize::{export_filter, fit_rational, ExportForm, FitRequest};
use fraccancel::{composite_canceller, real_unstable_zeros, Poly};

use crate::format::{g17, opt};
use crate::run::{margin_report, simulate, sweep, MarginRow, RunResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNSTABLE: i32 = 2;

/// Writes to `out`, or to standard output when no path is given.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_nu(s: Scenario, nu: Option<NuChoice>) -> Result<Scenario> {
    Ok(match nu {
        Some(nu) => s.with_nu(nu)?,
        None => s,
    })
}

fn nu_label(nu: &[u32]) -> String {
    match nu {
        [first, rest @ ..] if rest.iter().all(|v| v == first) => first.to_string(),
        _ => nu.iter().map(u32::to_string).collect::<Vec<_>>().join(":"),
    }
}

fn margin_lines(out: &mut String, m: &Margins) {
    let _ = writeln!(out, "# gain_margin_db = {}", g17(m.gain_margin_db));
    let _ = writeln!(out, "# phase_margin_deg = {}", opt(m.phase_margin_deg));
    let _ = writeln!(out, "# omega_gain_crossover = {}", opt(m.omega_gain_crossover));
    let _ = writeln!(out, "# omega_phase_crossover = {}", opt(m.omega_phase_crossover));
}

/// CSV with columns `t,y,u` and `#`-prefixed `key = value` footer lines.
pub fn simulate_csv(s: &Scenario, r: &RunResult) -> String {
    let mut out = String::from("t,y,u\n");
    for ((t, y), u) in r.times.iter().zip(&r.y).zip(&r.u) {
        let _ = writeln!(out, "{},{},{}", g17(*t), g17(*y), g17(*u));
    }
    let _ = writeln!(out, "# scenario = {}", s.name);
    let _ = writeln!(out, "# nu = {}", nu_label(&s.nu.expand(&s.zeros).unwrap_or_default()));
    let _ = writeln!(out, "# stable = {}", r.stable);
    let _ = writeln!(out, "# stability = {}", class_name(r.stability));
    match &r.metrics {
        Some(m) => {
            let _ = writeln!(out, "# undershoot_frac = {}", g17(m.undershoot_frac));
            let _ = writeln!(out, "# overshoot_frac = {}", g17(m.overshoot_frac));
            let _ = writeln!(out, "# rise_time_s = {}", g17(m.rise_time_s));
            let _ = writeln!(out, "# settling_time_s = {}", g17(m.settling_time_s));
            let _ = writeln!(out, "# ss_error = {}", g17(m.ss_error));
            let _ = writeln!(out, "# y_ss = {}", g17(m.y_ss));
            let _ = writeln!(out, "# effort_peak = {}", opt(m.effort_peak));
        }
        None => out.push_str("# metrics = not settled\n"),
    }
    margin_lines(&mut out, &r.margins);
    let _ = writeln!(out, "# version = {}", r.version);
    out
}

fn class_name(c: fraccancel::StabilityClass) -> &'static str {
    match c {
        fraccancel::StabilityClass::Stable => "stable",
        fraccancel::StabilityClass::Marginal => "marginal",
        fraccancel::StabilityClass::Unstable => "unstable",
    }
}

pub fn cmd_simulate(
    s: Scenario,
    nu: Option<NuChoice>,
    out: Option<&Path>,
    params: &IltParams,
) -> Result<i32> {
    let s = with_nu(s, nu)?;
    let (result, _) = simulate(&s, params)?;
    emit(out, &simulate_csv(&s, &result))?;
    Ok(if result.stable { EXIT_OK } else { EXIT_UNSTABLE })
}

pub const SWEEP_HEADER: &str = "nu,stability,stable,undershoot_frac,overshoot_frac,rise_time_s,\
settling_time_s,ss_error,y_ss,effort_peak,gain_margin_db,phase_margin_deg,\
omega_gain_crossover,omega_phase_crossover";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let m = r.metrics;
        let field = |f: fn(&fraccancel::analysis::Metrics) -> f64| opt(m.as_ref().map(f));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            nu_label(&r.nu),
            class_name(r.class),
            r.stable,
            field(|m| m.undershoot_frac),
            field(|m| m.overshoot_frac),
            field(|m| m.rise_time_s),
            field(|m| m.settling_time_s),
            field(|m| m.ss_error),
            field(|m| m.y_ss),
            opt(m.and_then(|m| m.effort_peak)),
            g17(r.margins.gain_margin_db),
            opt(r.margins.phase_margin_deg),
            opt(r.margins.omega_gain_crossover),
            opt(r.margins.omega_phase_crossover),
        );
    }
    out
}

pub fn cmd_sweep(
    s: Scenario,
    nus: Option<Vec<NuChoice>>,
    out: Option<&Path>,
    params: &IltParams,
) -> Result<i32> {
    let nus = nus.unwrap_or_else(|| s.sweep_or_nominal());
    let result = sweep(&s, &nus, params)?;
    emit(out, &sweep_csv(&result.rows))?;
    Ok(if result.rows.iter().all(|r| r.stable) { EXIT_OK } else { EXIT_UNSTABLE })
}

/// Right-half-plane real zeros of a registry plant's numerator, one per line.
pub fn cmd_zeros(plant: &str) -> Result<String> {
    let p = plant_by_name(plant)?;
    let zeros = real_unstable_zeros(&Poly::from_descending(&p.num))?;
    let mut out = format!("# right-half-plane real zeros of {}\n", p.name);
    for z in zeros {
        let _ = writeln!(out, "{}", g17(z));
    }
    Ok(out)
}

fn margin_row(out: &mut String, label: &str, r: &MarginRow) {
    let m = &r.margins;
    let _ = writeln!(
        out,
        "{label},{},{},{},{},{},{}",
        class_name(r.stability),
        r.stable,
        g17(m.gain_margin_db),
        opt(m.phase_margin_deg),
        opt(m.omega_gain_crossover),
        opt(m.omega_phase_crossover),
    );
}

/// CSV rows `loop,stability,stable,gain_margin_db,phase_margin_deg,...`.
pub fn cmd_margins(s: Scenario, nu: Option<NuChoice>, compare_baseline: bool) -> Result<(String, i32)> {
    let s = with_nu(s, nu)?;
    let report = margin_report(&s)?;
    let mut out = String::from(
        "loop,stability,stable,gain_margin_db,phase_margin_deg,omega_gain_crossover,omega_phase_crossover\n",
    );
    margin_row(&mut out, "canceller", &report.canceller);
    if compare_baseline {
        margin_row(&mut out, "baseline", &report.baseline);
    }
    let code = if report.canceller.stable { EXIT_OK } else { EXIT_UNSTABLE };
    Ok((out, code))
}

/// Default fit band: two decades either side of the scenario's zeros.
pub fn default_band(s: &Scenario) -> (f64, f64) {
    let lo = s.zeros.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = s.zeros.iter().cloned().fold(0.0, f64::max);
    if s.zeros.is_empty() {
        s.band
    } else {
        (lo / 100.0, hi * 100.0)
    }
}

pub fn cmd_realize(
    s: Scenario,
    nu: Option<NuChoice>,
    order: usize,
    band: Option<(f64, f64)>,
    form: ExportForm,
    out: Option<&Path>,
) -> Result<i32> {
    let s = with_nu(s, nu)?;
    let target = composite_canceller(&s.canceller()?)?;
    let band = band.unwrap_or_else(|| default_band(&s));
    let fit = fit_rational(&FitRequest::new(target, band, order))?;
    let mut text = export_filter(&fit, form)?;
    let _ = writeln!(
        text,
        "# band = {} {}\n# max_mag_error_db = {}\n# max_phase_error_deg = {}\n# fit_stable = {}",
        g17(band.0),
        g17(band.1),
        g17(fit.max_mag_error_db),
        g17(fit.max_phase_error_deg),
        fit.fit_stable
    );
    emit(out, &text)?;
    Ok(EXIT_OK)
}
