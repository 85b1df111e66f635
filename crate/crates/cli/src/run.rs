use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};

use fraccancel::analysis::{margins, nu_sweep, simulate_loop, LoopRun, Margins, Metrics, NuChoice, SweepRow};
use fraccancel::bench::{load_scenario, scenario_by_name, Scenario, ScenarioFile};
use fraccancel::ilt::IltParams;
use fraccancel::{loop_maps, stability, StabilityClass, VERSION};

/// One simulated loop as returned by `simulate` and `/api/simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub scenario: ScenarioFile,
    pub times: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    /// Absent when the response did not settle.
    pub metrics: Option<Metrics>,
    pub margins: Margins,
    pub stable: bool,
    pub stability: StabilityClass,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub scenario: ScenarioFile,
    pub rows: Vec<SweepRow>,
    pub version: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginRow {
    pub stable: bool,
    pub stability: StabilityClass,
    pub margins: Margins,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub scenario: ScenarioFile,
    pub canceller: MarginRow,
    /// Same loop without the canceller.
    pub baseline: MarginRow,
    pub version: String,
}

/// Built-in scenario name or path to a TOML file.
pub fn resolve_scenario(arg: &str) -> Result<Scenario> {
    if let Ok(s) = scenario_by_name(arg) {
        return Ok(s);
    }
    let path = std::path::Path::new(arg);
    if path.is_file() {
        return load_scenario(path).with_context(|| format!("loading scenario file `{arg}`"));
    }
    Err(anyhow!("unknown scenario `{arg}` (not a built-in name or a readable file)"))
}

/// `20` for every zero, or `4:5:6` per zero.
pub fn parse_nu(text: &str) -> Result<NuChoice> {
    let parts: Vec<u32> = text
        .split(':')
        .map(|p| p.trim().parse::<u32>().with_context(|| format!("bad nu value `{p}`")))
        .collect::<Result<_>>()?;
    Ok(match parts[..] {
        [one] => NuChoice::Uniform(one),
        _ => NuChoice::PerZero(parts),
    })
}

pub fn simulate(s: &Scenario, params: &IltParams) -> fraccancel::Result<(RunResult, LoopRun)> {
    let run = simulate_loop(&s.loop_model()?, s.horizon_s, s.n_points, params, s.band)?;
    let result = RunResult {
        scenario: s.to_file().clone(),
        times: run.output.times.clone(),
        y: run.output.values.clone(),
        u: run.effort.values.clone(),
        metrics: run.metrics.clone().ok(),
        margins: run.margins,
        stable: run.stable(),
        stability: run.stability.class,
        version: VERSION.to_string(),
    };
    Ok((result, run))
}

pub fn sweep(s: &Scenario, nus: &[NuChoice], params: &IltParams) -> fraccancel::Result<SweepResult> {
    let plant = s.plant.transfer_function()?;
    let rows = nu_sweep(
        &plant,
        &s.zeros,
        nus,
        &s.controller,
        s.horizon_s,
        s.n_points,
        params,
        s.band,
    )?;
    Ok(SweepResult {
        scenario: s.to_file().clone(),
        rows,
        version: VERSION.to_string(),
    })
}

pub fn margin_report(s: &Scenario) -> fraccancel::Result<MarginReport> {
    let row = |model| -> fraccancel::Result<MarginRow> {
        let maps = loop_maps(&model)?;
        let st = stability(&maps.complementary)?;
        Ok(MarginRow {
            stable: st.tracks_steps(),
            stability: st.class,
            margins: margins(&maps.open_loop, s.band.0, s.band.1)?,
        })
    };
    Ok(MarginReport {
        scenario: s.to_file().clone(),
        canceller: row(s.loop_model()?)?,
        baseline: row(s.baseline_model()?)?,
        version: VERSION.to_string(),
    })
}

/// Default inversion settings with an optional series-length override.
pub fn ilt_params(series_terms: Option<usize>) -> Result<IltParams> {
    let mut p = IltParams::default();
    if let Some(n) = series_terms {
        p.series_terms = n;
    }
    p.validate().context("ILT settings")?;
    Ok(p)
}
