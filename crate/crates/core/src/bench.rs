//! The two flexible-link robot plants and the stock scenarios built on them.
//!
//! A scenario file is TOML (or JSON over HTTP) with these keys:
//!
//! ```toml
//! name = "ex1-fig3"          # optional
//! plant = "example1"         # registry name, or an inline table:
//!                            # [plant] name = "..", num = [..], den = [..]
//! zeros = [8.2057]           # optional, defaults to the plant's known zeros
//! nu = [20]                  # one per zero, or a single integer for all
//! sweep = [[15], [20], [25]] # optional list of nu configurations
//! kp = 0.1
//! ki = 0.0                   # optional, default 0
//! kd = 0.5
//! lambda = 1.0               # optional, default 1
//! mu = 1.0                   # optional, default 1
//! horizon_s = 60.0
//! n_points = 2000
//! band_lo = 0.001            # optional, default 1e-3
//! band_hi = 1000.0           # optional, default 1e3
//! ```
//!
//! Coefficient lists are in descending powers of `s`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{NuChoice, DEFAULT_BAND};
use crate::error::{Error, Result};
use crate::fotf::{CancellerSpec, ControllerSpec, Fotf, LoopModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantModel {
    pub name: String,
    pub num: Vec<f64>,
    pub den: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub known_nmp_zeros: Vec<f64>,
}

impl PlantModel {
    pub fn validate(&self, path: &str) -> Result<()> {
        if self.num.is_empty() {
            return Err(Error::schema(format!("{path}.num"), "coefficient list is empty"));
        }
        match self.den.first() {
            None => Err(Error::schema(format!("{path}.den"), "coefficient list is empty")),
            Some(&c) if c == 0.0 || !c.is_finite() => {
                Err(Error::schema(format!("{path}.den[0]"), "leading coefficient must be nonzero"))
            }
            _ => {
                let bad = self.num.iter().chain(&self.den).any(|c| !c.is_finite());
                if bad {
                    Err(Error::schema(path, "coefficients must be finite"))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn transfer_function(&self) -> Result<Fotf> {
        Fotf::from_coeffs(&self.num, &self.den)
    }
}

/// One-link flexible arm, with its right-half-plane zero near 8.2057.
pub fn plant_example1() -> PlantModel {
    PlantModel {
        name: "example1".into(),
        num: vec![-4.906, -0.5884, 335.17],
        den: vec![1.0, 0.55437, 139.6, 27.91, 0.0],
        known_nmp_zeros: vec![8.2057],
    }
}

/// Identified flexible-link manipulator: degree 6 over degree 9, three
/// right-half-plane zeros.
pub fn plant_example2() -> PlantModel {
    PlantModel {
        name: "example2".into(),
        num: vec![
            -14340.4953,
            0.4446e7,
            0.5697e9,
            -0.1908e11,
            -0.9354e12,
            0.6919e13,
            0.2839e15,
        ],
        den: vec![
            1.0,
            486.7,
            69317.7,
            0.1616e8,
            0.1062e10,
            0.6167e11,
            0.2624e13,
            0.3595e14,
            0.142e15,
            0.0,
        ],
        known_nmp_zeros: vec![400.0282, 45.0015, 19.9982],
    }
}

pub fn plants() -> Vec<PlantModel> {
    vec![plant_example1(), plant_example2()]
}

pub fn plant_by_name(name: &str) -> Result<PlantModel> {
    plants()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Unknown {
            kind: "plant",
            name: name.to_string(),
        })
}

/// Plant given by registry name or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlantRef {
    Name(String),
    Inline(PlantModel),
}

/// Interchange form of a scenario, shared by files and the HTTP API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeros: Option<Vec<f64>>,
    pub nu: NuChoice,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<NuChoice>,
    pub kp: f64,
    #[serde(default)]
    pub ki: f64,
    pub kd: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "one")]
    pub mu: f64,
    pub horizon_s: f64,
    pub n_points: usize,
    #[serde(default = "band_lo")]
    pub band_lo: f64,
    #[serde(default = "band_hi")]
    pub band_hi: f64,
    // tables must follow plain values in TOML output
    pub plant: PlantRef,
}

fn one() -> f64 {
    1.0
}
fn band_lo() -> f64 {
    DEFAULT_BAND.0
}
fn band_hi() -> f64 {
    DEFAULT_BAND.1
}

/// A validated experiment: plant, canceller, controller and simulation
/// settings, plus optional `nu` configurations for sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub plant: PlantModel,
    pub zeros: Vec<f64>,
    pub nu: NuChoice,
    pub sweep: Vec<NuChoice>,
    pub controller: ControllerSpec,
    pub horizon_s: f64,
    pub n_points: usize,
    pub band: (f64, f64),
    file: ScenarioFile,
}

impl Scenario {
    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let plant = match &file.plant {
            PlantRef::Name(n) => plant_by_name(n).map_err(|_| {
                Error::schema("plant", format!("unknown plant `{n}`"))
            })?,
            PlantRef::Inline(p) => {
                p.validate("plant")?;
                p.clone()
            }
        };
        let zeros = file.zeros.clone().unwrap_or_else(|| plant.known_nmp_zeros.clone());
        for (i, z) in zeros.iter().enumerate() {
            if !(*z > 0.0) || !z.is_finite() {
                return Err(Error::schema(format!("zeros[{i}]"), "zero location must be positive"));
            }
        }
        check_nu("nu", &file.nu, &zeros)?;
        for (i, c) in file.sweep.iter().enumerate() {
            check_nu(&format!("sweep[{i}]"), c, &zeros)?;
        }
        let controller = ControllerSpec {
            kp: file.kp,
            ki: file.ki,
            kd: file.kd,
            lambda: file.lambda,
            mu: file.mu,
        };
        controller.validate().map_err(|e| match e {
            Error::InvalidArgument { field, reason } => Error::schema(field, reason),
            other => other,
        })?;
        if !(file.horizon_s > 0.0) || !file.horizon_s.is_finite() {
            return Err(Error::schema("horizon_s", "must be positive"));
        }
        if file.n_points < 2 {
            return Err(Error::schema("n_points", "must be at least 2"));
        }
        if !(file.band_lo > 0.0) {
            return Err(Error::schema("band_lo", "must be positive"));
        }
        if !(file.band_hi > file.band_lo) || !file.band_hi.is_finite() {
            return Err(Error::schema("band_hi", "must exceed band_lo"));
        }
        Ok(Scenario {
            name: file.name.clone().unwrap_or_else(|| "custom".into()),
            plant,
            zeros,
            nu: file.nu.clone(),
            sweep: file.sweep.clone(),
            controller,
            horizon_s: file.horizon_s,
            n_points: file.n_points,
            band: (file.band_lo, file.band_hi),
            file,
        })
    }

    pub fn to_file(&self) -> &ScenarioFile {
        &self.file
    }

    /// The same scenario with a different nominal `nu`.
    pub fn with_nu(&self, nu: NuChoice) -> Result<Scenario> {
        Scenario::from_file(ScenarioFile {
            nu,
            ..self.file.clone()
        })
    }

    pub fn canceller(&self) -> Result<CancellerSpec> {
        self.nu.canceller(&self.zeros)
    }

    pub fn loop_model(&self) -> Result<LoopModel> {
        Ok(LoopModel::new(
            self.plant.transfer_function()?,
            self.canceller()?,
            self.controller,
        ))
    }

    /// The loop with the canceller removed.
    pub fn baseline_model(&self) -> Result<LoopModel> {
        Ok(LoopModel::new(
            self.plant.transfer_function()?,
            CancellerSpec::none(),
            self.controller,
        ))
    }

    /// Sweep configurations, or the nominal one when none are listed.
    pub fn sweep_or_nominal(&self) -> Vec<NuChoice> {
        if self.sweep.is_empty() {
            vec![self.nu.clone()]
        } else {
            self.sweep.clone()
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&self.file).map_err(|e| Error::schema("<root>", e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Scenario> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            Error::schema(field_from_message(&msg).unwrap_or("<root>"), msg.clone())
        })?;
        Scenario::from_file(file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }
}

fn check_nu(path: &str, choice: &NuChoice, zeros: &[f64]) -> Result<()> {
    let values = match choice {
        NuChoice::Uniform(nu) => vec![*nu],
        NuChoice::PerZero(v) => v.clone(),
    };
    if let Some(i) = values.iter().position(|&nu| nu < 1) {
        let at = match choice {
            NuChoice::Uniform(_) => path.to_string(),
            NuChoice::PerZero(_) => format!("{path}[{i}]"),
        };
        return Err(Error::schema(at, "nu must be an integer >= 1"));
    }
    choice
        .expand(zeros)
        .map(|_| ())
        .map_err(|e| Error::schema(path, e.to_string()))
}

/// Pulls a field name out of messages like "missing field `kp`".
pub fn field_from_message(msg: &str) -> Option<&str> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(&msg[start..start + len])
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    Scenario::from_toml(&text)
}

fn builtin(
    name: &str,
    plant: &str,
    nu: u32,
    sweep: &[u32],
    kp: f64,
    kd: f64,
    horizon_s: f64,
) -> Scenario {
    Scenario::from_file(ScenarioFile {
        name: Some(name.into()),
        plant: PlantRef::Name(plant.into()),
        zeros: None,
        nu: NuChoice::Uniform(nu),
        sweep: sweep.iter().map(|&n| NuChoice::Uniform(n)).collect(),
        kp,
        ki: 0.0,
        kd,
        lambda: 1.0,
        mu: 1.0,
        horizon_s,
        n_points: 2000,
        band_lo: DEFAULT_BAND.0,
        band_hi: DEFAULT_BAND.1,
    })
    .expect("built-in scenarios are valid")
}

pub fn builtin_scenarios() -> Vec<Scenario> {
    vec![
        builtin("ex1-fig3", "example1", 20, &[15, 20, 25], 0.1, 0.5, 60.0),
        builtin("ex1-fig4", "example1", 2, &[], 0.05, 0.05, 60.0),
        builtin("ex2-fig5", "example2", 5, &[4, 5, 6], 5.0, 2.0, 10.0),
    ]
}

pub fn scenario_by_name(name: &str) -> Result<Scenario> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::Unknown {
            kind: "scenario",
            name: name.to_string(),
        })
}
