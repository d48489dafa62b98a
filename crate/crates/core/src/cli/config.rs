use serde::{Deserialize, Serialize};

use crate::error::{BresseError, Result};
use crate::model::ModelParams;
use crate::resolvent::log_grid;
use crate::timedomain::InitialPreset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub mesh_n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub resolvent: ResolventConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub dichotomy: DichotomyConfig,
}

fn default_output_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    /// Shifts `iμ` for the shift-invert eigensolver.
    pub mu_grid: Vec<f64>,
    pub per_shift: usize,
    pub tol: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            mu_grid: (1..=50).map(f64::from).collect(),
            per_shift: 4,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResolventConfig {
    /// Explicit frequencies; overrides `log_grid` when present.
    pub grid: Option<Vec<f64>>,
    pub log_grid: LogGrid,
    pub c_resolve: f64,
    /// Defaults to `[max(3, λ_max/10), λ_max]` clipped to the grid.
    pub window: Option<[f64; 2]>,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for ResolventConfig {
    fn default() -> Self {
        Self {
            grid: None,
            log_grid: LogGrid {
                lo: 1.0,
                hi: 10f64.powf(1.5),
                count: 25,
            },
            c_resolve: 1.0,
            window: None,
            tol: 1e-6,
            max_iters: 200,
        }
    }
}

impl ResolventConfig {
    pub fn frequencies(&self) -> Vec<f64> {
        match &self.grid {
            Some(g) => g.clone(),
            None => log_grid(self.log_grid.lo, self.log_grid.hi, self.log_grid.count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    /// Defaults to `h/2`.
    pub dt: Option<f64>,
    pub t_final: f64,
    /// Defaults to one sample per unit of time.
    pub sample_stride: Option<usize>,
    pub fit_window: [f64; 2],
    pub preset: InitialPreset,
    pub energy_floor: f64,
    pub power_law_r2: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            dt: None,
            t_final: 200.0,
            sample_stride: None,
            fit_window: [10.0, 100.0],
            preset: InitialPreset::Default,
            energy_floor: 1e-8,
            power_law_r2: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DichotomyConfig {
    /// The unequal-speed variant multiplies `k2` of the equal-speed one by
    /// this factor.
    pub k2_factor: f64,
}

impl Default for DichotomyConfig {
    fn default() -> Self {
        Self { k2_factor: 2.0 }
    }
}

/// Parses and validates a JSON experiment description.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        if inner.is_syntax() || inner.is_eof() {
            return BresseError::Parse {
                line: inner.line(),
                column: inner.column(),
                message: strip_position(&inner.to_string()),
            };
        }
        let message = strip_position(&inner.to_string());
        // serde reports a missing key at its parent
        if let Some(field) = message
            .strip_prefix("missing field `")
            .and_then(|r| r.strip_suffix('`'))
        {
            let path = if path == "." { field.to_string() } else { format!("{path}.{field}") };
            return BresseError::Schema {
                path,
                expected: "a required field".into(),
            };
        }
        BresseError::Schema { path, expected: message }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn finite(path: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(BresseError::Schema {
            path: path.into(),
            expected: "a finite number".into(),
        })
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(BresseError::NonPositiveParameter(name.into()))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.mesh_n < crate::discretization::MIN_ELEMENTS {
            return Err(BresseError::TooCoarse(format!(
                "mesh_n={} is below {}",
                self.mesh_n,
                crate::discretization::MIN_ELEMENTS
            )));
        }
        for (i, &m) in self.spectrum.mu_grid.iter().enumerate() {
            finite(&format!("spectrum.mu_grid[{i}]"), m)?;
        }
        positive("spectrum.tol", self.spectrum.tol)?;
        if self.spectrum.per_shift == 0 {
            return Err(BresseError::NonPositiveParameter("spectrum.per_shift".into()));
        }
        let r = &self.resolvent;
        if let Some(g) = &r.grid {
            for (i, &l) in g.iter().enumerate() {
                finite(&format!("resolvent.grid[{i}]"), l)?;
            }
        } else {
            positive("resolvent.log_grid.lo", r.log_grid.lo)?;
            positive("resolvent.log_grid.hi", r.log_grid.hi)?;
        }
        positive("resolvent.c_resolve", r.c_resolve)?;
        positive("resolvent.tol", r.tol)?;
        if let Some([a, b]) = r.window {
            finite("resolvent.window[0]", a)?;
            finite("resolvent.window[1]", b)?;
        }
        let s = &self.simulation;
        if let Some(dt) = s.dt {
            positive("simulation.dt", dt)?;
        }
        positive("simulation.t_final", s.t_final)?;
        finite("simulation.fit_window[0]", s.fit_window[0])?;
        finite("simulation.fit_window[1]", s.fit_window[1])?;
        finite("simulation.energy_floor", s.energy_floor)?;
        finite("simulation.power_law_r2", s.power_law_r2)?;
        positive("dichotomy.k2_factor", self.dichotomy.k2_factor)?;
        Ok(())
    }
}
