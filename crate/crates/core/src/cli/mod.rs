//! Batch driver: config parsing, the analysis commands and their outputs.

mod config;
mod output;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{
    parse_config, DichotomyConfig, ExperimentConfig, LogGrid, ResolventConfig, SimulationConfig,
    SpectrumConfig,
};
pub use output::{fmt as fmt_float, read_energy_csv};

use crate::discretization::AssembledSystem;
use crate::error::{BresseError, Result};
use crate::model::{ModelParams, SpeedClass, DEFAULT_SPEED_TOL};
use crate::resolvent::{self, GrowthFit, NormOptions, ProfileOptions, ResolventProfile};
use crate::spectral::{self, EigsOptions};
use crate::timedomain::{self, DecayFit, DecayFitOptions, EnergySeries, InitialPreset, SimConfig};
use output::{fmt, write_csv, write_energy_csv, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Spectrum,
    Resolvent,
    Simulate,
    DecayFit,
    Dichotomy,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Self::Validate,
        Self::Spectrum,
        Self::Resolvent,
        Self::Simulate,
        Self::DecayFit,
        Self::Dichotomy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Validate => "validate",
            Self::Spectrum => "spectrum",
            Self::Resolvent => "resolvent",
            Self::Simulate => "simulate",
            Self::DecayFit => "decay-fit",
            Self::Dichotomy => "dichotomy",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = BresseError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| BresseError::InvalidArgument(format!("unknown command `{s}`")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub config_digest: String,
    pub summary: serde_json::Value,
    pub timings_ms: BTreeMap<String, f64>,
}

struct Timer(BTreeMap<String, f64>);

impl Timer {
    fn time<T>(&mut self, label: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f();
        self.0
            .insert(label.to_string(), start.elapsed().as_secs_f64() * 1e3);
        out
    }
}

pub fn config_digest(cfg: &ExperimentConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    hex::encode(Sha256::digest(bytes))
}

/// Runs `command` and writes its outputs plus `report.json` into `out`.
pub fn run(command: Command, cfg: &ExperimentConfig, out: &Path) -> Result<RunReport> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| BresseError::io(out, e))?;
    let mut timer = Timer(BTreeMap::new());
    let summary = match command {
        Command::Validate => to_value(validate(cfg, &mut timer)?),
        Command::Spectrum => to_value(spectrum(cfg, out, &mut timer)?),
        Command::Resolvent => to_value(resolvent_cmd(cfg, out, &mut timer)?),
        Command::Simulate => to_value(simulate_cmd(cfg, out, &mut timer)?),
        Command::DecayFit => to_value(decay_fit(cfg, out, &mut timer)?),
        Command::Dichotomy => to_value(dichotomy(cfg, out, &mut timer)?),
    };
    let report = RunReport {
        command: command.name().into(),
        version: crate::VERSION.into(),
        config: cfg.clone(),
        config_digest: config_digest(cfg),
        summary,
        timings_ms: timer.0,
    };
    write_json(&out.join("report.json"), &report)?;
    Ok(report)
}

fn to_value<T: Serialize>(v: T) -> serde_json::Value {
    serde_json::to_value(v).expect("summary serializes")
}

fn build(params: &ModelParams, n: usize, timer: &mut Timer, label: &str) -> Result<AssembledSystem> {
    timer.time(label, || AssembledSystem::build(params, n))
}

#[derive(Debug, Serialize)]
pub struct ValidateSummary {
    pub n_dofs: usize,
    pub mesh_n: usize,
    pub alpha_snapped: f64,
    pub beta_snapped: f64,
    pub speed_class: SpeedClass,
    pub params_digest: String,
}

fn validate(cfg: &ExperimentConfig, timer: &mut Timer) -> Result<ValidateSummary> {
    let sys = build(&cfg.params, cfg.mesh_n, timer, "assemble")?;
    let mesh = sys.mesh();
    Ok(ValidateSummary {
        n_dofs: sys.n_dofs(),
        mesh_n: mesh.n_elements(),
        alpha_snapped: mesh.nodes()[mesh.alpha_index()],
        beta_snapped: mesh.nodes()[mesh.beta_index()],
        speed_class: cfg.params.classify_speeds(DEFAULT_SPEED_TOL),
        params_digest: cfg.params.digest(),
    })
}

#[derive(Debug, Serialize)]
pub struct SpectrumSummary {
    pub spectral_abscissa: f64,
    pub min_abs_real: f64,
    pub closest_to_axis: [f64; 2],
    pub eigenvalues: usize,
    pub max_residual: f64,
    pub mesh_n: usize,
}

fn spectrum(cfg: &ExperimentConfig, out: &Path, timer: &mut Timer) -> Result<SpectrumSummary> {
    let sys = build(&cfg.params, cfg.mesh_n, timer, "assemble")?;
    let opts = EigsOptions {
        per_shift: cfg.spectrum.per_shift,
        tol: cfg.spectrum.tol,
        seed: cfg.seed,
        ..EigsOptions::default()
    };
    let report = timer.time("axis_scan", || {
        spectral::axis_scan(&sys.pencil(), &cfg.spectrum.mu_grid, &opts)
    })?;
    let n = report.mesh_size.to_string();
    write_csv(
        &out.join("spectrum.csv"),
        &["re", "im", "residual", "mesh_n"],
        report
            .pairs
            .iter()
            .map(|p| vec![fmt(p.value.re), fmt(p.value.im), fmt(p.residual), n.clone()]),
    )?;
    let summary = SpectrumSummary {
        spectral_abscissa: report.spectral_abscissa,
        min_abs_real: report.min_abs_real,
        closest_to_axis: [report.closest_to_axis.re, report.closest_to_axis.im],
        eigenvalues: report.pairs.len(),
        max_residual: report.max_residual(),
        mesh_n: report.mesh_size,
    };
    write_json(&out.join("spectrum.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct ResolventSummary {
    pub slope: f64,
    pub intercept: f64,
    pub window: [f64; 2],
    pub r_squared: f64,
    pub points: usize,
    pub predicted_exponent: u32,
    /// Fitted slope does not exceed the predicted exponent by more than 1/2.
    pub consistent: bool,
    pub lambda_max: f64,
    pub max_residual: f64,
    pub params_digest: String,
}

fn profile_for(cfg: &ExperimentConfig, sys: &AssembledSystem) -> Result<(ResolventProfile, GrowthFit)> {
    let opts = ProfileOptions {
        c_resolve: cfg.resolvent.c_resolve,
        norm: NormOptions {
            tol: cfg.resolvent.tol,
            max_iters: cfg.resolvent.max_iters,
            seed: cfg.seed,
        },
    };
    let profile = resolvent::profile(sys, &cfg.resolvent.frequencies(), &opts)?;
    let window = cfg
        .resolvent
        .window
        .unwrap_or_else(|| resolvent::default_window(&profile));
    let fit = resolvent::fit_growth_exponent(&profile, window)?;
    Ok((profile, fit))
}

fn resolvent_summary(params: &ModelParams, profile: &ResolventProfile, fit: &GrowthFit) -> ResolventSummary {
    let predicted = params.classify_speeds(DEFAULT_SPEED_TOL).predicted_resolvent_exponent;
    ResolventSummary {
        slope: fit.slope,
        intercept: fit.intercept,
        window: fit.window,
        r_squared: fit.r_squared,
        points: fit.points,
        predicted_exponent: predicted,
        consistent: fit.slope <= f64::from(predicted) + 0.5,
        lambda_max: profile.lambda_max,
        max_residual: profile.residuals.iter().copied().fold(0.0, f64::max),
        params_digest: profile.params_digest.clone(),
    }
}

fn resolvent_cmd(cfg: &ExperimentConfig, out: &Path, timer: &mut Timer) -> Result<ResolventSummary> {
    let sys = build(&cfg.params, cfg.mesh_n, timer, "assemble")?;
    let (profile, fit) = timer.time("profile", || profile_for(cfg, &sys))?;
    write_csv(
        &out.join("resolvent.csv"),
        &["lambda", "norm", "iters", "residual"],
        (0..profile.lambdas.len()).map(|i| {
            vec![
                fmt(profile.lambdas[i]),
                fmt(profile.norms[i]),
                profile.iters[i].to_string(),
                fmt(profile.residuals[i]),
            ]
        }),
    )?;
    let summary = resolvent_summary(&cfg.params, &profile, &fit);
    write_json(&out.join("resolvent.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct SimulationSummary {
    pub preset: InitialPreset,
    pub gamma_hat: f64,
    pub c_hat: f64,
    pub window: [f64; 2],
    pub r_squared: f64,
    pub power_law_like: bool,
    pub domain_norm0: f64,
    /// `sup E(t)·t^γ/‖U₀‖²_D` over the window and all presets, with `γ` the
    /// predicted decay exponent.
    #[serde(rename = "C_obs")]
    pub c_obs: f64,
    pub c_obs_by_preset: BTreeMap<String, f64>,
    pub predicted_decay_exponent: f64,
    pub max_balance_residual: f64,
    pub nonincreasing: bool,
    pub dt: f64,
    pub steps: usize,
}

/// Monotonicity slack relative to the initial energy.
pub const ENERGY_SLACK: f64 = 1e-12;

fn sim_config(cfg: &ExperimentConfig, sys: &AssembledSystem) -> SimConfig {
    let s = &cfg.simulation;
    let base = SimConfig::for_mesh(sys, s.t_final);
    let dt = s.dt.unwrap_or(base.dt);
    SimConfig {
        dt,
        t_final: s.t_final,
        sample_stride: s
            .sample_stride
            .unwrap_or_else(|| ((1.0 / dt).round() as usize).max(1)),
        fit_window: s.fit_window,
    }
}

fn fit_options(cfg: &ExperimentConfig) -> DecayFitOptions {
    DecayFitOptions {
        floor: cfg.simulation.energy_floor,
        power_law_r2: cfg.simulation.power_law_r2,
        ..DecayFitOptions::default()
    }
}

fn run_simulation(
    cfg: &ExperimentConfig,
    params: &ModelParams,
    timer: &mut Timer,
    tag: &str,
) -> Result<(EnergySeries, DecayFit, SimulationSummary, SimConfig)> {
    let sys = build(params, cfg.mesh_n, timer, &format!("assemble{tag}"))?;
    let sc = sim_config(cfg, &sys);
    let gamma = params.classify_speeds(DEFAULT_SPEED_TOL).predicted_decay_exponent;
    let mut main = None;
    let mut by_preset = BTreeMap::new();
    // the configured preset first, then the rest for the scaling constant
    let mut presets = vec![cfg.simulation.preset];
    presets.extend(InitialPreset::ALL.iter().filter(|p| **p != cfg.simulation.preset));
    for p in presets {
        let label = format!("simulate{tag}_{}", preset_name(p));
        let series = timer.time(&label, || timedomain::simulate(&sys, &p.project(&sys)?, &sc))?;
        by_preset.insert(
            preset_name(p).to_string(),
            timedomain::scaled_sup(&series, sc.fit_window, gamma),
        );
        if main.is_none() {
            main = Some(series);
        }
    }
    let series = main.expect("at least one preset");
    let fit = timedomain::fit_decay(&series, sc.fit_window, &fit_options(cfg))?;
    let summary = SimulationSummary {
        preset: cfg.simulation.preset,
        gamma_hat: fit.gamma_hat,
        c_hat: fit.c_hat,
        window: fit.window,
        r_squared: fit.r_squared,
        power_law_like: fit.power_law_like,
        domain_norm0: series.initial_domain_norm,
        c_obs: by_preset.values().copied().fold(0.0, f64::max),
        c_obs_by_preset: by_preset,
        predicted_decay_exponent: gamma,
        max_balance_residual: series.max_residual(),
        nonincreasing: series.is_nonincreasing(ENERGY_SLACK),
        dt: sc.dt,
        steps: sc.n_steps(),
    };
    Ok((series, fit, summary, sc))
}

fn preset_name(p: InitialPreset) -> &'static str {
    match p {
        InitialPreset::Default => "default",
        InitialPreset::Mixed => "mixed",
        InitialPreset::Impulse => "impulse",
    }
}

fn simulate_cmd(cfg: &ExperimentConfig, out: &Path, timer: &mut Timer) -> Result<SimulationSummary> {
    let (series, _, summary, sc) = run_simulation(cfg, &cfg.params, timer, "")?;
    write_energy_csv(&out.join("energy.csv"), &series, sc.sample_stride)?;
    write_json(&out.join("energy.json"), &summary)?;
    Ok(summary)
}

fn decay_fit(cfg: &ExperimentConfig, out: &Path, timer: &mut Timer) -> Result<DecayFit> {
    let path = out.join("energy.csv");
    let series = read_energy_csv(&path)?;
    let fit = timer.time("fit", || {
        timedomain::fit_decay(&series, cfg.simulation.fit_window, &fit_options(cfg))
    })?;
    write_json(&out.join("decay.json"), &fit)?;
    Ok(fit)
}

#[derive(Debug, Serialize)]
pub struct DichotomySummary {
    pub slope_equal: f64,
    pub slope_unequal: f64,
    pub gamma_equal: f64,
    pub gamma_unequal: f64,
    pub ordering_ok: bool,
    pub slope_ordering_ok: bool,
    pub gamma_ordering_ok: bool,
    pub equal: DichotomyVariant,
    pub unequal: DichotomyVariant,
}

#[derive(Debug, Serialize)]
pub struct DichotomyVariant {
    pub params: ModelParams,
    pub resolvent: ResolventSummary,
    pub decay: SimulationSummary,
}

/// Equal-speed and unequal-speed variants derived from `params`.
pub fn dichotomy_variants(params: &ModelParams, k2_factor: f64) -> (ModelParams, ModelParams) {
    let equal = params.with_equal_speeds();
    let unequal = ModelParams {
        k2: equal.k2 * k2_factor,
        ..equal
    };
    (equal, unequal)
}

fn dichotomy(cfg: &ExperimentConfig, out: &Path, timer: &mut Timer) -> Result<DichotomySummary> {
    let (pe, pu) = dichotomy_variants(&cfg.params, cfg.dichotomy.k2_factor);
    let se = build(&pe, cfg.mesh_n, timer, "assemble_equal")?;
    let su = build(&pu, cfg.mesh_n, timer, "assemble_unequal")?;
    let (prof_e, fit_e) = timer.time("profile_equal", || profile_for(cfg, &se))?;
    let (prof_u, fit_u) = timer.time("profile_unequal", || profile_for(cfg, &su))?;
    let (ser_e, _, dec_e, _) = run_simulation(cfg, &pe, timer, "_equal")?;
    let (ser_u, _, dec_u, _) = run_simulation(cfg, &pu, timer, "_unequal")?;

    write_csv(
        &out.join("dichotomy_resolvent.csv"),
        &["lambda", "norm_equal", "norm_unequal"],
        (0..prof_e.lambdas.len())
            .map(|i| vec![fmt(prof_e.lambdas[i]), fmt(prof_e.norms[i]), fmt(prof_u.norms[i])]),
    )?;
    write_csv(
        &out.join("dichotomy_energy.csv"),
        &["t", "E_equal", "E_unequal"],
        (0..ser_e.times.len())
            .map(|i| vec![fmt(ser_e.times[i]), fmt(ser_e.energies[i]), fmt(ser_u.energies[i])]),
    )?;
    let row = |name: &str, p: &ModelParams, r: &GrowthFit, d: &SimulationSummary| {
        let class = p.classify_speeds(DEFAULT_SPEED_TOL);
        vec![
            name.to_string(),
            fmt(p.k1 / p.rho1),
            fmt(p.k2 / p.rho2),
            fmt(r.slope),
            class.predicted_resolvent_exponent.to_string(),
            fmt(r.r_squared),
            fmt(d.gamma_hat),
            fmt(class.predicted_decay_exponent),
            fmt(d.r_squared),
            fmt(d.c_obs),
        ]
    };
    write_csv(
        &out.join("dichotomy.csv"),
        &[
            "variant",
            "k1_over_rho1",
            "k2_over_rho2",
            "slope",
            "predicted_slope",
            "slope_r_squared",
            "gamma_hat",
            "predicted_gamma",
            "gamma_r_squared",
            "C_obs",
        ],
        [
            row("equal", &pe, &fit_e, &dec_e),
            row("unequal", &pu, &fit_u, &dec_u),
        ],
    )?;

    let slope_ordering_ok = fit_u.slope > fit_e.slope;
    let gamma_ordering_ok = dec_e.gamma_hat > dec_u.gamma_hat;
    let summary = DichotomySummary {
        slope_equal: fit_e.slope,
        slope_unequal: fit_u.slope,
        gamma_equal: dec_e.gamma_hat,
        gamma_unequal: dec_u.gamma_hat,
        ordering_ok: slope_ordering_ok && gamma_ordering_ok,
        slope_ordering_ok,
        gamma_ordering_ok,
        equal: DichotomyVariant {
            params: pe,
            resolvent: resolvent_summary(&pe, &prof_e, &fit_e),
            decay: dec_e,
        },
        unequal: DichotomyVariant {
            params: pu,
            resolvent: resolvent_summary(&pu, &prof_u, &fit_u),
            decay: dec_u,
        },
    };
    write_json(&out.join("dichotomy.json"), &summary)?;
    Ok(summary)
}

/// Resolves the output directory: explicit override, else the config value.
pub fn output_dir(cfg: &ExperimentConfig, override_dir: Option<&Path>) -> PathBuf {
    override_dir.map_or_else(|| PathBuf::from(&cfg.output_dir), Path::to_path_buf)
}
