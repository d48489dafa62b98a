//! Implicit midpoint integration of `U_t = A_h U` and decay fitting.
//!
//! One step solves `(M + dt/2·C + dt²/4·K) v_mid = M v − dt/2·K q`, then
//! `q' = q + dt·v_mid` and `v' = 2 v_mid − v`. Discrete energy changes by
//! exactly `−dt·v_midᵀ C v_mid`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretization::{AssembledSystem, InitialFields, StateVector};
use crate::error::{BresseError, Result};
use crate::linalg::{from_parts, imag_part, least_squares_line, real_part};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub t_final: f64,
    pub sample_stride: usize,
    pub fit_window: [f64; 2],
}

impl SimConfig {
    /// `dt = h/2`, one sample per unit of time, fit on `[10, t_final]`.
    pub fn for_mesh(sys: &AssembledSystem, t_final: f64) -> Self {
        let dt = sys.mesh().nominal_width() / 2.0;
        Self {
            dt,
            t_final,
            sample_stride: ((1.0 / dt).round() as usize).max(1),
            fit_window: [10.0_f64.min(t_final / 2.0), t_final],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(BresseError::NonPositiveParameter("dt".into()));
        }
        if !(self.t_final >= 10.0 * self.dt) {
            return Err(BresseError::InvalidArgument(format!(
                "t_final={} must be at least 10·dt={}",
                self.t_final,
                10.0 * self.dt
            )));
        }
        if self.sample_stride == 0 {
            return Err(BresseError::NonPositiveParameter("sample_stride".into()));
        }
        let [lo, hi] = self.fit_window;
        if !(lo > 0.0 && lo < hi && hi <= self.t_final) {
            return Err(BresseError::InvalidArgument(format!(
                "fit_window [{lo}, {hi}] must lie in (0, {}]",
                self.t_final
            )));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Cached factorization for repeated steps at a fixed `dt`.
pub struct Midpoint<'a> {
    sys: &'a AssembledSystem,
    dt: f64,
    chol: Cholesky<f64, Dyn>,
}

/// Real state after one step, with the energy-balance data of that step.
pub struct StepOutcome {
    pub q: DVector<f64>,
    pub v: DVector<f64>,
    pub dissipated: f64,
}

impl<'a> Midpoint<'a> {
    pub fn new(sys: &'a AssembledSystem, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(BresseError::NonPositiveParameter("dt".into()));
        }
        let a: DMatrix<f64> =
            sys.mass() + sys.damping() * (dt / 2.0) + sys.stiffness() * (dt * dt / 4.0);
        let chol = Cholesky::new(a).ok_or_else(|| {
            BresseError::FactorizationFailed("midpoint matrix is not positive definite".into())
        })?;
        Ok(Self { sys, dt, chol })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step_real(&self, q: &DVector<f64>, v: &DVector<f64>) -> StepOutcome {
        let rhs = self.sys.mass() * v - self.sys.stiffness() * q * (self.dt / 2.0);
        let vm = self.chol.solve(&rhs);
        let dissipated = self.dt * vm.dot(&(self.sys.damping() * &vm));
        StepOutcome {
            q: q + &vm * self.dt,
            v: &vm * 2.0 - v,
            dissipated,
        }
    }

    pub fn step(&self, u: &StateVector) -> Result<StateVector> {
        let n = self.sys.n_dofs();
        if u.q.len() != n || u.v.len() != n {
            return Err(BresseError::DimensionMismatch {
                expected: n,
                found: u.q.len().max(u.v.len()),
            });
        }
        let re = self.step_real(&real_part(&u.q), &real_part(&u.v));
        let im = self.step_real(&imag_part(&u.q), &imag_part(&u.v));
        Ok(StateVector {
            q: from_parts(&re.q, &im.q),
            v: from_parts(&re.v, &im.v),
        })
    }
}

/// One implicit midpoint step.
pub fn step_midpoint(sys: &AssembledSystem, u: &StateVector, dt: f64) -> Result<StateVector> {
    Midpoint::new(sys, dt)?.step(u)
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergySeries {
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    pub kinetic: Vec<f64>,
    pub potential: Vec<f64>,
    /// Per step, `|E' − E + dt·v_midᵀCv_mid| / (E₀ + ε)`.
    pub residuals: Vec<f64>,
    /// Squared graph norm of the initial state.
    pub initial_domain_norm: f64,
}

impl EnergySeries {
    pub fn initial_energy(&self) -> f64 {
        self.energies.first().copied().unwrap_or(0.0)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Largest increase between consecutive samples, relative to `E₀`.
    pub fn max_relative_increase(&self) -> f64 {
        let e0 = self.initial_energy().max(f64::MIN_POSITIVE);
        self.energies
            .windows(2)
            .map(|w| (w[1] - w[0]) / e0)
            .fold(0.0, f64::max)
    }

    pub fn is_nonincreasing(&self, slack: f64) -> bool {
        self.max_relative_increase() <= slack
    }

    /// Energy at the sample closest to `t`.
    pub fn energy_near(&self, t: f64) -> Option<f64> {
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))?
            .0;
        Some(self.energies[i])
    }
}

pub fn simulate(sys: &AssembledSystem, u0: &StateVector, cfg: &SimConfig) -> Result<EnergySeries> {
    cfg.validate()?;
    let n = sys.n_dofs();
    if u0.q.len() != n || u0.v.len() != n {
        return Err(BresseError::DimensionMismatch {
            expected: n,
            found: u0.q.len().max(u0.v.len()),
        });
    }
    let integ = Midpoint::new(sys, cfg.dt)?;
    let initial_domain_norm = sys.domain_norm(u0)?;

    // real and imaginary parts evolve independently; energy is additive
    let mut parts = vec![(real_part(&u0.q), real_part(&u0.v))];
    if u0.q.iter().chain(u0.v.iter()).any(|z| z.im != 0.0) {
        parts.push((imag_part(&u0.q), imag_part(&u0.v)));
    }
    let energy = |q: &DVector<f64>, v: &DVector<f64>| {
        (
            0.5 * v.dot(&(sys.mass() * v)),
            0.5 * q.dot(&(sys.stiffness() * q)),
        )
    };
    let sample = |parts: &[(DVector<f64>, DVector<f64>)]| {
        parts.iter().fold((0.0, 0.0), |(k, p), (q, v)| {
            let (dk, dp) = energy(q, v);
            (k + dk, p + dp)
        })
    };

    let steps = cfg.n_steps();
    let mut series = EnergySeries {
        times: Vec::with_capacity(steps / cfg.sample_stride + 2),
        energies: Vec::new(),
        kinetic: Vec::new(),
        potential: Vec::new(),
        residuals: Vec::with_capacity(steps),
        initial_domain_norm,
    };
    let (k0, p0) = sample(&parts);
    let e0 = k0 + p0;
    let scale = e0 + f64::EPSILON;
    let push = |s: &mut EnergySeries, t: f64, k: f64, p: f64| {
        s.times.push(t);
        s.kinetic.push(k);
        s.potential.push(p);
        s.energies.push(k + p);
    };
    push(&mut series, 0.0, k0, p0);

    let mut e_prev = e0;
    for step in 1..=steps {
        let mut dissipated = 0.0;
        for part in parts.iter_mut() {
            let out = integ.step_real(&part.0, &part.1);
            dissipated += out.dissipated;
            *part = (out.q, out.v);
        }
        let (k, p) = sample(&parts);
        let e = k + p;
        series.residuals.push((e - e_prev + dissipated).abs() / scale);
        e_prev = e;
        if step % cfg.sample_stride == 0 || step == steps {
            push(&mut series, step as f64 * cfg.dt, k, p);
        }
    }
    Ok(series)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFitOptions {
    /// Samples below `floor·E₀` are dropped.
    pub floor: f64,
    pub min_points: usize,
    /// A log-log fit with smaller `r²` is flagged as not power-law like.
    pub power_law_r2: f64,
}

impl Default for DecayFitOptions {
    fn default() -> Self {
        Self {
            floor: 1e-8,
            min_points: 10,
            power_law_r2: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// `E(t) ≈ c_hat · t^(−gamma_hat)`.
    pub gamma_hat: f64,
    pub c_hat: f64,
    pub window: [f64; 2],
    pub r_squared: f64,
    pub points: usize,
    pub power_law_like: bool,
}

pub fn fit_decay(series: &EnergySeries, window: [f64; 2], opts: &DecayFitOptions) -> Result<DecayFit> {
    let [lo, hi] = window;
    let (first, last) = match (series.times.first(), series.times.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => {
            return Err(BresseError::WindowTooSmall {
                found: 0,
                needed: opts.min_points,
            })
        }
    };
    if !(lo > 0.0 && lo < hi && lo >= first && hi <= last * (1.0 + 1e-12)) {
        return Err(BresseError::InvalidArgument(format!(
            "fit window [{lo}, {hi}] must lie in the series range (0, {last}]"
        )));
    }
    let floor = opts.floor * series.initial_energy();
    let in_window: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.energies)
        .filter(|(t, _)| (lo..=hi).contains(*t))
        .map(|(t, e)| (*t, *e))
        .collect();
    if in_window.len() < opts.min_points {
        return Err(BresseError::WindowTooSmall {
            found: in_window.len(),
            needed: opts.min_points,
        });
    }
    let kept: Vec<(f64, f64)> = in_window
        .iter()
        .copied()
        .filter(|&(_, e)| e > 0.0 && e >= floor)
        .collect();
    if kept.len() < opts.min_points {
        let t = in_window
            .iter()
            .find(|&&(_, e)| !(e > 0.0 && e >= floor))
            .map_or(lo, |p| p.0);
        return Err(BresseError::NonpositiveEnergy(t));
    }
    let x: Vec<f64> = kept.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = kept.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r_squared) = least_squares_line(&x, &y);
    Ok(DecayFit {
        gamma_hat: -slope,
        c_hat: intercept.exp(),
        window,
        r_squared,
        points: kept.len(),
        power_law_like: r_squared >= opts.power_law_r2,
    })
}

/// Smooth initial data compatible with the clamped ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialPreset {
    /// `φ = sin(πx/L)`, `ψ = sin(2πx/L)`, `w = sin(πx/L)`, at rest.
    Default,
    /// Bubble `4x(L−x)/L²` in `φ`, third mode in `w`, first mode in `w_t`.
    Mixed,
    /// Zero displacement, sine velocities in all three fields.
    Impulse,
}

impl InitialPreset {
    pub const ALL: [InitialPreset; 3] = [Self::Default, Self::Mixed, Self::Impulse];

    pub fn project(self, sys: &AssembledSystem) -> Result<StateVector> {
        use std::f64::consts::PI;
        let length = sys.mesh().length();
        let s = move |k: f64| move |x: f64| (k * PI * x / length).sin();
        let zero = |_: f64| 0.0;
        let bubble = move |x: f64| 4.0 * x * (length - x) / (length * length);
        let (s1, s2, s3) = (s(1.0), s(2.0), s(3.0));
        let fields = match self {
            Self::Default => InitialFields {
                phi0: &s1,
                phi1: &zero,
                psi0: &s2,
                psi1: &zero,
                w0: &s1,
                w1: &zero,
            },
            Self::Mixed => InitialFields {
                phi0: &bubble,
                phi1: &zero,
                psi0: &zero,
                psi1: &zero,
                w0: &s3,
                w1: &s1,
            },
            Self::Impulse => InitialFields {
                phi0: &zero,
                phi1: &s2,
                psi0: &zero,
                psi1: &s1,
                w0: &zero,
                w1: &s3,
            },
        };
        let mut u = sys.project_initial_data(&fields)?;
        // nodal values at the ends of sin(kπ) are ~1e-16, not exactly zero
        u.q.iter_mut()
            .chain(u.v.iter_mut())
            .for_each(|z| *z = Complex64::new(z.re, 0.0));
        Ok(u)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub window: [f64; 2],
    pub gamma: f64,
    pub presets: Vec<InitialPreset>,
    /// `sup_t E(t)·t^γ / ‖U₀‖²_D` over the window, per preset.
    pub ratios: Vec<f64>,
    pub c_obs: f64,
}

/// Largest `E(t)·t^γ / ‖U₀‖²_D` over `cfg.fit_window` and several initial
/// states.
pub fn observed_constant(
    sys: &AssembledSystem,
    presets: &[InitialPreset],
    cfg: &SimConfig,
    gamma: f64,
) -> Result<ScalingReport> {
    let [lo, hi] = cfg.fit_window;
    let mut ratios = Vec::with_capacity(presets.len());
    for p in presets {
        let series = simulate(sys, &p.project(sys)?, cfg)?;
        ratios.push(scaled_sup(&series, [lo, hi], gamma));
    }
    Ok(ScalingReport {
        window: cfg.fit_window,
        gamma,
        presets: presets.to_vec(),
        c_obs: ratios.iter().copied().fold(0.0, f64::max),
        ratios,
    })
}

/// `sup_t E(t)·t^γ / ‖U₀‖²_D` over samples in `window`.
pub fn scaled_sup(series: &EnergySeries, window: [f64; 2], gamma: f64) -> f64 {
    series
        .times
        .iter()
        .zip(&series.energies)
        .filter(|(t, _)| (window[0]..=window[1]).contains(*t))
        .map(|(t, e)| e * t.powf(gamma) / series.initial_domain_norm)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Mesh;
    use crate::model::ModelParams;

    fn synthetic(f: impl Fn(f64) -> f64) -> EnergySeries {
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        EnergySeries {
            energies: times.iter().map(|&t| f(t)).collect(),
            kinetic: vec![0.0; times.len()],
            potential: vec![0.0; times.len()],
            residuals: vec![],
            initial_domain_norm: 1.0,
            times,
        }
    }

    #[test]
    fn inverse_law_recovered() {
        let s = synthetic(|t| if t == 0.0 { 1.0 } else { 1.0 / t });
        let fit = fit_decay(&s, [1.0, 10.0], &DecayFitOptions::default()).unwrap();
        assert!((fit.gamma_hat - 1.0).abs() <= 1e-10, "{fit:?}");
        assert!((fit.c_hat - 1.0).abs() <= 1e-10);
        assert!(fit.power_law_like);
    }

    #[test]
    fn exponential_flagged() {
        let s = synthetic(|t| (-t).exp());
        let fit = fit_decay(&s, [0.5, 10.0], &DecayFitOptions::default()).unwrap();
        assert!(!fit.power_law_like, "{fit:?}");
    }

    #[test]
    fn floor_and_small_windows() {
        let s = synthetic(|t| (-4.0 * t).exp());
        assert!(matches!(
            fit_decay(&s, [5.0, 10.0], &DecayFitOptions::default()),
            Err(BresseError::NonpositiveEnergy(_))
        ));
        assert!(matches!(
            fit_decay(&s, [1.0, 1.5], &DecayFitOptions::default()),
            Err(BresseError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn zero_state_stays_zero() {
        let sys = AssembledSystem::build(&ModelParams::default(), 8).unwrap();
        let z = StateVector::zeros(sys.n_dofs());
        assert_eq!(step_midpoint(&sys, &z, 0.1).unwrap(), z);
    }

    #[test]
    fn conservative_without_damping() {
        let p = ModelParams { d0: 0.0, ..Default::default() };
        let sys = AssembledSystem::new(&p, &Mesh::build(&p, 16).unwrap()).unwrap();
        let u0 = InitialPreset::Default.project(&sys).unwrap();
        let cfg = SimConfig { dt: 0.05, t_final: 10.0, sample_stride: 20, fit_window: [1.0, 10.0] };
        let s = simulate(&sys, &u0, &cfg).unwrap();
        let (e0, e1) = (s.energies[0], *s.energies.last().unwrap());
        assert!((e1 - e0).abs() <= 1e-10 * e0, "{e0} {e1}");
    }

    #[test]
    fn config_checks() {
        let sys = AssembledSystem::build(&ModelParams::default(), 8).unwrap();
        let mut c = SimConfig::for_mesh(&sys, 50.0);
        assert!(c.validate().is_ok());
        c.fit_window = [0.0, 10.0];
        assert!(c.validate().is_err());
        c.fit_window = [1.0, 60.0];
        assert!(c.validate().is_err());
        c = SimConfig { t_final: 0.5, ..SimConfig::for_mesh(&sys, 50.0) };
        assert!(c.validate().is_err());
    }
}
