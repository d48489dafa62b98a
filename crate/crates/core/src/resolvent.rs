//! The resolvent `(iλ − A_h)⁻¹` along the imaginary axis and its norm in the
//! energy metric.
//!
//! With `F = (f, g)` the first block row gives `v = iλq − f`; substituting
//! into the second leaves the displacement equation
//!
//! ```text
//! (−λ² M + iλ C + K) q = M g + (iλ M + C) f
//! ```
//!
//! The `G`-adjoint of the generator is `A♯ = [0 −I; M⁻¹K −M⁻¹C]`, so the
//! adjoint resolvent `(−iλ − A♯)⁻¹` reduces to a solve with the entrywise
//! conjugate of the same matrix and shares its factorization.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::discretization::{AssembledSystem, StateVector};
use crate::error::{BresseError, Result};
use crate::linalg::{least_squares_line, mul_real, CVector, ComplexLu};

/// Factorization of `(iλ − A_h)` at a fixed real frequency.
pub struct Resolvent<'a> {
    sys: &'a AssembledSystem,
    lambda: f64,
    lu: ComplexLu,
}

impl<'a> Resolvent<'a> {
    pub fn new(sys: &'a AssembledSystem, lambda: f64) -> Result<Self> {
        let s = Complex64::new(0.0, lambda);
        let lu = ComplexLu::new(crate::linalg::pencil_at(
            sys.mass(),
            sys.damping(),
            sys.stiffness(),
            s,
        ))
        .ok_or(BresseError::SingularAtLambda(lambda))?;
        Ok(Self { sys, lambda, lu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn check(&self, f: &StateVector) -> Result<()> {
        let n = self.sys.n_dofs();
        if f.q.len() != n || f.v.len() != n {
            return Err(BresseError::DimensionMismatch {
                expected: n,
                found: f.q.len().max(f.v.len()),
            });
        }
        Ok(())
    }

    /// `U = (iλ − A_h)⁻¹ F`.
    pub fn solve(&self, f: &StateVector) -> Result<StateVector> {
        self.check(f)?;
        let il = Complex64::new(0.0, self.lambda);
        let mf = mul_real(self.sys.mass(), &f.q);
        let rhs = mul_real(self.sys.mass(), &f.v) + &mf * il + mul_real(self.sys.damping(), &f.q);
        let q = self.lu.solve(&rhs)?;
        let v = &q * il - &f.q;
        Ok(StateVector { q, v })
    }

    /// `U = (−iλ − A♯)⁻¹ F`, the adjoint of [`solve`](Self::solve) in the
    /// energy inner product.
    pub fn solve_adjoint(&self, f: &StateVector) -> Result<StateVector> {
        self.check(f)?;
        let il = Complex64::new(0.0, self.lambda);
        let mf = mul_real(self.sys.mass(), &f.q);
        let rhs = -mul_real(self.sys.mass(), &f.v) - &mf * il + mul_real(self.sys.damping(), &f.q);
        let q = self.lu.solve_conj(&rhs)?;
        let v = &f.q + &q * il;
        Ok(StateVector { q, v })
    }

    /// `‖(iλ − A_h)U − F‖_G / ‖F‖_G` (zero when `F = 0` and `U = 0`).
    pub fn residual(&self, u: &StateVector, f: &StateVector) -> Result<f64> {
        let au = self.sys.apply_generator(u)?;
        let il = Complex64::new(0.0, self.lambda);
        let r = u.scale(il).axpy(Complex64::from(-1.0), &au).axpy(Complex64::from(-1.0), f);
        let fnorm = self.sys.norm_h_sq(f)?.sqrt();
        let rnorm = self.sys.norm_h_sq(&r)?.sqrt();
        Ok(if fnorm > 0.0 { rnorm / fnorm } else { rnorm })
    }
}

/// Solves `(iλ − A_h) U = F`.
pub fn resolvent_solve(sys: &AssembledSystem, lambda: f64, f: &StateVector) -> Result<StateVector> {
    Resolvent::new(sys, lambda)?.solve(f)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormOptions {
    /// Relative change between successive estimates that ends the iteration.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    pub lambda: f64,
    pub norm: f64,
    pub iters: usize,
    /// Relative residual of the last resolvent solve.
    pub residual: f64,
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let mut draw = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    StateVector {
        q: CVector::from_fn(n, |_, _| draw()),
        v: CVector::from_fn(n, |_, _| draw()),
    }
}

/// `‖(iλ − A_h)⁻¹‖_G` by power iteration on `R♯R` in the energy metric.
pub fn resolvent_norm(sys: &AssembledSystem, lambda: f64, opts: &NormOptions) -> Result<NormEstimate> {
    let r = Resolvent::new(sys, lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = random_state(sys.n_dofs(), &mut rng);
    x = x.scale(Complex64::from(1.0 / sys.norm_h_sq(&x)?.sqrt()));

    let mut prev = 0.0;
    for iter in 1..=opts.max_iters {
        let y = r.solve(&x)?;
        let est = sys.norm_h_sq(&y)?.sqrt();
        if !est.is_finite() {
            return Err(BresseError::SingularAtLambda(lambda));
        }
        if (est - prev).abs() <= opts.tol * est {
            return Ok(NormEstimate {
                lambda,
                norm: est,
                iters: iter,
                residual: r.residual(&y, &x)?,
            });
        }
        prev = est;
        let z = r.solve_adjoint(&y)?;
        x = z.scale(Complex64::from(1.0 / sys.norm_h_sq(&z)?.sqrt()));
    }
    Err(BresseError::NoConvergence(opts.max_iters))
}

/// Largest frequency the mesh is trusted to resolve, `c_resolve / h`.
pub fn lambda_max(sys: &AssembledSystem, c_resolve: f64) -> f64 {
    c_resolve / sys.mesh().nominal_width()
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolventProfile {
    pub lambdas: Vec<f64>,
    pub norms: Vec<f64>,
    pub iters: Vec<usize>,
    pub residuals: Vec<f64>,
    pub mesh_size: usize,
    pub lambda_max: f64,
    pub params_digest: String,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfileOptions {
    pub c_resolve: f64,
    pub norm: NormOptions,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            c_resolve: 1.0,
            norm: NormOptions::default(),
        }
    }
}

/// Resolvent norms over a sorted grid of positive frequencies.
pub fn profile(
    sys: &AssembledSystem,
    grid: &[f64],
    opts: &ProfileOptions,
) -> Result<ResolventProfile> {
    if grid.is_empty() {
        return Err(BresseError::EmptyGrid);
    }
    let lmax = lambda_max(sys, opts.c_resolve);
    for (i, &l) in grid.iter().enumerate() {
        if !(l.is_finite() && l > 0.0) || (i > 0 && l <= grid[i - 1]) {
            return Err(BresseError::InvalidArgument(format!(
                "frequency grid must be positive and strictly increasing (lambda={l})"
            )));
        }
        if l > lmax * (1.0 + 1e-12) {
            return Err(BresseError::GridBeyondResolution {
                lambda: l,
                lambda_max: lmax,
            });
        }
    }
    let results: Vec<Result<NormEstimate>> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &l)| {
            let o = NormOptions {
                seed: opts.norm.seed.wrapping_add(i as u64),
                ..opts.norm
            };
            resolvent_norm(sys, l, &o)
        })
        .collect();

    let mut errors = Vec::new();
    let mut estimates = Vec::with_capacity(grid.len());
    for (l, r) in grid.iter().zip(results) {
        match r {
            Ok(e) => estimates.push(e),
            Err(e) => errors.push((*l, Box::new(e))),
        }
    }
    if !errors.is_empty() {
        return Err(BresseError::Profile(errors));
    }
    Ok(ResolventProfile {
        lambdas: grid.to_vec(),
        norms: estimates.iter().map(|e| e.norm).collect(),
        iters: estimates.iter().map(|e| e.iters).collect(),
        residuals: estimates.iter().map(|e| e.residual).collect(),
        mesh_size: sys.mesh().n_elements(),
        lambda_max: lmax,
        params_digest: sys.params().digest(),
    })
}

/// `count` logarithmically spaced frequencies from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    /// Fitted `d log‖R‖ / d log λ`.
    pub slope: f64,
    pub intercept: f64,
    pub window: [f64; 2],
    pub r_squared: f64,
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 5;

/// `[max(3, λ_max/10), λ_max]`, clipped to the sampled range.
pub fn default_window(profile: &ResolventProfile) -> [f64; 2] {
    let first = profile.lambdas.first().copied().unwrap_or(0.0);
    let last = profile.lambdas.last().copied().unwrap_or(0.0);
    let lo = (profile.lambda_max / 10.0).max(3.0).max(first);
    let hi = profile.lambda_max.min(last);
    [lo, hi]
}

/// Least-squares line through `(log λ, log ‖R‖)` inside `window`.
pub fn fit_growth_exponent(profile: &ResolventProfile, window: [f64; 2]) -> Result<GrowthFit> {
    let [lo, hi] = window;
    if !(lo < hi) {
        return Err(BresseError::InvalidArgument(format!(
            "fit window [{lo}, {hi}] is empty"
        )));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = profile
        .lambdas
        .iter()
        .zip(&profile.norms)
        .filter(|(l, _)| (lo..=hi).contains(*l))
        .map(|(l, r)| (l.ln(), r.ln()))
        .unzip();
    if x.len() < MIN_FIT_POINTS {
        return Err(BresseError::WindowTooSmall {
            found: x.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let (slope, intercept, r_squared) = least_squares_line(&x, &y);
    Ok(GrowthFit {
        slope,
        intercept,
        window,
        r_squared,
        points: x.len(),
    })
}
