//! Eigenvalues of the damped pencil `s² M + s C + K`.
//!
//! Each shift `σ` is handled by shift-invert Arnoldi on the companion
//! operator `(A_h − σ)⁻¹`, where `A_h = [0 I; −M⁻¹K −M⁻¹C]`. Applying the
//! inverse needs only a solve with `P(σ) = σ²M + σC + K`:
//!
//! ```text
//! (A_h − σ)(x, y) = (a, b)  ⇔  P(σ) x = −M b − (C + σM) a,  y = a + σ x
//! ```
//!
//! Ritz values nearest the shift are then polished by Rayleigh quotient
//! iteration on the pencil. Since `P(s)` is complex symmetric, the two-sided
//! functional `xᵀP(s)x = 0` is used for the eigenvalue update.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::discretization::{AssembledSystem, Field, Forms};
use crate::error::{BresseError, Result};
use crate::linalg::{norm_inf, pencil_at, to_complex, CMatrix, CVector, ComplexLu};

/// Real symmetric quadratic pencil `s² M + s C + K`.
#[derive(Debug, Clone)]
pub struct QuadraticPencil {
    mass: DMatrix<f64>,
    damping: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    mass_c: CMatrix,
    damping_c: CMatrix,
    stiffness_c: CMatrix,
    norms: [f64; 3],
    mesh_size: usize,
}

impl QuadraticPencil {
    pub fn new(forms: &Forms, mesh_size: usize) -> Self {
        Self::from_matrices(
            forms.mass.clone(),
            forms.damping.clone(),
            forms.stiffness.clone(),
            mesh_size,
        )
    }

    pub fn from_matrices(
        mass: DMatrix<f64>,
        damping: DMatrix<f64>,
        stiffness: DMatrix<f64>,
        mesh_size: usize,
    ) -> Self {
        let norms = [norm_inf(&mass), norm_inf(&damping), norm_inf(&stiffness)];
        Self {
            mass_c: to_complex(&mass),
            damping_c: to_complex(&damping),
            stiffness_c: to_complex(&stiffness),
            mass,
            damping,
            stiffness,
            norms,
            mesh_size,
        }
    }

    /// The sub-pencil acting on one field only.
    pub fn field_block(sys: &AssembledSystem, field: Field) -> Self {
        let idx = sys.dofs().field_dofs(field);
        let pick = |a: &DMatrix<f64>| DMatrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])]);
        Self::from_matrices(
            pick(sys.mass()),
            pick(sys.damping()),
            pick(sys.stiffness()),
            sys.mesh().n_elements(),
        )
    }

    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }

    pub fn eval(&self, s: Complex64) -> CMatrix {
        pencil_at(&self.mass, &self.damping, &self.stiffness, s)
    }

    fn apply(&self, s: Complex64, x: &CVector) -> CVector {
        &self.mass_c * x * (s * s) + &self.damping_c * x * s + &self.stiffness_c * x
    }

    /// Normwise backward error `‖P(s)x‖ / ((|s|²‖M‖ + |s|‖C‖ + ‖K‖)‖x‖)`.
    pub fn backward_error(&self, s: Complex64, x: &CVector) -> f64 {
        let r = self.apply(s, x).norm();
        let a = s.norm();
        let scale = a * a * self.norms[0] + a * self.norms[1] + self.norms[2];
        r / (scale * x.norm())
    }
}

impl AssembledSystem {
    pub fn pencil(&self) -> QuadraticPencil {
        QuadraticPencil::new(self.forms(), self.mesh().n_elements())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    /// Displacement part `x` of the state eigenvector `(x, s x)`.
    #[serde(skip)]
    pub vector: CVector,
    pub residual: f64,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    /// Eigenpairs sorted by `(Re s, Im s)`.
    pub pairs: Vec<EigenPair>,
    pub spectral_abscissa: f64,
    pub min_abs_real: f64,
    #[serde(serialize_with = "ser_complex")]
    pub closest_to_axis: Complex64,
    pub mesh_size: usize,
}

impl SpectrumReport {
    fn from_pairs(pairs: Vec<EigenPair>, mesh_size: usize) -> Self {
        let spectral_abscissa = pairs
            .iter()
            .map(|p| p.value.re)
            .fold(f64::NEG_INFINITY, f64::max);
        let closest = pairs
            .iter()
            .min_by(|a, b| a.value.re.abs().total_cmp(&b.value.re.abs()))
            .map(|p| p.value)
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        Self {
            pairs,
            spectral_abscissa,
            min_abs_real: closest.re.abs(),
            closest_to_axis: closest,
            mesh_size,
        }
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.pairs.iter().map(|p| p.value)
    }

    pub fn max_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EigsOptions {
    /// Eigenvalues kept per shift.
    pub per_shift: usize,
    /// Krylov dimension; `None` picks `max(4·per_shift, 40)`.
    pub krylov_dim: Option<usize>,
    /// Backward-error target for an accepted eigenpair.
    pub tol: f64,
    /// Iteration budget per shift (Arnoldi steps plus polishing steps).
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for EigsOptions {
    fn default() -> Self {
        Self {
            per_shift: 4,
            krylov_dim: None,
            tol: 1e-10,
            max_iters: 500,
            seed: 0,
        }
    }
}

const MERGE_TOL: f64 = 1e-8;
const SHIFT_RETRIES: usize = 3;

/// Eigenvalues of the pencil nearest each shift, merged across shifts.
pub fn quadratic_eigs(
    pencil: &QuadraticPencil,
    shifts: &[Complex64],
    opts: &EigsOptions,
) -> Result<SpectrumReport> {
    if shifts.is_empty() {
        return Err(BresseError::EmptyGrid);
    }
    let per_shift: Vec<Result<Vec<EigenPair>>> = shifts
        .par_iter()
        .enumerate()
        .map(|(k, &sigma)| eigs_near(pencil, sigma, opts, opts.seed.wrapping_add(k as u64)))
        .collect();
    let mut all = Vec::new();
    for r in per_shift {
        all.extend(r?);
    }
    all.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    let mut merged: Vec<EigenPair> = Vec::with_capacity(all.len());
    for p in all {
        let dup = merged
            .iter()
            .any(|m| (m.value - p.value).norm() <= MERGE_TOL * (1.0 + p.value.norm()));
        if !dup {
            merged.push(p);
        }
    }
    Ok(SpectrumReport::from_pairs(merged, pencil.mesh_size))
}

/// Shift-invert scan along `iμ` for each `μ` of a sorted frequency grid.
pub fn axis_scan(
    pencil: &QuadraticPencil,
    mu_grid: &[f64],
    opts: &EigsOptions,
) -> Result<SpectrumReport> {
    if mu_grid.is_empty() {
        return Err(BresseError::EmptyGrid);
    }
    if mu_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(BresseError::InvalidArgument(
            "frequency grid must be sorted".into(),
        ));
    }
    let shifts: Vec<Complex64> = mu_grid.iter().map(|&m| Complex64::new(0.0, m)).collect();
    quadratic_eigs(pencil, &shifts, opts)
}

fn factor_shift(pencil: &QuadraticPencil, sigma: Complex64) -> Result<(Complex64, ComplexLu)> {
    let mut s = sigma;
    for attempt in 0..=SHIFT_RETRIES {
        if let Some(lu) = ComplexLu::new(pencil.eval(s)) {
            return Ok((s, lu));
        }
        let delta = 1e-7 * (1.0 + sigma.norm()) * (attempt + 1) as f64;
        s = sigma + Complex64::new(delta, 0.7 * delta);
    }
    Err(BresseError::ShiftSingular {
        re: sigma.re,
        im: sigma.im,
    })
}

fn eigs_near(
    pencil: &QuadraticPencil,
    sigma: Complex64,
    opts: &EigsOptions,
    seed: u64,
) -> Result<Vec<EigenPair>> {
    let n = pencil.dim();
    let dim = 2 * n;
    let want = opts.per_shift.min(dim);
    if want == 0 {
        return Ok(Vec::new());
    }
    let m = opts
        .krylov_dim
        .unwrap_or((4 * want).max(40))
        .clamp(want + 1, dim);
    let (sigma, lu) = factor_shift(pencil, sigma)?;

    // (A_h − σ)⁻¹ on stacked states
    let apply_inv = |u: &CVector| -> Result<CVector> {
        let a = u.rows(0, n).into_owned();
        let b = u.rows(n, n).into_owned();
        let rhs = -(&pencil.mass_c * &b) - &pencil.damping_c * &a - &pencil.mass_c * &a * sigma;
        let x = lu.solve(&rhs)?;
        let y = a + &x * sigma;
        let mut out = CVector::zeros(dim);
        out.rows_mut(0, n).copy_from(&x);
        out.rows_mut(n, n).copy_from(&y);
        Ok(out)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start = CVector::from_fn(dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    start /= Complex64::from(start.norm());

    // Arnoldi with repeated classical Gram–Schmidt
    let mut basis: Vec<CVector> = vec![start];
    let mut h = CMatrix::zeros(m + 1, m);
    let mut steps = 0;
    for j in 0..m {
        let mut w = apply_inv(&basis[j])?;
        for _ in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = v.dotc(&w);
                h[(i, j)] += c;
                w -= v * c;
            }
        }
        let beta = w.norm();
        h[(j + 1, j)] = Complex64::from(beta);
        steps = j + 1;
        if beta <= 1e-13 * h.column(j).norm() {
            break; // invariant subspace
        }
        if j + 1 < m {
            basis.push(w / Complex64::from(beta));
        }
    }
    let k = steps;
    let hk = h.view((0, 0), (k, k)).into_owned();
    let schur = Schur::try_new(hk, 1e-15, 10_000)
        .ok_or(BresseError::NoConvergence(opts.max_iters))?;
    let (z, t) = schur.unpack();

    let mut order: Vec<usize> = (0..k).filter(|&i| t[(i, i)].norm() > 0.0).collect();
    order.sort_by(|&a, &b| t[(b, b)].norm().total_cmp(&t[(a, a)].norm()));
    order.truncate(want);

    let mut budget = opts.max_iters.saturating_sub(steps);
    let mut pairs = Vec::with_capacity(order.len());
    for idx in order {
        let theta = t[(idx, idx)];
        // eigenvector of the triangular factor by back substitution
        let mut y = CVector::zeros(k);
        y[idx] = Complex64::from(1.0);
        for i in (0..idx).rev() {
            let mut acc = Complex64::from(0.0);
            for j in i + 1..=idx {
                acc += t[(i, j)] * y[j];
            }
            let mut d = t[(i, i)] - theta;
            if d.norm() < 1e-14 * theta.norm() {
                d = Complex64::from(1e-14 * theta.norm());
            }
            y[i] = -acc / d;
        }
        let coeffs = &z * y;
        let mut full = CVector::zeros(dim);
        for (c, v) in coeffs.iter().zip(&basis) {
            full += v * *c;
        }
        let x = full.rows(0, n).into_owned();
        let s = sigma + Complex64::from(1.0) / theta;
        let pair = polish(pencil, s, x, opts.tol, &mut budget)?;
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Rayleigh quotient iteration on the pencil until the backward error drops
/// below `tol`.
fn polish(
    pencil: &QuadraticPencil,
    mut s: Complex64,
    x: CVector,
    tol: f64,
    budget: &mut usize,
) -> Result<EigenPair> {
    let mut x = &x / Complex64::from(x.norm());
    let mut residual = pencil.backward_error(s, &x);
    let mut used = 0;
    while residual > tol {
        if *budget == 0 {
            return Err(BresseError::NoConvergence(used));
        }
        *budget -= 1;
        used += 1;
        let Some(lu) = ComplexLu::new(pencil.eval(s)) else {
            // s is an eigenvalue to working precision; one more inverse
            // step from a nearby point recovers the vector
            let nudge = Complex64::new(1e-10 * (1.0 + s.norm()), 0.0);
            let lu = ComplexLu::new(pencil.eval(s + nudge)).ok_or(BresseError::NoConvergence(used))?;
            let y = lu.solve(&x)?;
            x = &y / Complex64::from(y.norm());
            residual = pencil.backward_error(s, &x);
            if residual > tol {
                return Err(BresseError::NoConvergence(used));
            }
            break;
        };
        let dp = &pencil.mass_c * &x * (s * 2.0) + &pencil.damping_c * &x;
        let y = lu.solve(&dp)?;
        x = &y / Complex64::from(y.norm());
        s = rayleigh_root(pencil, &x, s);
        residual = pencil.backward_error(s, &x);
    }
    Ok(EigenPair {
        value: s,
        vector: x,
        residual,
    })
}

/// Root of `xᵀP(s)x = 0` nearest `s`.
fn rayleigh_root(pencil: &QuadraticPencil, x: &CVector, s: Complex64) -> Complex64 {
    let bilinear = |a: &CMatrix| x.transpose() * (a * x);
    let a = bilinear(&pencil.mass_c)[(0, 0)];
    let b = bilinear(&pencil.damping_c)[(0, 0)];
    let c = bilinear(&pencil.stiffness_c)[(0, 0)];
    if a.norm() == 0.0 {
        return s;
    }
    let disc = (b * b - a * c * 4.0).sqrt();
    let r1 = (-b + disc) / (a * 2.0);
    let r2 = (-b - disc) / (a * 2.0);
    if (r1 - s).norm() <= (r2 - s).norm() {
        r1
    } else {
        r2
    }
}
