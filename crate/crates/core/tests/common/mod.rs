//! Independent oracles shared by the integration tests.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use bresse_core::discretization::Mesh;
use bresse_core::{AssembledSystem, ModelParams};

pub fn skewed_params() -> ModelParams {
    ModelParams {
        rho1: 1.1,
        rho2: 0.9,
        k1: 1.3,
        k2: 0.7,
        k3: 2.1,
        l: 0.8,
        length: 1.0,
        alpha: 0.25,
        beta: 0.75,
        d0: 1.7,
    }
}

/// Element integrals written out by hand: `∫N_i'N_j' = d_i d_j h`,
/// `∫N_i N_j = h/3, h/6`, `∫N_i' N_j = d_i h/2` with `d = (−1/h, 1/h)`.
pub fn hand_assembled(p: &ModelParams, n: usize) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let h = p.length / n as f64;
    let d = [-1.0 / h, 1.0 / h];
    let m = |i: usize, j: usize| if i == j { h / 3.0 } else { h / 6.0 };
    let dd = |i: usize, j: usize| d[i] * d[j] * h;
    let c = |i: usize, _j: usize| d[i] * h / 2.0;
    let size = 3 * (n - 1);
    let (mut mass, mut damp, mut stiff) = (
        DMatrix::zeros(size, size),
        DMatrix::zeros(size, size),
        DMatrix::zeros(size, size),
    );
    let (phi, psi, w) = (0, 1, 2);
    let l = p.l;
    for e in 0..n {
        let x_mid = (e as f64 + 0.5) * h;
        let de = if x_mid > p.alpha && x_mid < p.beta { p.d0 } else { 0.0 };
        for i in 0..2 {
            for j in 0..2 {
                let (ni, nj) = (e + i, e + j);
                if ni == 0 || ni == n || nj == 0 || nj == n {
                    continue;
                }
                let g = |node: usize, f: usize| 3 * (node - 1) + f;
                // a(field_a = N_i, field_b = N_j)
                let k_entries = [
                    (phi, phi, p.k1 * dd(i, j) + p.k3 * l * l * m(i, j)),
                    (phi, psi, p.k1 * c(i, j)),
                    (phi, w, p.k1 * l * c(i, j) - p.k3 * l * c(j, i)),
                    (psi, phi, p.k1 * c(j, i)),
                    (psi, psi, p.k1 * m(i, j) + p.k2 * dd(i, j)),
                    (psi, w, p.k1 * l * m(i, j)),
                    (w, phi, p.k1 * l * c(j, i) - p.k3 * l * c(i, j)),
                    (w, psi, p.k1 * l * m(i, j)),
                    (w, w, p.k1 * l * l * m(i, j) + p.k3 * dd(i, j)),
                ];
                for (fa, fb, v) in k_entries {
                    stiff[(g(ni, fa), g(nj, fb))] += v;
                }
                let c_entries = [
                    (phi, phi, de * l * l * m(i, j)),
                    (phi, w, -de * l * c(j, i)),
                    (w, phi, -de * l * c(i, j)),
                    (w, w, de * dd(i, j)),
                ];
                for (fa, fb, v) in c_entries {
                    damp[(g(ni, fa), g(nj, fb))] += v;
                }
                mass[(g(ni, phi), g(nj, phi))] += p.rho1 * m(i, j);
                mass[(g(ni, psi), g(nj, psi))] += p.rho2 * m(i, j);
                mass[(g(ni, w), g(nj, w))] += p.rho1 * m(i, j);
            }
        }
    }
    (mass, damp, stiff)
}

/// `l = 0`, damping on the whole beam: the axial field is a damped wave with
/// `C_w = (d0/k3) K_w`, whose P1 eigenvalues are known in closed form.
pub fn decoupled_roots(k3: f64, rho1: f64, d0: f64, n: usize) -> Vec<Complex64> {
    let h = 1.0 / n as f64;
    let mut roots = Vec::new();
    for k in 1..n {
        let th = k as f64 * PI * h;
        let mu = (k3 / rho1) * 6.0 * (1.0 - th.cos()) / (h * h * (2.0 + th.cos()));
        let b = d0 / k3 * mu;
        let disc = Complex64::from(b * b - 4.0 * mu).sqrt();
        roots.push((-b + disc) / 2.0);
        roots.push((-b - disc) / 2.0);
    }
    roots
}

pub fn decoupled_system(n: usize, d0: f64) -> AssembledSystem {
    let p = ModelParams {
        l: 0.0,
        k1: 1e-3,
        alpha: 0.0,
        beta: 1.0,
        d0,
        ..ModelParams::default()
    };
    AssembledSystem::new(&p, &Mesh::build(&p, n).unwrap()).unwrap()
}
