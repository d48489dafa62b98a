mod common;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bresse_core::discretization::{Field, InitialFields, Mesh};
use bresse_core::linalg::CMatrix;
use bresse_core::resolvent::{resolvent_norm, resolvent_solve, NormOptions, Resolvent};
use bresse_core::spectral::{quadratic_eigs, EigsOptions, QuadraticPencil};
use bresse_core::{AssembledSystem, ModelParams, StateVector};
use common::{decoupled_roots, decoupled_system, hand_assembled, skewed_params};

#[test]
fn four_element_matrices_match_hand_assembly() {
    let p = skewed_params();
    let sys = AssembledSystem::build(&p, 4).unwrap();
    let (m, c, k) = hand_assembled(&p, 4);
    for (name, got, want) in [
        ("stiffness", sys.stiffness(), &k),
        ("mass", sys.mass(), &m),
        ("damping", sys.damping(), &c),
    ] {
        let err = (got - want).amax();
        assert!(err <= 1e-12, "{name}: max entry error {err:e}");
    }
}

#[test]
fn eight_element_matrices_match_hand_assembly() {
    let p = ModelParams { alpha: 0.375, beta: 0.625, ..skewed_params() };
    let sys = AssembledSystem::build(&p, 8).unwrap();
    let (m, c, k) = hand_assembled(&p, 8);
    assert!((sys.stiffness() - k).amax() <= 1e-12);
    assert!((sys.mass() - m).amax() <= 1e-12);
    assert!((sys.damping() - c).amax() <= 1e-12);
}

#[test]
fn decoupled_axial_eigenvalues_match_closed_form() {
    let (n, d0) = (16, 0.05);
    let sys = decoupled_system(n, d0);
    let pencil = QuadraticPencil::field_block(&sys, Field::W);
    let exact = decoupled_roots(1.0, 1.0, d0, n);
    let shifts: Vec<Complex64> = exact.iter().filter(|s| s.im >= 0.0).map(|s| s + Complex64::new(0.0, 0.3)).collect();
    let found = quadratic_eigs(&pencil, &shifts, &EigsOptions::default()).unwrap();
    let upper: Vec<Complex64> = exact.iter().copied().filter(|s| s.im > 0.0).collect();
    for s in &upper {
        let best = found
            .eigenvalues()
            .map(|z| (z - s).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(best <= 1e-8 * s.norm().max(1.0), "{s}: nearest found at distance {best:e}");
    }
    for z in found.eigenvalues() {
        let best = exact.iter().map(|s| (z - s).norm()).fold(f64::INFINITY, f64::min);
        assert!(best <= 1e-8 * z.norm().max(1.0), "spurious {z}");
    }
}

#[test]
fn decoupled_full_system_damped_modes_are_axial() {
    let (n, d0) = (12, 0.05);
    let sys = decoupled_system(n, d0);
    let exact = decoupled_roots(1.0, 1.0, d0, n);
    let shifts: Vec<Complex64> = (1..=8).map(|m| Complex64::new(0.0, 4.0 * m as f64)).collect();
    let found = quadratic_eigs(&sys.pencil(), &shifts, &EigsOptions::default()).unwrap();
    let mut damped = 0;
    for z in found.eigenvalues() {
        if z.re < -1e-9 {
            damped += 1;
            let best = exact.iter().map(|s| (z - s).norm()).fold(f64::INFINITY, f64::min);
            assert!(best <= 1e-8 * z.norm().max(1.0), "{z} is not an axial root");
        } else {
            assert!(z.re.abs() <= 1e-9 * (1.0 + z.norm()), "{z}");
        }
    }
    assert!(damped > 0);
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let mut z = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    StateVector {
        q: DVector::from_fn(n, |_, _| z()),
        v: DVector::from_fn(n, |_, _| z()),
    }
}

fn tight() -> NormOptions {
    NormOptions { tol: 1e-12, max_iters: 5000, seed: 3 }
}

/// Undamped generator is skew-adjoint in the energy metric, so the
/// resolvent norm is the inverse distance to `±iω_k`.
#[test]
fn undamped_norm_is_inverse_distance_to_spectrum() {
    let p = ModelParams { d0: 0.0, k2: 1.7, ..ModelParams::default() };
    let sys = AssembledSystem::new(&p, &Mesh::build(&p, 12).unwrap()).unwrap();
    let l = sys.mass_cholesky().l();
    let li = l.clone().try_inverse().unwrap();
    let omegas: Vec<f64> = (&li * sys.stiffness() * li.transpose())
        .symmetric_eigenvalues()
        .iter()
        .map(|w2| w2.sqrt())
        .collect();
    for lambda in [0.3, 2.0, 7.7, 15.1] {
        let dist = omegas
            .iter()
            .map(|w| (lambda - w).abs().min(lambda + w))
            .fold(f64::INFINITY, f64::min);
        let est = resolvent_norm(&sys, lambda, &tight()).unwrap();
        let rel = (est.norm * dist - 1.0).abs();
        assert!(rel <= 1e-6, "lambda={lambda}: {} vs {}", est.norm, 1.0 / dist);
    }
}

/// `‖R‖_G = σ_max(Lᵀ R L⁻ᵀ)` with `G = L Lᵀ`, from a dense complex inverse.
fn dense_norm(sys: &AssembledSystem, lambda: f64) -> f64 {
    let n = sys.n_dofs();
    let minv = sys.mass_cholesky().inverse();
    let mut a = DMatrix::<f64>::zeros(2 * n, 2 * n);
    a.view_mut((0, n), (n, n)).copy_from(&DMatrix::identity(n, n));
    a.view_mut((n, 0), (n, n)).copy_from(&(-&minv * sys.stiffness()));
    a.view_mut((n, n), (n, n)).copy_from(&(-&minv * sys.damping()));
    let shifted = CMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let diag = if i == j { Complex64::new(0.0, lambda) } else { Complex64::from(0.0) };
        diag - a[(i, j)]
    });
    let r = shifted.try_inverse().unwrap();
    let mut g = DMatrix::<f64>::zeros(2 * n, 2 * n);
    g.view_mut((0, 0), (n, n)).copy_from(sys.stiffness());
    g.view_mut((n, n), (n, n)).copy_from(sys.mass());
    let lg = g.cholesky().unwrap().l();
    let lt = lg.transpose().map(Complex64::from);
    let lt_inv = lg.transpose().try_inverse().unwrap().map(Complex64::from);
    (lt * r * lt_inv).singular_values().max()
}

#[test]
fn damped_norm_matches_dense_svd() {
    for (p, n) in [
        (ModelParams::default(), 8),
        (ModelParams { k2: 2.0, ..ModelParams::default() }, 10),
        (skewed_params(), 8),
    ] {
        let sys = AssembledSystem::build(&p, n).unwrap();
        for lambda in [0.5, 3.0, 6.5] {
            let want = dense_norm(&sys, lambda);
            let got = resolvent_norm(&sys, lambda, &tight()).unwrap().norm;
            assert!((got / want - 1.0).abs() <= 1e-6, "n={n} lambda={lambda}: {got} vs {want}");
        }
    }
}

#[test]
fn norm_is_even_in_lambda() {
    let sys = AssembledSystem::build(&ModelParams { k2: 2.0, ..ModelParams::default() }, 16).unwrap();
    for lambda in [1.0, 4.0, 9.0] {
        let a = resolvent_norm(&sys, lambda, &tight()).unwrap().norm;
        let b = resolvent_norm(&sys, -lambda, &tight()).unwrap().norm;
        assert!((a / b - 1.0).abs() <= 1e-6, "{a} {b}");
    }
}

#[test]
fn origin_solve_is_exact() {
    let sys = AssembledSystem::build(&skewed_params(), 16).unwrap();
    let r = Resolvent::new(&sys, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let f = random_state(sys.n_dofs(), &mut rng);
        let u = r.solve(&f).unwrap();
        assert!(r.residual(&u, &f).unwrap() <= 1e-10);
        assert!((&u.v + &f.q).norm() <= 1e-12 * f.q.norm());
    }
}

#[test]
fn solutions_respect_norm_bound() {
    let sys = AssembledSystem::build(&ModelParams::default(), 16).unwrap();
    let lambda = 5.0;
    let bound = resolvent_norm(&sys, lambda, &tight()).unwrap().norm;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let f = random_state(sys.n_dofs(), &mut rng);
        let u = resolvent_solve(&sys, lambda, &f).unwrap();
        let ratio = (sys.norm_h_sq(&u).unwrap() / sys.norm_h_sq(&f).unwrap()).sqrt();
        assert!(ratio <= bound * (1.0 + 1e-6), "{ratio} > {bound}");
    }
}

#[test]
fn low_frequency_norm_is_mesh_stable() {
    let p = ModelParams::default();
    let a = resolvent_norm(&AssembledSystem::build(&p, 64).unwrap(), 5.0, &NormOptions::default()).unwrap();
    let b = resolvent_norm(&AssembledSystem::build(&p, 128).unwrap(), 5.0, &NormOptions::default()).unwrap();
    assert!((a.norm / b.norm - 1.0).abs() < 0.05, "{} vs {}", a.norm, b.norm);
}

/// `φ₀ = x(1−x)`, everything else zero: exact energy `½(k1/3 + k3 l²/30)`.
#[test]
fn interpolated_energy_converges_at_second_order() {
    let p = ModelParams { l: 1.3, k1: 1.4, k3: 0.6, ..ModelParams::default() };
    let exact = 0.5 * (p.k1 / 3.0 + p.k3 * p.l * p.l / 30.0);
    let bubble = |x: f64| x * (1.0 - x);
    let zero = |_: f64| 0.0;
    let fields = InitialFields { phi0: &bubble, phi1: &zero, psi0: &zero, psi1: &zero, w0: &zero, w1: &zero };
    let ns = [8usize, 16, 32, 64];
    let errs: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let sys = AssembledSystem::build(&p, n).unwrap();
            let u = sys.project_initial_data(&fields).unwrap();
            (sys.energy(&u).unwrap().total - exact).abs()
        })
        .collect();
    let x: Vec<f64> = ns.iter().map(|n| (*n as f64).ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (slope, _, _) = bresse_core::linalg::least_squares_line(&x, &y);
    assert!(-slope >= 1.9, "order {} from errors {errs:?}", -slope);
}

/// Plain `H¹₀` seminorm matrix for the three fields, same dof layout.
fn seminorm_matrix(mesh: &Mesh) -> DMatrix<f64> {
    let n = mesh.n_elements();
    let dofs = 3 * (n - 1);
    let mut s = DMatrix::<f64>::zeros(dofs, dofs);
    for e in 0..n {
        let (a, b) = mesh.element(e);
        let k = 1.0 / (b - a);
        let nodes = [e, e + 1];
        for field in 0..3 {
            for (i, &ni) in nodes.iter().enumerate() {
                for (j, &nj) in nodes.iter().enumerate() {
                    if ni == 0 || ni == n || nj == 0 || nj == n {
                        continue;
                    }
                    let sign = if i == j { 1.0 } else { -1.0 };
                    s[(3 * (ni - 1) + field, 3 * (nj - 1) + field)] += sign * k;
                }
            }
        }
    }
    s
}

#[test]
fn stiffness_coercivity_constant_is_mesh_stable() {
    let p = ModelParams::default();
    let lows: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&n| {
            let sys = AssembledSystem::build(&p, n).unwrap();
            let li = seminorm_matrix(sys.mesh()).cholesky().unwrap().l().try_inverse().unwrap();
            let pencil = &li * sys.stiffness() * li.transpose();
            pencil.symmetric_eigenvalues().min()
        })
        .collect();
    assert!(lows.iter().all(|c| *c > 0.0), "{lows:?}");
    let (lo, hi) = lows.iter().fold((f64::INFINITY, 0.0f64), |(a, b), c| (a.min(*c), b.max(*c)));
    assert!(hi / lo - 1.0 < 0.2, "{lows:?}");
}

#[test]
fn eigenvector_graph_norm_scales_with_eigenvalue() {
    let sys = AssembledSystem::build(&ModelParams::default(), 16).unwrap();
    let shifts: Vec<Complex64> = [2.0, 9.0].iter().map(|m| Complex64::new(0.0, *m)).collect();
    let found = quadratic_eigs(&sys.pencil(), &shifts, &EigsOptions::default()).unwrap();
    assert!(!found.pairs.is_empty());
    for pair in &found.pairs {
        let s = pair.value;
        let u = StateVector { q: pair.vector.clone(), v: &pair.vector * s };
        let want = (1.0 + s.norm_sqr()) * sys.norm_h_sq(&u).unwrap();
        let got = sys.domain_norm(&u).unwrap();
        assert!((got / want - 1.0).abs() <= 1e-8, "{s}: {got} vs {want}");
    }
}

#[test]
fn assembled_matrices_are_symmetric() {
    let sys = AssembledSystem::build(&skewed_params(), 32).unwrap();
    for m in [sys.stiffness(), sys.mass(), sys.damping()] {
        let scale = m.amax();
        assert!((m - m.transpose()).amax() <= 1e-14 * scale);
    }
}
