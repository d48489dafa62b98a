//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bresse_core::cli::{self, Command, ExperimentConfig};
use bresse_core::discretization::{Field, Mesh};
use bresse_core::linalg::quad_form;
use bresse_core::resolvent::Resolvent;
use bresse_core::spectral::{axis_scan, quadratic_eigs, EigsOptions, QuadraticPencil};
use bresse_core::timedomain::{simulate, InitialPreset, SimConfig};
use bresse_core::{AssembledSystem, ModelParams, StateVector};
use common::{decoupled_roots, decoupled_system, hand_assembled, skewed_params};

type Outcome = (bool, String);

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let mut z = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    StateVector {
        q: DVector::from_fn(n, |_, _| z()),
        v: DVector::from_fn(n, |_, _| z()),
    }
}

fn undamped(n: usize) -> AssembledSystem {
    let p = ModelParams { d0: 0.0, ..ModelParams::default() };
    AssembledSystem::new(&p, &Mesh::build(&p, n).unwrap()).unwrap()
}

fn dissipativity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst, mut max_re) = (0.0f64, f64::NEG_INFINITY);
    for n in [16, 32, 64] {
        let sys = AssembledSystem::build(&ModelParams::default(), n).unwrap();
        for _ in 0..100 {
            let u = random_state(sys.n_dofs(), &mut rng);
            let lhs = sys.inner_product_h(&sys.apply_generator(&u).unwrap(), &u).unwrap().re;
            let rhs = -quad_form(sys.damping(), &u.v);
            worst = worst.max((lhs - rhs).abs() / rhs.abs());
            max_re = max_re.max(lhs);
        }
    }
    (
        worst <= 1e-12 && max_re <= 0.0,
        format!("max relative discrepancy {worst:.2e}, max Re<A U,U> {max_re:.3e}"),
    )
}

fn coercivity() -> Outcome {
    let mut sets = Vec::new();
    for l in [0.1, 1.0, 10.0] {
        sets.push(ModelParams { l, ..ModelParams::default() });
        sets.push(ModelParams { l, ..skewed_params() });
    }
    let mut ok = true;
    for p in &sets {
        for n in [16, 64] {
            let good = AssembledSystem::build(p, n)
                .map(|s| s.metric().cholesky().is_some())
                .unwrap_or(false);
            ok &= good;
        }
    }
    (ok, format!("{} parameter sets x 2 meshes, K and G positive definite", sets.len()))
}

fn origin() -> Outcome {
    let sys = AssembledSystem::build(&ModelParams::default(), 64).unwrap();
    let r = Resolvent::new(&sys, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let worst = (0..20)
        .map(|_| {
            let f = random_state(sys.n_dofs(), &mut rng);
            r.residual(&r.solve(&f).unwrap(), &f).unwrap()
        })
        .fold(0.0, f64::max);
    (worst <= 1e-10, format!("max residual {worst:.2e} over 20 right-hand sides"))
}

fn strong_stability() -> Outcome {
    let grid: Vec<f64> = (1..=50).map(f64::from).collect();
    let opts = EigsOptions::default();
    let damped = axis_scan(
        &AssembledSystem::build(&ModelParams::default(), 64).unwrap().pencil(),
        &grid,
        &opts,
    )
    .unwrap();
    let left = damped.pairs.iter().all(|p| p.value.re < 0.0);
    let resid = damped.max_residual();
    let free = axis_scan(&undamped(64).pencil(), &grid, &opts).unwrap();
    let on_axis = free
        .eigenvalues()
        .map(|s| s.re.abs() / (1.0 + s.norm()))
        .fold(0.0, f64::max);
    (
        left && resid <= 1e-8 && on_axis <= 1e-8 && !damped.pairs.is_empty(),
        format!(
            "{} damped eigenvalues, abscissa {:.3e}, max residual {resid:.2e}; undamped max |Re s|/(1+|s|) {on_axis:.2e}",
            damped.pairs.len(),
            damped.spectral_abscissa
        ),
    )
}

fn energy_identity() -> Outcome {
    let sys = AssembledSystem::build(&ModelParams::default(), 64).unwrap();
    let u0 = InitialPreset::Default.project(&sys).unwrap();
    let cfg = SimConfig { dt: 0.01, t_final: 200.0, sample_stride: 100, fit_window: [10.0, 100.0] };
    let s = simulate(&sys, &u0, &cfg).unwrap();
    let free = undamped(64);
    let cfg0 = SimConfig { dt: 0.01, t_final: 10.0, sample_stride: 10, fit_window: [1.0, 10.0] };
    let s0 = simulate(&free, &InitialPreset::Default.project(&free).unwrap(), &cfg0).unwrap();
    let drift = s0
        .energies
        .iter()
        .map(|e| (e / s0.energies[0] - 1.0).abs())
        .fold(0.0, f64::max);
    (
        s.max_residual() <= 1e-10 && s.is_nonincreasing(1e-12) && drift <= 1e-10,
        format!(
            "max step balance residual {:.2e} over {} steps, max increase {:.2e}; undamped drift {drift:.2e}",
            s.max_residual(),
            s.residuals.len(),
            s.max_relative_increase()
        ),
    )
}

fn dichotomy_run(dir: &Path) -> cli::RunReport {
    cli::run(Command::Dichotomy, &default_config(), dir).unwrap()
}

fn default_config() -> ExperimentConfig {
    cli::parse_config(
        r#"{"params":{"rho1":1,"rho2":1,"k1":1,"k2":1,"k3":1,"l":1,"L":1,"alpha":0.25,"beta":0.75,"d0":1},"mesh_n":64}"#,
    )
    .unwrap()
}

fn resolvent_dichotomy(summary: &serde_json::Value) -> Outcome {
    let se = summary["slope_equal"].as_f64().unwrap();
    let su = summary["slope_unequal"].as_f64().unwrap();
    (
        se <= 2.5 && su <= 4.5 && su > se,
        format!("slope(equal) {se:.4}, slope(unequal) {su:.4}"),
    )
}

fn decay_dichotomy(summary: &serde_json::Value) -> Outcome {
    let ge = summary["gamma_equal"].as_f64().unwrap();
    let gu = summary["gamma_unequal"].as_f64().unwrap();
    let ce = summary["equal"]["decay"]["C_obs"].as_f64().unwrap();
    let cu = summary["unequal"]["decay"]["C_obs"].as_f64().unwrap();
    let presets = summary["equal"]["decay"]["c_obs_by_preset"].as_object().unwrap().len();
    (
        ge >= 0.9 && gu >= 0.45 && ge > gu && ce.is_finite() && cu.is_finite() && presets >= 3,
        format!(
            "gamma(equal) {ge:.4}, gamma(unequal) {gu:.4}; C_obs {ce:.4e} / {cu:.4e} over {presets} initial states"
        ),
    )
}

fn oracles() -> Outcome {
    let p = skewed_params();
    let sys = AssembledSystem::build(&p, 4).unwrap();
    let (_, _, k) = hand_assembled(&p, 4);
    let k_err = (sys.stiffness() - k).amax();

    let (n, d0) = (16, 0.05);
    let dec = decoupled_system(n, d0);
    let pencil = QuadraticPencil::field_block(&dec, Field::W);
    let exact = decoupled_roots(1.0, 1.0, d0, n);
    let shifts: Vec<Complex64> = exact
        .iter()
        .filter(|s| s.im >= 0.0)
        .map(|s| s + Complex64::new(0.0, 0.3))
        .collect();
    let found = quadratic_eigs(&pencil, &shifts, &EigsOptions::default()).unwrap();
    let eig_err = exact
        .iter()
        .filter(|s| s.im > 0.0)
        .map(|s| {
            found
                .eigenvalues()
                .map(|z| (z - s).norm() / s.norm().max(1.0))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    (
        k_err <= 1e-12 && eig_err <= 1e-8,
        format!("n=4 stiffness max error {k_err:.2e}; decoupled eigenvalue max error {eig_err:.2e}"),
    )
}

fn determinism(a: &Path, b: &Path) -> Outcome {
    let files = ["dichotomy.csv", "dichotomy_resolvent.csv", "dichotomy_energy.csv"];
    let same = files
        .iter()
        .all(|f| std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap());
    (same, format!("{} CSVs compared byte for byte", files.len()))
}

fn report(id: u32, name: &str, start: Instant, (ok, detail): Outcome, failures: &mut Vec<u32>) {
    let tag = if ok { "PASS" } else { "FAIL" };
    if !ok {
        failures.push(id);
    }
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "{tag} criterion {id} ({name}): {detail} [{:.1}s]",
        start.elapsed().as_secs_f64()
    )
    .unwrap();
    out.flush().unwrap();
}

fn main() {
    let mut failures = Vec::new();
    let t = Instant::now();
    report(1, "discrete dissipativity", t, dissipativity(), &mut failures);
    let t = Instant::now();
    report(2, "coercivity", t, coercivity(), &mut failures);
    let t = Instant::now();
    report(3, "invertibility at the origin", t, origin(), &mut failures);
    let t = Instant::now();
    report(4, "strong stability", t, strong_stability(), &mut failures);
    let t = Instant::now();
    report(5, "energy dissipation identity", t, energy_identity(), &mut failures);

    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let t = Instant::now();
    let run = dichotomy_run(first.path());
    let setup = t.elapsed().as_secs_f64();
    report(6, "resolvent growth dichotomy", t, resolvent_dichotomy(&run.summary), &mut failures);
    let t = Instant::now();
    report(7, "polynomial decay dichotomy", t, decay_dichotomy(&run.summary), &mut failures);
    let t = Instant::now();
    report(8, "oracle equivalence", t, oracles(), &mut failures);
    let t = Instant::now();
    dichotomy_run(second.path());
    report(9, "determinism", t, determinism(first.path(), second.path()), &mut failures);
    println!("(criteria 6 and 7 share one dichotomy run of {setup:.1}s)");

    if failures.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!("acceptance: {} of 9 criteria fail: {failures:?}", failures.len());
        std::process::exit(1);
    }
}
