#![allow(dead_code)]

use std::collections::BTreeSet;

use loqc_opt::fock::FockState;
use loqc_opt::gates::{make_cs, TargetGate};
use loqc_opt::objectives::{
    fidelity_matrices, input_state_variance, scaled_success, success_bounds_matrix, success_matrix, Evaluator,
    Objective,
};
use loqc_opt::optimize::{OptimizeConfig, Sweep};
use loqc_opt::param::{random_start, to_matrix, Chart};
use loqc_opt::permanent::{permanent, permanent_bruteforce, CMatrix};
use loqc_opt::transfer::{full_omega, transfer_matrix, ModeConfig};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Check = std::result::Result<(), TestCaseError>;

pub fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

pub fn square_matrix(max: usize) -> impl Strategy<Value = CMatrix> {
    (1..=max).prop_flat_map(|n| {
        proptest::collection::vec(complex(), n * n).prop_map(move |v| CMatrix::from_row_slice(n, n, &v))
    })
}

pub fn nonzero_scalar() -> impl Strategy<Value = Complex64> {
    (0.05..20.0f64, -3.2..3.2f64).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

pub fn haar_like(n: usize, seed: u64) -> CMatrix {
    to_matrix(&random_start(Chart::Unitary, n, &BTreeSet::new(), seed)).unwrap().matrix
}

pub fn general_matrix(n: usize, seed: u64) -> CMatrix {
    to_matrix(&random_start(Chart::General, n, &BTreeSet::new(), seed)).unwrap().matrix
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn check_permanent(a: &CMatrix) -> Check {
    let p = permanent(a).unwrap();
    let q = permanent_bruteforce(a).unwrap();
    let rel = (p - q).norm() / q.norm().max(f64::MIN_POSITIVE);
    prop_assert!(rel < 1e-12, "n = {}, ryser {p}, brute force {q}, rel {rel:.3e}", a.nrows());
    Ok(())
}

/// Omega is unitary and Omega(U1 U2) = Omega(U2) Omega(U1).
pub fn check_omega(n: usize, photons: usize, s1: u64, s2: u64) -> Check {
    let u1 = haar_like(n, s1);
    let u2 = haar_like(n, s2);
    let (_, o1) = full_omega(&u1, photons).unwrap();
    let (_, o2) = full_omega(&u2, photons).unwrap();
    let (_, o12) = full_omega(&(&u1 * &u2), photons).unwrap();
    let d = o1.nrows();
    let defect = max_abs(&(o1.adjoint() * &o1 - CMatrix::identity(d, d)));
    prop_assert!(defect < 1e-10, "unitarity defect {defect:.3e}");
    let hom = max_abs(&(&o12 - &o2 * &o1));
    prop_assert!(hom < 1e-10, "homomorphism defect {hom:.3e}");
    Ok(())
}

/// One dual-rail qubit, one heralded ancilla photon and one vacuum mode: every
/// transfer entry is the matching entry of the full Fock-space map.
pub fn check_transfer_against_omega(seed: u64) -> Check {
    let u = haar_like(4, seed);
    let cfg = ModeConfig::with_single_photon_ancillas(2, 1, 1).unwrap();
    let basis = [FockState::new(vec![1, 0]), FockState::new(vec![0, 1])];
    let t = transfer_matrix(&u, &cfg, &basis).unwrap();
    let (fb, omega) = full_omega(&u, 2).unwrap();
    for (j, inp) in basis.iter().enumerate() {
        let col = fb.index_of(&inp.concat(&cfg.ancilla_input).concat(&FockState::vacuum(1))).unwrap();
        for (i, out) in t.out_basis.iter().enumerate() {
            let row = fb.index_of(&out.concat(&cfg.measurement)).unwrap();
            let d = (t.entries[(i, j)] - omega[(row, col)]).norm();
            prop_assert!(d < 1e-12, "entry ({i},{j}) differs by {d:.3e}");
        }
    }
    Ok(())
}

pub fn cs_config() -> (ModeConfig, TargetGate) {
    (ModeConfig::with_single_photon_ancillas(4, 2, 0).unwrap(), make_cs())
}

/// A(c U) = c^(photons) A(U).
pub fn check_homogeneity(seed: u64, c: Complex64) -> Check {
    let (cfg, gate) = cs_config();
    let w = general_matrix(6, seed);
    let a = transfer_matrix(&w, &cfg, &gate.comp_basis).unwrap().entries;
    let b = transfer_matrix(&(&w * c), &cfg, &gate.comp_basis).unwrap().entries;
    let k = c.powu(4);
    let err = max_abs(&(&b - &a * k)) / (max_abs(&a) * k.norm());
    prop_assert!(err < 1e-12, "relative defect {err:.3e}");
    Ok(())
}

pub fn check_projective(seed: u64, c: Complex64, d: Complex64) -> Check {
    let (cfg, gate) = cs_config();
    let a = transfer_matrix(&general_matrix(6, seed), &cfg, &gate.comp_basis).unwrap().entries;
    let f = fidelity_matrices(&a, &gate.matrix).unwrap();
    let g = fidelity_matrices(&(&a * c), &(&gate.matrix * d)).unwrap();
    prop_assert!((f - g).abs() < 1e-12, "F = {f}, scaled {g}");
    Ok(())
}

pub fn check_scaled_success(seed: u64, c: Complex64) -> Check {
    let (cfg, gate) = cs_config();
    let w = general_matrix(6, seed);
    let s = scaled_success(&w, &cfg, &gate).unwrap();
    let t = scaled_success(&(&w * c), &cfg, &gate).unwrap();
    prop_assert!((s - t).abs() <= 1e-10 * s.max(1e-300), "S~ = {s}, scaled {t}");
    Ok(())
}

pub fn check_sandwich(seed: u64, unitary: bool) -> Check {
    let (cfg, gate) = cs_config();
    let w = if unitary { haar_like(6, seed) } else { general_matrix(6, seed) };
    let a = transfer_matrix(&w, &cfg, &gate.comp_basis).unwrap().entries;
    let (lo, hi) = success_bounds_matrix(&a);
    let s = success_matrix(&a);
    let eps = 1e-12 * hi.abs().max(1e-300);
    prop_assert!(lo - eps <= s && s <= hi + eps, "{lo} <= {s} <= {hi}");
    Ok(())
}

/// Run a property for `cases` random inputs, returning the failure message.
pub fn run_property<S, F>(cases: u32, strategy: S, test: F) -> std::result::Result<(), String>
where
    S: Strategy,
    F: Fn(S::Value) -> Check,
{
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

/// Largest input-state variance of `A^dag A` over the perfect-fidelity runs.
pub fn worst_input_variance(sw: &Sweep, oc: &OptimizeConfig) -> f64 {
    let ev = Evaluator::new(&oc.cfg, &oc.gate).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    sw.runs
        .iter()
        .filter(|r| r.on_manifold)
        .map(|r| {
            let a = ev.evaluate(&r.final_x).unwrap().transfer;
            let a = &a / Complex64::new(a.norm(), 0.0) * Complex64::new((a.ncols() as f64).sqrt(), 0.0);
            input_state_variance(&a, 200, &mut rng)
        })
        .fold(0.0, f64::max)
}

/// Runs with success below this have a vanishing transfer matrix; F is a
/// ratio of near-zeros there and they are not maxima.
pub const DEGENERATE_SUCCESS: f64 = 1e-9;

/// Largest finite-difference gradient norm of F over the perfect-fidelity
/// runs, and the number of degenerate runs skipped.
pub fn worst_fd_gradient(sw: &Sweep, oc: &OptimizeConfig) -> (f64, usize) {
    let ev = Evaluator::new(&oc.cfg, &oc.gate).unwrap();
    let good: Vec<_> = sw.runs.iter().filter(|r| r.on_manifold).collect();
    let worst = good
        .iter()
        .filter(|r| r.success >= DEGENERATE_SUCCESS)
        .map(|r| {
            let g = ev.gradient_fd(Objective::Fidelity, &r.final_x, 1e-6).unwrap();
            g.iter().map(|v| v * v).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);
    (worst, good.iter().filter(|r| r.success < DEGENERATE_SUCCESS).count())
}
