//! Two-stage design search.
//!
//! Stage 1 ascends the fidelity from a random start until the gradient
//! vanishes; a run that ends with `|1 - F| < tol_fidelity` is on the
//! perfect-fidelity set. Stage 2 then ascends the merit `S - mu (1 - F)`
//! through an increasing penalty schedule and finishes with a fidelity
//! polish so the reported point is back on the set. In the general chart `S`
//! is the success of `W / sigma_max(W)`.
//!
//! Every ascent is BFGS on the analytic (or finite-difference) gradient with
//! a halving Armijo line search, so the objective never decreases across an
//! accepted step.

use std::collections::BTreeSet;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gates::TargetGate;
use crate::objectives::{input_state_variance, success_bounds_matrix, Evaluator, GradientMode, Objective};
use crate::param::{random_start, spectral_norm, Chart, ParamVector};
use crate::permanent::CMatrix;
use crate::transfer::ModeConfig;

/// Environment variable overriding the worker-thread count of sweeps.
pub const THREADS_ENV: &str = "LOQC_THREADS";

#[derive(Clone, Debug)]
pub struct OptimizeConfig {
    pub gate: TargetGate,
    pub cfg: ModeConfig,
    pub chart: Chart,
    /// Frozen modes, 0-based.
    pub mask: BTreeSet<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub tol_fidelity: f64,
    pub tol_gradient: f64,
    pub max_iters: usize,
    pub penalty_weights: Vec<f64>,
    pub gradient: GradientMode,
}

impl OptimizeConfig {
    pub fn new(gate: TargetGate, cfg: ModeConfig, chart: Chart) -> Self {
        OptimizeConfig {
            gate,
            cfg,
            chart,
            mask: BTreeSet::new(),
            restarts: 1,
            seed: 0,
            tol_fidelity: 1e-9,
            tol_gradient: 1e-8,
            max_iters: 5000,
            penalty_weights: vec![1e1, 1e2, 1e3, 1e4],
            gradient: GradientMode::Analytic,
        }
    }

    pub fn with_mask(mut self, mask: BTreeSet<usize>) -> Self {
        self.mask = mask;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if !(self.tol_fidelity > 0.0) || !(self.tol_gradient > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        if self.penalty_weights.windows(2).any(|w| w[1] < w[0]) || self.penalty_weights.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::Config("penalty weights must be positive and ascending".into()));
        }
        if let Some(&m) = self.mask.iter().next_back() {
            if m >= self.cfg.total_modes() {
                return Err(Error::Config(format!(
                    "mask names mode {} but the device has {} modes",
                    m + 1,
                    self.cfg.total_modes()
                )));
            }
        }
        if self.cfg.n_comp != self.gate.n_comp() {
            return Err(Error::Config(format!(
                "gate '{}' needs {} computational modes, configuration has {}",
                self.gate.name,
                self.gate.n_comp(),
                self.cfg.n_comp
            )));
        }
        Ok(())
    }

    pub fn evaluator(&self) -> Result<Evaluator> {
        Evaluator::new(&self.cfg, &self.gate)
    }

    /// Seed of restart `id`, derived from the master seed.
    pub fn restart_seed(&self, id: usize) -> u64 {
        splitmix64(self.seed ^ splitmix64(id as u64 + 1))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, Serialize)]
pub struct RunResult {
    pub restart_id: usize,
    #[serde(skip)]
    pub final_x: ParamVector,
    #[serde(skip)]
    pub final_u: CMatrix,
    pub fidelity: f64,
    pub success: f64,
    pub on_manifold: bool,
    pub iterations: usize,
    pub wallclock: f64,
}

impl RunResult {
    pub fn infidelity(&self) -> f64 {
        (1.0 - self.fidelity).abs()
    }
}

/// Outcome of a single BFGS ascent.
#[derive(Clone, Debug)]
pub struct Ascent {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximise `f` (value and gradient) from `x0` with BFGS and a halving
/// Armijo line search. Stops on gradient norm below `tol_g`, an exhausted
/// line search, a stalled value, or `max_iters`.
pub fn bfgs_ascent<F>(mut f: F, x0: Vec<f64>, tol_g: f64, max_iters: usize) -> Result<Ascent>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let mut x = DVector::from_vec(x0);
    let (mut fx, g0) = f(x.as_slice())?;
    let mut g = DVector::from_vec(g0);
    if n == 0 {
        return Ok(Ascent { x: vec![], value: fx, grad_norm: 0.0, iterations: 0, converged: true });
    }
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut fresh = true;
    let mut iters = 0;
    const MAX_STEP: f64 = 0.5;
    const C1: f64 = 1e-4;
    const STALL_TOL: f64 = 1e-15;
    const STALL_STEPS: usize = 25;
    let mut stalled = 0;
    while iters < max_iters {
        if g.norm() < tol_g {
            return Ok(Ascent { x: x.data.into(), value: fx, grad_norm: g.norm(), iterations: iters, converged: true });
        }
        let mut d = &h * &g;
        let mut slope = d.dot(&g);
        if !(slope > 0.0) {
            h.fill_with_identity();
            fresh = true;
            d = g.clone();
            slope = d.dot(&g);
        }
        let dn = d.norm();
        let mut alpha = if dn > MAX_STEP { MAX_STEP / dn } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            let xt = &x + &d * alpha;
            match f(xt.as_slice()) {
                Ok((ft, gt)) if ft.is_finite() && ft >= fx + C1 * alpha * slope => {
                    accepted = Some((xt, ft, DVector::from_vec(gt)));
                    break;
                }
                Ok((ft, _)) if !ft.is_finite() => {}
                Ok(_) => {}
                Err(Error::NonFinite(_)) => {}
                Err(e) => return Err(e),
            }
            alpha *= 0.5;
        }
        iters += 1;
        let Some((xn, fnew, gn)) = accepted else {
            if fresh {
                // Steepest ascent cannot improve: numerically stationary.
                return Ok(Ascent { x: x.data.into(), value: fx, grad_norm: g.norm(), iterations: iters, converged: false });
            }
            h.fill_with_identity();
            fresh = true;
            continue;
        };
        let s = &xn - &x;
        // Ascending f is descending -f: y = grad(-f)_new - grad(-f)_old.
        let y = &g - &gn;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if fresh {
                h *= sy / y.dot(&y);
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H+ = H - rho (s hy^T + hy s^T) + (rho^2 y^T H y + rho) s s^T
            h.ger(-rho, &s, &hy, 1.0);
            h.ger(-rho, &hy, &s, 1.0);
            h.ger(rho * rho * yhy + rho, &s, &s, 1.0);
            fresh = false;
        }
        if fnew - fx <= STALL_TOL * fx.abs().max(1.0) {
            stalled += 1;
        } else {
            stalled = 0;
        }
        x = xn;
        fx = fnew;
        g = gn;
        if stalled >= STALL_STEPS {
            break;
        }
    }
    let gn = g.norm();
    Ok(Ascent { x: x.data.into(), value: fx, grad_norm: gn, iterations: iters, converged: gn < tol_g })
}

fn objective_fn<'a>(
    ev: &'a Evaluator,
    template: &'a ParamVector,
    obj: Objective,
    mode: GradientMode,
) -> impl FnMut(&[f64]) -> Result<(f64, Vec<f64>)> + 'a {
    move |c: &[f64]| {
        let p = template.with_coords(c.to_vec());
        match mode {
            GradientMode::Analytic => {
                let (v, g, _) = ev.value_and_gradient(obj, &p)?;
                Ok((v, g))
            }
            GradientMode::FiniteDifference => Ok((ev.value(obj, &p)?, ev.gradient(obj, &p, mode)?)),
        }
    }
}

fn finish(
    ev: &Evaluator,
    oc: &OptimizeConfig,
    restart_id: usize,
    x: ParamVector,
    iterations: usize,
    started: Instant,
) -> Result<RunResult> {
    let e = ev.evaluate(&x)?;
    let fidelity = e.value.fidelity;
    Ok(RunResult {
        restart_id,
        final_x: x,
        final_u: e.matrix,
        fidelity,
        success: e.value.success,
        on_manifold: (1.0 - fidelity).abs() < oc.tol_fidelity,
        iterations,
        wallclock: started.elapsed().as_secs_f64(),
    })
}

fn check_start(x0: &ParamVector, oc: &OptimizeConfig) -> Result<()> {
    if x0.chart != oc.chart || x0.frozen != oc.mask || x0.dim_modes != oc.cfg.total_modes() {
        return Err(Error::Config("starting point does not match the configured chart, mask or mode count".into()));
    }
    Ok(())
}

/// Local ascent of the fidelity.
pub fn stage1_fidelity(x0: &ParamVector, oc: &OptimizeConfig) -> Result<RunResult> {
    stage1_with(&oc.evaluator()?, x0, oc, 0)
}

fn stage1_with(ev: &Evaluator, x0: &ParamVector, oc: &OptimizeConfig, restart_id: usize) -> Result<RunResult> {
    check_start(x0, oc)?;
    let started = Instant::now();
    let a = bfgs_ascent(
        objective_fn(ev, x0, Objective::Fidelity, oc.gradient),
        x0.coords.clone(),
        oc.tol_gradient,
        oc.max_iters,
    )?;
    finish(ev, oc, restart_id, x0.with_coords(a.x), a.iterations, started)
}

/// Ascend `S - mu (1 - F)` through the penalty schedule, then polish `F`.
pub fn stage2_success(r: &RunResult, oc: &OptimizeConfig) -> Result<RunResult> {
    stage2_with(&oc.evaluator()?, r, oc)
}

fn stage2_with(ev: &Evaluator, r: &RunResult, oc: &OptimizeConfig) -> Result<RunResult> {
    if !r.on_manifold {
        return Err(Error::Config("stage 2 needs a run that reached perfect fidelity".into()));
    }
    let started = Instant::now();
    let template = r.final_x.clone();
    let mut coords = template.coords.clone();
    let mut iterations = r.iterations;
    for &mu in &oc.penalty_weights {
        let a = bfgs_ascent(
            objective_fn(ev, &template, Objective::Merit { mu }, oc.gradient),
            coords,
            oc.tol_gradient,
            oc.max_iters,
        )?;
        iterations += a.iterations;
        coords = a.x;
    }
    let polish = bfgs_ascent(
        objective_fn(ev, &template, Objective::Fidelity, oc.gradient),
        coords,
        oc.tol_gradient,
        oc.max_iters,
    )?;
    iterations += polish.iterations;
    let mut out = finish(ev, oc, r.restart_id, template.with_coords(polish.x), iterations, started)?;
    out.wallclock += r.wallclock;
    Ok(out)
}

/// Both stages from one starting point.
pub fn two_stage(x0: &ParamVector, oc: &OptimizeConfig, restart_id: usize) -> Result<RunResult> {
    two_stage_with(&oc.evaluator()?, x0, oc, restart_id)
}

fn two_stage_with(ev: &Evaluator, x0: &ParamVector, oc: &OptimizeConfig, restart_id: usize) -> Result<RunResult> {
    let r = stage1_with(ev, x0, oc, restart_id)?;
    if r.on_manifold {
        stage2_with(ev, &r, oc)
    } else {
        Ok(r)
    }
}

/// The two-stage protocol in the general chart: `S` is replaced by the
/// scaled success and the reported matrix has `sigma_max = 1`.
pub fn optimize_scaled(x0: &ParamVector, oc: &OptimizeConfig) -> Result<RunResult> {
    if oc.chart != Chart::General || x0.chart != Chart::General {
        return Err(Error::Config("optimize_scaled runs in the general chart".into()));
    }
    two_stage(x0, oc, 0)
}

/// Runs whose success values lie within [`PLATEAU_WIDTH`] of each other.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plateau {
    pub success: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

pub const PLATEAU_WIDTH: f64 = 1e-4;

#[derive(Clone, Debug, Serialize)]
pub struct Sweep {
    /// All runs, ascending by success.
    pub runs: Vec<RunResult>,
    /// Clusters of on-manifold runs, ascending by success.
    pub plateaus: Vec<Plateau>,
}

impl Sweep {
    pub fn best(&self) -> Option<&RunResult> {
        self.runs.iter().rev().find(|r| r.on_manifold)
    }

    pub fn on_manifold_count(&self) -> usize {
        self.runs.iter().filter(|r| r.on_manifold).count()
    }

    pub fn plateau_near(&self, s: f64, tol: f64) -> Option<&Plateau> {
        self.plateaus.iter().find(|p| (p.success - s).abs() <= tol)
    }
}

/// Greedy single-linkage on sorted values: a cluster spans at most
/// `width` from its smallest member.
pub fn plateaus(values: &[f64], width: f64) -> Vec<Plateau> {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out: Vec<Plateau> = Vec::new();
    let mut start = 0;
    for i in 0..=v.len() {
        if i == v.len() || v[i] - v[start] >= width {
            if i > start {
                let members = &v[start..i];
                out.push(Plateau {
                    success: members.iter().sum::<f64>() / members.len() as f64,
                    min: members[0],
                    max: members[members.len() - 1],
                    count: members.len(),
                });
            }
            start = i;
        }
    }
    out
}

fn thread_pool() -> Option<rayon::ThreadPool> {
    let n = std::env::var(THREADS_ENV).ok()?.parse::<usize>().ok()?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()
}

/// Independent two-stage runs from per-restart seeds.
pub fn sweep(oc: &OptimizeConfig) -> Result<Sweep> {
    sweep_restarts(oc, 0..oc.restarts)
}

/// Sweep over an explicit set of restart ids (all seeded from `oc.seed`).
pub fn sweep_restarts(oc: &OptimizeConfig, ids: impl IntoIterator<Item = usize>) -> Result<Sweep> {
    oc.validate()?;
    let ev = oc.evaluator()?;
    let ids: Vec<usize> = ids.into_iter().collect();
    let run = |&id: &usize| -> Result<RunResult> {
        let x0 = random_start(oc.chart, oc.cfg.total_modes(), &oc.mask, oc.restart_seed(id));
        match two_stage_with(&ev, &x0, oc, id) {
            Err(Error::NonFinite(_)) => {
                let mut r = finish(&ev, oc, id, x0, 0, Instant::now())?;
                r.on_manifold = false;
                Ok(r)
            }
            other => other,
        }
    };
    let results: Result<Vec<RunResult>> = match thread_pool() {
        Some(pool) => pool.install(|| ids.par_iter().map(run).collect()),
        None => ids.par_iter().map(run).collect(),
    };
    let mut runs = results?;
    runs.sort_by(|a, b| a.success.total_cmp(&b.success).then(a.restart_id.cmp(&b.restart_id)));
    let good: Vec<f64> = runs.iter().filter(|r| r.on_manifold).map(|r| r.success).collect();
    Ok(Sweep { plateaus: plateaus(&good, PLATEAU_WIDTH), runs })
}

/// Local structure of the perfect-fidelity set around a solution.
#[derive(Clone, Debug, Serialize)]
pub struct ManifoldProbe {
    /// Null-space dimension of the fidelity Hessian.
    pub dimension: usize,
    pub eigenvalues: Vec<f64>,
    pub cutoff: f64,
    /// Eigenvalues above the cutoff with positive sign; nonzero means the
    /// point is not a maximum of F.
    pub positive: usize,
}

pub const HESSIAN_STEP: f64 = 1e-4;
pub const NULLITY_CUTOFF: f64 = 1e-6;

/// Tangent dimension of the perfect-fidelity set at `r`, from the nullity
/// of the central-difference Hessian of `F` in the chart's coordinates.
///
/// In the unitary chart the Hessian is taken in the recentred coordinates
/// `U(y) = exp(sum_j y_j H_j) U*`, which use the same generators but are
/// regular at `y = 0` wherever the solution sits on the exponential map.
pub fn manifold_dimension(r: &RunResult, oc: &OptimizeConfig) -> Result<ManifoldProbe> {
    if !r.on_manifold {
        return Err(Error::Config("manifold dimension needs an on-manifold run".into()));
    }
    let base = crate::param::to_matrix(&r.final_x)?.matrix;
    manifold_dimension_at(&base, oc)
}

/// [`manifold_dimension`] at a bare matrix, in `oc`'s chart and mask.
/// Frozen rows and columns of `u` are ignored.
pub fn manifold_dimension_at(u: &CMatrix, oc: &OptimizeConfig) -> Result<ManifoldProbe> {
    let ev = oc.evaluator()?;
    if u.nrows() != ev.modes() || u.ncols() != ev.modes() {
        return Err(Error::Dimension(format!("expected a {0}x{0} matrix", ev.modes())));
    }
    let zero = ParamVector::zeros(oc.chart, ev.modes(), &oc.mask);
    let n = zero.len();
    if n == 0 {
        return Ok(ManifoldProbe { dimension: 0, eigenvalues: vec![], cutoff: 0.0, positive: 0 });
    }
    let free = zero.free_modes();
    let mut start = Vec::with_capacity(n);
    if oc.chart == Chart::General {
        for &i in &free {
            for &j in &free {
                start.push(u[(i, j)].re);
                start.push(u[(i, j)].im);
            }
        }
    }
    let f = |y: &[f64]| -> Result<f64> {
        match oc.chart {
            Chart::Unitary => {
                let e = crate::param::to_matrix(&zero.with_coords(y.to_vec()))?.matrix;
                Ok(ev.evaluate_matrix(&(e * u))?.value.fidelity)
            }
            Chart::General => {
                let c: Vec<f64> = start.iter().zip(y).map(|(a, b)| a + b).collect();
                Ok(ev.evaluate(&zero.with_coords(c))?.value.fidelity)
            }
        }
    };
    let h = HESSIAN_STEP;
    let mut y = vec![0.0; n];
    let f0 = f(&y)?;
    let mut hess = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        y[i] = h;
        let fp = f(&y)?;
        y[i] = -h;
        let fm = f(&y)?;
        y[i] = 0.0;
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let mut val = 0.0;
            for (si, sj, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                y[i] = si * h;
                y[j] = sj * h;
                val += w * f(&y)?;
            }
            y[i] = 0.0;
            y[j] = 0.0;
            let v = val / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(hess).eigenvalues;
    let scale = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = NULLITY_CUTOFF * scale;
    let dimension = eig.iter().filter(|v| v.abs() < cutoff).count();
    let positive = eig.iter().filter(|&&v| v >= cutoff).count();
    let mut eigenvalues: Vec<f64> = eig.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(ManifoldProbe { dimension: if scale == 0.0 { n } else { dimension }, eigenvalues, cutoff, positive })
}

/// Offline check of a candidate matrix.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub fidelity: f64,
    pub success: f64,
    /// Success of `u / sigma_max(u)`; equals `success` for unitary `u`.
    pub scaled_success: f64,
    pub bounds: (f64, f64),
    pub input_variance: f64,
    pub pass: bool,
}

pub fn verify(u: &CMatrix, gate: &TargetGate, cfg: &ModeConfig, tol_fidelity: f64) -> Result<VerifyReport> {
    let ev = Evaluator::new(cfg, gate)?;
    let e = ev.evaluate_matrix(u)?;
    let sigma = spectral_norm(u);
    let scaled = if sigma > 0.0 {
        ev.evaluate_matrix(&(u / num_complex::Complex64::new(sigma, 0.0)))?.value.success
    } else {
        0.0
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let fidelity = e.value.fidelity;
    Ok(VerifyReport {
        fidelity,
        success: e.value.success,
        scaled_success: scaled,
        bounds: success_bounds_matrix(&e.transfer),
        input_variance: input_state_variance(&e.transfer, 100, &mut rng),
        pass: (1.0 - fidelity).abs() < tol_fidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bfgs_on_a_concave_quadratic() {
        let target = [1.0, -2.0, 0.5];
        let f = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            let w = [1.0, 10.0, 100.0];
            let v = -(0..3).map(|i| w[i] * (x[i] - target[i]).powi(2)).sum::<f64>();
            let g = (0..3).map(|i| -2.0 * w[i] * (x[i] - target[i])).collect();
            Ok((v, g))
        };
        let a = bfgs_ascent(f, vec![0.0; 3], 1e-10, 500).unwrap();
        assert!(a.converged);
        for i in 0..3 {
            assert!((a.x[i] - target[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn bfgs_climbs_rosenbrock() {
        let f = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            let (a, b) = (x[0], x[1]);
            let v = -((1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2));
            let g = vec![2.0 * (1.0 - a) + 400.0 * a * (b - a * a), -200.0 * (b - a * a)];
            Ok((v, g))
        };
        let a = bfgs_ascent(f, vec![-1.2, 1.0], 1e-10, 2000).unwrap();
        assert!((a.x[0] - 1.0).abs() < 1e-6 && (a.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn plateau_clustering() {
        let p = plateaus(&[0.0625, 0.07407, 0.0740741, 0.06250005, 0.047], PLATEAU_WIDTH);
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].count, 1);
        assert_eq!(p[1].count, 2);
        assert_eq!(p[2].count, 2);
        assert!(plateaus(&[], PLATEAU_WIDTH).is_empty());
    }

    #[test]
    fn restart_seeds_differ() {
        let oc = OptimizeConfig::new(crate::gates::make_cs(), ModeConfig::with_single_photon_ancillas(4, 2, 0).unwrap(), Chart::Unitary);
        assert_ne!(oc.restart_seed(0), oc.restart_seed(1));
        assert_eq!(oc.restart_seed(3), oc.clone().restart_seed(3));
    }

    #[test]
    fn validation() {
        let oc = OptimizeConfig::new(crate::gates::make_cs(), ModeConfig::with_single_photon_ancillas(4, 2, 0).unwrap(), Chart::Unitary);
        assert!(oc.clone().with_restarts(0).validate().is_err());
        assert!(oc.clone().with_mask([6].into_iter().collect()).validate().is_err());
        let mut bad = oc.clone();
        bad.penalty_weights = vec![100.0, 10.0];
        assert!(bad.validate().is_err());
        let wrong_gate = OptimizeConfig::new(crate::gates::make_toffoli_sign(), oc.cfg.clone(), Chart::Unitary);
        assert!(wrong_gate.validate().is_err());
        assert!(oc.validate().is_ok());
    }

    fn ns() -> OptimizeConfig {
        OptimizeConfig::new(crate::gates::make_ns(), ModeConfig::with_single_photon_ancillas(1, 1, 1).unwrap(), Chart::Unitary)
    }

    #[test]
    fn sweeps_are_reproducible() {
        let oc = ns().with_restarts(6).with_seed(42);
        let a = sweep(&oc).unwrap();
        let b = sweep(&oc).unwrap();
        for (x, y) in a.runs.iter().zip(&b.runs) {
            assert_eq!(x.restart_id, y.restart_id);
            assert!((x.fidelity - y.fidelity).abs() < 1e-12 && (x.success - y.success).abs() < 1e-12);
        }
        let one = sweep(&oc.clone().with_restarts(1)).unwrap();
        assert_eq!(one.runs.len(), 1);
    }

    #[test]
    fn on_manifold_flag_matches_tolerance() {
        let oc = ns().with_restarts(8).with_seed(3);
        let sw = sweep(&oc).unwrap();
        assert!(sw.on_manifold_count() > 0);
        for r in &sw.runs {
            assert_eq!(r.on_manifold, (1.0 - r.fidelity).abs() < oc.tol_fidelity);
        }
        assert!(sw.runs.windows(2).all(|w| w[0].success <= w[1].success));
    }

    #[test]
    fn optimum_is_stationary() {
        let oc = ns().with_restarts(8).with_seed(3);
        let best = sweep(&oc).unwrap().best().unwrap().clone();
        let again = stage1_fidelity(&best.final_x, &oc).unwrap();
        assert!(again.on_manifold);
        let moved: f64 = again.final_x.coords.iter().zip(&best.final_x.coords).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(moved < 1e-6, "moved {moved}");
        let polished = stage2_success(&again, &oc).unwrap();
        assert!(polished.on_manifold);
        assert!((polished.success - best.success).abs() < 1e-6);
    }

    #[test]
    fn stage2_needs_a_solution() {
        let oc = ns();
        let x0 = random_start(Chart::Unitary, 3, &BTreeSet::new(), 1);
        let mut r = stage1_fidelity(&x0, &oc).unwrap();
        r.on_manifold = false;
        assert!(stage2_success(&r, &oc).is_err());
        assert!(optimize_scaled(&x0, &oc).is_err());
    }

    #[test]
    fn frozen_device_has_no_manifold() {
        let oc = ns().with_mask([0, 1, 2].into_iter().collect());
        let p = manifold_dimension_at(&CMatrix::identity(3, 3), &oc).unwrap();
        assert_eq!(p.dimension, 0);
    }
}
