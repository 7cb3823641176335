//! Fidelity, success probability and their gradients.
//!
//! Inner products are `<A|B> = tr(A^dag B) / Dc`. Fidelity is the projective
//! overlap `|<A|At>|^2 / (<A|A> <At|At>)`; success is `<A|A>`. For a general
//! (non-unitary) matrix `W` both are evaluated on `W / sigma_max(W)`, which
//! for a fixed photon number is exactly `S(W) / sigma_max^(2(Mc+Ma))`.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gates::TargetGate;
use crate::param::{Chart, ChartPoint, ParamVector};
use crate::permanent::CMatrix;
use crate::transfer::{ModeConfig, TransferMatrix, TransferPlan};

/// Fidelity, success and the Fubini–Study angle of one design.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ObjectiveValue {
    pub fidelity: f64,
    pub success: f64,
    pub fubini_study: f64,
}

impl ObjectiveValue {
    pub fn new(fidelity: f64, success: f64) -> Self {
        ObjectiveValue {
            fidelity,
            success,
            fubini_study: fubini_study(fidelity),
        }
    }
}

/// `gamma = arccos(sqrt(F))`, clamped into the domain.
pub fn fubini_study(fidelity: f64) -> f64 {
    fidelity.clamp(0.0, 1.0).sqrt().acos()
}

pub fn inner(a: &CMatrix, b: &CMatrix, dc: usize) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum::<Complex64>() / dc as f64
}

/// Fidelity between two same-shape matrices.
pub fn fidelity_matrices(a: &CMatrix, t: &CMatrix) -> Result<f64> {
    if a.shape() != t.shape() {
        return Err(Error::Dimension(format!("fidelity of {:?} against {:?}", a.shape(), t.shape())));
    }
    let na = a.norm_squared();
    let nt = t.norm_squared();
    if na == 0.0 || nt == 0.0 {
        return Err(Error::UndefinedFidelity);
    }
    let c = inner(a, t, 1);
    Ok(c.norm_sqr() / (na * nt))
}

pub fn fidelity(a: &TransferMatrix, t: &TargetGate) -> Result<f64> {
    if a.in_basis != t.comp_basis {
        return Err(Error::Dimension("transfer matrix and target use different input bases".into()));
    }
    fidelity_matrices(&a.entries, &t.matrix)
}

pub fn success_matrix(a: &CMatrix) -> f64 {
    a.norm_squared() / a.ncols() as f64
}

pub fn success(a: &TransferMatrix) -> f64 {
    success_matrix(&a.entries)
}

/// Extreme eigenvalues `(min, max)` of `A^dag A`.
pub fn success_bounds_matrix(a: &CMatrix) -> (f64, f64) {
    let gram = a.adjoint() * a;
    let ev = SymmetricEigen::new(gram).eigenvalues;
    (ev.min(), ev.max())
}

pub fn success_bounds(a: &TransferMatrix) -> (f64, f64) {
    success_bounds_matrix(&a.entries)
}

/// Success of `w / sigma_max(w)`.
pub fn scaled_success(w: &CMatrix, cfg: &ModeConfig, t: &TargetGate) -> Result<f64> {
    let sigma = crate::param::spectral_norm(w);
    if sigma == 0.0 {
        return Err(Error::Config("scaled success of a zero matrix is undefined".into()));
    }
    let plan = TransferPlan::new(cfg, &t.comp_basis)?;
    Ok(success_matrix(&plan.evaluate(&(w / Complex64::new(sigma, 0.0)))?))
}

/// Variance of `<psi|A^dag A|psi>` over random normalised inputs.
pub fn input_state_variance<R: Rng>(a: &CMatrix, samples: usize, rng: &mut R) -> f64 {
    let gram = a.adjoint() * a;
    let dc = a.ncols();
    let vals: Vec<f64> = (0..samples)
        .map(|_| {
            let mut psi = nalgebra::DVector::from_fn(dc, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let n = psi.norm();
            psi /= Complex64::new(n, 0.0);
            (psi.adjoint() * &gram * &psi)[(0, 0)].re
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64
}

/// Scalar objectives the optimiser can ascend. In the general chart
/// `Success` is the scaled success.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Objective {
    Fidelity,
    Success,
    /// `S - mu (1 - F)`.
    Merit { mu: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GradientMode {
    /// Central differences with step 1e-6.
    FiniteDifference,
    /// Permanent minors chained through the chart derivative.
    #[default]
    Analytic,
}

pub const FD_STEP: f64 = 1e-6;

/// Binds a configuration and target so objectives can be evaluated at chart
/// coordinates.
#[derive(Clone, Debug)]
pub struct Evaluator {
    plan: TransferPlan,
    target: CMatrix,
    target_norm2: f64,
}

/// Everything computed at one point.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: ObjectiveValue,
    /// Matrix fed to the transfer map (`W / sigma` in the general chart).
    pub matrix: CMatrix,
    pub transfer: CMatrix,
}

impl Evaluator {
    pub fn new(cfg: &ModeConfig, target: &TargetGate) -> Result<Self> {
        if cfg.n_comp != target.n_comp() {
            return Err(Error::Config(format!(
                "gate '{}' acts on {} computational modes, configuration has {}",
                target.name,
                target.n_comp(),
                cfg.n_comp
            )));
        }
        let plan = TransferPlan::new(cfg, &target.comp_basis)?;
        Ok(Evaluator {
            plan,
            target: target.matrix.clone(),
            target_norm2: target.matrix.norm_squared(),
        })
    }

    pub fn config(&self) -> &ModeConfig {
        self.plan.config()
    }

    pub fn plan(&self) -> &TransferPlan {
        &self.plan
    }

    pub fn modes(&self) -> usize {
        self.plan.config().total_modes()
    }

    fn normalised(x: &ParamVector, m: CMatrix) -> Result<(CMatrix, f64)> {
        match x.chart {
            Chart::Unitary => Ok((m, 1.0)),
            Chart::General => {
                let sigma = crate::param::spectral_norm(&m);
                if !(sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::NonFinite("vanishing or non-finite general matrix".into()));
                }
                Ok((m / Complex64::new(sigma, 0.0), sigma))
            }
        }
    }

    fn values_from(&self, a: &CMatrix) -> (f64, f64) {
        let na = a.norm_squared();
        let s = na / a.ncols() as f64;
        let f = if na == 0.0 {
            0.0
        } else {
            inner(a, &self.target, 1).norm_sqr() / (na * self.target_norm2)
        };
        (f, s)
    }

    /// Evaluate the transfer matrix and the (F, S) pair of a square matrix
    /// directly, without going through a chart.
    pub fn evaluate_matrix(&self, u: &CMatrix) -> Result<Evaluation> {
        let a = self.plan.evaluate(u)?;
        let (f, s) = self.values_from(&a);
        Ok(Evaluation {
            value: ObjectiveValue::new(f, s),
            matrix: u.clone(),
            transfer: a,
        })
    }

    pub fn evaluate(&self, x: &ParamVector) -> Result<Evaluation> {
        self.check_chart(x)?;
        let m = ChartPoint::new(x)?.matrix;
        let (v, _) = Self::normalised(x, m)?;
        let a = self.plan.evaluate(&v)?;
        let (f, s) = self.values_from(&a);
        if !f.is_finite() || !s.is_finite() {
            return Err(Error::NonFinite(format!("F = {f}, S = {s}")));
        }
        Ok(Evaluation {
            value: ObjectiveValue::new(f, s),
            matrix: v,
            transfer: a,
        })
    }

    fn check_chart(&self, x: &ParamVector) -> Result<()> {
        if x.dim_modes != self.modes() {
            return Err(Error::Dimension(format!(
                "parameters describe {} modes, configuration has {}",
                x.dim_modes,
                self.modes()
            )));
        }
        Ok(())
    }

    pub fn value(&self, obj: Objective, x: &ParamVector) -> Result<f64> {
        let v = self.evaluate(x)?.value;
        Ok(combine(obj, v.fidelity, v.success))
    }

    pub fn gradient(&self, obj: Objective, x: &ParamVector, mode: GradientMode) -> Result<Vec<f64>> {
        match mode {
            GradientMode::FiniteDifference => self.gradient_fd(obj, x, FD_STEP),
            GradientMode::Analytic => Ok(self.value_and_gradient(obj, x)?.1),
        }
    }

    pub fn gradient_fd(&self, obj: Objective, x: &ParamVector, h: f64) -> Result<Vec<f64>> {
        let mut probe = x.clone();
        let mut g = Vec::with_capacity(x.len());
        for k in 0..x.len() {
            let c = x.coords[k];
            probe.coords[k] = c + h;
            let fp = self.value(obj, &probe)?;
            probe.coords[k] = c - h;
            let fm = self.value(obj, &probe)?;
            probe.coords[k] = c;
            let d = (fp - fm) / (2.0 * h);
            if !d.is_finite() {
                return Err(Error::NonFinite(format!("gradient component {k}")));
            }
            g.push(d);
        }
        Ok(g)
    }

    /// Objective value, (F, S) and analytic gradient in chart coordinates.
    pub fn value_and_gradient(&self, obj: Objective, x: &ParamVector) -> Result<(f64, Vec<f64>, ObjectiveValue)> {
        self.check_chart(x)?;
        let point = ChartPoint::new(x)?;
        let (v, sigma) = Self::normalised(x, point.matrix.clone())?;
        let jac = self.plan.evaluate_with_jacobian(&v)?;
        let a = &jac.entries;
        let (f, s) = self.values_from(a);
        if !f.is_finite() || !s.is_finite() {
            return Err(Error::NonFinite(format!("F = {f}, S = {s}")));
        }
        let dc = a.ncols() as f64;
        let na = a.norm_squared();
        let (wf, ws) = match obj {
            Objective::Fidelity => (1.0, 0.0),
            Objective::Success => (0.0, 1.0),
            Objective::Merit { mu } => (mu, 1.0),
        };
        // Holomorphic partials dObj/dA.
        let mut weights = CMatrix::zeros(a.nrows(), a.ncols());
        if wf != 0.0 {
            if na == 0.0 {
                return Err(Error::UndefinedFidelity);
            }
            let c = inner(a, &self.target, 1);
            let denom = na * self.target_norm2;
            let cn = c.norm_sqr();
            weights.zip_apply(&self.target, |w, t| *w += wf * (c * t.conj() / denom));
            weights.zip_apply(a, |w, z| *w -= wf * (z.conj() * cn / (na * denom)));
        }
        if ws != 0.0 {
            weights.zip_apply(a, |w, z| *w += ws * z.conj() / dc);
        }
        let gamma_v = self.plan.pull_back(&jac, &weights);
        let gamma = match x.chart {
            Chart::Unitary => gamma_v,
            Chart::General => {
                // V = W / sigma(W); d sigma = Re tr((u v^dag)^dag dW).
                let w = &point.matrix;
                let svd = w.clone().svd(true, true);
                let k = svd.singular_values.imax();
                let uu = svd.u.as_ref().unwrap().column(k).into_owned();
                let vt = svd.v_t.as_ref().unwrap().row(k).into_owned();
                let top = uu * vt;
                let proj = inner(&gamma_v, w, 1).re / (sigma * sigma);
                gamma_v / Complex64::new(sigma, 0.0) - top * Complex64::new(proj, 0.0)
            }
        };
        let g = point.pull_back(&gamma);
        if g.iter().any(|d| !d.is_finite()) {
            return Err(Error::NonFinite("analytic gradient".into()));
        }
        Ok((combine(obj, f, s), g, ObjectiveValue::new(f, s)))
    }
}

fn combine(obj: Objective, f: f64, s: f64) -> f64 {
    match obj {
        Objective::Fidelity => f,
        Objective::Success => s,
        Objective::Merit { mu } => s - mu * (1.0 - f),
    }
}
