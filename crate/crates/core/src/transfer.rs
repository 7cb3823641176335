//! The post-selected transfer matrix A(U).
//!
//! Mode layout is always `[computational | ancilla | vacuum]`. An input
//! computational state `n` is padded with the ancilla input pattern and
//! zeros on the vacuum modes; an output state `m` is padded with the
//! measurement pattern on ancilla+vacuum modes. The amplitude is
//!
//! ```text
//! per(U[rows(n_full), cols(m_full)]) / sqrt(prod n_i! * prod m_j!)
//! ```
//!
//! with creation operators transforming as `a_i^dag -> sum_j U_ij a_j^dag`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{enumerate_fock, FockBasis, FockState};
use crate::permanent::{expand_indices, ryser, ryser_with_gradient, CMatrix, MAX_PERMANENT_SIZE};

/// Mode and photon bookkeeping for one device.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeConfig {
    pub n_comp: usize,
    pub n_ancilla: usize,
    pub n_vacuum: usize,
    /// Photons injected into the ancilla modes (length `n_ancilla`).
    pub ancilla_input: FockState,
    /// Photocount pattern post-selected on ancilla+vacuum modes
    /// (length `n_ancilla + n_vacuum`).
    pub measurement: FockState,
}

impl ModeConfig {
    /// `measurement = None` detects the ancilla pattern back in place, with
    /// zero counts on every vacuum mode.
    pub fn new(
        n_comp: usize,
        ancilla_input: FockState,
        n_vacuum: usize,
        measurement: Option<FockState>,
    ) -> Result<Self> {
        let n_ancilla = ancilla_input.modes();
        let measurement = measurement
            .unwrap_or_else(|| ancilla_input.concat(&FockState::vacuum(n_vacuum)));
        let cfg = ModeConfig {
            n_comp,
            n_ancilla,
            n_vacuum,
            ancilla_input,
            measurement,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Single-photon ancillas, one per ancilla mode.
    pub fn with_single_photon_ancillas(n_comp: usize, n_ancilla: usize, n_vacuum: usize) -> Result<Self> {
        Self::new(n_comp, FockState::new(vec![1; n_ancilla]), n_vacuum, None)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_comp == 0 {
            return Err(Error::Config("at least one computational mode is required".into()));
        }
        if self.ancilla_input.modes() != self.n_ancilla {
            return Err(Error::Config(format!(
                "ancilla input pattern spans {} modes but n_ancilla = {}",
                self.ancilla_input.modes(),
                self.n_ancilla
            )));
        }
        if self.measurement.modes() != self.n_ancilla + self.n_vacuum {
            return Err(Error::Config(format!(
                "measurement pattern spans {} modes, expected n_ancilla + n_vacuum = {}",
                self.measurement.modes(),
                self.n_ancilla + self.n_vacuum
            )));
        }
        if self.measurement.photons() != self.ancilla_input.photons() {
            return Err(Error::Conservation(format!(
                "measurement detects {} photons but the ancillas carry {}",
                self.measurement.photons(),
                self.ancilla_input.photons()
            )));
        }
        Ok(())
    }

    pub fn total_modes(&self) -> usize {
        self.n_comp + self.n_ancilla + self.n_vacuum
    }

    pub fn ancilla_photons(&self) -> usize {
        self.ancilla_input.photons()
    }

    fn full_input(&self, comp: &FockState) -> FockState {
        comp.concat(&self.ancilla_input).concat(&FockState::vacuum(self.n_vacuum))
    }

    fn full_output(&self, comp: &FockState) -> FockState {
        comp.concat(&self.measurement)
    }
}

/// A(U) together with the bases labelling its rows and columns.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    pub out_basis: FockBasis,
    pub in_basis: Vec<FockState>,
    pub entries: CMatrix,
}

impl TransferMatrix {
    pub fn dc(&self) -> usize {
        self.in_basis.len()
    }
}

/// Output basis on the computational modes: one Fock sector per distinct
/// input photon number, sectors in ascending photon number.
pub fn output_basis(in_basis: &[FockState], n_comp: usize) -> FockBasis {
    let mut sectors: Vec<usize> = in_basis.iter().map(FockState::photons).collect();
    sectors.sort_unstable();
    sectors.dedup();
    let states = sectors
        .into_iter()
        .flat_map(|p| enumerate_fock(p, n_comp).states().to_vec())
        .collect();
    FockBasis::from_states(states).expect("sectors are disjoint")
}

#[derive(Clone, Debug)]
struct PlanEntry {
    out: usize,
    inp: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    scale: f64,
}

/// Precomputed index lists for every structurally non-zero entry of A, so
/// repeated evaluation only gathers and takes permanents.
#[derive(Clone, Debug)]
pub struct TransferPlan {
    cfg: ModeConfig,
    in_basis: Vec<FockState>,
    out_basis: FockBasis,
    entries: Vec<PlanEntry>,
}

/// A(U) and the per-entry permanent minors needed to pull gradients back
/// onto U.
#[derive(Clone, Debug)]
pub struct TransferJacobian {
    pub entries: CMatrix,
    minors: Vec<Complex64>,
    offsets: Vec<usize>,
}

impl TransferPlan {
    pub fn new(cfg: &ModeConfig, in_basis: &[FockState]) -> Result<Self> {
        cfg.validate()?;
        if in_basis.is_empty() {
            return Err(Error::Dimension("empty computational basis".into()));
        }
        for s in in_basis {
            if s.modes() != cfg.n_comp {
                return Err(Error::Dimension(format!(
                    "input state {s} has {} modes, expected {}",
                    s.modes(),
                    cfg.n_comp
                )));
            }
        }
        let out_basis = output_basis(in_basis, cfg.n_comp);
        let mut entries = Vec::new();
        for (inp, s_in) in in_basis.iter().enumerate() {
            let full_in = cfg.full_input(s_in);
            let rows = expand_indices(full_in.occupations());
            if rows.len() > MAX_PERMANENT_SIZE {
                return Err(Error::TooLarge {
                    size: rows.len(),
                    max: MAX_PERMANENT_SIZE,
                });
            }
            for (out, s_out) in out_basis.iter().enumerate() {
                if s_out.photons() != s_in.photons() {
                    continue;
                }
                let full_out = cfg.full_output(s_out);
                let cols = expand_indices(full_out.occupations());
                debug_assert_eq!(rows.len(), cols.len());
                let scale = 1.0 / (full_in.factorial_weight() * full_out.factorial_weight()).sqrt();
                entries.push(PlanEntry {
                    out,
                    inp,
                    rows: rows.clone(),
                    cols,
                    scale,
                });
            }
        }
        Ok(TransferPlan {
            cfg: cfg.clone(),
            in_basis: in_basis.to_vec(),
            out_basis,
            entries,
        })
    }

    pub fn config(&self) -> &ModeConfig {
        &self.cfg
    }

    pub fn in_basis(&self) -> &[FockState] {
        &self.in_basis
    }

    pub fn out_basis(&self) -> &FockBasis {
        &self.out_basis
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.out_basis.len(), self.in_basis.len())
    }

    fn check_dims(&self, u: &CMatrix) -> Result<()> {
        let n = self.cfg.total_modes();
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::Dimension(format!(
                "interferometer is {}x{}, configuration needs {n}x{n}",
                u.nrows(),
                u.ncols()
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, u: &CMatrix) -> Result<CMatrix> {
        self.check_dims(u)?;
        let (r, c) = self.shape();
        let mut a = CMatrix::zeros(r, c);
        let mut buf = [Complex64::new(0.0, 0.0); MAX_PERMANENT_SIZE * MAX_PERMANENT_SIZE];
        for e in &self.entries {
            let n = e.rows.len();
            gather(u, &e.rows, &e.cols, &mut buf[..n * n]);
            a[(e.out, e.inp)] = ryser(n, &buf[..n * n]) * e.scale;
        }
        Ok(a)
    }

    pub fn transfer_matrix(&self, u: &CMatrix) -> Result<TransferMatrix> {
        Ok(TransferMatrix {
            out_basis: self.out_basis.clone(),
            in_basis: self.in_basis.clone(),
            entries: self.evaluate(u)?,
        })
    }

    pub fn evaluate_with_jacobian(&self, u: &CMatrix) -> Result<TransferJacobian> {
        self.check_dims(u)?;
        let (r, c) = self.shape();
        let mut a = CMatrix::zeros(r, c);
        let mut minors = Vec::new();
        let mut offsets = Vec::with_capacity(self.entries.len() + 1);
        let mut buf = [Complex64::new(0.0, 0.0); MAX_PERMANENT_SIZE * MAX_PERMANENT_SIZE];
        for e in &self.entries {
            let n = e.rows.len();
            gather(u, &e.rows, &e.cols, &mut buf[..n * n]);
            offsets.push(minors.len());
            let start = minors.len();
            minors.resize(start + n * n, Complex64::new(0.0, 0.0));
            let p = ryser_with_gradient(n, &buf[..n * n], &mut minors[start..]);
            a[(e.out, e.inp)] = p * e.scale;
            minors[start..].iter_mut().for_each(|m| *m *= e.scale);
        }
        offsets.push(minors.len());
        Ok(TransferJacobian {
            entries: a,
            minors,
            offsets,
        })
    }

    /// Given holomorphic partials `weights[a][b] = df/dA_ab` of a real
    /// function f, return `Gamma` with `df = Re tr(Gamma^dag dU)`.
    pub fn pull_back(&self, jac: &TransferJacobian, weights: &CMatrix) -> CMatrix {
        let n_modes = self.cfg.total_modes();
        let mut acc = CMatrix::zeros(n_modes, n_modes);
        for (k, e) in self.entries.iter().enumerate() {
            let w = weights[(e.out, e.inp)];
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            let n = e.rows.len();
            let minors = &jac.minors[jac.offsets[k]..jac.offsets[k + 1]];
            for (r, &i) in e.rows.iter().enumerate() {
                for (c, &j) in e.cols.iter().enumerate() {
                    acc[(i, j)] += w * minors[r * n + c];
                }
            }
        }
        acc.map(|z| 2.0 * z.conj())
    }
}

fn gather(u: &CMatrix, rows: &[usize], cols: &[usize], buf: &mut [Complex64]) {
    let n = rows.len();
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            buf[r * n + c] = u[(i, j)];
        }
    }
}

/// One-shot A(U) for the given configuration and input basis.
pub fn transfer_matrix(u: &CMatrix, cfg: &ModeConfig, in_basis: &[FockState]) -> Result<TransferMatrix> {
    TransferPlan::new(cfg, in_basis)?.transfer_matrix(u)
}

/// Largest entry of |U^dag U - I|.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let g = u.adjoint() * u - CMatrix::identity(n, n);
    g.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The induced map Omega(U) on `photons` photons over all modes. Test oracle
/// for [`transfer_matrix`]; columns are inputs, rows outputs.
pub fn full_omega(u: &CMatrix, photons: usize) -> Result<(FockBasis, CMatrix)> {
    if u.nrows() != u.ncols() {
        return Err(Error::Dimension("interferometer must be square".into()));
    }
    let defect = unitarity_defect(u);
    if defect > 1e-10 {
        return Err(Error::NotUnitary(defect));
    }
    let basis = enumerate_fock(photons, u.nrows());
    let d = basis.len();
    let mut omega = CMatrix::zeros(d, d);
    let mut buf = vec![Complex64::new(0.0, 0.0); photons * photons];
    for (col, s_in) in basis.iter().enumerate() {
        let rows = expand_indices(s_in.occupations());
        for (row, s_out) in basis.iter().enumerate() {
            let cols = expand_indices(s_out.occupations());
            gather(u, &rows, &cols, &mut buf);
            let scale = 1.0 / (s_in.factorial_weight() * s_out.factorial_weight()).sqrt();
            omega[(row, col)] = ryser(photons, &buf) * scale;
        }
    }
    Ok((basis, omega))
}
