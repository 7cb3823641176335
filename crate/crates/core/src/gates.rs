//! Target gates.
//!
//! A target is a complex matrix from the computational input basis into the
//! output Fock basis on the computational modes, normalised so that
//! `<At|At> = tr(At^dag At) / Dc = 1`. With that convention the success
//! probability at perfect fidelity reads off directly as `|g|^2` for
//! `A = g At`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{computational_basis, FockBasis, FockState};
use crate::permanent::CMatrix;
use crate::transfer::output_basis;

#[derive(Clone, Debug)]
pub struct TargetGate {
    pub name: String,
    pub comp_basis: Vec<FockState>,
    pub out_basis: FockBasis,
    pub matrix: CMatrix,
}

impl TargetGate {
    /// Build from a logical `Dc x Dc` matrix acting on `comp_basis`.
    pub fn from_logical(name: &str, comp_basis: Vec<FockState>, logical: &CMatrix) -> Result<Self> {
        let dc = comp_basis.len();
        if logical.shape() != (dc, dc) {
            return Err(Error::Dimension(format!(
                "logical matrix is {}x{}, basis has {dc} states",
                logical.nrows(),
                logical.ncols()
            )));
        }
        let n_comp = check_basis(&comp_basis)?;
        let out_basis = output_basis(&comp_basis, n_comp);
        let mut m = CMatrix::zeros(out_basis.len(), dc);
        for (r, s) in comp_basis.iter().enumerate() {
            let row = out_basis.index_of(s).expect("computational states lie in the output basis");
            for c in 0..dc {
                m[(row, c)] = logical[(r, c)];
            }
        }
        Self::from_output_matrix(name, comp_basis, m)
    }

    /// Build from a full `|out_basis| x Dc` matrix.
    pub fn from_output_matrix(name: &str, comp_basis: Vec<FockState>, matrix: CMatrix) -> Result<Self> {
        let n_comp = check_basis(&comp_basis)?;
        let out_basis = output_basis(&comp_basis, n_comp);
        if matrix.shape() != (out_basis.len(), comp_basis.len()) {
            return Err(Error::Dimension(format!(
                "target matrix is {}x{}, expected {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                out_basis.len(),
                comp_basis.len()
            )));
        }
        for (c, s_in) in comp_basis.iter().enumerate() {
            for (r, s_out) in out_basis.iter().enumerate() {
                if s_out.photons() != s_in.photons() && matrix[(r, c)].norm() > 0.0 {
                    return Err(Error::Conservation(format!("target maps {s_in} onto {s_out}")));
                }
            }
        }
        let norm2 = matrix.norm_squared() / comp_basis.len() as f64;
        if norm2 == 0.0 || !norm2.is_finite() {
            return Err(Error::Gate("target matrix is identically zero".into()));
        }
        Ok(TargetGate {
            name: name.to_string(),
            comp_basis,
            out_basis,
            matrix: matrix / Complex64::new(norm2.sqrt(), 0.0),
        })
    }

    pub fn dc(&self) -> usize {
        self.comp_basis.len()
    }

    pub fn n_comp(&self) -> usize {
        self.comp_basis[0].modes()
    }

    /// Photon number of the computational input, if every basis state has
    /// the same one.
    pub fn comp_photons(&self) -> Option<usize> {
        let p = self.comp_basis[0].photons();
        self.comp_basis.iter().all(|s| s.photons() == p).then_some(p)
    }

    /// Restriction of the target to the computational rows, `Dc x Dc`.
    pub fn logical(&self) -> CMatrix {
        let rows: Vec<usize> = self
            .comp_basis
            .iter()
            .map(|s| self.out_basis.index_of(s).unwrap())
            .collect();
        CMatrix::from_fn(self.dc(), self.dc(), |r, c| self.matrix[(rows[r], c)])
    }

    pub fn to_document(&self) -> GateDocument {
        GateDocument {
            name: self.name.clone(),
            comp_basis: self.comp_basis.iter().map(|s| s.occupations().to_vec()).collect(),
            matrix: self
                .matrix
                .row_iter()
                .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
            per_sector: self.comp_photons().is_none(),
        }
    }
}

fn check_basis(comp_basis: &[FockState]) -> Result<usize> {
    let first = comp_basis
        .first()
        .ok_or_else(|| Error::Gate("empty computational basis".into()))?;
    let n_comp = first.modes();
    if n_comp == 0 || comp_basis.iter().any(|s| s.modes() != n_comp) {
        return Err(Error::Dimension("computational basis states must share a positive mode count".into()));
    }
    if FockBasis::from_states(comp_basis.to_vec()).is_none() {
        return Err(Error::Gate("duplicate computational basis state".into()));
    }
    Ok(n_comp)
}

fn real_diag(d: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d.len(), d.iter().map(|&x| Complex64::new(x, 0.0))))
}

/// Single-mode nonlinear sign: `|2> -> -|2>`, photon-number sectored.
pub fn make_ns() -> TargetGate {
    let basis = (0..=2u8).map(|n| FockState::new(vec![n])).collect();
    TargetGate::from_logical("ns", basis, &real_diag(&[1.0, 1.0, -1.0])).unwrap()
}

/// Controlled sign, `diag(1, 1, 1, -1)` on two dual-rail qubits.
pub fn make_cs() -> TargetGate {
    TargetGate::from_logical("cs", computational_basis(2), &real_diag(&[1.0, 1.0, 1.0, -1.0])).unwrap()
}

/// CNOT = (I x H) CS (I x H) in the logical basis.
pub fn make_cnot() -> TargetGate {
    let h = hadamard_on(2, 1);
    let cs = real_diag(&[1.0, 1.0, 1.0, -1.0]);
    TargetGate::from_logical("cnot", computational_basis(2), &(&h * cs * &h)).unwrap()
}

/// Toffoli in sign form: `+1` on `|111>`, `-1` elsewhere.
pub fn make_toffoli_sign() -> TargetGate {
    let mut d = vec![-1.0; 8];
    d[7] = 1.0;
    TargetGate::from_logical("toffoli", computational_basis(3), &real_diag(&d)).unwrap()
}

/// Hadamard on `qubit` (0 = most significant) of an `n`-qubit register.
pub fn hadamard_on(n: usize, qubit: usize) -> CMatrix {
    let dim = 1usize << n;
    let shift = n - 1 - qubit;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(dim, dim, |r, c| {
        if (r ^ c) & !(1 << shift) != 0 {
            return Complex64::new(0.0, 0.0);
        }
        let sign = if (r >> shift) & 1 == 1 && (c >> shift) & 1 == 1 { -1.0 } else { 1.0 };
        Complex64::new(sign * s, 0.0)
    })
}

pub fn builtin(name: &str) -> Option<TargetGate> {
    match name.to_ascii_lowercase().as_str() {
        "ns" => Some(make_ns()),
        "cs" | "cz" => Some(make_cs()),
        "cnot" => Some(make_cnot()),
        "toffoli" => Some(make_toffoli_sign()),
        _ => None,
    }
}

pub const BUILTIN_GATES: [(&str, &str); 4] = [
    ("ns", "nonlinear sign on one mode, |2> -> -|2> (photon-number sectored, Dc = 3)"),
    ("cs", "controlled sign on two dual-rail qubits, diag(1,1,1,-1)"),
    ("cnot", "CNOT, the CS gate conjugated by a Hadamard on the target qubit"),
    ("toffoli", "Toffoli in sign form, +1 on |111>, -1 elsewhere"),
];

/// Serialised gate definition. Complex entries are `[re, im]` pairs; the
/// matrix is row-major with either `Dc` rows (logical) or one row per output
/// Fock state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateDocument {
    pub name: String,
    pub comp_basis: Vec<Vec<u8>>,
    pub matrix: Vec<Vec<[f64; 2]>>,
    /// Allow basis states with differing photon numbers.
    #[serde(default)]
    pub per_sector: bool,
}

pub fn load_gate(doc: &GateDocument) -> Result<TargetGate> {
    let basis: Vec<FockState> = doc.comp_basis.iter().map(|v| FockState::new(v.clone())).collect();
    if basis.is_empty() {
        return Err(Error::Gate("empty computational basis".into()));
    }
    let p = basis[0].photons();
    if !doc.per_sector && basis.iter().any(|s| s.photons() != p) {
        return Err(Error::Gate(
            "basis states carry different photon numbers; set per_sector to accept a sectored gate".into(),
        ));
    }
    let dc = basis.len();
    let rows = doc.matrix.len();
    if doc.matrix.iter().any(|r| r.len() != dc) {
        return Err(Error::Dimension(format!("every matrix row must have {dc} columns")));
    }
    let m = CMatrix::from_fn(rows, dc, |r, c| Complex64::new(doc.matrix[r][c][0], doc.matrix[r][c][1]));
    if rows == dc {
        TargetGate::from_logical(&doc.name, basis, &m)
    } else {
        TargetGate::from_output_matrix(&doc.name, basis, m)
    }
}
