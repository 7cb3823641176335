//! Coordinates on interferometer space.
//!
//! Two charts are supported:
//!
//! * **unitary**: `U = exp(sum_j x_j H_j)` with the anti-Hermitian basis
//!   ordered as the `m` diagonal generators `i E_kk`, then the `m(m-1)/2`
//!   real antisymmetric `E_kl - E_lk`, then the `m(m-1)/2` imaginary
//!   symmetric `i (E_kl + E_lk)` (pairs `k < l` in lexicographic order);
//! * **general**: the free block of a complex matrix packed as
//!   `(re, im)` pairs, row-major.
//!
//! `m` counts the free modes. Frozen modes keep `U_ij = U_ji = delta_ij`.
//! The exponential is evaluated through the eigendecomposition of the
//! Hermitian matrix `-iH`, which also gives the exact derivative of the
//! exponential map (Daleckii–Krein divided differences).

use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permanent::CMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Unitary,
    General,
}

impl std::str::FromStr for Chart {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unitary" => Ok(Chart::Unitary),
            "general" => Ok(Chart::General),
            _ => Err(Error::Config(format!("unknown chart '{s}' (expected unitary|general)"))),
        }
    }
}

impl std::fmt::Display for Chart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Chart::Unitary => "unitary",
            Chart::General => "general",
        })
    }
}

/// A single coordinate direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Generator {
    Diag(usize),
    Antisym(usize, usize),
    Sym(usize, usize),
    Re(usize, usize),
    Im(usize, usize),
}

fn layout(chart: Chart, free: &[usize]) -> Vec<Generator> {
    let m = free.len();
    let mut g = Vec::new();
    match chart {
        Chart::Unitary => {
            g.extend(free.iter().map(|&k| Generator::Diag(k)));
            for a in 0..m {
                for b in a + 1..m {
                    g.push(Generator::Antisym(free[a], free[b]));
                }
            }
            for a in 0..m {
                for b in a + 1..m {
                    g.push(Generator::Sym(free[a], free[b]));
                }
            }
        }
        Chart::General => {
            for &i in free {
                for &j in free {
                    g.push(Generator::Re(i, j));
                    g.push(Generator::Im(i, j));
                }
            }
        }
    }
    g
}

/// Point in one of the charts, with the set of frozen (0-based) modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub coords: Vec<f64>,
    pub chart: Chart,
    pub dim_modes: usize,
    pub frozen: BTreeSet<usize>,
}

impl ParamVector {
    pub fn zeros(chart: Chart, dim_modes: usize, frozen: &BTreeSet<usize>) -> Self {
        let n = coord_count(chart, dim_modes, frozen);
        ParamVector {
            coords: vec![0.0; n],
            chart,
            dim_modes,
            frozen: frozen.clone(),
        }
    }

    pub fn free_modes(&self) -> Vec<usize> {
        free_modes(self.dim_modes, &self.frozen)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn with_coords(&self, coords: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len(), self.coords.len());
        ParamVector {
            coords,
            chart: self.chart,
            dim_modes: self.dim_modes,
            frozen: self.frozen.clone(),
        }
    }

    fn generators(&self) -> Vec<Generator> {
        layout(self.chart, &self.free_modes())
    }

    fn check(&self) -> Result<()> {
        if let Some(&m) = self.frozen.iter().next_back() {
            if m >= self.dim_modes {
                return Err(Error::Config(format!("frozen mode {} out of range for {} modes", m + 1, self.dim_modes)));
            }
        }
        let want = coord_count(self.chart, self.dim_modes, &self.frozen);
        if self.coords.len() != want {
            return Err(Error::Dimension(format!(
                "{} chart with {} free modes needs {want} coordinates, got {}",
                self.chart,
                self.dim_modes - self.frozen.len(),
                self.coords.len()
            )));
        }
        Ok(())
    }
}

fn free_modes(n: usize, frozen: &BTreeSet<usize>) -> Vec<usize> {
    (0..n).filter(|i| !frozen.contains(i)).collect()
}

/// Number of real coordinates: `m^2` (unitary) or `2 m^2` (general).
pub fn coord_count(chart: Chart, dim_modes: usize, frozen: &BTreeSet<usize>) -> usize {
    let m = dim_modes - frozen.iter().filter(|&&i| i < dim_modes).count();
    match chart {
        Chart::Unitary => m * m,
        Chart::General => 2 * m * m,
    }
}

/// N x N matrix tagged with the chart it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Interferometer {
    pub matrix: CMatrix,
    pub chart: Chart,
}

impl Interferometer {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(&self.matrix)
    }
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// A chart point evaluated to a matrix, keeping what the chain rule needs.
#[derive(Clone, Debug)]
pub struct ChartPoint {
    pub matrix: CMatrix,
    generators: Vec<Generator>,
    spectral: Option<(CMatrix, DVector<f64>)>,
}

impl ChartPoint {
    pub fn new(x: &ParamVector) -> Result<Self> {
        x.check()?;
        let generators = x.generators();
        let n = x.dim_modes;
        match x.chart {
            Chart::General => {
                let mut w = CMatrix::identity(n, n);
                for (g, pair) in generators.chunks(2).zip(x.coords.chunks(2)) {
                    if let Generator::Re(i, j) = g[0] {
                        w[(i, j)] = Complex64::new(pair[0], pair[1]);
                    }
                }
                Ok(ChartPoint {
                    matrix: w,
                    generators,
                    spectral: None,
                })
            }
            Chart::Unitary => {
                // K = -iH is Hermitian.
                let mut k = CMatrix::zeros(n, n);
                for (g, &c) in generators.iter().zip(&x.coords) {
                    match *g {
                        Generator::Diag(i) => k[(i, i)] += Complex64::new(c, 0.0),
                        Generator::Antisym(i, j) => {
                            k[(i, j)] += Complex64::new(0.0, -c);
                            k[(j, i)] += Complex64::new(0.0, c);
                        }
                        Generator::Sym(i, j) => {
                            k[(i, j)] += Complex64::new(c, 0.0);
                            k[(j, i)] += Complex64::new(c, 0.0);
                        }
                        _ => unreachable!(),
                    }
                }
                let eig = SymmetricEigen::new(k);
                let v = eig.eigenvectors;
                let lambda = eig.eigenvalues;
                let phases = CMatrix::from_diagonal(&lambda.map(|l| Complex64::from_polar(1.0, l)));
                let mut u = &v * phases * v.adjoint();
                for i in x.frozen.iter().copied() {
                    for j in 0..n {
                        u[(i, j)] = Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0);
                        u[(j, i)] = Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0);
                    }
                }
                Ok(ChartPoint {
                    matrix: u,
                    generators,
                    spectral: Some((v, lambda)),
                })
            }
        }
    }

    /// Convert `Gamma` (with `df = Re tr(Gamma^dag dU)`) into the gradient
    /// with respect to the chart coordinates.
    pub fn pull_back(&self, gamma: &CMatrix) -> Vec<f64> {
        let z = match &self.spectral {
            None => gamma.clone(),
            Some((v, lambda)) => {
                let n = lambda.len();
                let inner = v.adjoint() * gamma * v;
                let mut h = CMatrix::zeros(n, n);
                for a in 0..n {
                    for b in 0..n {
                        h[(a, b)] = divided_difference(lambda[a], lambda[b]).conj() * inner[(a, b)];
                    }
                }
                v * h * v.adjoint()
            }
        };
        self.generators
            .iter()
            .map(|g| match *g {
                Generator::Diag(i) => z[(i, i)].im,
                Generator::Antisym(i, j) => z[(i, j)].re - z[(j, i)].re,
                Generator::Sym(i, j) => z[(i, j)].im + z[(j, i)].im,
                Generator::Re(i, j) => z[(i, j)].re,
                Generator::Im(i, j) => z[(i, j)].im,
            })
            .collect()
    }
}

/// `(e^{ia} - e^{ib}) / (i(a - b))`, continuous at `a = b`.
fn divided_difference(a: f64, b: f64) -> Complex64 {
    let half = 0.5 * (a - b);
    let sinc = if half.abs() < 1e-8 {
        1.0 - half * half / 6.0
    } else {
        half.sin() / half
    };
    Complex64::from_polar(sinc, 0.5 * (a + b))
}

pub fn to_matrix(x: &ParamVector) -> Result<Interferometer> {
    Ok(Interferometer {
        matrix: ChartPoint::new(x)?.matrix,
        chart: x.chart,
    })
}

/// Random starting point, deterministic in `seed`.
///
/// Unitary chart: coordinates uniform in `[-pi, pi]`. General chart: free
/// entries with real and imaginary parts uniform in `[-1, 1]`, then the free
/// block is rescaled so the largest singular value is 1.
pub fn random_start(chart: Chart, dim_modes: usize, frozen: &BTreeSet<usize>, seed: u64) -> ParamVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_start_with(chart, dim_modes, frozen, &mut rng)
}

pub fn random_start_with<R: Rng>(chart: Chart, dim_modes: usize, frozen: &BTreeSet<usize>, rng: &mut R) -> ParamVector {
    let mut x = ParamVector::zeros(chart, dim_modes, frozen);
    match chart {
        Chart::Unitary => {
            x.coords.iter_mut().for_each(|c| *c = rng.gen_range(-PI..=PI));
        }
        Chart::General => {
            x.coords.iter_mut().for_each(|c| *c = rng.gen_range(-1.0..=1.0));
            let m = dim_modes - frozen.len();
            if m > 0 {
                let block = CMatrix::from_fn(m, m, |r, c| {
                    let k = 2 * (r * m + c);
                    Complex64::new(x.coords[k], x.coords[k + 1])
                });
                let s = spectral_norm(&block);
                if s > 0.0 {
                    x.coords.iter_mut().for_each(|c| *c /= s);
                }
            }
        }
    }
    x
}

/// Freeze additional modes, dropping every coordinate that touches them.
pub fn apply_mask(x: &ParamVector, frozen_modes: &BTreeSet<usize>) -> Result<ParamVector> {
    if let Some(&m) = frozen_modes.iter().next_back() {
        if m >= x.dim_modes {
            return Err(Error::Config(format!("frozen mode {} out of range for {} modes", m + 1, x.dim_modes)));
        }
    }
    let old = x.generators();
    let frozen: BTreeSet<usize> = x.frozen.union(frozen_modes).copied().collect();
    let new = layout(x.chart, &free_modes(x.dim_modes, &frozen));
    let coords = new
        .iter()
        .map(|g| {
            let k = old.iter().position(|o| o == g).expect("new generators are a subset");
            x.coords[k]
        })
        .collect();
    Ok(ParamVector {
        coords,
        chart: x.chart,
        dim_modes: x.dim_modes,
        frozen,
    })
}

/// Parse 1-based mode indices ("2,4,6") into a 0-based set.
pub fn parse_mask(list: &str) -> Result<BTreeSet<usize>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k - 1),
            _ => Err(Error::Config(format!("bad mode index '{s}' in mask (1-based integers expected)"))),
        })
        .collect()
}
