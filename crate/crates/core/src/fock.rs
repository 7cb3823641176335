//! Fock-space bookkeeping: occupation-number states, enumerated bases and
//! the dual-rail qubit encoding.
//!
//! Bases are ordered lexicographically *descending* by occupation vector, so
//! for two photons in four modes the first state is `(2,0,0,0)` and the last
//! is `(0,0,0,2)`. Dual-rail qubits put logical `0` in the first mode of
//! their pair: `0 -> (1,0)`, `1 -> (0,1)`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Photon counts per optical mode.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FockState(Vec<u8>);

impl FockState {
    pub fn new(occupations: Vec<u8>) -> Self {
        FockState(occupations)
    }

    pub fn vacuum(modes: usize) -> Self {
        FockState(vec![0; modes])
    }

    pub fn occupations(&self) -> &[u8] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn photons(&self) -> usize {
        self.0.iter().map(|&n| n as usize).sum()
    }

    /// Concatenate occupation vectors (mode order preserved).
    pub fn concat(&self, other: &FockState) -> FockState {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        FockState(v)
    }

    /// Product of occupation factorials, the bosonic normalisation weight.
    pub fn factorial_weight(&self) -> f64 {
        self.0
            .iter()
            .map(|&n| (1..=n as u64).product::<u64>() as f64)
            .product()
    }
}

impl From<Vec<u8>> for FockState {
    fn from(v: Vec<u8>) -> Self {
        FockState(v)
    }
}

impl From<&[u8]> for FockState {
    fn from(v: &[u8]) -> Self {
        FockState(v.to_vec())
    }
}

impl fmt::Debug for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

/// Ordered list of distinct Fock states with a reverse index.
#[derive(Clone, Debug)]
pub struct FockBasis {
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

impl FockBasis {
    /// Build a basis from an explicit list. Returns `None` on duplicates.
    pub fn from_states(states: Vec<FockState>) -> Option<Self> {
        let mut index = HashMap::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return None;
            }
        }
        Some(FockBasis { states, index })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn state_at(&self, i: usize) -> &FockState {
        &self.states[i]
    }

    pub fn index_of(&self, s: &FockState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn contains(&self, s: &FockState) -> bool {
        self.index.contains_key(s)
    }

    pub fn iter(&self) -> impl Iterator<Item = &FockState> {
        self.states.iter()
    }
}

/// All occupation vectors of `photons` photons over `modes` modes, in
/// descending lexicographic order.
pub fn enumerate_fock(photons: usize, modes: usize) -> FockBasis {
    assert!(modes >= 1, "a Fock basis needs at least one mode");
    let mut out = Vec::new();
    let mut cur = vec![0u8; modes];
    fill(&mut cur, 0, photons, &mut out);
    FockBasis::from_states(out).expect("enumeration never repeats a state")
}

fn fill(cur: &mut [u8], pos: usize, left: usize, out: &mut Vec<FockState>) {
    if pos + 1 == cur.len() {
        cur[pos] = left as u8;
        out.push(FockState(cur.to_vec()));
        return;
    }
    for n in (0..=left).rev() {
        cur[pos] = n as u8;
        fill(cur, pos + 1, left - n, out);
    }
    cur[pos] = 0;
}

/// Binomial coefficient C(photons + modes - 1, photons).
pub fn fock_dimension(photons: usize, modes: usize) -> usize {
    let n = photons + modes - 1;
    let k = photons.min(modes - 1);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Dual-rail encoding of a logical bitstring: bit 0 ↦ (1,0), bit 1 ↦ (0,1).
pub fn dual_rail_encode(bits: &[u8]) -> FockState {
    let mut occ = Vec::with_capacity(2 * bits.len());
    for &b in bits {
        assert!(b <= 1, "qubit values must be 0 or 1");
        if b == 0 {
            occ.extend_from_slice(&[1, 0]);
        } else {
            occ.extend_from_slice(&[0, 1]);
        }
    }
    FockState(occ)
}

/// Decode a dual-rail state back to its bitstring, if it is one.
pub fn dual_rail_decode(state: &FockState) -> Option<Vec<u8>> {
    if !state.modes().is_multiple_of(2) {
        return None;
    }
    state
        .occupations()
        .chunks(2)
        .map(|pair| match pair {
            [1, 0] => Some(0),
            [0, 1] => Some(1),
            _ => None,
        })
        .collect()
}

/// The `2^num_qubits` dual-rail states in binary counting order, first qubit
/// most significant.
pub fn computational_basis(num_qubits: usize) -> Vec<FockState> {
    assert!(num_qubits >= 1);
    (0..1usize << num_qubits)
        .map(|k| {
            let bits: Vec<u8> = (0..num_qubits)
                .map(|q| ((k >> (num_qubits - 1 - q)) & 1) as u8)
                .collect();
            dual_rail_encode(&bits)
        })
        .collect()
}
