//! Permanents, Fock bases and post-selected transfer matrices.
//!
//! ```text
//! cargo run --release --example permanent_amplitudes
//! ```

use loqc_opt::fock::{fock_dimension, FockState};
use loqc_opt::permanent::{permanent, permanent_bruteforce, CMatrix};
use loqc_opt::transfer::{full_omega, transfer_matrix, ModeConfig};
use num_complex::Complex64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn main() -> loqc_opt::Result<()> {
    let a = CMatrix::from_fn(4, 4, |i, j| Complex64::new((i + 1) as f64, j as f64 - 1.5));
    println!("per(A) Ryser       = {:.6}", permanent(&a)?);
    println!("per(A) brute force = {:.6}", permanent_bruteforce(&a)?);

    // Hong-Ou-Mandel: |1,1> through a 50:50 beam splitter never exits as |1,1>.
    let r = 0.5f64.sqrt();
    let bs = CMatrix::from_row_slice(2, 2, &[c(r), c(r), c(r), c(-r)]);
    let (two, omega) = full_omega(&bs, 2)?;
    let col = two.index_of(&FockState::new(vec![1, 1])).unwrap();
    println!("\n2 photons in 2 modes ({} states)", fock_dimension(2, 2));
    for (i, s) in two.iter().enumerate() {
        println!("  |1,1> -> {s}: {:+.4}", omega[(i, col)]);
    }

    // One dual-rail qubit next to a heralding mode: the identity passes every
    // computational state with amplitude 1.
    let cfg = ModeConfig::with_single_photon_ancillas(2, 1, 0)?;
    let basis = [FockState::new(vec![1, 0]), FockState::new(vec![0, 1])];
    let t = transfer_matrix(&CMatrix::identity(3, 3), &cfg, &basis)?;
    println!("\nidentity transfer matrix ({} outputs x {} inputs)", t.out_basis.len(), t.in_basis.len());
    for (i, s) in t.out_basis.iter().enumerate() {
        let row: Vec<String> = (0..t.in_basis.len()).map(|j| format!("{:+.3}", t.entries[(i, j)].re)).collect();
        println!("  {:>8}  {}", s.to_string(), row.join(" "));
    }
    Ok(())
}
