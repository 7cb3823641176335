//! Write a design to disk, read it back and check it offline, the same path
//! the `optimize` and `verify` verbs take.
//!
//! ```text
//! cargo run --release --example verify_matrix
//! ```

use loqc_opt::cli::{cmd_verify, format_verify, MatrixDocument};
use loqc_opt::gates::make_cs;
use loqc_opt::optimize::{sweep, OptimizeConfig};
use loqc_opt::param::Chart;
use loqc_opt::permanent::CMatrix;
use loqc_opt::transfer::ModeConfig;

fn main() -> loqc_opt::Result<()> {
    let cfg = ModeConfig::with_single_photon_ancillas(4, 2, 0)?;
    let oc = OptimizeConfig::new(make_cs(), cfg, Chart::Unitary).with_restarts(30).with_seed(1);
    let sw = sweep(&oc)?;
    let best = sw.best().expect("no perfect-fidelity run");

    let path = std::env::temp_dir().join("loqc-opt-cs.json");
    let doc = MatrixDocument::new(&oc, &best.final_u, best.restart_id, best.fidelity, best.success);
    std::fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
    println!("wrote {}", path.display());

    let back = MatrixDocument::load(&path)?;
    print!("{}", format_verify(&cmd_verify(&back, None, 1e-9, true)?));

    println!("\nidentity instead:");
    let mut id = back.clone();
    id.matrix = MatrixDocument::new(&oc, &CMatrix::identity(6, 6), 0, 0.0, 0.0).matrix;
    print!("{}", format_verify(&cmd_verify(&id, None, 1e-9, false)?));
    Ok(())
}
