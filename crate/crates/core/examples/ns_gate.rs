//! Nonlinear sign gate on one mode with one ancilla photon and one vacuum
//! mode. The optimum success rate is 1/4.
//!
//! ```text
//! cargo run --release --example ns_gate -- [restarts]
//! ```

use loqc_opt::gates::make_ns;
use loqc_opt::optimize::{sweep, OptimizeConfig};
use loqc_opt::param::Chart;
use loqc_opt::transfer::ModeConfig;

fn main() -> loqc_opt::Result<()> {
    let restarts = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let cfg = ModeConfig::with_single_photon_ancillas(1, 1, 1)?;
    let oc = OptimizeConfig::new(make_ns(), cfg, Chart::Unitary).with_restarts(restarts).with_seed(7);
    let sw = sweep(&oc)?;
    println!("{} of {} restarts reached F = 1", sw.on_manifold_count(), restarts);
    for p in sw.plateaus.iter().rev() {
        println!("  S = {:.7}  x{}", p.success, p.count);
    }
    let best = sw.best().expect("no perfect-fidelity run");
    println!("best S = {:.7}, F = {:.12}", best.success, best.fidelity);
    println!("U =\n{:.4}", best.final_u);
    Ok(())
}
