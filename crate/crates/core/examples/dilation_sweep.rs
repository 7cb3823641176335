//! Controlled-sign gate over arbitrary 6x6 complex matrices rescaled to unit
//! spectral norm, which admits any number of vacuum modes. Fidelity is taken
//! on W / |W| and success is the scaled success.
//!
//! A second optional argument replaces the penalty schedule of the success
//! stage, e.g. `1e4,1e6`; the default schedule starts soft and tends to
//! carry runs past the local maxima.
//!
//! ```text
//! cargo run --release --example dilation_sweep -- [restarts] [schedule]
//! ```

use loqc_opt::gates::make_cs;
use loqc_opt::optimize::{sweep, OptimizeConfig};
use loqc_opt::param::{spectral_norm, Chart};
use loqc_opt::transfer::ModeConfig;

fn main() -> loqc_opt::Result<()> {
    let mut args = std::env::args().skip(1);
    let restarts = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let cfg = ModeConfig::with_single_photon_ancillas(4, 2, 0)?;
    let mut oc = OptimizeConfig::new(make_cs(), cfg, Chart::General).with_restarts(restarts).with_seed(1);
    if let Some(s) = args.next() {
        oc.penalty_weights = s.split(',').map(|v| v.parse().expect("penalty weight")).collect();
    }
    println!("penalty schedule {:?}", oc.penalty_weights);
    let sw = sweep(&oc)?;
    println!("{} of {} restarts reached F = 1", sw.on_manifold_count(), restarts);
    for p in sw.plateaus.iter().rev() {
        println!("  plateau S = {:.7}  x{}", p.success, p.count);
    }
    if let Some(b) = sw.best() {
        let sv = b.final_u.clone().singular_values();
        println!("best S = {:.7}, |W| = {:.6}", b.success, spectral_norm(&b.final_u));
        println!("singular values {:.4}", sv.transpose());
    }
    Ok(())
}
