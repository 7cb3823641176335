//! Local dimension of the perfect-fidelity set at the best controlled-sign
//! design, from the null space of the fidelity Hessian.
//!
//! ```text
//! cargo run --release --example manifold_dimension
//! ```

use loqc_opt::gates::make_cs;
use loqc_opt::optimize::{manifold_dimension, sweep, OptimizeConfig};
use loqc_opt::param::Chart;
use loqc_opt::transfer::ModeConfig;

fn main() -> loqc_opt::Result<()> {
    let cfg = ModeConfig::with_single_photon_ancillas(4, 2, 0)?;
    let oc = OptimizeConfig::new(make_cs(), cfg, Chart::Unitary).with_restarts(40).with_seed(1);
    let sw = sweep(&oc)?;
    let best = sw.best().expect("no perfect-fidelity run");
    let p = manifold_dimension(best, &oc)?;
    println!("S = {:.7}, {} coordinates", best.success, best.final_x.len());
    println!("dimension {} (cutoff {:.2e}, positive eigenvalues {})", p.dimension, p.cutoff, p.positive);
    let mut mags: Vec<f64> = p.eigenvalues.iter().map(|v| v.abs()).collect();
    mags.sort_by(f64::total_cmp);
    for (i, m) in mags.iter().take(p.dimension + 4).enumerate() {
        println!("  |lambda_{i}| = {m:.3e}");
    }
    println!("|U| =\n{:.4}", best.final_u.map(|z| z.norm()));
    Ok(())
}
