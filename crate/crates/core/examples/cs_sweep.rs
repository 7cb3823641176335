//! Controlled-sign gate with two single-photon ancillas in the 6x6 unitary
//! chart. Prints the sorted success rates of the perfect-fidelity runs and
//! the plateau summary; the best design reaches S = 2/27.
//!
//! ```text
//! cargo run --release --example cs_sweep -- [restarts] [seed]
//! ```

use loqc_opt::cli::results_csv;
use loqc_opt::gates::make_cs;
use loqc_opt::optimize::{sweep, OptimizeConfig};
use loqc_opt::param::Chart;
use loqc_opt::transfer::ModeConfig;

fn main() -> loqc_opt::Result<()> {
    let mut args = std::env::args().skip(1);
    let restarts = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let cfg = ModeConfig::with_single_photon_ancillas(4, 2, 0)?;
    let oc = OptimizeConfig::new(make_cs(), cfg, Chart::Unitary).with_restarts(restarts).with_seed(seed);
    let t = std::time::Instant::now();
    let sw = sweep(&oc)?;
    println!("{} of {} restarts reached F = 1 ({:.1} s)", sw.on_manifold_count(), restarts, t.elapsed().as_secs_f64());
    for p in &sw.plateaus {
        println!("  plateau S = {:.7} [{:.7}, {:.7}] x{}", p.success, p.min, p.max, p.count);
    }
    if let Some(b) = sw.best() {
        println!("best S = {:.9} (2/27 = {:.9})", b.success, 2.0 / 27.0);
    }
    if std::env::var_os("CS_SWEEP_CSV").is_some() {
        print!("{}", results_csv(&sw));
    }
    Ok(())
}
