//! Controlled-sign with two and three single-photon ancillas. The extra
//! ancilla does not raise the best success rate.
//!
//! ```text
//! cargo run --release --example ancilla_saturation -- [restarts]
//! ```

use loqc_opt::gates::make_cs;
use loqc_opt::optimize::{sweep, OptimizeConfig};
use loqc_opt::param::Chart;
use loqc_opt::transfer::ModeConfig;

fn main() -> loqc_opt::Result<()> {
    let restarts = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    for na in [2, 3] {
        let cfg = ModeConfig::with_single_photon_ancillas(4, na, 0)?;
        let oc = OptimizeConfig::new(make_cs(), cfg, Chart::Unitary).with_restarts(restarts).with_seed(1);
        let t = std::time::Instant::now();
        let sw = sweep(&oc)?;
        let best = sw.best().map_or(f64::NAN, |r| r.success);
        println!(
            "{na} ancillas ({0}x{0}): best S = {best:.7}, {1} on manifold, {2:.1} s",
            4 + na,
            sw.on_manifold_count(),
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
