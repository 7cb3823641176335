//! Toffoli in sign form with three ancilla photons. The interferometer acts
//! only on modes 1, 3, 5 and the ancillas (modes 2, 4, 6 are frozen) and is
//! searched over general 9x9 matrices scaled to unit spectral norm.
//!
//! Without arguments, reruns the recorded best restarts of the 500-restart
//! sweep with seed 1. `-- 500` runs the whole sweep, printing progress in
//! chunks.
//!
//! ```text
//! cargo run --release --example toffoli -- [restarts]
//! ```

use loqc_opt::cli::{baseline_ratio, TOFFOLI_BASELINE};
use loqc_opt::gates::make_toffoli_sign;
use loqc_opt::optimize::{plateaus, sweep_restarts, OptimizeConfig, RunResult, PLATEAU_WIDTH};
use loqc_opt::param::Chart;
use loqc_opt::transfer::ModeConfig;

const KNOWN_GOOD: &[usize] = &[363, 418];

fn main() -> loqc_opt::Result<()> {
    let restarts: Option<usize> = std::env::args().nth(1).and_then(|s| s.parse().ok());
    let cfg = ModeConfig::with_single_photon_ancillas(6, 3, 0)?;
    let oc = OptimizeConfig::new(make_toffoli_sign(), cfg, Chart::General)
        .with_mask([1, 3, 5].into_iter().collect())
        .with_restarts(restarts.unwrap_or(500))
        .with_seed(1);

    let ids: Vec<usize> = match restarts {
        Some(n) => (0..n).collect(),
        None => KNOWN_GOOD.to_vec(),
    };
    let t = std::time::Instant::now();
    let mut runs: Vec<RunResult> = Vec::new();
    for chunk in ids.chunks(25) {
        let sw = sweep_restarts(&oc, chunk.iter().copied())?;
        for r in sw.runs.iter().filter(|r| r.on_manifold && r.success > 2e-3) {
            println!("  restart {:3}  S = {:.6}", r.restart_id, r.success);
        }
        runs.extend(sw.runs);
        let best = runs.iter().filter(|r| r.on_manifold).map(|r| r.success).fold(0.0, f64::max);
        println!("{} restarts, best S = {best:.6}, {:.0} s", runs.len(), t.elapsed().as_secs_f64());
    }

    let good: Vec<f64> = runs.iter().filter(|r| r.on_manifold).map(|r| r.success).collect();
    for p in plateaus(&good, PLATEAU_WIDTH).iter().rev().take(6) {
        println!("plateau S = {:.6} x{}", p.success, p.count);
    }
    if let Some(b) = runs.iter().filter(|r| r.on_manifold).max_by(|a, b| a.success.total_cmp(&b.success)) {
        println!(
            "best: restart {} S = {:.6}, F = {:.12}, {:.3} x baseline {TOFFOLI_BASELINE:.6}",
            b.restart_id,
            b.success,
            b.fidelity,
            baseline_ratio(b.success)
        );
    }
    Ok(())
}
