//! Any gate given as a document: here CNOT written out by hand, run through
//! the same sweep as the built-ins.
//!
//! ```text
//! cargo run --release --example custom_gate -- [restarts]
//! ```

use loqc_opt::cli::{cmd_optimize, format_optimize, GateSpec, RunDocument};
use loqc_opt::gates::GateDocument;

fn main() -> loqc_opt::Result<()> {
    let restarts = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(60);
    let one = [1.0, 0.0];
    let zero = [0.0, 0.0];
    let gate = GateDocument {
        name: "my-cnot".into(),
        comp_basis: vec![vec![1, 0, 1, 0], vec![1, 0, 0, 1], vec![0, 1, 1, 0], vec![0, 1, 0, 1]],
        matrix: vec![
            vec![one, zero, zero, zero],
            vec![zero, one, zero, zero],
            vec![zero, zero, zero, one],
            vec![zero, zero, one, zero],
        ],
        per_sector: false,
    };
    let mut doc = RunDocument::for_gate("cnot");
    doc.gate = GateSpec::Inline(gate);
    doc.ancillas = Some(2);
    doc.restarts = restarts;
    doc.seed = 3;
    doc.out_dir = Some(std::env::temp_dir().join("loqc-opt-cnot"));
    println!("{}", serde_json::to_string(&doc)?);
    let out = cmd_optimize(&doc)?;
    print!("{}", format_optimize(&out));
    Ok(())
}
