//! The decomposition on the control qubit singled out by a CNOT, and the
//! trivial one forced by a SWAP.
//!
//! `cargo run --example preferred_decomposition`

use pps_core::algebra::DEFAULT_SEED;
use pps_core::circuit::{causal_influence, preferred_decomposition};
use pps_core::matrix::gates::{cnot, swap};
use pps_core::Tol;

fn main() -> pps_core::Result<()> {
    let tol = Tol::default();
    let split = (2, 2, 2, 2);
    for (name, u) in [("CNOT", cnot()), ("SWAP", swap())] {
        let d = preferred_decomposition(&u, split, tol, DEFAULT_SEED)?;
        println!("{name}: A influences D: {}", causal_influence(&u, split, tol)?);
        for p in &d.projectors {
            let rows: Vec<String> = p
                .mat()
                .to_rows()
                .iter()
                .map(|r| r.iter().map(|z| format!("{:+.3}", z.re)).collect::<Vec<_>>().join(" "))
                .collect();
            println!("  rank {}: [{}]", p.rank(), rows.join("; "));
        }
    }
    Ok(())
}
