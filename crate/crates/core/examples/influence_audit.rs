//! The pigeonhole scenario as a one-wire circuit: the audit reports which
//! decorated decompositions interfere where the allowed pattern forbids it.
//!
//! `cargo run --example influence_audit`

use pps_core::builtin::pigeonhole_circuit;
use pps_core::circuit::audit_influences;
use pps_core::Tol;

fn main() -> pps_core::Result<()> {
    let (circuit, bubble, decoration) = pigeonhole_circuit();
    let violations = audit_influences(&circuit, &bubble, &decoration, Tol::default())?;
    println!("{} disallowed influence(s)", violations.len());
    for v in &violations {
        println!("  {:?}: {} <-> {}  (commutator {:.3})", v.kind, v.first, v.second, v.commutator_norm);
    }
    Ok(())
}
