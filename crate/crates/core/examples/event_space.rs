//! Atoms and events of a commuting generator family. The closure of the
//! generators under complements and products coincides with the set of
//! subset sums of nonzero atoms.
//!
//! `cargo run --example event_space`

use pps_core::boolean::{generate_closure, same_matrix_set, scenario_atoms, trace_assignment};
use pps_core::builtin::build_chain_free;
use pps_core::{Mat, Projector, Tol};

fn main() -> pps_core::Result<()> {
    let tol = Tol::default();
    let s = build_chain_free();
    let atoms = scenario_atoms(&s, tol)?;
    println!("{} generators, {} atoms:", atoms.generator_count(), atoms.len());
    for a in atoms.nonzero() {
        println!("  {}  rank {}", atoms.label(a.signs), a.proj.rank());
    }
    for z in atoms.zero_signs() {
        println!("  {}  zero", atoms.label(*z));
    }

    let events = atoms.event_space();
    println!("\nevent space: {} events", events.len());
    for e in &events {
        let labels: Vec<String> = atoms.signs_of(e.key).into_iter().map(|x| atoms.label(x)).collect();
        println!("  {{{}}}  f = {:.3}", labels.join(","), trace_assignment(&s, &e.proj, tol)?);
    }

    let closure: Vec<Mat> = generate_closure(&s.generator_projectors(), 1 << 10, tol)?
        .into_iter()
        .map(Projector::into_mat)
        .collect();
    let event_mats: Vec<Mat> = events.into_iter().map(|e| e.proj.into_mat()).collect();
    println!("closure has {} members; equals event space: {}", closure.len(), same_matrix_set(&closure, &event_mats, 1e-9));
    Ok(())
}
