//! Three particles, two boxes: every pair is found in different boxes, yet
//! no consistent probability assignment exists.
//!
//! `cargo run --example pigeonhole`

use pps_core::boolean::{certify_paradox, chain_generators, ParadoxVerdict};
use pps_core::builtin::{build_pigeonhole, pair_projectors};
use pps_core::scenario::abl_binary;
use pps_core::Tol;

fn main() -> pps_core::Result<()> {
    let tol = Tol::default();
    let s = build_pigeonhole();

    println!("pair   ABL(same)  ABL(diff)");
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let (same, diff) = pair_projectors(i, j);
        println!(
            "({},{})  {:.6}   {:.6}",
            i + 1,
            j + 1,
            abl_binary(&s, &same, tol)?.probability,
            abl_binary(&s, &diff, tol)?.probability
        );
    }

    match certify_paradox(&s, tol)? {
        ParadoxVerdict::Paradox { witness, .. } => {
            println!("\nParadox. Forced literals:");
            for l in &witness.literals {
                println!("  {} = {}", l.generator, u8::from(l.value));
            }
            println!("their product has norm {:.1e}: {}", witness.product_norm, witness.violated);
        }
        ParadoxVerdict::Consistent { .. } => println!("unexpectedly consistent"),
    }
    println!("generators in a non-commutation chain: {:?}", chain_generators(&s, tol)?);
    Ok(())
}
