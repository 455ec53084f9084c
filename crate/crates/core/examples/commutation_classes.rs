//! A projector commutes with |s⟩⟨s| exactly when it fixes or annihilates
//! |s⟩, and P fixes |s⟩ exactly when I − P annihilates it.
//!
//! `cargo run --example commutation_classes`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pps_core::matrix::{commutator_norm, projector_from_state};
use pps_core::random;
use pps_core::scenario::{classify_commutation, complement_duality};
use pps_core::Tol;

fn main() -> pps_core::Result<()> {
    let tol = Tol::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..8 {
        let (p, s) = random::commutation_pair(&mut rng, 4);
        let norm = commutator_norm(p.mat(), projector_from_state(&s)?.mat())?;
        let class = classify_commutation(&p, &s, tol)?;
        println!(
            "rank {}  ‖[P, Ps]‖ = {:9.2e}  {:<18} duality holds: {}",
            p.rank(),
            norm,
            format!("{class:?}"),
            complement_duality(&p, &s, tol)?
        );
    }
    Ok(())
}
