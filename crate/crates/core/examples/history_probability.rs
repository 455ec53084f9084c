//! History values of a decorated random circuit. Individual values may be
//! complex, but they always sum to one.
//!
//! `cargo run --example history_probability`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pps_core::circuit::{history_from_lifted, lift_decoration};
use pps_core::random;
use pps_core::{Cplx, Tol};

fn main() -> pps_core::Result<()> {
    let tol = Tol::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (circuit, bubble, decoration) = random::decorated_circuit(&mut rng, 3, 2);
    let lifted = lift_decoration(&circuit, &bubble, &decoration)?;
    let mut total = Cplx::new(0.0, 0.0);
    for sel in decoration.selections() {
        let h = history_from_lifted(&lifted, &sel, circuit.dim(), tol)?;
        println!("{sel:?}  {:+.5}{:+.5}i{}", h.value.re, h.value.im, if h.complex { "  complex" } else { "" });
        total += h.value;
    }
    println!("sum = {:.12}{:+.1e}i", total.re, total.im);
    Ok(())
}
