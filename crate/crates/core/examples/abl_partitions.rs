//! ABL probabilities for a degenerate observable given by an arbitrary
//! orthogonal partition; the outcomes always sum to one.
//!
//! `cargo run --example abl_partitions`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pps_core::random;
use pps_core::scenario::abl_probability;
use pps_core::Tol;

fn main() -> pps_core::Result<()> {
    let tol = Tol::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = random::scenario(&mut rng, 6, 1);
    let partition = random::partition(&mut rng, 6, 3);

    let mut total = 0.0;
    for (k, cell) in partition.iter().enumerate() {
        let r = abl_probability(&s, &partition, k, tol)?;
        println!(
            "cell {k} (rank {}): {:.6} = {:.6} / {:.6}",
            cell.rank(),
            r.probability,
            r.numerator,
            r.denominator
        );
        total += r.probability;
    }
    println!("sum = {total:.15}");
    Ok(())
}
