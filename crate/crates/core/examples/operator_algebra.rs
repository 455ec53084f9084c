//! Generated algebra, commutant, bicommutant and center for a block
//! diagonal generator set.
//!
//! `cargo run --example operator_algebra`

use pps_core::algebra::{center, commutant, commutant_dim, generate_algebra, minimal_projectors, seed_from_env};
use pps_core::matrix::gates::{pauli_x, pauli_z};
use pps_core::matrix::kron;
use pps_core::{Mat, Tol};

fn main() -> pps_core::Result<()> {
    let tol = Tol::default();
    // M_2 ⊗ I_2 on a 4-dimensional space
    let gens = vec![kron(&pauli_x(), &Mat::identity(2)), kron(&pauli_z(), &Mat::identity(2))];
    let alg = generate_algebra(&gens, tol)?;
    let comm = commutant(&gens, tol)?;
    let bicomm = commutant_dim(4, comm.basis(), tol)?;
    println!("dim A = {}, dim A' = {}, dim A'' = {}", alg.space.len(), comm.len(), bicomm.len());
    println!("A'' = A: {}", bicomm.same_span(&alg.space, 1e-8));

    // a commutative example: diag(1,1,0,0) and diag(1,0,1,0)
    let diag = |v: [f64; 4]| Mat::from_real(&[&[v[0], 0., 0., 0.], &[0., v[1], 0., 0.], &[0., 0., v[2], 0.], &[0., 0., 0., v[3]]]);
    let comm_alg = generate_algebra(&[diag([1., 1., 0., 0.]), diag([1., 0., 1., 0.])], tol)?;
    let z = center(&comm_alg, tol)?;
    println!("\ncommutative algebra: dim {}, center dim {}", comm_alg.space.len(), z.len());
    for p in minimal_projectors(&z, tol, seed_from_env())? {
        let d: Vec<String> = (0..4).map(|i| format!("{:.3}", p.mat()[(i, i)].re)).collect();
        println!("  minimal projector diag [{}]", d.join(", "));
    }
    Ok(())
}
