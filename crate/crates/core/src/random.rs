//! Random instances for property checks: unitaries, states, projectors,
//! scenarios, partitions, generator sets and decorated circuits.
//!
//! Every sampler takes its RNG explicitly; seed a `ChaCha8Rng` for
//! reproducible streams.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::circuit::{Bubble, Circuit, Decomposition, Decoration, DecorationEntry};
use crate::matrix::{Column, Cplx, Mat, Projector, StateVec, Tol, ONE, ZERO};
use crate::scenario::{Generator, PpsScenario};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Cplx {
    Cplx::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal folded back into `Q`.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    let g = nalgebra::DMatrix::<Cplx>::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for col in 0..n {
        let d = r[(col, col)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for row in 0..n {
            q[(row, col)] *= phase;
        }
    }
    Mat::from_nalgebra(&q)
}

pub fn state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> StateVec {
    loop {
        let amps: Column = (0..n).map(|_| gaussian(rng)).collect();
        if let Ok(s) = StateVec::normalized(amps) {
            return s;
        }
    }
}

fn column(u: &Mat, k: usize) -> Column {
    (0..u.rows()).map(|r| u[(r, k)]).collect()
}

/// Projector onto the basis columns of `u` listed in `cols`.
pub fn subset_projector(u: &Mat, cols: &[usize]) -> Projector {
    let vs: Vec<Column> = cols.iter().map(|&k| column(u, k)).collect();
    Projector::from_orthonormal(u.rows(), &vs)
}

/// Random projector of the given rank.
pub fn projector<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> Projector {
    let u = unitary(rng, n);
    subset_projector(&u, &(0..rank.min(n)).collect::<Vec<_>>())
}

/// Random Hermitian matrix with Gaussian entries.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    let g = Mat::from_vec(n, n, (0..n * n).map(|_| gaussian(rng)).collect()).unwrap();
    (&g + &g.adjoint()).scale(Cplx::new(0.5, 0.0))
}

/// Complete decomposition into `cells` nonempty blocks of a random basis.
pub fn partition<R: Rng + ?Sized>(rng: &mut R, n: usize, cells: usize) -> Vec<Projector> {
    let cells = cells.clamp(1, n);
    let u = unitary(rng, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    // first `cells` basis vectors seed the cells, the rest land anywhere
    let mut groups: Vec<Vec<usize>> = order[..cells].iter().map(|&k| vec![k]).collect();
    for &k in &order[cells..] {
        let g = rng.random_range(0..cells);
        groups[g].push(k);
    }
    groups.iter().map(|g| subset_projector(&u, g)).collect()
}

fn random_subset<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).filter(|_| rng.random_bool(0.5)).collect()
}

/// Scenario with arbitrary random states and generators (rank ≥ 1).
pub fn scenario<R: Rng + ?Sized>(rng: &mut R, dim: usize, generators: usize) -> PpsScenario {
    loop {
        let pre = state(rng, dim);
        let post = state(rng, dim);
        let gens = (0..generators)
            .map(|k| {
                let rank = rng.random_range(1..=dim);
                Generator::new(format!("g{k}"), projector(rng, dim, rank))
            })
            .collect();
        if let Ok(s) = PpsScenario::new(pre, post, gens, Tol::default()) {
            if s.overlap() > 1e-6 {
                return s;
            }
        }
    }
}

/// State supported on `support` of the basis `u`, amplitudes bounded away
/// from zero.
fn supported_state<R: Rng + ?Sized>(rng: &mut R, u: &Mat, support: &[usize]) -> StateVec {
    let n = u.rows();
    let mut amps = vec![ZERO; n];
    for &k in support {
        let mag = rng.random_range(0.3..1.0);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let coef = Cplx::from_polar(mag, phase);
        for (a, e) in amps.iter_mut().zip(column(u, k)) {
            *a += coef * e;
        }
    }
    StateVec::normalized(amps).unwrap()
}

/// How a chain-free generator commutes with the selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    FixesPre,
    AnnihilatesPre,
    FixesPost,
    AnnihilatesPost,
}

/// Commuting scenario without non-commutation chains: every generator is a
/// projector onto basis vectors of one random basis, chosen to fix or
/// annihilate `|ψ⟩` or `|φ⟩`. Returns the anchors alongside.
pub fn chain_free_scenario<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    generators: usize,
) -> (PpsScenario, Vec<Anchor>) {
    assert!(dim >= 2);
    loop {
        let u = unitary(rng, dim);
        let small = (dim / 2).max(1);
        let mut order: Vec<usize> = (0..dim).collect();
        order.shuffle(rng);
        let shared = order[0];
        let pick_support = |rng: &mut R| {
            let size = rng.random_range(1..=small);
            let mut s: Vec<usize> = vec![shared];
            let mut rest: Vec<usize> = (0..dim).filter(|&k| k != shared).collect();
            rest.shuffle(rng);
            s.extend(rest.into_iter().take(size - 1));
            s.sort_unstable();
            s
        };
        let s_pre = pick_support(rng);
        let s_post = pick_support(rng);
        let pre = supported_state(rng, &u, &s_pre);
        let post = supported_state(rng, &u, &s_post);

        let mut anchors = Vec::with_capacity(generators);
        let mut gens = Vec::with_capacity(generators);
        for g in 0..generators {
            let anchor = match rng.random_range(0..4) {
                0 => Anchor::FixesPre,
                1 => Anchor::AnnihilatesPre,
                2 => Anchor::FixesPost,
                _ => Anchor::AnnihilatesPost,
            };
            let support = match anchor {
                Anchor::FixesPre | Anchor::AnnihilatesPre => &s_pre,
                _ => &s_post,
            };
            let free: Vec<usize> = random_subset(rng, dim)
                .into_iter()
                .filter(|k| !support.contains(k))
                .collect();
            let mut cols = free;
            if matches!(anchor, Anchor::FixesPre | Anchor::FixesPost) {
                cols.extend(support.iter().copied());
            }
            cols.sort_unstable();
            anchors.push(anchor);
            gens.push(Generator::new(format!("g{g}"), subset_projector(&u, &cols)));
        }
        if let Ok(s) = PpsScenario::new(pre, post, gens, Tol::default()) {
            if s.overlap() > 1e-4 {
                return (s, anchors);
            }
        }
    }
}

/// Logical scenario with commuting, basis-aligned generators that may
/// contain chains.
///
/// With `ψ = Σ a_k e_k` and `φ = Σ b_k e_k`, the amplitude of a basis subset
/// `T` is `Σ_{k∈T} c_k` with `c_k = conj(b_k) a_k`. For each generator one of
/// its two subset sums is forced to vanish by drawing `c` from the null space
/// of those constraints; `b_k = conj(c_k / a_k)` then realizes it.
pub fn logical_scenario<R: Rng + ?Sized>(rng: &mut R, dim: usize, generators: usize) -> PpsScenario {
    let tol = Tol::default();
    loop {
        let u = unitary(rng, dim);
        let subsets: Vec<Vec<usize>> = (0..generators)
            .map(|_| {
                let mut s = random_subset(rng, dim);
                if s.is_empty() {
                    s.push(rng.random_range(0..dim));
                }
                s
            })
            .collect();
        let mut rows: Vec<Vec<Cplx>> = Vec::new();
        for s in &subsets {
            let inside = rng.random_bool(0.5);
            rows.push(
                (0..dim)
                    .map(|k| if s.contains(&k) == inside { ONE } else { ZERO })
                    .collect(),
            );
        }
        let constraints = Mat::from_rows(rows).unwrap();
        let null = crate::matrix::nullspace_basis(&constraints, tol);
        if null.is_empty() {
            continue;
        }
        let mut coef = vec![ZERO; dim];
        for v in &null {
            let w = gaussian(rng);
            for (x, y) in coef.iter_mut().zip(v) {
                *x += w * y;
            }
        }
        // tiny c_k would make b_k blow up relative to the rest; clean them
        let scale = coef.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            continue;
        }
        for z in coef.iter_mut() {
            if z.norm() < 1e-9 * scale {
                *z = ZERO;
            }
        }
        let a: Vec<Cplx> = (0..dim)
            .map(|_| Cplx::from_polar(rng.random_range(0.3..1.0), rng.random_range(0.0..std::f64::consts::TAU)))
            .collect();
        let b: Vec<Cplx> = a.iter().zip(&coef).map(|(a, c)| (c / a).conj()).collect();
        let rotate = |v: &[Cplx]| -> Column { u.apply(v) };
        let (Ok(pre), Ok(post)) = (
            StateVec::normalized(rotate(&a)),
            StateVec::normalized(rotate(&b)),
        ) else {
            continue;
        };
        let gens = subsets
            .iter()
            .enumerate()
            .map(|(k, s)| Generator::new(format!("g{k}"), subset_projector(&u, s)))
            .collect();
        if let Ok(s) = PpsScenario::new(pre, post, gens, tol) {
            if s.overlap() > 1e-6 && crate::scenario::is_logical(&s, tol).unwrap_or(false) {
                return s;
            }
        }
    }
}

/// `n` commuting projectors diagonal in one random basis.
pub fn commuting_generators<R: Rng + ?Sized>(rng: &mut R, dim: usize, n: usize) -> Vec<Projector> {
    let u = unitary(rng, dim);
    (0..n)
        .map(|_| subset_projector(&u, &random_subset(rng, dim)))
        .collect()
}

/// A projector and a rank-1 state. Roughly half the pairs commute by
/// construction (the state lies in the range or the kernel of `P`).
pub fn commutation_pair<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> (Projector, StateVec) {
    let u = unitary(rng, dim);
    let rank = rng.random_range(0..=dim);
    let cols: Vec<usize> = (0..rank).collect();
    let p = subset_projector(&u, &cols);
    let s = match rng.random_range(0..4) {
        0 if rank > 0 => {
            let take = rng.random_range(1..=rank);
            supported_state(rng, &u, &cols[..take])
        }
        1 if rank < dim => {
            let kernel: Vec<usize> = (rank..dim).collect();
            let take = rng.random_range(1..=kernel.len());
            supported_state(rng, &u, &kernel[..take])
        }
        _ => state(rng, dim),
    };
    (p, s)
}

/// Hermitian generator sets whose algebras range from the full matrix
/// algebra to block-diagonal and multiplicity (`M ⊗ I`) structures.
pub fn hermitian_generators<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Mat> {
    let u = unitary(rng, dim);
    let count = rng.random_range(1..=3);
    let conj = |m: &Mat| &(&u * m) * &u.adjoint();
    match rng.random_range(0..3) {
        0 => (0..count).map(|_| hermitian(rng, dim)).collect(),
        1 => {
            let cut = rng.random_range(1..dim.max(2)).min(dim);
            (0..count)
                .map(|_| {
                    let mut m = Mat::zeros(dim, dim);
                    let (a, b) = (hermitian(rng, cut), hermitian(rng, dim - cut));
                    for i in 0..cut {
                        for j in 0..cut {
                            m[(i, j)] = a[(i, j)];
                        }
                    }
                    for i in 0..dim - cut {
                        for j in 0..dim - cut {
                            m[(cut + i, cut + j)] = b[(i, j)];
                        }
                    }
                    conj(&m)
                })
                .collect()
        }
        _ => {
            let divisors: Vec<usize> = (2..=dim).filter(|k| dim % k == 0 && *k < dim).collect();
            let Some(&k) = divisors.choose(rng) else {
                return (0..count).map(|_| hermitian(rng, dim)).collect();
            };
            let m = dim / k;
            (0..count)
                .map(|_| conj(&crate::matrix::kron(&hermitian(rng, m), &Mat::identity(k))))
                .collect()
        }
    }
}

fn random_local_decomposition<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Decomposition {
    match rng.random_range(0..3) {
        0 => Decomposition::trivial(d),
        1 => Decomposition::computational(d),
        _ => {
            let cells = rng.random_range(1..=d);
            Decomposition::new(partition(rng, d, cells), Tol::default()).unwrap()
        }
    }
}

/// Circuit on `wires` qubits with `layers` Haar-random layers, decorated on
/// every wire with random in/out cuts and decompositions.
pub fn decorated_circuit<R: Rng + ?Sized>(
    rng: &mut R,
    wires: usize,
    layers: usize,
) -> (Circuit, Bubble, Decoration) {
    let dims = vec![2; wires];
    let n = 1 << wires;
    let circuit = Circuit::new(dims, (0..layers).map(|_| unitary(rng, n)).collect(), Tol::default())
        .expect("random layers are unitary");
    let mut entries = Vec::new();
    for wire in 0..wires {
        let in_cut = rng.random_range(0..=layers);
        let out_cut = rng.random_range(in_cut..=layers);
        entries.push(DecorationEntry {
            wire,
            in_cut,
            out_cut,
            input: random_local_decomposition(rng, 2),
            output: random_local_decomposition(rng, 2),
        });
    }
    let bubble = Bubble::new((0..wires).collect()).unwrap();
    (circuit, bubble, Decoration::new(entries))
}
