//! Finite-dimensional operator algebras: generation, commutants, centers and
//! minimal projectors.
//!
//! Operators are vectorized row-major, `vec(X)[i·d + j] = X_ij`, and spaces
//! carry bases orthonormal under `⟨A,B⟩ = Tr(A†B)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{
    commutator_norm, hermitian_eig, inner, nullspace_basis, subspace_intersect, vec_norm, Column,
    Cplx, Mat, Projector, Tol, ZERO,
};

/// Largest Hilbert dimension accepted by [`generate_algebra`].
pub const MAX_ALGEBRA_DIM: usize = 16;

/// Seed used when callers do not pick one.
pub const DEFAULT_SEED: u64 = 0x5eed_0001;

/// Redraws allowed in [`minimal_projectors`] before giving up.
pub const MAX_REDRAWS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorSpace {
    dim: usize,
    basis: Vec<Mat>,
}

fn vectorize(m: &Mat) -> Column {
    m.as_slice().to_vec()
}

fn check_square(mats: &[Mat]) -> Result<Option<usize>> {
    let mut dim = None;
    for m in mats {
        let d = m.square_dim()?;
        match dim {
            None => dim = Some(d),
            Some(e) if e != d => {
                return Err(Error::DimensionMismatch {
                    expected: e,
                    found: d,
                })
            }
            _ => {}
        }
    }
    Ok(dim)
}

/// Incremental Gram–Schmidt over vectorized operators.
struct SpanBuilder {
    basis: Vec<Column>,
    tol: Tol,
}

impl SpanBuilder {
    fn new(tol: Tol) -> Self {
        SpanBuilder {
            basis: Vec::new(),
            tol,
        }
    }

    fn residual(&self, v: &[Cplx]) -> Column {
        let mut r = v.to_vec();
        // two passes keep the basis orthonormal to working precision
        for _ in 0..2 {
            for b in &self.basis {
                let coef = inner(b, &r);
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= coef * y;
                }
            }
        }
        r
    }

    /// Adds the direction of `v` not already spanned; true if the span grew.
    fn push(&mut self, v: &[Cplx]) -> bool {
        let norm = vec_norm(v);
        if norm <= self.tol.eq {
            return false;
        }
        let r = self.residual(v);
        let rn = vec_norm(&r);
        if rn <= self.tol.eig * norm {
            return false;
        }
        self.basis.push(r.into_iter().map(|z| z / rn).collect());
        true
    }
}

impl OperatorSpace {
    /// Orthonormalized span of `mats`; `dim` fixes the ambient size when
    /// `mats` is empty.
    pub fn span(dim: usize, mats: &[Mat], tol: Tol) -> Result<Self> {
        if let Some(d) = check_square(mats)? {
            if d != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d,
                });
            }
        }
        let mut builder = SpanBuilder::new(tol);
        for m in mats {
            builder.push(&vectorize(m));
        }
        Ok(Self::from_columns(dim, builder.basis))
    }

    fn from_columns(dim: usize, columns: Vec<Column>) -> Self {
        OperatorSpace {
            dim,
            basis: columns
                .iter()
                .map(|v| Mat::from_vectorized(dim, v))
                .collect(),
        }
    }

    /// All `d × d` operators.
    pub fn full(dim: usize) -> Self {
        let basis = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| Mat::unit(dim, i, j)))
            .collect();
        OperatorSpace { dim, basis }
    }

    /// `span{I}`.
    pub fn scalars(dim: usize) -> Self {
        let s = 1.0 / (dim as f64).sqrt();
        OperatorSpace {
            dim,
            basis: vec![Mat::identity(dim).scale(Cplx::new(s, 0.0))],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }

    /// Dimension of the space itself.
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    fn columns(&self) -> Vec<Column> {
        self.basis.iter().map(vectorize).collect()
    }

    /// Frobenius distance from `m` to the space.
    pub fn residual(&self, m: &Mat) -> f64 {
        let mut r = vectorize(m);
        for b in &self.basis {
            let coef = b.hs_inner(m);
            for (x, y) in r.iter_mut().zip(b.as_slice()) {
                *x -= coef * y;
            }
        }
        vec_norm(&r)
    }

    pub fn contains(&self, m: &Mat, tol: f64) -> bool {
        self.residual(m) <= tol
    }

    /// Mutual containment of bases within `tol`.
    pub fn same_span(&self, other: &OperatorSpace, tol: f64) -> bool {
        self.dim == other.dim
            && self.len() == other.len()
            && self.basis.iter().all(|b| other.contains(b, tol))
            && other.basis.iter().all(|b| self.contains(b, tol))
    }

    /// Largest Gram-matrix deviation from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.hs_inner(b) - Cplx::new(expected, 0.0)).norm());
            }
        }
        worst
    }

    /// Largest commutator norm between basis elements.
    pub fn commutativity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for b in &self.basis[i + 1..] {
                worst = worst.max(commutator_norm(a, b).expect("same dimension"));
            }
        }
        worst
    }

    /// Hermitian spanning set: `(B + B†)/2` and `(B − B†)/2i` for each basis
    /// element `B`. Spans the space when it is adjoint-closed.
    pub fn hermitian_spanning_set(&self) -> Vec<Mat> {
        let mut out = Vec::with_capacity(2 * self.len());
        for b in &self.basis {
            let adj = b.adjoint();
            out.push((b + &adj).scale(Cplx::new(0.5, 0.0)));
            out.push((b - &adj).scale(Cplx::new(0.0, -0.5)));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Closure {
    pub adjoint: bool,
    pub product: bool,
    pub identity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Algebra {
    pub space: OperatorSpace,
    pub closed: Closure,
}

impl Algebra {
    pub fn is_closed(&self) -> bool {
        self.closed.adjoint && self.closed.product && self.closed.identity
    }

    /// Recomputes the closure flags of `space` from scratch.
    pub fn check(space: OperatorSpace, tol: Tol) -> Algebra {
        let slack = 10.0 * tol.eig;
        let identity = space.contains(&Mat::identity(space.dim()), slack);
        let adjoint = space.basis().iter().all(|b| space.contains(&b.adjoint(), slack));
        let product = space
            .basis()
            .iter()
            .all(|a| space.basis().iter().all(|b| space.contains(&(a * b), slack)));
        Algebra {
            space,
            closed: Closure {
                adjoint,
                product,
                identity,
            },
        }
    }
}

/// Smallest adjoint-closed, product-closed span containing `I` and `gens`.
///
/// With no generators the Hilbert dimension is unknown and a one-dimensional
/// `span{I}` is returned; use [`generate_algebra_dim`] to pick it.
pub fn generate_algebra(gens: &[Mat], tol: Tol) -> Result<Algebra> {
    let dim = check_square(gens)?.unwrap_or(1);
    generate_algebra_dim(dim, gens, tol)
}

pub fn generate_algebra_dim(dim: usize, gens: &[Mat], tol: Tol) -> Result<Algebra> {
    if let Some(d) = check_square(gens)? {
        if d != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: d,
            });
        }
    }
    if dim > MAX_ALGEBRA_DIM {
        return Err(Error::Unsupported(format!(
            "algebra generation limited to dimension {MAX_ALGEBRA_DIM}, got {dim}"
        )));
    }
    let mut letters: Vec<Mat> = Vec::new();
    for g in gens {
        letters.push(g.clone());
        if g.hermitian_deviation() > tol.eq {
            letters.push(g.adjoint());
        }
    }
    let mut span = SpanBuilder::new(tol);
    let mut frontier: Vec<Mat> = Vec::new();
    for m in std::iter::once(Mat::identity(dim)).chain(letters.iter().cloned()) {
        if span.push(&vectorize(&m)) {
            frontier.push(m);
        }
    }
    // words grow by right multiplication with a letter until the span stalls
    while !frontier.is_empty() && span.basis.len() < dim * dim {
        let mut next = Vec::new();
        for w in &frontier {
            for l in &letters {
                let candidate = w * l;
                if span.push(&vectorize(&candidate)) {
                    next.push(candidate);
                }
            }
        }
        frontier = next;
    }
    Ok(Algebra {
        space: OperatorSpace::from_columns(dim, span.basis),
        closed: Closure {
            adjoint: true,
            product: true,
            identity: true,
        },
    })
}

/// Basis of `{X : XM = MX for every M in gens}`.
///
/// The kernel of `X ↦ MX − XM` is intersected one generator at a time by
/// restricting each new linear map to the kernel found so far. The result is
/// adjoint-closed whenever `gens` is.
pub fn commutant(gens: &[Mat], tol: Tol) -> Result<OperatorSpace> {
    let Some(dim) = check_square(gens)? else {
        return Err(Error::Validation {
            location: "generators".into(),
            invariant: "commutant needs at least one operator to fix the dimension".into(),
        });
    };
    commutant_dim(dim, gens, tol)
}

/// [`commutant`] with an explicit Hilbert dimension, so an empty generator
/// list yields the full operator space.
pub fn commutant_dim(dim: usize, gens: &[Mat], tol: Tol) -> Result<OperatorSpace> {
    if let Some(d) = check_square(gens)? {
        if d != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: d,
            });
        }
    }
    let mut kernel: Vec<Mat> = OperatorSpace::full(dim).basis;
    for m in gens {
        if kernel.is_empty() {
            break;
        }
        // column k is vec(M K_k − K_k M)
        let images: Vec<Column> = kernel.iter().map(|k| vectorize(&(&(m * k) - &(k * m)))).collect();
        let rows = dim * dim;
        let mut data = vec![ZERO; rows * images.len()];
        for (col, img) in images.iter().enumerate() {
            for (row, z) in img.iter().enumerate() {
                data[row * images.len() + col] = *z;
            }
        }
        let map = Mat::from_vec(rows, images.len(), data)?;
        let coeffs = nullspace_basis(&map, tol);
        kernel = coeffs
            .iter()
            .map(|alpha| {
                let mut x = Mat::zeros(dim, dim);
                for (k, a) in kernel.iter().zip(alpha) {
                    x = &x + &k.scale(*a);
                }
                x
            })
            .collect();
    }
    Ok(OperatorSpace { dim, basis: kernel })
}

/// `Z(𝒳) = 𝒳 ∩ 𝒳′`.
pub fn center(alg: &Algebra, tol: Tol) -> Result<OperatorSpace> {
    let space = &alg.space;
    let comm = commutant_dim(space.dim(), space.basis(), tol)?;
    intersect(space, &comm, tol)
}

/// Intersection of two operator spaces.
pub fn intersect(a: &OperatorSpace, b: &OperatorSpace, tol: Tol) -> Result<OperatorSpace> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    let cols = subspace_intersect(&a.columns(), &b.columns(), tol)?;
    Ok(OperatorSpace::from_columns(a.dim, cols))
}

/// Order-independent canonical ordering: by diagonal, largest weight on the
/// earliest basis state first.
fn canonical_order(projectors: &mut [Projector]) {
    let key = |p: &Projector| -> Vec<i64> {
        (0..p.dim())
            .map(|k| -(p.mat()[(k, k)].re * 1e6).round() as i64)
            .collect()
    };
    projectors.sort_by_key(key);
}

/// The minimal projectors of a commutative algebra containing `I`.
///
/// A random real combination of a Hermitian spanning set is diagonalized; its
/// eigenspaces are the minimal projectors once their number matches the
/// dimension of the space. Collisions trigger a redraw from the same seeded
/// stream, at most [`MAX_REDRAWS`] times.
pub fn minimal_projectors(space: &OperatorSpace, tol: Tol, seed: u64) -> Result<Vec<Projector>> {
    let dim = space.dim();
    let defect = space.commutativity_defect();
    if defect > 10.0 * tol.eq {
        return Err(Error::NotCommutative { norm: defect });
    }
    if !space.contains(&Mat::identity(dim), 10.0 * tol.eig) {
        return Err(Error::MissingIdentity);
    }
    let hermitian = space.hermitian_spanning_set();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_REDRAWS {
        let mut combo = Mat::zeros(dim, dim);
        for h in &hermitian {
            let r: f64 = rng.random_range(-1.0..1.0);
            combo = &combo + &h.scale(Cplx::new(r, 0.0));
        }
        let eig = hermitian_eig(&combo.hermitian_part(), tol)?;
        if eig.clusters.len() != space.len() {
            continue;
        }
        let mut projectors = eig.cluster_projectors();
        if projectors
            .iter()
            .all(|p| space.contains(p.mat(), 10.0 * tol.eq.max(tol.eig * 1e-2)))
        {
            canonical_order(&mut projectors);
            return Ok(projectors);
        }
    }
    Err(Error::GenericityFailure {
        attempts: MAX_REDRAWS,
    })
}

/// Seed from `PPS_SEED` when set and parseable, else [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var("PPS_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}
