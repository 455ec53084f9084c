//! Dense complex linear algebra at small dimension.
//!
//! Matrices are row-major. Tensor products put the left factor on the
//! slower-varying index, so in a register `|a⟩ ⊗ |b⟩ ⊗ |c⟩` the first
//! particle is the most significant digit of the basis index.
//!
//! Every comparison goes through a [`Tol`]: `eq` bounds entrywise
//! differences, `eig` bounds singular-value and eigenvalue clustering.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use num_complex::Complex64 as Cplx;

/// A column vector in the ambient space of some [`Mat`] or vectorized operator.
pub type Column = Vec<Cplx>;

pub const ZERO: Cplx = Cplx::new(0.0, 0.0);
pub const ONE: Cplx = Cplx::new(1.0, 0.0);
pub const I: Cplx = Cplx::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Cplx {
    Cplx::new(re, im)
}

/// Numerical tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tol {
    /// Entrywise comparison threshold.
    pub eq: f64,
    /// Eigenvalue / singular value clustering threshold.
    pub eig: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol {
            eq: 1e-10,
            eig: 1e-8,
        }
    }
}

impl Tol {
    pub fn new(eq: f64, eig: f64) -> Result<Self> {
        let ok = |t: f64| t.is_finite() && t > 0.0 && t < 1e-2;
        if !ok(eq) || !ok(eig) {
            return Err(Error::Validation {
                location: "tolerances".into(),
                invariant: format!("0 < tol ≪ 1 (got eq={eq:e}, eig={eig:e})"),
            });
        }
        Ok(Tol { eq, eig })
    }

    /// The same tolerance with `eq` scaled by `factor`.
    pub fn loosened(self, factor: f64) -> Self {
        Tol {
            eq: self.eq * factor,
            eig: self.eig,
        }
    }
}

#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Cplx>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for col in 0..self.cols {
                let z = self[(r, col)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Cplx>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Mat { rows, cols, data })
    }

    /// Builds a matrix from rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<Cplx>>) -> Result<Self> {
        let r = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if r == 0 || cols == 0 {
            return Err(Error::Validation {
                location: "matrix".into(),
                invariant: "at least one row and one column".into(),
            });
        }
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Mat::from_vec(r, cols, data)
    }

    /// Real-valued matrix from row slices. Panics on ragged input.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let cols = rows[0].len();
        let data = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), cols, "ragged rows");
                row.iter().map(|&x| c(x, 0.0))
            })
            .collect();
        Mat {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn diag(entries: &[Cplx]) -> Self {
        let mut m = Mat::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn column(v: &[Cplx]) -> Self {
        Mat {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[Cplx], v: &[Cplx]) -> Self {
        let mut m = Mat::zeros(u.len(), v.len());
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                m[(i, j)] = ui * vj.conj();
            }
        }
        m
    }

    /// Matrix unit `E_ij` of size n×n.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Dimension of a square matrix, or `NonSquare`.
    pub fn square_dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn as_slice(&self) -> &[Cplx] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Cplx> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[Cplx] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Cplx>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for col in 0..self.cols {
                m[(col, r)] = self[(r, col)].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for col in 0..self.cols {
                m[(col, r)] = self[(r, col)];
            }
        }
        m
    }

    pub fn trace(&self) -> Cplx {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, z: Cplx) -> Self {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * z).collect(),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Tr(self† other)`.
    pub fn hs_inner(&self, other: &Mat) -> Cplx {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest entrywise difference; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Mat, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    pub fn apply(&self, v: &[Cplx]) -> Column {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `‖m − m†‖∞`, or infinity for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for col in r..self.cols {
                worst = worst.max((self[(r, col)] - self[(col, r)].conj()).norm());
            }
        }
        worst
    }

    /// `(m + m†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale(c(0.5, 0.0))
    }

    /// `‖m†m − I‖∞`, or infinity for non-square input.
    pub fn unitary_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.adjoint() * self).max_abs_diff(&Mat::identity(self.rows))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Reshape a vectorized operator (row-major) back into a d×d matrix.
    pub fn from_vectorized(d: usize, v: &[Cplx]) -> Self {
        assert_eq!(v.len(), d * d, "vectorized length mismatch");
        Mat {
            rows: d,
            cols: d,
            data: v.to_vec(),
        }
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Cplx> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<Cplx>) -> Self {
        let mut out = Mat::zeros(m.nrows(), m.ncols());
        for r in 0..m.nrows() {
            for col in 0..m.ncols() {
                out[(r, col)] = m[(r, col)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = Cplx;
    fn index(&self, (r, col): (usize, usize)) -> &Cplx {
        &self.data[r * self.cols + col]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, col): (usize, usize)) -> &mut Cplx {
        &mut self.data[r * self.cols + col]
    }
}

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for (k, a) in self.row(r).iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.scale(c(-1.0, 0.0))
    }
}

impl Serialize for Mat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<Cplx>>::deserialize(d)?;
        Mat::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Normalized state vector.
#[derive(Clone, PartialEq)]
pub struct StateVec {
    amps: Column,
}

impl fmt::Debug for StateVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.amps.iter()).finish()
    }
}

impl StateVec {
    /// Validates finiteness and unit norm within `tol.eq`.
    pub fn new(amps: Column, tol: Tol) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::ZeroVector);
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = vec_norm(&amps);
        if (norm - 1.0).abs() > tol.eq {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVec { amps })
    }

    /// Rescales to unit norm.
    pub fn normalized(amps: Column) -> Result<Self> {
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = vec_norm(&amps);
        if norm == 0.0 || amps.is_empty() {
            return Err(Error::ZeroVector);
        }
        Ok(StateVec {
            amps: amps.into_iter().map(|z| z / norm).collect(),
        })
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[k] = ONE;
        StateVec { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Cplx] {
        &self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVec) -> Cplx {
        inner(&self.amps, &other.amps)
    }

    pub fn kron(&self, other: &StateVec) -> StateVec {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        StateVec { amps }
    }

    pub fn phased(&self, phase: Cplx) -> StateVec {
        StateVec {
            amps: self.amps.iter().map(|z| z * phase).collect(),
        }
    }

    pub fn as_column(&self) -> Mat {
        Mat::column(&self.amps)
    }
}

/// `⟨u|v⟩`.
pub fn inner(u: &[Cplx], v: &[Cplx]) -> Cplx {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[Cplx]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian idempotent matrix.
#[derive(Clone, PartialEq)]
pub struct Projector {
    mat: Mat,
}

impl fmt::Debug for Projector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Projector({:?})", self.mat)
    }
}

impl Projector {
    /// Validates Hermiticity, idempotence and a {0,1} spectrum.
    pub fn new(mat: Mat, tol: Tol) -> Result<Self> {
        mat.square_dim()?;
        if !mat.is_finite() {
            return Err(Error::NonFinite);
        }
        let herm = mat.hermitian_deviation();
        if herm > tol.eq {
            return Err(Error::NotProjector(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let idem = (&mat * &mat).max_abs_diff(&mat);
        if idem > tol.eq {
            return Err(Error::NotProjector(format!(
                "not idempotent (deviation {idem:e})"
            )));
        }
        let eig = hermitian_eig(&mat, tol)?;
        if let Some(bad) = eig
            .values
            .iter()
            .find(|&&l| l.abs() > tol.eig && (l - 1.0).abs() > tol.eig)
        {
            return Err(Error::NotProjector(format!("eigenvalue {bad} not in {{0,1}}")));
        }
        Ok(Projector { mat })
    }

    /// Wraps a matrix known to be a projector by construction.
    pub(crate) fn new_unchecked(mat: Mat) -> Self {
        Projector { mat }
    }

    pub fn zero(dim: usize) -> Self {
        Projector {
            mat: Mat::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Projector {
            mat: Mat::identity(dim),
        }
    }

    /// Projector onto the span of the given orthonormal vectors.
    pub fn from_orthonormal(dim: usize, vectors: &[Column]) -> Self {
        let mut m = Mat::zeros(dim, dim);
        for v in vectors {
            m = &m + &Mat::outer(v, v);
        }
        Projector { mat: m }
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn into_mat(self) -> Mat {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn rank(&self) -> usize {
        self.mat.trace().re.round().max(0.0) as usize
    }

    /// `I − P`.
    pub fn complement(&self) -> Projector {
        Projector {
            mat: &Mat::identity(self.dim()) - &self.mat,
        }
    }

    pub fn is_zero(&self, tol: Tol) -> bool {
        self.mat.is_zero(tol.eq)
    }

    pub fn kron(&self, other: &Projector) -> Projector {
        Projector {
            mat: kron(&self.mat, &other.mat),
        }
    }
}

impl Serialize for Projector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.mat.serialize(s)
    }
}

/// Kronecker product, left factor on the slower-varying index.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = Mat::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a[(ar, ac)];
            if x == ZERO {
                continue;
            }
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    out[(ar * b.rows + br, ac * b.cols + bc)] = x * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a sequence; the empty product is the 1×1 identity.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a Mat>) -> Mat {
    factors
        .into_iter()
        .fold(Mat::identity(1), |acc, m| kron(&acc, m))
}

pub fn is_projector(m: &Mat, tol: Tol) -> Result<bool> {
    m.square_dim()?;
    Ok(m.hermitian_deviation() <= tol.eq && (m * m).max_abs_diff(m) <= tol.eq)
}

/// `|v⟩⟨v|`.
pub fn projector_from_state(v: &StateVec) -> Result<Projector> {
    if vec_norm(v.amplitudes()) == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(Projector {
        mat: Mat::outer(v.amplitudes(), v.amplitudes()),
    })
}

/// `‖ab − ba‖∞`.
pub fn commutator_norm(a: &Mat, b: &Mat) -> Result<f64> {
    let d = a.square_dim()?;
    let e = b.square_dim()?;
    if d != e {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: e,
        });
    }
    Ok((a * b).max_abs_diff(&(b * a)))
}

/// Orthonormal kernel basis. Singular values at most `tol.eig·σ_max` count as
/// zero; a matrix whose largest singular value is below `tol.eq` is treated as
/// the zero map.
pub fn nullspace_basis(m: &Mat, tol: Tol) -> Vec<Column> {
    let n = m.cols();
    if n == 0 {
        return Vec::new();
    }
    // zero rows leave the right singular vectors unchanged but force a full V
    let padded_rows = m.rows().max(n);
    let mut a = DMatrix::<Cplx>::zeros(padded_rows, n);
    for r in 0..m.rows() {
        for col in 0..n {
            a[(r, col)] = m[(r, col)];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if sigma_max <= tol.eq {
        return (0..n)
            .map(|k| {
                let mut e = vec![ZERO; n];
                e[k] = ONE;
                e
            })
            .collect();
    }
    let cutoff = tol.eig * sigma_max;
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(i, _)| (0..n).map(|col| v_t[(i, col)].conj()).collect())
        .collect()
}

/// Orthonormal basis for the span of `vectors`, discarding directions whose
/// singular value is at most `tol.eig·σ_max`.
pub fn orthonormal_basis(vectors: &[Column], tol: Tol) -> Vec<Column> {
    let Some(first) = vectors.first() else {
        return Vec::new();
    };
    let n = first.len();
    let k = vectors.len();
    let a = DMatrix::<Cplx>::from_fn(n, k, |r, col| vectors[col][r]);
    let svd = a.svd(true, false);
    let u = svd.u.expect("requested U");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if sigma_max <= tol.eq {
        return Vec::new();
    }
    let cutoff = tol.eig * sigma_max;
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > cutoff)
        .map(|(i, _)| (0..n).map(|r| u[(r, i)]).collect())
        .collect()
}

fn check_ambient(basis_a: &[Column], basis_b: &[Column]) -> Result<Option<usize>> {
    let mut dims = basis_a.iter().chain(basis_b).map(Vec::len);
    let Some(n) = dims.next() else {
        return Ok(None);
    };
    for m in dims {
        if m != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m,
            });
        }
    }
    Ok(Some(n))
}

/// Orthonormal basis of `span(basis_a) ∩ span(basis_b)`.
///
/// Both inputs are orthonormalized first; a direction of A belongs to the
/// intersection when its distance to span(B) (the sine of the principal
/// angle) is at most `tol.eig`.
pub fn subspace_intersect(basis_a: &[Column], basis_b: &[Column], tol: Tol) -> Result<Vec<Column>> {
    let Some(n) = check_ambient(basis_a, basis_b)? else {
        return Ok(Vec::new());
    };
    let qa = orthonormal_basis(basis_a, tol);
    let qb = orthonormal_basis(basis_b, tol);
    if qa.is_empty() || qb.is_empty() {
        return Ok(Vec::new());
    }
    // columns of (I − Q_B Q_B†) Q_A
    let residual: Vec<Column> = qa
        .iter()
        .map(|a| {
            let mut r = a.clone();
            for b in &qb {
                let proj = inner(b, &r);
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= proj * y;
                }
            }
            r
        })
        .collect();
    let ka = qa.len();
    let mut m = DMatrix::<Cplx>::zeros(n.max(ka), ka);
    for (col, r) in residual.iter().enumerate() {
        for (row, z) in r.iter().enumerate() {
            m[(row, col)] = *z;
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let coeffs: Vec<Column> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol.eig)
        .map(|(i, _)| (0..ka).map(|col| v_t[(i, col)].conj()).collect())
        .collect();
    let vectors: Vec<Column> = coeffs
        .iter()
        .map(|alpha| {
            let mut v = vec![ZERO; n];
            for (a, coef) in qa.iter().zip(alpha) {
                for (x, y) in v.iter_mut().zip(a) {
                    *x += coef * y;
                }
            }
            v
        })
        .collect();
    Ok(orthonormal_basis(&vectors, tol))
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, `vectors[k]` paired with `values[k]`.
    pub vectors: Vec<Column>,
    /// Index groups of eigenvalues closer than `tol.eig` to their neighbour.
    pub clusters: Vec<Vec<usize>>,
}

impl HermitianEig {
    /// Projector onto the eigenspace of each cluster, in ascending order.
    pub fn cluster_projectors(&self) -> Vec<Projector> {
        let dim = self.vectors.first().map_or(0, Vec::len);
        self.clusters
            .iter()
            .map(|group| {
                let vs: Vec<Column> = group.iter().map(|&k| self.vectors[k].clone()).collect();
                Projector::from_orthonormal(dim, &vs)
            })
            .collect()
    }
}

/// Symmetrizes `m` as `(m + m†)/2` and diagonalizes it.
pub fn hermitian_eig(m: &Mat, tol: Tol) -> Result<HermitianEig> {
    let d = m.square_dim()?;
    let deviation = m.hermitian_deviation();
    if deviation > tol.eq {
        return Err(Error::NotHermitian { deviation });
    }
    let h = m.hermitian_part().to_nalgebra();
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors: Vec<Column> = order
        .iter()
        .map(|&k| (0..d).map(|r| eig.eigenvectors[(r, k)]).collect())
        .collect();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(group) if (v - values[*group.last().unwrap()]).abs() <= tol.eig => group.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    Ok(HermitianEig {
        values,
        vectors,
        clusters,
    })
}

/// Standard single-qubit matrices used throughout tests and examples.
pub mod gates {
    use super::*;

    pub fn pauli_x() -> Mat {
        Mat::from_real(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn pauli_y() -> Mat {
        Mat::from_rows(vec![vec![ZERO, -I], vec![I, ZERO]]).unwrap()
    }

    pub fn pauli_z() -> Mat {
        Mat::from_real(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    pub fn hadamard() -> Mat {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Mat::from_real(&[&[s, s], &[s, -s]])
    }

    /// Control on the first (left) qubit.
    pub fn cnot() -> Mat {
        Mat::from_real(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])
    }

    pub fn swap() -> Mat {
        Mat::from_real(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ])
    }

    pub fn ket0() -> StateVec {
        StateVec::basis(2, 0)
    }

    pub fn ket1() -> StateVec {
        StateVec::basis(2, 1)
    }

    pub fn ket_plus() -> StateVec {
        StateVec::normalized(vec![ONE, ONE]).unwrap()
    }

    pub fn ket_minus() -> StateVec {
        StateVec::normalized(vec![ONE, -ONE]).unwrap()
    }

    /// `(|0⟩ + i|1⟩)/√2`.
    pub fn ket_i() -> StateVec {
        StateVec::normalized(vec![ONE, I]).unwrap()
    }
}
