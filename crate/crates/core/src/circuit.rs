//! Layered unitary circuits: Heisenberg lifting of local projector
//! decompositions, interference and causal influence, the history
//! probability rule, allowed-influence audits and preferred decompositions.

use serde::Serialize;

use crate::algebra::{center, commutant_dim, intersect, minimal_projectors, Algebra, Closure, OperatorSpace};
use crate::error::{Error, Result};
use crate::matrix::{commutator_norm, kron, kron_all, Cplx, Mat, Projector, Tol};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Circuit {
    wire_dims: Vec<usize>,
    layers: Vec<Mat>,
}

impl Circuit {
    /// Wires in tensor order; every layer acts on the full space.
    pub fn new(wire_dims: Vec<usize>, layers: Vec<Mat>, tol: Tol) -> Result<Self> {
        if wire_dims.is_empty() || wire_dims.contains(&0) {
            return Err(Error::Validation {
                location: "wire_dims".into(),
                invariant: "at least one wire, every dimension positive".into(),
            });
        }
        let dim: usize = wire_dims.iter().product();
        for layer in &layers {
            let d = layer.square_dim()?;
            if d != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d,
                });
            }
            let deviation = layer.unitary_deviation();
            if deviation > tol.eq {
                return Err(Error::NotUnitary { deviation });
            }
        }
        Ok(Circuit { wire_dims, layers })
    }

    pub fn wire_dims(&self) -> &[usize] {
        &self.wire_dims
    }

    pub fn layers(&self) -> &[Mat] {
        &self.layers
    }

    pub fn wire_count(&self) -> usize {
        self.wire_dims.len()
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Full Hilbert dimension.
    pub fn dim(&self) -> usize {
        self.wire_dims.iter().product()
    }

    fn check_wire(&self, wire: usize) -> Result<usize> {
        self.wire_dims
            .get(wire)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index: wire,
                len: self.wire_dims.len(),
            })
    }

    fn check_cut(&self, cut: usize) -> Result<()> {
        if cut > self.layers.len() {
            return Err(Error::IndexOutOfRange {
                index: cut,
                len: self.layers.len() + 1,
            });
        }
        Ok(())
    }

    /// `I ⊗ … ⊗ local ⊗ … ⊗ I` with `local` on `wire`.
    pub fn embed(&self, wire: usize, local: &Mat) -> Result<Mat> {
        let d = self.check_wire(wire)?;
        let found = local.square_dim()?;
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
        let ids: Vec<Mat> = self.wire_dims.iter().map(|&k| Mat::identity(k)).collect();
        Ok(kron_all(
            ids.iter()
                .enumerate()
                .map(|(k, id)| if k == wire { local } else { id }),
        ))
    }

    /// `V = L_{cut−1} ⋯ L₀`.
    pub fn prefix(&self, cut: usize) -> Result<Mat> {
        self.check_cut(cut)?;
        let mut v = Mat::identity(self.dim());
        for layer in &self.layers[..cut] {
            v = layer * &v;
        }
        Ok(v)
    }
}

/// `V† (I ⊗ … ⊗ local ⊗ … ⊗ I) V` with `V` the product of the layers before
/// `cut`. Cut 0 is the bare embedding.
pub fn heisenberg_lift(circuit: &Circuit, wire: usize, cut: usize, local: &Mat) -> Result<Mat> {
    let embedded = circuit.embed(wire, local)?;
    let v = circuit.prefix(cut)?;
    Ok(&(&v.adjoint() * &embedded) * &v)
}

/// Complete orthogonal family of projectors on one wire.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub projectors: Vec<Projector>,
}

impl Decomposition {
    pub fn new(projectors: Vec<Projector>, tol: Tol) -> Result<Self> {
        let Some(first) = projectors.first() else {
            return Err(Error::PartitionInvalid("empty decomposition".into()));
        };
        let dim = first.dim();
        let mut total = Mat::zeros(dim, dim);
        for (i, p) in projectors.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            for q in &projectors[i + 1..] {
                let overlap = (p.mat() * q.mat()).max_abs();
                if overlap > 10.0 * tol.eq {
                    return Err(Error::PartitionInvalid(format!("members overlap ({overlap:e})")));
                }
            }
            total = &total + p.mat();
        }
        let gap = total.max_abs_diff(&Mat::identity(dim));
        if gap > 10.0 * tol.eq {
            return Err(Error::PartitionInvalid(format!("members sum to I only within {gap:e}")));
        }
        Ok(Decomposition {
            label: None,
            projectors,
        })
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// `{I}`.
    pub fn trivial(dim: usize) -> Self {
        Decomposition {
            label: None,
            projectors: vec![Projector::identity(dim)],
        }
    }

    /// `{|k⟩⟨k|}`.
    pub fn computational(dim: usize) -> Self {
        Decomposition {
            label: None,
            projectors: (0..dim)
                .map(|k| Projector::new_unchecked(Mat::unit(dim, k, k)))
                .collect(),
        }
    }

    /// `{P, I − P}`.
    pub fn binary(p: Projector) -> Self {
        let q = p.complement();
        Decomposition {
            label: None,
            projectors: vec![p, q],
        }
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }
}

/// True when some pair of lifted members fails to commute.
pub fn interference_influence(lifted_a: &[Mat], lifted_d: &[Mat], tol: Tol) -> Result<bool> {
    Ok(max_commutator(lifted_a, lifted_d)? > tol.eq)
}

fn max_commutator(a: &[Mat], b: &[Mat]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in a {
        for y in b {
            worst = worst.max(commutator_norm(x, y)?);
        }
    }
    Ok(worst)
}

/// `(dA, dB, dC, dD)`: `u` maps `A ⊗ B` to `C ⊗ D`.
pub type Split = (usize, usize, usize, usize);

fn check_split(u: &Mat, dims: Split, tol: Tol) -> Result<usize> {
    let n = u.square_dim()?;
    let (da, db, dc, dd) = dims;
    if da * db != n || dc * dd != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if da * db != n { da * db } else { dc * dd },
        });
    }
    let deviation = u.unitary_deviation();
    if deviation > tol.eq {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(n)
}

/// `Tr_first(m)` for `m` on `d1 ⊗ d2`.
pub fn partial_trace_first(m: &Mat, d1: usize, d2: usize) -> Mat {
    let mut out = Mat::zeros(d2, d2);
    for k in 0..d1 {
        for i in 0..d2 {
            for j in 0..d2 {
                out[(i, j)] += m[(k * d2 + i, k * d2 + j)];
            }
        }
    }
    out
}

/// `Tr_second(m)` for `m` on `d1 ⊗ d2`.
pub fn partial_trace_second(m: &Mat, d1: usize, d2: usize) -> Mat {
    let mut out = Mat::zeros(d1, d1);
    for i in 0..d1 {
        for j in 0..d1 {
            for k in 0..d2 {
                out[(i, j)] += m[(i * d2 + k, j * d2 + k)];
            }
        }
    }
    out
}

fn traceless_basis(d: usize) -> Vec<Mat> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if i != j {
                out.push(Mat::unit(d, i, j));
            }
        }
    }
    for k in 1..d {
        out.push(&Mat::unit(d, 0, 0) - &Mat::unit(d, k, k));
    }
    out
}

/// Whether A can signal to D through `u`: true unless
/// `Tr_C[u (X_A ⊗ M_B) u†]` vanishes for every traceless `X_A` and every `M_B`.
pub fn causal_influence(u: &Mat, dims: Split, tol: Tol) -> Result<bool> {
    check_split(u, dims, tol)?;
    let (da, db, dc, dd) = dims;
    let u_adj = u.adjoint();
    for x in traceless_basis(da) {
        for i in 0..db {
            for j in 0..db {
                let input = kron(&x, &Mat::unit(db, i, j));
                let output = &(u * &input) * &u_adj;
                if partial_trace_first(&output, dc, dd).max_abs() > tol.eq {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

/// A subset of wires.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bubble {
    wires: Vec<usize>,
}

impl Bubble {
    pub fn new(mut wires: Vec<usize>) -> Result<Self> {
        wires.sort_unstable();
        wires.dedup();
        if wires.is_empty() {
            return Err(Error::Validation {
                location: "bubble".into(),
                invariant: "bubble must contain at least one wire".into(),
            });
        }
        Ok(Bubble { wires })
    }

    pub fn wires(&self) -> &[usize] {
        &self.wires
    }

    pub fn contains(&self, wire: usize) -> bool {
        self.wires.binary_search(&wire).is_ok()
    }
}

/// One decorated wire segment: `input` sits at cut `in_cut` and `output` at
/// cut `out_cut ≥ in_cut`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecorationEntry {
    pub wire: usize,
    pub in_cut: usize,
    pub out_cut: usize,
    pub input: Decomposition,
    pub output: Decomposition,
}

/// Decorated segments ordered by `(in_cut, out_cut, wire)`; the index in that
/// order is the entry's position. A wire may carry several entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decoration {
    entries: Vec<DecorationEntry>,
}

impl Decoration {
    pub fn new(mut entries: Vec<DecorationEntry>) -> Self {
        entries.sort_by_key(|e| (e.in_cut, e.out_cut, e.wire));
        Decoration { entries }
    }

    pub fn entries(&self) -> &[DecorationEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every selection: one `(input index, output index)` per entry.
    pub fn selections(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new()];
        for e in &self.entries {
            let mut next = Vec::with_capacity(out.len() * e.input.len() * e.output.len());
            for prefix in &out {
                for i in 0..e.input.len() {
                    for o in 0..e.output.len() {
                        let mut s = prefix.clone();
                        s.push((i, o));
                        next.push(s);
                    }
                }
            }
            out = next;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Slot {
    In,
    Out,
}

/// Lifted form of every decorated decomposition, in entry order.
#[derive(Debug, Clone)]
pub struct LiftedDecoration {
    /// `lifted[p] = (input members, output members)` for position `p`.
    pub lifted: Vec<(Vec<Mat>, Vec<Mat>)>,
}

/// Validates `decoration` against `circuit` and `bubble`, then lifts every
/// member to the global space.
pub fn lift_decoration(circuit: &Circuit, bubble: &Bubble, decoration: &Decoration) -> Result<LiftedDecoration> {
    for &w in bubble.wires() {
        circuit.check_wire(w)?;
        if !decoration.entries.iter().any(|e| e.wire == w) {
            return Err(Error::IncompleteDecoration { wire: w });
        }
    }
    let mut lifted = Vec::with_capacity(decoration.len());
    for (pos, e) in decoration.entries.iter().enumerate() {
        if !bubble.contains(e.wire) {
            return Err(Error::Validation {
                location: format!("decoration entry {pos}"),
                invariant: format!("wire {} lies outside the bubble", e.wire),
            });
        }
        if e.in_cut > e.out_cut {
            return Err(Error::Validation {
                location: format!("decoration entry {pos}"),
                invariant: "in_cut ≤ out_cut".into(),
            });
        }
        let lift = |d: &Decomposition, cut: usize| -> Result<Vec<Mat>> {
            d.projectors
                .iter()
                .map(|p| heisenberg_lift(circuit, e.wire, cut, p.mat()))
                .collect()
        };
        lifted.push((lift(&e.input, e.in_cut)?, lift(&e.output, e.out_cut)?));
    }
    Ok(LiftedDecoration { lifted })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistoryValue {
    pub value: Cplx,
    /// Imaginary part exceeds `tol.eq`.
    pub complex: bool,
}

/// `(1/d) Tr(P̃_in¹ P̃_out¹ ⋯ P̃_inⁿ P̃_outⁿ)` with `d` the full dimension and
/// factors in entry order.
pub fn history_probability(
    circuit: &Circuit,
    bubble: &Bubble,
    decoration: &Decoration,
    selection: &[(usize, usize)],
    tol: Tol,
) -> Result<HistoryValue> {
    let lifted = lift_decoration(circuit, bubble, decoration)?;
    history_from_lifted(&lifted, selection, circuit.dim(), tol)
}

/// [`history_probability`] on a decoration lifted once up front.
pub fn history_from_lifted(
    lifted: &LiftedDecoration,
    selection: &[(usize, usize)],
    dim: usize,
    tol: Tol,
) -> Result<HistoryValue> {
    if selection.len() != lifted.lifted.len() {
        return Err(Error::DimensionMismatch {
            expected: lifted.lifted.len(),
            found: selection.len(),
        });
    }
    let mut product = Mat::identity(dim);
    for ((ins, outs), &(i, o)) in lifted.lifted.iter().zip(selection) {
        let pi = ins.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: ins.len(),
        })?;
        let po = outs.get(o).ok_or(Error::IndexOutOfRange {
            index: o,
            len: outs.len(),
        })?;
        product = &(&product * pi) * po;
    }
    let value = product.trace() / dim as f64;
    Ok(HistoryValue {
        value,
        complex: value.im.abs() > tol.eq,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotRef {
    pub position: usize,
    pub wire: usize,
    pub slot: Slot,
    pub cut: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl std::fmt::Display for SlotRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let slot = match self.slot {
            Slot::In => "in",
            Slot::Out => "out",
        };
        write!(f, "wire {} {slot} #{} (cut {})", self.wire, self.position, self.cut)?;
        if let Some(l) = &self.label {
            write!(f, " [{l}]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    /// Two input decompositions interfere.
    InIn,
    /// Two output decompositions interfere.
    OutOut,
    /// An output interferes with an input at a later position.
    OutToLaterIn,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfluenceViolation {
    pub first: SlotRef,
    pub second: SlotRef,
    pub kind: ViolationKind,
    pub commutator_norm: f64,
}

/// Interfering pairs of decorated decompositions other than an input
/// influencing an output at the same or a later position. Each unordered
/// pair appears at most once, earlier slot first.
pub fn audit_influences(
    circuit: &Circuit,
    bubble: &Bubble,
    decoration: &Decoration,
    tol: Tol,
) -> Result<Vec<InfluenceViolation>> {
    let lifted = lift_decoration(circuit, bubble, decoration)?;
    let mut slots = Vec::new();
    for (pos, (e, (ins, outs))) in decoration.entries.iter().zip(&lifted.lifted).enumerate() {
        slots.push((
            SlotRef {
                position: pos,
                wire: e.wire,
                slot: Slot::In,
                cut: e.in_cut,
                label: e.input.label.clone(),
            },
            ins,
        ));
        slots.push((
            SlotRef {
                position: pos,
                wire: e.wire,
                slot: Slot::Out,
                cut: e.out_cut,
                label: e.output.label.clone(),
            },
            outs,
        ));
    }
    let mut out = Vec::new();
    for (i, (a, la)) in slots.iter().enumerate() {
        for (b, lb) in &slots[i + 1..] {
            let kind = match (a.slot, b.slot) {
                (Slot::In, Slot::In) => Some(ViolationKind::InIn),
                (Slot::Out, Slot::Out) => Some(ViolationKind::OutOut),
                // b comes later in slot order, so an In at b has position ≥ a's
                (Slot::In, Slot::Out) => None,
                (Slot::Out, Slot::In) if b.position > a.position => Some(ViolationKind::OutToLaterIn),
                (Slot::Out, Slot::In) => None,
            };
            let Some(kind) = kind else { continue };
            let norm = max_commutator(la, lb)?;
            if norm > tol.eq {
                out.push(InfluenceViolation {
                    first: a.clone(),
                    second: b.clone(),
                    kind,
                    commutator_norm: norm,
                });
            }
        }
    }
    Ok(out)
}

/// The projector decomposition on A singled out by `Z(𝒜 ∩ 𝒟′)`, where
/// `𝒜 = {M_A ⊗ I_B}` and `𝒟 = {u† (I_C ⊗ M_D) u}`.
pub fn preferred_decomposition(u: &Mat, dims: Split, tol: Tol, seed: u64) -> Result<Decomposition> {
    let n = check_split(u, dims, tol)?;
    let (da, db, dc, dd) = dims;
    let id_b = Mat::identity(db);
    let id_c = Mat::identity(dc);
    let u_adj = u.adjoint();

    let a_basis: Vec<Mat> = (0..da)
        .flat_map(|i| (0..da).map(move |j| (i, j)))
        .map(|(i, j)| kron(&Mat::unit(da, i, j), &id_b))
        .collect();
    let a_space = OperatorSpace::span(n, &a_basis, tol)?;
    let d_basis: Vec<Mat> = (0..dd)
        .flat_map(|i| (0..dd).map(move |j| (i, j)))
        .map(|(i, j)| &(&u_adj * &kron(&id_c, &Mat::unit(dd, i, j))) * u)
        .collect();
    let d_commutant = commutant_dim(n, &d_basis, tol)?;
    let meet = intersect(&a_space, &d_commutant, tol)?;
    let alg = Algebra {
        space: meet,
        closed: Closure {
            adjoint: true,
            product: true,
            identity: true,
        },
    };
    let z = center(&alg, tol)?;
    let minimal = minimal_projectors(&z, tol, seed)?;

    let mut factors = Vec::with_capacity(minimal.len());
    for pi in &minimal {
        let pa = partial_trace_second(pi.mat(), da, db).scale(Cplx::new(1.0 / db as f64, 0.0));
        let residual = pi.mat().max_abs_diff(&kron(&pa, &id_b));
        if residual > tol.eig {
            return Err(Error::FactorizationFailure { residual });
        }
        let pa = Projector::new(pa.hermitian_part(), tol.loosened(100.0))
            .map_err(|_| Error::FactorizationFailure { residual })?;
        factors.push(pa);
    }
    Decomposition::new(factors, tol.loosened(100.0))
}
