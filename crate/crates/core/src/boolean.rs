//! Atoms, event spaces and partial Boolean algebras generated by projectors,
//! and certification of logical pre/post-selection paradoxes.
//!
//! For commuting generators `P₁ … Pₙ` every sign string `s ∈ {0,1}ⁿ` selects
//! an atom `Q_s = P̃₁ ⋯ P̃ₙ` with `P̃ᵢ = Pᵢ` when bit `i` of `s` is set and
//! `I − Pᵢ` otherwise. The nonzero atoms are orthogonal, sum to `I`, and their
//! subset sums form the event space. An [`EventKey`] is a bitmask over the
//! nonzero atoms in ascending sign-string order.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{commutator_norm, inner, Mat, Projector, Tol};
use crate::scenario::{abl_binary, has_noncommutation_chain, logical_value, PpsScenario};

/// Upper bound on generators handed to [`build_atoms`].
pub const MAX_GENERATORS: usize = 20;

/// Event keys are 64-bit masks, so at most this many nonzero atoms.
pub const MAX_NONZERO_ATOMS: usize = 64;

/// Above this many events, [`verify_probability_conditions`] checks the
/// additivity condition on a spanning family of pairs instead of all pairs.
pub const EXHAUSTIVE_PAIR_LIMIT: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    /// Bit `i` set ⇒ factor `Pᵢ`, clear ⇒ `I − Pᵢ`.
    pub signs: u32,
    pub proj: Projector,
    /// Largest entry modulus of `proj`.
    pub norm: f64,
}

/// All `2ⁿ` atoms of a commuting generator family. Only nonzero atoms keep
/// their matrices; zero ones are listed by sign string.
#[derive(Debug, Clone)]
pub struct AtomSet {
    n: usize,
    dim: usize,
    nonzero: Vec<Atom>,
    zero: Vec<u32>,
    borderline: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventKey(pub u64);

impl EventKey {
    pub const EMPTY: EventKey = EventKey(0);

    pub fn union(self, other: EventKey) -> EventKey {
        EventKey(self.0 | other.0)
    }

    pub fn intersection(self, other: EventKey) -> EventKey {
        EventKey(self.0 & other.0)
    }

    pub fn contains(self, position: usize) -> bool {
        self.0 >> position & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for EventKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{:b}}}", self.0)
    }
}

/// Subset sum of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub key: EventKey,
    pub proj: Projector,
}

fn sign_string(signs: u32, n: usize) -> String {
    (0..n)
        .map(|i| if signs >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

impl AtomSet {
    pub fn generator_count(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total atom count, `2ⁿ`.
    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Nonzero atoms in ascending sign-string order; position `k` here is bit
    /// `k` of an [`EventKey`].
    pub fn nonzero(&self) -> &[Atom] {
        &self.nonzero
    }

    /// Sign strings of the zero atoms.
    pub fn zero_signs(&self) -> &[u32] {
        &self.zero
    }

    /// Nonzero atoms whose largest entry is within `100·tol.eq` of zero.
    pub fn borderline(&self) -> &[u32] {
        &self.borderline
    }

    /// Atom projector for a sign string (zero matrix for zero atoms).
    pub fn atom(&self, signs: u32) -> Result<Projector> {
        if signs as usize >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: signs as usize,
                len: self.len(),
            });
        }
        Ok(self
            .position(signs)
            .map(|k| self.nonzero[k].proj.clone())
            .unwrap_or_else(|| Projector::zero(self.dim)))
    }

    fn position(&self, signs: u32) -> Option<usize> {
        self.nonzero.binary_search_by_key(&signs, |a| a.signs).ok()
    }

    /// Human-readable sign string, generator 1 first.
    pub fn label(&self, signs: u32) -> String {
        sign_string(signs, self.n)
    }

    pub fn universe(&self) -> EventKey {
        if self.nonzero.len() == 64 {
            EventKey(u64::MAX)
        } else {
            EventKey((1u64 << self.nonzero.len()) - 1)
        }
    }

    pub fn complement(&self, key: EventKey) -> EventKey {
        EventKey(!key.0 & self.universe().0)
    }

    /// Event whose atoms all carry generator `k` with a `+` sign.
    pub fn generator_key(&self, k: usize) -> EventKey {
        self.key_where(|signs| signs >> k & 1 == 1)
    }

    pub fn key_where(&self, pred: impl Fn(u32) -> bool) -> EventKey {
        let mut mask = 0u64;
        for (pos, atom) in self.nonzero.iter().enumerate() {
            if pred(atom.signs) {
                mask |= 1 << pos;
            }
        }
        EventKey(mask)
    }

    /// Sign strings of the nonzero atoms in `key`.
    pub fn signs_of(&self, key: EventKey) -> Vec<u32> {
        self.nonzero
            .iter()
            .enumerate()
            .filter(|(pos, _)| key.contains(*pos))
            .map(|(_, a)| a.signs)
            .collect()
    }

    /// Sum of the atoms in `key`.
    pub fn event(&self, key: EventKey) -> Event {
        let mut m = Mat::zeros(self.dim, self.dim);
        for (pos, atom) in self.nonzero.iter().enumerate() {
            if key.contains(pos) {
                m = &m + atom.proj.mat();
            }
        }
        Event {
            key,
            proj: Projector::new_unchecked(m),
        }
    }

    /// Every key of the event space, `0 … 2^m − 1` for `m` nonzero atoms.
    pub fn all_keys(&self) -> impl Iterator<Item = EventKey> {
        let m = self.nonzero.len();
        assert!(m < 64, "event space too large to enumerate");
        (0..1u64 << m).map(EventKey)
    }

    /// Materializes the whole event space.
    pub fn event_space(&self) -> Vec<Event> {
        self.all_keys().map(|k| self.event(k)).collect()
    }
}

fn check_commuting(named: &[(String, &Projector)], tol: Tol) -> Result<()> {
    for (i, (a_name, a)) in named.iter().enumerate() {
        for (b_name, b) in &named[i + 1..] {
            let norm = commutator_norm(a.mat(), b.mat())?;
            if norm > tol.eq {
                return Err(Error::NonCommutingGenerators {
                    first: a_name.clone(),
                    second: b_name.clone(),
                    norm,
                });
            }
        }
    }
    Ok(())
}

fn build_atoms_named(named: &[(String, &Projector)], tol: Tol) -> Result<AtomSet> {
    let n = named.len();
    if n > MAX_GENERATORS {
        return Err(Error::TooManyGenerators {
            count: n,
            cap: MAX_GENERATORS,
        });
    }
    let dim = match named.first() {
        Some((_, p)) => p.dim(),
        None => {
            return Err(Error::Validation {
                location: "generators".into(),
                invariant: "at least one generator".into(),
            })
        }
    };
    for (_, p) in named {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
    }
    check_commuting(named, tol)?;

    let literals: Vec<[Mat; 2]> = named
        .iter()
        .map(|(_, p)| [p.complement().into_mat(), p.mat().clone()])
        .collect();

    // depth-first over generators; a zero prefix zeroes every extension
    let mut nonzero = Vec::new();
    let mut zero = Vec::new();
    let mut stack = vec![(0usize, 0u32, Mat::identity(dim))];
    while let Some((depth, signs, prefix)) = stack.pop() {
        if depth == n {
            let norm = prefix.max_abs();
            if norm <= tol.eq {
                zero.push(signs);
            } else {
                nonzero.push(Atom {
                    signs,
                    proj: Projector::new_unchecked(prefix),
                    norm,
                });
            }
            continue;
        }
        if depth > 0 && prefix.max_abs() <= tol.eq {
            let free = n - depth;
            for rest in 0..1u32 << free {
                zero.push(signs | rest << depth);
            }
            continue;
        }
        for bit in 0..2u32 {
            let next = &prefix * &literals[depth][bit as usize];
            stack.push((depth + 1, signs | bit << depth, next));
        }
    }
    nonzero.sort_by_key(|a| a.signs);
    zero.sort_unstable();

    if nonzero.len() > MAX_NONZERO_ATOMS {
        return Err(Error::Unsupported(format!(
            "{} nonzero atoms exceed {MAX_NONZERO_ATOMS}",
            nonzero.len()
        )));
    }

    let check = tol.eq * 10.0;
    let mut total = Mat::zeros(dim, dim);
    for (i, a) in nonzero.iter().enumerate() {
        total = &total + a.proj.mat();
        for b in &nonzero[i + 1..] {
            let overlap = (a.proj.mat() * b.proj.mat()).max_abs();
            if overlap > check {
                return Err(Error::CounterexampleFound(format!(
                    "atoms {} and {} overlap (norm {overlap:e})",
                    sign_string(a.signs, n),
                    sign_string(b.signs, n)
                )));
            }
        }
    }
    let gap = total.max_abs_diff(&Mat::identity(dim));
    if gap > check {
        return Err(Error::CounterexampleFound(format!(
            "atoms sum to identity only within {gap:e}"
        )));
    }

    let borderline = nonzero
        .iter()
        .filter(|a| a.norm <= 100.0 * tol.eq)
        .map(|a| a.signs)
        .collect();
    Ok(AtomSet {
        n,
        dim,
        nonzero,
        zero,
        borderline,
    })
}

/// Builds the `2ⁿ` atoms of pairwise-commuting generators.
pub fn build_atoms(generators: &[Projector], tol: Tol) -> Result<AtomSet> {
    let named: Vec<(String, &Projector)> = generators
        .iter()
        .enumerate()
        .map(|(i, p)| (format!("#{i}"), p))
        .collect();
    build_atoms_named(&named, tol)
}

/// Atoms of a scenario's generators, with generator names in errors.
pub fn scenario_atoms(scenario: &PpsScenario, tol: Tol) -> Result<AtomSet> {
    let named: Vec<(String, &Projector)> = scenario
        .generators()
        .iter()
        .map(|g| (g.name.clone(), &g.proj))
        .collect();
    build_atoms_named(&named, tol)
}

/// Sum of the atoms with the given sign strings; zero atoms contribute nothing.
pub fn event_projector(atoms: &AtomSet, subset: &[u32]) -> Result<Event> {
    let mut mask = 0u64;
    for &signs in subset {
        if signs as usize >= atoms.len() {
            return Err(Error::IndexOutOfRange {
                index: signs as usize,
                len: atoms.len(),
            });
        }
        if let Some(pos) = atoms.position(signs) {
            mask |= 1 << pos;
        }
    }
    Ok(atoms.event(EventKey(mask)))
}

/// Tolerance-aware set of matrices with near-logarithmic membership tests.
///
/// Each matrix is hashed to a fixed random linear functional of its entries;
/// matrices within `tol` entrywise have keys within `tol · Σ|w|`.
struct MatrixSet {
    tol: f64,
    weights: Vec<f64>,
    spread: f64,
    keys: Vec<(f64, usize)>,
    items: Vec<Mat>,
}

impl MatrixSet {
    fn new(entries: usize, tol: f64) -> Self {
        // splitmix64 stream; any fixed weights will do
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let weights: Vec<f64> = (0..2 * entries)
            .map(|_| {
                state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
                let mut z = state;
                z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
                z ^= z >> 31;
                0.5 + (z >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        let spread = weights.iter().sum::<f64>() * tol * 1.01;
        MatrixSet {
            tol,
            weights,
            spread,
            keys: Vec::new(),
            items: Vec::new(),
        }
    }

    fn key(&self, m: &Mat) -> f64 {
        m.as_slice()
            .iter()
            .enumerate()
            .map(|(k, z)| self.weights[2 * k] * z.re + self.weights[2 * k + 1] * z.im)
            .sum()
    }

    fn find(&self, m: &Mat) -> Option<usize> {
        let key = self.key(m);
        let start = self.keys.partition_point(|(k, _)| *k < key - self.spread);
        self.keys[start..]
            .iter()
            .take_while(|(k, _)| *k <= key + self.spread)
            .map(|(_, idx)| *idx)
            .find(|&idx| entrywise_close(&self.items[idx], m, self.tol))
    }

    /// Inserts unless a near-duplicate is present; returns whether inserted.
    fn insert(&mut self, m: Mat) -> bool {
        if self.find(&m).is_some() {
            return false;
        }
        self.push(m);
        true
    }

    /// Appends without a duplicate check.
    fn push(&mut self, m: Mat) {
        let key = self.key(&m);
        let at = self.keys.partition_point(|(k, _)| *k < key);
        self.keys.insert(at, (key, self.items.len()));
        self.items.push(m);
    }

    fn len(&self) -> usize {
        self.items.len()
    }
}

fn entrywise_close(a: &Mat, b: &Mat, tol: f64) -> bool {
    let t2 = tol * tol;
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .all(|(x, y)| (x - y).norm_sqr() <= t2)
}

/// True iff `a` and `b` are tolerance-equal as sets of matrices.
pub fn same_matrix_set(a: &[Mat], b: &[Mat], tol: f64) -> bool {
    let Some(first) = a.first().or(b.first()) else {
        return true;
    };
    let entries = first.rows() * first.cols();
    let index = |items: &[Mat]| {
        let mut set = MatrixSet::new(entries, tol);
        for m in items {
            set.insert(m.clone());
        }
        set
    };
    let (sa, sb) = (index(a), index(b));
    sa.len() == sb.len()
        && sa.items.iter().all(|m| sb.find(m).is_some())
        && sb.items.iter().all(|m| sa.find(m).is_some())
}

/// Smallest set containing `generators` that is closed under complements
/// and under products of commuting members.
///
/// Fails with `ClosureCapExceeded` once more than `cap` distinct projectors
/// have been produced.
pub fn generate_closure(generators: &[Projector], cap: usize, tol: Tol) -> Result<Vec<Projector>> {
    if cap == 0 {
        return Err(Error::Validation {
            location: "cap".into(),
            invariant: "cap ≥ 1".into(),
        });
    }
    let Some(first) = generators.first() else {
        return Ok(Vec::new());
    };
    let dim = first.dim();
    let identity = Mat::identity(dim);
    let mut set = MatrixSet::new(dim * dim, tol.eq);
    let over_cap = |set: &MatrixSet| -> Result<()> {
        if set.len() > cap {
            Err(Error::ClosureCapExceeded {
                cap,
                size: set.len(),
            })
        } else {
            Ok(())
        }
    };
    // Members are stored as complement pairs: items[2k] and items[2k + 1]
    // sum to the identity, so one product XY yields all four literal
    // products X∧Y, X∧¬Y, ¬X∧Y, ¬X∧¬Y.
    let insert_pair = |set: &mut MatrixSet, m: Mat| -> Result<()> {
        if set.find(&m).is_none() {
            let complement = &identity - &m;
            set.push(m);
            set.push(complement);
            over_cap(set)?;
        }
        Ok(())
    };
    for g in generators {
        if g.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: g.dim(),
            });
        }
        insert_pair(&mut set, g.mat().clone())?;
    }
    let mut i = 0;
    while 2 * i < set.len() {
        for j in 0..=i {
            let x = &set.items[2 * i];
            let y = &set.items[2 * j];
            let xy = x * y;
            // for Hermitian X, Y: XY is Hermitian iff XY = YX
            if xy.hermitian_deviation() > tol.eq {
                continue;
            }
            let x_not_y = x - &xy;
            let not_x_y = y - &xy;
            let neither = &set.items[2 * j + 1] - &x_not_y;
            for m in [xy, x_not_y, not_x_y, neither] {
                insert_pair(&mut set, m)?;
            }
        }
        i += 1;
    }
    Ok(set.items.into_iter().map(Projector::new_unchecked).collect())
}

/// `Tr(Pψ P Pφ) / Tr(Pψ Pφ)`.
///
/// The trace collapses to `⟨ψ|P|φ⟩⟨φ|ψ⟩ / |⟨φ|ψ⟩|²`. Returns the real part
/// after checking the imaginary part against `tol.eq`.
pub fn trace_assignment(scenario: &PpsScenario, p: &Projector, tol: Tol) -> Result<f64> {
    if p.dim() != scenario.dim() {
        return Err(Error::DimensionMismatch {
            expected: scenario.dim(),
            found: p.dim(),
        });
    }
    let denominator = scenario.overlap();
    if denominator <= tol.eq {
        return Err(Error::DegenerateSelection {
            weight: denominator,
        });
    }
    let psi = scenario.pre().amplitudes();
    let phi = scenario.post().amplitudes();
    let value = inner(psi, &p.mat().apply(phi)) * inner(phi, psi) / denominator;
    if value.im.abs() > tol.eq {
        return Err(Error::NonRealAssignment { imag: value.im });
    }
    Ok(value.re)
}

/// Probability assignment on events of one [`AtomSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub universe: EventKey,
    pub values: BTreeMap<EventKey, f64>,
}

impl Assignment {
    pub fn new(universe: EventKey) -> Self {
        Assignment {
            universe,
            values: BTreeMap::new(),
        }
    }

    pub fn get(&self, key: EventKey) -> Option<f64> {
        self.values.get(&key).copied()
    }

    pub fn set(&mut self, key: EventKey, value: f64) {
        self.values.insert(key, value);
    }

    pub fn keys(&self) -> Vec<EventKey> {
        self.values.keys().copied().collect()
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.values.iter().map(|(k, v)| (k.0, v)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "condition")]
pub enum Violation {
    /// Condition (i): `0 ≤ f ≤ 1`.
    Range { event: u64, value: f64 },
    /// Condition (ii): `f(I) = 1`, `f(0) = 0`.
    Normalization { event: u64, value: f64, expected: f64 },
    /// Condition (iii): `f(P + Q − PQ) = f(P) + f(Q) − f(PQ)`.
    Additivity { p: u64, q: u64, join: f64, expected: f64 },
    /// The assignment lacks a value the conditions need.
    Undefined { event: u64 },
}

/// Checks the three probability conditions on `events` under `f`.
///
/// All events belong to one event space, so every pair commutes; the join
/// of two events is their key union and the meet their key intersection.
/// Up to [`EXHAUSTIVE_PAIR_LIMIT`] events every unordered pair is tested.
/// Beyond that, each event `S` is paired with its lowest atom `{j}` (as
/// `S∖{j}` and `{j}`) and with its complement; together with condition (ii)
/// these pairs force additivity on every pair.
pub fn verify_probability_conditions(events: &[EventKey], f: &Assignment, tol: Tol) -> Vec<Violation> {
    let mut out = Vec::new();
    let lookup = |key: EventKey, out: &mut Vec<Violation>| -> Option<f64> {
        let v = f.get(key);
        if v.is_none() {
            out.push(Violation::Undefined { event: key.0 });
        }
        v
    };

    for &key in events {
        if let Some(v) = lookup(key, &mut out) {
            if v < -tol.eq || v > 1.0 + tol.eq || !v.is_finite() {
                out.push(Violation::Range { event: key.0, value: v });
            }
        }
    }
    for (key, expected) in [(f.universe, 1.0), (EventKey::EMPTY, 0.0)] {
        if let Some(v) = lookup(key, &mut out) {
            if (v - expected).abs() > tol.eq {
                out.push(Violation::Normalization {
                    event: key.0,
                    value: v,
                    expected,
                });
            }
        }
    }

    let values: HashMap<EventKey, f64> = f.values.iter().map(|(k, v)| (*k, *v)).collect();
    let check_pair = |p: EventKey, q: EventKey, out: &mut Vec<Violation>| {
        let fetch = |k: EventKey, out: &mut Vec<Violation>| {
            let v = values.get(&k).copied();
            if v.is_none() {
                out.push(Violation::Undefined { event: k.0 });
            }
            v
        };
        let (Some(fp), Some(fq), Some(join), Some(meet)) = (
            fetch(p, out),
            fetch(q, out),
            fetch(p.union(q), out),
            fetch(p.intersection(q), out),
        ) else {
            return;
        };
        let expected = fp + fq - meet;
        if (join - expected).abs() > tol.eq {
            out.push(Violation::Additivity {
                p: p.0,
                q: q.0,
                join,
                expected,
            });
        }
    };

    if events.len() <= EXHAUSTIVE_PAIR_LIMIT {
        for (i, &p) in events.iter().enumerate() {
            for &q in &events[i..] {
                check_pair(p, q, &mut out);
            }
        }
    } else {
        for &s in events {
            if s.is_empty() {
                continue;
            }
            let low = EventKey(s.0 & s.0.wrapping_neg());
            check_pair(EventKey(s.0 & !low.0), low, &mut out);
            check_pair(s, EventKey(!s.0 & f.universe.0), &mut out);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Literal {
    pub generator: String,
    /// ABL value forced on the generator.
    pub value: bool,
}

/// Why no probability function extends the ABL values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParadoxWitness {
    /// Each generator with its ABL value; the product of the selected
    /// projectors (`P` for value 1, `I − P` for value 0) must carry probability 1.
    pub literals: Vec<Literal>,
    /// That product, which vanishes.
    pub product: Mat,
    pub product_norm: f64,
    pub violated: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AssignmentSource {
    /// `Tr(Pψ E Pφ)/Tr(PψPφ)` on every event.
    Trace,
    /// Point mass on the selected atom; used when the trace assignment is
    /// not a valid probability function.
    PointMass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ParadoxVerdict {
    Paradox {
        witness: ParadoxWitness,
        borderline_atoms: Vec<String>,
    },
    Consistent {
        /// Sign string of the atom selected by the ABL values.
        selected_atom: String,
        source: AssignmentSource,
        #[serde(skip)]
        assignment: Assignment,
        borderline_atoms: Vec<String>,
    },
}

impl ParadoxVerdict {
    pub fn is_paradox(&self) -> bool {
        matches!(self, ParadoxVerdict::Paradox { .. })
    }
}

/// ABL value of each generator, failing with `NotLogical` on anything other
/// than 0 or 1.
pub fn logical_values(scenario: &PpsScenario, tol: Tol) -> Result<Vec<bool>> {
    scenario
        .generators()
        .iter()
        .map(|g| {
            let r = abl_binary(scenario, &g.proj, tol)?;
            logical_value(r.probability, tol.eq).ok_or_else(|| {
                Error::NotLogical(format!("ABL({}) = {}", g.name, r.probability))
            })
        })
        .collect()
}

/// Decides whether the 0/1 ABL values of commuting generators extend to a
/// probability function on the generated Boolean algebra.
///
/// A 0/1 measure must put all its weight on the single atom selected by the
/// ABL values; the scenario is a paradox exactly when that atom is zero.
pub fn certify_paradox(scenario: &PpsScenario, tol: Tol) -> Result<ParadoxVerdict> {
    let named: Vec<(String, &Projector)> = scenario
        .generators()
        .iter()
        .map(|g| (g.name.clone(), &g.proj))
        .collect();
    if let Err(Error::NonCommutingGenerators { first, second, norm }) = check_commuting(&named, tol) {
        return Err(Error::Unsupported(format!(
            "generators {first} and {second} do not commute (norm {norm:e})"
        )));
    }
    let values = logical_values(scenario, tol)?;

    let dim = scenario.dim();
    let mut product = Mat::identity(dim);
    for (g, &v) in scenario.generators().iter().zip(&values) {
        let literal = if v { g.proj.clone() } else { g.proj.complement() };
        product = &product * literal.mat();
    }
    let product_norm = product.max_abs();
    let atoms = scenario_atoms(scenario, tol)?;
    let borderline_atoms = atoms.borderline().iter().map(|&s| atoms.label(s)).collect();

    if product_norm <= tol.eq {
        let literals = scenario
            .generators()
            .iter()
            .zip(&values)
            .map(|(g, &value)| Literal {
                generator: g.name.clone(),
                value,
            })
            .collect();
        return Ok(ParadoxVerdict::Paradox {
            witness: ParadoxWitness {
                literals,
                product,
                product_norm,
                violated: "the selected projectors all carry probability 1, so their product \
                           does too; it is the zero projector, giving f(0) = 1 against \
                           conditions (i)/(ii)"
                    .into(),
            },
            borderline_atoms,
        });
    }

    let selected: u32 = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v)
        .map(|(i, _)| 1u32 << i)
        .sum();
    let selected_key = atoms.key_where(|s| s == selected);
    let keys: Vec<EventKey> = atoms.all_keys().collect();

    if let Some(assignment) = trace_measure(scenario, &atoms, &keys, tol) {
        if verify_probability_conditions(&keys, &assignment, tol).is_empty() {
            return Ok(ParadoxVerdict::Consistent {
                selected_atom: atoms.label(selected),
                source: AssignmentSource::Trace,
                assignment,
                borderline_atoms,
            });
        }
    }

    let mut assignment = Assignment::new(atoms.universe());
    for &k in &keys {
        let v = if k.intersection(selected_key).is_empty() { 0.0 } else { 1.0 };
        assignment.set(k, v);
    }
    let violations = verify_probability_conditions(&keys, &assignment, tol);
    if !violations.is_empty() {
        return Err(Error::CounterexampleFound(format!(
            "point-mass assignment violates {violations:?}"
        )));
    }
    Ok(ParadoxVerdict::Consistent {
        selected_atom: atoms.label(selected),
        source: AssignmentSource::PointMass,
        assignment,
        borderline_atoms,
    })
}

fn trace_measure(scenario: &PpsScenario, atoms: &AtomSet, keys: &[EventKey], tol: Tol) -> Option<Assignment> {
    let mut assignment = Assignment::new(atoms.universe());
    for &k in keys {
        let value = trace_assignment(scenario, &atoms.event(k).proj, tol).ok()?;
        assignment.set(k, value);
    }
    Some(assignment)
}

/// Names of generators forming a non-commutation chain with `Pψ` and `Pφ`.
pub fn chain_generators(scenario: &PpsScenario, tol: Tol) -> Result<Vec<String>> {
    let (pre, post) = (scenario.pre_projector(), scenario.post_projector());
    let mut out = Vec::new();
    for g in scenario.generators() {
        if has_noncommutation_chain(&g.proj, &pre, &post, tol)? {
            out.push(g.name.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{build_chain_free, build_pigeonhole, build_three_box};
    use crate::matrix::gates::*;
    use crate::matrix::{kron_all, projector_from_state, ONE, ZERO};

    fn tol() -> Tol {
        Tol::default()
    }

    fn proj(s: &crate::matrix::StateVec) -> Projector {
        projector_from_state(s).unwrap()
    }

    /// Oracle: `Tr(Pψ P Pφ)/Tr(PψPφ)` with explicit matrix products.
    fn trace_oracle(s: &PpsScenario, p: &Projector) -> crate::matrix::Cplx {
        let pre = s.pre_projector();
        let post = s.post_projector();
        let num = (&(pre.mat() * p.mat()) * post.mat()).trace();
        let den = (pre.mat() * post.mat()).trace();
        num / den
    }

    #[test]
    fn single_generator_atoms() {
        let p0 = proj(&ket0());
        let atoms = build_atoms(&[p0.clone()], tol()).unwrap();
        assert_eq!(atoms.len(), 2);
        assert_eq!(atoms.nonzero().len(), 2);
        assert_eq!(atoms.atom(1).unwrap(), p0);
        assert_eq!(atoms.atom(0).unwrap(), proj(&ket1()));
    }

    #[test]
    fn pigeonhole_atoms() {
        let s = build_pigeonhole();
        let atoms = scenario_atoms(&s, tol()).unwrap();
        assert_eq!(atoms.len(), 8);
        // all three pairs different is impossible with two boxes
        assert!(atoms.zero_signs().contains(&0b111));
        assert!(atoms.atom(0b111).unwrap().is_zero(tol()));
        assert_eq!(atoms.nonzero().len(), 4);
        let labels: Vec<String> = atoms.nonzero().iter().map(|a| atoms.label(a.signs)).collect();
        assert_eq!(labels, vec!["000", "110", "101", "011"]);
    }

    #[test]
    fn equal_generators_zero_the_mixed_atoms() {
        let p = proj(&ket_plus());
        let atoms = build_atoms(&[p.clone(), p], tol()).unwrap();
        assert_eq!(atoms.zero_signs(), &[0b01, 0b10]);
    }

    #[test]
    fn non_commuting_generators_rejected() {
        let err = build_atoms(&[proj(&ket0()), proj(&ket_plus())], tol()).unwrap_err();
        assert!(matches!(err, Error::NonCommutingGenerators { .. }));
        let many = vec![Projector::identity(2); MAX_GENERATORS + 1];
        assert!(matches!(
            build_atoms(&many, tol()),
            Err(Error::TooManyGenerators { .. })
        ));
    }

    #[test]
    fn event_projectors() {
        let s = build_pigeonhole();
        let atoms = scenario_atoms(&s, tol()).unwrap();
        assert!(event_projector(&atoms, &[]).unwrap().proj.is_zero(tol()));
        let all: Vec<u32> = (0..8).collect();
        let full = event_projector(&atoms, &all).unwrap();
        assert!(full.proj.mat().approx_eq(&Mat::identity(8), 1e-12));
        assert_eq!(full.key, atoms.universe());
        // each generator is the sum of atoms with its bit set
        for (k, g) in s.generators().iter().enumerate() {
            let subset: Vec<u32> = (0..8u32).filter(|s| s >> k & 1 == 1).collect();
            let e = event_projector(&atoms, &subset).unwrap();
            assert!(e.proj.mat().approx_eq(g.proj.mat(), 1e-12), "{}", g.name);
            assert_eq!(e.key, atoms.generator_key(k));
        }
        assert!(event_projector(&atoms, &[8]).is_err());
    }

    #[test]
    fn event_algebra_matches_set_algebra() {
        let s = build_pigeonhole();
        let atoms = scenario_atoms(&s, tol()).unwrap();
        let id = Mat::identity(8);
        for a in atoms.all_keys() {
            for b in atoms.all_keys() {
                let (p, q) = (atoms.event(a).proj, atoms.event(b).proj);
                let pq = p.mat() * q.mat();
                assert!(pq.approx_eq(atoms.event(a.intersection(b)).proj.mat(), 1e-12));
                let join = &(p.mat() + q.mat()) - &pq;
                assert!(join.approx_eq(atoms.event(a.union(b)).proj.mat(), 1e-12));
            }
            let comp = &id - atoms.event(a).proj.mat();
            assert!(comp.approx_eq(atoms.event(atoms.complement(a)).proj.mat(), 1e-12));
        }
    }

    #[test]
    fn closure_of_single_generator() {
        let p = proj(&ket_plus());
        let closure = generate_closure(&[p.clone()], 100, tol()).unwrap();
        let mats: Vec<Mat> = closure.iter().map(|p| p.mat().clone()).collect();
        let expected = vec![
            Mat::zeros(2, 2),
            Mat::identity(2),
            p.mat().clone(),
            p.complement().into_mat(),
        ];
        assert!(same_matrix_set(&mats, &expected, 1e-12));
    }

    #[test]
    fn closure_of_non_commuting_pair() {
        let (p, q) = (proj(&ket0()), proj(&ket_plus()));
        let closure = generate_closure(&[p.clone(), q.clone()], 100, tol()).unwrap();
        assert_eq!(closure.len(), 6);
        let mats: Vec<Mat> = closure.iter().map(|p| p.mat().clone()).collect();
        let expected = vec![
            Mat::zeros(2, 2),
            Mat::identity(2),
            p.mat().clone(),
            p.complement().into_mat(),
            q.mat().clone(),
            q.complement().into_mat(),
        ];
        assert!(same_matrix_set(&mats, &expected, 1e-12));
    }

    #[test]
    fn closure_equals_event_space_for_pigeonhole() {
        let s = build_pigeonhole();
        let closure = generate_closure(&s.generator_projectors(), 1000, tol()).unwrap();
        let atoms = scenario_atoms(&s, tol()).unwrap();
        let events: Vec<Mat> = atoms.event_space().into_iter().map(|e| e.proj.into_mat()).collect();
        assert_eq!(events.len(), 16);
        let closure: Vec<Mat> = closure.into_iter().map(Projector::into_mat).collect();
        assert!(same_matrix_set(&closure, &events, 1e-9));
    }

    #[test]
    fn closure_cap() {
        let s = build_pigeonhole();
        let err = generate_closure(&s.generator_projectors(), 5, tol()).unwrap_err();
        assert!(matches!(err, Error::ClosureCapExceeded { cap: 5, .. }));
        assert!(generate_closure(&s.generator_projectors(), 0, tol()).is_err());
    }

    #[test]
    fn trace_assignment_values() {
        let s = build_chain_free();
        assert!((trace_assignment(&s, &Projector::identity(4), tol()).unwrap() - 1.0).abs() < 1e-15);
        assert!(trace_assignment(&s, &Projector::zero(4), tol()).unwrap().abs() < 1e-15);
        let p = Projector::new(kron_all([proj(&ket0()).mat(), &Mat::identity(2)]), tol()).unwrap();
        let f = trace_assignment(&s, &p, tol()).unwrap();
        assert!((f - 1.0).abs() < 1e-14);
        assert!((trace_oracle(&s, &p) - ONE).norm() < 1e-14);
    }

    #[test]
    fn trace_assignment_rejects_complex_values() {
        // with chains present f can be complex
        let s = build_pigeonhole();
        let (same, _) = crate::builtin::pair_projectors(0, 1);
        let eye = kron_all([proj(&ket0()).mat(), &Mat::identity(4)]);
        let p = Projector::new(eye, tol()).unwrap();
        let oracle = trace_oracle(&s, &p);
        assert!(oracle.im.abs() > 0.1);
        assert!(matches!(
            trace_assignment(&s, &p, tol()),
            Err(Error::NonRealAssignment { .. })
        ));
        assert!(trace_assignment(&s, &same, tol()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn uniform_qubit_measure_has_no_violations() {
        let atoms = build_atoms(&[proj(&ket0())], tol()).unwrap();
        let mut f = Assignment::new(atoms.universe());
        f.set(EventKey(0b00), 0.0);
        f.set(EventKey(0b01), 0.5);
        f.set(EventKey(0b10), 0.5);
        f.set(EventKey(0b11), 1.0);
        let keys: Vec<EventKey> = atoms.all_keys().collect();
        assert!(verify_probability_conditions(&keys, &f, tol()).is_empty());
    }

    #[test]
    fn zero_event_with_unit_value_is_flagged() {
        let atoms = build_atoms(&[proj(&ket0())], tol()).unwrap();
        let mut f = Assignment::new(atoms.universe());
        f.set(EventKey(0b00), 1.0);
        f.set(EventKey(0b01), 0.5);
        f.set(EventKey(0b10), 0.5);
        f.set(EventKey(0b11), 1.0);
        let keys: Vec<EventKey> = atoms.all_keys().collect();
        let v = verify_probability_conditions(&keys, &f, tol());
        assert!(v.iter().any(|v| matches!(v, Violation::Normalization { event: 0, .. })));
        assert!(v.iter().any(|v| matches!(v, Violation::Additivity { .. })));
    }

    #[test]
    fn missing_values_are_reported() {
        let mut f = Assignment::new(EventKey(0b11));
        f.set(EventKey(0b01), 0.5);
        let v = verify_probability_conditions(&[EventKey(0b01)], &f, tol());
        assert!(v.contains(&Violation::Undefined { event: 0b11 }));
        assert!(v.contains(&Violation::Undefined { event: 0 }));
    }

    #[test]
    fn pigeonhole_is_a_paradox() {
        let s = build_pigeonhole();
        let verdict = certify_paradox(&s, tol()).unwrap();
        let ParadoxVerdict::Paradox { witness, .. } = verdict else {
            panic!("expected paradox, got {verdict:?}");
        };
        assert!(witness.literals.iter().all(|l| l.value));
        assert!(witness.product_norm <= 1e-10);
        assert!(witness.product.is_zero(1e-10));
        assert_eq!(chain_generators(&s, tol()).unwrap().len(), 3);
    }

    #[test]
    fn three_box_is_a_paradox() {
        let verdict = certify_paradox(&build_three_box(), tol()).unwrap();
        assert!(verdict.is_paradox());
    }

    #[test]
    fn chain_free_is_consistent() {
        let s = build_chain_free();
        let verdict = certify_paradox(&s, tol()).unwrap();
        let ParadoxVerdict::Consistent {
            assignment,
            source,
            selected_atom,
            ..
        } = verdict
        else {
            panic!("expected consistent");
        };
        assert_eq!(source, AssignmentSource::Trace);
        assert_eq!(selected_atom, "11");
        for v in assignment.values.values() {
            assert!(v.abs() < 1e-12 || (v - 1.0).abs() < 1e-12);
        }
        assert!(chain_generators(&s, tol()).unwrap().is_empty());
    }

    #[test]
    fn certify_error_paths() {
        let half = PpsScenario::new(
            ket0(),
            ket0(),
            vec![crate::scenario::Generator::new("plus", proj(&ket_plus()))],
            tol(),
        )
        .unwrap();
        assert!(matches!(certify_paradox(&half, tol()), Err(Error::NotLogical(_))));
        let nc = PpsScenario::new(
            ket0(),
            ket0(),
            vec![
                crate::scenario::Generator::new("zero", proj(&ket0())),
                crate::scenario::Generator::new("plus", proj(&ket_plus())),
            ],
            tol(),
        )
        .unwrap();
        assert!(matches!(certify_paradox(&nc, tol()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn consistent_with_chain_falls_back_to_point_mass() {
        // ψ = (1,1,1,1)/2, φ with c_k = conj(φ_k) ψ_k ∝ (1, −1, 1, 1): the
        // generator diag(1,1,0,0) has ⟨φ|P|ψ⟩ = 0 and forms a chain, yet the
        // selected atom diag(0,0,1,1) is nonzero.
        let pre = crate::matrix::StateVec::normalized(vec![ONE; 4]).unwrap();
        let post = crate::matrix::StateVec::normalized(vec![ONE, -ONE, ONE, ONE]).unwrap();
        let p = Projector::new(Mat::diag(&[ONE, ONE, ZERO, ZERO]), tol()).unwrap();
        let s = PpsScenario::new(pre, post, vec![crate::scenario::Generator::new("p", p)], tol())
            .unwrap();
        assert_eq!(chain_generators(&s, tol()).unwrap(), vec!["p".to_string()]);
        let verdict = certify_paradox(&s, tol()).unwrap();
        assert!(!verdict.is_paradox());
    }
}
