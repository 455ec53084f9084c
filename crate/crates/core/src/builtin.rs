//! Built-in scenarios.

use crate::circuit::{Bubble, Circuit, Decomposition, Decoration, DecorationEntry};
use crate::matrix::gates::{ket0, ket_plus};
use crate::matrix::{c, kron_all, Cplx, Mat, Projector, StateVec, Tol, ONE, ZERO};
use crate::scenario::{Generator, PpsScenario};

/// Bit of particle `k` (0-based, leftmost tensor factor first) in a
/// three-qubit basis index.
fn particle_bit(index: usize, k: usize) -> usize {
    (index >> (2 - k)) & 1
}

/// `(P_same, P_diff)` for particles `i` and `j` (0-based) of a three-qubit
/// register, tensored with the identity on the remaining particle.
///
/// `P_same = |00⟩⟨00| + |11⟩⟨11|` and `P_diff = |01⟩⟨01| + |10⟩⟨10|` on the pair.
pub fn pair_projectors(i: usize, j: usize) -> (Projector, Projector) {
    assert!(i < 3 && j < 3 && i != j, "particles must be distinct and < 3");
    let same: Vec<Cplx> = (0..8)
        .map(|b| {
            if particle_bit(b, i) == particle_bit(b, j) {
                ONE
            } else {
                ZERO
            }
        })
        .collect();
    let same = Projector::new_unchecked(Mat::diag(&same));
    let diff = same.complement();
    (same, diff)
}

/// Three particles in two boxes: pre-selected in `|+⟩|+⟩|+⟩`, post-selected
/// on `⟨i|⟨i|⟨i|` with `⟨i| = (⟨0| + i⟨1|)/√2`, and one `P_diff` generator per
/// particle pair.
pub fn build_pigeonhole() -> PpsScenario {
    let plus = ket_plus();
    let pre = plus.kron(&plus).kron(&plus);
    // ket of the bra (⟨0| + i⟨1|)/√2
    let bra_i_ket = StateVec::normalized(vec![ONE, c(0.0, -1.0)]).unwrap();
    let post = bra_i_ket.kron(&bra_i_ket).kron(&bra_i_ket);
    let generators = [(0, 1), (1, 2), (0, 2)]
        .into_iter()
        .map(|(i, j)| {
            let (_, diff) = pair_projectors(i, j);
            Generator::new(format!("P_diff({},{})", i + 1, j + 1), diff)
        })
        .collect();
    PpsScenario::new(pre, post, generators, Tol::default()).expect("pigeonhole scenario is valid")
}

/// Three boxes: `ψ = (|1⟩+|2⟩+|3⟩)/√3`, `φ = (|1⟩+|2⟩−|3⟩)/√3`, generators
/// `|1⟩⟨1|` and `|2⟩⟨2|`.
pub fn build_three_box() -> PpsScenario {
    let pre = StateVec::normalized(vec![ONE, ONE, ONE]).unwrap();
    let post = StateVec::normalized(vec![ONE, ONE, -ONE]).unwrap();
    let box_projector = |k: usize| {
        let mut m = Mat::zeros(3, 3);
        m[(k, k)] = ONE;
        Projector::new_unchecked(m)
    };
    let generators = vec![
        Generator::new("box1", box_projector(0)),
        Generator::new("box2", box_projector(1)),
    ];
    PpsScenario::new(pre, post, generators, Tol::default()).expect("three-box scenario is valid")
}

/// Two qubits pre-selected in `|0⟩|+⟩` and post-selected in `|+⟩|0⟩`, with
/// generators `|0⟩⟨0| ⊗ I` (fixes the pre-state) and `I ⊗ |0⟩⟨0|` (fixes the
/// post-state). No generator forms a non-commutation chain.
pub fn build_chain_free() -> PpsScenario {
    let pre = ket0().kron(&ket_plus());
    let post = ket_plus().kron(&ket0());
    let p0 = Mat::outer(ket0().amplitudes(), ket0().amplitudes());
    let id = Mat::identity(2);
    let generators = vec![
        Generator::new("first_zero", Projector::new_unchecked(kron_all([&p0, &id]))),
        Generator::new("second_zero", Projector::new_unchecked(kron_all([&id, &p0]))),
    ];
    PpsScenario::new(pre, post, generators, Tol::default()).expect("chain-free scenario is valid")
}

/// A scenario laid out on one wire with two identity layers: the pre-selection
/// decomposition `{Pψ, I−Pψ}` is the output at cut 0, `decomposition` the
/// output at cut 1, and the post-selection decomposition `{Pφ, I−Pφ}` the
/// input at cut 2.
pub fn scenario_circuit(scenario: &PpsScenario, decomposition: Decomposition) -> (Circuit, Bubble, Decoration) {
    let d = scenario.dim();
    let circuit = Circuit::new(vec![d], vec![Mat::identity(d), Mat::identity(d)], Tol::default())
        .expect("identity layers are unitary");
    let entry = |cut: usize, input: Decomposition, output: Decomposition| DecorationEntry {
        wire: 0,
        in_cut: cut,
        out_cut: cut,
        input,
        output,
    };
    let decoration = Decoration::new(vec![
        entry(
            0,
            Decomposition::trivial(d),
            Decomposition::binary(scenario.pre_projector()).labeled("pre"),
        ),
        entry(1, Decomposition::trivial(d), decomposition),
        entry(
            2,
            Decomposition::binary(scenario.post_projector()).labeled("post"),
            Decomposition::trivial(d),
        ),
    ]);
    (circuit, Bubble::new(vec![0]).unwrap(), decoration)
}

/// The pigeonhole scenario as a circuit, with `{P_same(1,2), P_diff(1,2)}`
/// as the intermediate decomposition.
pub fn pigeonhole_circuit() -> (Circuit, Bubble, Decoration) {
    let (same, diff) = pair_projectors(0, 1);
    let middle = Decomposition::new(vec![same, diff], Tol::default())
        .unwrap()
        .labeled("same/diff(1,2)");
    scenario_circuit(&build_pigeonhole(), middle)
}
