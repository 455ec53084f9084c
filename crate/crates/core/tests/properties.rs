use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pps_core::algebra::{commutant, commutant_dim, generate_algebra, minimal_projectors, DEFAULT_SEED};
use pps_core::boolean::{
    build_atoms, certify_paradox, generate_closure, same_matrix_set, scenario_atoms, trace_assignment,
    verify_probability_conditions, ParadoxVerdict,
};
use pps_core::builtin::{build_chain_free, build_pigeonhole, build_three_box};
use pps_core::circuit::{
    causal_influence, heisenberg_lift, history_from_lifted, lift_decoration, preferred_decomposition, Bubble,
    Circuit, Decomposition, Decoration, DecorationEntry,
};
use pps_core::files::{parse_scenario, serialize_scenario};
use pps_core::matrix::{
    c, commutator_norm, hermitian_eig, is_projector, kron, nullspace_basis, Cplx, ZERO,
};
use pps_core::random;
use pps_core::report::run_report;
use pps_core::scenario::{abl_binary, abl_probability, classify_commutation, has_noncommutation_chain, CommutationClass};
use pps_core::{Mat, PpsScenario, Projector, StateVec, Tol};

fn tol() -> Tol {
    Tol::default()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sum(mats: impl IntoIterator<Item = Mat>, d: usize) -> Mat {
    mats.into_iter().fold(Mat::zeros(d, d), |acc, m| &acc + &m)
}

fn int_matrix(max_dim: usize) -> impl Strategy<Value = Mat> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(|(r, cols)| {
        prop::collection::vec(-4i32..=4, r * cols).prop_map(move |v| {
            Mat::from_vec(r, cols, v.into_iter().map(|x| c(x as f64, 0.0)).collect()).unwrap()
        })
    })
}

/// All `2^k` subset sums of `parts`.
fn subset_sums(parts: &[Mat], d: usize) -> Vec<Mat> {
    (0u32..1 << parts.len())
        .map(|mask| sum((0..parts.len()).filter(|&i| mask >> i & 1 == 1).map(|i| parts[i].clone()), d))
        .collect()
}

fn scenarios_match(a: &PpsScenario, b: &PpsScenario) -> bool {
    let vec_close = |x: &StateVec, y: &StateVec| {
        x.amplitudes()
            .iter()
            .zip(y.amplitudes())
            .all(|(p, q)| (p - q).norm() <= 1e-15)
    };
    vec_close(a.pre(), b.pre())
        && vec_close(a.post(), b.post())
        && a.generators().len() == b.generators().len()
        && a.generators().iter().zip(b.generators()).all(|(g, h)| {
            g.name == h.name && g.proj.mat().max_abs_diff(h.proj.mat()) == 0.0
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // ---- matrices ----

    #[test]
    fn random_projectors_have_binary_spectrum(seed: u64, n in 1usize..=8) {
        let mut r = rng(seed);
        let rank = r.random_range(0..=n);
        let p = random::projector(&mut r, n, rank);
        prop_assert!(is_projector(p.mat(), tol()).unwrap());
        let eig = hermitian_eig(p.mat(), tol()).unwrap();
        for v in eig.values {
            prop_assert!(v.abs() <= tol().eig || (v - 1.0).abs() <= tol().eig, "eigenvalue {}", v);
        }
    }

    #[test]
    fn kron_is_associative(a in int_matrix(3), b in int_matrix(3), m in int_matrix(3)) {
        let left = kron(&kron(&a, &b), &m);
        let right = kron(&a, &kron(&b, &m));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn commutator_norm_is_symmetric(seed: u64, n in 1usize..=6) {
        let mut r = rng(seed);
        let a = random::hermitian(&mut r, n);
        let b = random::unitary(&mut r, n);
        prop_assert_eq!(commutator_norm(&a, &b).unwrap(), commutator_norm(&b, &a).unwrap());
    }

    #[test]
    fn eigendecomposition_reconstructs(seed: u64, n in 1usize..=10) {
        let mut r = rng(seed);
        let m = random::hermitian(&mut r, n);
        let eig = hermitian_eig(&m, tol()).unwrap();
        let rebuilt = sum(
            eig.values.iter().zip(&eig.vectors).map(|(l, v)| Mat::outer(v, v).scale(c(*l, 0.0))),
            n,
        );
        prop_assert!(rebuilt.max_abs_diff(&m) <= 10.0 * tol().eq, "{}", rebuilt.max_abs_diff(&m));
    }

    #[test]
    fn nullspace_has_complementary_dimension(seed: u64, n in 1usize..=10) {
        let mut r = rng(seed);
        let rank = r.random_range(0..=n);
        let (u, v) = (random::unitary(&mut r, n), random::unitary(&mut r, n));
        let singular: Vec<Cplx> = (0..n)
            .map(|k| if k < rank { c(1.0 + k as f64 / n as f64, 0.0) } else { ZERO })
            .collect();
        let m = &(&u * &Mat::diag(&singular)) * &v.adjoint();
        prop_assert_eq!(nullspace_basis(&m, tol()).len(), n - rank);
    }

    // ---- scenarios ----

    #[test]
    fn abl_partition_sums_to_one(seed: u64, n in 1usize..=10) {
        let mut r = rng(seed);
        let s = random::scenario(&mut r, n, 1);
        let cells = r.random_range(1..=n);
        let partition = random::partition(&mut r, n, cells);
        let total: f64 = (0..partition.len())
            .map(|k| abl_probability(&s, &partition, k, tol()).unwrap().probability)
            .sum();
        prop_assert!((total - 1.0).abs() <= 10.0 * tol().eq, "sum {}", total);
    }

    #[test]
    fn commutation_iff_fixed_or_annihilated(seed: u64, n in 2usize..=8) {
        let mut r = rng(seed);
        let (p, s) = random::commutation_pair(&mut r, n);
        let ps = pps_core::matrix::projector_from_state(&s).unwrap();
        let commute = commutator_norm(p.mat(), ps.mat()).unwrap() <= tol().eq;
        let class = classify_commutation(&p, &s, tol()).unwrap();
        prop_assert_eq!(commute, class.commutes());
    }

    #[test]
    fn complement_swaps_fixing_and_annihilating(seed: u64, n in 2usize..=8) {
        let mut r = rng(seed);
        let (p, s) = random::commutation_pair(&mut r, n);
        let direct = classify_commutation(&p, &s, tol()).unwrap();
        let comp = classify_commutation(&p.complement(), &s, tol()).unwrap();
        prop_assert_eq!(
            direct == CommutationClass::IdempotentCommute,
            comp == CommutationClass::OrthogonalCommute
        );
        prop_assert_eq!(
            direct == CommutationClass::OrthogonalCommute,
            comp == CommutationClass::IdempotentCommute
        );
    }

    #[test]
    fn chains_agree_for_complements(seed: u64, n in 2usize..=8) {
        let mut r = rng(seed);
        let s = random::scenario(&mut r, n, 1);
        let (pre, post) = (s.pre_projector(), s.post_projector());
        let p = &s.generators()[0].proj;
        prop_assert_eq!(
            has_noncommutation_chain(p, &pre, &post, tol()).unwrap(),
            has_noncommutation_chain(&p.complement(), &pre, &post, tol()).unwrap()
        );
    }

    #[test]
    fn abl_ignores_global_phases(seed: u64, n in 2usize..=8, a in 0.0f64..6.3, b in 0.0f64..6.3) {
        let mut r = rng(seed);
        let s = random::scenario(&mut r, n, 1);
        let phased = PpsScenario::new(
            s.pre().phased(Cplx::from_polar(1.0, a)),
            s.post().phased(Cplx::from_polar(1.0, b)),
            s.generators().to_vec(),
            tol(),
        )
        .unwrap();
        let p = &s.generators()[0].proj;
        let x = abl_binary(&s, p, tol()).unwrap().probability;
        let y = abl_binary(&phased, p, tol()).unwrap().probability;
        prop_assert!((x - y).abs() <= 10.0 * tol().eq);
    }

    // ---- boolean structure ----

    #[test]
    fn atoms_are_complete_and_orthogonal(seed: u64, d in 1usize..=12, n in 1usize..=5) {
        let mut r = rng(seed);
        let gens = random::commuting_generators(&mut r, d, n);
        let atoms = build_atoms(&gens, tol()).unwrap();
        let total = sum(atoms.nonzero().iter().map(|a| a.proj.mat().clone()), d);
        prop_assert!(total.max_abs_diff(&Mat::identity(d)) <= 10.0 * tol().eq);
        for (i, a) in atoms.nonzero().iter().enumerate() {
            for b in &atoms.nonzero()[i + 1..] {
                prop_assert!((a.proj.mat() * b.proj.mat()).max_abs() <= 10.0 * tol().eq);
            }
        }
    }

    #[test]
    fn generators_are_sums_of_their_atoms(seed: u64, d in 1usize..=12, n in 1usize..=5) {
        let mut r = rng(seed);
        let gens = random::commuting_generators(&mut r, d, n);
        let atoms = build_atoms(&gens, tol()).unwrap();
        for (k, g) in gens.iter().enumerate() {
            let rebuilt = sum(
                atoms.nonzero().iter().filter(|a| a.signs >> k & 1 == 1).map(|a| a.proj.mat().clone()),
                d,
            );
            prop_assert!(rebuilt.max_abs_diff(g.mat()) <= 10.0 * tol().eq);
        }
    }

    #[test]
    fn closure_is_all_atom_subset_sums(seed: u64, d in 1usize..=8, n in 1usize..=4) {
        let mut r = rng(seed);
        let gens = random::commuting_generators(&mut r, d, n);
        let atoms = build_atoms(&gens, tol()).unwrap();
        let parts: Vec<Mat> = atoms.nonzero().iter().map(|a| a.proj.mat().clone()).collect();
        let closure: Vec<Mat> = generate_closure(&gens, 1 << 12, tol())
            .unwrap()
            .into_iter()
            .map(Projector::into_mat)
            .collect();
        prop_assert!(same_matrix_set(&closure, &subset_sums(&parts, d), 1e-9));
    }

    #[test]
    fn chain_free_scenarios_admit_the_trace_assignment(seed: u64, d in 2usize..=10, n in 1usize..=4) {
        let mut r = rng(seed);
        let (s, _) = random::chain_free_scenario(&mut r, d, n);
        let verdict = certify_paradox(&s, tol()).unwrap();
        let ParadoxVerdict::Consistent { assignment, .. } = verdict else {
            return Err(TestCaseError::fail("chain-free scenario reported as paradox"));
        };
        for v in assignment.values.values() {
            prop_assert!(v.abs() <= 1e-8 || (v - 1.0).abs() <= 1e-8, "value {}", v);
        }
        prop_assert!(verify_probability_conditions(&assignment.keys(), &assignment, tol()).is_empty());
    }

    #[test]
    fn paradoxes_come_with_chains(seed: u64, d in 2usize..=8, n in 1usize..=4) {
        let mut r = rng(seed);
        let s = random::logical_scenario(&mut r, d, n);
        if certify_paradox(&s, tol()).unwrap().is_paradox() {
            let (pre, post) = (s.pre_projector(), s.post_projector());
            let mut any = false;
            for g in s.generators() {
                any |= has_noncommutation_chain(&g.proj, &pre, &post, tol()).unwrap();
            }
            prop_assert!(any);
        }
    }

    #[test]
    fn trace_assignment_is_additive(seed: u64, d in 2usize..=10, n in 2usize..=4) {
        let mut r = rng(seed);
        let (s, _) = random::chain_free_scenario(&mut r, d, n);
        let (p, q) = (&s.generators()[0].proj, &s.generators()[1].proj);
        let pq = Projector::new(p.mat() * q.mat(), tol()).unwrap();
        let join = Projector::new(&(p.mat() + q.mat()) - pq.mat(), tol()).unwrap();
        let f = |x: &Projector| trace_assignment(&s, x, tol()).unwrap();
        prop_assert!((f(&join) - (f(p) + f(q) - f(&pq))).abs() <= 10.0 * tol().eq);
    }

    // ---- operator algebras ----

    #[test]
    fn bicommutant_is_generated_algebra(seed: u64, d in 2usize..=6) {
        let mut r = rng(seed);
        let gens = random::hermitian_generators(&mut r, d);
        let alg = generate_algebra(&gens, tol()).unwrap();
        let c1 = commutant(&gens, tol()).unwrap();
        let c2 = commutant_dim(d, c1.basis(), tol()).unwrap();
        prop_assert!(c2.same_span(&alg.space, 1e-8));
    }

    #[test]
    fn commutant_contains_identity_and_adjoints(seed: u64, d in 2usize..=6) {
        let mut r = rng(seed);
        let gens = random::hermitian_generators(&mut r, d);
        let c1 = commutant(&gens, tol()).unwrap();
        prop_assert!(c1.contains(&Mat::identity(d), 10.0 * tol().eq));
        for b in c1.basis() {
            prop_assert!(c1.contains(&b.adjoint(), 1e-8));
        }
    }

    #[test]
    fn minimal_projectors_partition_identity(seed: u64, d in 1usize..=8, n in 1usize..=4) {
        let mut r = rng(seed);
        let projs = random::commuting_generators(&mut r, d, n);
        let gens: Vec<Mat> = projs.iter().map(|p| p.mat().clone()).collect();
        let alg = generate_algebra(&gens, tol()).unwrap();
        let mins = minimal_projectors(&alg.space, tol(), DEFAULT_SEED).unwrap();
        let total = sum(mins.iter().map(|p| p.mat().clone()), d);
        prop_assert!(total.max_abs_diff(&Mat::identity(d)) <= 10.0 * tol().eq);
        for (i, a) in mins.iter().enumerate() {
            prop_assert!(alg.space.residual(a.mat()) <= 10.0 * tol().eq);
            for b in &mins[i + 1..] {
                prop_assert!((a.mat() * b.mat()).max_abs() <= 10.0 * tol().eq);
            }
        }
        // projectors of the algebra are exactly the subset sums
        prop_assert_eq!(mins.len(), alg.space.len());
        let parts: Vec<Mat> = mins.iter().map(|p| p.mat().clone()).collect();
        let sums = subset_sums(&parts, d);
        for s in &sums {
            prop_assert!(is_projector(s, tol().loosened(10.0)).unwrap());
        }
        let atoms = build_atoms(&projs, tol()).unwrap();
        let atom_parts: Vec<Mat> = atoms.nonzero().iter().map(|a| a.proj.mat().clone()).collect();
        prop_assert!(same_matrix_set(&sums, &subset_sums(&atom_parts, d), 1e-8));
    }

    // ---- circuits ----

    #[test]
    fn lifted_decompositions_stay_complete(seed: u64, wires in 1usize..=3, layers in 1usize..=2) {
        let mut r = rng(seed);
        let (circuit, bubble, decoration) = random::decorated_circuit(&mut r, wires, layers);
        let lifted = lift_decoration(&circuit, &bubble, &decoration).unwrap();
        let d = circuit.dim();
        for (ins, outs) in &lifted.lifted {
            for family in [ins, outs] {
                prop_assert!(sum(family.iter().cloned(), d).max_abs_diff(&Mat::identity(d)) <= 10.0 * tol().eq);
                for (i, a) in family.iter().enumerate() {
                    for b in &family[i + 1..] {
                        prop_assert!((a * b).max_abs() <= 10.0 * tol().eq);
                    }
                }
            }
        }
    }

    #[test]
    fn histories_telescope(seed: u64, wires in 1usize..=3, layers in 1usize..=2) {
        let mut r = rng(seed);
        let (circuit, bubble, decoration) = random::decorated_circuit(&mut r, wires, layers);
        let lifted = lift_decoration(&circuit, &bubble, &decoration).unwrap();
        let total: Cplx = decoration
            .selections()
            .iter()
            .map(|sel| history_from_lifted(&lifted, sel, circuit.dim(), tol()).unwrap().value)
            .sum();
        prop_assert!((total - c(1.0, 0.0)).norm() <= 10.0 * tol().eq, "total {}", total);
    }

    #[test]
    fn commuting_decorations_give_probabilities(seed: u64, wires in 1usize..=3, layers in 1usize..=2) {
        let mut r = rng(seed);
        let n = 1 << wires;
        let phases = |r: &mut ChaCha8Rng| {
            let diag: Vec<Cplx> = (0..n).map(|_| Cplx::from_polar(1.0, r.random_range(0.0..6.3))).collect();
            Mat::diag(&diag)
        };
        let circuit = Circuit::new(vec![2; wires], (0..layers).map(|_| phases(&mut r)).collect(), tol()).unwrap();
        let entries = (0..wires)
            .map(|wire| {
                let in_cut = r.random_range(0..=layers);
                let out_cut = r.random_range(in_cut..=layers);
                let pick = |r: &mut ChaCha8Rng| if r.random_bool(0.5) { Decomposition::computational(2) } else { Decomposition::trivial(2) };
                DecorationEntry { wire, in_cut, out_cut, input: pick(&mut r), output: pick(&mut r) }
            })
            .collect();
        let decoration = Decoration::new(entries);
        let bubble = Bubble::new((0..wires).collect()).unwrap();
        let lifted = lift_decoration(&circuit, &bubble, &decoration).unwrap();
        for sel in decoration.selections() {
            let h = history_from_lifted(&lifted, &sel, circuit.dim(), tol()).unwrap();
            prop_assert!(!h.complex);
            prop_assert!(h.value.re >= -10.0 * tol().eq && h.value.re <= 1.0 + 10.0 * tol().eq);
        }
    }

    #[test]
    fn product_unitaries_carry_no_influence(seed: u64, da in 1usize..=3, db in 1usize..=3) {
        let mut r = rng(seed);
        let u = kron(&random::unitary(&mut r, da), &random::unitary(&mut r, db));
        prop_assert!(!causal_influence(&u, (da, db, da, db), tol()).unwrap());
    }

    #[test]
    fn preferred_members_commute_with_d(seed: u64, da in 1usize..=3, db in 1usize..=2, product: bool) {
        let mut r = rng(seed);
        let u = if product {
            kron(&random::unitary(&mut r, da), &random::unitary(&mut r, db))
        } else {
            random::unitary(&mut r, da * db)
        };
        let dims = (da, db, da, db);
        let pref = preferred_decomposition(&u, dims, tol(), DEFAULT_SEED).unwrap();
        let u_adj = u.adjoint();
        for p in &pref.projectors {
            let lifted_a = kron(p.mat(), &Mat::identity(db));
            for i in 0..db {
                for j in 0..db {
                    let d_op = &(&u_adj * &kron(&Mat::identity(da), &Mat::unit(db, i, j))) * &u;
                    prop_assert!(commutator_norm(&lifted_a, &d_op).unwrap() <= 1e-8);
                }
            }
        }
    }

    // ---- files and reports ----

    #[test]
    fn random_scenarios_round_trip(seed: u64, d in 2usize..=6, n in 1usize..=3) {
        let mut r = rng(seed);
        let s = random::scenario(&mut r, d, n);
        let back = parse_scenario(&serialize_scenario(&s, Some(tol())), tol()).unwrap();
        prop_assert!(scenarios_match(&s, &back.scenario));
        prop_assert_eq!(back.tol, Some(tol()));
    }

    #[test]
    fn paradox_reports_list_a_chain(seed: u64, d in 2usize..=8, n in 1usize..=4) {
        let mut r = rng(seed);
        let s = random::logical_scenario(&mut r, d, n);
        let report = run_report(&s, tol()).unwrap();
        prop_assert_eq!(run_report(&s, tol()).unwrap().to_json(), report.to_json());
        if report.verdict.as_ref().is_some_and(ParadoxVerdict::is_paradox) {
            prop_assert!(report.chains.iter().any(|c| c.chain));
        }
    }
}

#[test]
fn builtin_scenarios_round_trip() {
    for s in [build_pigeonhole(), build_three_box(), build_chain_free()] {
        let back = parse_scenario(&serialize_scenario(&s, None), tol()).unwrap();
        assert!(scenarios_match(&s, &back.scenario));
        assert_eq!(back.tol, None);
    }
}

#[test]
fn builtin_atoms_match_scenario_atoms() {
    for s in [build_pigeonhole(), build_chain_free()] {
        let a = scenario_atoms(&s, tol()).unwrap();
        let b = build_atoms(&s.generator_projectors(), tol()).unwrap();
        assert_eq!(a.nonzero().len(), b.nonzero().len());
    }
}

#[test]
fn heisenberg_lift_of_identity_is_identity() {
    let mut r = rng(11);
    let (circuit, _, _) = random::decorated_circuit(&mut r, 2, 2);
    for cut in 0..=circuit.layer_count() {
        let lifted = heisenberg_lift(&circuit, 1, cut, &Mat::identity(2)).unwrap();
        assert!(lifted.max_abs_diff(&Mat::identity(4)) <= 10.0 * tol().eq);
    }
}
