//! Pre- and post-selected scenarios and the ABL rule.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{
    commutator_norm, inner, projector_from_state, vec_norm, Cplx, Mat, Projector, StateVec, Tol,
};

/// A named intermediate-measurement projector `P`; its complement `I − P`
/// is implied.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub name: String,
    pub proj: Projector,
}

impl Generator {
    pub fn new(name: impl Into<String>, proj: Projector) -> Self {
        Generator {
            name: name.into(),
            proj,
        }
    }
}

/// Pre-selected state `|ψ⟩`, post-selected state `|φ⟩` (stored as a ket) and
/// the intermediate generators.
#[derive(Debug, Clone, PartialEq)]
pub struct PpsScenario {
    dim: usize,
    pre: StateVec,
    post: StateVec,
    generators: Vec<Generator>,
    overlap: f64,
}

impl PpsScenario {
    /// Rejects orthogonal pre/post pairs, mismatched dimensions and duplicate
    /// generator names.
    pub fn new(pre: StateVec, post: StateVec, generators: Vec<Generator>, tol: Tol) -> Result<Self> {
        let dim = pre.dim();
        if post.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: post.dim(),
            });
        }
        let mut seen = HashSet::new();
        for g in &generators {
            if g.proj.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: g.proj.dim(),
                });
            }
            if !seen.insert(g.name.as_str()) {
                return Err(Error::DuplicateName(g.name.clone()));
            }
        }
        // Tr(PψPφ) = |⟨φ|ψ⟩|²
        let overlap = post.inner(&pre).norm_sqr();
        if overlap <= tol.eq {
            return Err(Error::DegenerateSelection { weight: overlap });
        }
        Ok(PpsScenario {
            dim,
            pre,
            post,
            generators,
            overlap,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pre(&self) -> &StateVec {
        &self.pre
    }

    pub fn post(&self) -> &StateVec {
        &self.post
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator(&self, name: &str) -> Option<&Generator> {
        self.generators.iter().find(|g| g.name == name)
    }

    pub fn generator_projectors(&self) -> Vec<Projector> {
        self.generators.iter().map(|g| g.proj.clone()).collect()
    }

    /// `Tr(PψPφ) = |⟨φ|ψ⟩|²`.
    pub fn overlap(&self) -> f64 {
        self.overlap
    }

    pub fn pre_projector(&self) -> Projector {
        projector_from_state(&self.pre).expect("validated state")
    }

    pub fn post_projector(&self) -> Projector {
        projector_from_state(&self.post).expect("validated state")
    }

    /// `⟨φ|M|ψ⟩`.
    pub fn amplitude(&self, m: &Mat) -> Cplx {
        inner(self.post.amplitudes(), &m.apply(self.pre.amplitudes()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AblResult {
    pub probability: f64,
    pub numerator: f64,
    pub denominator: f64,
}

/// Checks that `partition` is a complete family of mutually orthogonal
/// projectors.
pub fn validate_partition(partition: &[Projector], dim: usize, tol: Tol) -> Result<()> {
    if partition.is_empty() {
        return Err(Error::PartitionInvalid("empty partition".into()));
    }
    let mut sum = Mat::zeros(dim, dim);
    for (i, p) in partition.iter().enumerate() {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        for (j, q) in partition.iter().enumerate().skip(i + 1) {
            let overlap = (p.mat() * q.mat()).max_abs();
            if overlap > tol.eq {
                return Err(Error::PartitionInvalid(format!(
                    "cells {i} and {j} overlap (norm {overlap:e})"
                )));
            }
        }
        sum = &sum + p.mat();
    }
    let gap = sum.max_abs_diff(&Mat::identity(dim));
    if gap > tol.eq {
        return Err(Error::PartitionInvalid(format!(
            "cells do not sum to identity (deviation {gap:e})"
        )));
    }
    Ok(())
}

/// ABL probability of `partition[outcome]` given the scenario's pre- and
/// post-selection:
/// `|⟨φ|P_k|ψ⟩|² / Σᵢ |⟨φ|Pᵢ|ψ⟩|²`.
pub fn abl_probability(
    scenario: &PpsScenario,
    partition: &[Projector],
    outcome: usize,
    tol: Tol,
) -> Result<AblResult> {
    validate_partition(partition, scenario.dim(), tol)?;
    if outcome >= partition.len() {
        return Err(Error::IndexOutOfRange {
            index: outcome,
            len: partition.len(),
        });
    }
    let weights: Vec<f64> = partition
        .iter()
        .map(|p| scenario.amplitude(p.mat()).norm_sqr())
        .collect();
    let denominator: f64 = weights.iter().sum();
    if denominator <= tol.eq {
        return Err(Error::DegenerateSelection {
            weight: denominator,
        });
    }
    let numerator = weights[outcome];
    Ok(AblResult {
        probability: numerator / denominator,
        numerator,
        denominator,
    })
}

/// ABL probability of `P` in the binary measurement `{P, I − P}`.
pub fn abl_binary(scenario: &PpsScenario, p: &Projector, tol: Tol) -> Result<AblResult> {
    abl_probability(scenario, &[p.clone(), p.complement()], 0, tol)
}

/// Snaps a probability to 0 or 1 when it lies within `tol` of either.
pub fn logical_value(probability: f64, tol: f64) -> Option<bool> {
    if probability.abs() <= tol {
        Some(false)
    } else if (probability - 1.0).abs() <= tol {
        Some(true)
    } else {
        None
    }
}

/// True iff every generator receives ABL probability 0 or 1.
pub fn is_logical(scenario: &PpsScenario, tol: Tol) -> Result<bool> {
    for g in scenario.generators() {
        let r = abl_binary(scenario, &g.proj, tol)?;
        if logical_value(r.probability, tol.eq).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CommutationClass {
    /// `P|s⟩ = |s⟩`
    IdempotentCommute,
    /// `P|s⟩ = 0`
    OrthogonalCommute,
    NonCommuting,
}

impl CommutationClass {
    pub fn commutes(self) -> bool {
        self != CommutationClass::NonCommuting
    }
}

/// Classifies `P` against the rank-1 projector `|s⟩⟨s|` by its action on `|s⟩`.
pub fn classify_commutation(p: &Projector, state: &StateVec, tol: Tol) -> Result<CommutationClass> {
    if p.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: state.dim(),
        });
    }
    let image = p.mat().apply(state.amplitudes());
    let fixed: Vec<_> = image
        .iter()
        .zip(state.amplitudes())
        .map(|(a, b)| a - b)
        .collect();
    Ok(if vec_norm(&fixed) <= tol.eq {
        CommutationClass::IdempotentCommute
    } else if vec_norm(&image) <= tol.eq {
        CommutationClass::OrthogonalCommute
    } else {
        CommutationClass::NonCommuting
    })
}

/// True iff `P` commutes with neither `p_pre` nor `p_post`.
pub fn has_noncommutation_chain(
    p: &Projector,
    p_pre: &Projector,
    p_post: &Projector,
    tol: Tol,
) -> Result<bool> {
    Ok(commutator_norm(p.mat(), p_pre.mat())? > tol.eq
        && commutator_norm(p.mat(), p_post.mat())? > tol.eq)
}

/// Checks that `P` idempotently commutes with `|s⟩⟨s|` exactly when `I − P`
/// orthogonally commutes with it, and vice versa.
pub fn complement_duality(p: &Projector, state: &StateVec, tol: Tol) -> Result<bool> {
    use CommutationClass::*;
    let direct = classify_commutation(p, state, tol)?;
    let complement = classify_commutation(&p.complement(), state, tol)?;
    let consistent = (direct == IdempotentCommute) == (complement == OrthogonalCommute)
        && (direct == OrthogonalCommute) == (complement == IdempotentCommute);
    if consistent {
        Ok(true)
    } else {
        Err(Error::CounterexampleFound(format!(
            "P classified {direct:?} but I − P classified {complement:?}"
        )))
    }
}
