//! Full analysis of a scenario: ABL table, logicality, chains, verdict,
//! atom counts and the consistent assignment.

use std::fmt::Write as _;

use serde::Serialize;

use crate::boolean::{certify_paradox, scenario_atoms, ParadoxVerdict};
use crate::error::{Error, Result};
use crate::files::Tolerances;
use crate::matrix::Tol;
use crate::scenario::{abl_binary, has_noncommutation_chain, logical_value, PpsScenario};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblRow {
    pub generator: String,
    pub probability: f64,
    pub numerator: f64,
    pub denominator: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainRow {
    pub generator: String,
    pub chain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomsSummary {
    pub generators: usize,
    pub total: usize,
    pub nonzero: usize,
    pub zero: usize,
    pub borderline: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignmentRow {
    /// Sign strings of the atoms making up the event.
    pub atoms: Vec<String>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub abl_table: Vec<AblRow>,
    pub logical: bool,
    pub chains: Vec<ChainRow>,
    pub verdict: Option<ParadoxVerdict>,
    /// Why no verdict was issued.
    pub reason: Option<String>,
    /// Absent when the generators do not commute.
    pub atoms_summary: Option<AtomsSummary>,
    /// Present for consistent verdicts.
    pub assignment: Option<Vec<AssignmentRow>>,
    pub tolerances: Tolerances,
}

/// Runs every analysis on `scenario`. Non-commuting or non-logical
/// scenarios get a `reason` instead of a verdict; numerical breakdowns are
/// returned as errors.
pub fn run_report(scenario: &PpsScenario, tol: Tol) -> Result<Report> {
    let (pre, post) = (scenario.pre_projector(), scenario.post_projector());
    let mut abl_table = Vec::new();
    let mut chains = Vec::new();
    let mut logical = true;
    for g in scenario.generators() {
        let r = abl_binary(scenario, &g.proj, tol)?;
        logical &= logical_value(r.probability, tol.eq).is_some();
        abl_table.push(AblRow {
            generator: g.name.clone(),
            probability: r.probability,
            numerator: r.numerator,
            denominator: r.denominator,
        });
        chains.push(ChainRow {
            generator: g.name.clone(),
            chain: has_noncommutation_chain(&g.proj, &pre, &post, tol)?,
        });
    }

    let atoms = match scenario_atoms(scenario, tol) {
        Ok(a) => Some(a),
        Err(Error::NonCommutingGenerators { .. }) | Err(Error::TooManyGenerators { .. }) => None,
        Err(e) => return Err(e),
    };
    let atoms_summary = atoms.as_ref().map(|a| AtomsSummary {
        generators: a.generator_count(),
        total: a.len(),
        nonzero: a.nonzero().len(),
        zero: a.zero_signs().len(),
        borderline: a.borderline().iter().map(|&s| a.label(s)).collect(),
    });

    let (verdict, reason) = match certify_paradox(scenario, tol) {
        Ok(v) => (Some(v), None),
        Err(e @ (Error::Unsupported(_) | Error::NotLogical(_) | Error::TooManyGenerators { .. })) => {
            (None, Some(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let assignment = match (&verdict, &atoms) {
        (Some(ParadoxVerdict::Consistent { assignment, .. }), Some(a)) => Some(
            assignment
                .values
                .iter()
                .map(|(k, v)| AssignmentRow {
                    atoms: a.signs_of(*k).into_iter().map(|s| a.label(s)).collect(),
                    value: *v,
                })
                .collect(),
        ),
        _ => None,
    };
    Ok(Report {
        abl_table,
        logical,
        chains,
        verdict,
        reason,
        atoms_summary,
        assignment,
        tolerances: tol.into(),
    })
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ABL values");
        for r in &self.abl_table {
            let _ = writeln!(s, "  {:<20} {:.12}", r.generator, r.probability);
        }
        let _ = writeln!(s, "logical: {}", self.logical);
        let _ = writeln!(s, "non-commutation chains");
        for c in &self.chains {
            let _ = writeln!(s, "  {:<20} {}", c.generator, c.chain);
        }
        if let Some(a) = &self.atoms_summary {
            let _ = writeln!(
                s,
                "atoms: {} total, {} nonzero, {} zero",
                a.total, a.nonzero, a.zero
            );
            if !a.borderline.is_empty() {
                let _ = writeln!(s, "  borderline: {}", a.borderline.join(", "));
            }
        }
        match (&self.verdict, &self.reason) {
            (Some(ParadoxVerdict::Paradox { witness, .. }), _) => {
                let _ = writeln!(s, "verdict: Paradox");
                for l in &witness.literals {
                    let _ = writeln!(s, "  {} = {}", l.generator, u8::from(l.value));
                }
                let _ = writeln!(s, "  product norm: {:e}", witness.product_norm);
                let _ = writeln!(s, "  {}", witness.violated);
            }
            (Some(ParadoxVerdict::Consistent { selected_atom, source, .. }), _) => {
                let _ = writeln!(s, "verdict: Consistent (atom {selected_atom}, {source:?} assignment)");
            }
            (None, Some(r)) => {
                let _ = writeln!(s, "verdict: none ({r})");
            }
            (None, None) => {}
        }
        if let Some(rows) = &self.assignment {
            let _ = writeln!(s, "assignment");
            for r in rows {
                let _ = writeln!(s, "  {{{}}} -> {:.12}", r.atoms.join(","), r.value);
            }
        }
        let _ = writeln!(s, "tolerances: eq={:e} eig={:e}", self.tolerances.eq, self.tolerances.eig);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{build_chain_free, build_pigeonhole};
    use crate::matrix::gates::{ket0, ket_plus};
    use crate::matrix::projector_from_state;
    use crate::scenario::Generator;

    #[test]
    fn pigeonhole_report() {
        let r = run_report(&build_pigeonhole(), Tol::default()).unwrap();
        assert!(r.logical);
        assert!(r.chains.iter().all(|c| c.chain));
        assert!(r.verdict.as_ref().unwrap().is_paradox());
        assert!(r.assignment.is_none());
        assert_eq!(r.atoms_summary.as_ref().unwrap().nonzero, 4);
        assert!(r.to_text().contains("verdict: Paradox"));
    }

    #[test]
    fn chain_free_report_has_binary_assignment() {
        let r = run_report(&build_chain_free(), Tol::default()).unwrap();
        assert!(!r.verdict.as_ref().unwrap().is_paradox());
        let rows = r.assignment.unwrap();
        assert_eq!(rows.len(), 16);
        assert!(rows.iter().all(|row| row.value.abs() < 1e-12 || (row.value - 1.0).abs() < 1e-12));
    }

    #[test]
    fn non_logical_report() {
        let s = PpsScenario::new(
            ket0(),
            ket0(),
            vec![Generator::new("plus", projector_from_state(&ket_plus()).unwrap())],
            Tol::default(),
        )
        .unwrap();
        let r = run_report(&s, Tol::default()).unwrap();
        assert!(!r.logical);
        assert!(r.verdict.is_none());
        assert!(r.reason.unwrap().contains("not logical"));
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_report(&build_chain_free(), Tol::default()).unwrap().to_json();
        let b = run_report(&build_chain_free(), Tol::default()).unwrap().to_json();
        assert_eq!(a, b);
    }
}
