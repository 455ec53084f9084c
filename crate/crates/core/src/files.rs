//! Scenario and circuit files (JSON, `format_version` "1").
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major nested
//! arrays of them. The post-selection is stored as a ket.

use serde::{Deserialize, Serialize};

use crate::circuit::{Bubble, Circuit, Decomposition, Decoration, DecorationEntry, Split};
use crate::error::{Error, Result};
use crate::matrix::{is_projector, vec_norm, Cplx, Mat, Projector, StateVec, Tol};
use crate::scenario::{Generator, PpsScenario};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eq: f64,
    pub eig: f64,
}

impl From<Tol> for Tolerances {
    fn from(t: Tol) -> Self {
        Tolerances { eq: t.eq, eig: t.eig }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorEntry {
    pub name: String,
    pub matrix: Vec<Vec<Cplx>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub format_version: String,
    pub dim: usize,
    pub pre: Vec<Cplx>,
    pub post: Vec<Cplx>,
    pub generators: Vec<GeneratorEntry>,
    #[serde(default)]
    pub options: Options,
}

fn parse_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn invalid(location: impl Into<String>, invariant: impl Into<String>) -> Error {
    Error::Validation {
        location: location.into(),
        invariant: invariant.into(),
    }
}

fn check_version(v: &str) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(invalid(
            "format_version",
            format!("format_version must be \"{FORMAT_VERSION}\", found \"{v}\""),
        ));
    }
    Ok(())
}

fn file_tol(options: &Options) -> Result<Option<Tol>> {
    match &options.tolerances {
        None => Ok(None),
        Some(t) => Tol::new(t.eq, t.eig)
            .map(Some)
            .map_err(|e| invalid("options.tolerances", e.to_string())),
    }
}

fn matrix(location: &str, rows: &[Vec<Cplx>], dim: usize) -> Result<Mat> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(invalid(location, format!("matrix must be {dim}x{dim}")));
    }
    let m = Mat::from_rows(rows.to_vec()).map_err(|e| invalid(location, e.to_string()))?;
    if !m.is_finite() {
        return Err(invalid(location, "entries must be finite"));
    }
    Ok(m)
}

fn state(location: &str, label: &str, amps: &[Cplx], dim: usize, tol: Tol) -> Result<StateVec> {
    if amps.len() != dim {
        return Err(invalid(location, format!("{label} length = dim ({} ≠ {dim})", amps.len())));
    }
    if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(invalid(location, format!("{label} amplitudes must be finite")));
    }
    let norm = vec_norm(amps);
    if (norm - 1.0).abs() > tol.eq {
        return Err(invalid(location, format!("{label} norm ≠ 1 (norm = {norm})")));
    }
    StateVec::new(amps.to_vec(), tol).map_err(|e| invalid(location, e.to_string()))
}

/// A parsed scenario with the tolerances recorded in its file, if any.
#[derive(Debug, Clone)]
pub struct ParsedScenario {
    pub scenario: PpsScenario,
    pub tol: Option<Tol>,
}

/// Parses and validates a scenario file. Validation uses the file's own
/// tolerances when present, otherwise `tol`.
pub fn parse_scenario(text: &str, tol: Tol) -> Result<ParsedScenario> {
    let file: ScenarioFile = parse_json(text)?;
    check_version(&file.format_version)?;
    let file_tol = file_tol(&file.options)?;
    let tol = file_tol.unwrap_or(tol);
    if file.dim == 0 {
        return Err(invalid("dim", "dim ≥ 1"));
    }
    let pre = state("pre", "pre-state", &file.pre, file.dim, tol)?;
    let post = state("post", "post-state", &file.post, file.dim, tol)?;
    let mut gens = Vec::with_capacity(file.generators.len());
    for (k, g) in file.generators.iter().enumerate() {
        let location = format!("generators[{k}] ({:?})", g.name);
        if gens.iter().any(|h: &Generator| h.name == g.name) {
            return Err(invalid(location, format!("generator names are unique ({:?} repeats)", g.name)));
        }
        let m = matrix(&location, &g.matrix, file.dim)?;
        if !is_projector(&m, tol)? {
            return Err(invalid(
                location,
                format!("generator {:?} is a projector (Hermitian, idempotent)", g.name),
            ));
        }
        let p = Projector::new(m, tol).map_err(|e| invalid(format!("generators[{k}]"), e.to_string()))?;
        gens.push(Generator::new(g.name.clone(), p));
    }
    let scenario = PpsScenario::new(pre, post, gens, tol).map_err(|e| match e {
        Error::DegenerateSelection { weight } => {
            invalid("pre/post", format!("⟨φ|ψ⟩ ≠ 0 (|⟨φ|ψ⟩|² = {weight:e})"))
        }
        other => other,
    })?;
    Ok(ParsedScenario {
        scenario,
        tol: file_tol,
    })
}

pub fn scenario_file(s: &PpsScenario, tol: Option<Tol>) -> ScenarioFile {
    ScenarioFile {
        format_version: FORMAT_VERSION.into(),
        dim: s.dim(),
        pre: s.pre().amplitudes().to_vec(),
        post: s.post().amplitudes().to_vec(),
        generators: s
            .generators()
            .iter()
            .map(|g| GeneratorEntry {
                name: g.name.clone(),
                matrix: g.proj.mat().to_rows(),
            })
            .collect(),
        options: Options {
            tolerances: tol.map(Tolerances::from),
        },
    }
}

/// Pretty JSON for `s`; `parse_scenario` reads it back entrywise.
pub fn serialize_scenario(s: &PpsScenario, tol: Option<Tol>) -> String {
    serde_json::to_string_pretty(&scenario_file(s, tol)).expect("scenario serializes")
}

/// A decomposition given by keyword or by explicit projectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DecompositionSpec {
    /// `"trivial"` (`{I}`) or `"computational"` (`{|k⟩⟨k|}`).
    Named(String),
    Explicit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        projectors: Vec<Vec<Vec<Cplx>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecorationFileEntry {
    pub wire: usize,
    pub in_cut: usize,
    pub out_cut: usize,
    pub input: DecompositionSpec,
    pub output: DecompositionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub format_version: String,
    pub wire_dims: Vec<usize>,
    pub layers: Vec<Vec<Vec<Cplx>>>,
    #[serde(default)]
    pub bubble: Vec<usize>,
    #[serde(default)]
    pub decoration: Vec<DecorationFileEntry>,
    /// Default `(dA, dB, dC, dD)` for preferred-decomposition runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<[usize; 4]>,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Clone)]
pub struct ParsedCircuit {
    pub circuit: Circuit,
    /// `None` when the file has no bubble.
    pub bubble: Option<Bubble>,
    pub decoration: Decoration,
    pub split: Option<Split>,
    pub tol: Option<Tol>,
}

fn decomposition(location: &str, spec: &DecompositionSpec, dim: usize, tol: Tol) -> Result<Decomposition> {
    match spec {
        DecompositionSpec::Named(name) => match name.as_str() {
            "trivial" => Ok(Decomposition::trivial(dim)),
            "computational" => Ok(Decomposition::computational(dim)),
            other => Err(invalid(
                location,
                format!("decomposition keyword is \"trivial\" or \"computational\", found {other:?}"),
            )),
        },
        DecompositionSpec::Explicit { label, projectors } => {
            let mut ps = Vec::with_capacity(projectors.len());
            for (k, rows) in projectors.iter().enumerate() {
                let loc = format!("{location}.projectors[{k}]");
                let m = matrix(&loc, rows, dim)?;
                ps.push(Projector::new(m, tol).map_err(|e| invalid(loc, e.to_string()))?);
            }
            let d = Decomposition::new(ps, tol).map_err(|e| invalid(location, e.to_string()))?;
            Ok(match label {
                Some(l) => d.labeled(l.clone()),
                None => d,
            })
        }
    }
}

pub fn parse_circuit(text: &str, tol: Tol) -> Result<ParsedCircuit> {
    let file: CircuitFile = parse_json(text)?;
    check_version(&file.format_version)?;
    let file_tol = file_tol(&file.options)?;
    let tol = file_tol.unwrap_or(tol);
    if file.wire_dims.is_empty() || file.wire_dims.contains(&0) {
        return Err(invalid("wire_dims", "at least one wire, every dimension positive"));
    }
    let dim: usize = file.wire_dims.iter().product();
    let mut layers = Vec::with_capacity(file.layers.len());
    for (k, rows) in file.layers.iter().enumerate() {
        let loc = format!("layers[{k}]");
        let m = matrix(&loc, rows, dim)?;
        let deviation = m.unitary_deviation();
        if deviation > tol.eq {
            return Err(invalid(loc, format!("layer is unitary (deviation {deviation:e})")));
        }
        layers.push(m);
    }
    let circuit = Circuit::new(file.wire_dims.clone(), layers, tol)?;
    let mut entries = Vec::with_capacity(file.decoration.len());
    for (k, e) in file.decoration.iter().enumerate() {
        let loc = format!("decoration[{k}]");
        let Some(&d) = file.wire_dims.get(e.wire) else {
            return Err(invalid(loc, format!("wire {} exists", e.wire)));
        };
        if e.in_cut > e.out_cut || e.out_cut > circuit.layer_count() {
            return Err(invalid(loc, "in_cut ≤ out_cut ≤ layer count"));
        }
        entries.push(DecorationEntry {
            wire: e.wire,
            in_cut: e.in_cut,
            out_cut: e.out_cut,
            input: decomposition(&format!("{loc}.input"), &e.input, d, tol)?,
            output: decomposition(&format!("{loc}.output"), &e.output, d, tol)?,
        });
    }
    let bubble = if file.bubble.is_empty() {
        None
    } else {
        if let Some(&w) = file.bubble.iter().find(|&&w| w >= file.wire_dims.len()) {
            return Err(invalid("bubble", format!("wire {w} exists")));
        }
        Some(Bubble::new(file.bubble.clone())?)
    };
    Ok(ParsedCircuit {
        circuit,
        bubble,
        decoration: Decoration::new(entries),
        split: file.split.map(|[a, b, c, d]| (a, b, c, d)),
        tol: file_tol,
    })
}

fn decomposition_spec(d: &Decomposition) -> DecompositionSpec {
    DecompositionSpec::Explicit {
        label: d.label.clone(),
        projectors: d.projectors.iter().map(|p| p.mat().to_rows()).collect(),
    }
}

pub fn circuit_file(
    circuit: &Circuit,
    bubble: Option<&Bubble>,
    decoration: &Decoration,
    split: Option<Split>,
) -> CircuitFile {
    CircuitFile {
        format_version: FORMAT_VERSION.into(),
        wire_dims: circuit.wire_dims().to_vec(),
        layers: circuit.layers().iter().map(Mat::to_rows).collect(),
        bubble: bubble.map(|b| b.wires().to_vec()).unwrap_or_default(),
        decoration: decoration
            .entries()
            .iter()
            .map(|e| DecorationFileEntry {
                wire: e.wire,
                in_cut: e.in_cut,
                out_cut: e.out_cut,
                input: decomposition_spec(&e.input),
                output: decomposition_spec(&e.output),
            })
            .collect(),
        split: split.map(|(a, b, c, d)| [a, b, c, d]),
        options: Options::default(),
    }
}

pub fn serialize_circuit(
    circuit: &Circuit,
    bubble: Option<&Bubble>,
    decoration: &Decoration,
    split: Option<Split>,
) -> String {
    serde_json::to_string_pretty(&circuit_file(circuit, bubble, decoration, split)).expect("circuit serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{build_chain_free, build_pigeonhole, build_three_box, pigeonhole_circuit};
    use crate::matrix::gates::cnot;
    use crate::matrix::ONE;

    fn tol() -> Tol {
        Tol::default()
    }

    fn same_scenario(a: &PpsScenario, b: &PpsScenario) -> bool {
        a.pre() == b.pre()
            && a.post() == b.post()
            && a.generators().len() == b.generators().len()
            && a.generators()
                .iter()
                .zip(b.generators())
                .all(|(g, h)| g.name == h.name && g.proj.mat() == h.proj.mat())
    }

    #[test]
    fn builtins_round_trip_exactly() {
        for s in [build_pigeonhole(), build_three_box(), build_chain_free()] {
            let text = serialize_scenario(&s, None);
            let back = parse_scenario(&text, tol()).unwrap();
            assert!(same_scenario(&s, &back.scenario));
            assert!(back.tol.is_none());
        }
    }

    #[test]
    fn complex_numbers_are_pairs() {
        let text = serialize_scenario(&build_three_box(), Some(Tol::new(1e-9, 1e-7).unwrap()));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["pre"][0].as_array().unwrap().len(), 2);
        assert_eq!(v["generators"][0]["matrix"][0][0], serde_json::json!([1.0, 0.0]));
        assert_eq!(v["options"]["tolerances"]["eq"], serde_json::json!(1e-9));
        let back = parse_scenario(&text, tol()).unwrap();
        assert_eq!(back.tol.unwrap().eq, 1e-9);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_scenario("{\n  \"format_version\": \"1\",\n  \"dim\": x\n}", tol()).unwrap_err();
        let Error::Parse { line, column, .. } = err else {
            panic!("{err:?}");
        };
        assert_eq!(line, 3);
        assert!(column > 0);
    }

    #[test]
    fn unnormalized_pre_state() {
        let mut file = scenario_file(&build_three_box(), None);
        file.pre[0] = ONE;
        let text = serde_json::to_string(&file).unwrap();
        let err = parse_scenario(&text, tol()).unwrap_err();
        let Error::Validation { location, invariant } = err else {
            panic!("{err:?}");
        };
        assert_eq!(location, "pre");
        assert!(invariant.starts_with("pre-state norm ≠ 1"), "{invariant}");
    }

    #[test]
    fn non_idempotent_generator_names_it() {
        let mut file = scenario_file(&build_three_box(), None);
        file.generators[1].matrix[1][1] = Cplx::new(0.5, 0.0);
        let text = serde_json::to_string(&file).unwrap();
        let err = parse_scenario(&text, tol()).unwrap_err();
        assert!(err.to_string().contains("box2"), "{err}");
        assert!(matches!(err, Error::Validation { .. }));
    }

    #[test]
    fn other_validation_failures() {
        let base = scenario_file(&build_three_box(), None);
        let mut f = base.clone();
        f.format_version = "2".into();
        assert!(parse_scenario(&serde_json::to_string(&f).unwrap(), tol()).is_err());
        let mut f = base.clone();
        f.generators[1].name = "box1".into();
        let err = parse_scenario(&serde_json::to_string(&f).unwrap(), tol()).unwrap_err();
        assert!(err.to_string().contains("unique"), "{err}");
        let mut f = base.clone();
        f.post = f.pre.iter().enumerate().map(|(k, _)| if k == 0 { ONE } else { Cplx::new(0.0, 0.0) }).collect();
        f.pre = vec![Cplx::new(0.0, 0.0), ONE, Cplx::new(0.0, 0.0)];
        let err = parse_scenario(&serde_json::to_string(&f).unwrap(), tol()).unwrap_err();
        assert!(err.to_string().contains("⟨φ|ψ⟩"), "{err}");
        let mut f = base;
        f.generators[0].matrix.pop();
        assert!(parse_scenario(&serde_json::to_string(&f).unwrap(), tol()).is_err());
    }

    #[test]
    fn circuit_round_trip() {
        let (c, b, d) = pigeonhole_circuit();
        let text = serialize_circuit(&c, Some(&b), &d, None);
        let back = parse_circuit(&text, tol()).unwrap();
        assert_eq!(back.circuit, c);
        assert_eq!(back.bubble.unwrap(), b);
        assert_eq!(back.decoration, d);
    }

    #[test]
    fn circuit_keywords_and_split() {
        let text = serde_json::json!({
            "format_version": "1",
            "wire_dims": [2, 2],
            "layers": [cnot().to_rows()],
            "bubble": [0, 1],
            "decoration": [
                {"wire": 0, "in_cut": 0, "out_cut": 1, "input": "computational", "output": "trivial"},
                {"wire": 1, "in_cut": 0, "out_cut": 1, "input": "trivial", "output": "computational"}
            ],
            "split": [2, 2, 2, 2]
        })
        .to_string();
        let parsed = parse_circuit(&text, tol()).unwrap();
        assert_eq!(parsed.split, Some((2, 2, 2, 2)));
        assert_eq!(parsed.decoration.len(), 2);
        let bad = text.replace("\"trivial\"", "\"sideways\"");
        assert!(matches!(parse_circuit(&bad, tol()), Err(Error::Validation { .. })));
    }
}
