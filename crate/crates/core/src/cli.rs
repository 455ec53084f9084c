//! The `pps` command line. [`run`] takes the argument list and output
//! streams and returns the process exit code.
//!
//! Exit codes: 0 success (or a consistent verdict), 1 parse, validation or
//! usage error, 2 numerical tolerance failure, 3 paradox, 4 no verdict
//! (non-commuting generators or a non-logical scenario).

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::algebra::seed_from_env;
use crate::boolean::{certify_paradox, scenario_atoms, ParadoxVerdict};
use crate::builtin::{build_chain_free, build_pigeonhole, build_three_box, pair_projectors, pigeonhole_circuit};
use crate::circuit::{audit_influences, preferred_decomposition, Bubble, InfluenceViolation, Split};
use crate::error::{Error, Result};
use crate::files::{parse_circuit, parse_scenario, serialize_circuit, serialize_scenario, Tolerances};
use crate::matrix::Tol;
use crate::report::{run_report, Report};
use crate::scenario::{abl_binary, PpsScenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_TOLERANCE: i32 = 2;
pub const EXIT_PARADOX: i32 = 3;
pub const EXIT_UNSUPPORTED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "pps", version, about = "Pre/post-selection paradox certification and causal-circuit analysis")]
pub struct Cli {
    /// Equality tolerance (overrides the file and the default 1e-10).
    #[arg(long, global = true)]
    pub tol_eq: Option<f64>,
    /// Eigenvalue clustering tolerance (overrides the file and the default 1e-8).
    #[arg(long, global = true)]
    pub tol_eig: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Pigeonhole,
    ThreeBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Template {
    Pigeonhole,
    ThreeBox,
    ChainFree,
    PigeonholeCircuit,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full report for a scenario file.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Verdict only; the exit code carries it.
    Certify {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Atoms of the scenario's generators.
    Atoms {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Allowed-influence audit of a decorated circuit file.
    Influence {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Preferred decomposition on A for the circuit's overall unitary.
    Preferred {
        file: PathBuf,
        /// dA dB dC dD
        #[arg(long, num_args = 4, value_names = ["DA", "DB", "DC", "DD"])]
        split: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Report for a built-in scenario.
    Demo {
        #[arg(value_enum)]
        scenario: Builtin,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print a built-in scenario or circuit in file format.
    Export {
        #[arg(value_enum)]
        what: Template,
    },
}

fn exit_code(e: &Error) -> i32 {
    if e.is_tolerance_failure() {
        EXIT_TOLERANCE
    } else {
        EXIT_INPUT
    }
}

/// Runs the CLI on `args` (program name first).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Flag values win over file values, which win over defaults.
fn resolve_tol(cli: &Cli, file: Option<Tol>) -> Result<Tol> {
    let base = file.unwrap_or_default();
    Tol::new(cli.tol_eq.unwrap_or(base.eq), cli.tol_eig.unwrap_or(base.eig))
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Validation {
        location: path.display().to_string(),
        invariant: format!("file is readable ({e})"),
    })
}

fn load_scenario(cli: &Cli, path: &PathBuf) -> Result<(PpsScenario, Tol)> {
    let text = read(path)?;
    let flag_tol = resolve_tol(cli, None)?;
    let parsed = parse_scenario(&text, flag_tol)?;
    Ok((parsed.scenario, resolve_tol(cli, parsed.tol)?))
}

fn emit<T: Serialize>(out: &mut dyn Write, format: Format, value: &T, text: impl FnOnce() -> String) -> Result<()> {
    let s = match format {
        Format::Structured => serde_json::to_string_pretty(value).expect("serializable"),
        Format::Text => text(),
    };
    let _ = writeln!(out, "{}", s.trim_end());
    Ok(())
}

#[derive(Serialize)]
struct CertifyOutput<'a> {
    verdict: Option<&'a ParadoxVerdict>,
    reason: Option<String>,
    tolerances: Tolerances,
}

#[derive(Serialize)]
struct AtomRow {
    signs: String,
    zero: bool,
    rank: usize,
}

#[derive(Serialize)]
struct AtomsOutput {
    generators: Vec<String>,
    atoms: Vec<AtomRow>,
    borderline: Vec<String>,
}

#[derive(Serialize)]
struct InfluenceOutput<'a> {
    violations: &'a [InfluenceViolation],
    tolerances: Tolerances,
}

#[derive(Serialize)]
struct PreferredOutput {
    split: [usize; 4],
    projectors: Vec<crate::matrix::Mat>,
    seed: u64,
}

#[derive(Serialize)]
struct PairRow {
    pair: String,
    same: f64,
    diff: f64,
}

#[derive(Serialize)]
struct DemoOutput<'a> {
    scenario: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pair_abl: Option<Vec<PairRow>>,
    report: &'a Report,
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Analyze { file, format } => {
            let (s, tol) = load_scenario(cli, file)?;
            let r = run_report(&s, tol)?;
            emit(out, *format, &r, || r.to_text())?;
            Ok(EXIT_OK)
        }
        Command::Certify { file, format } => {
            let (s, tol) = load_scenario(cli, file)?;
            let (verdict, reason, code) = match certify_paradox(&s, tol) {
                Ok(v) => {
                    let code = if v.is_paradox() { EXIT_PARADOX } else { EXIT_OK };
                    (Some(v), None, code)
                }
                Err(e @ (Error::Unsupported(_) | Error::NotLogical(_) | Error::TooManyGenerators { .. })) => {
                    (None, Some(e.to_string()), EXIT_UNSUPPORTED)
                }
                Err(e) => return Err(e),
            };
            let body = CertifyOutput {
                verdict: verdict.as_ref(),
                reason: reason.clone(),
                tolerances: tol.into(),
            };
            emit(out, *format, &body, || match (&verdict, &reason) {
                (Some(v), _) if v.is_paradox() => "Paradox".into(),
                (Some(_), _) => "Consistent".into(),
                (None, Some(r)) => format!("Unsupported: {r}"),
                (None, None) => unreachable!(),
            })?;
            Ok(code)
        }
        Command::Atoms { file, format } => {
            let (s, tol) = load_scenario(cli, file)?;
            let atoms = scenario_atoms(&s, tol)?;
            let rows: Vec<AtomRow> = (0..atoms.len() as u32)
                .map(|signs| {
                    let nz = atoms.nonzero().iter().find(|a| a.signs == signs);
                    AtomRow {
                        signs: atoms.label(signs),
                        zero: nz.is_none(),
                        rank: nz.map_or(0, |a| a.proj.rank()),
                    }
                })
                .collect();
            let body = AtomsOutput {
                generators: s.generators().iter().map(|g| g.name.clone()).collect(),
                atoms: rows,
                borderline: atoms.borderline().iter().map(|&b| atoms.label(b)).collect(),
            };
            emit(out, *format, &body, || {
                let mut t = format!("generators (sign order): {}\n", body.generators.join(", "));
                for r in &body.atoms {
                    let state = if r.zero { "zero".to_string() } else { format!("rank {}", r.rank) };
                    t += &format!("  {}  {state}\n", r.signs);
                }
                if !body.borderline.is_empty() {
                    t += &format!("borderline: {}\n", body.borderline.join(", "));
                }
                t
            })?;
            Ok(EXIT_OK)
        }
        Command::Influence { file, format } => {
            let text = read(file)?;
            let parsed = parse_circuit(&text, resolve_tol(cli, None)?)?;
            let tol = resolve_tol(cli, parsed.tol)?;
            let bubble = match parsed.bubble {
                Some(b) => b,
                None => Bubble::new((0..parsed.circuit.wire_count()).collect())?,
            };
            let violations = audit_influences(&parsed.circuit, &bubble, &parsed.decoration, tol)?;
            let body = InfluenceOutput {
                violations: &violations,
                tolerances: tol.into(),
            };
            emit(out, *format, &body, || {
                if violations.is_empty() {
                    return "no disallowed influences".into();
                }
                let mut t = format!("{} disallowed influence(s)\n", violations.len());
                for v in &violations {
                    t += &format!(
                        "  {:?}: {} <-> {} (commutator {:.3e})\n",
                        v.kind, v.first, v.second, v.commutator_norm
                    );
                }
                t
            })?;
            Ok(EXIT_OK)
        }
        Command::Preferred { file, split, format } => {
            let text = read(file)?;
            let parsed = parse_circuit(&text, resolve_tol(cli, None)?)?;
            let tol = resolve_tol(cli, parsed.tol)?;
            let split: Split = match (split, parsed.split) {
                (Some(v), _) => (v[0], v[1], v[2], v[3]),
                (None, Some(s)) => s,
                (None, None) => {
                    return Err(Error::Validation {
                        location: "split".into(),
                        invariant: "--split dA dB dC dD or a split in the file".into(),
                    })
                }
            };
            let u = parsed.circuit.prefix(parsed.circuit.layer_count())?;
            let seed = seed_from_env();
            let d = preferred_decomposition(&u, split, tol, seed)?;
            let body = PreferredOutput {
                split: [split.0, split.1, split.2, split.3],
                projectors: d.projectors.iter().map(|p| p.mat().clone()).collect(),
                seed,
            };
            emit(out, *format, &body, || {
                let mut t = format!("{} projector(s) on A\n", d.len());
                for (k, p) in d.projectors.iter().enumerate() {
                    t += &format!("  P{k} (rank {}):\n", p.rank());
                    for row in p.mat().to_rows() {
                        let cells: Vec<String> = row.iter().map(|z| format!("{:+.6}{:+.6}i", z.re, z.im)).collect();
                        t += &format!("    [{}]\n", cells.join(", "));
                    }
                }
                t
            })?;
            Ok(EXIT_OK)
        }
        Command::Demo { scenario, format } => {
            let tol = resolve_tol(cli, None)?;
            let (name, s) = match scenario {
                Builtin::Pigeonhole => ("pigeonhole", build_pigeonhole()),
                Builtin::ThreeBox => ("three-box", build_three_box()),
            };
            let report = run_report(&s, tol)?;
            let pair_abl = match scenario {
                Builtin::Pigeonhole => Some(
                    [(0, 1), (1, 2), (0, 2)]
                        .iter()
                        .map(|&(i, j)| {
                            let (same, diff) = pair_projectors(i, j);
                            Ok(PairRow {
                                pair: format!("({},{})", i + 1, j + 1),
                                same: abl_binary(&s, &same, tol)?.probability,
                                diff: abl_binary(&s, &diff, tol)?.probability,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?,
                ),
                Builtin::ThreeBox => None,
            };
            let body = DemoOutput {
                scenario: name,
                pair_abl,
                report: &report,
            };
            emit(out, *format, &body, || {
                let mut t = format!("{name}\n");
                if let Some(rows) = &body.pair_abl {
                    t += "pair   ABL(same)       ABL(diff)\n";
                    for r in rows {
                        t += &format!("{}  {:.12}  {:.12}\n", r.pair, r.same, r.diff);
                    }
                }
                t + &report.to_text()
            })?;
            Ok(EXIT_OK)
        }
        Command::Export { what } => {
            let text = match what {
                Template::Pigeonhole => serialize_scenario(&build_pigeonhole(), None),
                Template::ThreeBox => serialize_scenario(&build_three_box(), None),
                Template::ChainFree => serialize_scenario(&build_chain_free(), None),
                Template::PigeonholeCircuit => {
                    let (c, b, d) = pigeonhole_circuit();
                    serialize_circuit(&c, Some(&b), &d, None)
                }
            };
            let _ = writeln!(out, "{text}");
            Ok(EXIT_OK)
        }
    }
}
