//! Writes a scenario file, reads it back and prints its report as JSON.
//!
//! `cargo run --example scenario_file`

use pps_core::builtin::build_chain_free;
use pps_core::files::{parse_scenario, serialize_scenario};
use pps_core::report::run_report;
use pps_core::Tol;

fn main() -> pps_core::Result<()> {
    let tol = Tol::new(1e-11, 1e-9)?;
    let path = std::env::temp_dir().join("chain_free_scenario.json");
    std::fs::write(&path, serialize_scenario(&build_chain_free(), Some(tol))).expect("temp dir is writable");
    println!("wrote {}", path.display());

    let text = std::fs::read_to_string(&path).expect("file was just written");
    let parsed = parse_scenario(&text, Tol::default())?;
    let report = run_report(&parsed.scenario, parsed.tol.unwrap_or_default())?;
    println!("{}", report.to_json());
    Ok(())
}
