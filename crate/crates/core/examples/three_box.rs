//! The three-box scenario: the particle is certainly in box 1 and certainly
//! in box 2.
//!
//! `cargo run --example three_box`

use pps_core::builtin::build_three_box;
use pps_core::report::run_report;
use pps_core::Tol;

fn main() -> pps_core::Result<()> {
    let report = run_report(&build_three_box(), Tol::default())?;
    print!("{}", report.to_text());
    Ok(())
}
