//! Emit the per-level profile of a symbol as CSV, the plotting interface:
//! one row per level with the raw suprema and every weighted readout the
//! diagnostics use.
//!
//! Run with: cargo run --example level_profile_csv > profile.csv

use treelip::io::{parse_problem, run, OutputFormat, Subcommand};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = parse_problem(
        br#"{
            "tree": { "kind": "homogeneous", "branching": 2, "root_degree": 2, "depth": 16 },
            "symbol": { "kind": "radial", "expr": "log(1+n)/(1+n)" },
            "pair": "Lw->L"
        }"#,
    )?;
    let output = run(Subcommand::Analyze, &spec, OutputFormat::Csv)?;
    print!("{}", String::from_utf8(output.bytes)?);
    Ok(())
}
