//! Run the verify invariant suite against the shipped default spec and
//! print one line per invariant, the same table `treelip verify` emits.
//!
//! Run with: cargo run --example verify_suite

use treelip::io::{parse_problem, run, OutputFormat, Subcommand};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/specs/default.json");
    let spec = parse_problem(&std::fs::read(path)?)?;
    let output = run(Subcommand::Verify, &spec, OutputFormat::Csv)?;
    let text = String::from_utf8(output.bytes)?;
    for line in text.lines().skip(1) {
        let mut fields = line.splitn(4, ',');
        let name = fields.next().unwrap_or("");
        let passed = fields.next().unwrap_or("");
        let violation = fields.next().unwrap_or("");
        let mark = if passed == "true" { "PASS" } else { "FAIL" };
        println!("{mark}  {name:28} max violation {violation}");
    }
    println!("\n{} invariant(s) failed", output.failed_invariants);
    Ok(())
}
