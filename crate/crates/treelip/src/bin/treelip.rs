//! Command-line front end: one subcommand, a spec file, and a format.

use std::process::ExitCode;
use treelip::io::{self, OutputFormat, Subcommand, TreeSpec};

const USAGE: &str = "\
usage: treelip <analyze|norm|essnorm|classify|witness|verify> --spec FILE [options]

subcommands:
  analyze   full report: diagnostics, norm and essential brackets, isometry
            defect, and the per-level profile
  norm      operator norm bracket only
  essnorm   essential norm bracket only
  classify  boundedness / compactness / bounded-below verdicts
  witness   materialize the probe named by the spec's \"witness\" object
  verify    run the invariant suite; exits 3 if any invariant fails

options:
  --spec FILE       problem spec (JSON); required
  --format FORMAT   json (default) or csv; csv emits the per-level profile,
                    or the invariant table under verify
  --out FILE        write the report here instead of stdout
  --depth N         override the depth of a homogeneous tree spec
  --seed S          override the search seed
  -h, --help        print this message

exit codes: 0 success; 1 resource or I/O failure; 2 schema or usage error;
3 numeric contract violation (bracket inversion, failed verify invariant).

TREELIP_MAX_VERTICES caps tree materialization (default 100000000).
";

fn fail(code: i32, message: &str) -> ExitCode {
    eprintln!("treelip: {message}");
    ExitCode::from(code.clamp(1, 255) as u8)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args.iter().any(|a| a == "-h" || a == "--help") {
        print!("{USAGE}");
        return if args.is_empty() {
            ExitCode::from(2)
        } else {
            ExitCode::SUCCESS
        };
    }
    let Some(sub) = Subcommand::parse(&args[0]) else {
        return fail(
            2,
            &format!("unknown subcommand \"{}\"; see --help", args[0]),
        );
    };

    let mut spec_path: Option<String> = None;
    let mut format = OutputFormat::Json;
    let mut out_path: Option<String> = None;
    let mut depth: Option<u32> = None;
    let mut seed: Option<u64> = None;
    let mut i = 1;
    while i < args.len() {
        let flag = args[i].as_str();
        i += 1;
        let Some(value) = args.get(i) else {
            return fail(2, &format!("{flag} needs a value"));
        };
        match flag {
            "--spec" => spec_path = Some(value.clone()),
            "--out" => out_path = Some(value.clone()),
            "--format" => match OutputFormat::parse(value) {
                Some(f) => format = f,
                None => {
                    return fail(
                        2,
                        &format!("unknown format \"{value}\"; expected json or csv"),
                    )
                }
            },
            "--depth" => match value.parse::<u32>() {
                Ok(d) => depth = Some(d),
                Err(_) => {
                    return fail(
                        2,
                        &format!("--depth needs an unsigned integer, got \"{value}\""),
                    )
                }
            },
            "--seed" => match value.parse::<u64>() {
                Ok(s) => seed = Some(s),
                Err(_) => {
                    return fail(
                        2,
                        &format!("--seed needs an unsigned integer, got \"{value}\""),
                    )
                }
            },
            other => return fail(2, &format!("unknown argument \"{other}\"; see --help")),
        }
        i += 1;
    }

    let Some(spec_path) = spec_path else {
        return fail(2, "--spec FILE is required");
    };
    let bytes = match std::fs::read(&spec_path) {
        Ok(b) => b,
        Err(e) => return fail(1, &format!("cannot read {spec_path}: {e}")),
    };
    let mut spec = match io::parse_problem(&bytes) {
        Ok(s) => s,
        Err(e) => return fail(e.exit_code(), &e.to_string()),
    };
    if let Some(d) = depth {
        match &mut spec.tree {
            TreeSpec::Homogeneous { depth, .. } => *depth = d,
            TreeSpec::Explicit { .. } => {
                return fail(2, "--depth only applies to homogeneous tree specs");
            }
        }
    }
    if let Some(s) = seed {
        spec.search.seed = s;
    }

    let output = match io::run(sub, &spec, format) {
        Ok(o) => o,
        Err(e) => return fail(e.exit_code(), &e.to_string()),
    };
    let written = match &out_path {
        Some(path) => std::fs::write(path, &output.bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&output.bytes)
        }
    };
    if let Err(e) = written {
        return fail(1, &format!("cannot write output: {e}"));
    }
    if output.failed_invariants > 0 {
        eprintln!(
            "treelip: {} verify invariant(s) failed",
            output.failed_invariants
        );
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
