//! The radial expression language: parsing, evaluation at integer levels,
//! display round trips, and column-precise parse errors.
//!
//! Run with: cargo run --example radial_expressions

use treelip::radial::RadialExpr;

fn main() {
    let samples = [
        "1/(1+n)",
        "log(1+n)^2 / log(10)",
        "min(n, 8)",
        "(1 - min(n,1)) * 0.5 + min(n,1) / (1 + log(max(n,1)))",
        "sqrt(1+n) / (1+n)",
        "floor(n/3)",
    ];
    for text in samples {
        let expr = RadialExpr::parse(text).expect("sample parses");
        let values: Vec<String> = (0..6u64)
            .map(|n| format!("{:.6}", expr.eval(n).unwrap()))
            .collect();
        println!("{text}");
        println!("  displays as {expr}");
        println!("  levels 0..5 evaluate to [{}]", values.join(", "));
    }

    println!();
    for bad in ["log(", "1 + * 2", "unknown(n)", "1/(1+n"] {
        match RadialExpr::parse(bad) {
            Ok(_) => println!("{bad:12} unexpectedly parsed"),
            Err(e) => println!("{bad:12} -> {e}"),
        }
    }
}
