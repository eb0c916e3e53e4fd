//! Gallery of the built-in witness families: each is materialized on a
//! tree, its source norm computed from the norm definitions, and compared
//! with its closed form where one applies inside the truncation.
//!
//! Run with: cargo run --example witness_gallery

use treelip::function::TreeFunction;
use treelip::radial::RadialExpr;
use treelip::tree::{Tree, TreeLimits};
use treelip::witness::{make_witness, WitnessSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let limits = TreeLimits::default();
    let tree = Tree::homogeneous(2, 2, 16, &limits)?;
    let psi = TreeFunction::from_radial(&tree, &RadialExpr::parse("1/(1+n)")?)?;

    let specs = [
        WitnessSpec::PointMass { level: 0 },
        WitnessSpec::PointMass { level: 5 },
        WitnessSpec::IndicatorVertex { level: 3 },
        WitnessSpec::Constant,
        WitnessSpec::CappedLog { cap: 8 },
        WitnessSpec::SquaredLogRamp { cap: 10 },
        WitnessSpec::HarmonicRamp { cap: 12 },
        WitnessSpec::RadialCap { cap: 6 },
        WitnessSpec::QuadraticRamp { cap: 5 },
        WitnessSpec::LogPower { exponent: 0.5 },
        WitnessSpec::ParityAnnulus {
            start: 4,
            factor: 3,
            odd: false,
        },
        WitnessSpec::SignAlternating,
        WitnessSpec::TailSign { cutoff: 8 },
    ];
    println!(
        "{:40} {:18} {:>14} {:>14}",
        "witness", "source space", "norm", "closed form"
    );
    for spec in specs {
        let w = make_witness(&spec, &tree, Some(&psi))?;
        let closed = match w.closed_form_norm {
            Some(x) => format!("{x:.10}"),
            None => "-".to_string(),
        };
        println!(
            "{:40} {:18} {:>14.10} {:>14}",
            w.spec.to_string(),
            w.source.name(),
            w.norm,
            closed
        );
        if let Some(limit) = w.infinite_tree_norm {
            println!(
                "{:40} {:18} {:>14} {:>14.10}",
                "", "", "infinite-tree", limit
            );
        }
    }
    Ok(())
}
