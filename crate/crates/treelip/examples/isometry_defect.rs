//! Isometry defects: no multiplication operator between distinct pairs of
//! these spaces is an isometry, and the fixed probe set exhibits a defect
//! even for unimodular constant symbols, the hardest case.
//!
//! Run with: cargo run --example isometry_defect

use treelip::diagnostics::SpacePair;
use treelip::function::TreeFunction;
use treelip::operator::isometry_defect;
use treelip::radial::RadialExpr;
use treelip::tree::{Tree, TreeLimits};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let limits = TreeLimits::default();
    let tree = Tree::homogeneous(2, 2, 10, &limits)?;

    let symbols = ["1", "0 - 1", "1/(1+n)", "log(1+n)", "1/(1+log(max(n,1)))"];
    for pair in SpacePair::ALL {
        println!("{}", pair.code());
        for text in symbols {
            let psi = TreeFunction::from_radial(&tree, &RadialExpr::parse(text)?)?;
            let report = isometry_defect(pair, &psi, &tree)?;
            println!(
                "  symbol {:22} defect {:.6} at {} (probe norm {:.4}, image norm {:.4})",
                text, report.defect, report.probe, report.probe_norm, report.image_norm
            );
        }
        println!();
    }
    Ok(())
}
