//! Operator-norm brackets: formula upper bounds against certified lower
//! bounds from explicit unit-norm witnesses.
//!
//! Every lower bound is a recomputed Rayleigh ratio of a stored function,
//! so it is sound no matter where the search found it.
//!
//! Run with: cargo run --example norm_bracket

use treelip::diagnostics::{quantities_from_radial, SpacePair};
use treelip::function::TreeFunction;
use treelip::operator::{norm_bracket, SearchConfig};
use treelip::radial::RadialExpr;
use treelip::tree::{Tree, TreeLimits};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let limits = TreeLimits::default();
    let tree = Tree::homogeneous(2, 2, 14, &limits)?;
    let cfg = SearchConfig::default();

    let cases = [
        (SpacePair::WeightedToLipschitz, "1/(1+n)"),
        (SpacePair::WeightedToLipschitz, "3/(1+n)^2"),
        (SpacePair::LipschitzToWeighted, "1/(1+n)^2"),
        (SpacePair::WeightedToSup, "1/(1+log(max(n,1)))"),
        (SpacePair::SupToWeighted, "1/(1+n)"),
    ];
    for (pair, text) in cases {
        let expr = RadialExpr::parse(text)?;
        let psi = TreeFunction::from_radial(&tree, &expr)?;
        let q = quantities_from_radial(&expr)?;
        let analysis = norm_bracket(pair, &psi, &tree, &q, true, &cfg)?;
        let b = &analysis.bracket;
        println!("{} with symbol {text}", pair.code());
        println!("  lower {:.12} from {}", b.lower, b.lower_provenance);
        println!(
            "  upper {:.12} from {} ({})",
            b.upper,
            b.upper_provenance,
            b.upper_status.as_str()
        );
        if let Some(c) = &analysis.certificate {
            println!(
                "  certificate {} has source norm {:.12}",
                c.label, c.source_norm
            );
        }
        if let Some(g) = &analysis.weight_gap {
            println!(
                "  weight gap flagged: probe weight sup {:.12} vs full weight sup {:.12}",
                g.probe_weight_sup, g.full_weight_sup
            );
        }
        println!();
    }
    Ok(())
}
