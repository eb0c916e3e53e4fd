//! Essential-norm brackets from tail quantities: compact symbols collapse
//! to [0, 0], slowly decaying symbols keep a positive essential norm, and
//! tabulated symbols degrade to [0, norm upper] because finite data cannot
//! certify a limit.
//!
//! Run with: cargo run --example essential_norm

use num_complex::Complex64;
use treelip::diagnostics::{quantities_from_profile, quantities_from_radial, SpacePair};
use treelip::function::{modulus, TreeFunction};
use treelip::operator::essential_norm_bracket;
use treelip::radial::RadialExpr;
use treelip::tree::{Tree, TreeLimits};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        (
            SpacePair::WeightedToLipschitz,
            "1/(1+n)^2",
            "compact: tails vanish",
        ),
        (
            SpacePair::WeightedToSup,
            "min(1,max(0,n-1)) * 1/log(max(n,2))",
            "essential norm 1",
        ),
        (
            SpacePair::SupToWeighted,
            "1 - min(n,1) + min(n,1)/max(n,1)",
            "essential norm 2",
        ),
    ];
    for (pair, text, note) in cases {
        let expr = RadialExpr::parse(text)?;
        let q = quantities_from_radial(&expr)?;
        let b = essential_norm_bracket(pair, &q)?;
        println!("{} with symbol {text} ({note})", pair.code());
        println!(
            "  essential norm in [{:.9}, {:.9}] ({})",
            b.lower,
            b.upper,
            b.upper_status.as_str()
        );
        println!();
    }

    // The same symbol as a finite table: no tail information survives.
    let limits = TreeLimits::default();
    let tree = Tree::homogeneous(2, 2, 8, &limits)?;
    let expr = RadialExpr::parse("1/(1+n)^2")?;
    let psi = TreeFunction::from_radial(&tree, &expr)?;
    let values: Vec<Complex64> = (0..tree.vertex_count() as u32)
        .map(|input| psi.value(tree.id_from_input(input)))
        .collect();
    let table = TreeFunction::from_values(&tree, &values)?;
    let q = quantities_from_profile(&table.level_profile(&tree), modulus(table.value(0)));
    let b = essential_norm_bracket(SpacePair::WeightedToLipschitz, &q)?;
    println!("same symbol tabulated to depth {}:", tree.depth());
    println!(
        "  essential norm in [{:.9}, {:.9}] ({})",
        b.lower,
        b.upper,
        b.upper_status.as_str()
    );
    Ok(())
}
