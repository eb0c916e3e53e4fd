//! Classify multiplication operators for contrasting radial symbols.
//!
//! For each symbol the tail ladders decide boundedness, compactness, and
//! (into the bounded functions) bounded-below, across all four space pairs.
//!
//! Run with: cargo run --example classify_symbol

use treelip::diagnostics::{classify, membership_from_radial, quantities_from_radial, SpacePair};
use treelip::radial::RadialExpr;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for text in ["1/(1+n)", "log(1+n)", "1", "1/(1+log(max(n,1)))"] {
        let expr = RadialExpr::parse(text)?;
        let q = quantities_from_radial(&expr)?;
        let m = membership_from_radial(&expr)?;
        println!("symbol: {text}");
        println!(
            "  spaces: Lipschitz {}, little {}, weighted {}, little weighted {}",
            m.lipschitz.as_str(),
            m.little_lipschitz.as_str(),
            m.weighted.as_str(),
            m.little_weighted.as_str()
        );
        for pair in SpacePair::ALL {
            let cls = classify(&q, pair, false);
            let below = match cls.bounded_below {
                Some(v) => v.as_str(),
                None => "-",
            };
            println!(
                "  {:9} bounded {:7} compact {:7} bounded below {}",
                pair.code(),
                cls.bounded.as_str(),
                cls.compact.as_str(),
                below
            );
        }
        println!();
    }
    Ok(())
}
