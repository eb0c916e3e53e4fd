//! Multiplication operators between Lipschitz-type function spaces on
//! rooted trees: boundedness, operator norms, essential norms, compactness.

pub mod dd;
pub mod diagnostics;
pub mod function;
pub mod io;
pub mod operator;
pub mod radial;
pub mod tail;
pub mod tree;
pub mod witness;
