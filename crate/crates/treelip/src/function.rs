//! Functions on finite trees and the norms of the function spaces.
//!
//! A function assigns a complex value to every vertex. The difference at a
//! non-root vertex v is |f(v) - f(v-)| with v- the parent. Norms:
//! the Lipschitz norm |f(root)| + sup of differences, the weighted norm
//! |f(root)| + sup of level-weighted differences, and the sup norm. The
//! little subspaces are defined by vanishing tails, which a finite
//! truncation can only sample; tail decisions for radial data live in the
//! diagnostics module.

use num_complex::Complex64;

use crate::radial::{ExprError, RadialExpr};
use crate::tree::Tree;

/// A complex-valued function on the vertices of a finite tree, indexed by
/// internal (level-major) vertex id.
#[derive(Clone, Debug)]
pub struct TreeFunction {
    values: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FunctionError {
    #[error("value list has {got} entries, tree has {want} vertices")]
    LengthMismatch { got: usize, want: usize },
    #[error("value at input vertex {vertex} is not finite")]
    NonFinite { vertex: usize },
}

impl TreeFunction {
    /// Builds from values listed in input vertex order.
    pub fn from_values(
        tree: &Tree,
        input_order: &[Complex64],
    ) -> Result<TreeFunction, FunctionError> {
        if input_order.len() != tree.vertex_count() {
            return Err(FunctionError::LengthMismatch {
                got: input_order.len(),
                want: tree.vertex_count(),
            });
        }
        for (i, v) in input_order.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(FunctionError::NonFinite { vertex: i });
            }
        }
        let values = (0..tree.vertex_count() as u32)
            .map(|id| input_order[tree.input_index(id) as usize])
            .collect();
        Ok(TreeFunction { values })
    }

    /// Builds from real values listed in input vertex order.
    pub fn from_real_values(
        tree: &Tree,
        input_order: &[f64],
    ) -> Result<TreeFunction, FunctionError> {
        let complex: Vec<Complex64> = input_order
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        Self::from_values(tree, &complex)
    }

    /// Materializes a radial expression: one f64 evaluation per level, fanned
    /// out to the vertices. Recomputing any vertex through `eval` reproduces
    /// the stored value bit for bit.
    pub fn from_radial(tree: &Tree, expr: &RadialExpr) -> Result<TreeFunction, ExprError> {
        let mut by_level = Vec::with_capacity(tree.depth() as usize + 1);
        for n in 0..=tree.depth() {
            by_level.push(expr.eval(n as u64)?);
        }
        let values = (0..tree.vertex_count() as u32)
            .map(|v| Complex64::new(by_level[tree.level(v) as usize], 0.0))
            .collect();
        Ok(TreeFunction { values })
    }

    pub fn constant(tree: &Tree, c: Complex64) -> TreeFunction {
        TreeFunction {
            values: vec![c; tree.vertex_count()],
        }
    }

    pub fn zero(tree: &Tree) -> TreeFunction {
        Self::constant(tree, Complex64::new(0.0, 0.0))
    }

    pub fn from_internal_values(values: Vec<Complex64>) -> TreeFunction {
        TreeFunction { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, v: u32) -> Complex64 {
        self.values[v as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn set_value(&mut self, v: u32, x: Complex64) {
        self.values[v as usize] = x;
    }

    /// |f(v) - f(parent of v)|; zero at the root.
    pub fn difference(&self, tree: &Tree, v: u32) -> f64 {
        match tree.parent(v) {
            Some(p) => modulus(self.values[v as usize] - self.values[p as usize]),
            None => 0.0,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|&z| modulus(z)).fold(0.0, f64::max)
    }

    /// sup over non-root vertices of |f(v) - f(v-)|.
    pub fn lipschitz_seminorm(&self, tree: &Tree) -> f64 {
        let mut sup = 0.0f64;
        for v in 1..tree.vertex_count() as u32 {
            sup = sup.max(self.difference(tree, v));
        }
        sup
    }

    /// |f(root)| + Lipschitz seminorm.
    pub fn lipschitz_norm(&self, tree: &Tree) -> f64 {
        modulus(self.values[0]) + self.lipschitz_seminorm(tree)
    }

    /// sup over non-root vertices of level * |f(v) - f(v-)|.
    pub fn weighted_seminorm(&self, tree: &Tree) -> f64 {
        let mut sup = 0.0f64;
        for v in 1..tree.vertex_count() as u32 {
            sup = sup.max(tree.level(v) as f64 * self.difference(tree, v));
        }
        sup
    }

    /// |f(root)| + weighted seminorm.
    pub fn weighted_norm(&self, tree: &Tree) -> f64 {
        modulus(self.values[0]) + self.weighted_seminorm(tree)
    }

    /// Pointwise product psi * f.
    pub fn multiply(&self, other: &TreeFunction) -> TreeFunction {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a * b)
            .collect();
        TreeFunction { values }
    }

    /// Freezes the function below `level`: vertices deeper than `level` take
    /// the value of their ancestor at that level.
    pub fn level_truncate(&self, tree: &Tree, level: u32) -> TreeFunction {
        let mut values = self.values.clone();
        for v in 1..tree.vertex_count() as u32 {
            if tree.level(v) > level {
                // Parent has a smaller id, so its value is already frozen.
                values[v as usize] = values[tree.parent(v).expect("non-root") as usize];
            }
        }
        TreeFunction { values }
    }

    /// The complementary tail part f - (f frozen below `level`).
    pub fn tail_part(&self, tree: &Tree, level: u32) -> TreeFunction {
        let frozen = self.level_truncate(tree, level);
        let values = self
            .values
            .iter()
            .zip(&frozen.values)
            .map(|(&a, &b)| a - b)
            .collect();
        TreeFunction { values }
    }

    /// Per-level suprema of |f|, differences, and vertex-wise pair sums
    /// |f(v)| + |f(v-)|; indices 0..=depth, with NaN at level 0 for the
    /// difference and pair rows.
    pub fn level_profile(&self, tree: &Tree) -> LevelProfile {
        let depth = tree.depth() as usize;
        let mut sup_abs = vec![f64::NEG_INFINITY; depth + 1];
        let mut sup_diff = vec![f64::NEG_INFINITY; depth + 1];
        let mut sup_pair = vec![f64::NEG_INFINITY; depth + 1];
        for v in 0..tree.vertex_count() as u32 {
            let lvl = tree.level(v) as usize;
            let a = modulus(self.values[v as usize]);
            sup_abs[lvl] = sup_abs[lvl].max(a);
            if let Some(p) = tree.parent(v) {
                let d = modulus(self.values[v as usize] - self.values[p as usize]);
                let s = a + modulus(self.values[p as usize]);
                sup_diff[lvl] = sup_diff[lvl].max(d);
                sup_pair[lvl] = sup_pair[lvl].max(s);
            }
        }
        sup_diff[0] = f64::NAN;
        sup_pair[0] = f64::NAN;
        // Levels can be empty when early leaves cut a branch short.
        for row in [&mut sup_abs, &mut sup_diff, &mut sup_pair] {
            for x in row.iter_mut() {
                if *x == f64::NEG_INFINITY {
                    *x = f64::NAN;
                }
            }
        }
        LevelProfile {
            sup_abs,
            sup_diff,
            sup_pair,
        }
    }
}

/// Per-level suprema of a function on a finite tree.
#[derive(Clone, Debug)]
pub struct LevelProfile {
    pub sup_abs: Vec<f64>,
    pub sup_diff: Vec<f64>,
    pub sup_pair: Vec<f64>,
}

impl LevelProfile {
    pub fn depth(&self) -> usize {
        self.sup_abs.len() - 1
    }
}

/// Complex modulus via hypot, the one code path every norm shares.
pub fn modulus(z: Complex64) -> f64 {
    z.re.hypot(z.im)
}
