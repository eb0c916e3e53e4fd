//! Finite rooted trees stored in level-major breadth-first order.
//!
//! The model is an infinite rooted tree where every vertex has at least one
//! child; computations run on finite truncations. A truncation stores, per
//! vertex: parent, level (distance to the root), and a contiguous child
//! range. `homogeneous` builds the truncation of a tree with constant
//! branching below a chosen root degree; `from_parents` accepts any
//! topologically ordered parent array, including trees whose leaves appear
//! before the final level.

/// Resource bounds applied when building trees.
#[derive(Clone, Debug)]
pub struct TreeLimits {
    pub max_vertices: usize,
}

impl TreeLimits {
    pub const DEFAULT_MAX_VERTICES: usize = 100_000_000;

    pub fn with_max(max_vertices: usize) -> TreeLimits {
        TreeLimits { max_vertices }
    }
}

impl Default for TreeLimits {
    /// Reads the `TREELIP_MAX_VERTICES` environment variable, falling back
    /// to 100 million when unset or unparsable.
    fn default() -> TreeLimits {
        let max_vertices = std::env::var("TREELIP_MAX_VERTICES")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
            .unwrap_or(Self::DEFAULT_MAX_VERTICES);
        TreeLimits { max_vertices }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TreeError {
    #[error("tree would have {required} vertices, over the cap of {cap}")]
    TooLarge { required: u128, cap: usize },
    #[error("homogeneous trees need branching >= 1 and root degree >= 1")]
    ZeroBranching,
    #[error("vertex {vertex} lists parent {parent}, which does not precede it")]
    BadParent { vertex: usize, parent: usize },
}

/// A finite rooted tree; vertex 0 is the root and ids are level-major.
#[derive(Clone, Debug)]
pub struct Tree {
    parent: Vec<u32>,
    level_of: Vec<u32>,
    child_start: Vec<u32>,
    level_start: Vec<u32>,
    to_input: Vec<u32>,
    from_input: Vec<u32>,
    depth: u32,
}

impl Tree {
    /// Truncation at `depth` of the tree whose root has `root_degree`
    /// children and every deeper vertex has `branching` children.
    pub fn homogeneous(
        branching: u32,
        root_degree: u32,
        depth: u32,
        limits: &TreeLimits,
    ) -> Result<Tree, TreeError> {
        if branching == 0 || root_degree == 0 {
            return Err(TreeError::ZeroBranching);
        }
        let mut total: u128 = 1;
        let mut level_count: u128 = root_degree as u128;
        for _ in 1..=depth {
            total = total.saturating_add(level_count);
            if total > limits.max_vertices as u128 {
                return Err(TreeError::TooLarge {
                    required: total,
                    cap: limits.max_vertices,
                });
            }
            level_count = level_count.saturating_mul(branching as u128);
        }
        let n = total as usize;
        let mut parent = Vec::with_capacity(n);
        let mut level_of = Vec::with_capacity(n);
        let mut level_start = Vec::with_capacity(depth as usize + 2);
        parent.push(0);
        level_of.push(0);
        level_start.push(0);
        level_start.push(1);
        let mut prev_level = 0u32..1u32;
        for lvl in 1..=depth {
            let first = parent.len() as u32;
            for p in prev_level.clone() {
                let deg = if lvl == 1 { root_degree } else { branching };
                for _ in 0..deg {
                    parent.push(p);
                    level_of.push(lvl);
                }
            }
            let last = parent.len() as u32;
            level_start.push(last);
            prev_level = first..last;
        }
        let child_start = child_ranges(&parent, n);
        let to_input: Vec<u32> = (0..n as u32).collect();
        Ok(Tree {
            parent,
            level_of,
            child_start,
            level_start,
            from_input: to_input.clone(),
            to_input,
            depth,
        })
    }

    /// Builds from a parent array: entry `i` is the parent of vertex `i + 1`,
    /// and vertex 0 is the root. Parents must precede their children. Leaves
    /// above the final level are accepted.
    pub fn from_parents(parents: &[usize], limits: &TreeLimits) -> Result<Tree, TreeError> {
        let n = parents.len() + 1;
        if n > limits.max_vertices {
            return Err(TreeError::TooLarge {
                required: n as u128,
                cap: limits.max_vertices,
            });
        }
        for (i, &p) in parents.iter().enumerate() {
            if p > i {
                return Err(TreeError::BadParent {
                    vertex: i + 1,
                    parent: p,
                });
            }
        }
        // Children per input vertex, in input order.
        let mut head_count = vec![0u32; n + 1];
        for &p in parents {
            head_count[p + 1] += 1;
        }
        for i in 0..n {
            head_count[i + 1] += head_count[i];
        }
        let mut kids = vec![0u32; parents.len()];
        let mut cursor = head_count.clone();
        for (i, &p) in parents.iter().enumerate() {
            kids[cursor[p] as usize] = (i + 1) as u32;
            cursor[p] += 1;
        }
        // Breadth-first relabel so ids are level-major and child ranges are
        // contiguous.
        let mut to_input = Vec::with_capacity(n);
        to_input.push(0u32);
        let mut head = 0;
        while head < to_input.len() {
            let v = to_input[head] as usize;
            for k in head_count[v]..head_count[v + 1] {
                to_input.push(kids[k as usize]);
            }
            head += 1;
        }
        let mut from_input = vec![0u32; n];
        for (new_id, &inp) in to_input.iter().enumerate() {
            from_input[inp as usize] = new_id as u32;
        }
        let mut parent = vec![0u32; n];
        let mut level_of = vec![0u32; n];
        for new_id in 1..n {
            let inp = to_input[new_id] as usize;
            let p_new = from_input[parents[inp - 1]];
            parent[new_id] = p_new;
            level_of[new_id] = level_of[p_new as usize] + 1;
        }
        let depth = level_of.iter().copied().max().unwrap_or(0);
        let mut level_start = vec![0u32; depth as usize + 2];
        for &l in &level_of {
            level_start[l as usize + 1] += 1;
        }
        for i in 0..=depth as usize {
            level_start[i + 1] += level_start[i];
        }
        let child_start = child_ranges(&parent, n);
        Ok(Tree {
            parent,
            level_of,
            child_start,
            level_start,
            to_input,
            from_input,
            depth,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Parent of `v`; the root has none.
    pub fn parent(&self, v: u32) -> Option<u32> {
        if v == 0 {
            None
        } else {
            Some(self.parent[v as usize])
        }
    }

    pub fn level(&self, v: u32) -> u32 {
        self.level_of[v as usize]
    }

    /// Children of `v` as a contiguous id range.
    pub fn children(&self, v: u32) -> std::ops::Range<u32> {
        self.child_start[v as usize]..self.child_start[v as usize + 1]
    }

    pub fn is_leaf(&self, v: u32) -> bool {
        self.children(v).is_empty()
    }

    /// All vertices at the given level, as a contiguous id range.
    pub fn vertices_at_level(&self, level: u32) -> std::ops::Range<u32> {
        if level > self.depth {
            return 0..0;
        }
        self.level_start[level as usize]..self.level_start[level as usize + 1]
    }

    /// Ancestor of `v` at the given level (or `v` itself when already there).
    pub fn ancestor_at_level(&self, v: u32, level: u32) -> u32 {
        let mut w = v;
        while self.level_of[w as usize] > level {
            w = self.parent[w as usize];
        }
        w
    }

    /// Input index of an internal vertex id (identity for built trees).
    pub fn input_index(&self, v: u32) -> u32 {
        self.to_input[v as usize]
    }

    /// Internal vertex id for an input index.
    pub fn id_from_input(&self, input: u32) -> u32 {
        self.from_input[input as usize]
    }
}

fn child_ranges(parent: &[u32], n: usize) -> Vec<u32> {
    // Ids are level-major, so each vertex's children form a contiguous id
    // block; the block for v starts right after the blocks of all smaller
    // parents (vertex 0 is the root, hence the offset of one).
    let mut start = vec![0u32; n + 1];
    for &p in &parent[1..] {
        start[p as usize + 1] += 1;
    }
    start[0] = 1;
    for i in 0..n {
        start[i + 1] += start[i];
    }
    start
}

#[cfg(test)]
mod tests {
    use super::*;

    fn limits() -> TreeLimits {
        TreeLimits::with_max(1_000_000)
    }

    #[test]
    fn homogeneous_counts_levels_and_wires_parents() {
        let t = Tree::homogeneous(2, 3, 2, &limits()).expect("build");
        assert_eq!(t.vertex_count(), 1 + 3 + 6);
        assert_eq!(t.depth(), 2);
        assert_eq!(t.vertices_at_level(0), 0..1);
        assert_eq!(t.vertices_at_level(1), 1..4);
        assert_eq!(t.vertices_at_level(2), 4..10);
        assert_eq!(t.children(0), 1..4);
        assert_eq!(t.children(1), 4..6);
        assert_eq!(t.parent(5), Some(1));
        assert_eq!(t.parent(0), None);
        for v in t.vertices_at_level(2) {
            assert!(t.is_leaf(v));
            assert_eq!(t.level(v), 2);
        }
    }

    #[test]
    fn homogeneous_rejects_trees_over_the_cap() {
        let err = Tree::homogeneous(2, 2, 3, &TreeLimits::with_max(10)).unwrap_err();
        assert!(matches!(
            err,
            TreeError::TooLarge {
                required: 15,
                cap: 10
            }
        ));
        // Exponential counting saturates instead of overflowing.
        let err = Tree::homogeneous(3, 3, 200, &limits()).unwrap_err();
        assert!(matches!(err, TreeError::TooLarge { .. }));
        assert!(matches!(
            Tree::homogeneous(0, 1, 2, &limits()),
            Err(TreeError::ZeroBranching)
        ));
    }

    #[test]
    fn parent_array_with_early_leaf_builds() {
        let t = Tree::from_parents(&[0, 0, 1], &limits()).expect("build");
        assert_eq!(t.vertex_count(), 4);
        assert_eq!(t.depth(), 2);
        // Input vertex 2 is a leaf at level 1; input vertex 3 sits below 1.
        assert_eq!(t.level(t.id_from_input(2)), 1);
        assert!(t.is_leaf(t.id_from_input(2)));
        assert_eq!(t.parent(t.id_from_input(3)), Some(t.id_from_input(1)));
    }

    #[test]
    fn non_level_major_input_is_relabelled_breadth_first() {
        // Input order: 1 (level 1), 2 (level 2, under 1), 3 (level 1).
        let t = Tree::from_parents(&[0, 1, 0], &limits()).expect("build");
        assert_eq!(t.vertices_at_level(1).len(), 2);
        assert_eq!(t.vertices_at_level(2).len(), 1);
        for lvl in 0..=t.depth() {
            for v in t.vertices_at_level(lvl) {
                assert_eq!(t.level(v), lvl);
            }
        }
        let deep = t.id_from_input(2);
        assert_eq!(t.level(deep), 2);
        assert_eq!(t.input_index(deep), 2);
        assert_eq!(t.parent(deep), Some(t.id_from_input(1)));
        assert_eq!(t.ancestor_at_level(deep, 0), 0);
        assert_eq!(t.ancestor_at_level(deep, 1), t.id_from_input(1));
    }

    #[test]
    fn bad_parent_indices_are_rejected() {
        let err = Tree::from_parents(&[1], &limits()).unwrap_err();
        assert!(matches!(
            err,
            TreeError::BadParent {
                vertex: 1,
                parent: 1
            }
        ));
        let err = Tree::from_parents(&[0, 5, 0], &limits()).unwrap_err();
        assert!(matches!(
            err,
            TreeError::BadParent {
                vertex: 2,
                parent: 5
            }
        ));
    }

    #[test]
    fn child_ranges_partition_the_non_root_vertices() {
        let t = Tree::homogeneous(3, 2, 4, &limits()).expect("build");
        let mut seen = vec![false; t.vertex_count()];
        seen[0] = true;
        for v in 0..t.vertex_count() as u32 {
            for c in t.children(v) {
                assert_eq!(t.parent(c), Some(v));
                assert!(!seen[c as usize]);
                seen[c as usize] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}
