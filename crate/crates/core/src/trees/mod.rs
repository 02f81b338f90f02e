//! Labeled rooted trees, the Penrose partition scheme and Penrose concatenation.

mod cayley;
mod penrose;
mod splitting;

pub use cayley::{cayley_degree_count, count_trees_with_degrees};
pub use penrose::{
    penrose_extra_edges, penrose_graph, penrose_graph_with_rule, truncated_weight_direct,
    truncated_weight_scheme, verify_partition_scheme, verify_partition_scheme_with_rule,
    LabeledGraph, PenroseRule, SchemeCheck, WeightMatrix,
};
pub use splitting::{
    check_faithfulness, classify_splittable, count_splittings, count_splittings_exhaustive,
    penrose_concatenate, split_classes, splittability, splittings, SplitClass,
};

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub const DEFAULT_N_MAX: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("size {n} exceeds the limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("label sets overlap or contain the root: {0}")]
    LabelCollision(String),
    #[error("invalid degree sequence: {0}")]
    InvalidDegreeSequence(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}

/// Tree on {0} ∪ labels, rooted at 0, stored as a child → parent map.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RootedTree {
    parent: BTreeMap<usize, usize>,
}

impl RootedTree {
    pub fn trivial() -> Self {
        Self { parent: BTreeMap::new() }
    }

    pub fn from_parent_map(parent: BTreeMap<usize, usize>) -> Result<Self, TreeError> {
        if parent.contains_key(&0) {
            return Err(TreeError::InvalidTree("root 0 cannot have a parent".into()));
        }
        for (&v, &p) in &parent {
            if p != 0 && !parent.contains_key(&p) {
                return Err(TreeError::InvalidTree(format!("parent {p} of {v} is not a vertex")));
            }
        }
        let tree = Self { parent };
        for &v in tree.parent.keys() {
            let mut cur = v;
            let mut steps = 0;
            while cur != 0 {
                cur = tree.parent[&cur];
                steps += 1;
                if steps > tree.parent.len() {
                    return Err(TreeError::InvalidTree(format!("cycle through {v}")));
                }
            }
        }
        Ok(tree)
    }

    /// `parents[i-1]` is the parent of vertex i, for labels 1..=parents.len().
    pub fn from_parents(parents: &[usize]) -> Result<Self, TreeError> {
        let map = parents
            .iter()
            .enumerate()
            .map(|(i, &p)| (i + 1, p))
            .collect();
        Self::from_parent_map(map)
    }

    /// Builds the tree rooted at 0 from an undirected edge list on {0..n}.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, TreeError> {
        if edges.len() != n {
            return Err(TreeError::InvalidTree(format!(
                "{} edges for {} vertices",
                edges.len(),
                n + 1
            )));
        }
        let mut adj = vec![Vec::new(); n + 1];
        for &(a, b) in edges {
            if a > n || b > n || a == b {
                return Err(TreeError::InvalidTree(format!("bad edge ({a},{b})")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut parent = BTreeMap::new();
        let mut seen = vec![false; n + 1];
        seen[0] = true;
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    parent.insert(u, v);
                    stack.push(u);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(TreeError::InvalidTree("edges do not connect all vertices".into()));
        }
        Ok(Self { parent })
    }

    /// Number of non-root vertices.
    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn labels(&self) -> impl Iterator<Item = usize> + '_ {
        self.parent.keys().copied()
    }

    pub fn vertices(&self) -> Vec<usize> {
        std::iter::once(0).chain(self.labels()).collect()
    }

    pub fn contains(&self, v: usize) -> bool {
        v == 0 || self.parent.contains_key(&v)
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent.get(&v).copied()
    }

    pub fn parent_map(&self) -> &BTreeMap<usize, usize> {
        &self.parent
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        self.parent
            .iter()
            .filter(|(_, &p)| p == v)
            .map(|(&c, _)| c)
            .collect()
    }

    pub fn children_map(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        out.insert(0, Vec::new());
        for &v in self.parent.keys() {
            out.insert(v, Vec::new());
        }
        for (&c, &p) in &self.parent {
            out.get_mut(&p).expect("parent is a vertex").push(c);
        }
        out
    }

    /// Distance from the root of every vertex.
    pub fn generations(&self) -> BTreeMap<usize, usize> {
        let mut gen = BTreeMap::new();
        gen.insert(0, 0);
        for &v in self.parent.keys() {
            let mut path = Vec::new();
            let mut cur = v;
            while !gen.contains_key(&cur) {
                path.push(cur);
                cur = self.parent[&cur];
            }
            let mut g = gen[&cur];
            for &p in path.iter().rev() {
                g += 1;
                gen.insert(p, g);
            }
        }
        gen
    }

    pub fn generation(&self, v: usize) -> usize {
        self.generations()[&v]
    }

    pub fn depth(&self) -> usize {
        self.generations().values().copied().max().unwrap_or(0)
    }

    /// Sibling count s_i = number of children of vertex i.
    pub fn sibling_counts(&self) -> BTreeMap<usize, usize> {
        self.children_map()
            .into_iter()
            .map(|(v, c)| (v, c.len()))
            .collect()
    }

    /// Vertex degree d_i = s_i + [i ≠ 0].
    pub fn degrees(&self) -> BTreeMap<usize, usize> {
        self.sibling_counts()
            .into_iter()
            .map(|(v, s)| (v, s + usize::from(v != 0)))
            .collect()
    }

    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        self.parent
            .iter()
            .map(|(&c, &p)| (c.min(p), c.max(p)))
            .collect()
    }

    /// Largest label among the vertices at maximal distance from the root.
    pub fn j_max(&self) -> usize {
        let gen = self.generations();
        let depth = gen.values().copied().max().unwrap_or(0);
        gen.iter()
            .filter(|(_, &g)| g == depth)
            .map(|(&v, _)| v)
            .max()
            .unwrap_or(0)
    }

    /// Strict descendants of `v`.
    pub fn descendants(&self, v: usize) -> BTreeSet<usize> {
        let children = self.children_map();
        let mut out = BTreeSet::new();
        let mut stack = children.get(&v).cloned().unwrap_or_default();
        while let Some(u) = stack.pop() {
            out.insert(u);
            stack.extend(children[&u].iter().copied());
        }
        out
    }

    /// Parent vector `p[i-1]` when the labels are exactly 1..=n.
    pub fn to_parents(&self) -> Option<Vec<usize>> {
        let n = self.n();
        if self.parent.keys().copied().eq(1..=n) {
            Some(self.parent.values().copied().collect())
        } else {
            None
        }
    }
}

fn check_size(n: usize, limit: usize) -> Result<(), TreeError> {
    if n > limit {
        return Err(TreeError::TooLarge { n, limit });
    }
    Ok(())
}

/// All (n+1)^{n-1} trees on {0..n} rooted at 0, sorted by parent vector.
pub fn enumerate_rooted_trees(n: usize) -> Result<Vec<RootedTree>, TreeError> {
    enumerate_rooted_trees_up_to(n, DEFAULT_N_MAX)
}

pub fn enumerate_rooted_trees_up_to(n: usize, n_max: usize) -> Result<Vec<RootedTree>, TreeError> {
    check_size(n, n_max)?;
    if n <= 5 {
        Ok(trees_by_parent_maps(n))
    } else {
        Ok(trees_by_pruefer(n))
    }
}

/// Every map {1..n} → {0..n} without fixed points, kept when acyclic.
pub fn trees_by_parent_maps(n: usize) -> Vec<RootedTree> {
    if n == 0 {
        return vec![RootedTree::trivial()];
    }
    let mut out = Vec::new();
    let mut p = vec![0usize; n];
    loop {
        if is_acyclic(&p) {
            out.push(RootedTree::from_parents(&p).expect("acyclic parent map"));
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if p[i] < n {
                p[i] += 1;
                break;
            }
            p[i] = 0;
        }
    }
}

fn is_acyclic(p: &[usize]) -> bool {
    let n = p.len();
    // 0 = unknown, 1 = on current path, 2 = reaches root
    let mut state = vec![0u8; n + 1];
    state[0] = 2;
    for start in 1..=n {
        let mut path = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            path.push(v);
            v = p[v - 1];
        }
        if state[v] == 1 {
            return false;
        }
        for u in path {
            state[u] = 2;
        }
    }
    true
}

/// Decodes every Prüfer sequence of length n-1 over {0..n}.
pub fn trees_by_pruefer(n: usize) -> Vec<RootedTree> {
    if n == 0 {
        return vec![RootedTree::trivial()];
    }
    let len = n - 1;
    let total = (n + 1).pow(len as u32);
    let mut out = Vec::with_capacity(total);
    let mut seq = vec![0usize; len];
    for idx in 0..total {
        let mut x = idx;
        for s in seq.iter_mut().rev() {
            *s = x % (n + 1);
            x /= n + 1;
        }
        let edges = pruefer_decode(&seq, n + 1);
        out.push(RootedTree::from_edges(n, &edges).expect("Prüfer decoding yields a tree"));
    }
    out.sort();
    out
}

fn pruefer_decode(seq: &[usize], vertices: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; vertices];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(vertices - 1);
    for &s in seq {
        let leaf = (0..vertices).find(|&v| degree[v] == 1).expect("a leaf exists");
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..vertices).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_cayley() {
        assert_eq!(enumerate_rooted_trees(1).unwrap().len(), 1);
        assert_eq!(enumerate_rooted_trees(2).unwrap().len(), 3);
        assert_eq!(enumerate_rooted_trees(4).unwrap().len(), 125);
        for n in 1..=6usize {
            assert_eq!(
                enumerate_rooted_trees(n).unwrap().len(),
                (n + 1).pow(n as u32 - 1)
            );
        }
    }

    #[test]
    fn single_edge_tree() {
        let t = &enumerate_rooted_trees(1).unwrap()[0];
        assert_eq!(t.edges(), BTreeSet::from([(0, 1)]));
    }

    #[test]
    fn generators_agree() {
        for n in 1..=5 {
            let mut a = trees_by_parent_maps(n);
            let b = trees_by_pruefer(n);
            a.sort();
            assert_eq!(a, b, "n = {n}");
        }
    }

    #[test]
    fn too_large_is_rejected() {
        assert_eq!(
            enumerate_rooted_trees(8),
            Err(TreeError::TooLarge { n: 8, limit: 7 })
        );
    }

    #[test]
    fn derived_quantities() {
        // 0 -> 1 -> 3, 0 -> 2
        let t = RootedTree::from_parents(&[0, 0, 1]).unwrap();
        assert_eq!(t.generation(3), 2);
        assert_eq!(t.depth(), 2);
        assert_eq!(t.j_max(), 3);
        assert_eq!(t.children(0), vec![1, 2]);
        assert_eq!(t.sibling_counts()[&0], 2);
        assert_eq!(t.degrees()[&1], 2);
        assert_eq!(t.degrees()[&0], 2);
        assert_eq!(t.descendants(1), BTreeSet::from([3]));
    }

    #[test]
    fn rejects_cycles() {
        assert!(RootedTree::from_parents(&[2, 1]).is_err());
        assert!(RootedTree::from_parents(&[5]).is_err());
    }
}
