use std::collections::{BTreeMap, BTreeSet};

use num_traits::Num;
use serde::Serialize;

use super::{check_size, enumerate_rooted_trees, RootedTree, TreeError};

/// Which edges the Penrose map adds. `OmitSameGeneration` is a deliberately
/// broken variant used to check that the oracles can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PenroseRule {
    #[default]
    Standard,
    OmitSameGeneration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    vertices: BTreeSet<usize>,
    edges: BTreeSet<(usize, usize)>,
}

impl LabeledGraph {
    pub fn new(
        vertices: BTreeSet<usize>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, TreeError> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(TreeError::InvalidGraph(format!("self-loop at {a}")));
            }
            if !vertices.contains(&a) || !vertices.contains(&b) {
                return Err(TreeError::InvalidGraph(format!("edge ({a},{b}) out of range")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { vertices, edges: set })
    }

    /// Graph on {0..n}.
    pub fn on_range(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, TreeError> {
        Self::new((0..=n).collect(), edges)
    }

    pub fn vertices(&self) -> &BTreeSet<usize> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn contains_graph(&self, other: &LabeledGraph) -> bool {
        other.edges.is_subset(&self.edges)
    }
}

/// Non-tree edges of R_Pen(t): same-generation pairs, and pairs {i, j} with
/// d(j) = d(i) - 1 and parent(i) < j.
pub fn penrose_extra_edges(t: &RootedTree, rule: PenroseRule) -> BTreeSet<(usize, usize)> {
    let gen = t.generations();
    let verts: Vec<usize> = gen.keys().copied().collect();
    let mut out = BTreeSet::new();
    for (x, &a) in verts.iter().enumerate() {
        for &b in &verts[x + 1..] {
            if t.parent(a) == Some(b) || t.parent(b) == Some(a) {
                continue;
            }
            let (ga, gb) = (gen[&a], gen[&b]);
            let add = if ga == gb {
                rule == PenroseRule::Standard
            } else if ga == gb + 1 {
                t.parent(a).is_some_and(|pa| pa < b)
            } else if gb == ga + 1 {
                t.parent(b).is_some_and(|pb| pb < a)
            } else {
                false
            };
            if add {
                out.insert((a, b));
            }
        }
    }
    out
}

pub fn penrose_graph(t: &RootedTree) -> LabeledGraph {
    penrose_graph_with_rule(t, PenroseRule::Standard)
}

pub fn penrose_graph_with_rule(t: &RootedTree, rule: PenroseRule) -> LabeledGraph {
    let edges = t.edges().into_iter().chain(penrose_extra_edges(t, rule));
    LabeledGraph::new(t.vertices().into_iter().collect(), edges).expect("tree edges are valid")
}

struct EdgeIndex {
    vertices: usize,
    pairs: Vec<(usize, usize)>,
    index: BTreeMap<(usize, usize), usize>,
}

impl EdgeIndex {
    fn complete(vertices: usize) -> Self {
        let mut pairs = Vec::new();
        for a in 0..vertices {
            for b in a + 1..vertices {
                pairs.push((a, b));
            }
        }
        let index = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        Self { vertices, pairs, index }
    }

    fn mask<'a>(&self, edges: impl IntoIterator<Item = &'a (usize, usize)>) -> u64 {
        edges.into_iter().fold(0u64, |m, e| m | (1u64 << self.index[e]))
    }

    fn connected(&self, mask: u64) -> bool {
        let mut reach = 1u64;
        loop {
            let mut next = reach;
            for (i, &(a, b)) in self.pairs.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    if reach & (1 << a) != 0 {
                        next |= 1 << b;
                    }
                    if reach & (1 << b) != 0 {
                        next |= 1 << a;
                    }
                }
            }
            if next == reach {
                break;
            }
            reach = next;
        }
        reach.count_ones() as usize == self.vertices
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemeCheck {
    pub n: usize,
    pub trees: u64,
    pub connected_graphs: u64,
    pub uncovered: u64,
    pub multiply_covered: u64,
    pub disconnected_covered: u64,
    pub missing_tree_edges: u64,
}

impl SchemeCheck {
    pub fn passes(&self) -> bool {
        self.uncovered == 0
            && self.multiply_covered == 0
            && self.disconnected_covered == 0
            && self.missing_tree_edges == 0
    }
}

/// Whether every connected graph on {0..n} lies in exactly one interval [τ, R_Pen(τ)].
pub fn verify_partition_scheme(n: usize) -> Result<bool, TreeError> {
    Ok(verify_partition_scheme_with_rule(n, PenroseRule::Standard)?.passes())
}

pub fn verify_partition_scheme_with_rule(n: usize, rule: PenroseRule) -> Result<SchemeCheck, TreeError> {
    check_size(n, 5)?;
    let idx = EdgeIndex::complete(n + 1);
    let m = idx.pairs.len();
    let mut cover = vec![0u32; 1usize << m];
    let trees = enumerate_rooted_trees(n)?;
    let mut missing_tree_edges = 0;
    for t in &trees {
        let tree_edges = t.edges();
        let graph = penrose_graph_with_rule(t, rule);
        if !tree_edges.is_subset(graph.edges()) {
            missing_tree_edges += 1;
        }
        let tmask = idx.mask(&tree_edges);
        let rmask = idx.mask(graph.edges());
        let free = rmask & !tmask;
        let mut sub = free;
        loop {
            cover[(tmask | sub) as usize] += 1;
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
    }
    let mut check = SchemeCheck {
        n,
        trees: trees.len() as u64,
        connected_graphs: 0,
        uncovered: 0,
        multiply_covered: 0,
        disconnected_covered: 0,
        missing_tree_edges,
    };
    for (mask, &c) in cover.iter().enumerate() {
        if idx.connected(mask as u64) {
            check.connected_graphs += 1;
            match c {
                0 => check.uncovered += 1,
                1 => {}
                _ => check.multiply_covered += 1,
            }
        } else if c > 0 {
            check.disconnected_covered += 1;
        }
    }
    Ok(check)
}

/// Symmetric matrix of pair weights on vertices 0..n-1; the diagonal is unused.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> WeightMatrix<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T, diagonal: T) -> Self {
        let mut data = vec![diagonal; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let w = f(i, j);
                data[i * n + j] = w.clone();
                data[j * n + i] = w;
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }
}

/// ω_T as the sum over connected spanning subgraphs of Π (w_ij - 1).
pub fn truncated_weight_direct<T: Clone + Num>(w: &WeightMatrix<T>) -> Result<T, TreeError> {
    let n = w.n();
    check_size(n, 6)?;
    if n <= 1 {
        return Ok(T::one());
    }
    let idx = EdgeIndex::complete(n);
    let factors: Vec<T> = idx
        .pairs
        .iter()
        .map(|&(a, b)| w.get(a, b).clone() - T::one())
        .collect();
    let mut total = T::zero();
    for mask in 0u64..(1u64 << idx.pairs.len()) {
        if (mask.count_ones() as usize) < n - 1 || !idx.connected(mask) {
            continue;
        }
        let mut prod = T::one();
        for (i, f) in factors.iter().enumerate() {
            if mask & (1 << i) != 0 {
                prod = prod * f.clone();
            }
        }
        total = total + prod;
    }
    Ok(total)
}

/// ω_T through the Penrose scheme: Σ_τ Π_{E(τ)} (w - 1) Π_{E(R(τ)) ∖ E(τ)} w.
pub fn truncated_weight_scheme<T: Clone + Num>(w: &WeightMatrix<T>) -> Result<T, TreeError> {
    let n = w.n();
    check_size(n, 6)?;
    if n <= 1 {
        return Ok(T::one());
    }
    let mut total = T::zero();
    for t in enumerate_rooted_trees(n - 1)? {
        let mut prod = T::one();
        for (a, b) in t.edges() {
            prod = prod * (w.get(a, b).clone() - T::one());
        }
        for (a, b) in penrose_extra_edges(&t, PenroseRule::Standard) {
            prod = prod * w.get(a, b).clone();
        }
        total = total + prod;
    }
    Ok(total)
}
