use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::penrose::{penrose_extra_edges, PenroseRule};
use super::{check_size, enumerate_rooted_trees, RootedTree, TreeError, DEFAULT_N_MAX};

/// A tree together with its maximal splitting multiplicity ℓ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitClass {
    pub tree: RootedTree,
    pub ell: usize,
}

/// PFM(t_1, ..., t_k): t_1 keeps root 0, the root of t_i is identified with j_max(t_{i-1}).
pub fn penrose_concatenate(ts: &[RootedTree]) -> Result<RootedTree, TreeError> {
    if ts.is_empty() {
        return Err(TreeError::InvalidTree("nothing to concatenate".into()));
    }
    let mut seen = BTreeSet::new();
    for t in ts {
        for v in t.labels() {
            if v == 0 || !seen.insert(v) {
                return Err(TreeError::LabelCollision(format!("label {v} used twice")));
            }
        }
    }
    let mut parent = BTreeMap::new();
    let mut star = 0;
    for t in ts {
        for (&c, &p) in t.parent_map() {
            parent.insert(c, if p == 0 { star } else { p });
        }
        star = t.j_max();
    }
    RootedTree::from_parent_map(parent)
}

/// The part of `t` strictly below `v`, re-rooted so that `v` becomes 0.
fn subtree_below(t: &RootedTree, v: usize, desc: &BTreeSet<usize>) -> RootedTree {
    let parent = desc
        .iter()
        .map(|&u| {
            let p = t.parent(u).expect("descendant has a parent");
            (u, if p == v { 0 } else { p })
        })
        .collect();
    RootedTree::from_parent_map(parent).expect("subtree of a tree")
}

fn without(t: &RootedTree, desc: &BTreeSet<usize>) -> RootedTree {
    let parent = t
        .parent_map()
        .iter()
        .filter(|(c, _)| !desc.contains(c))
        .map(|(&c, &p)| (c, p))
        .collect();
    RootedTree::from_parent_map(parent).expect("pruned tree")
}

/// Every way to write t = PFM(head, rest): returns (head, rest) pairs, with
/// `rest` re-rooted at 0.
fn split_points(t: &RootedTree) -> Vec<(RootedTree, RootedTree)> {
    let gen = t.generations();
    let children = t.children_map();
    let mut out = Vec::new();
    for v in t.labels() {
        if children[&v].is_empty() {
            continue;
        }
        let desc = t.descendants(v);
        let head_depth = gen
            .iter()
            .filter(|(u, _)| !desc.contains(u))
            .map(|(_, &g)| g)
            .max()
            .unwrap_or(0);
        if gen[&v] != head_depth {
            continue;
        }
        let largest = gen
            .iter()
            .filter(|(u, &g)| g == head_depth && !desc.contains(u))
            .map(|(&u, _)| u)
            .max();
        if largest != Some(v) {
            continue;
        }
        out.push((without(t, &desc), subtree_below(t, v, &desc)));
    }
    out
}

fn count_rec(t: &RootedTree, k: usize) -> u64 {
    if k == 1 {
        return 1;
    }
    split_points(t)
        .iter()
        .map(|(_, rest)| count_rec(rest, k - 1))
        .sum()
}

/// |Sp_k(t)|: ordered k-tuples of trees whose Penrose concatenation is t.
pub fn count_splittings(t: &RootedTree, k: usize) -> Result<u64, TreeError> {
    check_size(t.n(), DEFAULT_N_MAX)?;
    if k == 0 {
        return Ok(0);
    }
    Ok(count_rec(t, k))
}

/// The k-splittings of t themselves.
pub fn splittings(t: &RootedTree, k: usize) -> Result<Vec<Vec<RootedTree>>, TreeError> {
    check_size(t.n(), DEFAULT_N_MAX)?;
    fn rec(t: &RootedTree, k: usize) -> Vec<Vec<RootedTree>> {
        if k == 0 {
            return Vec::new();
        }
        if k == 1 {
            return vec![vec![t.clone()]];
        }
        let mut out = Vec::new();
        for (head, rest) in split_points(t) {
            for mut tail in rec(&rest, k - 1) {
                tail.insert(0, head.clone());
                out.push(tail);
            }
        }
        out
    }
    Ok(rec(t, k))
}

fn ell_memo(t: &RootedTree, memo: &mut HashMap<RootedTree, usize>) -> usize {
    if let Some(&e) = memo.get(t) {
        return e;
    }
    let best = split_points(t)
        .iter()
        .map(|(_, rest)| 1 + ell_memo(rest, memo))
        .max()
        .unwrap_or(1);
    memo.insert(t.clone(), best);
    best
}

/// Largest k with Sp_k(t) nonempty.
pub fn splittability(t: &RootedTree) -> Result<usize, TreeError> {
    check_size(t.n(), DEFAULT_N_MAX)?;
    Ok(ell_memo(t, &mut HashMap::new()))
}

/// Number of ℓ-splittable trees on {0..n}, for each ℓ.
pub fn classify_splittable(n: usize) -> Result<BTreeMap<usize, u64>, TreeError> {
    let trees = enumerate_rooted_trees(n)?;
    let mut memo = HashMap::new();
    let mut out = BTreeMap::new();
    for t in &trees {
        *out.entry(ell_memo(t, &mut memo)).or_insert(0) += 1;
    }
    Ok(out)
}

pub fn split_classes(n: usize) -> Result<Vec<SplitClass>, TreeError> {
    let trees = enumerate_rooted_trees(n)?;
    let mut memo = HashMap::new();
    Ok(trees
        .into_iter()
        .map(|t| {
            let ell = ell_memo(&t, &mut memo);
            SplitClass { tree: t, ell }
        })
        .collect())
}

fn relabel(t: &RootedTree, labels: &[usize]) -> RootedTree {
    let map = |v: usize| if v == 0 { 0 } else { labels[v - 1] };
    RootedTree::from_parent_map(t.parent_map().iter().map(|(&c, &p)| (map(c), map(p))).collect())
        .expect("relabeling preserves trees")
}

fn ordered_set_partitions(n: usize, k: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut assign = vec![0usize; n];
    fn rec(i: usize, k: usize, assign: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == assign.len() {
            let mut blocks = vec![Vec::new(); k];
            for (v, &b) in assign.iter().enumerate() {
                blocks[b].push(v + 1);
            }
            if blocks.iter().all(|b| !b.is_empty()) {
                out.push(blocks);
            }
            return;
        }
        for b in 0..k {
            assign[i] = b;
            rec(i + 1, k, assign, out);
        }
    }
    rec(0, k, &mut assign, &mut out);
    out
}

/// Ground truth by brute force: for every ordered set partition of {1..n}
/// into k blocks and every tuple of trees on those blocks, concatenate and
/// tally. Returns counts[tree][k] = |Sp_k(tree)|.
pub fn count_splittings_exhaustive(n: usize) -> Result<BTreeMap<RootedTree, BTreeMap<usize, u64>>, TreeError> {
    check_size(n, 6)?;
    let by_size: Vec<Vec<RootedTree>> = (0..=n)
        .map(|m| if m == 0 { Vec::new() } else { enumerate_rooted_trees(m).expect("size checked") })
        .collect();
    let mut counts: BTreeMap<RootedTree, BTreeMap<usize, u64>> = BTreeMap::new();
    for k in 1..=n {
        for blocks in ordered_set_partitions(n, k) {
            let choices: Vec<Vec<RootedTree>> = blocks
                .iter()
                .map(|b| by_size[b.len()].iter().map(|t| relabel(t, b)).collect())
                .collect();
            let mut idx = vec![0usize; k];
            loop {
                let tuple: Vec<RootedTree> = idx.iter().zip(&choices).map(|(&i, c)| c[i].clone()).collect();
                let t = penrose_concatenate(&tuple)?;
                *counts.entry(t).or_default().entry(k).or_insert(0) += 1;
                let mut pos = k;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < choices[pos].len() {
                        break;
                    }
                    idx[pos] = 0;
                    if pos == 0 {
                        pos = usize::MAX;
                        break;
                    }
                }
                if pos == usize::MAX {
                    break;
                }
            }
        }
    }
    Ok(counts)
}

/// For every tree on {0..n} and every splitting, checks that the non-tree
/// Penrose edges of the concatenation are the disjoint union of those of the
/// pieces. Returns the number of splittings checked.
pub fn check_faithfulness(n: usize) -> Result<u64, String> {
    let trees = enumerate_rooted_trees(n).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for t in &trees {
        let whole = penrose_extra_edges(t, PenroseRule::Standard);
        let mut k = 2;
        loop {
            let splits = splittings(t, k).map_err(|e| e.to_string())?;
            if splits.is_empty() {
                break;
            }
            for pieces in &splits {
                let mut union = BTreeSet::new();
                let mut star = 0;
                for p in pieces {
                    let mut tree_edges = BTreeSet::new();
                    for (a, b) in p.edges() {
                        let (a, b) = (if a == 0 { star } else { a }, if b == 0 { star } else { b });
                        tree_edges.insert((a.min(b), a.max(b)));
                    }
                    for (a, b) in penrose_extra_edges(p, PenroseRule::Standard) {
                        let (a, b) = (if a == 0 { star } else { a }, if b == 0 { star } else { b });
                        let e = (a.min(b), a.max(b));
                        if tree_edges.contains(&e) || !union.insert(e) {
                            return Err(format!("overlapping extra edge {e:?} in splitting of {t:?}"));
                        }
                    }
                    star = p.j_max();
                }
                if union != whole {
                    return Err(format!("extra edges differ for {t:?} split as {pieces:?}"));
                }
                if penrose_concatenate(pieces).map_err(|e| e.to_string())? != *t {
                    return Err(format!("splitting of {t:?} does not concatenate back"));
                }
                checked += 1;
            }
            k += 1;
        }
    }
    Ok(checked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge_tree(label: usize) -> RootedTree {
        RootedTree::from_parent_map(BTreeMap::from([(label, 0)])).unwrap()
    }

    #[test]
    fn concatenate_examples() {
        let t = RootedTree::from_parents(&[0, 0, 1]).unwrap();
        assert_eq!(penrose_concatenate(std::slice::from_ref(&t)).unwrap(), t);
        let path = penrose_concatenate(&[edge_tree(1), edge_tree(2)]).unwrap();
        assert_eq!(path, RootedTree::from_parents(&[0, 1]).unwrap());
        let a = RootedTree::from_parent_map(BTreeMap::from([(2, 0), (4, 2)])).unwrap();
        let b = RootedTree::from_parent_map(BTreeMap::from([(1, 0), (3, 0)])).unwrap();
        let c = penrose_concatenate(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(c.edges().len(), a.edges().len() + b.edges().len());
        assert_eq!(c.parent(1), Some(4));
    }

    #[test]
    fn label_collision() {
        assert!(matches!(
            penrose_concatenate(&[edge_tree(1), edge_tree(1)]),
            Err(TreeError::LabelCollision(_))
        ));
    }

    #[test]
    fn splitting_examples() {
        let path = RootedTree::from_parents(&[0, 1]).unwrap();
        assert_eq!(count_splittings(&path, 1).unwrap(), 1);
        assert_eq!(count_splittings(&path, 2).unwrap(), 1);
        assert_eq!(
            splittings(&path, 2).unwrap(),
            vec![vec![edge_tree(1), edge_tree(2)]]
        );
        let star = RootedTree::from_parents(&[0, 0]).unwrap();
        assert_eq!(count_splittings(&star, 2).unwrap(), 0);
        assert_eq!(splittability(&star).unwrap(), 1);
    }

    #[test]
    fn structural_count_matches_exhaustive() {
        for n in 1..=5 {
            let truth = count_splittings_exhaustive(n).unwrap();
            let trees = enumerate_rooted_trees(n).unwrap();
            assert_eq!(truth.len(), trees.len());
            for t in &trees {
                for k in 1..=n {
                    let expected = truth[t].get(&k).copied().unwrap_or(0);
                    assert_eq!(count_splittings(t, k).unwrap(), expected, "{t:?}, k={k}");
                }
            }
        }
    }

    #[test]
    fn unsplittable_counts() {
        let expected = [1u64, 1, 4, 27, 256];
        for (i, &e) in expected.iter().enumerate() {
            let n = i + 1;
            assert_eq!(classify_splittable(n).unwrap()[&1], e, "n = {n}");
        }
    }

    #[test]
    fn classes_partition_all_trees() {
        for n in 1..=5usize {
            let total: u64 = classify_splittable(n).unwrap().values().sum();
            assert_eq!(total, (n as u64 + 1).pow(n as u32 - 1));
            for c in split_classes(n).unwrap() {
                assert!(c.ell >= 1 && c.ell <= n);
                assert!(count_splittings(&c.tree, c.ell).unwrap() > 0);
                assert_eq!(count_splittings(&c.tree, c.ell + 1).unwrap(), 0);
            }
        }
    }

    #[test]
    fn faithfulness_small() {
        for n in 1..=4 {
            check_faithfulness(n).unwrap();
        }
    }
}
