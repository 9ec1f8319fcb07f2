//! Seeded random corpora and exhaustive small-tree enumeration.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::seqs::{binary_sequences_of_len, sequences_of_len, FinSeq};
use crate::structures::{FinStructure, Permutation};
use crate::trees::{normal_closure, NormalTree, QoTree, TruncationParams};
use crate::Result;

/// The generator every corpus draws from.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Includes each full-depth node independently with probability `density`,
/// then closes under prefixes and increments.
pub fn random_normal_tree<R: Rng>(rng: &mut R, p: &TruncationParams, density: f64) -> Result<NormalTree> {
    let mut seed = NormalTree::new();
    let seqs = sequences_of_len(p.depth, p.branch);
    for u in binary_sequences_of_len(p.depth) {
        for s in &seqs {
            if rng.gen_bool(density) {
                seed.insert(u.clone(), s.clone());
            }
        }
    }
    normal_closure(&seed, p)
}

/// `count` distinct random normal trees. Gives up after `50 * count` draws,
/// so small bounds may yield fewer.
pub fn tree_corpus(seed: u64, count: usize, p: &TruncationParams, density: f64) -> Result<Vec<NormalTree>> {
    let mut rng = rng(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for _ in 0..50 * count {
        if out.len() == count {
            break;
        }
        let t = random_normal_tree(&mut rng, p, density)?;
        if seen.insert(t.nodes().clone()) {
            out.push(t);
        }
    }
    Ok(out)
}

/// Random triples `(u, v, s)` at every length, prefix-closed but otherwise
/// unconstrained.
pub fn random_qo_tree<R: Rng>(rng: &mut R, p: &TruncationParams, density: f64) -> QoTree {
    let mut out = QoTree::new();
    let seqs = sequences_of_len(p.depth, p.branch);
    let tags = binary_sequences_of_len(p.depth);
    for u in &tags {
        for v in &tags {
            for s in &seqs {
                if rng.gen_bool(density) {
                    for k in 0..=p.depth {
                        out.insert(u.prefix(k), v.prefix(k), s.prefix(k));
                    }
                }
            }
        }
    }
    out
}

/// Erdős–Rényi graph on `0..n`.
pub fn random_graph<R: Rng>(rng: &mut R, n: u64, density: f64) -> FinStructure {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                edges.push((a, b));
            }
        }
    }
    FinStructure::graph(n, &edges).expect("edges are in range")
}

/// Random tree on `0..n`: vertex `k` attaches to a uniform earlier vertex.
pub fn random_tree<R: Rng>(rng: &mut R, n: u64) -> FinStructure {
    let edges: Vec<(u64, u64)> = (1..n).map(|k| (rng.gen_range(0..k), k)).collect();
    FinStructure::graph(n, &edges).expect("edges are in range")
}

pub fn random_permutation<R: Rng>(rng: &mut R, domain: &BTreeSet<u64>) -> Permutation {
    let src: Vec<u64> = domain.iter().copied().collect();
    let mut dst = src.clone();
    dst.shuffle(rng);
    Permutation::new(src.into_iter().zip(dst).collect()).expect("a shuffle is a bijection")
}

fn rooted_form(adj: &[Vec<usize>], v: usize, parent: Option<usize>) -> String {
    let mut kids: Vec<String> = adj[v].iter().filter(|&&w| Some(w) != parent).map(|&w| rooted_form(adj, w, Some(v))).collect();
    kids.sort();
    format!("({})", kids.concat())
}

/// Isomorphism-invariant string of a tree on `0..n`, rooted at its centre
/// (the smaller form when there are two centres).
pub fn tree_canonical_form(adj: &[Vec<usize>]) -> String {
    let n = adj.len();
    if n == 0 {
        return String::new();
    }
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
    let mut left = n;
    while left > 2 {
        left -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &w in &adj[v] {
                deg[w] -= 1;
                if deg[w] == 1 {
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    layer.iter().map(|&c| rooted_form(adj, c, None)).min().expect("a tree has a centre")
}

/// One representative per isomorphism class of trees on `n` vertices,
/// ordered by canonical form.
pub fn free_trees(n: usize) -> Vec<FinStructure> {
    if n == 0 {
        return Vec::new();
    }
    let mut level: BTreeMap<String, Vec<Vec<usize>>> = BTreeMap::from([(String::from("()"), vec![Vec::new()])]);
    for size in 1..n {
        let mut next = BTreeMap::new();
        for adj in level.values() {
            for v in 0..size {
                let mut grown = adj.clone();
                grown.push(vec![v]);
                grown[v].push(size);
                next.entry(tree_canonical_form(&grown)).or_insert(grown);
            }
        }
        level = next;
    }
    level
        .into_values()
        .map(|adj| {
            let edges: Vec<(u64, u64)> =
                adj.iter().enumerate().flat_map(|(a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a as u64, b as u64))).collect();
            FinStructure::graph(n as u64, &edges).expect("edges are in range")
        })
        .collect()
}

/// Whether two valence-1 vertices sit at distance 2.
pub fn has_close_leaves(g: &FinStructure) -> bool {
    let leaves: Vec<u64> = g.domain().iter().copied().filter(|&v| g.degree(v) == 1).collect();
    leaves.iter().any(|&a| {
        let d = g.bfs_distances(a);
        leaves.iter().any(|b| d.get(b) == Some(&2))
    })
}

/// Every simple path with at least `min_vertices` vertices in a tree, each
/// listed once from its smaller endpoint.
pub fn tree_paths(g: &FinStructure, min_vertices: usize) -> Vec<Vec<u64>> {
    let adj = g.adjacency();
    let mut out = Vec::new();
    for &start in g.domain() {
        let mut stack = vec![vec![start]];
        while let Some(path) = stack.pop() {
            let last = *path.last().expect("nonempty");
            if path.len() >= min_vertices && start < last {
                out.push(path.clone());
            }
            for &w in &adj[&last] {
                if !path.contains(&w) {
                    let mut longer = path.clone();
                    longer.push(w);
                    stack.push(longer);
                }
            }
        }
    }
    out.sort();
    out
}

/// Random sequence within the bounds.
pub fn random_seq<R: Rng>(rng: &mut R, p: &TruncationParams, len: usize) -> FinSeq {
    FinSeq::new((0..len).map(|_| rng.gen_range(0..p.branch)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::check_normal;

    #[test]
    fn free_tree_counts() {
        let counts: Vec<usize> = (1..=9).map(|n| free_trees(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 1, 2, 3, 6, 11, 23, 47]);
        assert!(free_trees(6).iter().all(FinStructure::is_combinatorial_tree));
    }

    #[test]
    fn random_trees_are_normal_and_seeded() {
        let p = TruncationParams::new(2, 2, 1).unwrap();
        let a = tree_corpus(3, 10, &p, 0.2).unwrap();
        let b = tree_corpus(3, 10, &p, 0.2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        for t in &a {
            assert!(check_normal(t, &p).unwrap());
        }
    }

    #[test]
    fn random_qo_trees_are_prefix_closed() {
        let p = TruncationParams::new(2, 3, 1).unwrap();
        let t = random_qo_tree(&mut rng(9), &p, 0.1);
        assert!(t.is_prefix_closed());
        assert!(t.check_bounds(&p).is_ok());
    }

    #[test]
    fn close_leaves_and_paths() {
        let path3 = FinStructure::graph(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(has_close_leaves(&path3));
        let path4 = FinStructure::graph(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(!has_close_leaves(&path4));
        assert_eq!(tree_paths(&path4, 4), vec![vec![0, 1, 2, 3]]);
        assert_eq!(tree_paths(&path4, 3).len(), 3);
    }

    #[test]
    fn permutations_cover_the_domain() {
        let dom: BTreeSet<u64> = [2, 4, 8].into();
        let p = random_permutation(&mut rng(1), &dom);
        assert_eq!(p.domain(), dom);
    }
}
