//! Finite metric spaces with exact dyadic distances: geodesic spaces of
//! graphs, the ultrametric space of maximal paths through a plus-gadget
//! build, and isometric-embedding search.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::gadgets::{build_gprime, GadgetBuild};
use crate::morphisms::Morphism;
use crate::seqs::FinSeq;
use crate::structures::FinStructure;
use crate::trees::{NormalTree, TruncationParams};
use crate::{Error, Result};

/// `num · 2^(-exp)` in lowest terms (`num` odd, or zero with `exp = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    num: u64,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };

    pub fn new(num: u64, exp: u32) -> Dyadic {
        if num == 0 {
            return Dyadic::ZERO;
        }
        let shift = num.trailing_zeros().min(exp);
        Dyadic { num: num >> shift, exp: exp - shift }
    }

    pub fn integer(n: u64) -> Dyadic {
        Dyadic::new(n, 0)
    }

    /// `2^(-n)`
    pub fn inverse_power(n: u32) -> Dyadic {
        Dyadic::new(1, n)
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// Whether the value is `2^k` for some integer `k` (possibly negative).
    pub fn is_power_of_two(&self) -> bool {
        self.num.is_power_of_two()
    }

    /// Sum, or `None` on overflow.
    pub fn checked_add(&self, other: &Dyadic) -> Option<Dyadic> {
        let exp = self.exp.max(other.exp);
        let a = self.num.checked_shl(exp - self.exp).filter(|v| v >> (exp - self.exp) == self.num)?;
        let b = other.num.checked_shl(exp - other.exp).filter(|v| v >> (exp - other.exp) == other.num)?;
        Some(Dyadic::new(a.checked_add(b)?, exp))
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / 2f64.powi(self.exp as i32)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        let a = (self.num as u128) << (exp - self.exp);
        let b = (other.num as u128) << (exp - other.exp);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

/// Points with a symmetric dyadic distance matrix, zero exactly on the
/// diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinMetricSpace {
    points: Vec<String>,
    dist: Vec<Vec<Dyadic>>,
}

impl FinMetricSpace {
    pub fn new(points: Vec<String>, dist: Vec<Vec<Dyadic>>) -> Result<Self> {
        let n = points.len();
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::SizeMismatch(format!("distance matrix is not {n}x{n}")));
        }
        for i in 0..n {
            for j in 0..n {
                if dist[i][j] != dist[j][i] {
                    return Err(Error::Invalid(format!("distance ({i},{j}) is not symmetric")));
                }
                if (i == j) != dist[i][j].is_zero() {
                    return Err(Error::Invalid(format!("distance ({i},{j}) breaks identity of indiscernibles")));
                }
            }
        }
        Ok(FinMetricSpace { points, dist })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn d(&self, i: usize, j: usize) -> Dyadic {
        self.dist[i][j]
    }

    /// Sorted distances from `i` to every other point.
    fn profile(&self, i: usize) -> Vec<Dyadic> {
        let mut row: Vec<Dyadic> = (0..self.len()).filter(|&j| j != i).map(|j| self.dist[i][j]).collect();
        row.sort();
        row
    }
}

/// Shortest-path distances between the vertices of a connected graph.
pub fn geodesic_space(g: &FinStructure) -> Result<FinMetricSpace> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let vs: Vec<u64> = g.domain().iter().copied().collect();
    let dist = vs
        .iter()
        .map(|&v| {
            let row = g.bfs_distances(v);
            vs.iter().map(|w| Dyadic::integer(row[w] as u64)).collect()
        })
        .collect();
    FinMetricSpace::new(vs.iter().map(|v| v.to_string()).collect(), dist)
}

/// Maximal paths from `start` in a tree: one per valence-1 vertex other
/// than `start`, in code order of their endpoints.
pub fn maximal_paths(g: &FinStructure, start: u64) -> Result<Vec<Vec<u64>>> {
    if !g.is_combinatorial_tree() {
        return Err(Error::Invalid("maximal paths need a combinatorial tree".into()));
    }
    let adj = g.adjacency();
    let mut parent: BTreeMap<u64, u64> = BTreeMap::new();
    let mut stack = vec![start];
    let mut seen = std::collections::BTreeSet::from([start]);
    while let Some(v) = stack.pop() {
        for &w in &adj[&v] {
            if seen.insert(w) {
                parent.insert(w, v);
                stack.push(w);
            }
        }
    }
    let mut paths = Vec::new();
    for (&v, nbrs) in &adj {
        if v != start && nbrs.len() == 1 {
            let mut path = vec![v];
            let mut cur = v;
            while let Some(&p) = parent.get(&cur) {
                path.push(p);
                cur = p;
            }
            path.reverse();
            paths.push(path);
        }
    }
    if paths.is_empty() {
        paths.push(vec![start]);
    }
    Ok(paths)
}

/// `2^(-n)` where `n` counts the shared vertices; 0 for equal paths.
pub fn path_distance(a: &[u64], b: &[u64]) -> Dyadic {
    if a == b {
        return Dyadic::ZERO;
    }
    let shared = a.iter().filter(|v| b.contains(v)).count();
    Dyadic::inverse_power(shared as u32)
}

/// `U_T` with the underlying build and the path behind every point.
pub struct UltraSpace {
    pub space: FinMetricSpace,
    pub paths: Vec<Vec<u64>>,
    pub build: GadgetBuild,
}

/// The maximal paths from `∅` in `G'_T` with `d = 2^(-shared vertices)`.
pub fn ultra_space(t: &NormalTree, p: &TruncationParams) -> Result<UltraSpace> {
    let build = build_gprime(t, p)?;
    let start = build.seq_code_of(&FinSeq::empty()).expect("∅ is always built");
    let paths = maximal_paths(&build.structure, start)?;
    let space = path_space(&build.structure, &paths)?;
    Ok(UltraSpace { space, paths, build })
}

fn path_space(g: &FinStructure, paths: &[Vec<u64>]) -> Result<FinMetricSpace> {
    let names = paths
        .iter()
        .map(|path| {
            let end = *path.last().expect("paths are nonempty");
            g.label(end).map(str::to_string).unwrap_or_else(|| end.to_string())
        })
        .collect();
    let dist = paths.iter().map(|a| paths.iter().map(|b| path_distance(a, b)).collect()).collect();
    FinMetricSpace::new(names, dist)
}

/// Strong triangle inequality over all triples.
pub fn is_ultrametric(m: &FinMetricSpace) -> bool {
    let n = m.len();
    (0..n).all(|x| (0..n).all(|y| (0..n).all(|z| m.d(x, y) <= m.d(x, z).max(m.d(z, y)))))
}

/// Triangle inequality over all triples.
pub fn is_metric(m: &FinMetricSpace) -> bool {
    let n = m.len();
    (0..n).all(|x| {
        (0..n).all(|y| (0..n).all(|z| m.d(x, z).checked_add(&m.d(z, y)).is_none_or(|sum| m.d(x, y) <= sum)))
    })
}

/// Whether `needle` is a sub-multiset of `hay` (both sorted).
fn sub_multiset(needle: &[Dyadic], hay: &[Dyadic]) -> bool {
    let mut j = 0;
    for x in needle {
        while j < hay.len() && hay[j] < *x {
            j += 1;
        }
        if j == hay.len() || hay[j] != *x {
            return false;
        }
        j += 1;
    }
    true
}

struct IsoSearch<'a> {
    m: &'a FinMetricSpace,
    n: &'a FinMetricSpace,
    allowed: Vec<Vec<usize>>,
    img: Vec<usize>,
    used: Vec<bool>,
    found: Vec<Vec<usize>>,
    limit: Option<usize>,
}

impl IsoSearch<'_> {
    fn run(&mut self, i: usize) {
        if self.limit.is_some_and(|l| self.found.len() >= l) {
            return;
        }
        if i == self.m.len() {
            self.found.push(self.img.clone());
            return;
        }
        for k in 0..self.allowed[i].len() {
            let y = self.allowed[i][k];
            if self.used[y] || (0..i).any(|j| self.n.d(y, self.img[j]) != self.m.d(i, j)) {
                continue;
            }
            self.img[i] = y;
            self.used[y] = true;
            self.run(i + 1);
            self.used[y] = false;
            if self.limit.is_some_and(|l| self.found.len() >= l) {
                return;
            }
        }
    }
}

/// Every distance-preserving injection of `m` into `n`, up to `limit`, as
/// image index lists in lexicographic order.
pub fn all_isometric_embeddings(m: &FinMetricSpace, n: &FinMetricSpace, limit: Option<usize>) -> Vec<Vec<usize>> {
    if m.len() > n.len() {
        return Vec::new();
    }
    let n_profiles: Vec<Vec<Dyadic>> = (0..n.len()).map(|j| n.profile(j)).collect();
    let allowed = (0..m.len())
        .map(|i| {
            let prof = m.profile(i);
            (0..n.len()).filter(|&j| sub_multiset(&prof, &n_profiles[j])).collect()
        })
        .collect();
    let mut search = IsoSearch { m, n, allowed, img: vec![0; m.len()], used: vec![false; n.len()], found: Vec::new(), limit };
    search.run(0);
    search.found
}

/// The lexicographically least isometric embedding of `m` into `n`.
pub fn find_isometric_embedding(m: &FinMetricSpace, n: &FinMetricSpace) -> Option<Vec<usize>> {
    all_isometric_embeddings(m, n, Some(1)).pop()
}

/// Maps each maximal path of the source build to a maximal path of the
/// target build through an embedding `g`. Images that stop short of a leaf
/// are continued through the least-coded neighbour until one is reached.
pub fn induced_path_map(g: &Morphism, source: &UltraSpace, target: &UltraSpace) -> Result<Vec<usize>> {
    let adj = target.build.structure.adjacency();
    let index: BTreeMap<&Vec<u64>, usize> = target.paths.iter().enumerate().map(|(i, p)| (p, i)).collect();
    source
        .paths
        .iter()
        .map(|path| {
            let mut image: Vec<u64> = path
                .iter()
                .map(|v| g.apply(*v).ok_or_else(|| Error::PartialMap(format!("vertex {v} has no image"))))
                .collect::<Result<_>>()?;
            loop {
                let last = *image.last().expect("paths are nonempty");
                let prev = image.len().checked_sub(2).map(|i| image[i]);
                match adj[&last].iter().copied().find(|&w| Some(w) != prev) {
                    Some(next) if adj[&last].len() > 1 || prev.is_none() => image.push(next),
                    _ => break,
                }
            }
            index
                .get(&image)
                .copied()
                .ok_or_else(|| Error::Invalid("image path does not start at the target's ∅".into()))
        })
        .collect()
}

/// Whether `map` preserves every distance from `m` into `n`.
pub fn is_isometric(map: &[usize], m: &FinMetricSpace, n: &FinMetricSpace) -> bool {
    map.len() == m.len() && (0..m.len()).all(|i| (0..m.len()).all(|j| n.d(map[i], map[j]) == m.d(i, j)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(dists: &[(usize, usize, Dyadic)], n: usize) -> FinMetricSpace {
        let mut d = vec![vec![Dyadic::ZERO; n]; n];
        for &(i, j, v) in dists {
            d[i][j] = v;
            d[j][i] = v;
        }
        FinMetricSpace::new((0..n).map(|i| i.to_string()).collect(), d).unwrap()
    }

    #[test]
    fn dyadic_normal_form_and_order() {
        assert_eq!(Dyadic::new(4, 3), Dyadic::new(1, 1));
        assert_eq!(Dyadic::new(0, 5), Dyadic::ZERO);
        assert!(Dyadic::inverse_power(3) < Dyadic::inverse_power(2));
        assert!(Dyadic::integer(1) > Dyadic::new(3, 2));
        assert_eq!(Dyadic::new(1, 2).checked_add(&Dyadic::new(1, 2)), Some(Dyadic::new(1, 1)));
        assert!(Dyadic::new(1, 3).is_power_of_two());
        assert!(!Dyadic::new(3, 3).is_power_of_two());
        assert_eq!(Dyadic::new(1, 3).to_f64(), 0.125);
    }

    #[test]
    fn geodesic_examples() {
        let path = FinStructure::graph(3, &[(0, 1), (1, 2)]).unwrap();
        let m = geodesic_space(&path).unwrap();
        assert_eq!(m.d(0, 2), Dyadic::integer(2));
        assert_eq!(m.d(0, 1), Dyadic::integer(1));
        assert!(is_metric(&m));
        assert!(geodesic_space(&FinStructure::graph(2, &[]).unwrap()).is_err());
    }

    #[test]
    fn ultrametric_examples() {
        let half = Dyadic::new(1, 1);
        let quarter = Dyadic::new(1, 2);
        assert!(is_ultrametric(&space(&[(0, 1, half), (0, 2, half), (1, 2, quarter)], 3)));
        assert!(!is_ultrametric(&space(&[(0, 1, Dyadic::integer(1)), (0, 2, quarter), (1, 2, quarter)], 3)));
    }

    #[test]
    fn ultra_space_of_bare_root() {
        let p = TruncationParams::new(0, 2, 1).unwrap();
        let u = ultra_space(&NormalTree::new(), &p).unwrap();
        assert_eq!(u.space.len(), 3);
        for i in 0..3 {
            assert_eq!(u.space.d(i, i), Dyadic::ZERO);
            for j in 0..3 {
                if i != j {
                    assert_eq!(u.space.d(i, j), Dyadic::inverse_power(3));
                }
            }
        }
        assert!(is_ultrametric(&u.space));
    }

    #[test]
    fn path_count_matches_leaf_count() {
        let p = TruncationParams::new(1, 2, 1).unwrap();
        let t = NormalTree::from_nodes([(FinSeq::empty(), FinSeq::empty())]);
        let u = ultra_space(&t, &p).unwrap();
        let leaves = u.build.structure.domain().iter().filter(|&&v| u.build.structure.degree(v) == 1).count();
        assert_eq!(u.space.len(), leaves);
        assert!(is_ultrametric(&u.space));
    }

    #[test]
    fn isometric_embedding_examples() {
        let half = Dyadic::new(1, 1);
        let quarter = Dyadic::new(1, 2);
        let m = space(&[(0, 1, half), (0, 2, half), (1, 2, quarter)], 3);
        assert_eq!(find_isometric_embedding(&m, &m), Some(vec![0, 1, 2]));
        let sub = space(&[(0, 1, quarter)], 2);
        assert!(find_isometric_embedding(&sub, &m).is_some());
        let far = space(&[(0, 1, half)], 2);
        assert!(find_isometric_embedding(&far, &sub).is_none());
        assert_eq!(all_isometric_embeddings(&sub, &m, None), vec![vec![1, 2], vec![2, 1]]);
    }
}
