//! Finite relational structures with an edge relation `P`, an optional
//! binary relation `Q` and an optional root, together with finite
//! injections, permutations and the subgroup predicates `H`, `H₁`, `H₂`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::gadgets::{pi0, rp, GadgetBuild, GadgetVertex};
use crate::seqs::unpair;
use crate::{Error, Result};

/// Vertices are natural-number codes. Edges are symmetric and irreflexive
/// and stored once as `(a, b)` with `a < b`. Labels are cosmetic and do not
/// take part in equality.
#[derive(Debug, Clone, Default)]
pub struct FinStructure {
    domain: BTreeSet<u64>,
    edges: BTreeSet<(u64, u64)>,
    order: BTreeSet<(u64, u64)>,
    root: Option<u64>,
    labels: BTreeMap<u64, String>,
}

impl PartialEq for FinStructure {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain && self.edges == other.edges && self.order == other.order && self.root == other.root
    }
}

impl Eq for FinStructure {}

impl FinStructure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_vertices<I: IntoIterator<Item = u64>>(vertices: I) -> Self {
        FinStructure { domain: vertices.into_iter().collect(), ..Self::default() }
    }

    /// Graph on `0..n` with the given edges.
    pub fn graph(n: u64, edges: &[(u64, u64)]) -> Result<Self> {
        let mut g = Self::with_vertices(0..n);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self, v: u64) -> bool {
        self.domain.insert(v)
    }

    fn require(&self, v: u64) -> Result<()> {
        if self.domain.contains(&v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    pub fn add_edge(&mut self, a: u64, b: u64) -> Result<bool> {
        self.require(a)?;
        self.require(b)?;
        if a == b {
            return Err(Error::SelfLoop(a));
        }
        Ok(self.edges.insert((a.min(b), a.max(b))))
    }

    pub fn add_order(&mut self, a: u64, b: u64) -> Result<bool> {
        self.require(a)?;
        self.require(b)?;
        Ok(self.order.insert((a, b)))
    }

    pub fn set_root(&mut self, root: Option<u64>) -> Result<()> {
        if let Some(r) = root {
            self.require(r)?;
        }
        self.root = root;
        Ok(())
    }

    pub fn set_label(&mut self, v: u64, label: String) -> Result<()> {
        self.require(v)?;
        self.labels.insert(v, label);
        Ok(())
    }

    pub fn domain(&self) -> &BTreeSet<u64> {
        &self.domain
    }

    pub fn edges(&self) -> &BTreeSet<(u64, u64)> {
        &self.edges
    }

    pub fn order(&self) -> &BTreeSet<(u64, u64)> {
        &self.order
    }

    pub fn root(&self) -> Option<u64> {
        self.root
    }

    pub fn labels(&self) -> &BTreeMap<u64, String> {
        &self.labels
    }

    pub fn label(&self, v: u64) -> Option<&str> {
        self.labels.get(&v).map(String::as_str)
    }

    pub fn vertex_count(&self) -> usize {
        self.domain.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: u64, b: u64) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn has_order(&self, a: u64, b: u64) -> bool {
        self.order.contains(&(a, b))
    }

    /// Sorted neighbour lists for every vertex (empty lists included).
    pub fn adjacency(&self) -> BTreeMap<u64, Vec<u64>> {
        let mut adj: BTreeMap<u64, Vec<u64>> = self.domain.iter().map(|&v| (v, Vec::new())).collect();
        for &(a, b) in &self.edges {
            if let Some(l) = adj.get_mut(&a) { l.push(b) }
            if let Some(l) = adj.get_mut(&b) { l.push(a) }
        }
        for list in adj.values_mut() {
            list.sort_unstable();
        }
        adj
    }

    pub fn degree(&self, v: u64) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    /// Same vertices, edges and root; `Q` dropped.
    pub fn without_order(&self) -> FinStructure {
        FinStructure { order: BTreeSet::new(), ..self.clone() }
    }

    /// Edge-count distances from `start`; unreachable vertices are absent.
    pub fn bfs_distances(&self, start: u64) -> BTreeMap<u64, usize> {
        let adj = self.adjacency();
        let mut dist = BTreeMap::new();
        if !self.domain.contains(&start) {
            return dist;
        }
        dist.insert(start, 0);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            for &w in &adj[&v] {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        match self.domain.iter().next() {
            None => true,
            Some(&v) => self.bfs_distances(v).len() == self.domain.len(),
        }
    }

    /// No cycles (each component is a tree).
    pub fn is_acyclic(&self) -> bool {
        let mut parent: BTreeMap<u64, u64> = self.domain.iter().map(|&v| (v, v)).collect();
        fn find(parent: &mut BTreeMap<u64, u64>, v: u64) -> u64 {
            let mut r = v;
            while parent[&r] != r {
                r = parent[&r];
            }
            let mut c = v;
            while parent[&c] != r {
                let next = parent[&c];
                parent.insert(c, r);
                c = next;
            }
            r
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return false;
            }
            parent.insert(ra, rb);
        }
        true
    }

    /// Connected and acyclic.
    pub fn is_combinatorial_tree(&self) -> bool {
        !self.domain.is_empty() && self.is_connected() && self.edges.len() + 1 == self.domain.len()
    }

    pub fn order_is_reflexive(&self) -> bool {
        self.domain.iter().all(|&v| self.has_order(v, v))
    }

    pub fn order_is_irreflexive(&self) -> bool {
        self.order.iter().all(|&(a, b)| a != b)
    }

    pub fn order_is_symmetric(&self) -> bool {
        self.order.iter().all(|&(a, b)| self.has_order(b, a))
    }

    pub fn order_is_antisymmetric(&self) -> bool {
        self.order.iter().all(|&(a, b)| a == b || !self.has_order(b, a))
    }

    pub fn order_is_transitive(&self) -> bool {
        let mut succ: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for &(a, b) in &self.order {
            succ.entry(a).or_default().push(b);
        }
        self.order
            .iter()
            .all(|&(a, b)| succ.get(&b).is_none_or(|cs| cs.iter().all(|&c| self.has_order(a, c))))
    }

    /// Any two distinct vertices are comparable.
    pub fn order_is_total(&self) -> bool {
        let vs: Vec<u64> = self.domain.iter().copied().collect();
        vs.iter()
            .enumerate()
            .all(|(i, &a)| vs[i + 1..].iter().all(|&b| self.has_order(a, b) || self.has_order(b, a)))
    }

    pub fn order_is_linear(&self) -> bool {
        self.order_is_reflexive() && self.order_is_antisymmetric() && self.order_is_transitive() && self.order_is_total()
    }

    pub fn order_is_strict_linear(&self) -> bool {
        self.order_is_irreflexive() && self.order_is_antisymmetric() && self.order_is_transitive() && self.order_is_total()
    }

    pub fn order_is_equivalence(&self) -> bool {
        self.order_is_reflexive() && self.order_is_symmetric() && self.order_is_transitive()
    }

    /// The substructure induced on `keep`.
    pub fn induced(&self, keep: &BTreeSet<u64>) -> FinStructure {
        FinStructure {
            domain: self.domain.intersection(keep).copied().collect(),
            edges: self.edges.iter().filter(|(a, b)| keep.contains(a) && keep.contains(b)).copied().collect(),
            order: self.order.iter().filter(|(a, b)| keep.contains(a) && keep.contains(b)).copied().collect(),
            root: self.root.filter(|r| keep.contains(r)),
            labels: self.labels.iter().filter(|(v, _)| keep.contains(v)).map(|(v, l)| (*v, l.clone())).collect(),
        }
    }
}

/// An injection from `0..map.len()` into `0..codomain`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinInjection {
    map: Vec<u64>,
    codomain: usize,
}

impl FinInjection {
    pub fn new(map: Vec<u64>, codomain: usize) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &j in &map {
            if j as usize >= codomain {
                return Err(Error::OutOfBounds(format!("image {j} outside codomain of size {codomain}")));
            }
            if !seen.insert(j) {
                return Err(Error::NotInjective(format!("{j} is hit twice")));
            }
        }
        Ok(FinInjection { map, codomain })
    }

    pub fn identity(n: usize) -> Self {
        FinInjection { map: (0..n as u64).collect(), codomain: n }
    }

    pub fn domain_size(&self) -> usize {
        self.map.len()
    }

    pub fn codomain_size(&self) -> usize {
        self.codomain
    }

    pub fn apply(&self, i: u64) -> Option<u64> {
        self.map.get(i as usize).copied()
    }

    pub fn images(&self) -> &[u64] {
        &self.map
    }

    /// Preimage of `j`, if `j` is in the range.
    pub fn preimage(&self, j: u64) -> Option<u64> {
        self.map.iter().position(|&x| x == j).map(|i| i as u64)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &FinInjection) -> Result<FinInjection> {
        if self.codomain != other.domain_size() {
            return Err(Error::SizeMismatch(format!(
                "cannot compose injection into {} with one from {}",
                self.codomain,
                other.domain_size()
            )));
        }
        Ok(FinInjection { map: self.map.iter().map(|&j| other.map[j as usize]).collect(), codomain: other.codomain })
    }

    /// Every injection from `0..n` into `0..m`, in lexicographic order.
    pub fn all(n: usize, m: usize) -> Vec<FinInjection> {
        fn go(n: usize, m: usize, cur: &mut Vec<u64>, out: &mut Vec<FinInjection>) {
            if cur.len() == n {
                out.push(FinInjection { map: cur.clone(), codomain: m });
                return;
            }
            for j in 0..m as u64 {
                if !cur.contains(&j) {
                    cur.push(j);
                    go(n, m, cur, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(n, m, &mut Vec::new(), &mut out);
        out
    }
}

/// A bijection of an explicit finite set of codes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: BTreeMap<u64, u64>,
}

impl Permutation {
    pub fn new(map: BTreeMap<u64, u64>) -> Result<Self> {
        let images: BTreeSet<u64> = map.values().copied().collect();
        if images.len() != map.len() {
            return Err(Error::NotInjective("permutation repeats an image".into()));
        }
        if !images.iter().eq(map.keys()) {
            return Err(Error::Invalid("permutation does not map its domain onto itself".into()));
        }
        Ok(Permutation { map })
    }

    pub fn identity<I: IntoIterator<Item = u64>>(domain: I) -> Self {
        Permutation { map: domain.into_iter().map(|v| (v, v)).collect() }
    }

    /// Exchanges `a` and `b` and fixes the rest of `domain`.
    pub fn transposition<I: IntoIterator<Item = u64>>(domain: I, a: u64, b: u64) -> Result<Self> {
        let mut map: BTreeMap<u64, u64> = domain.into_iter().map(|v| (v, v)).collect();
        if !map.contains_key(&a) || !map.contains_key(&b) {
            return Err(Error::Invalid(format!("transposition ({a} {b}) outside the domain")));
        }
        map.insert(a, b);
        map.insert(b, a);
        Ok(Permutation { map })
    }

    pub fn from_injection(inj: &FinInjection) -> Result<Self> {
        if inj.domain_size() != inj.codomain_size() {
            return Err(Error::SizeMismatch("injection is not onto its codomain".into()));
        }
        Permutation::new(inj.images().iter().enumerate().map(|(i, &j)| (i as u64, j)).collect())
    }

    pub fn apply(&self, v: u64) -> Option<u64> {
        self.map.get(&v).copied()
    }

    pub fn map(&self) -> &BTreeMap<u64, u64> {
        &self.map
    }

    pub fn domain(&self) -> BTreeSet<u64> {
        self.map.keys().copied().collect()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(a, b)| a == b)
    }

    /// `self ∘ other` (apply `other` first).
    pub fn after(&self, other: &Permutation) -> Result<Permutation> {
        if self.map.len() != other.map.len() || !self.map.keys().eq(other.map.keys()) {
            return Err(Error::Invalid("permutations act on different domains".into()));
        }
        Ok(Permutation { map: other.map.iter().map(|(&a, b)| (a, self.map[b])).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        Permutation { map: self.map.iter().map(|(&a, &b)| (b, a)).collect() }
    }

    /// Every permutation of `domain` (lexicographic by image list).
    pub fn all(domain: &[u64]) -> Vec<Permutation> {
        let n = domain.len();
        FinInjection::all(n, n)
            .into_iter()
            .map(|inj| Permutation {
                map: inj.images().iter().enumerate().map(|(i, &j)| (domain[i], domain[j as usize])).collect(),
            })
            .collect()
    }
}

/// Transports `a` along `p`: vertex `v` becomes `p(v)`.
pub fn relabel(p: &Permutation, a: &FinStructure) -> Result<FinStructure> {
    let img = |v: u64| p.apply(v).ok_or_else(|| Error::PartialMap(format!("permutation misses vertex {v}")));
    let mut out = FinStructure::new();
    for &v in &a.domain {
        out.domain.insert(img(v)?);
    }
    for &(x, y) in &a.edges {
        let (px, py) = (img(x)?, img(y)?);
        out.edges.insert((px.min(py), px.max(py)));
    }
    for &(x, y) in &a.order {
        out.order.insert((img(x)?, img(y)?));
    }
    out.root = a.root.map(img).transpose()?;
    for (&v, label) in &a.labels {
        out.labels.insert(img(v)?, label.clone());
    }
    Ok(out)
}

/// Literal equality: same domain, edges, order and root.
pub fn structures_equal(a: &FinStructure, b: &FinStructure) -> bool {
    a == b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subgroup {
    /// Column permutations of the coded plus-gadget graphs.
    H,
    /// Preserves relevant-pair equality on sequences, fixes leaves.
    H1,
    /// Fixes every sequence.
    H2,
}

/// What a subgroup predicate is evaluated against.
#[derive(Debug, Clone, Copy)]
pub enum SubgroupContext<'a> {
    /// An explicit set of pair codes `⟨n, k⟩` (for `H`).
    Codes(&'a BTreeSet<u64>),
    /// A gadget build; `H` uses its domain, `H₁`/`H₂` its vertex names.
    Build(&'a GadgetBuild),
}

/// Column map `n -> m` of a code permutation, if it moves whole columns
/// row-preservingly.
fn column_map(p: &Permutation) -> Option<BTreeMap<u64, u64>> {
    let mut cols: BTreeMap<u64, u64> = BTreeMap::new();
    for (&a, &b) in p.map() {
        let (n, k) = unpair(a);
        let (m, k2) = unpair(b);
        if k != k2 {
            return None;
        }
        match cols.insert(n, m) {
            Some(prev) if prev != m => return None,
            _ => {}
        }
    }
    Some(cols)
}

fn h_column_ok(n: u64, m: u64) -> bool {
    if n <= 4 {
        return m == n;
    }
    match (n - 5) % 3 {
        // branch-ray column: any ray column hanging off the same sequence
        0 => m >= 5 && (m - 5).is_multiple_of(3) && pi0((m - 5) / 3) == pi0((n - 5) / 3),
        1 => m == n || m == n + 1,
        _ => m == n || m == n - 1,
    }
}

/// Whether `p` satisfies every defining clause of the chosen subgroup on
/// the truncated domain.
pub fn in_subgroup(p: &Permutation, which: Subgroup, ctx: SubgroupContext<'_>) -> Result<bool> {
    let domain = match ctx {
        SubgroupContext::Codes(d) => d.clone(),
        SubgroupContext::Build(b) => b.structure.domain().clone(),
    };
    if p.domain() != domain {
        return Err(Error::Invalid("permutation domain differs from the context domain".into()));
    }
    match which {
        Subgroup::H => Ok(column_map(p).is_some_and(|cols| cols.iter().all(|(&n, &m)| h_column_ok(n, m)))),
        Subgroup::H1 | Subgroup::H2 => {
            let SubgroupContext::Build(build) = ctx else {
                return Err(Error::Invalid("H1/H2 need a sequence-tree build".into()));
            };
            let vertex = |c: u64| &build.vertices[&c];
            let mut seqs = Vec::new();
            for (&a, &b) in p.map() {
                match (vertex(a), vertex(b)) {
                    (GadgetVertex::Leaf(_), _) if a != b => return Ok(false),
                    (GadgetVertex::Seq(_), GadgetVertex::Seq(_)) => seqs.push((a, b)),
                    (GadgetVertex::Seq(_), _) => return Ok(false),
                    _ => {}
                }
            }
            if which == Subgroup::H2 {
                return Ok(seqs.iter().all(|(a, b)| a == b));
            }
            let pair_of = |c: u64| match vertex(c) {
                GadgetVertex::Seq(s) => rp(s).ok(),
                _ => None,
            };
            Ok(seqs.iter().all(|&(a, pa)| {
                seqs.iter().all(|&(b, pb)| (pair_of(a) == pair_of(b)) == (pair_of(pa) == pair_of(pb)))
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqs::pair;

    fn path3() -> FinStructure {
        FinStructure::graph(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn edges_are_symmetric_and_irreflexive() {
        let mut g = path3();
        assert!(g.has_edge(1, 0));
        assert!(!g.add_edge(1, 0).unwrap());
        assert_eq!(g.add_edge(2, 2), Err(Error::SelfLoop(2)));
        assert_eq!(g.add_edge(2, 9), Err(Error::UnknownVertex(9)));
        assert!(g.is_combinatorial_tree());
        g.add_edge(0, 2).unwrap();
        assert!(!g.is_acyclic());
    }

    #[test]
    fn relabel_examples() {
        let mut a = path3();
        a.add_order(0, 1).unwrap();
        let id = Permutation::identity(0..3);
        assert_eq!(relabel(&id, &a).unwrap(), a);
        let swap = Permutation::transposition(0..3, 0, 1).unwrap();
        let moved = relabel(&swap, &a).unwrap();
        assert!(moved.has_edge(0, 1));
        assert!(moved.has_order(1, 0));
        assert!(!moved.has_order(0, 1));
        assert!(!structures_equal(&a, &moved));
        let short = Permutation::identity(0..2);
        assert!(relabel(&short, &a).is_err());
    }

    #[test]
    fn relabel_is_an_action() {
        let mut a = FinStructure::graph(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        a.add_order(2, 3).unwrap();
        a.set_root(Some(0)).unwrap();
        let perms = Permutation::all(&[0, 1, 2, 3]);
        for p in &perms {
            for q in perms.iter().step_by(5) {
                let lhs = relabel(&p.after(q).unwrap(), &a).unwrap();
                let rhs = relabel(p, &relabel(q, &a).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::new(BTreeMap::from([(0, 1), (1, 1)])).is_err());
        assert!(Permutation::new(BTreeMap::from([(0, 2), (1, 0)])).is_err());
        let p = Permutation::new(BTreeMap::from([(0, 1), (1, 2), (2, 0)])).unwrap();
        assert!(p.after(&p.inverse()).unwrap().is_identity());
        assert_eq!(Permutation::all(&[3, 5, 7]).len(), 6);
        assert_eq!(FinInjection::all(2, 3).len(), 6);
        assert!(FinInjection::new(vec![0, 0], 2).is_err());
        assert!(FinInjection::new(vec![2], 2).is_err());
    }

    fn grid(columns: u64, rows: u64) -> BTreeSet<u64> {
        (0..columns).flat_map(|n| (0..rows).map(move |k| pair(n, k))).collect()
    }

    fn column_swap(domain: &BTreeSet<u64>, a: u64, b: u64) -> Permutation {
        Permutation::new(
            domain
                .iter()
                .map(|&c| {
                    let (n, k) = unpair(c);
                    let m = if n == a { b } else if n == b { a } else { n };
                    (c, pair(m, k))
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn h_membership_examples() {
        let domain = grid(8, 3);
        let id = Permutation::identity(domain.iter().copied());
        assert!(in_subgroup(&id, Subgroup::H, SubgroupContext::Codes(&domain)).unwrap());
        assert!(!in_subgroup(&column_swap(&domain, 0, 1), Subgroup::H, SubgroupContext::Codes(&domain)).unwrap());
        assert!(in_subgroup(&column_swap(&domain, 6, 7), Subgroup::H, SubgroupContext::Codes(&domain)).unwrap());
        assert!(!in_subgroup(&column_swap(&domain, 5, 6), Subgroup::H, SubgroupContext::Codes(&domain)).unwrap());
    }

    #[test]
    fn h_ray_columns_move_within_one_sequence() {
        // rays of ∅ are η₀ = 0,1,2 (columns 5, 8, 11); ⟨0⟩ starts at η₀ = 3 (column 14)
        let domain = grid(15, 2);
        let ctx = SubgroupContext::Codes(&domain);
        assert!(in_subgroup(&column_swap(&domain, 5, 11), Subgroup::H, ctx).unwrap());
        assert!(!in_subgroup(&column_swap(&domain, 11, 14), Subgroup::H, ctx).unwrap());
    }

    #[test]
    fn row_mixing_is_not_in_h() {
        let domain = grid(6, 2);
        let p = Permutation::transposition(domain.iter().copied(), pair(5, 0), pair(5, 1)).unwrap();
        assert!(!in_subgroup(&p, Subgroup::H, SubgroupContext::Codes(&domain)).unwrap());
    }

    #[test]
    fn h_domain_mismatch_is_an_error() {
        let domain = grid(3, 1);
        let p = Permutation::identity(0..2);
        assert!(in_subgroup(&p, Subgroup::H, SubgroupContext::Codes(&domain)).is_err());
    }
}
