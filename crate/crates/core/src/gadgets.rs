//! Gadget graphs built from truncated normal trees and graphs: `G_0`,
//! `G_T` with its order and strict order, the plus-gadget graph `G'_T` and
//! its coding into naturals, the Friedman–Stanley sequence tree `T_x` and
//! the rooted ordered tree `G_x`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::seqs::{pair, seq_code, seq_decode, sequences_upto, theta, unpair, FinSeq};
use crate::structures::FinStructure;
use crate::trees::{NormalTree, TruncationParams};
use crate::{Error, Result};

/// Names of gadget vertices. The derived order lists variants in
/// declaration order and compares fields with `⪯`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GadgetVertex {
    Seq(FinSeq),
    Star(FinSeq),
    /// `(u, s, x)`; fields are ordered `s, u, x` so the derived order
    /// matches the gadget clause of `≤_T`.
    Gadget { s: FinSeq, u: FinSeq, x: FinSeq },
    Plus(FinSeq),
    PlusPlus(FinSeq),
    /// `(s⁺⁺, iᵏ)` with `k >= 1`.
    Branch { s: FinSeq, i: u64, k: u64 },
    Leaf(u64),
}

fn bits_or_dash(u: &FinSeq) -> String {
    if u.is_empty() {
        "-".to_string()
    } else {
        u.to_bit_string()
    }
}

impl fmt::Display for GadgetVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GadgetVertex::Seq(s) => write!(f, "{s}"),
            GadgetVertex::Star(s) => write!(f, "{s}*"),
            GadgetVertex::Gadget { s, u, x } => write!(f, "({},{s},{})", bits_or_dash(u), bits_or_dash(x)),
            GadgetVertex::Plus(s) => write!(f, "{s}+"),
            GadgetVertex::PlusPlus(s) => write!(f, "{s}++"),
            GadgetVertex::Branch { s, i, k } => write!(f, "({s}++,{i}^{k})"),
            GadgetVertex::Leaf(n) => write!(f, "leaf{n}"),
        }
    }
}

/// `g ≤_T g'`, clause by clause.
pub fn order_t(g: &GadgetVertex, h: &GadgetVertex) -> bool {
    use GadgetVertex::*;
    match (g, h) {
        (Seq(_), Star(_)) | (Seq(_), Gadget { .. }) | (Star(_), Gadget { .. }) => true,
        (Seq(s), Seq(t)) | (Star(s), Star(t)) => s <= t,
        (Gadget { s, u, x }, Gadget { s: t, u: v, x: y }) => s < t || (s == t && u < v) || (s == t && u == v && x <= y),
        _ => false,
    }
}

/// A built structure together with the name of every code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetBuild {
    pub structure: FinStructure,
    pub vertices: BTreeMap<u64, GadgetVertex>,
    pub codes: BTreeMap<GadgetVertex, u64>,
}

impl GadgetBuild {
    /// Codes each vertex with `coder`, or by its rank in the vertex order
    /// when no coder is given. Labels are the vertex renderings.
    fn assemble(
        vertices: BTreeSet<GadgetVertex>,
        edges: &[(GadgetVertex, GadgetVertex)],
        coder: Option<&dyn Fn(&GadgetVertex) -> Result<u64>>,
    ) -> Result<GadgetBuild> {
        let mut codes = BTreeMap::new();
        for (rank, v) in vertices.into_iter().enumerate() {
            let code = match coder {
                Some(c) => c(&v)?,
                None => rank as u64,
            };
            codes.insert(v, code);
        }
        let by_code: BTreeMap<u64, GadgetVertex> = codes.iter().map(|(v, &c)| (c, v.clone())).collect();
        if by_code.len() != codes.len() {
            return Err(Error::NotInjective("two vertices share a code".into()));
        }
        let mut structure = FinStructure::with_vertices(by_code.keys().copied());
        for (v, &c) in &codes {
            structure.set_label(c, v.to_string())?;
        }
        for (a, b) in edges {
            structure.add_edge(codes[a], codes[b])?;
        }
        Ok(GadgetBuild { structure, vertices: by_code, codes })
    }

    pub fn code_of(&self, v: &GadgetVertex) -> Option<u64> {
        self.codes.get(v).copied()
    }

    pub fn vertex(&self, code: u64) -> Option<&GadgetVertex> {
        self.vertices.get(&code)
    }

    /// Code of `Seq(s)`, if present.
    pub fn seq_code_of(&self, s: &FinSeq) -> Option<u64> {
        self.code_of(&GadgetVertex::Seq(s.clone()))
    }

    fn add_order_where(&mut self, rel: impl Fn(&GadgetVertex, &GadgetVertex) -> bool) -> Result<()> {
        let vs: Vec<(u64, GadgetVertex)> = self.vertices.iter().map(|(&c, v)| (c, v.clone())).collect();
        for (a, va) in &vs {
            for (b, vb) in &vs {
                if rel(va, vb) {
                    self.structure.add_order(*a, *b)?;
                }
            }
        }
        Ok(())
    }
}

/// Branch point `2θ(u)+2` of the gadget for tag `u`.
pub fn branch_point(u: &FinSeq) -> Result<usize> {
    Ok(2 * theta(u)? as usize + 2)
}

fn g0_parts(p: &TruncationParams) -> (BTreeSet<GadgetVertex>, Vec<(GadgetVertex, GadgetVertex)>) {
    let mut vertices = BTreeSet::new();
    let mut edges = Vec::new();
    for s in p.universe() {
        vertices.insert(GadgetVertex::Seq(s.clone()));
        if let Some(parent) = s.parent() {
            let star = GadgetVertex::Star(s.clone());
            vertices.insert(star.clone());
            edges.push((star.clone(), GadgetVertex::Seq(s)));
            edges.push((star, GadgetVertex::Seq(parent)));
        }
    }
    (vertices, edges)
}

fn add_tree_gadgets(
    t: &NormalTree,
    p: &TruncationParams,
    vertices: &mut BTreeSet<GadgetVertex>,
    edges: &mut Vec<(GadgetVertex, GadgetVertex)>,
) -> Result<()> {
    t.check_bounds(p)?;
    for (u, s) in t.iter() {
        let bp = branch_point(u)?;
        let node = |x: FinSeq| GadgetVertex::Gadget { s: s.clone(), u: u.clone(), x };
        let mut xs: Vec<FinSeq> = (0..=bp + p.tail).map(FinSeq::zeros).collect();
        let side = FinSeq::zeros(bp).extended(1);
        xs.extend((0..=p.tail + 1).map(|k| side.concat(&FinSeq::zeros(k))));
        for x in xs {
            match x.parent() {
                None => edges.push((node(x.clone()), GadgetVertex::Seq(s.clone()))),
                Some(xp) => edges.push((node(x.clone()), node(xp))),
            }
            vertices.insert(node(x));
        }
    }
    Ok(())
}

fn add_plus_gadgets(p: &TruncationParams, vertices: &mut BTreeSet<GadgetVertex>, edges: &mut Vec<(GadgetVertex, GadgetVertex)>) -> Result<()> {
    for s in p.universe() {
        let plus = GadgetVertex::Plus(s.clone());
        let pp = GadgetVertex::PlusPlus(s.clone());
        edges.push((plus.clone(), GadgetVertex::Seq(s.clone())));
        edges.push((plus.clone(), pp.clone()));
        vertices.insert(plus);
        vertices.insert(pp.clone());
        let arity = seq_code(&s)? + 2;
        for i in 0..=arity {
            for k in 1..=p.tail as u64 + 1 {
                let ray = GadgetVertex::Branch { s: s.clone(), i, k };
                let prev = if k == 1 { pp.clone() } else { GadgetVertex::Branch { s: s.clone(), i, k: k - 1 } };
                edges.push((ray.clone(), prev));
                vertices.insert(ray);
            }
        }
    }
    Ok(())
}

/// `G_0`: the truncated sequence tree with each edge subdivided by a star.
pub fn build_g0(p: &TruncationParams) -> Result<GadgetBuild> {
    let (vertices, edges) = g0_parts(p);
    GadgetBuild::assemble(vertices, &edges, None)
}

/// `G_T` without order.
pub fn build_gt(t: &NormalTree, p: &TruncationParams) -> Result<GadgetBuild> {
    let (mut vertices, mut edges) = g0_parts(p);
    add_tree_gadgets(t, p, &mut vertices, &mut edges)?;
    GadgetBuild::assemble(vertices, &edges, None)
}

/// `G_T` ordered by `≤_T`.
pub fn build_ordered_gt(t: &NormalTree, p: &TruncationParams) -> Result<GadgetBuild> {
    let mut build = build_gt(t, p)?;
    build.add_order_where(order_t)?;
    Ok(build)
}

/// `G_T` ordered by the strict part of `≤_T`.
pub fn build_strict_gt(t: &NormalTree, p: &TruncationParams) -> Result<GadgetBuild> {
    let mut build = build_gt(t, p)?;
    build.add_order_where(|a, b| a != b && order_t(a, b))?;
    Ok(build)
}

/// `G'_T`: `G_T` plus `s⁺`, `s⁺⁺` and `#s+3` rays of length `tail+1` at
/// every `s⁺⁺`. Vertices are coded by rank.
pub fn build_gprime(t: &NormalTree, p: &TruncationParams) -> Result<GadgetBuild> {
    let (mut vertices, mut edges) = g0_parts(p);
    add_tree_gadgets(t, p, &mut vertices, &mut edges)?;
    add_plus_gadgets(p, &mut vertices, &mut edges)?;
    GadgetBuild::assemble(vertices, &edges, None)
}

/// `η₀(s, i)`: rank of `(s, i)`, `i <= #s+2`, ordered by `#s` then `i`.
pub fn eta0(s: &FinSeq, i: u64) -> Result<u64> {
    let c = seq_code(s)?;
    if i > c + 2 {
        return Err(Error::OutOfBounds(format!("ray index {i} exceeds #{s}+2")));
    }
    Ok(c * (c + 5) / 2 + i)
}

/// Code `c` with `c(c+5)/2 <= n < (c+1)(c+6)/2`.
fn eta0_block(n: u64) -> u64 {
    let mut c = (((2 * n) as f64).sqrt() as u64).saturating_sub(3);
    while (c + 1) * (c + 6) / 2 <= n {
        c += 1;
    }
    while c * (c + 5) / 2 > n {
        c -= 1;
    }
    c
}

/// Sequence component of the inverse of [`eta0`].
pub fn pi0(n: u64) -> FinSeq {
    seq_decode(eta0_block(n))
}

/// Ray-index component of the inverse of [`eta0`].
pub fn pi1(n: u64) -> u64 {
    let c = eta0_block(n);
    n - c * (c + 5) / 2
}

/// The natural-number coding of `G'_T`'s vertices for the given tree.
pub struct GprimeCoder {
    /// `(u, s) -> (η_T, offset of its stem block in column 4)`
    slots: BTreeMap<(FinSeq, FinSeq), (u64, u64)>,
    tail: usize,
}

impl GprimeCoder {
    pub fn new(t: &NormalTree, p: &TruncationParams) -> Result<Self> {
        let mut ranked: Vec<(u64, FinSeq, FinSeq)> =
            t.iter().map(|(u, s)| Ok((seq_code(s)?, u.clone(), s.clone()))).collect::<Result<_>>()?;
        // #s first, then u lexicographically (all tags of one s share a length)
        ranked.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.items().cmp(b.1.items())));
        let mut slots = BTreeMap::new();
        let mut offset = 0u64;
        for (eta, (_, u, s)) in ranked.into_iter().enumerate() {
            let bp = branch_point(&u)? as u64;
            slots.insert((u, s), (eta as u64, offset));
            offset += bp + 1;
        }
        Ok(GprimeCoder { slots, tail: p.tail })
    }

    pub fn code(&self, v: &GadgetVertex) -> Result<u64> {
        use GadgetVertex::*;
        Ok(match v {
            Seq(s) => pair(0, seq_code(s)?),
            Star(s) => pair(1, seq_code(s)?),
            Plus(s) => pair(2, seq_code(s)?),
            PlusPlus(s) => pair(3, seq_code(s)?),
            Branch { s, i, k } => pair(3 * eta0(s, *i)? + 5, k - 1),
            Gadget { s, u, x } => {
                let &(eta, offset) = self
                    .slots
                    .get(&(u.clone(), s.clone()))
                    .ok_or_else(|| Error::Invalid(format!("({u},{s}) is not a tree node")))?;
                let bp = branch_point(u)?;
                if x.len() <= bp {
                    pair(4, offset + x.len() as u64)
                } else if x.get(bp) == Some(0) {
                    let k = (x.len() - bp - 1) as u64;
                    if k >= self.tail as u64 {
                        return Err(Error::OutOfBounds(format!("stem vertex {v} beyond the tail")));
                    }
                    pair(3 * eta + 6, k)
                } else {
                    pair(3 * eta + 7, (x.len() - bp - 1) as u64)
                }
            }
            Leaf(_) => return Err(Error::Invalid("leaves are not part of G'_T".into())),
        })
    }
}

/// `Ĝ'_T`: `G'_T` with every vertex relabelled by its natural-number code.
pub fn encode_gprime(t: &NormalTree, p: &TruncationParams) -> Result<GadgetBuild> {
    let coder = GprimeCoder::new(t, p)?;
    let (mut vertices, mut edges) = g0_parts(p);
    add_tree_gadgets(t, p, &mut vertices, &mut edges)?;
    add_plus_gadgets(p, &mut vertices, &mut edges)?;
    GadgetBuild::assemble(vertices, &edges, Some(&|v| coder.code(v)))
}

/// Relevant pair `(s(n), s(m))` where `|s| = pair(n, m) + 1`.
pub fn rp(s: &FinSeq) -> Result<(u64, u64)> {
    if s.is_empty() {
        return Err(Error::Invalid("relevant pair of the empty sequence".into()));
    }
    let (n, m) = unpair(s.len() as u64 - 1);
    Ok((s.items()[n as usize], s.items()[m as usize]))
}

/// Number of vertices of a graph given on `0..V`.
fn graph_size(x: &FinStructure) -> Result<u64> {
    let v = x.vertex_count() as u64;
    if !x.domain().iter().copied().eq(0..v) {
        return Err(Error::Invalid("graph vertices must be 0..V".into()));
    }
    Ok(v)
}

/// `T_x` as a combinatorial tree: sequences of length `<= depth` over the
/// graph's vertices, plus one leaf below each `s` whose relevant pair is an
/// edge. Leaves are numbered in `#`-order of their parents.
pub fn build_fs_tree(x: &FinStructure, p: &TruncationParams) -> Result<GadgetBuild> {
    let v = graph_size(x)?;
    let mut seqs = sequences_upto(p.depth, v);
    let mut vertices: BTreeSet<GadgetVertex> = seqs.iter().cloned().map(GadgetVertex::Seq).collect();
    let mut edges = Vec::new();
    for s in &seqs {
        if let Some(parent) = s.parent() {
            edges.push((GadgetVertex::Seq(s.clone()), GadgetVertex::Seq(parent)));
        }
    }
    seqs.sort_by_key(|s| seq_code(s).unwrap_or(u64::MAX));
    let mut leaf = 0u64;
    for s in seqs.iter().filter(|s| !s.is_empty()) {
        let (a, b) = rp(s)?;
        if x.has_edge(a, b) {
            vertices.insert(GadgetVertex::Leaf(leaf));
            edges.push((GadgetVertex::Leaf(leaf), GadgetVertex::Seq(s.clone())));
            leaf += 1;
        }
    }
    GadgetBuild::assemble(vertices, &edges, None)
}

/// `G_x`: `T_x` rooted at `∅` and ordered by "both `∅`, or equal relevant
/// pairs, or both leaves".
pub fn build_gx(x: &FinStructure, p: &TruncationParams) -> Result<GadgetBuild> {
    let mut build = build_fs_tree(x, p)?;
    let root = build.seq_code_of(&FinSeq::empty()).expect("the empty sequence is always built");
    build.structure.set_root(Some(root))?;
    build.add_order_where(|a, b| match (a, b) {
        (GadgetVertex::Seq(s), GadgetVertex::Seq(t)) => match (s.is_empty(), t.is_empty()) {
            (true, true) => true,
            (false, false) => rp(s).ok() == rp(t).ok(),
            _ => false,
        },
        (GadgetVertex::Leaf(_), GadgetVertex::Leaf(_)) => true,
        _ => false,
    })?;
    Ok(build)
}

/// Graphviz rendering. With `with_order`, the graph becomes a digraph whose
/// `P` edges are undirected and whose `Q` pairs are dashed arrows.
pub fn to_dot(structure: &FinStructure, with_order: bool) -> String {
    let (head, sep) = if with_order { ("digraph", "->") } else { ("graph", "--") };
    let mut out = format!("{head} G {{\n");
    for &v in structure.domain() {
        let label = structure.label(v).map(str::to_string).unwrap_or_else(|| v.to_string());
        let shape = if structure.root() == Some(v) { ", shape=doublecircle" } else { "" };
        out.push_str(&format!("  {v} [label=\"{}\"{shape}];\n", label.replace('"', "\\\"")));
    }
    for &(a, b) in structure.edges() {
        if with_order {
            out.push_str(&format!("  {a} {sep} {b} [dir=none];\n"));
        } else {
            out.push_str(&format!("  {a} {sep} {b};\n"));
        }
    }
    if with_order {
        for &(a, b) in structure.order() {
            out.push_str(&format!("  {a} -> {b} [style=dashed];\n"));
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::normal_closure;

    fn seq(items: &[u64]) -> FinSeq {
        FinSeq::from(items)
    }

    fn params(depth: usize, branch: u64, tail: usize) -> TruncationParams {
        TruncationParams::new(depth, branch, tail).unwrap()
    }

    fn root_tree() -> NormalTree {
        NormalTree::from_nodes([(FinSeq::empty(), FinSeq::empty())])
    }

    #[test]
    fn g0_examples() {
        let g = build_g0(&params(1, 2, 0)).unwrap();
        assert_eq!(g.structure.vertex_count(), 5);
        assert_eq!(g.structure.edge_count(), 4);
        assert!(g.structure.is_combinatorial_tree());
        let g = build_g0(&params(0, 2, 0)).unwrap();
        assert_eq!(g.structure.vertex_count(), 1);
        assert_eq!(g.structure.edge_count(), 0);
        let g = build_g0(&params(2, 3, 0)).unwrap();
        for (v, &c) in &g.codes {
            if matches!(v, GadgetVertex::Star(_)) {
                assert_eq!(g.structure.degree(c), 2);
            }
        }
    }

    #[test]
    fn gt_root_tree_example() {
        let p = params(1, 2, 1);
        let g = build_gt(&root_tree(), &p).unwrap();
        assert_eq!(g.structure.vertex_count(), 12);
        assert!(g.structure.is_combinatorial_tree());
        let e = FinSeq::empty();
        let bp = GadgetVertex::Gadget { s: e.clone(), u: e.clone(), x: FinSeq::zeros(2) };
        assert_eq!(g.structure.degree(g.code_of(&bp).unwrap()), 3);
        let names: BTreeSet<String> = g.vertices.values().map(|v| v.to_string()).collect();
        for expected in ["(-,[],-)", "(-,[],0)", "(-,[],000)", "(-,[],001)", "(-,[],00100)"] {
            assert!(names.contains(expected), "{expected}");
        }
        assert_eq!(build_gt(&NormalTree::new(), &p).unwrap(), build_g0(&p).unwrap());
    }

    #[test]
    fn gt_branch_point_has_valence_three() {
        let p = params(2, 2, 1);
        let t = normal_closure(&NormalTree::from_nodes([(FinSeq::from_bit_string("10").unwrap(), seq(&[0, 1]))]), &p).unwrap();
        let g = build_gt(&t, &p).unwrap();
        assert!(g.structure.is_combinatorial_tree());
        for (u, s) in t.iter() {
            let x = FinSeq::zeros(branch_point(u).unwrap());
            let c = g.code_of(&GadgetVertex::Gadget { s: s.clone(), u: u.clone(), x }).unwrap();
            assert_eq!(g.structure.degree(c), 3);
            let seq_c = g.seq_code_of(s).unwrap();
            assert_eq!(g.structure.bfs_distances(seq_c)[&c], branch_point(u).unwrap() + 1);
        }
    }

    #[test]
    fn gt_out_of_bounds_tree_is_an_error() {
        let t = NormalTree::from_nodes([(FinSeq::from_bit_string("0").unwrap(), seq(&[7]))]);
        assert!(build_gt(&t, &params(1, 2, 1)).is_err());
    }

    #[test]
    fn order_t_examples() {
        let p = params(1, 2, 1);
        let g = build_ordered_gt(&root_tree(), &p).unwrap();
        let q = |a: &GadgetVertex, b: &GadgetVertex| g.structure.has_order(g.code_of(a).unwrap(), g.code_of(b).unwrap());
        assert!(q(&GadgetVertex::Seq(seq(&[1])), &GadgetVertex::Star(seq(&[0]))));
        assert!(q(&GadgetVertex::Seq(seq(&[0])), &GadgetVertex::Seq(seq(&[1]))));
        assert!(!q(&GadgetVertex::Seq(seq(&[1])), &GadgetVertex::Seq(seq(&[0]))));
        assert!(g.structure.order_is_linear());
        let strict = build_strict_gt(&root_tree(), &p).unwrap();
        assert!(strict.structure.order_is_strict_linear());
        assert!(strict.structure.domain().iter().all(|&v| !strict.structure.has_order(v, v)));
    }

    #[test]
    fn order_t_agrees_with_vertex_order() {
        let p = params(2, 2, 1);
        let t = normal_closure(&NormalTree::from_nodes([(FinSeq::from_bit_string("01").unwrap(), seq(&[1, 0]))]), &p).unwrap();
        let g = build_gt(&t, &p).unwrap();
        let vs: Vec<&GadgetVertex> = g.vertices.values().collect();
        for a in &vs {
            for b in &vs {
                assert_eq!(order_t(a, b), a <= b);
            }
        }
    }

    #[test]
    fn gprime_examples() {
        let p = params(1, 2, 1);
        let g = build_gprime(&root_tree(), &p).unwrap();
        assert!(g.structure.is_combinatorial_tree());
        for s in p.universe() {
            let pp = g.code_of(&GadgetVertex::PlusPlus(s.clone())).unwrap();
            assert_eq!(g.structure.degree(pp) as u64, seq_code(&s).unwrap() + 4);
            let sc = g.seq_code_of(&s).unwrap();
            assert_eq!(g.structure.bfs_distances(sc)[&pp], 2);
        }
        let empty = build_gprime(&NormalTree::new(), &params(0, 2, 1)).unwrap();
        // ∅, ∅⁺, ∅⁺⁺ and three rays of two vertices each
        assert_eq!(empty.structure.vertex_count(), 3 + 3 * 2);
    }

    #[test]
    fn encode_examples() {
        let p = params(1, 2, 1);
        let g = encode_gprime(&root_tree(), &p).unwrap();
        let e = FinSeq::empty();
        assert_eq!(g.code_of(&GadgetVertex::Seq(e.clone())), Some(0));
        assert_eq!(g.code_of(&GadgetVertex::Plus(e.clone())), Some(5));
        assert_eq!(g.code_of(&GadgetVertex::PlusPlus(e.clone())), Some(9));
        let plain = build_gprime(&root_tree(), &p).unwrap();
        assert_eq!(g.codes.len(), plain.codes.len());
        // edges agree under the renaming
        for &(a, b) in plain.structure.edges() {
            let (va, vb) = (&plain.vertices[&a], &plain.vertices[&b]);
            assert!(g.structure.has_edge(g.codes[va], g.codes[vb]));
        }
        assert_eq!(g.structure.edge_count(), plain.structure.edge_count());
    }

    #[test]
    fn encode_stem_columns_follow_eta_order() {
        let p = params(1, 2, 2);
        let t = normal_closure(&NormalTree::from_nodes([(FinSeq::from_bit_string("1").unwrap(), seq(&[0]))]), &p).unwrap();
        let g = encode_gprime(&t, &p).unwrap();
        let coder = GprimeCoder::new(&t, &p).unwrap();
        // η order: (∅,∅) then (1,[0]) then (1,[1]); stems stack up in column 4
        let stem = |u: &str, s: &[u64], j: usize| {
            coder
                .code(&GadgetVertex::Gadget { s: seq(s), u: FinSeq::from_bit_string(u).unwrap(), x: FinSeq::zeros(j) })
                .unwrap()
        };
        assert_eq!(stem("", &[], 0), pair(4, 0));
        assert_eq!(stem("", &[], 2), pair(4, 2));
        assert_eq!(stem("1", &[0], 0), pair(4, 3));
        assert_eq!(stem("1", &[1], 0), pair(4, 3 + 7));
        // after the branch point: continuation in 3η+6, side branch in 3η+7
        assert_eq!(stem("1", &[0], 7), pair(3 + 6, 0));
        let side = GadgetVertex::Gadget { s: seq(&[1]), u: FinSeq::from_bit_string("1").unwrap(), x: FinSeq::zeros(6).extended(1) };
        assert_eq!(coder.code(&side).unwrap(), pair(6 + 7, 0));
        assert!(g.structure.is_combinatorial_tree());
    }

    #[test]
    fn eta0_inverse_round_trips() {
        let mut n = 0;
        for c in 0..40u64 {
            let s = seq_decode(c);
            for i in 0..=c + 2 {
                assert_eq!(eta0(&s, i).unwrap(), n);
                assert_eq!(pi0(n), s);
                assert_eq!(pi1(n), i);
                n += 1;
            }
        }
        assert!(eta0(&FinSeq::empty(), 3).is_err());
    }

    #[test]
    fn rp_examples() {
        assert_eq!(rp(&seq(&[2])).unwrap(), (2, 2));
        assert_eq!(rp(&seq(&[3, 5])).unwrap(), (3, 5));
        assert_eq!(rp(&seq(&[7, 8, 9])).unwrap(), (8, 7));
        assert!(rp(&FinSeq::empty()).is_err());
    }

    #[test]
    fn fs_tree_examples() {
        let p = params(2, 1, 0);
        let edge = FinStructure::graph(2, &[(0, 1)]).unwrap();
        let t = build_fs_tree(&edge, &p).unwrap();
        let leaves: Vec<u64> = t.vertices.iter().filter(|(_, v)| matches!(v, GadgetVertex::Leaf(_))).map(|(&c, _)| c).collect();
        assert_eq!(leaves.len(), 2);
        let adj = t.structure.adjacency();
        let parents: BTreeSet<String> = leaves.iter().map(|l| t.vertices[&adj[l][0]].to_string()).collect();
        assert_eq!(parents, BTreeSet::from(["[0,1]".to_string(), "[1,0]".to_string()]));
        // Leaf(0) hangs below the #-least parent
        assert_eq!(t.vertices[&adj[&t.codes[&GadgetVertex::Leaf(0)]][0]], GadgetVertex::Seq(seq(&[0, 1])));
        assert!(t.structure.is_combinatorial_tree());
        let bare = build_fs_tree(&FinStructure::graph(2, &[]).unwrap(), &p).unwrap();
        assert!(bare.vertices.values().all(|v| matches!(v, GadgetVertex::Seq(_))));
    }

    #[test]
    fn gx_order_examples() {
        let p = params(2, 1, 0);
        let x = FinStructure::graph(3, &[(0, 1), (1, 2)]).unwrap();
        let g = build_gx(&x, &p).unwrap();
        let q = |a: &GadgetVertex, b: &GadgetVertex| g.structure.has_order(g.codes[a], g.codes[b]);
        let e = GadgetVertex::Seq(FinSeq::empty());
        assert!(q(&e, &e));
        assert!(!q(&e, &GadgetVertex::Seq(seq(&[0]))));
        assert!(q(&GadgetVertex::Seq(seq(&[0, 1])), &GadgetVertex::Seq(seq(&[0, 1]))));
        assert!(!q(&GadgetVertex::Seq(seq(&[0, 1])), &GadgetVertex::Seq(seq(&[1, 0]))));
        assert!(q(&GadgetVertex::Seq(seq(&[1])), &GadgetVertex::Seq(seq(&[1]))));
        assert!(q(&GadgetVertex::Leaf(0), &GadgetVertex::Leaf(1)));
        assert!(g.structure.order_is_equivalence());
        assert_eq!(g.structure.root(), Some(g.codes[&e]));
    }

    #[test]
    fn dot_output_shapes() {
        let g = build_g0(&params(1, 1, 0)).unwrap();
        let dot = to_dot(&g.structure, false);
        assert!(dot.starts_with("graph G {"));
        assert!(dot.contains("label=\"[0]*\""));
        assert!(dot.contains(" -- "));
        let ordered = build_ordered_gt(&NormalTree::new(), &params(1, 1, 0)).unwrap();
        let dot = to_dot(&ordered.structure, true);
        assert!(dot.starts_with("digraph G {"));
        assert!(dot.contains("style=dashed"));
    }
}
