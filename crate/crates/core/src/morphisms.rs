//! Embeddings, isomorphisms, strong and weak homomorphisms between finite
//! structures: verification, exhaustive search, and the constructive maps
//! between gadget builds and `≤_max` witnesses.
//!
//! The generic search assigns domain vertices in breadth-first order, so
//! every vertex after the first in its component has an already-mapped
//! neighbour and only that neighbour's image's neighbours are candidates.
//! Candidates are further filtered by valence, `Q`-degrees, geodesic
//! distances and (for isomorphisms) joint colour refinement. When both
//! sides are unordered trees an embedding search runs on a rooted-subtree
//! feasibility table instead, which never backtracks out of a dead end.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::gadgets::{build_gprime, build_ordered_gt, GadgetBuild, GadgetVertex};
use crate::structures::FinStructure;
use crate::trees::{verify_witness, LipschitzMap, NormalTree, TruncationParams, WitnessMode};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MorphismKind {
    Embedding,
    Isomorphism,
    /// Preserves `P`, `Q` and the root in both directions.
    Homomorphism,
    /// Preserves `P`, `Q` and the root forwards only.
    WeakHomomorphism,
}

impl MorphismKind {
    fn injective(self) -> bool {
        matches!(self, MorphismKind::Embedding | MorphismKind::Isomorphism)
    }

    fn strong(self) -> bool {
        self != MorphismKind::WeakHomomorphism
    }
}

impl fmt::Display for MorphismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MorphismKind::Embedding => "embedding",
            MorphismKind::Isomorphism => "isomorphism",
            MorphismKind::Homomorphism => "homomorphism",
            MorphismKind::WeakHomomorphism => "weak_homomorphism",
        })
    }
}

impl FromStr for MorphismKind {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text {
            "embedding" | "embed" => Ok(MorphismKind::Embedding),
            "isomorphism" | "iso" => Ok(MorphismKind::Isomorphism),
            "homomorphism" | "homo" => Ok(MorphismKind::Homomorphism),
            "weak_homomorphism" | "weak-homo" | "weak" => Ok(MorphismKind::WeakHomomorphism),
            _ => Err(Error::Invalid(format!("unknown morphism kind `{text}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Morphism {
    pub kind: MorphismKind,
    pub map: BTreeMap<u64, u64>,
}

impl Morphism {
    pub fn is_injective(&self) -> bool {
        self.map.values().collect::<BTreeSet<_>>().len() == self.map.len()
    }

    pub fn apply(&self, v: u64) -> Option<u64> {
        self.map.get(&v).copied()
    }
}

fn root_ok(a: &FinStructure, b: &FinStructure, kind: MorphismKind, map: &BTreeMap<u64, u64>) -> bool {
    match (a.root(), b.root()) {
        (Some(ra), Some(rb)) => {
            if map.get(&ra) != Some(&rb) {
                return false;
            }
            !kind.strong() || map.iter().all(|(&x, &y)| y != rb || x == ra)
        }
        (Some(_), None) => false,
        (None, Some(_)) => kind != MorphismKind::Isomorphism,
        (None, None) => true,
    }
}

/// Verifies every clause of `kind` for `map` over all vertex pairs.
pub fn is_morphism(map: &BTreeMap<u64, u64>, a: &FinStructure, b: &FinStructure, kind: MorphismKind) -> Result<bool> {
    for v in a.domain() {
        match map.get(v) {
            None => return Err(Error::PartialMap(format!("vertex {v} has no image"))),
            Some(w) if !b.domain().contains(w) => return Err(Error::PartialMap(format!("image {w} outside the target"))),
            _ => {}
        }
    }
    if map.len() != a.vertex_count() {
        return Err(Error::PartialMap("map has entries outside the source domain".into()));
    }
    if !root_ok(a, b, kind, map) {
        return Ok(false);
    }
    if kind.injective() && map.values().collect::<BTreeSet<_>>().len() != map.len() {
        return Ok(false);
    }
    if kind == MorphismKind::Isomorphism && map.len() != b.vertex_count() {
        return Ok(false);
    }
    if kind.strong() {
        for (&x, &hx) in map {
            for (&y, &hy) in map {
                if a.has_edge(x, y) != b.has_edge(hx, hy) || a.has_order(x, y) != b.has_order(hx, hy) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    } else {
        Ok(a.edges().iter().all(|&(x, y)| b.has_edge(map[&x], map[&y]))
            && a.order().iter().all(|&(x, y)| b.has_order(map[&x], map[&y])))
    }
}

const NONE: usize = usize::MAX;
const FAR: u32 = u32::MAX;

/// Index-based copy of a structure for the search loops.
struct Dense {
    codes: Vec<u64>,
    adj: Vec<Vec<usize>>,
    edge: Vec<bool>,
    q: Vec<bool>,
    q_out: Vec<Vec<usize>>,
    q_in: Vec<Vec<usize>>,
    root: Option<usize>,
    dist: Vec<u32>,
    acyclic: bool,
    q_empty: bool,
}

impl Dense {
    fn new(s: &FinStructure) -> Self {
        let codes: Vec<u64> = s.domain().iter().copied().collect();
        let index: HashMap<u64, usize> = codes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let n = codes.len();
        let mut adj = vec![Vec::new(); n];
        let mut edge = vec![false; n * n];
        for &(x, y) in s.edges() {
            let (i, j) = (index[&x], index[&y]);
            adj[i].push(j);
            adj[j].push(i);
            edge[i * n + j] = true;
            edge[j * n + i] = true;
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let mut q = vec![false; n * n];
        let mut q_out = vec![Vec::new(); n];
        let mut q_in = vec![Vec::new(); n];
        for &(x, y) in s.order() {
            let (i, j) = (index[&x], index[&y]);
            q[i * n + j] = true;
            q_out[i].push(j);
            q_in[j].push(i);
        }
        let mut dist = vec![FAR; n * n];
        for src in 0..n {
            let row = &mut dist[src * n..(src + 1) * n];
            row[src] = 0;
            let mut queue = VecDeque::from([src]);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if row[w] == FAR {
                        row[w] = row[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        Dense {
            root: s.root().map(|r| index[&r]),
            acyclic: s.is_acyclic(),
            q_empty: s.order().is_empty(),
            codes,
            adj,
            edge,
            q,
            q_out,
            q_in,
            dist,
        }
    }

    fn n(&self) -> usize {
        self.codes.len()
    }

    fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edge[i * self.n() + j]
    }

    fn has_q(&self, i: usize, j: usize) -> bool {
        self.q[i * self.n() + j]
    }

    fn d(&self, i: usize, j: usize) -> u32 {
        self.dist[i * self.n() + j]
    }

    fn is_tree(&self) -> bool {
        self.n() > 0 && self.acyclic && (0..self.n()).all(|j| self.d(0, j) != FAR)
    }

    /// Breadth-first order over all components, each started from its
    /// least vertex, with the parent of every vertex (`NONE` for starts).
    fn bfs_order(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.n();
        let mut order = Vec::with_capacity(n);
        let mut parent = vec![NONE; n];
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        parent[w] = v;
                        queue.push_back(w);
                    }
                }
            }
        }
        (order, parent)
    }
}

/// Joint 1-dimensional colour refinement over both structures.
fn joint_colours(a: &Dense, b: &Dense) -> (Vec<usize>, Vec<usize>) {
    type Sig = (usize, Vec<usize>, Vec<usize>, Vec<usize>);
    let initial = |d: &Dense, v: usize| (d.adj[v].len(), d.q_out[v].len(), d.q_in[v].len(), d.has_q(v, v), d.root == Some(v));
    let mut keys: Vec<_> = (0..a.n()).map(|v| initial(a, v)).chain((0..b.n()).map(|v| initial(b, v))).collect::<Vec<_>>();
    let mut sorted = keys.clone();
    sorted.sort();
    sorted.dedup();
    let mut colours: Vec<usize> = keys.iter().map(|k| sorted.binary_search(k).unwrap()).collect();
    keys.clear();
    let mut classes = sorted.len();
    loop {
        let sig = |d: &Dense, offset: usize, v: usize, colours: &[usize]| -> Sig {
            let mut nb: Vec<usize> = d.adj[v].iter().map(|&w| colours[offset + w]).collect();
            let mut qo: Vec<usize> = d.q_out[v].iter().map(|&w| colours[offset + w]).collect();
            let mut qi: Vec<usize> = d.q_in[v].iter().map(|&w| colours[offset + w]).collect();
            nb.sort_unstable();
            qo.sort_unstable();
            qi.sort_unstable();
            (colours[offset + v], nb, qo, qi)
        };
        let sigs: Vec<Sig> = (0..a.n())
            .map(|v| sig(a, 0, v, &colours))
            .chain((0..b.n()).map(|v| sig(b, a.n(), v, &colours)))
            .collect();
        let mut distinct = sigs.clone();
        distinct.sort();
        distinct.dedup();
        let next: Vec<usize> = sigs.iter().map(|s| distinct.binary_search(s).unwrap()).collect();
        let done = distinct.len() == classes;
        classes = distinct.len();
        colours = next;
        if done {
            break;
        }
    }
    let (ca, cb) = colours.split_at(a.n());
    (ca.to_vec(), cb.to_vec())
}

struct Generic<'a> {
    a: &'a Dense,
    b: &'a Dense,
    kind: MorphismKind,
    order: Vec<usize>,
    parent: Vec<usize>,
    colours: Option<(Vec<usize>, Vec<usize>)>,
    dist_equal: bool,
}

struct GenericState {
    img: Vec<usize>,
    used: Vec<bool>,
    found: Vec<Vec<usize>>,
}

impl Generic<'_> {
    fn static_ok(&self, x: usize, y: usize) -> bool {
        let (a, b, kind) = (self.a, self.b, self.kind);
        if let Some(ra) = a.root {
            if (x == ra) != (b.root == Some(y)) && (x == ra || kind.strong()) {
                return false;
            }
        }
        if kind.strong() {
            if a.has_q(x, x) != b.has_q(y, y) {
                return false;
            }
        } else if a.has_q(x, x) && !b.has_q(y, y) {
            return false;
        }
        if kind == MorphismKind::Isomorphism {
            if let Some((ca, cb)) = &self.colours {
                return ca[x] == cb[y];
            }
        }
        if kind.injective() {
            return b.adj[y].len() >= a.adj[x].len() && b.q_out[y].len() >= a.q_out[x].len() && b.q_in[y].len() >= a.q_in[x].len();
        }
        true
    }

    fn dynamic_ok(&self, state: &GenericState, pos: usize, y: usize) -> bool {
        let (a, b) = (self.a, self.b);
        let x = self.order[pos];
        let strong = self.kind.strong();
        for &xp in &self.order[..pos] {
            let yp = state.img[xp];
            if strong {
                if a.has_edge(x, xp) != b.has_edge(y, yp) || a.has_q(x, xp) != b.has_q(y, yp) || a.has_q(xp, x) != b.has_q(yp, y) {
                    return false;
                }
            } else if (a.has_edge(x, xp) && !b.has_edge(y, yp)) || (a.has_q(x, xp) && !b.has_q(y, yp)) || (a.has_q(xp, x) && !b.has_q(yp, y)) {
                return false;
            }
            let da = a.d(x, xp);
            let db = b.d(y, yp);
            if da != FAR && db > da {
                return false;
            }
            if self.dist_equal && (da != FAR || self.kind == MorphismKind::Isomorphism) && da != db {
                return false;
            }
        }
        true
    }

    fn candidates(&self, state: &GenericState, pos: usize) -> Vec<usize> {
        let x = self.order[pos];
        let p = self.parent[x];
        let base: Vec<usize> = if p == NONE { (0..self.b.n()).collect() } else { self.b.adj[state.img[p]].clone() };
        base.into_iter()
            .filter(|&y| !(self.kind.injective() && state.used[y]) && self.static_ok(x, y))
            .collect()
    }

    fn run(&self, state: &mut GenericState, pos: usize, limit: Option<usize>) {
        if limit.is_some_and(|l| state.found.len() >= l) {
            return;
        }
        if pos == self.order.len() {
            state.found.push(state.img.clone());
            return;
        }
        let x = self.order[pos];
        for y in self.candidates(state, pos) {
            if !self.dynamic_ok(state, pos, y) {
                continue;
            }
            state.img[x] = y;
            state.used[y] = true;
            self.run(state, pos + 1, limit);
            state.used[y] = false;
            state.img[x] = NONE;
            if limit.is_some_and(|l| state.found.len() >= l) {
                return;
            }
        }
    }
}

fn generic_search(a: &Dense, b: &Dense, kind: MorphismKind, limit: Option<usize>) -> Vec<Vec<usize>> {
    let (order, parent) = a.bfs_order();
    let colours = (kind == MorphismKind::Isomorphism).then(|| joint_colours(a, b));
    let dist_equal = kind == MorphismKind::Isomorphism || (kind == MorphismKind::Embedding && b.acyclic);
    let engine = Generic { a, b, kind, order, parent, colours, dist_equal };
    let fresh = || GenericState { img: vec![NONE; a.n()], used: vec![false; b.n()], found: Vec::new() };
    if a.n() == 0 {
        return vec![Vec::new()];
    }
    if limit.is_some() {
        let mut state = fresh();
        engine.run(&mut state, 0, limit);
        return state.found;
    }
    // Without a limit, split on the first vertex's image.
    let first = engine.order[0];
    let roots = engine.candidates(&fresh(), 0);
    roots
        .par_iter()
        .map(|&y| {
            let mut state = fresh();
            if engine.dynamic_ok(&state, 0, y) {
                state.img[first] = y;
                state.used[y] = true;
                engine.run(&mut state, 1, None);
            }
            state.found
        })
        .flatten()
        .collect()
}

/// Embeddings of an unordered tree into an unordered forest.
struct TreeEmbed<'a> {
    a: &'a Dense,
    b: &'a Dense,
    iso: bool,
    order: Vec<usize>,
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
    memo: HashMap<(usize, usize, usize), bool>,
}

/// Whether every left vertex can be matched to a distinct allowed right vertex.
fn has_matching(options: &[Vec<usize>]) -> bool {
    fn augment(i: usize, options: &[Vec<usize>], owner: &mut HashMap<usize, usize>, seen: &mut BTreeSet<usize>) -> bool {
        for &r in &options[i] {
            if seen.insert(r) {
                let holder = owner.get(&r).copied();
                if holder.is_none_or(|h| augment(h, options, owner, seen)) {
                    owner.insert(r, i);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = HashMap::new();
    (0..options.len()).all(|i| augment(i, options, &mut owner, &mut BTreeSet::new()))
}

impl TreeEmbed<'_> {
    fn degree_ok(&self, x: usize, y: usize) -> bool {
        if self.iso {
            self.a.adj[x].len() == self.b.adj[y].len()
        } else {
            self.a.adj[x].len() <= self.b.adj[y].len()
        }
    }

    /// Whether the subtree of `x` maps below `y` when `x`'s parent maps to `py`.
    fn feasible(&mut self, x: usize, y: usize, py: usize) -> bool {
        if let Some(&known) = self.memo.get(&(x, y, py)) {
            return known;
        }
        let ok = self.degree_ok(x, y) && {
            let kids = self.children[x].clone();
            let slots: Vec<usize> = self.b.adj[y].iter().copied().filter(|&w| w != py).collect();
            let options: Vec<Vec<usize>> = kids.iter().map(|&c| slots.iter().copied().filter(|&w| self.feasible(c, w, y)).collect()).collect();
            has_matching(&options)
        };
        self.memo.insert((x, y, py), ok);
        ok
    }

    fn run(&mut self, img: &mut Vec<usize>, used: &mut Vec<bool>, pos: usize, limit: Option<usize>, found: &mut Vec<Vec<usize>>) {
        if limit.is_some_and(|l| found.len() >= l) {
            return;
        }
        if pos == self.order.len() {
            found.push(img.clone());
            return;
        }
        let x = self.order[pos];
        let px = self.parent[x];
        let py = img[px];
        let gy = if self.parent[px] == NONE { NONE } else { img[self.parent[px]] };
        let later: Vec<usize> = self.children[px].iter().copied().filter(|&c| img[c] == NONE && c != x).collect();
        let slots: Vec<usize> = self.b.adj[py].iter().copied().filter(|&w| w != gy && !used[w]).collect();
        for &y in &slots {
            if !self.feasible(x, y, py) {
                continue;
            }
            let rest: Vec<usize> = slots.iter().copied().filter(|&w| w != y).collect();
            let options: Vec<Vec<usize>> = later.iter().map(|&c| rest.iter().copied().filter(|&w| self.feasible(c, w, py)).collect()).collect();
            if !has_matching(&options) {
                continue;
            }
            img[x] = y;
            used[y] = true;
            self.run(img, used, pos + 1, limit, found);
            used[y] = false;
            img[x] = NONE;
            if limit.is_some_and(|l| found.len() >= l) {
                return;
            }
        }
    }
}

fn tree_search(a: &Dense, b: &Dense, iso: bool, limit: Option<usize>) -> Vec<Vec<usize>> {
    let (order, parent) = a.bfs_order();
    let mut children = vec![Vec::new(); a.n()];
    for &x in &order[1..] {
        children[parent[x]].push(x);
    }
    let mut search = TreeEmbed { a, b, iso, order, parent, children, memo: HashMap::new() };
    let root = search.order[0];
    let mut found = Vec::new();
    for y in 0..b.n() {
        if !search.feasible(root, y, NONE) {
            continue;
        }
        let mut img = vec![NONE; a.n()];
        let mut used = vec![false; b.n()];
        img[root] = y;
        used[y] = true;
        search.run(&mut img, &mut used, 1, limit, &mut found);
        if limit.is_some_and(|l| found.len() >= l) {
            break;
        }
    }
    found
}

/// Which search strategy [`find_morphisms`] uses for a given input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Auto,
    Generic,
}

/// Exhaustive enumeration of morphisms of `kind` from `a` to `b`, up to
/// `limit` results, sorted by their maps.
pub fn find_morphisms(a: &FinStructure, b: &FinStructure, kind: MorphismKind, limit: Option<usize>) -> Vec<Morphism> {
    find_morphisms_with(a, b, kind, limit, Strategy::Auto)
}

pub fn find_morphisms_with(a: &FinStructure, b: &FinStructure, kind: MorphismKind, limit: Option<usize>, strategy: Strategy) -> Vec<Morphism> {
    if limit == Some(0) {
        return Vec::new();
    }
    if kind == MorphismKind::Isomorphism
        && (a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() || a.order().len() != b.order().len() || a.root().is_some() != b.root().is_some())
    {
        return Vec::new();
    }
    if a.root().is_some() && b.root().is_none() {
        return Vec::new();
    }
    let (da, db) = (Dense::new(a), Dense::new(b));
    let fast = strategy == Strategy::Auto
        && kind.injective()
        && da.q_empty
        && db.q_empty
        && a.root().is_none()
        && b.root().is_none()
        && da.is_tree()
        && db.acyclic;
    let raw = if fast { tree_search(&da, &db, kind == MorphismKind::Isomorphism, limit) } else { generic_search(&da, &db, kind, limit) };
    let mut out: Vec<Morphism> = raw
        .into_iter()
        .map(|img| Morphism { kind, map: img.iter().enumerate().map(|(i, &j)| (da.codes[i], db.codes[j])).collect() })
        .collect();
    out.sort();
    out
}

/// Which gadget construction a witness is transported along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildVariant {
    /// `G_T` ordered by `≤_T`; needs an order-preserving witness.
    OrderedGt,
    /// `G'_T` without order; needs an injective `#`-monotone witness.
    Gprime,
}

impl FromStr for BuildVariant {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text {
            "ordered-gt" | "ordered_gt" => Ok(BuildVariant::OrderedGt),
            "gprime" => Ok(BuildVariant::Gprime),
            _ => Err(Error::Invalid(format!("unknown build variant `{text}`"))),
        }
    }
}

pub fn build_variant(t: &NormalTree, variant: BuildVariant, p: &TruncationParams) -> Result<GadgetBuild> {
    match variant {
        BuildVariant::OrderedGt => build_ordered_gt(t, p),
        BuildVariant::Gprime => build_gprime(t, p),
    }
}

/// Image of a gadget-graph vertex under a sequence map.
fn transport(v: &GadgetVertex, f: &LipschitzMap) -> Result<GadgetVertex> {
    let img = |s: &crate::FinSeq| f.get(s).cloned().ok_or_else(|| Error::PartialMap(format!("witness misses {s}")));
    Ok(match v {
        GadgetVertex::Seq(s) => GadgetVertex::Seq(img(s)?),
        GadgetVertex::Star(s) => GadgetVertex::Star(img(s)?),
        GadgetVertex::Plus(s) => GadgetVertex::Plus(img(s)?),
        GadgetVertex::PlusPlus(s) => GadgetVertex::PlusPlus(img(s)?),
        GadgetVertex::Gadget { s, u, x } => GadgetVertex::Gadget { s: img(s)?, u: u.clone(), x: x.clone() },
        GadgetVertex::Branch { s, i, k } => GadgetVertex::Branch { s: img(s)?, i: *i, k: *k },
        GadgetVertex::Leaf(_) => return Err(Error::Invalid("leaves do not occur in tree gadgets".into())),
    })
}

/// The embedding of the build of `S` into the build of `T` induced by a
/// witness `f`: every vertex named after `s` goes to the one named after
/// `f(s)`. The result is checked with [`is_morphism`].
pub fn embed_from_witness(f: &LipschitzMap, s: &NormalTree, t: &NormalTree, variant: BuildVariant, p: &TruncationParams) -> Result<Morphism> {
    match variant {
        BuildVariant::OrderedGt => {
            if !verify_witness(f, s, t, WitnessMode::LexPreserving, p) {
                return Err(Error::InvalidWitness("ordered builds need an order-preserving witness".into()));
            }
        }
        BuildVariant::Gprime => {
            if !verify_witness(f, s, t, WitnessMode::CodeMonotone, p) {
                return Err(Error::InvalidWitness("plus-gadget builds need a #-monotone witness".into()));
            }
            if !f.is_injective() {
                return Err(Error::InvalidWitness("plus-gadget builds need an injective witness".into()));
            }
        }
    }
    let (ga, gb) = (build_variant(s, variant, p)?, build_variant(t, variant, p)?);
    let mut map = BTreeMap::new();
    for (&code, v) in &ga.vertices {
        let image = transport(v, f)?;
        let target = gb.code_of(&image).ok_or_else(|| Error::InvalidWitness(format!("{image} is missing from the target build")))?;
        map.insert(code, target);
    }
    if !is_morphism(&map, &ga.structure, &gb.structure, MorphismKind::Embedding)? {
        return Err(Error::InvalidWitness("transported map is not an embedding".into()));
    }
    Ok(Morphism { kind: MorphismKind::Embedding, map })
}

/// Reads a witness off an embedding between builds: `f(s)` is the sequence
/// naming the image of `Seq(s)`.
pub fn extract_witness(g: &Morphism, s: &NormalTree, t: &NormalTree, variant: BuildVariant, p: &TruncationParams) -> Result<LipschitzMap> {
    let (ga, gb) = (build_variant(s, variant, p)?, build_variant(t, variant, p)?);
    let mut f = LipschitzMap::default();
    for seq in p.universe() {
        let code = ga.seq_code_of(&seq).ok_or(Error::UnknownVertex(u64::MAX))?;
        let image = g.apply(code).ok_or_else(|| Error::PartialMap(format!("no image for {seq}")))?;
        match gb.vertex(image) {
            Some(GadgetVertex::Seq(target)) => {
                f.assignments.insert(seq, target.clone());
            }
            Some(other) => return Err(Error::InvalidWitness(format!("{seq} is sent to non-sequence vertex {other}"))),
            None => return Err(Error::UnknownVertex(image)),
        }
    }
    if variant == BuildVariant::Gprime && f.get(&crate::FinSeq::empty()) != Some(&crate::FinSeq::empty()) {
        return Err(Error::InvalidWitness("the empty sequence is not fixed".into()));
    }
    if !verify_witness(&f, s, t, WitnessMode::Plain, p) {
        return Err(Error::InvalidWitness("restriction is not a ≤_max witness".into()));
    }
    Ok(f)
}

/// The path graph on `0..n`, `i` linked to `i+1`.
pub fn path_graph(n: u64) -> FinStructure {
    let edges: Vec<(u64, u64)> = (1..n).map(|i| (i - 1, i)).collect();
    FinStructure::graph(n, &edges).expect("path edges are valid")
}

/// Sends every vertex to its distance from `g0`; a weak homomorphism into
/// [`path_graph`] of length `1 + eccentricity(g0)`.
pub fn distance_weak_homo(g: &FinStructure, g0: u64) -> Result<Morphism> {
    if !g.domain().contains(&g0) {
        return Err(Error::UnknownVertex(g0));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if !g.is_acyclic() {
        return Err(Error::Invalid("distance map needs an acyclic graph".into()));
    }
    let map = g.bfs_distances(g0).into_iter().map(|(v, d)| (v, d as u64)).collect();
    Ok(Morphism { kind: MorphismKind::WeakHomomorphism, map })
}

/// Sends `2k + i` to `g_i`: a weak homomorphism from [`path_graph`]`(n)`
/// onto the edge `(g0, g1)` of `g`.
pub fn fold_weak_homo(n: u64, g: &FinStructure, edge: (u64, u64)) -> Result<Morphism> {
    if !g.has_edge(edge.0, edge.1) {
        return Err(Error::Invalid(format!("({}, {}) is not an edge", edge.0, edge.1)));
    }
    let map = (0..n).map(|i| (i, if i % 2 == 0 { edge.0 } else { edge.1 })).collect();
    Ok(Morphism { kind: MorphismKind::WeakHomomorphism, map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqs::FinSeq;
    use crate::trees::{find_leqmax_witness, normal_closure};

    const KINDS: [MorphismKind; 4] = [MorphismKind::Embedding, MorphismKind::Isomorphism, MorphismKind::Homomorphism, MorphismKind::WeakHomomorphism];

    fn graph(n: u64, edges: &[(u64, u64)]) -> FinStructure {
        FinStructure::graph(n, edges).unwrap()
    }

    /// Every total map, checked clause by clause.
    fn brute_force(a: &FinStructure, b: &FinStructure, kind: MorphismKind) -> Vec<BTreeMap<u64, u64>> {
        let av: Vec<u64> = a.domain().iter().copied().collect();
        let bv: Vec<u64> = b.domain().iter().copied().collect();
        let mut maps = vec![BTreeMap::new()];
        for &x in &av {
            maps = maps
                .into_iter()
                .flat_map(|m: BTreeMap<u64, u64>| {
                    bv.iter().map(move |&y| {
                        let mut next = m.clone();
                        next.insert(x, y);
                        next
                    })
                })
                .collect();
        }
        maps.into_iter().filter(|m| is_morphism(m, a, b, kind).unwrap()).collect()
    }

    #[test]
    fn is_morphism_examples() {
        let k2 = graph(2, &[(0, 1)]);
        let id: BTreeMap<u64, u64> = [(0, 0), (1, 1)].into();
        for kind in KINDS {
            assert!(is_morphism(&id, &k2, &k2, kind).unwrap());
        }
        let constant: BTreeMap<u64, u64> = [(0, 0), (1, 0)].into();
        assert!(!is_morphism(&constant, &k2, &k2, MorphismKind::WeakHomomorphism).unwrap());
        let partial: BTreeMap<u64, u64> = [(0, 0)].into();
        assert!(is_morphism(&partial, &k2, &k2, MorphismKind::Embedding).is_err());
    }

    #[test]
    fn find_examples() {
        let single = graph(1, &[]);
        let k2 = graph(2, &[(0, 1)]);
        assert!(!find_morphisms(&single, &k2, MorphismKind::Embedding, None).is_empty());
        let path = graph(3, &[(0, 1), (1, 2)]);
        let star = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        let found = find_morphisms(&path, &star, MorphismKind::Embedding, None);
        assert!(!found.is_empty());
        assert!(found.iter().all(|m| m.map[&1] == 0));
        assert_eq!(find_morphisms(&k2, &k2, MorphismKind::Homomorphism, None).len(), 2);
    }

    #[test]
    fn search_matches_brute_force_on_small_graphs() {
        let graphs = [
            graph(3, &[(0, 1), (1, 2)]),
            graph(3, &[(0, 1), (1, 2), (0, 2)]),
            graph(4, &[(0, 1), (0, 2), (0, 3)]),
            graph(4, &[(0, 1), (2, 3)]),
            graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]),
            graph(2, &[]),
        ];
        let mut ordered = graph(3, &[(0, 1), (1, 2)]);
        ordered.add_order(0, 2).unwrap();
        ordered.add_order(1, 1).unwrap();
        let mut rooted = graph(3, &[(0, 1), (0, 2)]);
        rooted.set_root(Some(0)).unwrap();
        let all: Vec<FinStructure> = graphs.iter().cloned().chain([ordered, rooted]).collect();
        for a in &all {
            for b in &all {
                for kind in KINDS {
                    let expected = brute_force(a, b, kind);
                    let found: Vec<BTreeMap<u64, u64>> = find_morphisms(a, b, kind, None).into_iter().map(|m| m.map).collect();
                    assert_eq!(found, expected, "{kind} {a:?} -> {b:?}");
                    let generic: Vec<BTreeMap<u64, u64>> = find_morphisms_with(a, b, kind, None, Strategy::Generic).into_iter().map(|m| m.map).collect();
                    assert_eq!(generic, expected);
                }
            }
        }
    }

    #[test]
    fn limit_truncates_deterministically() {
        let star = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let all = find_morphisms(&star, &star, MorphismKind::Isomorphism, None);
        assert_eq!(all.len(), 24);
        let some = find_morphisms(&star, &star, MorphismKind::Isomorphism, Some(5));
        assert_eq!(some.len(), 5);
        assert_eq!(some, find_morphisms(&star, &star, MorphismKind::Isomorphism, Some(5)));
    }

    fn seq(items: &[u64]) -> FinSeq {
        FinSeq::from(items)
    }

    #[test]
    fn embed_from_identity_is_identity() {
        let p = TruncationParams::new(1, 2, 1).unwrap();
        let t = normal_closure(&NormalTree::from_nodes([(FinSeq::from_bit_string("1").unwrap(), seq(&[0]))]), &p).unwrap();
        let id = LipschitzMap::identity(&p);
        for variant in [BuildVariant::OrderedGt, BuildVariant::Gprime] {
            let m = embed_from_witness(&id, &t, &t, variant, &p).unwrap();
            assert!(m.map.iter().all(|(a, b)| a == b));
            assert_eq!(extract_witness(&m, &t, &t, variant, &p).unwrap(), id);
        }
    }

    #[test]
    fn embed_rejects_witness_without_required_shape() {
        let p = TruncationParams::new(1, 2, 1).unwrap();
        let s = NormalTree::from_nodes([(FinSeq::empty(), FinSeq::empty()), (FinSeq::from_bit_string("0").unwrap(), seq(&[0])), (FinSeq::from_bit_string("0").unwrap(), seq(&[1]))]);
        let t = NormalTree::from_nodes([(FinSeq::empty(), FinSeq::empty()), (FinSeq::from_bit_string("0").unwrap(), seq(&[1]))]);
        let f = find_leqmax_witness(&s, &t, WitnessMode::Plain, &p).unwrap();
        assert!(embed_from_witness(&f, &s, &t, BuildVariant::Gprime, &p).is_err());
        assert!(embed_from_witness(&f, &s, &t, BuildVariant::OrderedGt, &p).is_err());
        // #-monotonicity fails: [1] -> [0] drops one ray of [1]⁺⁺
        let mut swap = LipschitzMap::identity(&p);
        swap.assignments.insert(seq(&[0]), seq(&[1]));
        swap.assignments.insert(seq(&[1]), seq(&[0]));
        let full = normal_closure(&NormalTree::from_nodes([(FinSeq::from_bit_string("0").unwrap(), seq(&[0])), (FinSeq::from_bit_string("1").unwrap(), seq(&[0]))]), &p).unwrap();
        assert!(embed_from_witness(&swap, &full, &full, BuildVariant::Gprime, &p).is_err());
    }

    #[test]
    fn remark_maps_are_weak_homomorphisms() {
        let star = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        let m = distance_weak_homo(&star, 0).unwrap();
        assert!([1, 2, 3].iter().all(|v| m.map[v] == 1));
        assert!(is_morphism(&m.map, &star, &path_graph(2), MorphismKind::WeakHomomorphism).unwrap());
        let path = path_graph(5);
        let m = distance_weak_homo(&path, 0).unwrap();
        assert!(m.map.iter().all(|(a, b)| a == b));
        let fold = fold_weak_homo(6, &star, (0, 2)).unwrap();
        assert_eq!(fold.map.values().copied().collect::<Vec<_>>(), vec![0, 2, 0, 2, 0, 2]);
        assert!(is_morphism(&fold.map, &path_graph(6), &star, MorphismKind::WeakHomomorphism).unwrap());
        assert!(distance_weak_homo(&graph(2, &[]), 0).is_err());
    }
}
