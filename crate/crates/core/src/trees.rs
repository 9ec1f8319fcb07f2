//! Normal trees on `2×ω`, quasi-order trees on `2×2×ω`, and the `≤_max`
//! quasi-order between normal trees, all at a fixed truncation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::seqs::{binary_sequences_of_len, seq_add, seq_code, sequences_of_len, sequences_upto, FinSeq};
use crate::{Error, Result};

/// Finite truncation: sequences have length `<= depth` and entries
/// `< branch`; gadget tails are cut after `tail` extra vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruncationParams {
    pub depth: usize,
    pub branch: u64,
    pub tail: usize,
}

impl TruncationParams {
    pub fn new(depth: usize, branch: u64, tail: usize) -> Result<Self> {
        if branch == 0 {
            return Err(Error::InvalidParams("branch must be at least 1".into()));
        }
        if depth > 16 {
            return Err(Error::InvalidParams(format!("depth {depth} is too large")));
        }
        Ok(TruncationParams { depth, branch, tail })
    }

    /// Every sequence within the bounds, in `⪯` order.
    pub fn universe(&self) -> Vec<FinSeq> {
        sequences_upto(self.depth, self.branch)
    }

    pub fn seq_in_bounds(&self, s: &FinSeq) -> bool {
        s.len() <= self.depth && s.items().iter().all(|&n| n < self.branch)
    }

    /// Bound checks shared by every node shape: binary tags, equal lengths.
    fn check_node(&self, tags: &[&FinSeq], s: &FinSeq) -> Result<()> {
        for u in tags {
            if !u.is_binary() || u.len() != s.len() {
                return Err(Error::OutOfBounds(format!("malformed node tag {u} for {s}")));
            }
        }
        if !self.seq_in_bounds(s) {
            return Err(Error::OutOfBounds(format!("sequence {s} outside depth {} / branch {}", self.depth, self.branch)));
        }
        Ok(())
    }
}

impl fmt::Display for TruncationParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "depth={} branch={} tail={}", self.depth, self.branch, self.tail)
    }
}

impl FromStr for TruncationParams {
    type Err = Error;

    /// Parses `depth=L branch=B tail=K` (any order, all three required).
    fn from_str(text: &str) -> Result<Self> {
        let mut depth = None;
        let mut branch = None;
        let mut tail = None;
        for field in text.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::InvalidParams(format!("bad field `{field}`")))?;
            let value: u64 = value
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad value in `{field}`")))?;
            match key {
                "depth" => depth = Some(value as usize),
                "branch" => branch = Some(value),
                "tail" => tail = Some(value as usize),
                _ => return Err(Error::InvalidParams(format!("unknown key `{key}`"))),
            }
        }
        match (depth, branch, tail) {
            (Some(d), Some(b), Some(k)) => TruncationParams::new(d, b, k),
            _ => Err(Error::InvalidParams("bounds need depth, branch and tail".into())),
        }
    }
}

/// A set of pairs `(u, s)` with `u` binary and `|u| = |s|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct NormalTree {
    nodes: BTreeSet<(FinSeq, FinSeq)>,
}

impl NormalTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_nodes<I: IntoIterator<Item = (FinSeq, FinSeq)>>(nodes: I) -> Self {
        NormalTree { nodes: nodes.into_iter().collect() }
    }

    pub fn insert(&mut self, u: FinSeq, s: FinSeq) -> bool {
        self.nodes.insert((u, s))
    }

    pub fn contains(&self, u: &FinSeq, s: &FinSeq) -> bool {
        // BTreeSet lookup on a borrowed tuple needs owned keys.
        self.nodes.contains(&(u.clone(), s.clone()))
    }

    pub fn nodes(&self) -> &BTreeSet<(FinSeq, FinSeq)> {
        &self.nodes
    }

    pub fn iter(&self) -> impl Iterator<Item = &(FinSeq, FinSeq)> {
        self.nodes.iter()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_subset(&self, other: &NormalTree) -> bool {
        self.nodes.is_subset(&other.nodes)
    }

    /// All `u` with `(u, s)` in the tree.
    pub fn tags_of(&self, s: &FinSeq) -> Vec<FinSeq> {
        self.nodes.iter().filter(|(_, t)| t == s).map(|(u, _)| u.clone()).collect()
    }

    pub fn check_bounds(&self, p: &TruncationParams) -> Result<()> {
        self.nodes.iter().try_for_each(|(u, s)| p.check_node(&[u], s))
    }
}

/// Least superset of `nodes` that is prefix-closed and normal within `p`.
pub fn normal_closure(nodes: &NormalTree, p: &TruncationParams) -> Result<NormalTree> {
    nodes.check_bounds(p)?;
    let mut out = BTreeSet::new();
    for (u, s) in nodes.iter() {
        for k in 0..=u.len() {
            out.insert((u.prefix(k), s.prefix(k)));
        }
    }
    let mut stack: Vec<(FinSeq, FinSeq)> = out.iter().cloned().collect();
    while let Some((u, s)) = stack.pop() {
        for i in 0..s.len() {
            if s.items()[i] + 1 < p.branch {
                let mut items = s.items().to_vec();
                items[i] += 1;
                let next = (u.clone(), FinSeq::new(items));
                if out.insert(next.clone()) {
                    stack.push(next);
                }
            }
        }
    }
    Ok(NormalTree { nodes: out })
}

/// Whether `t` is prefix-closed and normal within the bounds. Nodes outside
/// the bounds are an error rather than a `false`.
pub fn check_normal(t: &NormalTree, p: &TruncationParams) -> Result<bool> {
    t.check_bounds(p)?;
    for (u, s) in t.iter() {
        if let (Some(pu), Some(ps)) = (u.parent(), s.parent()) {
            if !t.contains(&pu, &ps) {
                return Ok(false);
            }
        }
        for i in 0..s.len() {
            if s.items()[i] + 1 < p.branch {
                let mut items = s.items().to_vec();
                items[i] += 1;
                if !t.contains(u, &FinSeq::new(items)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// A set of triples `(u, v, s)` with `u, v` binary and all three of one length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct QoTree {
    nodes: BTreeSet<(FinSeq, FinSeq, FinSeq)>,
}

impl QoTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_nodes<I: IntoIterator<Item = (FinSeq, FinSeq, FinSeq)>>(nodes: I) -> Self {
        QoTree { nodes: nodes.into_iter().collect() }
    }

    pub fn insert(&mut self, u: FinSeq, v: FinSeq, s: FinSeq) -> bool {
        self.nodes.insert((u, v, s))
    }

    pub fn contains(&self, u: &FinSeq, v: &FinSeq, s: &FinSeq) -> bool {
        self.nodes.contains(&(u.clone(), v.clone(), s.clone()))
    }

    pub fn nodes(&self) -> &BTreeSet<(FinSeq, FinSeq, FinSeq)> {
        &self.nodes
    }

    pub fn iter(&self) -> impl Iterator<Item = &(FinSeq, FinSeq, FinSeq)> {
        self.nodes.iter()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_subset(&self, other: &QoTree) -> bool {
        self.nodes.is_subset(&other.nodes)
    }

    pub fn check_bounds(&self, p: &TruncationParams) -> Result<()> {
        self.nodes.iter().try_for_each(|(u, v, s)| p.check_node(&[u, v], s))
    }

    pub fn is_prefix_closed(&self) -> bool {
        self.nodes.iter().all(|(u, v, s)| match (u.parent(), v.parent(), s.parent()) {
            (Some(pu), Some(pv), Some(ps)) => self.contains(&pu, &pv, &ps),
            _ => true,
        })
    }
}

/// `{(u, u, s)}` for every binary `u` and bounded `s` of equal length.
pub fn reflexive_skeleton(p: &TruncationParams) -> QoTree {
    let mut out = QoTree::new();
    for len in 0..=p.depth {
        let seqs = sequences_of_len(len, p.branch);
        for u in binary_sequences_of_len(len) {
            for s in &seqs {
                out.insert(u.clone(), u.clone(), s.clone());
            }
        }
    }
    out
}

/// Least superset of `s` (plus the reflexive skeleton) closed under
/// prefixes, single-entry increments and `(u,v,s)+(v,w,t) -> (u,w,s+t)`.
/// Sums with an entry `>= branch` are dropped.
pub fn normalize(s: &QoTree, p: &TruncationParams) -> Result<QoTree> {
    s.check_bounds(p)?;
    let mut closed: BTreeSet<(FinSeq, FinSeq, FinSeq)> = BTreeSet::new();
    // Index by first and by second coordinate for the transitivity rule.
    let mut by_first: HashMap<FinSeq, Vec<(FinSeq, FinSeq)>> = HashMap::new();
    let mut by_second: HashMap<FinSeq, Vec<(FinSeq, FinSeq)>> = HashMap::new();
    let mut work: Vec<(FinSeq, FinSeq, FinSeq)> = s.iter().cloned().collect();
    work.extend(reflexive_skeleton(p).nodes);

    while let Some(node) = work.pop() {
        if !closed.insert(node.clone()) {
            continue;
        }
        let (u, v, t) = node;
        if let (Some(pu), Some(pv), Some(pt)) = (u.parent(), v.parent(), t.parent()) {
            work.push((pu, pv, pt));
        }
        for i in 0..t.len() {
            if t.items()[i] + 1 < p.branch {
                let mut items = t.items().to_vec();
                items[i] += 1;
                work.push((u.clone(), v.clone(), FinSeq::new(items)));
            }
        }
        let fits = |a: &FinSeq| a.items().iter().all(|&n| n < p.branch);
        if let Some(right) = by_first.get(&v) {
            for (w, r) in right {
                let sum = seq_add(&t, r)?;
                if fits(&sum) {
                    work.push((u.clone(), w.clone(), sum));
                }
            }
        }
        if let Some(left) = by_second.get(&u) {
            for (x, r) in left {
                let sum = seq_add(r, &t)?;
                if fits(&sum) {
                    work.push((x.clone(), v.clone(), sum));
                }
            }
        }
        // A node may combine with itself when u = v.
        if u == v {
            let sum = seq_add(&t, &t)?;
            if fits(&sum) {
                work.push((u.clone(), v.clone(), sum));
            }
        }
        by_first.entry(u.clone()).or_default().push((v.clone(), t.clone()));
        by_second.entry(v.clone()).or_default().push((u.clone(), t.clone()));
    }
    Ok(QoTree { nodes: closed })
}

/// Whether `(u, v, t)` lies below a discarded node: some level `k` where
/// `u` and `v` already differ while `t` is still all zeros.
fn below_discarded(u: &FinSeq, v: &FinSeq, t: &FinSeq) -> bool {
    let first_diff = u.items().iter().zip(v.items()).position(|(a, b)| a != b);
    match first_diff {
        Some(i) => i < t.leading_zeros(),
        None => false,
    }
}

/// Drops every `(u, v, 0^{|u|})` with `u != v`, and everything above such a
/// node so the result stays prefix-closed.
pub fn refine(s: &QoTree) -> QoTree {
    QoTree {
        nodes: s.iter().filter(|(u, v, t)| !below_discarded(u, v, t)).cloned().collect(),
    }
}

/// Property (ii): every `(u, u, s)` within bounds is present.
pub fn has_reflexive_skeleton(s: &QoTree, p: &TruncationParams) -> bool {
    reflexive_skeleton(p).is_subset(s)
}

/// Property (iii) within bounds. Returns the first missing sum, if any.
pub fn transitivity_violation(s: &QoTree, p: &TruncationParams) -> Option<(FinSeq, FinSeq, FinSeq)> {
    let mut by_first: BTreeMap<(usize, &FinSeq), Vec<&(FinSeq, FinSeq, FinSeq)>> = BTreeMap::new();
    for node in s.iter() {
        by_first.entry((node.0.len(), &node.0)).or_default().push(node);
    }
    for (u, v, a) in s.iter() {
        if let Some(right) = by_first.get(&(v.len(), v)) {
            for (_, w, b) in right {
                let sum = seq_add(a, b).ok()?;
                if p.seq_in_bounds(&sum) && !s.contains(u, w, &sum) {
                    return Some((u.clone(), w.clone(), sum));
                }
            }
        }
    }
    None
}

/// Property (iv): `(u, v, 0^{|u|})` only occurs with `u = v`.
pub fn zero_separates(s: &QoTree) -> bool {
    s.iter().all(|(u, v, t)| u == v || !t.is_all_zero())
}

/// Normality in the last coordinate within bounds.
pub fn qo_is_normal(s: &QoTree, p: &TruncationParams) -> bool {
    s.iter().all(|(u, v, t)| {
        (0..t.len()).all(|i| {
            if t.items()[i] + 1 >= p.branch {
                return true;
            }
            let mut items = t.items().to_vec();
            items[i] += 1;
            s.contains(u, v, &FinSeq::new(items))
        })
    })
}

/// `S^x = {(u, s) | (u, x↾|u|, s) ∈ S}`.
pub fn slice(s: &QoTree, x: &FinSeq, p: &TruncationParams) -> Result<NormalTree> {
    if x.len() < p.depth {
        return Err(Error::LengthMismatch { expected: p.depth, found: x.len() });
    }
    if !x.is_binary() {
        return Err(Error::OutOfBounds(format!("{x} is not binary")));
    }
    Ok(NormalTree::from_nodes(
        s.iter()
            .filter(|(u, v, _)| x.prefix(u.len()) == *v)
            .map(|(u, _, t)| (u.clone(), t.clone())),
    ))
}

/// Bounded membership of `(x, y)` in the projection of `S`: some `s` of full
/// length has every prefix triple in `S`.
pub fn proj_member(s: &QoTree, x: &FinSeq, y: &FinSeq, p: &TruncationParams) -> Result<bool> {
    if x.len() != p.depth {
        return Err(Error::LengthMismatch { expected: p.depth, found: x.len() });
    }
    if y.len() != p.depth {
        return Err(Error::LengthMismatch { expected: p.depth, found: y.len() });
    }
    Ok(s.iter().any(|(u, v, t)| {
        u == x && v == y && (0..=t.len()).all(|n| s.contains(&x.prefix(n), &y.prefix(n), &t.prefix(n)))
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WitnessMode {
    Plain,
    /// Injective and `⪯`-preserving.
    LexPreserving,
    /// `#s <= #f(s)` for every `s`.
    CodeMonotone,
}

impl fmt::Display for WitnessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessMode::Plain => "plain",
            WitnessMode::LexPreserving => "lex",
            WitnessMode::CodeMonotone => "code",
        })
    }
}

impl FromStr for WitnessMode {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text {
            "plain" => Ok(WitnessMode::Plain),
            "lex" | "lex_preserving" | "lex-preserving" => Ok(WitnessMode::LexPreserving),
            "code" | "code_monotone" | "code-monotone" => Ok(WitnessMode::CodeMonotone),
            _ => Err(Error::Invalid(format!("unknown witness mode `{text}`"))),
        }
    }
}

/// A finite map between sequences, meant to be Lipschitz.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LipschitzMap {
    pub assignments: BTreeMap<FinSeq, FinSeq>,
}

impl LipschitzMap {
    pub fn identity(p: &TruncationParams) -> Self {
        LipschitzMap { assignments: p.universe().into_iter().map(|s| (s.clone(), s)).collect() }
    }

    pub fn get(&self, s: &FinSeq) -> Option<&FinSeq> {
        self.assignments.get(s)
    }

    /// `g ∘ self`, defined where both steps are.
    pub fn then(&self, g: &LipschitzMap) -> LipschitzMap {
        LipschitzMap {
            assignments: self
                .assignments
                .iter()
                .filter_map(|(s, t)| g.get(t).map(|r| (s.clone(), r.clone())))
                .collect(),
        }
    }

    pub fn is_injective(&self) -> bool {
        let images: BTreeSet<&FinSeq> = self.assignments.values().collect();
        images.len() == self.assignments.len()
    }
}

/// Transfer condition at one sequence: every `(u, s) ∈ S` has `(u, t) ∈ T`.
fn transfers(tags: &BTreeMap<FinSeq, Vec<FinSeq>>, target: &NormalTree, s: &FinSeq, t: &FinSeq) -> bool {
    tags.get(s).is_none_or(|us| us.iter().all(|u| target.contains(u, t)))
}

struct WitnessSearch<'a> {
    tags: BTreeMap<FinSeq, Vec<FinSeq>>,
    target: &'a NormalTree,
    mode: WitnessMode,
    p: TruncationParams,
    memo: HashMap<(FinSeq, FinSeq), bool>,
}

impl WitnessSearch<'_> {
    fn local_ok(&self, s: &FinSeq, t: &FinSeq) -> bool {
        if !transfers(&self.tags, self.target, s, t) {
            return false;
        }
        match self.mode {
            WitnessMode::CodeMonotone => match (seq_code(s), seq_code(t)) {
                (Ok(a), Ok(b)) => a <= b,
                _ => false,
            },
            _ => true,
        }
    }

    /// Whether `f(s) = t` extends to the whole subtree below `s`.
    fn feasible(&mut self, s: &FinSeq, t: &FinSeq) -> bool {
        if let Some(&known) = self.memo.get(&(s.clone(), t.clone())) {
            return known;
        }
        let ok = self.local_ok(s, t) && self.child_images(s, t).is_some();
        self.memo.insert((s.clone(), t.clone()), ok);
        ok
    }

    /// Least last entries for the children of `s` given `f(s) = t`.
    fn child_images(&mut self, s: &FinSeq, t: &FinSeq) -> Option<Vec<u64>> {
        if s.len() >= self.p.depth {
            return Some(Vec::new());
        }
        let mut chosen = Vec::with_capacity(self.p.branch as usize);
        let mut floor = 0u64;
        for n in 0..self.p.branch {
            let child = s.extended(n);
            let m = (floor..self.p.branch).find(|&m| self.feasible(&child, &t.extended(m)))?;
            chosen.push(m);
            if self.mode == WitnessMode::LexPreserving {
                floor = m + 1;
            }
        }
        Some(chosen)
    }
}

/// Searches for a Lipschitz `f` with `(u, s) ∈ S ⇒ (u, f(s)) ∈ T` over the
/// truncated universe. Among all witnesses the one that is least when the
/// domain is read in `⪯` order and images compared entrywise is returned;
/// this is the first hit of a level-by-level search with candidates in
/// increasing order. Subtrees are independent given the image of their
/// root, so feasibility is memoized on `(s, f(s))`.
pub fn find_leqmax_witness(s: &NormalTree, t: &NormalTree, mode: WitnessMode, p: &TruncationParams) -> Option<LipschitzMap> {
    let mut tags: BTreeMap<FinSeq, Vec<FinSeq>> = BTreeMap::new();
    for (u, seq) in s.iter() {
        tags.entry(seq.clone()).or_default().push(u.clone());
    }
    let mut search = WitnessSearch { tags, target: t, mode, p: *p, memo: HashMap::new() };
    let root = FinSeq::empty();
    if !search.feasible(&root, &root) {
        return None;
    }
    let mut assignments = BTreeMap::new();
    assignments.insert(root.clone(), root.clone());
    let mut frontier = vec![root];
    while let Some(seq) = frontier.pop() {
        let image = assignments[&seq].clone();
        let children = search.child_images(&seq, &image)?;
        for (n, m) in children.into_iter().enumerate() {
            let child = seq.extended(n as u64);
            assignments.insert(child.clone(), image.extended(m));
            frontier.push(child);
        }
    }
    Some(LipschitzMap { assignments })
}

/// Checks that `f` is total on the universe, Lipschitz, within bounds,
/// satisfies the mode, and transfers `S` into `T`.
pub fn verify_witness(f: &LipschitzMap, s: &NormalTree, t: &NormalTree, mode: WitnessMode, p: &TruncationParams) -> bool {
    let universe = p.universe();
    if f.assignments.len() != universe.len() {
        return false;
    }
    for seq in &universe {
        let Some(image) = f.get(seq) else { return false };
        if image.len() != seq.len() || !p.seq_in_bounds(image) {
            return false;
        }
        if let Some(parent) = seq.parent() {
            if !f.get(&parent).is_some_and(|pi| pi.is_prefix_of(image)) {
                return false;
            }
        }
    }
    for (u, seq) in s.iter() {
        match f.get(seq) {
            Some(image) if t.contains(u, image) => {}
            _ => return false,
        }
    }
    match mode {
        WitnessMode::Plain => true,
        WitnessMode::CodeMonotone => universe.iter().all(|seq| match (seq_code(seq), seq_code(&f.assignments[seq])) {
            (Ok(a), Ok(b)) => a <= b,
            _ => false,
        }),
        WitnessMode::LexPreserving => universe.iter().all(|a| {
            universe.iter().all(|b| (a <= b) == (f.assignments[a] <= f.assignments[b]))
        }),
    }
}
