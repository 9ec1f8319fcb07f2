//! Finite graph codes, the injection/extension monoid acting on them, and a
//! checker for the axioms of a monoid action given as a set of triples.

use std::collections::HashSet;
use std::hash::Hash;

use crate::structures::{FinInjection, FinStructure};
use crate::{Error, Result};

/// Symmetric irreflexive relation on `{0,..,size-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphCode {
    size: usize,
    bits: Vec<bool>,
}

impl GraphCode {
    pub fn empty(size: usize) -> Self {
        GraphCode { size, bits: vec![false; size * size] }
    }

    pub fn from_edges(size: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = GraphCode::empty(size);
        for &(a, b) in edges {
            g.set(a, b, true)?;
        }
        Ok(g)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, a: usize, b: usize) -> bool {
        a < self.size && b < self.size && self.bits[a * self.size + b]
    }

    pub fn set(&mut self, a: usize, b: usize, on: bool) -> Result<()> {
        if a >= self.size || b >= self.size {
            return Err(Error::OutOfBounds(format!("pair ({a},{b}) outside a code of size {}", self.size)));
        }
        if a == b {
            if on {
                return Err(Error::SelfLoop(a as u64));
            }
            return Ok(());
        }
        self.bits[a * self.size + b] = on;
        self.bits[b * self.size + a] = on;
        Ok(())
    }

    /// Edges `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.size;
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|&(a, b)| self.get(a, b)).collect()
    }

    /// Every code on `size` vertices, ordered by the upper-triangle bit
    /// string read as a binary number.
    pub fn all(size: usize) -> Vec<GraphCode> {
        let pairs: Vec<(usize, usize)> = (0..size).flat_map(|a| (a + 1..size).map(move |b| (a, b))).collect();
        (0u64..1 << pairs.len())
            .map(|mask| {
                let mut g = GraphCode::empty(size);
                for (k, &(a, b)) in pairs.iter().enumerate() {
                    if mask >> (pairs.len() - 1 - k) & 1 == 1 {
                        g.set(a, b, true).expect("pairs are in range");
                    }
                }
                g
            })
            .collect()
    }

    pub fn to_structure(&self) -> FinStructure {
        let edges: Vec<(u64, u64)> = self.edges().into_iter().map(|(a, b)| (a as u64, b as u64)).collect();
        FinStructure::graph(self.size as u64, &edges).expect("codes are simple graphs")
    }
}

/// Whether `x(n,m) ⟺ y(p(n),p(m))` for all `n, m`.
pub fn natural_action_holds(p: &FinInjection, x: &GraphCode, y: &GraphCode) -> bool {
    if p.domain_size() != x.size() || p.codomain_size() != y.size() {
        return false;
    }
    let img = p.images();
    (0..x.size()).all(|a| (0..x.size()).all(|b| x.get(a, b) == y.get(img[a] as usize, img[b] as usize)))
}

/// `(p, u, v)` with `p: N → M` injective, `u` the indicator of its range and
/// `v` a graph on `M` with no edge inside the range.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MonoidElem {
    p: FinInjection,
    u: Vec<bool>,
    v: GraphCode,
}

impl MonoidElem {
    pub fn new(p: FinInjection, u: Vec<bool>, v: GraphCode) -> Result<Self> {
        let m = p.codomain_size();
        if u.len() != m || v.size() != m {
            return Err(Error::SizeMismatch(format!("u and v must have size {m}")));
        }
        for (j, &bit) in u.iter().enumerate() {
            if bit != p.preimage(j as u64).is_some() {
                return Err(Error::Invalid(format!("u({j}) disagrees with the range of p")));
            }
        }
        for (a, b) in v.edges() {
            if u[a] && u[b] {
                return Err(Error::Invalid(format!("v has the edge ({a},{b}) inside the range of p")));
            }
        }
        Ok(MonoidElem { p, u, v })
    }

    /// The element with `p = id`, `u ≡ 1`, `v ≡ 0` on `n` points.
    pub fn identity(n: usize) -> Self {
        MonoidElem { p: FinInjection::identity(n), u: vec![true; n], v: GraphCode::empty(n) }
    }

    /// Extends `p` by the graph `v` outside its range.
    pub fn from_injection(p: FinInjection, v: &GraphCode) -> Result<Self> {
        let m = p.codomain_size();
        let u: Vec<bool> = (0..m).map(|j| p.preimage(j as u64).is_some()).collect();
        let mut w = v.clone();
        for a in 0..m {
            for b in 0..m {
                if u[a] && u[b] {
                    w.set(a, b, false)?;
                }
            }
        }
        MonoidElem::new(p, u, w)
    }

    pub fn p(&self) -> &FinInjection {
        &self.p
    }

    pub fn u(&self) -> &[bool] {
        &self.u
    }

    pub fn v(&self) -> &GraphCode {
        &self.v
    }

    pub fn source(&self) -> usize {
        self.p.domain_size()
    }

    pub fn target(&self) -> usize {
        self.p.codomain_size()
    }

    /// Every element `N → M`.
    pub fn all(n: usize, m: usize) -> Vec<MonoidElem> {
        let mut out = Vec::new();
        for p in FinInjection::all(n, m) {
            let mut seen = HashSet::new();
            for v in GraphCode::all(m) {
                let e = MonoidElem::from_injection(p.clone(), &v).expect("built from a valid injection");
                if seen.insert(e.v.clone()) {
                    out.push(e);
                }
            }
        }
        out
    }
}

/// `g·x`: copy `x` along `p` onto the range and use `v` elsewhere.
pub fn act(g: &MonoidElem, x: &GraphCode) -> Result<GraphCode> {
    if x.size() != g.source() {
        return Err(Error::LengthMismatch { expected: g.source(), found: x.size() });
    }
    let m = g.target();
    let mut y = GraphCode::empty(m);
    for a in 0..m {
        for b in a + 1..m {
            let on = match (g.p.preimage(a as u64), g.p.preimage(b as u64)) {
                (Some(pa), Some(pb)) => x.get(pa as usize, pb as usize),
                _ => g.v.get(a, b),
            };
            y.set(a, b, on)?;
        }
    }
    Ok(y)
}

/// `h·g`, acting as `g` first and then `h`.
pub fn compose(h: &MonoidElem, g: &MonoidElem) -> Result<MonoidElem> {
    if g.target() != h.source() {
        return Err(Error::LengthMismatch { expected: h.source(), found: g.target() });
    }
    let q = g.p.then(&h.p)?;
    let k = h.target();
    let t: Vec<bool> = (0..k).map(|j| q.preimage(j as u64).is_some()).collect();
    let mut w = GraphCode::empty(k);
    for a in 0..k {
        for b in a + 1..k {
            let on = if t[a] && t[b] {
                false
            } else if !h.u[a] || !h.u[b] {
                h.v.get(a, b)
            } else {
                let pa = h.p.preimage(a as u64).expect("u marks the range") as usize;
                let pb = h.p.preimage(b as u64).expect("u marks the range") as usize;
                g.v.get(pa, pb)
            };
            w.set(a, b, on)?;
        }
    }
    MonoidElem::new(q, t, w)
}

/// Outcome of checking the identity and composition axioms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub triples: usize,
    pub identity_checks: usize,
    pub composition_checks: usize,
    pub identity_failures: Vec<usize>,
    /// Index pairs `(i, j)` where triple `i` then triple `j` has no composite.
    pub composition_failures: Vec<(usize, usize)>,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.identity_failures.is_empty() && self.composition_failures.is_empty()
    }
}

/// Checks that `(e_x, x, x)` is present for every `x` that occurs and that
/// `(h, x, y), (g, y, z)` always come with `(g∘h, x, z)`.
///
/// `compose(g, h)` returns the composite acting as `h` first, or `None` when
/// the pair is not composable.
pub fn check_action_axioms<G, X>(
    triples: &[(G, X, X)],
    identity: impl Fn(&X) -> G,
    compose: impl Fn(&G, &G) -> Option<G>,
) -> AxiomReport
where
    G: Clone + Eq + Hash,
    X: Clone + Eq + Hash,
{
    let set: HashSet<(G, X, X)> = triples.iter().cloned().collect();
    let mut report = AxiomReport { triples: triples.len(), ..AxiomReport::default() };
    let mut seen = HashSet::new();
    for (i, (_, x, y)) in triples.iter().enumerate() {
        for obj in [x, y] {
            if seen.insert(obj.clone()) {
                report.identity_checks += 1;
                if !set.contains(&(identity(obj), obj.clone(), obj.clone())) {
                    report.identity_failures.push(i);
                }
            }
        }
    }
    let mut by_source: std::collections::HashMap<&X, Vec<usize>> = std::collections::HashMap::new();
    for (j, (_, y, _)) in triples.iter().enumerate() {
        by_source.entry(y).or_default().push(j);
    }
    for (i, (h, x, y)) in triples.iter().enumerate() {
        for &j in by_source.get(y).map(Vec::as_slice).unwrap_or(&[]) {
            let (g, _, z) = &triples[j];
            report.composition_checks += 1;
            let ok = compose(g, h).is_some_and(|gh| set.contains(&(gh, x.clone(), z.clone())));
            if !ok {
                report.composition_failures.push((i, j));
            }
        }
    }
    report
}

/// The natural action on codes of sizes `1..=max`: every `(p, x, y)` with
/// `x(n,m) ⟺ y(p(n),p(m))`.
pub fn natural_action_triples(max: usize) -> Vec<(FinInjection, GraphCode, GraphCode)> {
    let mut out = Vec::new();
    for n in 1..=max {
        for m in n..=max {
            let ys = GraphCode::all(m);
            for p in FinInjection::all(n, m) {
                for x in GraphCode::all(n) {
                    out.extend(ys.iter().filter(|y| natural_action_holds(&p, &x, y)).map(|y| (p.clone(), x.clone(), y.clone())));
                }
            }
        }
    }
    out
}

/// The graph of `act` over every element between sizes `1..=max` and every
/// code of the matching source size.
pub fn monoid_action_triples(max: usize) -> Vec<(MonoidElem, GraphCode, GraphCode)> {
    let mut out = Vec::new();
    for n in 1..=max {
        let xs = GraphCode::all(n);
        for m in n..=max {
            for g in MonoidElem::all(n, m) {
                for x in &xs {
                    let y = act(&g, x).expect("sizes match");
                    out.push((g.clone(), x.clone(), y));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_enumeration() {
        assert_eq!(GraphCode::all(3).len(), 8);
        assert_eq!(GraphCode::all(4).len(), 64);
        assert_eq!(GraphCode::all(1).len(), 1);
        let g = GraphCode::from_edges(3, &[(2, 0)]).unwrap();
        assert_eq!(g.edges(), vec![(0, 2)]);
        assert!(GraphCode::from_edges(2, &[(1, 1)]).is_err());
    }

    #[test]
    fn natural_action_example() {
        let p = FinInjection::new(vec![1, 0], 2).unwrap();
        let x = GraphCode::from_edges(2, &[(0, 1)]).unwrap();
        assert!(natural_action_holds(&p, &x, &x));
        let into = FinInjection::new(vec![0, 2], 3).unwrap();
        assert!(natural_action_holds(&into, &x, &GraphCode::from_edges(3, &[(0, 2), (1, 2)]).unwrap()));
        assert!(!natural_action_holds(&into, &x, &GraphCode::from_edges(3, &[(0, 1)]).unwrap()));
    }

    #[test]
    fn element_invariants_are_enforced() {
        let p = FinInjection::new(vec![0], 2).unwrap();
        assert!(MonoidElem::new(p.clone(), vec![true, false], GraphCode::empty(2)).is_ok());
        assert!(MonoidElem::new(p.clone(), vec![true, true], GraphCode::empty(2)).is_err());
        let q = FinInjection::new(vec![0, 1], 2).unwrap();
        let inside = GraphCode::from_edges(2, &[(0, 1)]).unwrap();
        assert!(MonoidElem::new(q, vec![true, true], inside).is_err());
    }

    #[test]
    fn act_copies_and_extends() {
        let p = FinInjection::new(vec![2, 0], 3).unwrap();
        let v = GraphCode::from_edges(3, &[(1, 2)]).unwrap();
        let g = MonoidElem::new(p, vec![true, false, true], v).unwrap();
        let x = GraphCode::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(act(&g, &x).unwrap().edges(), vec![(0, 2), (1, 2)]);
        assert_eq!(act(&MonoidElem::identity(2), &x).unwrap(), x);
        assert!(act(&g, &GraphCode::empty(3)).is_err());
    }

    #[test]
    fn action_law_small_exhaustive() {
        for n in 1..=2 {
            for m in n..=3 {
                for k in m..=3 {
                    for g in MonoidElem::all(n, m) {
                        for h in MonoidElem::all(m, k) {
                            let hg = compose(&h, &g).unwrap();
                            for x in GraphCode::all(n) {
                                let step = act(&h, &act(&g, &x).unwrap()).unwrap();
                                assert_eq!(step, act(&hg, &x).unwrap());
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn axiom_checker_accepts_both_actions() {
        let nat = natural_action_triples(3);
        let report = check_action_axioms(&nat, |x: &GraphCode| FinInjection::identity(x.size()), |g, h| h.then(g).ok());
        assert!(report.holds(), "{report:?}");
        let mon = monoid_action_triples(2);
        let report = check_action_axioms(&mon, |x: &GraphCode| MonoidElem::identity(x.size()), |g, h| compose(g, h).ok());
        assert!(report.holds(), "{report:?}");
    }

    #[test]
    fn axiom_checker_spots_missing_identity() {
        let x = GraphCode::empty(1);
        let p = FinInjection::new(vec![1], 2).unwrap();
        let triples = vec![(p, x.clone(), GraphCode::empty(2))];
        let report = check_action_axioms(&triples, |x: &GraphCode| FinInjection::identity(x.size()), |g, h| h.then(g).ok());
        assert!(!report.holds());
        assert_eq!(report.identity_failures.len(), 2);
    }
}
