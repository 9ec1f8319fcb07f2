//! Seeded property suites. Each suite runs its cases in parallel, keeps the
//! report order deterministic, and records enough to reproduce a failure.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::corpus::{
    free_trees, has_close_leaves, random_graph, random_normal_tree, random_qo_tree, random_tree, rng, tree_corpus,
    tree_paths,
};
use crate::gadgets::{build_gprime, build_gx, build_ordered_gt, build_strict_gt, encode_gprime, GadgetBuild, GadgetVertex};
use crate::io::{write_normal_tree, write_qo_tree, write_structure};
use crate::metrics::{all_isometric_embeddings, geodesic_space, is_ultrametric, path_distance, ultra_space, Dyadic};
use crate::monoid::{
    act, check_action_axioms, compose, monoid_action_triples, natural_action_holds, natural_action_triples, GraphCode,
    MonoidElem,
};
use crate::morphisms::{embed_from_witness, extract_witness, find_morphisms, is_morphism, BuildVariant, Morphism, MorphismKind};
use crate::seqs::{binary_sequences_of_len, FinSeq};
use crate::structures::{in_subgroup, relabel, FinInjection, FinStructure, Permutation, Subgroup, SubgroupContext};
use crate::trees::{
    find_leqmax_witness, has_reflexive_skeleton, normal_closure, normalize, qo_is_normal, refine, slice,
    transitivity_violation, verify_witness, zero_separates, NormalTree, QoTree, TruncationParams, WitnessMode,
};
use crate::{Error, Result};

/// Every suite name, in acceptance order.
pub const SUITES: [&str; 13] = [
    "normal-form",
    "slice-injectivity",
    "reduction-forward",
    "reduction-roundtrip",
    "separation",
    "rigidity",
    "homo-injectivity",
    "weak-homo-collapse",
    "ultrametric",
    "geodesic",
    "monoid-laws",
    "friedman-stanley",
    "h-characterization",
];

/// Seed and optional overrides of a suite's default bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub depth: Option<usize>,
    pub branch: Option<u64>,
    pub tail: Option<usize>,
    pub limit: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 1, depth: None, branch: None, tail: None, limit: None }
    }
}

impl SuiteConfig {
    pub fn with_seed(seed: u64) -> Self {
        SuiteConfig { seed, ..SuiteConfig::default() }
    }

    fn params(&self, depth: usize, branch: u64, tail: usize) -> Result<TruncationParams> {
        TruncationParams::new(self.depth.unwrap_or(depth), self.branch.unwrap_or(branch), self.tail.unwrap_or(tail))
    }

    fn case_seed(&self, case: usize) -> u64 {
        self.seed.wrapping_add((case as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

/// One failed case: its seed, what went wrong, and named input files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub case: usize,
    pub seed: u64,
    pub detail: String,
    pub inputs: Vec<(String, String)>,
}

impl Failure {
    fn new(case: usize, seed: u64, detail: impl Into<String>) -> Self {
        Failure { case, seed, detail: detail.into(), inputs: Vec::new() }
    }

    fn with_input(mut self, name: &str, content: String) -> Self {
        self.inputs.push((name.to_string(), content));
        self
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<Failure>,
    pub notes: Vec<String>,
    pub wall: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Deterministic summary; wall time is left out.
    pub fn render(&self) -> String {
        let mut out = format!(
            "suite {}: {} cases, {} failures\n",
            self.name,
            self.cases,
            self.failures.len()
        );
        for note in &self.notes {
            writeln!(out, "  note: {note}").unwrap();
        }
        for f in &self.failures {
            writeln!(out, "  FAIL case {} (seed {}): {}", f.case, f.seed, f.detail).unwrap();
            for (name, content) in &f.inputs {
                writeln!(out, "  --- {name}").unwrap();
                for line in content.lines() {
                    writeln!(out, "  {line}").unwrap();
                }
            }
        }
        out
    }
}

struct Outcome {
    cases: usize,
    failures: Vec<Failure>,
    notes: Vec<String>,
}

impl Outcome {
    fn new(cases: usize, mut failures: Vec<Failure>, notes: Vec<String>) -> Self {
        failures.sort_by_key(|f| f.case);
        Outcome { cases, failures, notes }
    }
}

/// Runs a suite by name.
pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let outcome = match name {
        "normal-form" => normal_form(cfg),
        "slice-injectivity" => slice_injectivity(cfg),
        "reduction-forward" => reduction_forward(cfg),
        "reduction-roundtrip" => reduction_roundtrip(cfg),
        "separation" => separation(cfg),
        "rigidity" => rigidity(cfg),
        "homo-injectivity" => homo_injectivity(cfg),
        "weak-homo-collapse" => weak_homo_collapse(cfg),
        "ultrametric" => ultrametric(cfg),
        "geodesic" => geodesic(cfg),
        "monoid-laws" => monoid_laws(cfg),
        "friedman-stanley" => friedman_stanley(cfg),
        "h-characterization" => h_characterization(cfg),
        _ => return Err(Error::Invalid(format!("unknown suite `{name}`"))),
    }?;
    Ok(SuiteReport {
        name: name.to_string(),
        cases: outcome.cases,
        failures: outcome.failures,
        notes: outcome.notes,
        wall: start.elapsed(),
    })
}

/// Maps `f` over `0..n` in parallel, keeping every failure.
fn par_cases(n: usize, f: impl Fn(usize) -> Vec<Failure> + Sync + Send) -> Vec<Failure> {
    (0..n).into_par_iter().flat_map_iter(f).collect()
}

fn err_failure(case: usize, seed: u64, e: Error) -> Vec<Failure> {
    vec![Failure::new(case, seed, format!("error: {e}"))]
}

/// A random bounded QoTree of moderate size, normalized and refined.
fn random_refined<R: Rng>(r: &mut R, p: &TruncationParams) -> Result<(QoTree, QoTree)> {
    let candidates = (4f64 * p.branch as f64).powi(p.depth as i32);
    let raw = random_qo_tree(r, p, (8.0 / candidates).min(1.0));
    let refined = refine(&normalize(&raw, p)?);
    Ok((raw, refined))
}

fn normal_form(cfg: &SuiteConfig) -> Result<Outcome> {
    let n = 200;
    let failures = par_cases(n, |case| {
        let seed = cfg.case_seed(case);
        let mut r = rng(seed);
        let (d, b) = (r.gen_range(1..=3), r.gen_range(1..=3));
        let (p, raw, s) = match cfg.params(d, b, 0).and_then(|p| random_refined(&mut r, &p).map(|(raw, s)| (p, raw, s))) {
            Ok(v) => v,
            Err(e) => return err_failure(case, seed, e),
        };
        let mut bad = Vec::new();
        if !has_reflexive_skeleton(&s, &p) {
            bad.push("reflexive skeleton missing".to_string());
        }
        if let Some((u, v, t)) = transitivity_violation(&s, &p) {
            bad.push(format!("closure under sums fails at ({u},{v},{t})"));
        }
        if !zero_separates(&s) {
            bad.push("a zero sequence links distinct tags".into());
        }
        if !s.is_prefix_closed() || !qo_is_normal(&s, &p) {
            bad.push("result is not a normal quasi-order tree".into());
        }
        if bad.is_empty() {
            Vec::new()
        } else {
            vec![Failure::new(case, seed, bad.join("; ")).with_input("input.tree", write_qo_tree(&raw, Some(&p)))]
        }
    });
    Ok(Outcome::new(n, failures, Vec::new()))
}

fn slice_injectivity(cfg: &SuiteConfig) -> Result<Outcome> {
    let n = 50;
    let failures = par_cases(n, |case| {
        let seed = cfg.case_seed(case);
        let mut r = rng(seed);
        let (d, b) = (r.gen_range(1..=3), r.gen_range(1..=3));
        let mut run = || -> Result<Vec<Failure>> {
            let p = cfg.params(d, b, 0)?;
            let (_, s) = random_refined(&mut r, &p)?;
            let xs = binary_sequences_of_len(p.depth);
            let slices: Vec<NormalTree> = xs.iter().map(|x| slice(&s, x, &p)).collect::<Result<_>>()?;
            let zero = FinSeq::zeros(p.depth);
            let mut out = Vec::new();
            for (i, x) in xs.iter().enumerate() {
                for (j, y) in xs.iter().enumerate() {
                    let witnessed = slices[j].contains(y, &zero) && !slices[i].contains(y, &zero);
                    if i != j && (slices[i] == slices[j] || !witnessed) {
                        out.push(
                            Failure::new(case, seed, format!("slices at {x} and {y} are not told apart"))
                                .with_input("refined.tree", write_qo_tree(&s, Some(&p))),
                        );
                    }
                }
            }
            Ok(out)
        };
        run().unwrap_or_else(|e| err_failure(case, seed, e))
    });
    Ok(Outcome::new(n, failures, Vec::new()))
}

/// Random pairs `(S, T)`; every other pair has `T ⊇ S`.
fn random_pair<R: Rng>(r: &mut R, p: &TruncationParams) -> Result<(NormalTree, NormalTree)> {
    let s = random_normal_tree(r, p, 0.25)?;
    let mut t = random_normal_tree(r, p, 0.25)?;
    if r.gen_bool(0.5) {
        let union = NormalTree::from_nodes(s.iter().chain(t.iter()).cloned());
        t = normal_closure(&union, p)?;
    }
    Ok((s, t))
}

fn pair_failure(case: usize, seed: u64, detail: String, s: &NormalTree, t: &NormalTree, p: &TruncationParams) -> Failure {
    Failure::new(case, seed, detail)
        .with_input("S.tree", write_normal_tree(s, Some(p)))
        .with_input("T.tree", write_normal_tree(t, Some(p)))
}

fn reduction_forward(cfg: &SuiteConfig) -> Result<Outcome> {
    let p = cfg.params(2, 2, 1)?;
    let wanted = 30;
    let mut r = rng(cfg.seed);
    let mut pairs = Vec::new();
    let mut attempts = 0;
    while pairs.len() < wanted && attempts < 100 * wanted {
        attempts += 1;
        let (s, t) = random_pair(&mut r, &p)?;
        if let Some(f) = find_leqmax_witness(&s, &t, WitnessMode::LexPreserving, &p) {
            pairs.push((s, t, f));
        }
    }
    let mut failures = par_cases(pairs.len(), |case| {
        let (s, t, f) = &pairs[case];
        let check = || -> Result<bool> {
            let g = embed_from_witness(f, s, t, BuildVariant::OrderedGt, &p)?;
            let (a, b) = (build_ordered_gt(s, &p)?, build_ordered_gt(t, &p)?);
            is_morphism(&g.map, &a.structure, &b.structure, MorphismKind::Embedding)
        };
        match check() {
            Ok(true) => Vec::new(),
            Ok(false) => vec![pair_failure(case, cfg.seed, "transported map is not an embedding".into(), s, t, &p)],
            Err(e) => vec![pair_failure(case, cfg.seed, format!("error: {e}"), s, t, &p)],
        }
    });
    if pairs.len() < wanted {
        failures.push(Failure::new(pairs.len(), cfg.seed, format!("only {} witnessed pairs in {attempts} draws", pairs.len())));
    }
    let notes = vec![format!("{} witnessed pairs from {attempts} draws at {p}", pairs.len())];
    Ok(Outcome::new(pairs.len(), failures, notes))
}

fn reduction_roundtrip(cfg: &SuiteConfig) -> Result<Outcome> {
    let p = cfg.params(2, 2, 1)?;
    let n = 20;
    let failures = par_cases(n, |case| {
        let seed = cfg.case_seed(case);
        let mut r = rng(seed);
        let mut pair = || -> Result<(NormalTree, NormalTree)> {
            let s = random_normal_tree(&mut r, &p, 0.3)?;
            let extra = random_normal_tree(&mut r, &p, 0.3)?;
            let t = normal_closure(&NormalTree::from_nodes(s.iter().chain(extra.iter()).cloned()), &p)?;
            Ok((s, t))
        };
        let (s, t) = match pair() {
            Ok(st) => st,
            Err(e) => return err_failure(case, seed, e),
        };
        let run = || -> Result<Option<String>> {
            let (gs, gt) = (build_gprime(&s, &p)?, build_gprime(&t, &p)?);
            let Some(g) = find_morphisms(&gs.structure, &gt.structure, MorphismKind::Embedding, Some(1)).pop() else {
                return Ok(Some("no embedding between the builds".into()));
            };
            let f = match extract_witness(&g, &s, &t, BuildVariant::Gprime, &p) {
                Ok(f) => f,
                Err(e) => return Ok(Some(format!("extraction failed: {e}"))),
            };
            if f.get(&FinSeq::empty()) != Some(&FinSeq::empty()) {
                return Ok(Some("f(∅) ≠ ∅".into()));
            }
            let seq_to_seq = gs.vertices.iter().all(|(c, v)| {
                !matches!(v, GadgetVertex::Seq(_))
                    || g.apply(*c).and_then(|img| gt.vertex(img)).is_some_and(|w| matches!(w, GadgetVertex::Seq(_)))
            });
            if !seq_to_seq {
                return Ok(Some("a sequence vertex leaves the sequence vertices".into()));
            }
            if !verify_witness(&f, &s, &t, WitnessMode::Plain, &p) {
                return Ok(Some("extracted map is not a witness".into()));
            }
            Ok(None)
        };
        match run() {
            Ok(None) => Vec::new(),
            Ok(Some(msg)) => vec![pair_failure(case, seed, msg, &s, &t, &p)],
            Err(e) => vec![pair_failure(case, seed, format!("error: {e}"), &s, &t, &p)],
        }
    });
    Ok(Outcome::new(n, failures, vec![format!("bounds {p}")]))
}

fn separation(cfg: &SuiteConfig) -> Result<Outcome> {
    let p = cfg.params(2, 2, 1)?;
    let trees = tree_corpus(cfg.seed, 20, &p, 0.2)?;
    let builds: Vec<GadgetBuild> = trees.par_iter().map(|t| build_ordered_gt(t, &p)).collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..trees.len()).flat_map(|i| (i + 1..trees.len()).map(move |j| (i, j))).collect();
    let failures = par_cases(pairs.len(), |case| {
        let (i, j) = pairs[case];
        if find_morphisms(&builds[i].structure, &builds[j].structure, MorphismKind::Isomorphism, Some(1)).is_empty() {
            Vec::new()
        } else {
            vec![pair_failure(case, cfg.seed, format!("trees {i} and {j} have isomorphic builds"), &trees[i], &trees[j], &p)]
        }
    });
    let notes = vec![format!("{} trees, {} pairs at {p}", trees.len(), pairs.len())];
    Ok(Outcome::new(pairs.len(), failures, notes))
}

/// Every normal tree at `p`, by closing each subset of the nodes.
fn all_normal_trees(p: &TruncationParams) -> Result<Vec<NormalTree>> {
    let mut nodes = Vec::new();
    for s in p.universe() {
        for u in binary_sequences_of_len(s.len()) {
            nodes.push((u, s.clone()));
        }
    }
    if nodes.len() > 16 {
        return Err(Error::InvalidParams(format!("{} nodes is too many to enumerate", nodes.len())));
    }
    let mut out = BTreeSet::new();
    for mask in 0u32..1 << nodes.len() {
        let chosen = NormalTree::from_nodes((0..nodes.len()).filter(|k| mask >> k & 1 == 1).map(|k| nodes[k].clone()));
        out.insert(normal_closure(&chosen, p)?.nodes().clone());
    }
    Ok(out.into_iter().map(NormalTree::from_nodes).collect())
}

type StructureKey = (Vec<(u64, u64)>, Vec<(u64, u64)>, Option<u64>);

fn structure_key(g: &FinStructure) -> StructureKey {
    (g.edges().iter().copied().collect(), g.order().iter().copied().collect(), g.root())
}

fn rigidity(cfg: &SuiteConfig) -> Result<Outcome> {
    let mut builds: Vec<(String, FinStructure)> = Vec::new();
    let mut seen = HashSet::new();
    for depth in 0..=1 {
        for branch in 1..=2 {
            for tail in 0..=2 {
                let p = cfg.params(depth, branch, tail)?;
                for t in all_normal_trees(&p)? {
                    let g = build_ordered_gt(&t, &p)?.structure;
                    if g.vertex_count() <= 8 && seen.insert(structure_key(&g)) {
                        builds.push((format!("{p} tree {{{}}}", write_normal_tree(&t, None).trim().replace('\n', " ")), g));
                    }
                }
            }
        }
    }
    let failures = par_cases(builds.len(), |case| {
        let (name, g) = &builds[case];
        let domain: Vec<u64> = g.domain().iter().copied().collect();
        let perms = Permutation::all(&domain);
        let images: HashSet<StructureKey> =
            perms.iter().map(|p| structure_key(&relabel(p, g).expect("permutation of the domain"))).collect();
        let autos = find_morphisms(g, g, MorphismKind::Isomorphism, Some(2)).len();
        if images.len() == perms.len() && autos == 1 {
            Vec::new()
        } else {
            vec![Failure::new(case, cfg.seed, format!("{name}: {} distinct relabelings of {}, {autos} automorphisms", images.len(), perms.len()))
                .with_input("build.struct", write_structure(g))]
        }
    });
    let notes = vec![format!("{} ordered builds with at most 8 vertices", builds.len())];
    let mut failures = failures;
    if builds.is_empty() {
        failures.push(Failure::new(0, cfg.seed, "no builds within the size bound"));
    }
    Ok(Outcome::new(builds.len(), failures, notes))
}

fn homo_injectivity(cfg: &SuiteConfig) -> Result<Outcome> {
    let limit = cfg.limit.unwrap_or(5000);
    let trees: Vec<FinStructure> = (1..=9).flat_map(free_trees).collect();
    let mut r = rng(cfg.seed);
    let targets: Vec<FinStructure> = (0..50)
        .map(|k| {
            let n = r.gen_range(5..=12);
            if k % 2 == 0 {
                random_tree(&mut r, n)
            } else {
                let density = r.gen_range(0.2..0.5);
                random_graph(&mut r, n, density)
            }
        })
        .collect();
    let jobs: Vec<(usize, usize)> = (0..trees.len()).flat_map(|a| (0..targets.len()).map(move |b| (a, b))).collect();
    let stats: Vec<(usize, usize, Vec<Failure>)> = jobs
        .par_iter()
        .enumerate()
        .map(|(case, &(a, b))| {
            let (ta, tb) = (&trees[a], &targets[b]);
            let homs = find_morphisms(ta, tb, MorphismKind::Homomorphism, Some(limit));
            let restricted = !has_close_leaves(ta);
            let chains = tree_paths(ta, 4);
            let mut failures = Vec::new();
            for h in &homs {
                let bad_chain = chains.iter().find(|c| c.iter().map(|v| h.map[v]).collect::<BTreeSet<_>>().len() != c.len());
                let detail = if restricted && !h.is_injective() {
                    Some("non-injective homomorphism".to_string())
                } else {
                    bad_chain.map(|c| format!("homomorphism collapses the chain {c:?}"))
                };
                if let Some(detail) = detail {
                    failures.push(
                        Failure::new(case, cfg.seed, detail)
                            .with_input("tree.struct", write_structure(ta))
                            .with_input("target.struct", write_structure(tb)),
                    );
                    break;
                }
            }
            (homs.len(), usize::from(homs.len() == limit), failures)
        })
        .collect();
    let found: usize = stats.iter().map(|s| s.0).sum();
    let capped: usize = stats.iter().map(|s| s.1).sum();
    let restricted = trees.iter().filter(|t| !has_close_leaves(t)).count();
    let notes = vec![
        format!("{} trees ({restricted} without close leaves) against {} targets", trees.len(), targets.len()),
        format!("{found} homomorphisms checked, {capped} searches stopped at the limit {limit}"),
    ];
    Ok(Outcome::new(jobs.len(), stats.into_iter().flat_map(|s| s.2).collect(), notes))
}

fn map_set(ms: Vec<Morphism>) -> BTreeSet<BTreeMap<u64, u64>> {
    ms.into_iter().map(|m| m.map).collect()
}

fn weak_homo_collapse(cfg: &SuiteConfig) -> Result<Outcome> {
    let p = cfg.params(2, 2, 1)?;
    let trees = tree_corpus(cfg.seed, 10, &p, 0.3)?;
    let builds: Vec<FinStructure> = trees.iter().map(|t| build_strict_gt(t, &p).map(|b| b.structure)).collect::<Result<_>>()?;
    let n = builds.len();
    let counts: Vec<(usize, Vec<Failure>)> = (0..n * n)
        .into_par_iter()
        .map(|case| {
            let (a, b) = (&builds[case / n], &builds[case % n]);
            let weak = map_set(find_morphisms(a, b, MorphismKind::WeakHomomorphism, None));
            let homo = map_set(find_morphisms(a, b, MorphismKind::Homomorphism, None));
            let emb = map_set(find_morphisms(a, b, MorphismKind::Embedding, None));
            if weak == homo && homo == emb {
                (emb.len(), Vec::new())
            } else {
                let detail = format!("{} weak, {} homomorphisms, {} embeddings", weak.len(), homo.len(), emb.len());
                (0, vec![pair_failure(case, cfg.seed, detail, &trees[case / n], &trees[case % n], &p)])
            }
        })
        .collect();
    let total: usize = counts.iter().map(|c| c.0).sum();
    let notes = vec![format!("{n} trees at {p}; {total} embeddings across all ordered pairs")];
    Ok(Outcome::new(n * n, counts.into_iter().flat_map(|c| c.1).collect(), notes))
}

fn ultrametric(cfg: &SuiteConfig) -> Result<Outcome> {
    let p = cfg.params(2, 2, 1)?;
    let trees = tree_corpus(cfg.seed, 20, &p, 0.2)?;
    let failures = par_cases(trees.len(), |case| {
        let t = &trees[case];
        let run = || -> Result<Option<String>> {
            let u = ultra_space(t, &p)?;
            let m = &u.space;
            if !is_ultrametric(m) {
                return Ok(Some("strong triangle inequality fails".into()));
            }
            for i in 0..m.len() {
                if path_distance(&u.paths[i], &u.paths[i]) != Dyadic::ZERO || m.d(i, i) != Dyadic::ZERO {
                    return Ok(Some(format!("path {i} is not at distance 0 from itself")));
                }
                for j in 0..m.len() {
                    if i != j && !m.d(i, j).is_power_of_two() {
                        return Ok(Some(format!("d({i},{j}) = {} is not a power of 2", m.d(i, j))));
                    }
                }
            }
            Ok(None)
        };
        match run() {
            Ok(None) => Vec::new(),
            Ok(Some(msg)) => vec![Failure::new(case, cfg.seed, msg).with_input("T.tree", write_normal_tree(t, Some(&p)))],
            Err(e) => err_failure(case, cfg.seed, e),
        }
    });
    Ok(Outcome::new(trees.len(), failures, vec![format!("{} trees at {p}", trees.len())]))
}

fn geodesic(cfg: &SuiteConfig) -> Result<Outcome> {
    let trees: Vec<FinStructure> = (1..=8).flat_map(free_trees).collect();
    let spaces: Vec<_> = trees.iter().map(geodesic_space).collect::<Result<_>>()?;
    let n = trees.len();
    let failures = par_cases(n * n, |case| {
        let (a, b) = (case / n, case % n);
        let emb: BTreeSet<Vec<usize>> = find_morphisms(&trees[a], &trees[b], MorphismKind::Embedding, None)
            .into_iter()
            .map(|m| m.map.values().map(|&v| v as usize).collect())
            .collect();
        let iso: BTreeSet<Vec<usize>> = all_isometric_embeddings(&spaces[a], &spaces[b], None).into_iter().collect();
        if emb == iso {
            Vec::new()
        } else {
            vec![Failure::new(case, cfg.seed, format!("{} embeddings but {} isometric embeddings", emb.len(), iso.len()))
                .with_input("A.struct", write_structure(&trees[a]))
                .with_input("B.struct", write_structure(&trees[b]))]
        }
    });
    Ok(Outcome::new(n * n, failures, vec![format!("{n} trees with at most 8 vertices")]))
}

fn monoid_laws(cfg: &SuiteConfig) -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut checked = 0usize;
    let mut fail = |detail: String| failures.push(Failure::new(failures.len(), cfg.seed, detail));
    let elems: BTreeMap<(usize, usize), Vec<MonoidElem>> =
        (1..=3).flat_map(|n| (n..=3).map(move |m| ((n, m), MonoidElem::all(n, m)))).collect();
    for n in 1..=3 {
        for x in GraphCode::all(n) {
            checked += 1;
            if act(&MonoidElem::identity(n), &x)? != x {
                fail(format!("identity moves {x:?}"));
            }
        }
    }
    for (&(n, m), gs) in &elems {
        for g in gs {
            if compose(&MonoidElem::identity(m), g)? != *g || compose(g, &MonoidElem::identity(n))? != *g {
                fail(format!("identity is not neutral for {g:?}"));
            }
        }
    }
    let law: Vec<(usize, Vec<String>)> = elems
        .par_iter()
        .flat_map_iter(|(&(n, m), gs)| gs.iter().map(move |g| (n, m, g)))
        .map(|(n, m, g)| {
            let mut count = 0;
            let mut bad = Vec::new();
            for k in m..=3 {
                for h in &elems[&(m, k)] {
                    let hg = match compose(h, g) {
                        Ok(hg) => hg,
                        Err(e) => {
                            bad.push(format!("compose failed: {e}"));
                            continue;
                        }
                    };
                    if MonoidElem::new(hg.p().clone(), hg.u().to_vec(), hg.v().clone()).is_err() {
                        bad.push(format!("composite of {g:?} and {h:?} breaks the invariants"));
                    }
                    for x in GraphCode::all(n) {
                        count += 1;
                        let lhs = act(h, &act(g, &x).expect("sizes match")).expect("sizes match");
                        if lhs != act(&hg, &x).expect("sizes match") {
                            bad.push(format!("action law fails for {g:?}, {h:?}, {x:?}"));
                        }
                    }
                    for l in k..=3 {
                        for e in &elems[&(k, l)] {
                            let left = compose(e, &hg).expect("sizes match");
                            let right = compose(&compose(e, h).expect("sizes match"), g).expect("sizes match");
                            if left != right {
                                bad.push("composition is not associative".to_string());
                            }
                        }
                    }
                }
            }
            (count, bad)
        })
        .collect();
    for (count, bad) in law {
        checked += count;
        bad.into_iter().for_each(&mut fail);
    }
    let nat = natural_action_triples(3);
    let nat_report = check_action_axioms(&nat, |x: &GraphCode| FinInjection::identity(x.size()), |g, h| h.then(g).ok());
    if !nat_report.holds() {
        fail(format!("natural action axioms: {nat_report:?}"));
    }
    let graph = monoid_action_triples(2);
    let graph_report = check_action_axioms(&graph, |x: &GraphCode| MonoidElem::identity(x.size()), |g, h| compose(g, h).ok());
    if !graph_report.holds() {
        fail(format!("graph-of-act axioms: {graph_report:?}"));
    }
    let codes: Vec<GraphCode> = (1..=4).flat_map(GraphCode::all).collect();
    let mismatches: Vec<String> = codes
        .par_iter()
        .flat_map_iter(|x| codes.iter().map(move |y| (x, y)))
        .filter_map(|(x, y)| {
            let related = x.size() <= y.size()
                && FinInjection::all(x.size(), y.size()).iter().any(|p| natural_action_holds(p, x, y));
            let embeds = !find_morphisms(&x.to_structure(), &y.to_structure(), MorphismKind::Embedding, Some(1)).is_empty();
            (related != embeds).then(|| format!("{x:?} vs {y:?}: action says {related}, search says {embeds}"))
        })
        .collect();
    mismatches.into_iter().for_each(&mut fail);
    let notes = vec![
        format!("{checked} action-law triples"),
        format!("natural action: {} triples, {} composition checks", nat_report.triples, nat_report.composition_checks),
        format!("graph of act: {} triples, {} composition checks", graph_report.triples, graph_report.composition_checks),
        format!("{} code pairs compared with embeddability", codes.len() * codes.len()),
    ];
    if checked < 500 {
        fail(format!("only {checked} triples checked"));
    }
    Ok(Outcome::new(checked, failures, notes))
}

/// Lifts a vertex permutation of `x` to `T_x → T_y`, sending `Seq(s)` to
/// `Seq(σ∘s)` and each leaf to the leaf below the image of its parent.
fn lift_to_fs(sigma: &[u64], gx: &GadgetBuild, gy: &GadgetBuild) -> Option<BTreeMap<u64, u64>> {
    let adj_x = gx.structure.adjacency();
    let adj_y = gy.structure.adjacency();
    let mut map = BTreeMap::new();
    for (&c, v) in &gx.vertices {
        if let GadgetVertex::Seq(s) = v {
            let image = FinSeq::new(s.items().iter().map(|&i| sigma[i as usize]).collect());
            map.insert(c, gy.seq_code_of(&image)?);
        }
    }
    for (&c, v) in &gx.vertices {
        if let GadgetVertex::Leaf(_) = v {
            let parent = adj_x[&c][0];
            let target = adj_y[&map[&parent]]
                .iter()
                .copied()
                .find(|w| matches!(gy.vertex(*w), Some(GadgetVertex::Leaf(_))))?;
            map.insert(c, target);
        }
    }
    Some(map)
}

fn friedman_stanley(cfg: &SuiteConfig) -> Result<Outcome> {
    let p = cfg.params(2, 1, 0)?;
    let limit = cfg.limit.unwrap_or(16);
    let graphs: Vec<GraphCode> = (1..=4).flat_map(GraphCode::all).collect();
    let builds: Vec<GadgetBuild> = graphs.par_iter().map(|x| build_gx(&x.to_structure(), &p)).collect::<Result<_>>()?;
    let index: BTreeMap<&GraphCode, usize> = graphs.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let mut failures = par_cases(graphs.len(), |case| {
        let (x, gx) = (&graphs[case], &builds[case]);
        let mut out = Vec::new();
        if !gx.structure.order_is_equivalence() {
            out.push(Failure::new(case, cfg.seed, "the order of G_x is not an equivalence"));
        }
        for sigma in FinInjection::all(x.size(), x.size()) {
            let mut y = GraphCode::empty(x.size());
            for (a, b) in x.edges() {
                y.set(sigma.images()[a] as usize, sigma.images()[b] as usize, true).expect("in range");
            }
            let gy = &builds[index[&y]];
            let ok = lift_to_fs(sigma.images(), gx, gy)
                .map(|m| is_morphism(&m, &gx.structure, &gy.structure, MorphismKind::Isomorphism).unwrap_or(false))
                .unwrap_or(false);
            if !ok {
                out.push(Failure::new(case, cfg.seed, format!("lift of {:?} is not an isomorphism", sigma.images())));
            }
        }
        out
    });
    let n = graphs.len();
    let same_size: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| graphs[i].size() == graphs[j].size()).collect();
    let found: Vec<(usize, Vec<Failure>)> = same_size
        .par_iter()
        .enumerate()
        .map(|(case, &(i, j))| {
            let (gx, gy) = (&builds[i], &builds[j]);
            let isos = find_morphisms(&gx.structure, &gy.structure, MorphismKind::Isomorphism, Some(limit));
            let bad = isos.iter().any(|m| {
                m.map.iter().any(|(a, b)| match (gx.vertex(*a), gy.vertex(*b)) {
                    (Some(GadgetVertex::Seq(s)), Some(GadgetVertex::Seq(t))) => s.len() != t.len(),
                    (Some(GadgetVertex::Seq(_)), _) => true,
                    _ => false,
                })
            });
            let failures = if bad {
                vec![Failure::new(n + case, cfg.seed, format!("an isomorphism between graphs {i} and {j} breaks sequence length"))]
            } else {
                Vec::new()
            };
            (isos.len(), failures)
        })
        .collect();
    let total: usize = found.iter().map(|f| f.0).sum();
    failures.extend(found.into_iter().flat_map(|f| f.1));
    failures.sort_by_key(|f| f.case);
    let notes = vec![
        format!("{n} graphs on 1..=4 vertices at depth {}", p.depth),
        format!("{} same-size pairs searched, {total} isomorphisms inspected (limit {limit} per pair)", same_size.len()),
    ];
    Ok(Outcome::new(n + same_size.len(), failures, notes))
}

/// A random element of `H` restricted to the domain of a coded build:
/// for each sequence, a permutation of its rays.
fn sample_h<R: Rng>(r: &mut R, build: &GadgetBuild) -> Permutation {
    let mut rays: BTreeMap<&FinSeq, BTreeSet<u64>> = BTreeMap::new();
    for v in build.vertices.values() {
        if let GadgetVertex::Branch { s, i, .. } = v {
            rays.entry(s).or_default().insert(*i);
        }
    }
    let shuffles: BTreeMap<&FinSeq, BTreeMap<u64, u64>> = rays
        .into_iter()
        .map(|(s, is)| {
            let src: Vec<u64> = is.into_iter().collect();
            let mut dst = src.clone();
            dst.shuffle(r);
            (s, src.into_iter().zip(dst).collect())
        })
        .collect();
    let map = build
        .vertices
        .iter()
        .map(|(&c, v)| match v {
            GadgetVertex::Branch { s, i, k } => {
                let image = GadgetVertex::Branch { s: s.clone(), i: shuffles[s][i], k: *k };
                (c, build.code_of(&image).expect("rays are complete"))
            }
            _ => (c, c),
        })
        .collect();
    Permutation::new(map).expect("ray shuffles are bijective")
}

fn h_characterization(cfg: &SuiteConfig) -> Result<Outcome> {
    let p = cfg.params(1, 2, 1)?;
    let samples = 25;
    let trees = tree_corpus(cfg.seed, 5, &p, 0.5)?;
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for (case, t) in trees.iter().enumerate() {
        let build = encode_gprime(t, &p)?;
        let g = &build.structure;
        let ctx = SubgroupContext::Codes(g.domain());
        let fail = |detail: String| {
            Failure::new(case, cfg.seed, detail).with_input("T.tree", write_normal_tree(t, Some(&p)))
        };
        let mut r = rng(cfg.case_seed(case));
        for _ in 0..samples {
            let perm = sample_h(&mut r, &build);
            if !in_subgroup(&perm, Subgroup::H, ctx)? {
                failures.push(fail("a sampled ray shuffle is outside H".into()));
            } else if relabel(&perm, g)? != *g {
                failures.push(fail("a sampled element of H is not an automorphism".into()));
            }
        }
        let expected = p
            .universe()
            .iter()
            .try_fold(1usize, |acc, s| {
                let c = crate::seqs::seq_code(s).ok()? as usize;
                (1..=c + 3).try_fold(acc, |a, k| a.checked_mul(k))
            });
        let cap = cfg.limit.unwrap_or(200_000);
        let autos = find_morphisms(g, g, MorphismKind::Isomorphism, Some(cap));
        let outside = autos
            .par_iter()
            .filter(|m| {
                Permutation::new(m.map.clone())
                    .and_then(|perm| in_subgroup(&perm, Subgroup::H, ctx))
                    .map_or(true, |inside| !inside)
            })
            .count();
        if outside > 0 {
            failures.push(fail(format!("{outside} of {} automorphisms lie outside H", autos.len())));
        }
        match expected {
            Some(e) if e < cap => {
                notes.push(format!("tree {case}: {} vertices, {} automorphisms, {e} ray shuffles", g.vertex_count(), autos.len()));
                if autos.len() != e {
                    failures.push(fail(format!("{} automorphisms but {e} ray shuffles", autos.len())));
                }
            }
            _ => notes.push(format!(
                "tree {case}: {} vertices, first {} automorphisms inspected (too many ray shuffles to list)",
                g.vertex_count(),
                autos.len()
            )),
        }
    }
    Ok(Outcome::new(trees.len() * (samples + 1), failures, notes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suite("nope", &SuiteConfig::default()).is_err());
    }

    #[test]
    fn every_normal_tree_at_depth_one() {
        let p = TruncationParams::new(1, 1, 0).unwrap();
        // ∅, the root, and the root with either or both children.
        assert_eq!(all_normal_trees(&p).unwrap().len(), 5);
    }

    #[test]
    fn report_rendering_is_deterministic() {
        let a = run_suite("slice-injectivity", &SuiteConfig::with_seed(3)).unwrap();
        let b = run_suite("slice-injectivity", &SuiteConfig::with_seed(3)).unwrap();
        assert_eq!(a.render(), b.render());
        assert!(a.passed(), "{}", a.render());
    }
}
