//! Text formats for every value that crosses the command line. Blank lines
//! and lines starting with `#` are ignored everywhere; each writer emits
//! text its parser reads back to an equal value.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::metrics::{Dyadic, FinMetricSpace};
use crate::monoid::{GraphCode, MonoidElem};
use crate::morphisms::{Morphism, MorphismKind};
use crate::seqs::FinSeq;
use crate::structures::{FinInjection, FinStructure, Permutation};
use crate::trees::{LipschitzMap, NormalTree, QoTree, TruncationParams, WitnessMode};
use crate::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Content lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn num<T: std::str::FromStr>(line: usize, field: &str) -> Result<T> {
    field.parse().map_err(|_| parse_err(line, format!("expected a number, found `{field}`")))
}

/// Splits off a `!header` line, returning its fields and the rest.
fn header<'a>(text: &'a str, name: &str) -> Result<(usize, Vec<&'a str>, Vec<(usize, &'a str)>)> {
    let mut lines = content_lines(text);
    let (line, head) = lines.next().ok_or_else(|| parse_err(1, format!("missing `!{name}` header")))?;
    let mut fields = head.split_whitespace();
    if fields.next() != Some(&format!("!{name}")[..]) {
        return Err(parse_err(line, format!("expected `!{name}` header")));
    }
    Ok((line, fields.collect(), lines.collect()))
}

fn arrow(line: usize, text: &str) -> Result<(u64, u64)> {
    let (a, b) = text.split_once("->").ok_or_else(|| parse_err(line, "expected `i -> j`"))?;
    Ok((num(line, a.trim())?, num(line, b.trim())?))
}

fn parse_bits(line: usize, text: &str) -> Result<FinSeq> {
    if text == "-" {
        return Ok(FinSeq::empty());
    }
    FinSeq::from_bit_string(text).map_err(|_| parse_err(line, format!("bad binary sequence `{text}`")))
}

fn parse_naturals(line: usize, text: &str) -> Result<FinSeq> {
    let text = text.trim();
    if text == "-" || text == "[]" {
        return Ok(FinSeq::empty());
    }
    let inner = text.strip_prefix('[').and_then(|t| t.strip_suffix(']')).unwrap_or(text);
    inner.split(',').map(|f| num(line, f.trim())).collect::<Result<Vec<u64>>>().map(FinSeq::from)
}

fn render_bits(s: &FinSeq) -> String {
    if s.is_empty() {
        "-".into()
    } else {
        s.to_bit_string()
    }
}

fn render_naturals(s: &FinSeq) -> String {
    if s.is_empty() {
        "-".into()
    } else {
        s.items().iter().map(u64::to_string).collect::<Vec<_>>().join(",")
    }
}

/// A tree file holds either kind of tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeFile {
    Normal(NormalTree),
    Qo(QoTree),
}

/// Parses `u|s` or `u|v|s` lines after an optional `!bounds` header. A file
/// with no node lines reads as the empty normal tree. Nodes are checked
/// against the header bounds when there is one.
pub fn parse_tree(text: &str) -> Result<(Option<TruncationParams>, TreeFile)> {
    let mut bounds = None;
    let mut normal = NormalTree::new();
    let mut qo = QoTree::new();
    let mut arity = None;
    for (line, l) in content_lines(text) {
        if let Some(rest) = l.strip_prefix("!bounds") {
            if bounds.is_some() {
                return Err(parse_err(line, "repeated `!bounds`"));
            }
            bounds = Some(rest.parse::<TruncationParams>().map_err(|e| parse_err(line, e.to_string()))?);
            continue;
        }
        let fields: Vec<&str> = l.split('|').map(str::trim).collect();
        if *arity.get_or_insert(fields.len()) != fields.len() {
            return Err(parse_err(line, "mixed `u|s` and `u|v|s` lines"));
        }
        match fields[..] {
            [u, s] => {
                normal.insert(parse_bits(line, u)?, parse_naturals(line, s)?);
            }
            [u, v, s] => {
                qo.insert(parse_bits(line, u)?, parse_bits(line, v)?, parse_naturals(line, s)?);
            }
            _ => return Err(parse_err(line, "expected `u|s` or `u|v|s`")),
        }
    }
    let tree = if arity == Some(3) { TreeFile::Qo(qo) } else { TreeFile::Normal(normal) };
    if let Some(p) = &bounds {
        match &tree {
            TreeFile::Normal(t) => t.check_bounds(p)?,
            TreeFile::Qo(t) => t.check_bounds(p)?,
        }
    }
    Ok((bounds, tree))
}

pub fn parse_normal_tree(text: &str) -> Result<(Option<TruncationParams>, NormalTree)> {
    match parse_tree(text)? {
        (p, TreeFile::Normal(t)) => Ok((p, t)),
        _ => Err(parse_err(1, "expected a normal tree (`u|s` lines)")),
    }
}

pub fn parse_qo_tree(text: &str) -> Result<(Option<TruncationParams>, QoTree)> {
    match parse_tree(text)? {
        (p, TreeFile::Qo(t)) => Ok((p, t)),
        (p, TreeFile::Normal(t)) if t.is_empty() => Ok((p, QoTree::new())),
        _ => Err(parse_err(1, "expected a quasi-order tree (`u|v|s` lines)")),
    }
}

fn bounds_line(out: &mut String, p: Option<&TruncationParams>) {
    if let Some(p) = p {
        writeln!(out, "!bounds {p}").unwrap();
    }
}

pub fn write_normal_tree(t: &NormalTree, p: Option<&TruncationParams>) -> String {
    let mut out = String::new();
    bounds_line(&mut out, p);
    for (u, s) in t.iter() {
        writeln!(out, "{}|{}", render_bits(u), render_naturals(s)).unwrap();
    }
    out
}

pub fn write_qo_tree(t: &QoTree, p: Option<&TruncationParams>) -> String {
    let mut out = String::new();
    bounds_line(&mut out, p);
    for (u, v, s) in t.iter() {
        writeln!(out, "{}|{}|{}", render_bits(u), render_bits(v), render_naturals(s)).unwrap();
    }
    out
}

/// `!structure`, optional `!root c`, then `v c`, `e a b`, `o a b` and
/// `l c label` lines.
pub fn parse_structure(text: &str) -> Result<FinStructure> {
    let (_, fields, lines) = header(text, "structure")?;
    if !fields.is_empty() {
        return Err(parse_err(1, "`!structure` takes no arguments"));
    }
    let mut g = FinStructure::new();
    let mut root = None;
    let mut deferred = Vec::new();
    for (line, l) in lines {
        let (tag, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        let args: Vec<&str> = rest.split_whitespace().collect();
        match (tag, args.len()) {
            ("!root", 1) => root = Some((line, num::<u64>(line, args[0])?)),
            ("v", 1) => {
                g.add_vertex(num(line, args[0])?);
            }
            ("e" | "o", 2) => deferred.push((line, tag, num::<u64>(line, args[0])?, num::<u64>(line, args[1])?)),
            ("l", n) if n >= 1 => {
                let code = num::<u64>(line, args[0])?;
                let label = rest.trim_start()[args[0].len()..].trim().to_string();
                g.add_vertex(code);
                g.set_label(code, label).map_err(|e| parse_err(line, e.to_string()))?;
            }
            _ => return Err(parse_err(line, format!("unrecognised line `{l}`"))),
        }
    }
    for (line, tag, a, b) in deferred {
        let res = match tag {
            "e" => g.add_edge(a, b).map(|_| ()),
            "o" => g.add_order(a, b).map(|_| ()),
            _ => Ok(()),
        };
        res.map_err(|e| parse_err(line, e.to_string()))?;
    }
    if let Some((line, r)) = root {
        g.set_root(Some(r)).map_err(|e| parse_err(line, e.to_string()))?;
    }
    Ok(g)
}

pub fn write_structure(g: &FinStructure) -> String {
    let mut out = String::from("!structure\n");
    if let Some(r) = g.root() {
        writeln!(out, "!root {r}").unwrap();
    }
    for v in g.domain() {
        writeln!(out, "v {v}").unwrap();
    }
    for (a, b) in g.edges() {
        writeln!(out, "e {a} {b}").unwrap();
    }
    for (a, b) in g.order() {
        writeln!(out, "o {a} {b}").unwrap();
    }
    for (v, label) in g.labels() {
        writeln!(out, "l {v} {label}").unwrap();
    }
    out
}

fn arrow_lines(lines: &[(usize, &str)], expected: Option<usize>) -> Result<BTreeMap<u64, u64>> {
    let mut map = BTreeMap::new();
    for &(line, l) in lines {
        let (a, b) = arrow(line, l)?;
        if map.insert(a, b).is_some() {
            return Err(parse_err(line, format!("{a} is mapped twice")));
        }
    }
    if let Some(n) = expected {
        if map.len() != n {
            return Err(parse_err(1, format!("expected {n} mapping lines, found {}", map.len())));
        }
    }
    Ok(map)
}

/// `!perm n` then `n` lines `i -> j`.
pub fn parse_permutation(text: &str) -> Result<Permutation> {
    let (line, fields, lines) = header(text, "perm")?;
    let [n] = fields[..] else { return Err(parse_err(line, "expected `!perm n`")) };
    let map = arrow_lines(&lines, Some(num(line, n)?))?;
    Permutation::new(map).map_err(|e| parse_err(line, e.to_string()))
}

pub fn write_permutation(p: &Permutation) -> String {
    let mut out = format!("!perm {}\n", p.map().len());
    for (a, b) in p.map() {
        writeln!(out, "{a} -> {b}").unwrap();
    }
    out
}

/// `!inj n m` then lines `i -> j` for every `i < n`.
pub fn parse_injection(text: &str) -> Result<FinInjection> {
    let (line, fields, lines) = header(text, "inj")?;
    let [n, m] = fields[..] else { return Err(parse_err(line, "expected `!inj n m`")) };
    let (n, m): (usize, usize) = (num(line, n)?, num(line, m)?);
    injection_body(line, &lines, n, m)
}

fn injection_body(line: usize, lines: &[(usize, &str)], n: usize, m: usize) -> Result<FinInjection> {
    let map = arrow_lines(lines, Some(n))?;
    if map.keys().copied().ne(0..n as u64) {
        return Err(parse_err(line, format!("injection must map exactly 0..{n}")));
    }
    FinInjection::new(map.into_values().collect(), m).map_err(|e| parse_err(line, e.to_string()))
}

fn injection_lines(out: &mut String, p: &FinInjection) {
    for (i, j) in p.images().iter().enumerate() {
        writeln!(out, "{i} -> {j}").unwrap();
    }
}

pub fn write_injection(p: &FinInjection) -> String {
    let mut out = format!("!inj {} {}\n", p.domain_size(), p.codomain_size());
    injection_lines(&mut out, p);
    out
}

/// `!morphism kind` then lines `i -> j`.
pub fn parse_morphism(text: &str) -> Result<Morphism> {
    let (line, fields, lines) = header(text, "morphism")?;
    let [kind] = fields[..] else { return Err(parse_err(line, "expected `!morphism kind`")) };
    let kind: MorphismKind = kind.parse().map_err(|e: Error| parse_err(line, e.to_string()))?;
    Ok(Morphism { kind, map: arrow_lines(&lines, None)? })
}

pub fn write_morphism(m: &Morphism) -> String {
    let mut out = format!("!morphism {}\n", m.kind);
    for (a, b) in &m.map {
        writeln!(out, "{a} -> {b}").unwrap();
    }
    out
}

/// `!metric n`, optional `p i name` lines, then `i j num exp` for every
/// pair `i < j`. Unnamed points are named by their index.
pub fn parse_metric(text: &str) -> Result<FinMetricSpace> {
    let (line, fields, lines) = header(text, "metric")?;
    let [n] = fields[..] else { return Err(parse_err(line, "expected `!metric n`")) };
    let n: usize = num(line, n)?;
    let mut names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let mut dist = vec![vec![None; n]; n];
    for i in 0..n {
        dist[i][i] = Some(Dyadic::ZERO);
    }
    for (line, l) in lines {
        let parts: Vec<&str> = l.split_whitespace().collect();
        match parts[..] {
            ["p", i, ..] => {
                let i: usize = num(line, i)?;
                if i >= n {
                    return Err(parse_err(line, format!("point {i} out of range")));
                }
                names[i] = l[1..].trim_start()[parts[1].len()..].trim().to_string();
            }
            [i, j, a, e] => {
                let (i, j): (usize, usize) = (num(line, i)?, num(line, j)?);
                if i >= n || j >= n || i == j {
                    return Err(parse_err(line, format!("bad pair ({i},{j})")));
                }
                let d = Dyadic::new(num(line, a)?, num(line, e)?);
                for (x, y) in [(i, j), (j, i)] {
                    if dist[x][y].replace(d).is_some_and(|old| old != d) {
                        return Err(parse_err(line, format!("conflicting distances for ({i},{j})")));
                    }
                }
            }
            _ => return Err(parse_err(line, "expected `i j num exp`")),
        }
    }
    let dist = dist
        .into_iter()
        .map(|row| row.into_iter().collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| parse_err(line, "some distances are missing"))?;
    FinMetricSpace::new(names, dist).map_err(|e| parse_err(line, e.to_string()))
}

pub fn write_metric(m: &FinMetricSpace) -> String {
    let mut out = format!("!metric {}\n", m.len());
    for (i, name) in m.points().iter().enumerate() {
        if *name != i.to_string() {
            writeln!(out, "p {i} {name}").unwrap();
        }
    }
    for i in 0..m.len() {
        for j in i + 1..m.len() {
            let d = m.d(i, j);
            writeln!(out, "{i} {j} {} {}", d.num(), d.exp()).unwrap();
        }
    }
    out
}

/// `!gcode n` then `n-1` bit rows; row `i` lists `j = i+1..n`.
pub fn parse_gcode(text: &str) -> Result<GraphCode> {
    let (line, fields, lines) = header(text, "gcode")?;
    let [n] = fields[..] else { return Err(parse_err(line, "expected `!gcode n`")) };
    gcode_body(line, num(line, n)?, &lines)
}

fn gcode_body(line: usize, n: usize, rows: &[(usize, &str)]) -> Result<GraphCode> {
    if rows.len() != n.saturating_sub(1) {
        return Err(parse_err(line, format!("expected {} rows, found {}", n.saturating_sub(1), rows.len())));
    }
    let mut g = GraphCode::empty(n);
    for (i, &(line, row)) in rows.iter().enumerate() {
        if row.len() != n - 1 - i {
            return Err(parse_err(line, format!("row {i} needs {} bits", n - 1 - i)));
        }
        for (k, c) in row.chars().enumerate() {
            match c {
                '0' => {}
                '1' => g.set(i, i + 1 + k, true).map_err(|e| parse_err(line, e.to_string()))?,
                _ => return Err(parse_err(line, format!("bad bit `{c}`"))),
            }
        }
    }
    Ok(g)
}

fn gcode_block(out: &mut String, g: &GraphCode) {
    let n = g.size();
    writeln!(out, "!gcode {n}").unwrap();
    for i in 0..n.saturating_sub(1) {
        let row: String = (i + 1..n).map(|j| if g.get(i, j) { '1' } else { '0' }).collect();
        writeln!(out, "{row}").unwrap();
    }
}

pub fn write_gcode(g: &GraphCode) -> String {
    let mut out = String::new();
    gcode_block(&mut out, g);
    out
}

/// `!melem n m`, `n` injection lines, the `u` bit line, then a `!gcode m`
/// block for `v`.
pub fn parse_melem(text: &str) -> Result<MonoidElem> {
    let (line, fields, lines) = header(text, "melem")?;
    let [n, m] = fields[..] else { return Err(parse_err(line, "expected `!melem n m`")) };
    let (n, m): (usize, usize) = (num(line, n)?, num(line, m)?);
    if lines.len() < n + 2 {
        return Err(parse_err(line, "truncated `!melem` block"));
    }
    let p = injection_body(line, &lines[..n], n, m)?;
    let (uline, ubits) = lines[n];
    let u = ubits
        .trim_matches('-')
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(parse_err(uline, format!("bad bit `{c}`"))),
        })
        .collect::<Result<Vec<bool>>>()?;
    let (gline, ghead) = lines[n + 1];
    if ghead.split_whitespace().collect::<Vec<_>>() != ["!gcode", &m.to_string()] {
        return Err(parse_err(gline, format!("expected `!gcode {m}`")));
    }
    let v = gcode_body(gline, m, &lines[n + 2..])?;
    MonoidElem::new(p, u, v).map_err(|e| parse_err(line, e.to_string()))
}

pub fn write_melem(g: &MonoidElem) -> String {
    let mut out = format!("!melem {} {}\n", g.source(), g.target());
    injection_lines(&mut out, g.p());
    let u: String = g.u().iter().map(|&b| if b { '1' } else { '0' }).collect();
    writeln!(out, "{}", if u.is_empty() { "-" } else { &u }).unwrap();
    gcode_block(&mut out, g.v());
    out
}

/// `!witness mode` then lines `[s] -> [f(s)]`.
pub fn parse_witness(text: &str) -> Result<(WitnessMode, LipschitzMap)> {
    let (line, fields, lines) = header(text, "witness")?;
    let [mode] = fields[..] else { return Err(parse_err(line, "expected `!witness mode`")) };
    let mode: WitnessMode = mode.parse().map_err(|e: Error| parse_err(line, e.to_string()))?;
    let mut f = LipschitzMap::default();
    for (line, l) in lines {
        let (a, b) = l.split_once("->").ok_or_else(|| parse_err(line, "expected `[s] -> [t]`"))?;
        let s: FinSeq = a.trim().parse().map_err(|_| parse_err(line, format!("bad sequence `{}`", a.trim())))?;
        let t: FinSeq = b.trim().parse().map_err(|_| parse_err(line, format!("bad sequence `{}`", b.trim())))?;
        if f.assignments.insert(s, t).is_some() {
            return Err(parse_err(line, "sequence mapped twice"));
        }
    }
    Ok((mode, f))
}

pub fn write_witness(mode: WitnessMode, f: &LipschitzMap) -> String {
    let mut out = format!("!witness {mode}\n");
    for (s, t) in &f.assignments {
        writeln!(out, "{s} -> {t}").unwrap();
    }
    out
}
