use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use biembed::corpus::{random_graph, random_normal_tree, random_permutation, random_qo_tree, rng};
use biembed::gadgets::{
    build_fs_tree, build_g0, build_gprime, build_gt, build_gx, build_ordered_gt, build_strict_gt, encode_gprime, to_dot,
    GadgetBuild,
};
use biembed::io::{
    parse_gcode, parse_melem, parse_metric, parse_morphism, parse_normal_tree, parse_structure, parse_witness, write_gcode,
    write_injection, write_melem, write_metric, write_morphism, write_normal_tree, write_permutation, write_qo_tree,
    write_structure, write_witness,
};
use biembed::metrics::{find_isometric_embedding, geodesic_space, is_ultrametric, ultra_space};
use biembed::monoid::{act, check_action_axioms, compose, monoid_action_triples, natural_action_triples, GraphCode, MonoidElem};
use biembed::morphisms::{find_morphisms, is_morphism, MorphismKind};
use biembed::structures::{FinInjection, FinStructure};
use biembed::suites::{run_suite, SuiteConfig, SUITES};
use biembed::trees::{find_leqmax_witness, verify_witness, NormalTree, TruncationParams, WitnessMode};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Tree gadgets, morphism search, metrics and monoid actions at finite
/// truncations.
///
/// Exit status: 0 on success, 1 when nothing is found or a property fails,
/// 2 on malformed input or bound violations.
#[derive(Parser)]
#[command(name = "biembed", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Maximum sequence length. Overrides a `!bounds` header.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Entries range over `0..branch`.
    #[arg(long, global = true)]
    branch: Option<u64>,
    /// Extra gadget vertices kept past each branch point.
    #[arg(long, global = true)]
    tail: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Primary input file.
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Stop searches after this many results.
    #[arg(long, global = true)]
    limit: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Seeded random inputs.
    Gen {
        #[arg(value_enum)]
        what: GenKind,
        /// Inclusion probability per full-depth tree node or graph edge.
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        /// Vertex count for graphs and permutations.
        #[arg(long, default_value_t = 5)]
        vertices: u64,
    },
    /// Build a structure from a tree file (or a graph for fs-tree and gx).
    Build {
        #[arg(value_enum)]
        what: BuildKind,
    },
    /// Search for or verify a morphism, witness or `≤_max` relation.
    Check {
        #[arg(value_enum)]
        what: CheckKind,
        /// Second input file.
        #[arg(long)]
        in2: Option<PathBuf>,
        /// Witness mode for `leqmax`.
        #[arg(long, default_value = "plain")]
        mode: String,
        /// Verify this morphism (or witness, for `witness`) instead of searching.
        #[arg(long)]
        candidate: Option<PathBuf>,
    },
    /// Metric-space constructions and checks.
    Metric {
        #[arg(value_enum)]
        what: MetricKind,
        #[arg(long)]
        in2: Option<PathBuf>,
    },
    /// Monoid action on graph codes.
    Monoid {
        #[arg(value_enum)]
        what: MonoidKind,
        #[arg(long)]
        in2: Option<PathBuf>,
        /// Largest code size for `axioms`.
        #[arg(long, default_value_t = 3)]
        max: usize,
    },
    /// Run a property suite by name, or `all`.
    Suite { name: String },
    /// Graphviz export of a structure file.
    Export {
        #[arg(value_enum)]
        what: ExportKind,
        /// Draw the order relation as dashed arrows.
        #[arg(long)]
        order: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Tree,
    Qotree,
    Graph,
    Perm,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuildKind {
    G0,
    Gt,
    OrderedGt,
    StrictGt,
    Gprime,
    CodedGprime,
    FsTree,
    Gx,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Embed,
    Iso,
    Homo,
    WeakHomo,
    Leqmax,
    Witness,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricKind {
    Geodesic,
    Ultra,
    Isoembed,
    VerifyUltra,
}

#[derive(Clone, Copy, ValueEnum)]
enum MonoidKind {
    Act,
    Compose,
    Axioms,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportKind {
    Dot,
}

/// Anything that maps to exit status 2.
struct Malformed(String);

impl<E: std::fmt::Display> From<E> for Malformed {
    fn from(e: E) -> Self {
        Malformed(e.to_string())
    }
}

type CliResult = Result<bool, Malformed>;

struct Ctx {
    global: Global,
}

impl Ctx {
    fn read(&self, path: Option<&Path>, what: &str) -> Result<String, Malformed> {
        let path = path.ok_or_else(|| Malformed(format!("missing {what} input file")))?;
        fs::read_to_string(path).map_err(|e| Malformed(format!("{}: {e}", path.display())))
    }

    fn input(&self) -> Result<String, Malformed> {
        self.read(self.global.input.as_deref(), "--in")
    }

    /// Flags win over a file header; missing values fall back to
    /// depth 1, branch 2, tail 1.
    fn params(&self, header: Option<TruncationParams>) -> Result<TruncationParams, Malformed> {
        let g = &self.global;
        let base = header.unwrap_or(TruncationParams { depth: 1, branch: 2, tail: 1 });
        Ok(TruncationParams::new(
            g.depth.unwrap_or(base.depth),
            g.branch.unwrap_or(base.branch),
            g.tail.unwrap_or(base.tail),
        )?)
    }

    fn tree(&self, path: Option<&Path>, what: &str) -> Result<(NormalTree, TruncationParams), Malformed> {
        let (header, t) = parse_normal_tree(&self.read(path, what)?)?;
        let p = self.params(header)?;
        t.check_bounds(&p)?;
        Ok((t, p))
    }

    fn emit(&self, text: &str) -> Result<(), Malformed> {
        match &self.global.out {
            Some(path) => fs::write(path, text).map_err(|e| Malformed(format!("{}: {e}", path.display()))),
            None => {
                io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn gen(ctx: &Ctx, what: GenKind, density: f64, vertices: u64) -> CliResult {
    if !(0.0..=1.0).contains(&density) {
        return Err(Malformed(format!("density {density} outside [0, 1]")));
    }
    let mut r = rng(ctx.global.seed);
    let text = match what {
        GenKind::Tree => {
            let p = ctx.params(None)?;
            write_normal_tree(&random_normal_tree(&mut r, &p, density)?, Some(&p))
        }
        GenKind::Qotree => {
            let p = ctx.params(None)?;
            write_qo_tree(&random_qo_tree(&mut r, &p, density), Some(&p))
        }
        GenKind::Graph => write_structure(&random_graph(&mut r, vertices, density)),
        GenKind::Perm => {
            let domain = match &ctx.global.input {
                Some(_) => parse_structure(&ctx.input()?)?.domain().clone(),
                None => (0..vertices).collect(),
            };
            write_permutation(&random_permutation(&mut r, &domain))
        }
    };
    ctx.emit(&text)?;
    Ok(true)
}

fn build(ctx: &Ctx, what: BuildKind) -> CliResult {
    let built: GadgetBuild = match what {
        BuildKind::FsTree | BuildKind::Gx => {
            let x = parse_structure(&ctx.input()?)?;
            let p = ctx.params(None)?;
            if matches!(what, BuildKind::FsTree) {
                build_fs_tree(&x, &p)?
            } else {
                build_gx(&x, &p)?
            }
        }
        BuildKind::G0 => build_g0(&ctx.params(None)?)?,
        _ => {
            let (t, p) = match &ctx.global.input {
                Some(path) => ctx.tree(Some(path), "--in")?,
                None => (NormalTree::new(), ctx.params(None)?),
            };
            match what {
                BuildKind::Gt => build_gt(&t, &p)?,
                BuildKind::OrderedGt => build_ordered_gt(&t, &p)?,
                BuildKind::StrictGt => build_strict_gt(&t, &p)?,
                BuildKind::Gprime => build_gprime(&t, &p)?,
                _ => encode_gprime(&t, &p)?,
            }
        }
    };
    ctx.emit(&write_structure(&built.structure))?;
    Ok(true)
}

fn check(ctx: &Ctx, what: CheckKind, in2: Option<&Path>, mode: &str, candidate: Option<&Path>) -> CliResult {
    let kind = match what {
        CheckKind::Embed => MorphismKind::Embedding,
        CheckKind::Iso => MorphismKind::Isomorphism,
        CheckKind::Homo => MorphismKind::Homomorphism,
        CheckKind::WeakHomo => MorphismKind::WeakHomomorphism,
        CheckKind::Leqmax => {
            let mode: WitnessMode = mode.parse()?;
            let (s, p) = ctx.tree(ctx.global.input.as_deref(), "--in")?;
            let (t, _) = ctx.tree(in2, "--in2")?;
            return Ok(match find_leqmax_witness(&s, &t, mode, &p) {
                Some(f) => {
                    ctx.emit(&write_witness(mode, &f))?;
                    true
                }
                None => false,
            });
        }
        CheckKind::Witness => {
            let (s, p) = ctx.tree(ctx.global.input.as_deref(), "--in")?;
            let (t, _) = ctx.tree(in2, "--in2")?;
            let (mode, f) = parse_witness(&ctx.read(candidate, "--candidate")?)?;
            let ok = verify_witness(&f, &s, &t, mode, &p);
            ctx.emit(if ok { "witness verified\n" } else { "witness rejected\n" })?;
            return Ok(ok);
        }
    };
    let a = parse_structure(&ctx.input()?)?;
    let b = parse_structure(&ctx.read(in2, "--in2")?)?;
    if let Some(path) = candidate {
        let m = parse_morphism(&ctx.read(Some(path), "--candidate")?)?;
        let ok = is_morphism(&m.map, &a, &b, kind)?;
        ctx.emit(if ok { "morphism verified\n" } else { "morphism rejected\n" })?;
        return Ok(ok);
    }
    let found = find_morphisms(&a, &b, kind, Some(ctx.global.limit.unwrap_or(1)));
    let text: String = found.iter().map(write_morphism).collect::<Vec<_>>().join("\n");
    ctx.emit(&text)?;
    Ok(!found.is_empty())
}

fn metric(ctx: &Ctx, what: MetricKind, in2: Option<&Path>) -> CliResult {
    match what {
        MetricKind::Geodesic => {
            let g = parse_structure(&ctx.input()?)?;
            ctx.emit(&write_metric(&geodesic_space(&g)?))?;
            Ok(true)
        }
        MetricKind::Ultra => {
            let (t, p) = ctx.tree(ctx.global.input.as_deref(), "--in")?;
            ctx.emit(&write_metric(&ultra_space(&t, &p)?.space))?;
            Ok(true)
        }
        MetricKind::Isoembed => {
            let m = parse_metric(&ctx.input()?)?;
            let n = parse_metric(&ctx.read(in2, "--in2")?)?;
            match find_isometric_embedding(&m, &n) {
                Some(map) => {
                    let inj = FinInjection::new(map.into_iter().map(|j| j as u64).collect(), n.len())?;
                    ctx.emit(&write_injection(&inj))?;
                    Ok(true)
                }
                None => Ok(false),
            }
        }
        MetricKind::VerifyUltra => {
            let ok = is_ultrametric(&parse_metric(&ctx.input()?)?);
            ctx.emit(if ok { "ultrametric\n" } else { "not ultrametric\n" })?;
            Ok(ok)
        }
    }
}

fn monoid(ctx: &Ctx, what: MonoidKind, in2: Option<&Path>, max: usize) -> CliResult {
    match what {
        MonoidKind::Act => {
            let g = parse_melem(&ctx.input()?)?;
            let x = parse_gcode(&ctx.read(in2, "--in2")?)?;
            ctx.emit(&write_gcode(&act(&g, &x)?))?;
            Ok(true)
        }
        MonoidKind::Compose => {
            let h = parse_melem(&ctx.input()?)?;
            let g = parse_melem(&ctx.read(in2, "--in2")?)?;
            ctx.emit(&write_melem(&compose(&h, &g)?))?;
            Ok(true)
        }
        MonoidKind::Axioms => {
            if max > 4 {
                return Err(Malformed(format!("--max {max} is too large (at most 4)")));
            }
            let nat = check_action_axioms(
                &natural_action_triples(max),
                |x: &GraphCode| FinInjection::identity(x.size()),
                |g, h| h.then(g).ok(),
            );
            let mon = check_action_axioms(
                &monoid_action_triples(max.min(2)),
                |x: &GraphCode| MonoidElem::identity(x.size()),
                |g, h| compose(g, h).ok(),
            );
            let mut text = String::new();
            for (name, r) in [("natural action", &nat), ("graph of act", &mon)] {
                text += &format!(
                    "{name}: {} triples, {} identity checks, {} composition checks, {} violations\n",
                    r.triples,
                    r.identity_checks,
                    r.composition_checks,
                    r.identity_failures.len() + r.composition_failures.len()
                );
            }
            ctx.emit(&text)?;
            Ok(nat.holds() && mon.holds())
        }
    }
}

fn suite(ctx: &Ctx, name: &str) -> CliResult {
    let names: Vec<&str> = if name == "all" { SUITES.to_vec() } else { vec![name] };
    if names.iter().any(|n| !SUITES.contains(n)) {
        return Err(Malformed(format!("unknown suite `{name}`; expected one of {} or all", SUITES.join(", "))));
    }
    let g = &ctx.global;
    let cfg = SuiteConfig { seed: g.seed, depth: g.depth, branch: g.branch, tail: g.tail, limit: g.limit };
    let mut text = String::new();
    let mut ok = true;
    for n in names {
        let report = run_suite(n, &cfg)?;
        eprintln!("{n}: {:.2}s", report.wall.as_secs_f64());
        ok &= report.passed();
        text += &report.render();
    }
    ctx.emit(&text)?;
    Ok(ok)
}

fn export(ctx: &Ctx, order: bool) -> CliResult {
    let g: FinStructure = parse_structure(&ctx.input()?)?;
    ctx.emit(&to_dot(&g, order))?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx { global: cli.global };
    let result = match &cli.command {
        Command::Gen { what, density, vertices } => gen(&ctx, *what, *density, *vertices),
        Command::Build { what } => build(&ctx, *what),
        Command::Check { what, in2, mode, candidate } => check(&ctx, *what, in2.as_deref(), mode, candidate.as_deref()),
        Command::Metric { what, in2 } => metric(&ctx, *what, in2.as_deref()),
        Command::Monoid { what, in2, max } => monoid(&ctx, *what, in2.as_deref(), *max),
        Command::Suite { name } => suite(&ctx, name),
        Command::Export { order, .. } => export(&ctx, *order),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Malformed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
