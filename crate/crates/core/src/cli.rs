//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on a domain error or a negative verdict, 2 on a usage error.
//! Results go to the output stream and diagnostics to the error stream.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use crate::algebra::{as_reduce, branching_datum, genus, genus_of_conductors, parse_ratfunc, AlgebraError, Field, Point, RatFunc};
use crate::forms::{chain_exists, exact_form_exists, fmt_multiset, FormConfig, FormError, FormType};
use crate::moduli::{build_graph_with, connectivity_report, enumerate_strata, ModuliCache, ModuliError};
use crate::swan::{Cover, SwanError};
use crate::tree::{realize_tree, tree_from_cover, validate, HurwitzTree, RealizeOptions, TreeError};
use crate::valuation::{parse_tpoly, Place, ValuationError};
use crate::Q;

const SCHEMA: &str = "hurwitz/1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error(transparent)]
    Swan(#[from] SwanError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Moduli(#[from] ModuliError),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "hurwitz", version, about = "Artin-Schreier covers, Hurwitz trees, exact forms and the strata of AS_g")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Largest extension degree for witness searches (overrides HURWITZ_MMAX, default 3).
    #[arg(long, global = true)]
    m_max: Option<u32>,
    /// Pair limit for Gröbner computations.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pair_cap: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct CoverArgs {
    /// Cover as "p=5; F=<expr in X and t>".
    #[arg(long, conflicts_with = "file")]
    cover: Option<String>,
    /// File holding the cover string.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Genus from a conductor list or from f in y^p − y = f.
    Genus {
        #[arg(long)]
        p: u32,
        #[arg(long = "type", value_delimiter = ',', conflicts_with = "f")]
        conductors: Option<Vec<u64>>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long, default_value_t = 1)]
        m: u32,
    },
    /// Reduced form and branching datum of f in y^p − y = f.
    Reduce {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long)]
        f: String,
    },
    /// Degeneration type at a disc, or the good-reduction verdict.
    Swan {
        #[command(flatten)]
        cover: CoverArgs,
        /// Disc as "s=<rational>,z=<expr in t>".
        #[arg(long, default_value = "s=0")]
        place: String,
        /// Directions for boundary Swan conductors ("inf" or field elements).
        #[arg(long, value_delimiter = ',')]
        dir: Vec<String>,
        #[arg(long)]
        good: bool,
    },
    /// Depth profile s ↦ δ(s) along discs centred at z.
    Profile {
        #[command(flatten)]
        cover: CoverArgs,
        #[arg(long, default_value = "0")]
        z: String,
        #[arg(long)]
        s_max: String,
    },
    /// Hurwitz trees of covers and their realization
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Exact differential forms and chains of splits
    #[command(subcommand)]
    Form(FormCmd),
    /// Strata of AS_g and the graph C_d
    #[command(subcommand)]
    Moduli(ModuliCmd),
}

#[derive(Subcommand, Debug)]
enum TreeCmd {
    /// Hurwitz tree of a cover.
    FromCover {
        #[command(flatten)]
        cover: CoverArgs,
    },
    /// Check a tree given as JSON against the axioms.
    Validate {
        #[arg(long)]
        file: PathBuf,
    },
    /// Search for a cover realizing a tree given as JSON.
    Realize {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 48)]
        max_attempts: usize,
    },
}

#[derive(Subcommand, Debug)]
enum FormCmd {
    /// Whether an exact form of the given type exists.
    Exists {
        #[arg(long)]
        p: u32,
        #[arg(long = "type", value_delimiter = ',', required = true)]
        conductors: Vec<u64>,
    },
    /// A chain of exact forms from {h} down to a target multiset.
    Chain {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        h: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        target: Vec<u64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GraphFormat {
    Text,
    Json,
    Dot,
}

#[derive(Subcommand, Debug)]
enum ModuliCmd {
    Strata {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        g: u64,
    },
    Graph {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        g: u64,
        #[arg(long, value_enum, default_value_t = GraphFormat::Text)]
        format: GraphFormat,
        /// Drop edges implied by transitivity (DOT only).
        #[arg(long)]
        reduce: bool,
    },
    Connected {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        g: u64,
    },
    Report {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 0)]
        g_min: u64,
        #[arg(long)]
        g_max: u64,
    },
}

/// Settings shared by all subcommands.
#[derive(Clone, Debug)]
pub struct Config {
    pub json: bool,
    pub forms: FormConfig,
}

fn config(cli: &Cli) -> Result<Config, CliError> {
    let env = match std::env::var("HURWITZ_MMAX") {
        Ok(v) => Some(v.trim().parse::<u32>().map_err(|_| CliError::Usage(format!("HURWITZ_MMAX={v} is not a positive integer")))?),
        Err(_) => None,
    };
    let m_max = cli.m_max.or(env).unwrap_or(3);
    if m_max == 0 || cli.pair_cap == 0 {
        return Err(CliError::Usage("caps must be positive".into()));
    }
    let forms = FormConfig { m_max, pair_cap: cli.pair_cap, ..FormConfig::default() };
    Ok(Config { json: cli.json, forms })
}

/// Parse argv and run the command. Returns the process exit status.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    match config(&cli).and_then(|cfg| run(&cli.cmd, &cfg, out)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: &mut dyn Write, v: serde_json::Value) -> Result<(), CliError> {
    let mut v = v;
    if let Some(obj) = v.as_object_mut() {
        obj.entry("schema").or_insert_with(|| json!(SCHEMA));
    }
    writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json values serialize"))?;
    Ok(())
}

fn read_cover(a: &CoverArgs) -> Result<Cover, CliError> {
    let src = match (&a.cover, &a.file) {
        (Some(c), _) => c.clone(),
        (None, Some(f)) => std::fs::read_to_string(f)?,
        (None, None) => return Err(CliError::Usage("give --cover \"p=<prime>; F=<expr>\" or --file".into())),
    };
    Ok(Cover::parse(src.trim())?)
}

fn read_tree(path: &PathBuf) -> Result<HurwitzTree, CliError> {
    Ok(HurwitzTree::from_json_str(&std::fs::read_to_string(path)?)?)
}

fn parse_q(s: &str) -> Result<Q, CliError> {
    s.trim().parse::<Q>().map_err(|_| CliError::Usage(format!("`{s}` is not a rational number")))
}

fn parse_point(s: &str, f: Field) -> Result<Point, CliError> {
    let s = s.trim();
    if matches!(s, "inf" | "∞" | "infinity") {
        return Ok(Point::Infinity);
    }
    let c = parse_ratfunc(s, f)?;
    if !c.is_constant() {
        return Err(CliError::Usage(format!("direction `{s}` is not a constant")));
    }
    Ok(Point::Finite(c.eval(f.zero()).unwrap_or(f.zero())))
}

fn point_name(pt: Point, f: Field) -> String {
    match pt {
        Point::Infinity => "∞".into(),
        Point::Finite(a) => f.fmt_elem(a),
    }
}

fn field(p: u32, m: u32) -> Result<Field, CliError> {
    Field::new(p, m).map_err(|e| CliError::Algebra(e.into()))
}

fn verdict(v: bool) -> i32 {
    if v {
        0
    } else {
        1
    }
}

fn run(cmd: &Cmd, cfg: &Config, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Cmd::Genus { p, conductors, f, m } => {
            let (hs, g) = match (conductors, f) {
                (Some(hs), _) => (hs.clone(), genus_of_conductors(hs, *p)?),
                (None, Some(expr)) => {
                    let fld = field(*p, *m)?;
                    let datum = branching_datum(&parse_ratfunc(expr, fld)?)?;
                    (datum.conductors(), genus(&datum)?)
                }
                (None, None) => return Err(CliError::Usage("give --type or --f".into())),
            };
            if cfg.json {
                emit(out, json!({"p": p, "conductors": hs, "genus": g}))?;
            } else {
                writeln!(out, "{g}")?;
            }
            Ok(0)
        }
        Cmd::Reduce { p, m, f } => {
            let fld = field(*p, *m)?;
            let func = parse_ratfunc(f, fld)?;
            let r = as_reduce(&func);
            let datum = branching_datum(&r.reduced)?;
            let g = genus(&datum)?;
            if cfg.json {
                emit(
                    out,
                    json!({
                        "p": p, "reduced": r.reduced.to_string(), "witness": r.witness.to_string(),
                        "dropped_constant": fld.fmt_elem(r.dropped_constant), "trivial": r.trivial,
                        "branch_points": datum.points, "genus": g,
                    }),
                )?;
            } else {
                writeln!(out, "reduced: {}", r.reduced)?;
                writeln!(out, "witness: {}", r.witness)?;
                for b in &datum.points {
                    writeln!(out, "branch point {} (degree {}): conductor {}", b.location, b.degree, b.conductor)?;
                }
                writeln!(out, "genus: {g}")?;
            }
            Ok(0)
        }
        Cmd::Swan { cover, place, dir, good } => {
            let c = read_cover(cover)?;
            let fld = c.field();
            if *good {
                let r = c.good_reduction()?;
                if cfg.json {
                    emit(out, serde_json::to_value(&r).expect("report serializes"))?;
                } else {
                    writeln!(out, "conductor sum: {}", r.conductor_sum)?;
                    writeln!(out, "boundary swan at 0: {}", r.boundary_swan)?;
                    writeln!(out, "depth: {}", r.depth)?;
                    writeln!(out, "delta_ybar: {}", r.delta_ybar)?;
                    writeln!(out, "good reduction: {}", r.verdict)?;
                }
                return Ok(verdict(r.verdict));
            }
            let pl = Place::parse(place, fld)?;
            let kind = c.degeneration_type(&pl)?;
            let dirs: Vec<Point> = if dir.is_empty() {
                let mut v = vec![Point::Infinity];
                if let Some(w) = kind.omega() {
                    v.extend(w.den().roots().into_iter().map(Point::Finite));
                } else {
                    v.push(Point::Finite(fld.zero()));
                }
                v
            } else {
                dir.iter().map(|d| parse_point(d, fld)).collect::<Result<_, _>>()?
            };
            let sw: Vec<(String, i64)> = dirs.iter().map(|&d| (point_name(d, fld), kind.boundary_swan(d))).collect();
            if cfg.json {
                let mut v = kind.to_json();
                v["place"] = json!(pl.to_string());
                v["boundary_swan"] = json!(sw.iter().map(|(d, s)| json!({"direction": d, "swan": s})).collect::<Vec<_>>());
                emit(out, v)?;
            } else {
                writeln!(out, "{kind}")?;
                for (d, s) in sw {
                    writeln!(out, "boundary swan at {d}: {s}")?;
                }
            }
            Ok(0)
        }
        Cmd::Profile { cover, z, s_max } => {
            let c = read_cover(cover)?;
            let z = parse_tpoly(z, c.field())?;
            let prof = c.depth_profile(&z, parse_q(s_max)?)?;
            if cfg.json {
                emit(out, json!({"segments": prof.to_json()}))?;
            } else {
                for s in &prof.segments {
                    let w = s.omega.as_ref().map(|w| format!("({w}) dx")).unwrap_or_else(|| "étale".into());
                    writeln!(out, "[{}, {}]: delta = {}, omega = {}", s.from, s.to, s.delta_formula(), w)?;
                }
                for (s, w) in &prof.kinks {
                    let w = w.as_ref().map(|w| format!("({w}) dx")).unwrap_or_else(|| "étale".into());
                    writeln!(out, "kink at s = {s}: omega = {w}")?;
                }
            }
            Ok(0)
        }
        Cmd::Tree(t) => run_tree(t, cfg, out),
        Cmd::Form(f) => run_form(f, cfg, out),
        Cmd::Moduli(m) => run_moduli(m, cfg, out),
    }
}

fn tree_text(t: &HurwitzTree, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "p = {}, root depth {}, root jump {}", t.p(), t.root_depth(), t.root_jump)?;
    for (i, v) in t.vertices.iter().enumerate().skip(1) {
        let w = v.omega.as_ref().map(RatFunc::to_string).unwrap_or_default();
        writeln!(
            out,
            "vertex {i}: parent {}, thickness {}, depth {}, omega ({w}) dx",
            v.parent.unwrap_or(0),
            v.thickness,
            v.depth
        )?;
    }
    for l in &t.leaves {
        writeln!(out, "leaf {} at vertex {}: conductor {}", l.label, l.vertex, l.conductor)?;
    }
    Ok(())
}

fn run_tree(cmd: &TreeCmd, cfg: &Config, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        TreeCmd::FromCover { cover } => {
            let t = tree_from_cover(&read_cover(cover)?)?;
            if cfg.json {
                emit(out, t.to_json())?;
            } else {
                tree_text(&t, out)?;
            }
            Ok(0)
        }
        TreeCmd::Validate { file } => {
            let r = validate(&read_tree(file)?);
            if cfg.json {
                let mut v = serde_json::to_value(&r).expect("report serializes");
                v["passed"] = json!(r.passed());
                emit(out, v)?;
            } else {
                writeln!(out, "{r}")?;
            }
            Ok(verdict(r.passed()))
        }
        TreeCmd::Realize { file, max_attempts } => {
            let t = read_tree(file)?;
            let r = realize_tree(&t, &RealizeOptions { max_attempts: *max_attempts })?;
            let fld = r.cover.field();
            let src = if fld.m() == 1 {
                format!("p={}; F={}", fld.p(), r.cover.rhs())
            } else {
                format!("p={}; m={}; F={}", fld.p(), fld.m(), r.cover.rhs())
            };
            if cfg.json {
                emit(out, json!({"cover": src, "attempts": r.attempts}))?;
            } else {
                writeln!(out, "{src}")?;
            }
            Ok(0)
        }
    }
}

fn run_form(cmd: &FormCmd, cfg: &Config, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        FormCmd::Exists { p, conductors } => {
            let t = FormType::new(*p, conductors)?;
            let d = exact_form_exists(&t, &cfg.forms)?;
            let answer = match d.exists {
                Some(true) => "true",
                Some(false) => "false",
                None => "unknown",
            };
            if cfg.json {
                emit(
                    out,
                    json!({
                        "p": p, "type": fmt_multiset(&t.entries), "exists": d.exists, "method": d.method,
                        "witness": d.witness.as_ref().map(|w| w.to_json()), "note": d.note,
                    }),
                )?;
            } else {
                writeln!(out, "{answer}")?;
                if let Some(w) = &d.witness {
                    writeln!(out, "witness: {}", w.form_string())?;
                }
                if !d.note.is_empty() {
                    writeln!(out, "note: {}", d.note)?;
                }
            }
            Ok(verdict(d.exists == Some(true)))
        }
        FormCmd::Chain { p, h, target } => {
            let c = chain_exists(*p, *h, target, &cfg.forms)?;
            if cfg.json {
                emit(out, json!({"p": p, "h": h, "target": fmt_multiset(target), "chain": c.as_ref().map(|c| c.to_json())}))?;
            } else {
                match &c {
                    Some(c) => write!(out, "{c}")?,
                    None => writeln!(out, "no chain from {{{h}}} to {}", fmt_multiset(target))?,
                }
            }
            Ok(verdict(c.is_some()))
        }
    }
}

fn run_moduli(cmd: &ModuliCmd, cfg: &Config, out: &mut dyn Write) -> Result<i32, CliError> {
    let cache = ModuliCache::default();
    match cmd {
        ModuliCmd::Strata { p, g } => {
            let s = enumerate_strata(*p, *g)?;
            if cfg.json {
                let v: Vec<_> = s.iter().map(|x| json!({"partition": x.label(), "dimension": x.dimension})).collect();
                emit(out, json!({"p": p, "g": g, "strata": v}))?;
            } else {
                for x in s {
                    writeln!(out, "{} dim {}", x.label(), x.dimension)?;
                }
            }
            Ok(0)
        }
        ModuliCmd::Graph { p, g, format, reduce } => {
            let gr = build_graph_with(*p, *g, &cfg.forms, &cache)?;
            let format = if cfg.json { GraphFormat::Json } else { *format };
            match format {
                GraphFormat::Json => emit(out, gr.to_json())?,
                GraphFormat::Dot => write!(out, "{}", gr.to_dot(*reduce))?,
                GraphFormat::Text => {
                    for (i, s) in gr.strata.iter().enumerate() {
                        let mut tags = Vec::new();
                        if gr.closed[i] {
                            tags.push("closed");
                        }
                        if gr.irreducible[i] {
                            tags.push("irreducible component");
                        }
                        writeln!(out, "{} dim {} {}", s.label(), s.dimension, tags.join(", "))?;
                    }
                    for &(a, b) in &gr.edges {
                        writeln!(out, "{} -> {}", gr.strata[a].label(), gr.strata[b].label())?;
                    }
                    writeln!(out, "connected: {}", gr.connected())?;
                }
            }
            Ok(0)
        }
        ModuliCmd::Connected { p, g } => {
            let gr = build_graph_with(*p, *g, &cfg.forms, &cache)?;
            if cfg.json {
                let comps: Vec<Vec<String>> = gr.components.iter().map(|c| c.iter().map(|&i| gr.strata[i].label()).collect()).collect();
                emit(out, json!({"p": p, "g": g, "connected": gr.connected(), "components": comps}))?;
            } else {
                writeln!(out, "{}", gr.connected())?;
            }
            Ok(verdict(gr.connected()))
        }
        ModuliCmd::Report { p, g_min, g_max } => {
            let rows = connectivity_report(*p, *g_min..=*g_max, &cfg.forms)?;
            if cfg.json {
                emit(out, json!({"p": p, "rows": rows}))?;
            } else {
                writeln!(out, "g\td+2\tstrata\tconnected\tclosed")?;
                for r in rows {
                    writeln!(out, "{}\t{}\t{}\t{}\t{}", r.g, r.d + 2, r.strata, r.connected, r.closed.join(" "))?;
                }
            }
            Ok(0)
        }
    }
}
