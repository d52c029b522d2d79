//! Command-line driver: catalog audit, witness verification, invariants and Hasse diagrams.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::TraceKind;
use crate::catalog::{audit, AuditReport, Catalog, CatalogError, CatalogFile, Env, Instance};
use crate::degeneration::{
    standard_weights, verify_degenerations, DegenerationReport, Engine, Profile, Status,
    REPORT_SCHEMA_VERSION, TRACE_PAIRS,
};
use crate::exactnum::Scalar;
use crate::hasse::{build_report, emit_dot, Graph, HasseError, HasseReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "novikov", version, about = "Exact checks of degenerations between 3-dimensional Novikov algebras")]
pub struct Cli {
    /// Catalog JSON file (defaults to the built-in catalog).
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// Directory for report and DOT files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Comma-separated degeneration types to consider (1-13).
    #[arg(long, global = true, value_delimiter = ',', value_parser = clap::value_parser!(u32).range(1..=13))]
    pub types: Vec<u32>,
    /// JSON file overriding sample grids.
    #[arg(long, global = true)]
    pub samples: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Axioms, Lie classes, derivation dimensions and isomorphism rules of every family.
    VerifyCatalog,
    /// Every degeneration witness at every sample, with the necessary conditions.
    VerifyDegenerations,
    /// Invariant battery of one algebra, e.g. `invariants C7 g=-1`.
    Invariants {
        family: String,
        /// Parameter bindings `symbol=value`.
        params: Vec<String>,
    },
    /// Closure cross-validation and one DOT diagram per type.
    Hasse,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Hasse(#[from] HasseError),
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("sample override: {0}")]
    Samples(String),
    #[error("{0}")]
    Usage(String),
}

/// Resolved settings shared by every command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub catalog: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub types: Option<Vec<u32>>,
    pub samples: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub format: Format,
}

impl From<&Cli> for RunConfig {
    fn from(c: &Cli) -> Self {
        let mut types = c.types.clone();
        types.sort_unstable();
        types.dedup();
        RunConfig {
            catalog: c.catalog.clone(),
            out: c.out.clone(),
            types: (!types.is_empty()).then_some(types),
            samples: c.samples.clone(),
            jobs: c.jobs,
            format: c.format,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleOverride {
    #[serde(default)]
    pools: BTreeMap<String, Vec<String>>,
    /// Keyed by `FAMILY.symbol`.
    #[serde(default)]
    params: BTreeMap<String, Vec<String>>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn apply_samples(file: &mut CatalogFile, o: SampleOverride) -> Result<(), CliError> {
    for (name, values) in o.pools {
        let pool = file.sample_pools.get_mut(&name).ok_or_else(|| CliError::Samples(format!("unknown pool {name:?}")))?;
        *pool = values;
    }
    for (key, values) in o.params {
        let (fam, sym) = key.split_once('.').ok_or_else(|| CliError::Samples(format!("expected FAMILY.symbol, got {key:?}")))?;
        let spec = file
            .families
            .iter_mut()
            .find(|f| f.name == fam)
            .and_then(|f| f.params.iter_mut().find(|p| p.symbol == sym))
            .ok_or_else(|| CliError::Samples(format!("unknown parameter {key:?}")))?;
        spec.samples = Some(values);
    }
    Ok(())
}

pub fn load_catalog(cfg: &RunConfig) -> Result<Catalog, CliError> {
    let mut file: CatalogFile = match &cfg.catalog {
        Some(p) => serde_json::from_str(&read(p)?).map_err(CatalogError::from)?,
        None => Catalog::shipped().file().clone(),
    };
    if let Some(p) = &cfg.samples {
        let o: SampleOverride = serde_json::from_str(&read(p)?).map_err(|e| CliError::Samples(e.to_string()))?;
        apply_samples(&mut file, o)?;
    }
    Ok(Catalog::from_file(file)?)
}

struct Output {
    stdout: String,
    code: i32,
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|source| CliError::Io { path, source })
}

fn audit_text(rep: &AuditReport) -> String {
    let mut s = format!(
        "catalog: {} families, {} samples, {} isomorphism checks, {} failures\n",
        rep.families,
        rep.samples,
        rep.iso_checks,
        rep.failures.len()
    );
    for f in &rep.failures {
        let _ = writeln!(s, "FAIL {} {:?}: {}", f.algebra, f.check, f.detail);
    }
    s
}

fn cmd_verify_catalog(cfg: &RunConfig, cat: &Catalog) -> Result<Output, CliError> {
    let rep = audit(cat)?;
    if let Some(dir) = &cfg.out {
        write_file(dir, "catalog_report.json", &json(&rep))?;
    }
    let stdout = match cfg.format {
        Format::Text => audit_text(&rep),
        Format::Json => json(&rep),
    };
    Ok(Output { stdout, code: if rep.ok() { EXIT_OK } else { EXIT_FAILED } })
}

fn degeneration_text(rep: &DegenerationReport) -> String {
    let mut s = String::new();
    for w in &rep.witnesses {
        let verdict = if rep.failures.contains(&w.id) { "FAIL" } else { "ok" };
        let _ = writeln!(s, "#{:<4} type {:>2} {:?} {} samples {verdict}", w.id, w.type_id, w.regime, w.results.len());
        for r in &w.results {
            if r.status != Status::Verified {
                let detail = r.detail.as_deref().unwrap_or("");
                let _ = writeln!(s, "  {} -> {} {:?} {detail}", r.source, r.target, r.status);
            } else if let Some(n) = r.necessary.as_ref().filter(|n| !n.all_pass()) {
                for v in n.failures() {
                    let _ = writeln!(s, "  {} -> {} necessary condition {}: {}", r.source, r.target, v.check, v.detail);
                }
            }
        }
    }
    let _ = writeln!(s, "witnesses: {} run, {} failed", rep.witnesses.len(), rep.failures.len());
    if !rep.failures.is_empty() {
        let _ = writeln!(s, "failing: {}", rep.failures.join(", "));
    }
    s
}

/// Catalog audit, stopping the caller when it fails.
fn gate(cfg: &RunConfig, cat: &Catalog) -> Result<Option<Output>, CliError> {
    let rep = audit(cat)?;
    if rep.ok() {
        return Ok(None);
    }
    let stdout = match cfg.format {
        Format::Text => audit_text(&rep),
        Format::Json => json(&rep),
    };
    Ok(Some(Output { stdout, code: EXIT_FAILED }))
}

fn cmd_verify_degenerations(cfg: &RunConfig, cat: &Catalog) -> Result<Output, CliError> {
    if let Some(stop) = gate(cfg, cat)? {
        return Ok(stop);
    }
    let engine = Engine::new(cat)?;
    let rep = verify_degenerations(cat, &engine, cfg.types.as_deref())?;
    if let Some(dir) = &cfg.out {
        write_file(dir, "degeneration_report.json", &json(&rep))?;
    }
    let stdout = match cfg.format {
        Format::Text => degeneration_text(&rep),
        Format::Json => json(&rep),
    };
    Ok(Output { stdout, code: if rep.ok() { EXIT_OK } else { EXIT_FAILED } })
}

#[derive(Debug, Serialize)]
pub struct GenDerDim {
    pub weights: [String; 3],
    pub dim: usize,
}

#[derive(Debug, Serialize)]
pub struct InvariantReport {
    pub schema_version: u32,
    pub algebra: Instance,
    pub der: usize,
    pub square: usize,
    pub left_annihilator: usize,
    pub right_annihilator: usize,
    pub complete: bool,
    pub lie: Option<String>,
    pub jordan_associative: bool,
    /// `null` where the defining denominator vanishes.
    pub traces: BTreeMap<String, Option<String>>,
    pub generalized_derivations: Vec<GenDerDim>,
}

pub fn trace_label(kind: TraceKind, i: u32, j: u32) -> String {
    let k = match kind {
        TraceKind::C => 'c',
        TraceKind::D => 'd',
    };
    format!("{k}_{{{i},{j}}}")
}

pub fn invariant_report(cat: &Catalog, family: &str, env: &Env) -> Result<InvariantReport, CatalogError> {
    cat.check_admissible(family, env)?;
    let algebra = cat.instance(family, env)?;
    let p = Profile::new(cat.instantiate(family, env)?);
    let mut traces = BTreeMap::new();
    for kind in [TraceKind::C, TraceKind::D] {
        for (i, j) in TRACE_PAIRS {
            traces.insert(trace_label(kind, i, j), p.traces_at(kind, i, j).map(|v| v.to_string()));
        }
    }
    let generalized_derivations = standard_weights(&algebra.values)
        .iter()
        .map(|w| GenDerDim { weights: w.clone().map(|x| x.to_string()), dim: p.gen_der(w) })
        .collect();
    Ok(InvariantReport {
        schema_version: REPORT_SCHEMA_VERSION,
        der: p.der,
        square: p.square,
        left_annihilator: p.annihilators.0,
        right_annihilator: p.annihilators.1,
        complete: p.complete,
        lie: p.lie.as_ref().map(ToString::to_string),
        jordan_associative: p.jordan_associative,
        traces,
        generalized_derivations,
        algebra,
    })
}

fn invariant_text(r: &InvariantReport) -> String {
    let yes = |b: bool| if b { "yes" } else { "no" };
    let mut rows: Vec<(String, String)> = vec![
        ("algebra".into(), r.algebra.to_string()),
        ("dim Der".into(), r.der.to_string()),
        ("dim A·A".into(), r.square.to_string()),
        ("left annihilator".into(), r.left_annihilator.to_string()),
        ("right annihilator".into(), r.right_annihilator.to_string()),
        ("complete".into(), yes(r.complete).into()),
        ("Lie algebra".into(), r.lie.clone().unwrap_or_else(|| "unclassified".into())),
        ("Jordan associative".into(), yes(r.jordan_associative).into()),
    ];
    for (k, v) in &r.traces {
        rows.push((k.clone(), v.clone().unwrap_or_else(|| "undefined".into())));
    }
    for g in &r.generalized_derivations {
        let w = format!("({}, {}, {})", g.weights[0], g.weights[1], g.weights[2]);
        rows.push((format!("dim Der_{w}"), g.dim.to_string()));
    }
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0) + 2;
    let mut s = String::new();
    for (k, v) in rows {
        let pad = width - k.chars().count();
        let _ = writeln!(s, "{k}{}{v}", " ".repeat(pad));
    }
    s
}

fn parse_bindings(params: &[String]) -> Result<Env, CliError> {
    params
        .iter()
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("expected symbol=value, got {kv:?}")))?;
            let v: Scalar = v.trim().parse().map_err(|_| CliError::Usage(format!("not a rational number: {v:?}")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn cmd_invariants(cfg: &RunConfig, cat: &Catalog, family: &str, params: &[String]) -> Result<Output, CliError> {
    let env = parse_bindings(params)?;
    let known: Vec<&str> = cat.family(family)?.params.iter().map(|p| p.symbol.as_str()).collect();
    if let Some(k) = env.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(CliError::Usage(format!("{family} has no parameter {k:?}")));
    }
    let rep = invariant_report(cat, family, &env)?;
    let stdout = match cfg.format {
        Format::Text => invariant_text(&rep),
        Format::Json => json(&rep),
    };
    Ok(Output { stdout, code: EXIT_OK })
}

fn hasse_text(rep: &HasseReport, files: &[String]) -> String {
    let mut s = format!("classes {} witness edges {}\n", rep.nodes, rep.edges);
    for t in &rep.types {
        let _ = writeln!(
            s,
            "type {:>2} {}: {} pairs, {} in closure, {} certified, {} manual, {} discrepancies, {} unsettled",
            t.type_id,
            t.name,
            t.pairs_checked,
            t.closure.len(),
            t.certified.len(),
            t.manual.len(),
            t.discrepancies.len(),
            t.uncovered.len()
        );
        for d in &t.discrepancies {
            let side = if d.in_closure { "in closure, not in table" } else { "in table, not in closure" };
            let _ = writeln!(s, "  DISCREPANCY {} -> {}: {side}", d.source, d.target);
        }
        for p in &t.uncovered {
            let _ = writeln!(s, "  unsettled {} -> {}", p.source, p.target);
        }
    }
    for d in &rep.diagrams {
        let verdict = if d.ok() { "ok" } else { "MISMATCH" };
        let _ = writeln!(s, "diagram {:>2}: {} nodes, {} edges {verdict}", d.type_id, d.nodes, d.reduction.len());
        for p in &d.unsound {
            let _ = writeln!(s, "  drawn but not in closure {} -> {}", p.source, p.target);
        }
        for p in &d.missing {
            let _ = writeln!(s, "  in closure but not drawn {} -> {}", p.source, p.target);
        }
    }
    for p in &rep.der_violations {
        let _ = writeln!(s, "DER {} -> {}: dimension does not increase", p.source, p.target);
    }
    for e in &rep.extra_failures {
        let _ = writeln!(s, "EXTRA #{} at {:?}: {:?}", e.witness, e.sample, e.status);
    }
    for f in files {
        let _ = writeln!(s, "wrote {f}");
    }
    s
}

fn cmd_hasse(cfg: &RunConfig, cat: &Catalog) -> Result<Output, CliError> {
    if let Some(stop) = gate(cfg, cat)? {
        return Ok(stop);
    }
    let engine = Engine::new(cat)?;
    let deg = verify_degenerations(cat, &engine, None)?;
    if !deg.ok() {
        let stdout = match cfg.format {
            Format::Text => degeneration_text(&deg),
            Format::Json => json(&deg),
        };
        return Ok(Output { stdout, code: EXIT_FAILED });
    }
    let g = Graph::build(cat, &deg.witnesses)?;
    let types = cfg.types.as_deref();
    let rep = build_report(cat, &engine, &g, types)?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut files = Vec::new();
    for d in cat.diagrams().iter().filter(|d| types.is_none_or(|ts| ts.contains(&d.type_id))) {
        let table = cat.closure_tables().iter().find(|t| t.type_id == d.type_id);
        let name = format!("type_{}.dot", d.type_id);
        write_file(&dir, &name, &emit_dot(cat, &engine, &g, d, table)?)?;
        files.push(dir.join(name).display().to_string());
    }
    write_file(&dir, "hasse_report.json", &json(&rep))?;
    files.push(dir.join("hasse_report.json").display().to_string());
    let stdout = match cfg.format {
        Format::Text => hasse_text(&rep, &files),
        Format::Json => json(&rep),
    };
    Ok(Output { stdout, code: if rep.consistent() { EXIT_OK } else { EXIT_FAILED } })
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<Output, CliError> {
    let cat = load_catalog(cfg)?;
    match &cli.command {
        Command::VerifyCatalog => cmd_verify_catalog(cfg, &cat),
        Command::VerifyDegenerations => cmd_verify_degenerations(cfg, &cat),
        Command::Invariants { family, params } => cmd_invariants(cfg, &cat, family, params),
        Command::Hasse => cmd_hasse(cfg, &cat),
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let cfg = RunConfig::from(&cli);
    let result = match cfg.jobs {
        Some(0) => Err(CliError::Usage("--jobs must be positive".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &cfg)),
            Err(e) => Err(CliError::Usage(e.to_string())),
        },
        None => dispatch(&cli, &cfg),
    };
    match result {
        Ok(o) => {
            let _ = out.write_all(o.stdout.as_bytes());
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}
