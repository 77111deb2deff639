//! Command implementations behind the `semtraj` binary. Each command returns
//! the text it would print; `main` only handles arguments and exit codes.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use semtraj::aggregate::{self, AggregateError};
use semtraj::catalog::CatalogError;
use semtraj::geometry::GeometryId;
use semtraj::moft::{Moft, MoftError, ObjectId};
use semtraj::numfmt::format_real;
use semtraj::resm::{self, ResmError};
use semtraj::smgraph::{export_dot, GraphError, SmGraph};
use semtraj::stops::{build_sm_moft, SmMoft, SmRecord, StopsError};
use semtraj::temporal::{self, InstantAggregate, Interval, IntervalAggregate, TemporalError};
use semtraj::Catalog;

#[derive(Debug, Parser)]
#[command(name = "semtraj", version, about = "Stops, stop graphs and stop-pattern queries over moving-object data")]
pub struct Cli {
    /// Catalog JSON with dimensions, alpha mappings, PoIs and time categories
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the catalog and, optionally, a MOFT file
    Validate {
        #[arg(long)]
        moft: Option<PathBuf>,
    },
    /// Detect stops and write the SM-MOFT as CSV
    Detect {
        #[arg(long)]
        moft: PathBuf,
        /// Output file; standard output if absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the stop graph of one object in Graphviz format
    Graph {
        #[arg(long)]
        smmoft: PathBuf,
        oid: String,
        /// Merge nodes of the same dimension
        #[arg(long)]
        asm: bool,
    },
    /// Evaluate a count, oids, area or temporal aggregate expression
    Query {
        #[arg(long)]
        smmoft: PathBuf,
        expression: String,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("missing --catalog")]
    NoCatalog,
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Syntax { path: String, message: String },
    #[error("{path}: invalid:\n  {}", .violations.join("\n  "))]
    Invalid { path: String, violations: Vec<String> },
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    /// 0 success, 1 domain or validation error, 2 I/O or syntax error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Syntax { .. } | CliError::NoCatalog | CliError::Usage(_) => 2,
            CliError::Invalid { .. } | CliError::Domain(_) => 1,
        }
    }
}

fn show(p: &Path) -> String {
    p.display().to_string()
}

fn open(p: &Path) -> Result<BufReader<File>, CliError> {
    File::open(p).map(BufReader::new).map_err(|source| CliError::Io { path: show(p), source })
}

pub fn load_catalog(p: Option<&Path>) -> Result<Catalog, CliError> {
    let p = p.ok_or(CliError::NoCatalog)?;
    Catalog::from_reader(open(p)?).map_err(|e| match e {
        CatalogError::Io(source) => CliError::Io { path: show(p), source },
        CatalogError::Syntax(e) => CliError::Syntax { path: show(p), message: e.to_string() },
        CatalogError::Invalid(violations) => CliError::Invalid { path: show(p), violations },
    })
}

pub fn load_moft(p: &Path) -> Result<Moft, CliError> {
    Moft::read_csv(open(p)?).map_err(|e| match e {
        MoftError::Io(source) => CliError::Io { path: show(p), source },
        e @ MoftError::Duplicate { .. } => CliError::Invalid { path: show(p), violations: vec![e.to_string()] },
        e => CliError::Syntax { path: show(p), message: e.to_string() },
    })
}

pub fn load_smmoft(p: &Path) -> Result<SmMoft, CliError> {
    SmMoft::read_csv(open(p)?).map_err(|e| match e {
        StopsError::Io(source) => CliError::Io { path: show(p), source },
        e @ StopsError::OverlappingRecords { .. } => {
            CliError::Invalid { path: show(p), violations: vec![e.to_string()] }
        }
        e => CliError::Syntax { path: show(p), message: e.to_string() },
    })
}

pub fn cmd_validate(catalog: Option<&Path>, moft: Option<&Path>) -> Result<String, CliError> {
    let c = load_catalog(catalog)?;
    let mut out = format!(
        "catalog ok: {} dimensions, {} PoIs\n",
        c.olap.dimensions().count(),
        c.pia.pois().len()
    );
    if let Some(m) = moft {
        let m = load_moft(m)?;
        out.push_str(&format!("moft ok: {} samples, {} objects\n", m.len(), m.trajectories().len()));
    }
    Ok(out)
}

pub fn cmd_detect(catalog: Option<&Path>, moft: &Path) -> Result<String, CliError> {
    let c = load_catalog(catalog)?;
    let m = load_moft(moft)?;
    let sm = build_sm_moft(&m, &c.pia);
    let mut buf = Vec::new();
    sm.write_csv(&mut buf).expect("writing to memory");
    Ok(String::from_utf8(buf).expect("utf-8 output"))
}

fn graph_error(e: GraphError) -> CliError {
    CliError::Domain(e.to_string())
}

pub fn cmd_graph(catalog: Option<&Path>, smmoft: &Path, oid: &str, asm: bool) -> Result<String, CliError> {
    let c = load_catalog(catalog)?;
    let sm = load_smmoft(smmoft)?;
    let g = SmGraph::build(&sm, &ObjectId::new(oid), &c.olap).map_err(graph_error)?;
    Ok(if asm { export_dot(&g.to_asm()) } else { export_dot(&g) })
}

fn resm_error(e: ResmError) -> CliError {
    match e {
        ResmError::Syntax { pos, message } => CliError::Domain(format!("query syntax error at {pos}: {message}")),
        e => CliError::Domain(e.to_string()),
    }
}

fn aggregate_error(e: AggregateError) -> CliError {
    match e {
        AggregateError::Resm(e) => resm_error(e),
        e => CliError::Domain(e.to_string()),
    }
}

fn temporal_error(e: TemporalError) -> CliError {
    CliError::Domain(e.to_string())
}

/// Splits `name(arg)` into its parts.
fn call(expr: &str) -> Option<(&str, &str)> {
    let expr = expr.trim();
    let open = expr.find('(')?;
    if !expr.ends_with(')') {
        return None;
    }
    Some((expr[..open].trim(), &expr[open + 1..expr.len() - 1]))
}

/// Records selected by `*` or comma-separated `oid=`, `gid=`, `dim=` filters.
/// Filters on the same key are alternatives; different keys must all hold.
fn select<'a>(sm: &'a SmMoft, c: &Catalog, spec: &str) -> Result<Vec<&'a SmRecord>, CliError> {
    let spec = spec.trim();
    let mut oids = BTreeSet::new();
    let mut gids = BTreeSet::new();
    let mut dims = BTreeSet::new();
    if spec != "*" {
        for part in spec.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| CliError::Domain(format!("bad selection filter {:?}", part.trim())))?;
            let v = v.trim().to_owned();
            match k.trim() {
                "oid" => oids.insert(v),
                "gid" => gids.insert(v),
                "dim" => {
                    let d = c.olap.dimension(&v).map_err(|e| CliError::Domain(e.to_string()))?;
                    dims.insert(d.name().to_owned())
                }
                k => return Err(CliError::Domain(format!("unknown selection key {k:?}; use oid, gid or dim"))),
            };
        }
    }
    Ok(sm
        .records()
        .iter()
        .filter(|r| oids.is_empty() || oids.contains(r.oid.as_str()))
        .filter(|r| gids.is_empty() || gids.contains(r.gid.as_str()))
        .filter(|r| {
            dims.is_empty()
                || c.olap.resolve_geometry(&r.gid).is_some_and(|(d, _)| dims.contains(d.name()))
        })
        .collect())
}

const USAGE: &str = "expected count(RESM), oids(RESM), area(gid,...), \
max_l|min_l|avg_l|timespan_l(SEL) or time_count|time_max|time_min|timespan(SEL)";

pub fn cmd_query(catalog: Option<&Path>, smmoft: &Path, expression: &str) -> Result<String, CliError> {
    let c = load_catalog(catalog)?;
    let sm = load_smmoft(smmoft)?;
    let (name, arg) = call(expression).ok_or_else(|| CliError::Domain(format!("bad query {expression:?}; {USAGE}")))?;
    let interval_kind = |k| -> Result<String, CliError> {
        let set: Vec<Interval> = select(&sm, &c, arg)?.iter().map(|r| r.interval).collect();
        temporal::interval_aggregate(&set, k).map(|v| format_real(v) + "\n").map_err(temporal_error)
    };
    let instant_kind = |k| -> Result<String, CliError> {
        let set: Vec<f64> = select(&sm, &c, arg)?
            .iter()
            .flat_map(|r| [r.interval.start(), r.interval.end()])
            .collect();
        temporal::instant_aggregate(&set, k).map(|v| format_real(v) + "\n").map_err(temporal_error)
    };
    match name {
        "count" => Ok(format!("{}\n", aggregate::count_resm(&sm, arg, &c.olap).map_err(aggregate_error)?)),
        "oids" => {
            let q = resm::parse(arg).map_err(resm_error)?;
            let hits = resm::matching_oids(&sm, &q, &c.olap).map_err(resm_error)?;
            Ok(hits.iter().map(|o| format!("{o}\n")).collect())
        }
        "area" => {
            let gids: BTreeSet<GeometryId> = arg.split(',').map(|g| GeometryId::new(g.trim())).collect();
            let a = aggregate::area_total(&gids, |g| c.geometry(g)).map_err(aggregate_error)?;
            Ok(format_real(a) + "\n")
        }
        "max_l" => interval_kind(IntervalAggregate::MaxL),
        "min_l" => interval_kind(IntervalAggregate::MinL),
        "avg_l" => interval_kind(IntervalAggregate::AvgL),
        "timespan_l" => interval_kind(IntervalAggregate::TimespanL),
        "time_count" => instant_kind(InstantAggregate::Count),
        "time_max" => instant_kind(InstantAggregate::Max),
        "time_min" => instant_kind(InstantAggregate::Min),
        "timespan" => instant_kind(InstantAggregate::Timespan),
        other => Err(CliError::Domain(format!("unknown query function {other:?}; {USAGE}"))),
    }
}

/// Runs a parsed command line. `detect --out` writes the file and returns
/// an empty string.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let catalog = cli.catalog.as_deref();
    match &cli.command {
        Command::Validate { moft } => cmd_validate(catalog, moft.as_deref()),
        Command::Detect { moft, out } => {
            let text = cmd_detect(catalog, moft)?;
            match out {
                None => Ok(text),
                Some(p) => {
                    let mut f = File::create(p).map_err(|source| CliError::Io { path: show(p), source })?;
                    f.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: show(p), source })?;
                    Ok(String::new())
                }
            }
        }
        Command::Graph { smmoft, oid, asm } => cmd_graph(catalog, smmoft, oid, *asm),
        Command::Query { smmoft, expression } => cmd_query(catalog, smmoft, expression),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(&cli)
}
