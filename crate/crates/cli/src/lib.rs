//! Command-line front end for the spare-capacity analyzer.
//!
//! Every command returns an [`Outcome`]: the text to print and an exit code.
//! Exit codes depend only on the report a command produces.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use pvcap_core::analysis::{
    analyze_crash, component_upper_bound, eliminate_deadlocks, find_deadlocks, CrashReport,
    CrashScenario, Deadlock, VertexReport,
};
use pvcap_core::oracle::{count_path_components, OracleError, DEFAULT_CAP};
use pvcap_core::pv_lang::generate_threshold_program;
use pvcap_core::semantics::Interval;
use pvcap_core::{
    analyze, parse_program, serialize_program, AnalysisReport, AnalyzeOptions, Box,
    ConnectivityClass, Program, Spare, StateSpace, Vertex,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_DEADLOCK: i32 = 2;
pub const EXIT_CRITICAL: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;
pub const EXIT_OVERFLOW: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "pvcap",
    version,
    about = "Spare-capacity analysis of PV programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spare capacity, deadlocks, critical vertices and a path-component bound.
    Analyze {
        file: PathBuf,
        /// Comma-separated coordinates, or `origin`.
        #[arg(long)]
        source: Option<String>,
        /// Comma-separated coordinates, or `top`.
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        eliminate: bool,
        #[arg(long)]
        per_vertex: bool,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Deadlocks and their doomed boxes.
    Deadlocks {
        file: PathBuf,
        #[arg(long)]
        eliminate: bool,
    },
    /// Count directed path classes by enumeration and compare with the bound.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        max_paths: usize,
    },
    /// Spare capacity after a thread stops for good.
    Crash {
        file: PathBuf,
        #[arg(long)]
        thread: String,
        #[arg(long)]
        after: usize,
        /// Target in the space without the crashed thread.
        #[arg(long)]
        target: Option<String>,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Threshold program with the given capacities.
    Generate {
        #[arg(long)]
        threads: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        capacities: Vec<u32>,
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub text: String,
}

/// Parses `args`, runs the command and writes its output. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(out) => {
            print!("{}", out.text);
            out.code
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

pub fn run(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Analyze {
            file,
            source,
            target,
            eliminate,
            per_vertex,
            json,
        } => {
            let program = load(file)?;
            let tops = program.tops();
            let opts = AnalyzeOptions {
                source: source
                    .as_deref()
                    .map(|s| parse_vertex(s, &tops))
                    .transpose()?,
                target: target
                    .as_deref()
                    .map(|s| parse_vertex(s, &tops))
                    .transpose()?,
                eliminate: *eliminate,
                per_vertex: *per_vertex,
            };
            let report = analyze(&program, &opts)?;
            let doc = ReportJson::from_report(&report);
            if let Some(path) = json {
                write_json(path, &doc)?;
            }
            Ok(Outcome {
                code: analyze_exit_code(&doc),
                text: render_report(&doc),
            })
        }
        Command::Deadlocks { file, eliminate } => deadlocks(&load(file)?, *eliminate),
        Command::Oracle {
            file,
            source,
            target,
            max_paths,
        } => {
            let program = load(file)?;
            let tops = program.tops();
            let source = parse_vertex(source, &tops)?;
            let target = parse_vertex(target, &tops)?;
            let doc = oracle(&program, &source, &target, *max_paths)?;
            Ok(Outcome {
                code: oracle_exit_code(&doc),
                text: render_oracle(&doc),
            })
        }
        Command::Crash {
            file,
            thread,
            after,
            target,
            json,
        } => {
            let program = load(file)?;
            let s = StateSpace::new(&program);
            let j = coordinate_of(&s, &program, thread)?;
            let t = match target {
                Some(t) => {
                    let mut tops = s.tops().to_vec();
                    tops.remove(j);
                    Some(parse_vertex(t, &tops)?)
                }
                None => None,
            };
            let scenario = CrashScenario {
                thread: j,
                after_step: *after,
            };
            let crash = analyze_crash(&s, scenario, t.as_ref())?;
            let report = analyze(&program, &AnalyzeOptions::default())?;
            let mut doc = ReportJson::from_report(&report);
            doc.crash = Some(CrashJson::new(&s, &crash));
            if let Some(path) = json {
                write_json(path, &doc)?;
            }
            let c = doc.crash.as_ref().expect("crash section set");
            Ok(Outcome {
                code: crash_exit_code(c),
                text: render_crash(c),
            })
        }
        Command::Generate {
            threads,
            capacities,
            output,
        } => {
            let program = generate_threshold_program(*threads, capacities)?;
            let text = serialize_program(&program);
            match output {
                Some(path) => {
                    std::fs::write(path, &text)
                        .with_context(|| format!("writing {}", path.display()))?;
                    Ok(Outcome {
                        code: EXIT_OK,
                        text: String::new(),
                    })
                }
                None => Ok(Outcome {
                    code: EXIT_OK,
                    text,
                }),
            }
        }
    }
}

fn load(path: &Path) -> Result<Program> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_program(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_json(path: &Path, doc: &ReportJson) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Comma-separated coordinates, `origin` or `top`, checked against `tops`.
pub fn parse_vertex(text: &str, tops: &[usize]) -> Result<Vertex> {
    let coords: Vec<usize> = match text.trim() {
        "origin" => vec![0; tops.len()],
        "top" => tops.to_vec(),
        t => t
            .trim_matches(|c| c == '(' || c == ')')
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<usize>()
                    .with_context(|| format!("bad coordinate `{}` in `{text}`", x.trim()))
            })
            .collect::<Result<_>>()?,
    };
    if coords.len() != tops.len() {
        bail!(
            "vertex `{text}` has {} coordinates, expected {}",
            coords.len(),
            tops.len()
        );
    }
    if let Some(j) = (0..tops.len()).find(|&j| coords[j] > tops[j]) {
        bail!("coordinate {} of `{text}` exceeds {}", j + 1, tops[j]);
    }
    Ok(Vertex(coords))
}

fn coordinate_of(s: &StateSpace, program: &Program, name: &str) -> Result<usize> {
    let idx = program
        .thread_index(name)
        .with_context(|| format!("no thread named `{name}`"))?;
    (0..s.dim())
        .find(|&j| s.thread_id(j) == idx)
        .with_context(|| format!("thread `{name}` has no actions"))
}

fn thread_names(s: &StateSpace, coords: &[usize]) -> Vec<String> {
    coords
        .iter()
        .map(|&j| s.thread_name(j).to_string())
        .collect()
}

fn resource_names(s: &StateSpace, rs: &[usize]) -> Vec<String> {
    rs.iter().map(|&r| s.resource_name(r).to_string()).collect()
}

mod spare_repr {
    use pvcap_core::Spare;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Finite(u32),
        Word(String),
    }

    pub fn serialize<S: Serializer>(v: &Spare, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Spare::Finite(k) => Repr::Finite(*k),
            Spare::Infinite => Repr::Word("inf".into()),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Spare, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Finite(k) => Ok(Spare::Finite(k)),
            Repr::Word(w) if w == "inf" => Ok(Spare::Infinite),
            Repr::Word(w) => Err(D::Error::custom(format!(
                "expected a number or \"inf\", got {w:?}"
            ))),
        }
    }

    pub mod opt {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<Spare>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => super::serialize(x, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Spare>, D::Error> {
            #[derive(Deserialize)]
            struct W(#[serde(with = "super")] Spare);
            Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectivityJson {
    /// `exactly`, `contractible` or `empty`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
}

impl ConnectivityJson {
    pub fn new(c: ConnectivityClass) -> Self {
        let (kind, k) = match c {
            ConnectivityClass::Empty => ("empty", None),
            ConnectivityClass::Contractible => ("contractible", None),
            ConnectivityClass::Exactly(k) => ("exactly", Some(k)),
        };
        ConnectivityJson {
            kind: kind.into(),
            k,
        }
    }

    pub fn class(&self) -> Option<ConnectivityClass> {
        match (self.kind.as_str(), self.k) {
            ("empty", None) => Some(ConnectivityClass::Empty),
            ("contractible", None) => Some(ConnectivityClass::Contractible),
            ("exactly", Some(k)) => Some(ConnectivityClass::Exactly(k)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxJson {
    pub low: Vec<usize>,
    pub high: Vec<usize>,
    pub low_closed: Vec<bool>,
    pub high_closed: Vec<bool>,
}

impl BoxJson {
    pub fn new(b: &Box) -> Self {
        let f = |g: fn(&Interval) -> usize| b.spans.iter().map(g).collect();
        let c = |g: fn(&Interval) -> bool| b.spans.iter().map(g).collect();
        BoxJson {
            low: f(|i| i.lo),
            high: f(|i| i.hi),
            low_closed: c(|i| i.lo_closed),
            high_closed: c(|i| i.hi_closed),
        }
    }

    pub fn to_box(&self) -> Box {
        Box {
            spans: (0..self.low.len())
                .map(|j| Interval {
                    lo: self.low[j],
                    hi: self.high[j],
                    lo_closed: self.low_closed[j],
                    hi_closed: self.high_closed[j],
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeadlockJson {
    pub vertex: Vec<usize>,
    pub requested: Vec<String>,
    /// Per requested resource, the threads holding it.
    pub holders: Vec<Vec<String>>,
    pub primary: bool,
}

impl DeadlockJson {
    fn new(s: &StateSpace, d: &Deadlock) -> Self {
        DeadlockJson {
            vertex: d.vertex.0.clone(),
            requested: resource_names(s, &d.requested),
            holders: d.holders.iter().map(|h| thread_names(s, h)).collect(),
            primary: d.primary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalJson {
    pub vertex: Vec<usize>,
    pub requested: Vec<String>,
    pub resource: Option<String>,
    /// Thread sets along which the future link splits.
    pub exits: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalRegionJson {
    pub vertex: Vec<usize>,
    pub region: BoxJson,
    pub exit_target: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRowJson {
    pub vertex: Vec<usize>,
    pub consumption: Vec<u32>,
    pub demand: Vec<u32>,
    #[serde(with = "spare_repr::opt")]
    pub spare: Option<Spare>,
    pub flags: Vec<String>,
}

impl VertexRowJson {
    fn new(r: &VertexReport) -> Self {
        let f = r.flags;
        let flags = [
            (f.forbidden, "forbidden"),
            (f.deadlock, "deadlock"),
            (f.critical, "critical"),
            (f.doomed, "doomed"),
            (f.unreachable, "unreachable"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, n)| n.to_string())
        .collect();
        VertexRowJson {
            vertex: r.vertex.0.clone(),
            consumption: r.consumption.clone(),
            demand: r.demand.clone(),
            spare: r.spare,
            flags,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrashJson {
    pub thread: String,
    pub after: usize,
    pub held: Vec<String>,
    pub last_lock: usize,
    #[serde(with = "spare_repr")]
    pub kappa_before: Spare,
    pub witness_before: Option<Vec<usize>>,
    #[serde(with = "spare_repr")]
    pub kappa_after: Spare,
    pub witness_after: Option<Vec<usize>>,
    pub inequality_holds: bool,
}

impl CrashJson {
    pub fn new(s: &StateSpace, c: &CrashReport) -> Self {
        CrashJson {
            thread: s.thread_name(c.scenario.thread).to_string(),
            after: c.scenario.after_step,
            held: resource_names(s, &c.held_locks),
            last_lock: c.last_lock,
            kappa_before: c.kappa_before,
            witness_before: c.witness_before.as_ref().map(|v| v.0.clone()),
            kappa_after: c.kappa_after,
            witness_after: c.witness_after.as_ref().map(|v| v.0.clone()),
            inequality_holds: c.inequality_holds(),
        }
    }
}

/// Serialized analysis report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportJson {
    pub threads: Vec<String>,
    pub resources: Vec<String>,
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    #[serde(with = "spare_repr")]
    pub global_spare: Spare,
    pub witness: Option<Vec<usize>>,
    pub connectivity: ConnectivityJson,
    pub deadlocks: Vec<DeadlockJson>,
    pub doomed_boxes: Vec<BoxJson>,
    #[serde(default)]
    pub eliminated_boxes: Vec<BoxJson>,
    #[serde(default)]
    pub elimination_rounds: usize,
    pub critical: Vec<CriticalJson>,
    pub critical_regions: Vec<CriticalRegionJson>,
    #[serde(default)]
    pub critical_shadows: Vec<BoxJson>,
    pub component_bound: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_vertex: Option<Vec<VertexRowJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crash: Option<CrashJson>,
}

impl ReportJson {
    pub fn from_report(r: &AnalysisReport) -> Self {
        let s = &r.space;
        let boxes = |bs: &[Box]| bs.iter().map(BoxJson::new).collect();
        ReportJson {
            threads: (0..s.dim()).map(|j| s.thread_name(j).to_string()).collect(),
            resources: (0..s.resource_count())
                .map(|i| s.resource_name(i).to_string())
                .collect(),
            source: r.source.0.clone(),
            target: r.target.0.clone(),
            global_spare: r.global_spare,
            witness: r.witness.as_ref().map(|v| v.0.clone()),
            connectivity: ConnectivityJson::new(r.connectivity),
            deadlocks: r
                .deadlocks
                .iter()
                .map(|d| DeadlockJson::new(s, d))
                .collect(),
            doomed_boxes: boxes(&r.doomed),
            eliminated_boxes: boxes(&r.eliminated),
            elimination_rounds: r.elimination_rounds,
            critical: r
                .critical
                .iter()
                .map(|c| CriticalJson {
                    vertex: c.vertex.0.clone(),
                    requested: resource_names(s, &c.requested),
                    resource: c.resource.map(|i| s.resource_name(i).to_string()),
                    exits: c.exits.iter().map(|e| thread_names(s, e)).collect(),
                })
                .collect(),
            critical_regions: r
                .critical_regions
                .iter()
                .map(|c| CriticalRegionJson {
                    vertex: c.vertex.0.clone(),
                    region: BoxJson::new(&c.region),
                    exit_target: c.exit_target.as_ref().map(|v| v.0.clone()),
                })
                .collect(),
            critical_shadows: boxes(&r.critical_shadows),
            component_bound: r.component_bound,
            per_vertex: (!r.per_vertex.is_empty())
                .then(|| r.per_vertex.iter().map(VertexRowJson::new).collect()),
            crash: None,
        }
    }
}

pub fn analyze_exit_code(doc: &ReportJson) -> i32 {
    if !doc.deadlocks.is_empty() {
        EXIT_DEADLOCK
    } else if !doc.critical.is_empty() || doc.global_spare < Spare::Finite(2) {
        EXIT_CRITICAL
    } else {
        EXIT_OK
    }
}

pub fn crash_exit_code(c: &CrashJson) -> i32 {
    if c.inequality_holds {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn vtx(c: &[usize]) -> String {
    Vertex(c.to_vec()).to_string()
}

fn spare_text(s: Spare) -> String {
    s.to_string()
}

fn at(w: &Option<Vec<usize>>) -> String {
    w.as_ref()
        .map(|c| format!(" at {}", vtx(c)))
        .unwrap_or_default()
}

fn box_text(b: &BoxJson) -> String {
    b.to_box().to_string()
}

pub fn render_report(doc: &ReportJson) -> String {
    let mut o = String::new();
    let _ = writeln!(
        o,
        "threads: {}; resources: {}",
        doc.threads.join(" "),
        doc.resources.join(" ")
    );
    let _ = writeln!(o, "window: {} -> {}", vtx(&doc.source), vtx(&doc.target));
    let _ = writeln!(
        o,
        "global spare capacity: {}{}",
        spare_text(doc.global_spare),
        at(&doc.witness)
    );
    if let Some(c) = doc.connectivity.class() {
        let _ = writeln!(o, "path spaces are {c}");
    }
    let _ = writeln!(o, "deadlocks: {}", doc.deadlocks.len());
    for d in &doc.deadlocks {
        let _ = writeln!(
            o,
            "  {} requests {}{}",
            vtx(&d.vertex),
            d.requested.join(", "),
            if d.primary { "" } else { " (induced)" }
        );
    }
    for b in &doc.doomed_boxes {
        let _ = writeln!(o, "  doomed {}", box_text(b));
    }
    if doc.elimination_rounds > 0 {
        let _ = writeln!(o, "eliminated in {} rounds:", doc.elimination_rounds);
        for b in &doc.eliminated_boxes {
            let _ = writeln!(o, "  {}", box_text(b));
        }
    }
    let _ = writeln!(o, "critical vertices: {}", doc.critical.len());
    for (c, r) in doc.critical.iter().zip(&doc.critical_regions) {
        let exits: Vec<String> = c
            .exits
            .iter()
            .map(|e| format!("{{{}}}", e.join(",")))
            .collect();
        let _ = writeln!(
            o,
            "  {} on {}, region {}, exits {}",
            vtx(&c.vertex),
            c.resource.as_deref().unwrap_or("-"),
            box_text(&r.region),
            exits.join(" ")
        );
    }
    for b in &doc.critical_shadows {
        let _ = writeln!(o, "  shadow {}", box_text(b));
    }
    let _ = writeln!(
        o,
        "path components from source: at most {}",
        doc.component_bound
    );
    if let Some(rows) = &doc.per_vertex {
        let _ = writeln!(o, "P-vertices:");
        for r in rows {
            let spare = r.spare.map(spare_text).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                o,
                "  {} c={:?} d={:?} spare={} {}",
                vtx(&r.vertex),
                r.consumption,
                r.demand,
                spare,
                r.flags.join(",")
            );
        }
    }
    o
}

fn deadlocks(program: &Program, eliminate: bool) -> Result<Outcome> {
    let s = StateSpace::new(program);
    let ds = find_deadlocks(&s);
    let mut o = String::new();
    let _ = writeln!(o, "deadlocks: {}", ds.len());
    for d in &ds {
        let j = DeadlockJson::new(&s, d);
        let _ = writeln!(
            o,
            "  {} requests {}",
            vtx(&j.vertex),
            j.requested.join(", ")
        );
    }
    if eliminate {
        let e = eliminate_deadlocks(&s)?;
        for b in &e.doomed {
            let _ = writeln!(o, "  doomed {b}");
        }
        let _ = writeln!(o, "eliminated in {} rounds:", e.rounds);
        for b in &e.eliminated {
            let _ = writeln!(o, "  {b}");
        }
    }
    Ok(Outcome {
        code: if ds.is_empty() {
            EXIT_OK
        } else {
            EXIT_DEADLOCK
        },
        text: o,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleJson {
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    /// `None` when enumeration overflowed.
    pub paths: Option<usize>,
    pub classes: Option<usize>,
    pub max_paths: usize,
    pub bound: u64,
}

pub fn oracle(
    program: &Program,
    source: &Vertex,
    target: &Vertex,
    cap: usize,
) -> Result<OracleJson> {
    let s = StateSpace::new(program);
    let bound = if s.vertex_allowed(source)? && s.vertex_allowed(target)? {
        component_upper_bound(&s, source, target)?
    } else {
        0
    };
    let (paths, classes) = match count_path_components(&s, source, target, cap) {
        Ok(c) => (Some(c.path_count), Some(c.class_count)),
        Err(OracleError::Overflow { .. }) => (None, None),
        Err(OracleError::Forbidden(_)) => (Some(0), Some(0)),
        Err(e) => return Err(e.into()),
    };
    Ok(OracleJson {
        source: source.0.clone(),
        target: target.0.clone(),
        paths,
        classes,
        max_paths: cap,
        bound,
    })
}

pub fn oracle_exit_code(doc: &OracleJson) -> i32 {
    match doc.classes {
        None => EXIT_OVERFLOW,
        Some(c) if c as u64 > doc.bound => EXIT_VIOLATION,
        Some(_) => EXIT_OK,
    }
}

pub fn render_oracle(doc: &OracleJson) -> String {
    let mut o = String::new();
    let _ = writeln!(
        o,
        "source: {}; target: {}",
        vtx(&doc.source),
        vtx(&doc.target)
    );
    match (doc.paths, doc.classes) {
        (Some(p), Some(c)) => {
            let _ = writeln!(o, "paths: {p}");
            let _ = writeln!(o, "classes: {c}");
            let _ = writeln!(o, "bound: {}", doc.bound);
            let ok = c as u64 <= doc.bound;
            let _ = writeln!(o, "bound holds: {}", if ok { "yes" } else { "NO" });
        }
        _ => {
            let _ = writeln!(o, "paths: more than {} (overflow)", doc.max_paths);
            let _ = writeln!(o, "bound: {}", doc.bound);
        }
    }
    o
}

pub fn render_crash(c: &CrashJson) -> String {
    let mut o = String::new();
    let held = if c.held.is_empty() {
        "nothing".to_string()
    } else {
        c.held.join(", ")
    };
    let _ = writeln!(
        o,
        "crash of {} after step {}, holding {}",
        c.thread, c.after, held
    );
    let _ = writeln!(o, "last lock: {}", c.last_lock);
    let _ = writeln!(
        o,
        "kappa before: {}{}",
        spare_text(c.kappa_before),
        at(&c.witness_before)
    );
    let _ = writeln!(
        o,
        "kappa after: {}{}",
        spare_text(c.kappa_after),
        at(&c.witness_after)
    );
    let _ = writeln!(
        o,
        "kappa after >= kappa before - 1: {}",
        if c.inequality_holds {
            "holds"
        } else {
            "VIOLATED"
        }
    );
    o
}
