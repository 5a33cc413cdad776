//! PV programs: resources with capacities and linear threads of lock/release actions.
//!
//! Text format, one declaration per line:
//!
//! ```text
//! # comment
//! resource a capacity 1
//! resource b capacity 1
//! thread T1: P(a) P(b) V(b) V(a)
//! thread T2: P(b) P(a) V(a) V(b)
//! ```
//!
//! Thread positions are 1-based; position 0 (start) and `l(j)+1` (final)
//! carry no action.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionKind {
    Lock,
    Release,
}

/// A single `P(r)` or `V(r)` command. `resource` indexes [`Program::resources`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Action {
    pub kind: ActionKind,
    pub resource: usize,
}

impl Action {
    pub fn lock(resource: usize) -> Self {
        Action {
            kind: ActionKind::Lock,
            resource,
        }
    }

    pub fn release(resource: usize) -> Self {
        Action {
            kind: ActionKind::Release,
            resource,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceDecl {
    pub name: String,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thread {
    pub name: String,
    /// `actions[k - 1]` is the command at position `k`.
    pub actions: Vec<Action>,
}

impl Thread {
    /// Number of commands, `l(j)`.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Command at a 1-based position, `None` at 0 and at the final coordinate.
    pub fn action_at(&self, position: usize) -> Option<Action> {
        if position == 0 {
            None
        } else {
            self.actions.get(position - 1).copied()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub resources: Vec<ResourceDecl>,
    pub threads: Vec<Thread>,
}

impl Program {
    pub fn thread_count(&self) -> usize {
        self.threads.len()
    }

    pub fn resource_count(&self) -> usize {
        self.resources.len()
    }

    pub fn resource_index(&self, name: &str) -> Option<usize> {
        self.resources.iter().position(|r| r.name == name)
    }

    pub fn thread_index(&self, name: &str) -> Option<usize> {
        self.threads.iter().position(|t| t.name == name)
    }

    pub fn capacities(&self) -> Vec<u32> {
        self.resources.iter().map(|r| r.capacity).collect()
    }

    /// Final coordinate `l(j)+1` of every thread.
    pub fn tops(&self) -> Vec<usize> {
        self.threads.iter().map(|t| t.len() + 1).collect()
    }
}

/// A broken well-formedness rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    NoThreads,
    ZeroCapacity { resource: String },
    DuplicateResource { resource: String },
    DuplicateThread { thread: String },
    UndeclaredResource { index: usize },
    DoubleLock { resource: String },
    ReleaseWithoutLock { resource: String },
    HeldAtEnd { resource: String },
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::NoThreads => write!(f, "program declares no threads"),
            Rule::ZeroCapacity { resource } => {
                write!(f, "capacity must be ≥ 1 (resource {resource})")
            }
            Rule::DuplicateResource { resource } => write!(f, "duplicate resource {resource}"),
            Rule::DuplicateThread { thread } => write!(f, "duplicate thread {thread}"),
            Rule::UndeclaredResource { index } => write!(f, "undeclared resource #{index}"),
            Rule::DoubleLock { resource } => write!(f, "double lock of {resource}"),
            Rule::ReleaseWithoutLock { resource } => {
                write!(f, "release of {resource} without a matching lock")
            }
            Rule::HeldAtEnd { resource } => write!(f, "{resource} still held at thread end"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub thread: Option<usize>,
    pub position: Option<usize>,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.thread, self.position) {
            (Some(t), Some(p)) => write!(f, "thread #{t}, position {p}: {}", self.rule),
            (Some(t), None) => write!(f, "thread #{t}: {}", self.rule),
            _ => write!(f, "{}", self.rule),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks capacities, name uniqueness and per-resource Lock/Release alternation.
pub fn validate_program(program: &Program) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |thread, position, rule| {
        violations.push(Violation {
            thread,
            position,
            rule,
        })
    };

    if program.threads.is_empty() {
        push(None, None, Rule::NoThreads);
    }
    let mut seen = HashSet::new();
    for r in &program.resources {
        if r.capacity == 0 {
            push(
                None,
                None,
                Rule::ZeroCapacity {
                    resource: r.name.clone(),
                },
            );
        }
        if !seen.insert(r.name.as_str()) {
            push(
                None,
                None,
                Rule::DuplicateResource {
                    resource: r.name.clone(),
                },
            );
        }
    }
    let mut seen = HashSet::new();
    for (j, t) in program.threads.iter().enumerate() {
        if !seen.insert(t.name.as_str()) {
            push(
                Some(j),
                None,
                Rule::DuplicateThread {
                    thread: t.name.clone(),
                },
            );
        }
    }

    let nres = program.resources.len();
    for (j, t) in program.threads.iter().enumerate() {
        let mut held = vec![false; nres];
        for (k, a) in t.actions.iter().enumerate() {
            let position = k + 1;
            if a.resource >= nres {
                push(
                    Some(j),
                    Some(position),
                    Rule::UndeclaredResource { index: a.resource },
                );
                continue;
            }
            let resource = program.resources[a.resource].name.clone();
            match (a.kind, held[a.resource]) {
                (ActionKind::Lock, true) => {
                    push(Some(j), Some(position), Rule::DoubleLock { resource })
                }
                (ActionKind::Release, false) => push(
                    Some(j),
                    Some(position),
                    Rule::ReleaseWithoutLock { resource },
                ),
                (ActionKind::Lock, false) => held[a.resource] = true,
                (ActionKind::Release, true) => held[a.resource] = false,
            }
        }
        for (r, h) in held.iter().enumerate() {
            if *h {
                push(
                    Some(j),
                    None,
                    Rule::HeldAtEnd {
                        resource: program.resources[r].name.clone(),
                    },
                );
            }
        }
    }
    ValidationReport { violations }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: undeclared resource `{name}`")]
    UndeclaredResource {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("line {line}: duplicate {what} `{name}`")]
    Duplicate {
        line: usize,
        what: &'static str,
        name: String,
    },
    #[error("invalid program: {0}")]
    Invalid(ValidationReport),
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits a line into whitespace-separated words with their 1-based columns.
fn words(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, w)| (line[..byte].chars().count() + 1, w))
        .collect()
}

/// Parses the PV text format and validates the result.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut resources: Vec<ResourceDecl> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut threads: Vec<Thread> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let body = raw.split('#').next().unwrap_or("");
        let toks = words(body);
        let Some(&(col, keyword)) = toks.first() else {
            continue;
        };
        let syntax = |column: usize, message: String| ParseError::Syntax {
            line,
            column,
            message,
        };
        match keyword {
            "resource" => {
                if toks.len() != 4 || toks[2].1 != "capacity" {
                    return Err(syntax(
                        col,
                        "expected `resource <name> capacity <int>`".into(),
                    ));
                }
                let (ncol, name) = toks[1];
                if !is_identifier(name) {
                    return Err(syntax(ncol, format!("invalid resource name `{name}`")));
                }
                let (ccol, cap) = toks[3];
                let capacity: u32 = cap
                    .parse()
                    .map_err(|_| syntax(ccol, format!("invalid capacity `{cap}`")))?;
                if index.contains_key(name) {
                    return Err(ParseError::Duplicate {
                        line,
                        what: "resource",
                        name: name.to_string(),
                    });
                }
                index.insert(name.to_string(), resources.len());
                resources.push(ResourceDecl {
                    name: name.to_string(),
                    capacity,
                });
            }
            "thread" => {
                let (ncol, head) = *toks
                    .get(1)
                    .ok_or_else(|| syntax(col, "expected `thread <name>: <actions>`".into()))?;
                // The colon may be glued to the name or stand alone.
                let (name, rest_start) = match head.strip_suffix(':') {
                    Some(n) => (n, 2),
                    None => match toks.get(2) {
                        Some((_, ":")) => (head, 3),
                        _ => return Err(syntax(ncol, "expected `:` after thread name".into())),
                    },
                };
                if !is_identifier(name) {
                    return Err(syntax(ncol, format!("invalid thread name `{name}`")));
                }
                if threads.iter().any(|t| t.name == name) {
                    return Err(ParseError::Duplicate {
                        line,
                        what: "thread",
                        name: name.to_string(),
                    });
                }
                let mut actions = Vec::new();
                for &(acol, tok) in &toks[rest_start..] {
                    let kind = match tok.as_bytes().first() {
                        Some(b'P') => ActionKind::Lock,
                        Some(b'V') => ActionKind::Release,
                        _ => {
                            return Err(syntax(
                                acol,
                                format!("expected P(..) or V(..), got `{tok}`"),
                            ))
                        }
                    };
                    let inner = tok[1..]
                        .strip_prefix('(')
                        .and_then(|s| s.strip_suffix(')'))
                        .filter(|s| is_identifier(s))
                        .ok_or_else(|| syntax(acol, format!("malformed action `{tok}`")))?;
                    let resource =
                        *index
                            .get(inner)
                            .ok_or_else(|| ParseError::UndeclaredResource {
                                line,
                                column: acol + 2,
                                name: inner.to_string(),
                            })?;
                    actions.push(Action { kind, resource });
                }
                threads.push(Thread {
                    name: name.to_string(),
                    actions,
                });
            }
            other => {
                return Err(syntax(col, format!("unknown declaration `{other}`")));
            }
        }
    }

    let program = Program { resources, threads };
    let report = validate_program(&program);
    if report.is_valid() {
        Ok(program)
    } else {
        Err(ParseError::Invalid(report))
    }
}

/// Canonical text form; `parse_program` inverts it on valid programs.
pub fn serialize_program(program: &Program) -> String {
    let mut out = String::new();
    for r in &program.resources {
        out.push_str(&format!("resource {} capacity {}\n", r.name, r.capacity));
    }
    for t in &program.threads {
        out.push_str("thread ");
        out.push_str(&t.name);
        out.push(':');
        for a in &t.actions {
            let letter = match a.kind {
                ActionKind::Lock => 'P',
                ActionKind::Release => 'V',
            };
            out.push_str(&format!(
                " {letter}({})",
                program.resources[a.resource].name
            ));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("need at least one resource")]
    NoResources,
    #[error("resource count {resources} must be smaller than thread count {threads}")]
    TooManyResources { resources: usize, threads: usize },
    #[error("capacity {capacity} of r{index} must lie in [1, {threads})")]
    CapacityOutOfRange {
        index: usize,
        capacity: u32,
        threads: usize,
    },
    #[error("capacity sum {sum} must exceed (l-1)·n = {bound}")]
    SumTooSmall { sum: u64, bound: u64 },
}

/// Threshold program on `n` threads whose spare capacity is `Σκ − (l−1)n`.
///
/// Resources `r1..rl` are dealt column by column: `P(r1)` fills the first
/// column top-down until `κ1` slots are used, then `P(r2)` continues in the
/// remaining slots and wraps to the top of the next column, and so on up to
/// `r(l-1)`; the rest of column `l−1` takes `P(rl)`. Column `l` gets the one
/// resource each thread is still missing, and every thread then releases in
/// reverse order.
pub fn generate_threshold_program(
    threads: usize,
    capacities: &[u32],
) -> Result<Program, GenerateError> {
    let l = capacities.len();
    let n = threads;
    if l == 0 {
        return Err(GenerateError::NoResources);
    }
    if l >= n {
        return Err(GenerateError::TooManyResources {
            resources: l,
            threads: n,
        });
    }
    for (i, &k) in capacities.iter().enumerate() {
        if k == 0 || k as usize >= n {
            return Err(GenerateError::CapacityOutOfRange {
                index: i + 1,
                capacity: k,
                threads: n,
            });
        }
    }
    let sum: u64 = capacities.iter().map(|&k| k as u64).sum();
    let bound = (l as u64 - 1) * n as u64;
    if sum <= bound {
        return Err(GenerateError::SumTooSmall { sum, bound });
    }

    // grid[row][col] = resource index locked by thread `row` in column `col`
    let mut grid = vec![vec![usize::MAX; l]; n];
    let mut slot = 0usize;
    for (res, &k) in capacities.iter().enumerate().take(l - 1) {
        for _ in 0..k {
            grid[slot % n][slot / n] = res;
            slot += 1;
        }
    }
    while slot < (l - 1) * n {
        grid[slot % n][slot / n] = l - 1;
        slot += 1;
    }
    for row in grid.iter_mut() {
        let missing = (0..l)
            .find(|r| !row[..l - 1].contains(r))
            .expect("each row misses exactly one resource");
        row[l - 1] = missing;
    }

    let resources = capacities
        .iter()
        .enumerate()
        .map(|(i, &k)| ResourceDecl {
            name: format!("r{}", i + 1),
            capacity: k,
        })
        .collect();
    let threads = grid
        .into_iter()
        .enumerate()
        .map(|(j, row)| {
            let mut actions: Vec<Action> = row.iter().map(|&r| Action::lock(r)).collect();
            actions.extend(row.iter().rev().map(|&r| Action::release(r)));
            Thread {
                name: format!("T{}", j + 1),
                actions,
            }
        })
        .collect();
    Ok(Program { resources, threads })
}
