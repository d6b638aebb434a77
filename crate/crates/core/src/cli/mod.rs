//! Command-line front end. [`run`] does the work and returns a [`Report`];
//! the binary prints it and exits with its status.

mod export;

pub use export::{execution_json, executions_json, to_dot};

use std::collections::BTreeSet;
use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::{
    check_sound_rr, check_weak, complete_search, crucial_sets, minimal_crucial_sets, redundancy_witnesses,
    unsafety_witness, AnalysisError, EffectKind, Exclusions, MetaVerdict, Subject, SweepBound,
};
use crate::corpus;
use crate::execution::{candidates, eval_predicate, load_execution, CandidateOptions, ExecError, Execution, RawExecution};
use crate::frontend::{parse_program, Expectation, Program};
use crate::models::{
    behaviours, builtin_model, check_assertion, check_consistent, is_consistent, parse_model, BehaviourOptions,
    ExcuseMode, MemoryModel, ModelError, Verdict, BUILTIN_MODELS,
};
use crate::pretrace::{enumerate_pretraces, PreTrace, PretraceError, PretraceOptions};
use crate::relalg::RelError;
use crate::transform::{
    effect_safe, make_effects, parse_effects, transformation_safe, SafetyOptions, SafetyReport, TransformError,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Pretrace(#[from] PretraceError),
    #[error(transparent)]
    Relation(#[from] RelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Parser)]
#[command(name = "memtrans", version, about = "Litmus-test consistency and transformation safety under axiomatic memory models")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every command.
#[derive(Clone, Debug, Args)]
pub struct RunConfig {
    /// Built-in model (sc, tso, sc_rr, sc_rr_ext, porf), bundled model, or model file.
    #[arg(long, short, global = true, default_value = "sc")]
    pub model: String,
    /// Cap on candidate executions per pre-trace, and on pre-traces per program.
    #[arg(long, global = true, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub limit: u64,
    /// Keep paths the branch filter would drop.
    #[arg(long, global = true)]
    pub no_filter: bool,
    /// Ignore `final` clauses.
    #[arg(long, global = true)]
    pub no_final: bool,
    /// Match branches by guard value rather than by guard text.
    #[arg(long, global = true)]
    pub semantic_guards: bool,
    /// Literal fence pattern (default).
    #[arg(long, global = true, conflicts_with = "frr_generalized")]
    pub strict: bool,
    /// Let the fence pattern start with `rb;mo?;hb?;rfe`.
    #[arg(long, global = true)]
    pub frr_generalized: bool,
    /// Judge `body \ a_rr` as a plain relational difference.
    #[arg(long, global = true)]
    pub pairwise: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads for parallel searches.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: Option<u64>,
    /// Check effects that let the target read values the source never writes.
    #[arg(long, global = true)]
    pub force: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: "sc".into(),
            limit: 1_000_000,
            no_filter: false,
            no_final: false,
            semantic_guards: false,
            strict: false,
            frr_generalized: false,
            pairwise: false,
            format: Format::Text,
            jobs: None,
            force: false,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the pre-traces of a litmus file with their branch choices.
    Pretraces { file: PathBuf },
    /// Partition candidate executions and tabulate outcomes.
    Executions {
        file: PathBuf,
        /// Only consistent executions in dot output.
        #[arg(long)]
        consistent: bool,
    },
    /// Evaluate a litmus assertion, or the consistency of a raw execution,
    /// against the file's expectations.
    Check { file: PathBuf },
    /// Check a transformation given as edits or as a second file.
    Safety {
        file: PathBuf,
        target: Option<PathBuf>,
        /// Edits such as "reorder R1 R2, eliminate W1".
        #[arg(long, short)]
        effect: Option<String>,
        /// Also try to build an unsafety witness from crucial sets.
        #[arg(long)]
        construct: bool,
    },
    /// Crucial read sets of a raw execution, or of the inconsistent
    /// candidates satisfying a litmus file's assertion.
    Crucial { file: PathBuf },
    /// Properties relating models.
    Meta {
        #[command(subcommand)]
        command: MetaCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum MetaCommand {
    /// Every execution `base` accepts, `weaker` accepts too.
    Weak {
        weaker: String,
        base: String,
        /// Files to search instead of the bundled corpus.
        files: Vec<PathBuf>,
    },
    /// Soundness of read-read reordering over all small programs.
    SoundRr {
        #[arg(long, default_value_t = 3)]
        threads: usize,
        #[arg(long, default_value_t = 6)]
        events: usize,
        #[arg(long, default_value_t = 3)]
        locations: usize,
    },
    /// Effects safe under `base` but unsafe under `model`.
    Complete {
        model: String,
        base: String,
        files: Vec<PathBuf>,
        /// Comma-separated effect kinds.
        #[arg(long, value_delimiter = ',', default_value = "reorder,reorder_rr,eliminate,inline")]
        effects: Vec<String>,
        #[arg(long)]
        exclude_write_elimination: bool,
    },
    /// Every ordered pair of rules has an execution violating the first only.
    Redundancy {
        /// Defaults to `--model`.
        model: Option<String>,
        files: Vec<PathBuf>,
    },
}

/// What a command produced.
#[derive(Clone, Debug)]
pub struct Report {
    /// 0 expectation met or property holds, 1 not met.
    pub status: i32,
    pub text: String,
    pub json: Value,
    pub graphs: Option<Vec<Execution>>,
}

impl Report {
    fn new(status: i32, text: String, json: Value) -> Self {
        Report { status, text, json, graphs: None }
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Text => Ok(self.text.clone()),
            Format::Json => Ok(serde_json::to_string_pretty(&self.json).expect("json values serialize") + "\n"),
            Format::Dot => match &self.graphs {
                Some(g) => Ok(to_dot(g)),
                None => Err(CliError::Usage("dot output is available for executions, check and crucial".into())),
            },
        }
    }
}

enum Input {
    Litmus(Program),
    Raw(Box<RawExecution>),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load_input(path: &Path) -> Result<Input, CliError> {
    let src = read(path)?;
    let parse_err = |message: String| CliError::Parse { path: path.to_path_buf(), message };
    if path.extension().is_some_and(|e| e == "exec") {
        return load_execution(&src).map(|r| Input::Raw(Box::new(r))).map_err(|e| parse_err(e.to_string()));
    }
    parse_program(&src).map(Input::Litmus).map_err(|e| parse_err(e.to_string()))
}

fn load_program(path: &Path) -> Result<Program, CliError> {
    match load_input(path)? {
        Input::Litmus(p) => Ok(p),
        Input::Raw(_) => Err(CliError::Usage(format!("{}: expected a litmus file", path.display()))),
    }
}

impl RunConfig {
    fn pretrace_options(&self) -> PretraceOptions {
        PretraceOptions { filter: !self.no_filter, final_reads: !self.no_final, limit: self.limit as usize }
    }

    fn candidate_options(&self) -> CandidateOptions {
        CandidateOptions { limit: self.limit as usize, ..Default::default() }
    }

    fn safety_options(&self) -> SafetyOptions {
        SafetyOptions {
            candidate_limit: self.limit as usize,
            pretraces: self.pretrace_options(),
            semantic_guards: self.semantic_guards,
            force: self.force,
        }
    }

    /// Resolves a model name or file and applies the evaluation flags.
    pub fn model_named(&self, spec: &str) -> Result<MemoryModel, CliError> {
        let mut m = if BUILTIN_MODELS.contains(&spec) {
            builtin_model(spec)?
        } else if corpus::MODELS.iter().any(|(n, _)| *n == spec) {
            corpus::model(spec)
        } else if Path::new(spec).is_file() {
            let path = Path::new(spec);
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
            parse_model(&read(path)?, stem).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })?
        } else {
            return Err(ModelError::UnknownModel(spec.to_string()).into());
        };
        if self.frr_generalized {
            m.patterns.frr_generalized = true;
        }
        if self.pairwise {
            m.excuse = ExcuseMode::Pairwise;
        }
        Ok(m)
    }
}

/// Runs one command, on a pool of `--jobs` workers when given.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let go = || dispatch(&cli.config, &cli.command);
    match cli.config.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(go),
        None => go(),
    }
}

fn dispatch(cfg: &RunConfig, cmd: &Command) -> Result<Report, CliError> {
    match cmd {
        Command::Pretraces { file } => pretraces_cmd(cfg, file),
        Command::Executions { file, consistent } => executions_cmd(cfg, file, *consistent),
        Command::Check { file } => check_cmd(cfg, file),
        Command::Safety { file, target, effect, construct } => {
            safety_cmd(cfg, file, target.as_deref(), effect.as_deref(), *construct)
        }
        Command::Crucial { file } => crucial_cmd(cfg, file),
        Command::Meta { command } => meta_cmd(cfg, command),
    }
}

fn pretraces_cmd(cfg: &RunConfig, file: &Path) -> Result<Report, CliError> {
    let program = load_program(file)?;
    let pts = enumerate_pretraces(&program, cfg.pretrace_options())?;
    let mut text = String::new();
    let mut list = Vec::new();
    for (k, p) in pts.iter().enumerate() {
        let branches: Vec<String> =
            p.branches().iter().map(|b| format!("{} ({}) {}", b.id, b.guard, if b.taken { "taken" } else { "not taken" })).collect();
        writeln!(text, "pre-trace {k}{}", if branches.is_empty() { String::new() } else { format!(": {}", branches.join(", ")) })
            .unwrap();
        for line in p.to_string().lines() {
            writeln!(text, "  {line}").unwrap();
        }
        let po: Vec<Value> =
            p.po().transitive_reduction().pairs().map(|(a, b)| json!([p.label(a), p.label(b)])).collect();
        list.push(json!({ "branches": p.branches(), "events": p.events(), "po": po }));
    }
    Ok(Report::new(0, text, json!({ "pretraces": list })))
}

fn all_candidates(cfg: &RunConfig, program: &Program, model: &MemoryModel, consistent_only: bool) -> Result<Vec<Execution>, CliError> {
    let mut out = Vec::new();
    for p in enumerate_pretraces(program, cfg.pretrace_options())? {
        for e in candidates(&Arc::new(p), cfg.candidate_options())? {
            if !consistent_only || is_consistent(model, &e)? {
                out.push(e);
            }
        }
    }
    Ok(out)
}

fn executions_cmd(cfg: &RunConfig, file: &Path, consistent_only: bool) -> Result<Report, CliError> {
    let model = cfg.model_named(&cfg.model)?;
    let program = match load_input(file)? {
        Input::Litmus(p) => p,
        Input::Raw(raw) => {
            let ok = is_consistent(&model, &raw.execution)?;
            let (c, i) = if ok { (1, 0) } else { (0, 1) };
            let text = format!("{}: {} under {}\n", raw.execution, if ok { "consistent" } else { "inconsistent" }, model.name);
            let json = json!({
                "model": model.name,
                "partition": { "consistent": c, "inconsistent": i },
                "executions": [execution_json(&raw.execution)],
            });
            let mut r = Report::new(0, text, json);
            r.graphs = Some(vec![raw.execution.clone()]);
            return Ok(r);
        }
    };
    let opts = BehaviourOptions { pretraces: cfg.pretrace_options(), candidate_limit: cfg.limit as usize, prune: false };
    let b = behaviours(&program, &model, opts)?;
    let mut text = format!(
        "{} pre-trace(s), {} candidates under {}: {} consistent, {} inconsistent\n",
        b.pretraces.len(),
        b.consistent + b.inconsistent,
        model.name,
        b.consistent,
        b.inconsistent
    );
    for row in &b.outcomes {
        let outcome = if row.outcome.0.is_empty() { "(no locals)".to_string() } else { row.outcome.to_string() };
        writeln!(
            text,
            "  {:<9} {outcome}  ({}/{} consistent)",
            if row.allowed { "allowed" } else { "forbidden" },
            row.consistent,
            row.candidates
        )
        .unwrap();
    }
    let json = json!({
        "model": model.name,
        "pretraces": b.pretraces.len(),
        "partition": { "consistent": b.consistent, "inconsistent": b.inconsistent },
        "outcome_table": b.outcomes,
    });
    let mut r = Report::new(0, text, json);
    if cfg.format == Format::Dot {
        r.graphs = Some(all_candidates(cfg, &program, &model, consistent_only)?);
    }
    Ok(r)
}

fn raw_expectation_met(expected: &Expectation, v: &Verdict) -> bool {
    match expected {
        Expectation::Consistent | Expectation::Allowed => v.consistent,
        Expectation::Inconsistent | Expectation::Forbidden => !v.consistent,
        Expectation::Violates(rules) => {
            let want: BTreeSet<&str> = rules.iter().map(String::as_str).collect();
            let got: BTreeSet<&str> = v.violations.iter().map(|x| x.rule.as_str()).collect();
            want == got
        }
    }
}

fn violation_lines(text: &mut String, v: &Verdict) {
    for x in &v.violations {
        if x.cycle.is_empty() {
            writeln!(text, "  violates {}", x.rule).unwrap();
        } else {
            writeln!(text, "  violates {}: {}", x.rule, x.cycle.join(" ")).unwrap();
        }
    }
}

fn check_cmd(cfg: &RunConfig, file: &Path) -> Result<Report, CliError> {
    let model = cfg.model_named(&cfg.model)?;
    match load_input(file)? {
        Input::Raw(raw) => {
            let v = check_consistent(&model, &raw.execution)?;
            let expected = raw.expect.get(&model.name);
            let met = expected.is_none_or(|x| raw_expectation_met(x, &v));
            let observed = if v.consistent { "consistent" } else { "inconsistent" };
            let mut text = match expected {
                Some(x) if met => format!("{observed}: confirmed ({x})\n"),
                Some(x) => format!("{observed}: expected {x}\n"),
                None => format!("{observed} under {}\n", model.name),
            };
            violation_lines(&mut text, &v);
            let json = json!({
                "model": model.name,
                "verdict": observed,
                "expected": expected.map(|x| x.to_string()),
                "met": met,
                "violations": v.violations,
            });
            let mut r = Report::new(if met { 0 } else { 1 }, text, json);
            r.graphs = Some(vec![raw.execution.clone()]);
            Ok(r)
        }
        Input::Litmus(program) => {
            let opts = BehaviourOptions { pretraces: cfg.pretrace_options(), candidate_limit: cfg.limit as usize, prune: false };
            let c = check_assertion(&program, &model, opts)?;
            let observed = c.observed().to_string();
            let mut graphs = Vec::new();
            let mut text = match (&program.assertion, &c.expected) {
                (None, _) => "no assertion: every outcome is allowed\n".to_string(),
                (Some(_), Some(x)) if c.met() => format!("{observed}: confirmed\n"),
                (Some(_), Some(x)) => format!("{observed}: expected {x}\n"),
                (Some(_), None) => format!("{observed} under {}\n", model.name),
            };
            if let Some(w) = &c.witness {
                writeln!(text, "  witness: {w}").unwrap();
                graphs.push(w.clone());
            }
            for (rule, n) in &c.blocking_rules {
                writeln!(text, "  rule {rule} rejects {n} matching candidate(s)").unwrap();
            }
            let mut violations = Value::Array(Vec::new());
            if let Some((e, v)) = &c.blocked_example {
                writeln!(text, "  e.g. {e}").unwrap();
                violation_lines(&mut text, v);
                violations = json!(v.violations);
                graphs.push(e.clone());
            }
            let json = json!({
                "model": model.name,
                "verdict": observed,
                "expected": c.expected.as_ref().map(|x| x.to_string()),
                "met": c.met(),
                "witness": c.witness.as_ref().map(execution_json),
                "blocking_rules": c.blocking_rules,
                "violations": violations,
            });
            let mut r = Report::new(if c.met() { 0 } else { 1 }, text, json);
            r.graphs = Some(graphs);
            Ok(r)
        }
    }
}

fn report_json(model: &MemoryModel, r: &SafetyReport) -> Value {
    json!({
        "model": model.name,
        "verdict": if r.safe { "safe" } else { "unsafe" },
        "checked_pairs": r.checked_pairs,
        "effect": r.effect.as_ref().map(|e| e.to_string()),
        "witness": r.witness.as_ref().map(|w| w.summary()),
    })
}

fn safety_text(model: &MemoryModel, r: &SafetyReport) -> String {
    if r.safe {
        return format!("safe under {} ({} pre-trace pair(s))\n", model.name, r.checked_pairs);
    }
    let mut text = format!("unsafe under {}\n", model.name);
    if let Some(tr) = &r.effect {
        writeln!(text, "  effect:").unwrap();
        for line in tr.to_string().lines().filter(|l| !l.trim().is_empty()) {
            writeln!(text, "    {line}").unwrap();
        }
    }
    if let Some(w) = &r.witness {
        let s = w.summary();
        if let Some(o) = &s.outcome {
            writeln!(text, "  new outcome: {o}").unwrap();
        }
        if let Some(e) = &s.execution {
            writeln!(text, "  transformed execution: {e}").unwrap();
        }
        if !s.branches.is_empty() {
            writeln!(text, "  no source path matches branches {}", s.branches.join(", ")).unwrap();
        }
        writeln!(text, "  {} comparable source execution(s), all inconsistent", s.comparable.len()).unwrap();
    }
    text
}

fn safety_cmd(
    cfg: &RunConfig,
    file: &Path,
    target: Option<&Path>,
    effect: Option<&str>,
    construct: bool,
) -> Result<Report, CliError> {
    let model = cfg.model_named(&cfg.model)?;
    let program = load_program(file)?;
    let opts = cfg.safety_options();
    let (report, pretraces) = match (target, effect) {
        (Some(t), None) => (transformation_safe(&model, &program, &load_program(t)?, opts)?, Vec::new()),
        (None, Some(src)) => {
            let specs = parse_effects(src)?;
            let pts = enumerate_pretraces(&program, opts.pretraces)?;
            let mut out = None;
            let mut checked = 0;
            let mut pairs = Vec::new();
            for p in &pts {
                let (tr, _) = make_effects(p, &specs)?;
                let r = effect_safe(&model, p, &tr, opts)?;
                checked += 1;
                pairs.push((p.clone(), tr));
                if !r.safe && out.is_none() {
                    out = Some(r);
                }
            }
            let mut r = out.unwrap_or(SafetyReport { safe: true, witness: None, checked_pairs: 0, effect: None });
            r.checked_pairs = checked;
            (r, pairs)
        }
        _ => return Err(CliError::Usage("safety needs exactly one of --effect or a target file".into())),
    };
    let mut text = safety_text(&model, &report);
    let mut json = report_json(&model, &report);
    if construct {
        if pretraces.is_empty() {
            return Err(CliError::Usage("--construct needs --effect".into()));
        }
        let mut found = Value::Null;
        for (p, tr) in &pretraces {
            match unsafety_witness(p, tr, &model, cfg.limit as usize) {
                Ok(Some(w)) => {
                    let labels = |s: crate::relalg::EventSet, pt: &PreTrace| -> Vec<String> {
                        s.iter().map(|i| pt.label(i).to_string()).collect()
                    };
                    let q = w.target.pretrace();
                    writeln!(text, "  constructed from {}", w.target).unwrap();
                    writeln!(text, "    target crucial set {:?}", labels(w.target_crucial, q)).unwrap();
                    let src: Vec<Vec<String>> = w.source_crucial.iter().map(|&s| labels(s, q)).collect();
                    writeln!(text, "    source crucial sets {src:?}").unwrap();
                    writeln!(text, "    extended to {} ({})", w.extended, w.extended.outcome()).unwrap();
                    found = json!({
                        "source": execution_json(&w.source),
                        "target": execution_json(&w.target),
                        "target_crucial": labels(w.target_crucial, q),
                        "source_crucial": src,
                        "extended": execution_json(&w.extended),
                    });
                    break;
                }
                Ok(None) => {}
                Err(AnalysisError::Precondition(msg)) => {
                    writeln!(text, "  no construction: {msg}").unwrap();
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
        if found.is_null() && report.safe {
            writeln!(text, "  no construction applies").unwrap();
        }
        json["construction"] = found;
    }
    Ok(Report::new(if report.safe { 0 } else { 1 }, text, json))
}

fn crucial_cmd(cfg: &RunConfig, file: &Path) -> Result<Report, CliError> {
    let model = cfg.model_named(&cfg.model)?;
    let execs = match load_input(file)? {
        Input::Raw(raw) => vec![raw.execution],
        Input::Litmus(program) => {
            let all = all_candidates(cfg, &program, &model, false)?;
            let mut out = Vec::new();
            for e in all {
                let matches = program.assertion.as_ref().is_none_or(|a| eval_predicate(&e.outcome(), a));
                if matches && !is_consistent(&model, &e)? {
                    out.push(e);
                }
            }
            out
        }
    };
    let mut text = String::new();
    let mut list = Vec::new();
    for e in &execs {
        let v = check_consistent(&model, e)?;
        writeln!(text, "{e}").unwrap();
        if v.consistent {
            writeln!(text, "  consistent; the empty set suffices").unwrap();
            list.push(json!({ "execution": execution_json(e), "violations": [], "crucial_sets": [[]], "minimal": [[]] }));
            continue;
        }
        violation_lines(&mut text, &v);
        let all = crucial_sets(e, &model)?;
        let minimal = minimal_crucial_sets(e, &model)?;
        let min_labels: Vec<Vec<String>> = minimal.iter().map(|c| c.labels()).collect();
        if minimal.is_empty() {
            writeln!(text, "  no crucial set").unwrap();
        } else {
            let shown: Vec<String> = min_labels.iter().map(|l| format!("{{{}}}", l.join(", "))).collect();
            writeln!(text, "  minimal crucial sets: {} ({} crucial sets in all)", shown.join(" "), all.len()).unwrap();
        }
        let all_labels: Vec<Vec<String>> = all.iter().map(|c| c.labels()).collect();
        list.push(json!({
            "execution": execution_json(e),
            "violations": v.violations,
            "crucial_sets": all_labels,
            "minimal": min_labels,
        }));
    }
    if execs.is_empty() {
        text.push_str("no inconsistent execution to examine\n");
    }
    let mut r = Report::new(0, text, json!({ "model": model.name, "executions": list }));
    r.graphs = Some(execs);
    Ok(r)
}

fn file_executions(cfg: &RunConfig, files: &[PathBuf]) -> Result<Vec<(String, Execution)>, CliError> {
    if files.is_empty() {
        return Ok(corpus::executions(cfg.candidate_options()));
    }
    let mut out = Vec::new();
    for f in files {
        let name = f.file_stem().and_then(|s| s.to_str()).unwrap_or("?").to_string();
        match load_input(f)? {
            Input::Raw(raw) => out.push((name, raw.execution)),
            Input::Litmus(p) => {
                for p in enumerate_pretraces(&p, cfg.pretrace_options())? {
                    for e in candidates(&Arc::new(p), cfg.candidate_options())? {
                        out.push((name.clone(), e));
                    }
                }
            }
        }
    }
    Ok(out)
}

fn file_subjects(cfg: &RunConfig, files: &[PathBuf]) -> Result<Vec<Subject>, CliError> {
    if files.is_empty() {
        return Ok(crate::analysis::corpus_subjects(cfg.pretrace_options())?);
    }
    let mut out = Vec::new();
    for f in files {
        let name = f.file_stem().and_then(|s| s.to_str()).unwrap_or("?").to_string();
        for p in enumerate_pretraces(&load_program(f)?, cfg.pretrace_options())? {
            out.push(Subject { name: name.clone(), pretrace: p });
        }
    }
    Ok(out)
}

fn verdict_report(title: &str, v: &MetaVerdict) -> Report {
    let mut text = format!(
        "{title}: {} ({}; {} checked)\n",
        if v.holds { "holds" } else { "fails" },
        v.search_bound,
        v.checked
    );
    if !v.holds {
        writeln!(text, "  {} counterexample(s)", v.counterexample_count).unwrap();
    }
    for f in &v.counterexamples {
        let outcome = f.outcome.as_deref().map(|o| format!(" [{o}]")).unwrap_or_default();
        writeln!(text, "  {}: {}{outcome}", f.subject, f.detail).unwrap();
    }
    for f in &v.witnesses {
        writeln!(text, "  witnessed {} by {}", f.detail, f.subject).unwrap();
    }
    let mut json = serde_json::to_value(v).expect("verdicts serialize");
    json["verdict"] = json!(if v.holds { "holds" } else { "fails" });
    Report::new(if v.holds { 0 } else { 1 }, text, json)
}

fn meta_cmd(cfg: &RunConfig, cmd: &MetaCommand) -> Result<Report, CliError> {
    match cmd {
        MetaCommand::Weak { weaker, base, files } => {
            let (w, b) = (cfg.model_named(weaker)?, cfg.model_named(base)?);
            let v = check_weak(&w, &b, &file_executions(cfg, files)?)?;
            Ok(verdict_report(&format!("weak({}, {})", w.name, b.name), &v))
        }
        MetaCommand::SoundRr { threads, events, locations } => {
            if *locations > 3 || *locations == 0 {
                return Err(CliError::Usage("--locations must be 1, 2 or 3".into()));
            }
            let m = cfg.model_named(&cfg.model)?;
            let bound = SweepBound { threads: *threads, events: *events, locations: *locations };
            let v = check_sound_rr(&m, bound)?;
            Ok(verdict_report(&format!("sound({}, reorder_rr)", m.name), &v))
        }
        MetaCommand::Complete { model, base, files, effects, exclude_write_elimination } => {
            let (m, b) = (cfg.model_named(model)?, cfg.model_named(base)?);
            let kinds = effects
                .iter()
                .map(|k| EffectKind::parse(k).ok_or_else(|| CliError::Usage(format!("unknown effect kind `{k}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            let subjects = file_subjects(cfg, files)?;
            let ex = Exclusions { write_elimination: *exclude_write_elimination };
            let v = complete_search(&m, &b, &subjects, &kinds, ex, cfg.safety_options())?;
            Ok(verdict_report(&format!("complete({}, {})", m.name, b.name), &v))
        }
        MetaCommand::Redundancy { model, files } => {
            let m = cfg.model_named(model.as_deref().unwrap_or(&cfg.model))?;
            let v = redundancy_witnesses(&m, &file_executions(cfg, files)?)?;
            Ok(verdict_report(&format!("non-redundant({})", m.name), &v))
        }
    }
}
