//! `condrew`: command-line driver for rule files.
//!
//! Exit status: 0 success, 1 a claim or check failed, 2 usage error,
//! 3 the input could not be read, parsed or validated.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use condrew_core::beta::{lo_normalize, BetaOutcome};
use condrew_core::corpus::{check_claim, file_claims, run_corpus, CorpusEntry};
use condrew_core::critical::{critical_pairs, probe_feasibility};
use condrew_core::gen::{enumerate_closed, TermGen};
use condrew_core::lab::{
    check_commutation_sample, check_parallel_beta_diamond, check_parallel_moves, check_projection_sample,
    check_shallow_sample, explore, DiagramReport, Relation,
};
use condrew_core::rewrite::{format_trace, Strategy};
use condrew_core::rulefile::parse_rulefile;
use condrew_core::rules::{applicable_theorems, classify_system, infer_arity, validate, Theorem, FLAG_NAMES};
use condrew_core::syntax::parse_term;
use condrew_core::term::name;
use condrew_core::{Fuel, Mode, Rel, RuleSystem, Rewriter, Term};

const SCHEMA: &str = "v1";

#[derive(Parser)]
#[command(name = "condrew", version, about = "Lambda calculus with join conditional rewriting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a system and list the theorems whose hypotheses hold.
    Check {
        file: PathBuf,
        /// Also check this term against the declared (or inferred) arity.
        #[arg(long)]
        term: Option<String>,
        #[command(flatten)]
        opts: Opts,
    },
    /// Critical pairs with feasibility verdicts.
    Cps {
        file: PathBuf,
        #[command(flatten)]
        rel: RelArgs,
        /// Number of ground substitutions tried per pair.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[command(flatten)]
        opts: Opts,
    },
    /// Leftmost-outermost derivation trace.
    Eval {
        file: PathBuf,
        #[arg(long)]
        term: String,
        #[command(flatten)]
        rel: RelArgs,
        #[command(flatten)]
        opts: Opts,
    },
    /// Joinability of two terms.
    Joinable {
        file: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[command(flatten)]
        rel: RelArgs,
        #[command(flatten)]
        opts: Opts,
    },
    /// Bounded reduction graph.
    Explore {
        file: PathBuf,
        #[arg(long)]
        term: String,
        #[command(flatten)]
        rel: RelArgs,
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
        #[command(flatten)]
        opts: Opts,
    },
    /// Leftmost-outermost beta normalization.
    Normalize {
        /// Rule file supplying the signature; without one every identifier is a variable.
        file: Option<PathBuf>,
        #[arg(long)]
        term: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run the built-in corpus of claims.
    Corpus {
        #[command(flatten)]
        opts: Opts,
    },
    /// Sampled diagram checks.
    Lab {
        #[arg(value_enum)]
        check: LabCheck,
        /// Rule file; `diamond` uses `--symbols` instead.
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Highest level for `shallow` (every pair of levels up to it is checked).
        #[arg(long, default_value_t = 3)]
        max_level: usize,
        /// Level for `commutation`, `projection` and `parallel-moves`.
        #[arg(long, default_value_t = 2)]
        level: usize,
        /// Step relation for `commutation` (R by default), `shallow` and `projection` (BetaUnionRBeta).
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
        /// Depth bound of generated terms.
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Longest derivation per peak side (`shallow`) or per projected derivation.
        #[arg(long, default_value_t = 3)]
        length: usize,
        /// Largest enumerated term for `diamond`.
        #[arg(long, default_value_t = 5)]
        size: usize,
        /// Comma-separated symbols for `diamond`.
        #[arg(long, default_value = "f,a")]
        symbols: String,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args, Clone, Copy)]
struct Opts {
    /// Emit a JSON report.
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = 32)]
    fuel_steps: usize,
    #[arg(long, default_value_t = 200)]
    fuel_size: usize,
    #[arg(long, default_value_t = 20_000)]
    fuel_nodes: usize,
}

impl Opts {
    fn fuel(&self) -> Fuel {
        Fuel {
            max_steps: self.fuel_steps,
            max_term_size: self.fuel_size,
            max_nodes: self.fuel_nodes,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct RelArgs {
    /// R, RBeta, Beta, BetaUnionR or BetaUnionRBeta.
    #[arg(long, value_parser = parse_mode, default_value = "R")]
    mode: Mode,
    #[arg(long, default_value_t = 3)]
    level: usize,
}

impl RelArgs {
    fn rel(&self) -> Rel {
        Rel::new(self.mode, self.level)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum LabCheck {
    Diamond,
    Commutation,
    Shallow,
    Projection,
    ParallelMoves,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

enum Failure {
    Usage(String),
    Input(String),
}

/// What a command produced: text, a JSON body, and whether its checks held.
struct Output {
    text: String,
    json: Value,
    ok: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (json, result) = match &cli.command {
        Command::Check { opts, .. }
        | Command::Cps { opts, .. }
        | Command::Eval { opts, .. }
        | Command::Joinable { opts, .. }
        | Command::Explore { opts, .. }
        | Command::Normalize { opts, .. }
        | Command::Corpus { opts }
        | Command::Lab { opts, .. } => (opts.json, run(&cli.command)),
    };
    match result {
        Ok(out) => {
            let body = if json {
                serde_json::to_string_pretty(&out.json).expect("reports serialize") + "\n"
            } else {
                out.text
            };
            // a closed pipe is not an error
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

fn envelope(command: &str, body: Value) -> Value {
    let mut v = json!({ "schema": SCHEMA, "command": command });
    if let (Value::Object(m), Value::Object(b)) = (&mut v, body) {
        m.extend(b);
    }
    v
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or("system".into(), |s| s.to_string_lossy().into_owned())
}

/// Reads and parses a rule file; the system is validated unless `lenient`.
fn load(path: &Path, lenient: bool) -> Result<(String, RuleSystem), Failure> {
    let text = read(path)?;
    let rf = parse_rulefile(&text).map_err(|e| Failure::Input(format!("{}:{e}", path.display())))?;
    let rs = rf
        .to_system(&stem(path))
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    if !lenient {
        let v = validate(&rs);
        if !v.is_empty() {
            let msgs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            return Err(Failure::Input(format!("{}: {}", path.display(), msgs.join("; "))));
        }
    }
    Ok((text, rs))
}

fn term(rs: &RuleSystem, text: &str) -> Result<Term, Failure> {
    rs.parse_term(text)
        .map_err(|e| Failure::Input(format!("term `{text}`: {e}")))
}

fn run(cmd: &Command) -> Result<Output, Failure> {
    match cmd {
        Command::Check { file, term: t, .. } => check(file, t.as_deref()),
        Command::Cps {
            file,
            rel,
            samples,
            opts,
        } => cps(file, *rel, *samples, opts.fuel()),
        Command::Eval {
            file,
            term: t,
            rel,
            opts,
        } => {
            let (_, rs) = load(file, false)?;
            let t = term(&rs, t)?;
            let d = Rewriter::new(&rs, opts.fuel()).reduce_many(&t, rel.rel(), Strategy::LeftmostOutermost);
            Ok(Output {
                text: format_trace(&d),
                json: envelope("eval", json!({ "relation": to_json(&rel.rel()), "derivation": to_json(&d) })),
                ok: true,
            })
        }
        Command::Joinable {
            file,
            left,
            right,
            rel,
            opts,
        } => {
            let (_, rs) = load(file, false)?;
            let (l, r) = (term(&rs, left)?, term(&rs, right)?);
            let v = Rewriter::new(&rs, opts.fuel()).joinable(&l, &r, rel.rel());
            Ok(Output {
                text: format!("{v}\n"),
                json: envelope(
                    "joinable",
                    json!({
                        "left": to_json(&l),
                        "right": to_json(&r),
                        "relation": to_json(&rel.rel()),
                        "fuel": to_json(&opts.fuel()),
                        "verdict": to_json(&v),
                    }),
                ),
                ok: true,
            })
        }
        Command::Explore {
            file,
            term: t,
            rel,
            format,
            opts,
        } => {
            let (_, rs) = load(file, false)?;
            let t = term(&rs, t)?;
            let g = explore(&t, &rs, rel.mode, rel.level, opts.fuel());
            let text = match format {
                GraphFormat::Dot => g.to_dot(),
                GraphFormat::Json => format!(
                    "{}\n",
                    serde_json::to_string_pretty(&envelope("explore", json!({ "graph": to_json(&g) })))
                        .expect("graphs serialize")
                ),
                GraphFormat::Text => {
                    let mut s = format!(
                        "{} nodes, {} edges{}\n",
                        g.nodes.len(),
                        g.edges.len(),
                        if g.truncated { " (truncated)" } else { "" }
                    );
                    for e in &g.edges {
                        let _ = writeln!(s, "{} -[{}]-> {}", g.nodes[e.from], e.label, g.nodes[e.to]);
                    }
                    s
                }
            };
            Ok(Output {
                text,
                json: envelope("explore", json!({ "graph": to_json(&g) })),
                ok: true,
            })
        }
        Command::Normalize { file, term: t, opts } => {
            let t = match file {
                Some(f) => term(&load(f, true)?.1, t)?,
                None => parse_term(t, &|_| false).map_err(|e| Failure::Input(format!("term `{t}`: {e}")))?,
            };
            let out = lo_normalize(&t, opts.fuel());
            let text = match &out {
                BetaOutcome::Normalized { term, steps } => format!("normal form: {term}\nsteps: {steps}\n"),
                BetaOutcome::FuelExhausted { last, steps } => {
                    format!("fuel exhausted after {steps} steps\nlast: {last}\n")
                }
            };
            Ok(Output {
                text,
                json: envelope("normalize", json!({ "term": to_json(&t), "outcome": to_json(&out) })),
                ok: true,
            })
        }
        Command::Corpus { .. } => {
            let outcomes = run_corpus();
            let mut text = String::new();
            for o in &outcomes {
                let _ = writeln!(
                    text,
                    "{} {}: {} ({})",
                    if o.passed { "ok  " } else { "FAIL" },
                    o.entry,
                    o.claim,
                    o.detail
                );
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            let _ = writeln!(text, "{} claims, {failed} failed", outcomes.len());
            Ok(Output {
                text,
                json: envelope("corpus", json!({ "outcomes": to_json(&outcomes), "failed": failed })),
                ok: failed == 0,
            })
        }
        Command::Lab {
            check,
            file,
            seed,
            samples,
            max_level,
            level,
            mode,
            depth,
            length,
            size,
            symbols,
            opts,
        } => {
            let fuel = opts.fuel();
            let reports = match check {
                LabCheck::Diamond => {
                    let syms: Vec<_> = symbols.split(',').map(str::trim).filter(|s| !s.is_empty()).map(name).collect();
                    let terms = enumerate_closed(&syms, *size);
                    vec![check_parallel_beta_diamond(&terms, fuel)]
                }
                _ => {
                    let path = file
                        .as_ref()
                        .ok_or_else(|| Failure::Usage("this check needs a rule file".into()))?;
                    let (_, rs) = load(path, false)?;
                    let gen = || TermGen::for_system(&rs, *seed).max_depth(*depth).redex_rate(0.3).plant_redexes(&rs, 0.3);
                    match check {
                        LabCheck::Commutation => {
                            let b = Relation::Step(Rel::new(mode.unwrap_or(Mode::R), *level));
                            vec![check_commutation_sample(&rs, Relation::ParallelBeta, b, &mut gen(), *samples, fuel)]
                        }
                        LabCheck::Shallow => {
                            let m = mode.unwrap_or(Mode::BetaUnionRBeta);
                            let mut out = Vec::new();
                            for i in 1..=*max_level {
                                for j in 1..=*max_level {
                                    out.push(check_shallow_sample(&rs, m, i, j, &mut gen(), *samples, *length, fuel));
                                }
                            }
                            out
                        }
                        LabCheck::Projection => {
                            let alpha = rs.arity().or_else(|| infer_arity(&rs)).ok_or_else(|| {
                                Failure::Input("projection needs an arity for every symbol".into())
                            })?;
                            let m = mode.unwrap_or(Mode::BetaUnionRBeta);
                            let r = check_projection_sample(&rs, &alpha, m, *level, &mut gen(), *samples, *length, fuel)
                                .map_err(|e| Failure::Input(e.to_string()))?;
                            vec![r]
                        }
                        LabCheck::ParallelMoves => {
                            vec![check_parallel_moves(&rs, *level, *level, &mut gen(), *samples, fuel)]
                        }
                        LabCheck::Diamond => unreachable!(),
                    }
                }
            };
            Ok(lab_output(&reports))
        }
    }
}

fn lab_output(reports: &[DiagramReport]) -> Output {
    let mut text = String::new();
    for r in reports {
        let _ = writeln!(text, "{} {r}", if r.passed() { "PASS" } else { "FAIL" });
    }
    Output {
        ok: reports.iter().all(DiagramReport::passed),
        json: envelope("lab", json!({ "reports": to_json(&reports) })),
        text,
    }
}

fn check(file: &Path, t: Option<&str>) -> Result<Output, Failure> {
    let (text, rs) = load(file, true)?;
    let violations = validate(&rs);
    let c = classify_system(&rs);
    let verdict = applicable_theorems(&c);
    let mut out = format!("system {}\n", rs.name);
    for v in &violations {
        let _ = writeln!(out, "violation: {v}");
    }
    for f in FLAG_NAMES {
        let flag = c.flag(f).expect("known flag");
        let _ = write!(out, "{f}: {}", flag.value);
        if f == "orthonormal" {
            let th = Theorem::Orthonormal;
            let number = th.label().trim_start_matches("Thm-");
            let applies = verdict.applicable.contains(&th);
            let _ = write!(out, "; Theorem {number} {}", if applies { "applies" } else { "does not apply" });
        }
        let _ = writeln!(out, "\n    {}", flag.reason);
    }
    out.push_str("theorems:");
    if verdict.applicable.is_empty() {
        out.push_str(" none");
    }
    out.push('\n');
    for th in &verdict.applicable {
        let _ = writeln!(out, "  {th} applies: {}", th.assumption());
    }
    for (th, missing) in &verdict.hypotheses_unmet {
        let _ = writeln!(out, "  {th} does not apply: needs {}", missing.join(", "));
    }
    let mut arity_json = Value::Null;
    if let Some(t) = t {
        let t = term(&rs, t)?;
        let alpha = rs.arity().or_else(|| infer_arity(&rs));
        let verdict = match &alpha {
            Some(a) => t.respects_arity(a).map_err(|e| e.to_string()),
            None => Err("no arity declared or inferable".to_string()),
        };
        match &verdict {
            Ok(b) => {
                let _ = writeln!(out, "term `{t}` respects arity: {b}");
            }
            Err(e) => {
                let _ = writeln!(out, "term `{t}` arity: unknown ({e})");
            }
        }
        arity_json = json!({
            "term": to_json(&t),
            "respects_arity": verdict.as_ref().ok(),
            "error": verdict.as_ref().err(),
        });
    }
    let entry = CorpusEntry {
        name: rs.name.clone(),
        system: rs.clone(),
        claims: file_claims(&text),
    };
    let outcomes: Vec<_> = entry.claims.iter().map(|cl| check_claim(&entry, cl)).collect();
    if !outcomes.is_empty() {
        out.push_str("claims:\n");
        for o in &outcomes {
            let _ = writeln!(out, "  {} {}", if o.passed { "ok  " } else { "FAIL" }, o.claim);
        }
    }
    let ok = outcomes.iter().all(|o| o.passed);
    Ok(Output {
        text: out,
        json: envelope(
            "check",
            json!({
                "system": rs.name,
                "violations": to_json(&violations),
                "classification": to_json(&c),
                "theorems": to_json(&verdict),
                "arity_check": arity_json,
                "claims": to_json(&outcomes),
            }),
        ),
        ok,
    })
}

fn cps(file: &Path, rel: RelArgs, samples: usize, fuel: Fuel) -> Result<Output, Failure> {
    let (_, rs) = load(file, false)?;
    let pairs = critical_pairs(&rs);
    let mut text = String::new();
    let mut items = Vec::new();
    for cp in &pairs {
        let v = probe_feasibility(cp, &rs, rel.mode, rel.level, fuel, samples);
        let _ = writeln!(text, "{cp}");
        let _ = writeln!(
            text,
            "    {} in {} at {}{}: {v}",
            cp.overlap.inner,
            cp.overlap.outer,
            cp.overlap.position,
            if cp.trivial { ", trivial" } else { "" }
        );
        items.push(json!({ "pair": to_json(cp), "display": cp.to_string(), "feasibility": to_json(&v) }));
    }
    let _ = writeln!(text, "{} critical pairs", pairs.len());
    Ok(Output {
        text,
        json: envelope("cps", json!({ "system": rs.name, "relation": to_json(&rel.rel()), "pairs": items })),
        ok: true,
    })
}
