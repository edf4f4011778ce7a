use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use psi_order_core::cf::{Expansion, QuotientSource};
use psi_order_core::dynamics::{distinct_vectors, ChangeTrace};
use psi_order_core::io::{
    output_path, read_trace, staircase_csv_string, staircase_rows, to_json_pretty,
    trace_staircase_rows, write_atomic, RunConfig,
};
use psi_order_core::psi::PsiFunction;
use psi_order_core::synth::{synthesize, JumpSchedule};
use psi_order_core::triangle::{canonical_symbols, render_diagram, TrianglePermutation};
use psi_order_core::verify::{bound_check, verify_structure, verify_tuple};
use psi_order_core::Error;

#[derive(Parser)]
#[command(name = "psi-order", version, about = "Order dynamics of irrationality measure functions")]
struct Cli {
    /// Config file with `key = value` lines; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct TupleArgs {
    /// Source specs, optionally `label=spec`.
    #[arg(long, num_args = 1..)]
    sources: Vec<String>,
    /// Add this many `seeded` sources.
    #[arg(long)]
    random: Option<usize>,
    /// Largest partial quotient for seeded sources.
    #[arg(long)]
    bound: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    depth_limit: Option<usize>,
    #[arg(long)]
    precision: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Convergent table of one source.
    Expand {
        #[arg(long)]
        source: String,
        #[arg(long, default_value_t = 10)]
        terms: usize,
        #[arg(long)]
        json: bool,
    },
    /// Staircase values at given times, or the jump table up to a time.
    Psi {
        #[arg(long)]
        source: String,
        #[arg(long = "t")]
        times: Vec<BigInt>,
        #[arg(long)]
        upto: Option<BigInt>,
        #[arg(long)]
        precision: Option<u32>,
    },
    /// Moments of permutation change.
    Trace {
        #[command(flatten)]
        tuple: TupleArgs,
        #[arg(long)]
        t0: Option<BigInt>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        horizon: Option<BigInt>,
        #[arg(long)]
        max_events: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the structural claims on a trace.
    Verify {
        #[arg(long)]
        k: Option<usize>,
        /// Trace file; otherwise one is computed from the sources.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        tuple: TupleArgs,
        #[arg(long)]
        t0: Option<BigInt>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Order, cycles and diagram of the triangular permutation.
    Pi {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        json: bool,
    },
    /// Build sources realizing a denominator calendar.
    Synth {
        /// `extremal:k=<k>:cycles=<c>`, a JSON file, or inline JSON.
        #[arg(long)]
        schedule: String,
        #[arg(long)]
        search_bound: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Staircase points as CSV.
    Export {
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        tuple: TupleArgs,
        #[arg(long)]
        horizon: Option<BigInt>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ComparisonUndecided { .. } => 3,
        Error::SourceExhausted { .. } | Error::InfeasibleSchedule(_) => 4,
        Error::ParseSource { .. }
        | Error::Config(_)
        | Error::InvalidK { .. }
        | Error::InvalidQuotient { .. }
        | Error::DuplicateLabel(_)
        | Error::EmptyTuple
        | Error::InvalidSchedule(_)
        | Error::UnknownLabel(_) => 2,
        _ => 1,
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Error> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn apply_tuple(cfg: &mut RunConfig, t: &TupleArgs) {
    if !t.sources.is_empty() {
        cfg.sources = t.sources.clone();
    }
    if let Some(v) = t.random {
        cfg.random = v;
    }
    if let Some(v) = t.bound {
        cfg.bound = v;
    }
    if let Some(v) = t.seed {
        cfg.seed = v;
    }
    if let Some(v) = t.depth_limit {
        cfg.depth_limit = v;
    }
    if let Some(v) = t.precision {
        cfg.precision = v;
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => write_atomic(&output_path(p), text.as_bytes()),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Expand { source, terms, json } => {
            let source: QuotientSource = source.parse()?;
            let mut exp = Expansion::new(source.clone());
            let mut f = PsiFunction::new("f", source);
            let mut rows = Vec::new();
            for m in 0..terms {
                let a = exp.term(m)?.clone();
                let c = f.convergent(m)?.clone();
                rows.push((m, a, c));
            }
            if json {
                let v: Vec<_> = rows
                    .iter()
                    .map(|(m, a, c)| {
                        serde_json::json!({
                            "m": m, "a": a.to_string(), "p": c.p.to_string(),
                            "q": c.q.to_string(), "det": c.determinant().to_string(),
                        })
                    })
                    .collect();
                emit(None, &to_json_pretty(&v)?)
            } else {
                let mut s = String::from("m\ta_m\tp_m\tq_m\tdet\n");
                for (m, a, c) in &rows {
                    s.push_str(&format!("{m}\t{a}\t{}\t{}\t{}\n", c.p, c.q, c.determinant()));
                }
                emit(None, &s)
            }
        }
        Command::Psi {
            source,
            times,
            upto,
            precision,
        } => {
            if let Some(p) = precision {
                cfg.precision = p;
            }
            cfg.validate()?;
            let width = cfg.target_width();
            let mut f = PsiFunction::new("f", source.parse()?);
            let mut ts = times;
            if let Some(h) = upto {
                ts.extend(f.denominators_upto(&h)?);
            }
            if ts.is_empty() {
                return Err(Error::Config("give --t or --upto".into()));
            }
            let mut s = String::from("t\tm\tq_m\tlo\thi\n");
            for t in &ts {
                let v = f.psi_at(t, &width)?;
                s.push_str(&format!(
                    "{t}\t{}\t{}\t{}\t{}\n",
                    v.m,
                    v.q_m,
                    psi_order_core::io::format_sci(&v.bracket.lo, 20, false),
                    psi_order_core::io::format_sci(&v.bracket.hi, 20, true),
                ));
            }
            emit(None, &s)
        }
        Command::Trace {
            tuple,
            t0,
            count,
            horizon,
            max_events,
            out,
        } => {
            apply_tuple(&mut cfg, &tuple);
            if let Some(v) = t0 {
                cfg.t0 = v;
            }
            if let Some(v) = count {
                cfg.count = v;
            }
            if horizon.is_some() {
                cfg.horizon = horizon;
            }
            if max_events.is_some() {
                cfg.max_events = max_events;
            }
            if out.is_some() {
                cfg.out = out;
            }
            cfg.validate()?;
            let trace = cfg.trace()?;
            emit(cfg.out.as_deref(), &to_json_pretty(&trace)?)
        }
        Command::Verify {
            k,
            trace,
            tuple,
            t0,
            count,
            out,
        } => {
            apply_tuple(&mut cfg, &tuple);
            if let Some(v) = t0 {
                cfg.t0 = v;
            }
            if let Some(v) = count {
                cfg.count = v;
            }
            if k.is_some() {
                cfg.k = k;
            }
            if out.is_some() {
                cfg.out = out;
            }
            cfg.validate()?;
            let (trace, report) = match trace {
                Some(path) => {
                    let trace: ChangeTrace = read_trace(&path)?;
                    let k = resolve_k(cfg.k, &trace)?;
                    let report = verify_structure(&trace, k)?;
                    (Some(trace), report)
                }
                None => {
                    let tuple = cfg.tuple()?;
                    let k = cfg.k.ok_or_else(|| Error::Config("--k is required with --sources".into()))?;
                    verify_tuple(&tuple, k, &cfg.t0, &cfg.trace_options())?
                }
            };
            let bound = trace.as_ref().map(|t| bound_check(t.n(), distinct_vectors(t).k_lower_bound()));
            let doc = serde_json::json!({ "report": report, "bound": bound });
            emit(cfg.out.as_deref(), &to_json_pretty(&doc)?)
        }
        Command::Pi { k, json } => {
            let pi = TrianglePermutation::new(k)?;
            let symbols = canonical_symbols(k);
            let image = pi.apply(&symbols)?;
            if json {
                let doc = serde_json::json!({
                    "k": k,
                    "n": pi.n(),
                    "order": pi.order(),
                    "cycles": pi.cycles(),
                    "canonical": symbols,
                    "image": image,
                });
                emit(None, &to_json_pretty(&doc)?)
            } else {
                let mut s = format!("k = {k}, n = {}\norder = {}\ncycles = {}\n", pi.n(), pi.order(), pi.cycles().len());
                for c in pi.cycles() {
                    let c: Vec<String> = c.iter().map(ToString::to_string).collect();
                    s.push_str(&format!("  ({})\n", c.join(" ")));
                }
                s.push_str("\nu:\n");
                s.push_str(&render_diagram(k, &symbols)?);
                s.push_str("\npi(u):\n");
                s.push_str(&render_diagram(k, &image)?);
                emit(None, &s)
            }
        }
        Command::Synth {
            schedule,
            search_bound,
            out,
        } => {
            if let Some(v) = search_bound {
                cfg.search_bound = v;
            }
            if out.is_some() {
                cfg.out = out;
            }
            cfg.validate()?;
            let text = if Path::new(&schedule).is_file() {
                std::fs::read_to_string(&schedule)?
            } else {
                schedule
            };
            let schedule = JumpSchedule::parse(&text)?;
            let result = synthesize(&schedule, cfg.search_bound)?;
            result.replay()?;
            let sources: Vec<String> = result
                .tuple
                .members()
                .iter()
                .map(|m| format!("{}={}", m.label, m.source))
                .collect();
            let doc = serde_json::json!({ "result": result, "sources": sources });
            emit(cfg.out.as_deref(), &to_json_pretty(&doc)?)
        }
        Command::Export {
            trace,
            tuple,
            horizon,
            out,
        } => {
            apply_tuple(&mut cfg, &tuple);
            if horizon.is_some() {
                cfg.horizon = horizon;
            }
            if out.is_some() {
                cfg.out = out;
            }
            cfg.validate()?;
            let width = cfg.target_width();
            let rows = match trace {
                Some(path) => trace_staircase_rows(&read_trace(&path)?, &width)?,
                None => {
                    let horizon = cfg
                        .horizon
                        .clone()
                        .ok_or_else(|| Error::Config("--horizon is required with --sources".into()))?;
                    staircase_rows(&cfg.tuple()?, &horizon, &width)?
                }
            };
            emit(cfg.out.as_deref(), &staircase_csv_string(&rows)?)
        }
    }
}

fn resolve_k(k: Option<usize>, trace: &ChangeTrace) -> Result<usize, Error> {
    if let Some(k) = k {
        return Ok(k);
    }
    // Largest k with k(k+1)/2 <= n.
    let n = trace.n();
    let mut k = 1;
    while (k + 1) * (k + 2) / 2 <= n {
        k += 1;
    }
    if k * (k + 1) / 2 != n {
        return Err(Error::Config(format!("n = {n} is not triangular; pass --k")));
    }
    Ok(k)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let doc = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{doc}");
            ExitCode::from(exit_code(&e))
        }
    }
}
