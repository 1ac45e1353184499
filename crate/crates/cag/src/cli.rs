//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use cag_core::counterexample::CounterexampleInput;
use cag_core::exact::{
    cut_prob_bounds, cut_prob_exact, cut_prob_mean, disconnect_union_bound, isolated_single, var_isolated,
};
use cag_core::sim::{connectivity_stats, GraphSampler};
use cag_core::{lambda_threshold, CommunityLaw, LayerSchedule, ThresholdSummary};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::error::{AppError, AppResult};
use crate::format::{fmt_f64, load_fixed, load_law};
use crate::montecarlo::{mc_connectivity, McConnectivity};
use crate::report::{counterexample_csv, counterexample_json, counterexample_text, Record};
use crate::sweep::{load_sweep_config, run_sweep, sweep_csv, sweep_json};

/// Master seed used when neither `--seed` nor `CAG_SEED` is given.
pub const DEFAULT_SEED: u64 = 0x243F_6A88_85A3_08D3;

pub const SIMULATE_HEADER: &str = "replicate,connected,components,isolated,largest,edges";

#[derive(Debug, Parser)]
#[command(
    name = "cag",
    version,
    about = "Community affiliation random graphs: thresholds, exact probabilities and simulation"
)]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// Master seed [default: 0x243F6A8885A308D3]
    #[arg(long, global = true, env = "CAG_SEED")]
    pub seed: Option<u64>,
    /// Worker threads for Monte Carlo [default: 1]
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    /// Write output here instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Output format; each subcommand has its own default
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// kappa, truncated kappa, lambda, log moment and alpha for (n, m, law)
    Thresholds(ThresholdsArgs),
    /// Exact probabilities and bounds
    Exact(ExactArgs),
    /// Monte Carlo connectivity, one CSV line per replicate
    Simulate(SimulateArgs),
    /// Prefix-coupled sweep over a lambda or m grid
    Sweep(SweepArgs),
    /// Heavy-tailed counterexample law and its bounds
    Counterexample(CounterexampleArgs),
}

#[derive(Debug, Args)]
pub struct ThresholdsArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub m: u64,
    /// Law file, `deg_<x>_<q>` or `mix:x,q,w;...`
    #[arg(long)]
    pub law: String,
    /// Use kappa truncated at n in lambda
    #[arg(long)]
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum What {
    Kappa,
    Lambda,
    En0,
    Varn0,
    Qr,
    Qbar,
    UnionBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleKind {
    Iid,
    Fixed,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long, value_enum)]
    pub what: What,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub law: Option<String>,
    /// Fixed schedule file
    #[arg(long)]
    pub fixed: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub schedule: Option<ScheduleKind>,
    #[arg(long)]
    pub r: Option<u64>,
    #[arg(long)]
    pub x: Option<u64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Stop the union bound at this r
    #[arg(long)]
    pub r_max: Option<u64>,
    /// Run the union bound above its size cap
    #[arg(long)]
    pub allow_large: bool,
    /// Use truncated kappa in lambda (default for fixed schedules)
    #[arg(long)]
    pub truncated: Option<bool>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, conflicts_with = "fixed")]
    pub law: Option<String>,
    #[arg(long)]
    pub fixed: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub replicates: u64,
    /// Also write every replicate's edge list (`replicate,u,v`) to this file
    #[arg(long, value_name = "PATH")]
    pub retain_edges: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON sweep config
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    /// Number of atoms K
    #[arg(long, default_value_t = 40)]
    pub k_max: usize,
    /// Comma-separated y_1 < y_2 < ...; defaults to 1, 2, ..., K
    #[arg(long, value_delimiter = ',')]
    pub y: Option<Vec<u32>>,
    /// f(y) = ratio^y
    #[arg(long, default_value_t = 0.25)]
    pub f_ratio: f64,
    /// Also write the table as CSV to this file
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{}", e.render());
                    2
                }
            };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .try_init();
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            2
        }
        Err(e) => {
            eprintln!("{}", e.to_record());
            1
        }
    }
}

fn dispatch(cli: &Cli) -> AppResult<()> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let workers = cli.workers.unwrap_or(1) as usize;
    let text = match &cli.command {
        Command::Thresholds(a) => {
            let law = load_law(&a.law)?;
            let s = lambda_threshold(a.n, a.m, &law, a.truncated)?;
            render_record(&summary_record(&s), cli.format)
        }
        Command::Exact(a) => exact(a, cli.format)?,
        Command::Simulate(a) => simulate(a, seed, workers, cli.format)?,
        Command::Sweep(a) => {
            let (config, law) = load_sweep_config(&a.config)?;
            let seed = cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
            let workers = cli.workers.map(|w| w as usize).or(config.workers).unwrap_or(1);
            let out = run_sweep(&config, &law, seed, workers)?;
            match cli.format {
                Some(Format::Json) => format!("{}\n", sweep_json(&out.rows)),
                _ => sweep_csv(&out.rows),
            }
        }
        Command::Counterexample(a) => counterexample(a, cli.format)?,
    };
    emit(cli.output.as_ref(), &text)
}

fn emit(path: Option<&PathBuf>, text: &str) -> AppResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| AppError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn render_record(r: &Record, format: Option<Format>) -> String {
    match format {
        Some(Format::Csv) => r.to_csv(),
        _ => format!("{}\n", r.to_json()),
    }
}

pub fn summary_record(s: &ThresholdSummary) -> Record {
    Record::new()
        .int("n", s.n)
        .int("m", s.m)
        .float("kappa", s.kappa)
        .float("kappa_truncated", s.kappa_truncated)
        .text("kappa_used", s.kappa_used.as_str())
        .float("lambda", s.lambda)
        .float("log_moment", s.log_moment)
        .float("alpha", s.alpha)
}

fn need<T: Copy>(v: Option<T>, flag: &str, what: &str) -> AppResult<T> {
    v.ok_or_else(|| AppError::Usage(format!("--what {what} needs --{flag}")))
}

/// Schedule from `--fixed` or from `--law` and `--m`.
fn exact_schedule(a: &ExactArgs, what: &str) -> AppResult<LayerSchedule> {
    let fixed = match (a.schedule, &a.fixed) {
        (Some(ScheduleKind::Fixed), None) => {
            return Err(AppError::Usage("--schedule fixed needs --fixed <file>".into()))
        }
        (Some(ScheduleKind::Iid), Some(_)) => {
            return Err(AppError::Usage("--schedule iid conflicts with --fixed".into()))
        }
        (_, f) => f.as_ref(),
    };
    match fixed {
        Some(path) => {
            let doc = load_fixed(path)?;
            let n = match (a.n, doc.n) {
                (Some(n), Some(d)) if n != d => {
                    return Err(AppError::Usage(format!(
                        "--n {n} disagrees with n = {d} in the schedule file"
                    )))
                }
                (Some(n), _) | (None, Some(n)) => n,
                (None, None) => return Err(AppError::Usage(format!("--what {what} needs --n"))),
            };
            Ok(LayerSchedule::fixed(n, doc.pairs())?)
        }
        None => {
            let law = load_law(
                a.law
                    .as_deref()
                    .ok_or_else(|| AppError::Usage(format!("--what {what} needs --law or --fixed")))?,
            )?;
            Ok(LayerSchedule::iid(need(a.n, "n", what)?, law, need(a.m, "m", what)?)?)
        }
    }
}

/// Law of a uniformly chosen layer plus the fixed schedule it came from, or
/// the `--law` law as given.
fn exact_law(a: &ExactArgs, what: &str) -> AppResult<(CommunityLaw, Option<LayerSchedule>)> {
    if a.fixed.is_some() || a.schedule == Some(ScheduleKind::Fixed) {
        let s = exact_schedule(a, what)?;
        return Ok((s.mixture_law()?, Some(s)));
    }
    let spec = a
        .law
        .as_deref()
        .ok_or_else(|| AppError::Usage(format!("--what {what} needs --law or --fixed")))?;
    Ok((load_law(spec)?, None))
}

fn exact(a: &ExactArgs, format: Option<Format>) -> AppResult<String> {
    let record = match a.what {
        What::Qr => {
            let (n, r, x, q) = (
                need(a.n, "n", "qr")?,
                need(a.r, "r", "qr")?,
                need(a.x, "x", "qr")?,
                need(a.q, "q", "qr")?,
            );
            let cut = cut_prob_exact(n, r, x, q)?;
            let b = cut_prob_bounds(n, r, x, q)?;
            Record::new()
                .int("n", n)
                .int("r", r)
                .int("x", x)
                .float("q", q)
                .float("q_r", cut)
                .float("bound_simple", b.bound_simple)
                .float("bound_refined", b.bound_refined)
                .float("r1", b.r1)
                .float("r2", b.r2)
        }
        What::Kappa => {
            let (law, _) = exact_law(a, "kappa")?;
            let mut rec = Record::new();
            if let Some(n) = a.n {
                rec = rec
                    .int("n", n)
                    .float("kappa", law.kappa())
                    .float("kappa_truncated", law.kappa_truncated(n));
            } else {
                rec = rec.float("kappa", law.kappa());
            }
            rec.float("alpha", law.alpha()).float("log_moment", law.log_moment())
        }
        What::Lambda => {
            let (law, fixed) = exact_law(a, "lambda")?;
            let (n, m) = match &fixed {
                Some(s) => (s.n(), s.m()),
                None => (need(a.n, "n", "lambda")?, need(a.m, "m", "lambda")?),
            };
            let s = lambda_threshold(n, m, &law, a.truncated.unwrap_or(fixed.is_some()))?;
            summary_record(&s)
        }
        What::En0 => {
            let s = exact_schedule(a, "en0")?;
            let p = isolated_single(&s)?;
            Record::new()
                .int("n", s.n())
                .int("m", s.m())
                .float("p_single", p)
                .float("expected_n0", s.n() as f64 * p)
        }
        What::Varn0 => {
            let s = exact_schedule(a, "varn0")?;
            let v = var_isolated(&s)?;
            let mut rec = Record::new()
                .int("n", v.n)
                .int("m", v.m)
                .float("p_single", v.p_single)
                .float("p_pair", v.p_pair)
                .float("expected_n0", v.expected_n0)
                .float("var_n0", v.var_n0)
                .flag("var_clamped", v.var_clamped);
            if let Some(e) = v.etas {
                rec = rec
                    .float("eta1", e.eta1)
                    .float("eta2", e.eta2)
                    .float("eta3", e.eta3)
                    .float("eta4", e.eta4);
            }
            if let Some(q) = v.q_pair_layer {
                rec = rec.float("q_pair_layer", q);
            }
            rec
        }
        What::Qbar => {
            let (law, fixed) = exact_law(a, "qbar")?;
            let n = match &fixed {
                Some(s) => s.n(),
                None => need(a.n, "n", "qbar")?,
            };
            let r = need(a.r, "r", "qbar")?;
            let c = cut_prob_mean(n, r, &law)?;
            Record::new()
                .int("n", n)
                .int("r", c.r)
                .float("qbar_exact", c.qbar_exact)
                .float("bound_simple", c.bound_simple)
                .float("bound_refined", c.bound_refined)
                .float("r1", c.r1)
                .float("r2_expectation", c.r2_expectation)
        }
        What::UnionBound => {
            let s = exact_schedule(a, "union-bound")?;
            let u = disconnect_union_bound(&s, a.r_max, a.allow_large)?;
            if format == Some(Format::Csv) {
                let mut out = String::from("r,ln_term,term\n");
                for t in &u.terms {
                    let _ = writeln!(out, "{},{},{}", t.r, fmt_f64(t.ln_term), fmt_f64(t.term));
                }
                return Ok(out);
            }
            let terms: Vec<Value> = u
                .terms
                .iter()
                .map(|t| {
                    Record::new()
                        .int("r", t.r)
                        .float("ln_term", t.ln_term)
                        .float("term", t.term)
                        .0
                        .into()
                })
                .collect();
            Record::new()
                .int("n", s.n())
                .int("m", s.m())
                .float("s", u.s)
                .float("ln_s", u.ln_s)
                .flag("partial", u.partial)
                .value("terms", Value::Array(terms))
        }
    };
    Ok(render_record(&record, format))
}

fn simulate(a: &SimulateArgs, seed: u64, workers: usize, format: Option<Format>) -> AppResult<String> {
    let schedule = match (&a.law, &a.fixed) {
        (Some(law), None) => {
            let n = a.n.ok_or_else(|| AppError::Usage("simulate --law needs --n".into()))?;
            let m = a.m.ok_or_else(|| AppError::Usage("simulate --law needs --m".into()))?;
            LayerSchedule::iid(n, load_law(law)?, m)?
        }
        (None, Some(path)) => {
            let doc = load_fixed(path)?;
            let n =
                a.n.or(doc.n)
                    .ok_or_else(|| AppError::Usage("simulate --fixed needs --n or n in the file".into()))?;
            if let (Some(m), len) = (a.m, doc.layers.len() as u64) {
                if m != len {
                    return Err(AppError::Usage(format!(
                        "--m {m} disagrees with the {len} layers in the schedule file"
                    )));
                }
            }
            LayerSchedule::fixed(n, doc.pairs())?
        }
        _ => {
            return Err(AppError::Usage(
                "simulate needs exactly one of --law and --fixed".into(),
            ))
        }
    };
    if a.replicates == 0 {
        return Err(AppError::Usage("--replicates must be >= 1".into()));
    }
    let mc = match &a.retain_edges {
        Some(path) => {
            let mut sampler = GraphSampler::new(&schedule, seed)?;
            let mut edges = String::from("replicate,u,v\n");
            let mut stats = Vec::with_capacity(a.replicates as usize);
            for r in 0..a.replicates {
                let g = sampler.sample(r, true)?;
                for &(u, v) in g.edges().unwrap_or(&[]) {
                    let _ = writeln!(edges, "{r},{u},{v}");
                }
                stats.push(connectivity_stats(&g));
            }
            std::fs::write(path, edges).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
            McConnectivity::from_stats(stats, seed)
        }
        None => mc_connectivity(&schedule, a.replicates, seed, workers)?,
    };
    log::info!(
        "fraction connected {} (se {}), mean N0 {} (se {})",
        mc.fraction_connected.mean,
        mc.fraction_connected.std_error,
        mc.mean_n0.mean,
        mc.mean_n0.std_error
    );
    Ok(match format {
        Some(Format::Json) => format!("{}\n", simulate_json(&mc).to_json()),
        _ => simulate_csv(&mc),
    })
}

pub fn simulate_csv(mc: &McConnectivity) -> String {
    let mut out = String::with_capacity(32 * (mc.stats.len() + 1));
    out.push_str(SIMULATE_HEADER);
    out.push('\n');
    for (r, s) in mc.stats.iter().enumerate() {
        let _ = writeln!(
            out,
            "{r},{},{},{},{},{}",
            u8::from(s.connected),
            s.components,
            s.isolated,
            s.largest,
            s.edges
        );
    }
    out
}

fn estimate_value(e: &cag_core::sim::McEstimate) -> Value {
    Record::new()
        .float("mean", e.mean)
        .float("std_error", e.std_error)
        .float("sample_variance", e.sample_variance)
        .int("replicates", e.replicates)
        .int("master_seed", e.master_seed)
        .0
        .into()
}

fn simulate_json(mc: &McConnectivity) -> Record {
    let reps: Vec<Value> = mc
        .stats
        .iter()
        .enumerate()
        .map(|(r, s)| {
            Record::new()
                .int("replicate", r as u64)
                .flag("connected", s.connected)
                .int("components", s.components as u64)
                .int("isolated", s.isolated as u64)
                .int("largest", s.largest as u64)
                .int("edges", s.edges)
                .0
                .into()
        })
        .collect();
    Record::new()
        .value("fraction_connected", estimate_value(&mc.fraction_connected))
        .value("mean_n0", estimate_value(&mc.mean_n0))
        .value("n0_zero", estimate_value(&mc.n0_zero))
        .value("replicates", Value::Array(reps))
}

fn counterexample(a: &CounterexampleArgs, format: Option<Format>) -> AppResult<String> {
    if !(a.f_ratio > 0.0 && a.f_ratio.is_finite()) {
        return Err(AppError::Usage("--f-ratio must be positive".into()));
    }
    let y = a.y.clone().unwrap_or_else(|| (1..=a.k_max as u32).collect());
    let f = y.iter().map(|&v| a.f_ratio.powi(v as i32)).collect();
    let report = CounterexampleInput::new(y, f)?.report(a.k_max)?;
    if let Some(path) = &a.csv {
        std::fs::write(path, counterexample_csv(&report))
            .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(match format {
        Some(Format::Json) => format!("{}\n", counterexample_json(&report)),
        Some(Format::Csv) => counterexample_csv(&report),
        None => counterexample_text(&report),
    })
}
