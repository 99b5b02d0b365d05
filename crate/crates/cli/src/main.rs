//! `qbound`: explicit bounds for small prime nonresidues.
//!
//! Exit codes: 0 success, 1 verification failure or runtime error, 2 usage
//! error, 3 search cap exhausted.

mod parse;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qbound::character::{prime_nonresidues, DEFAULT_SEARCH_CAP};
use qbound::constants::{
    bound_scale, compute_g, corollary_validity, make_table, round_up_3, BoundInput, TABLE_P0,
};
use qbound::lemmas::{run_lemma, GridConfig, Lemma, SuiteReport};
use qbound::scanner::{
    run_scan, run_scan_to_path, OrderPolicy, RecordFormat, ScanOptions, ScanSummary, ScanTask,
    DEFAULT_SHARD_WIDTH,
};
use qbound::Error;

#[derive(Parser, Debug)]
#[command(name = "qbound", version, about = "Explicit bounds for small prime nonresidues")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format. Defaults to text, or csv for scan records.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads for sweeps and scans; 0 uses every core.
    #[arg(long, global = true, env = "QBOUND_THREADS", default_value_t = 0)]
    threads: usize,

    /// Print timings and progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    /// Suppress warnings.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Table of constants C = g(n0, p0).
    Table(TableArgs),
    /// The bound on q_n for a modulus p.
    Bound(BoundArgs),
    /// The first n prime nonresidues of a character of order d modulo p.
    Nonresidues(NonresiduesArgs),
    /// Brute-force checks of the lemma inequalities.
    Verify(VerifyArgs),
    /// Compare true nonresidues against the bound over a range of primes.
    Scan(ScanArgs),
}

#[derive(Args, Debug)]
struct TableArgs {
    /// Rows, as a range `1..8` or a list `1,2,5`.
    // Spelled out so clap takes the parsed list whole instead of repeating the flag.
    #[arg(long, default_value = "1..8", value_parser = parse::n_list)]
    n0: std::vec::Vec<u32>,
    /// Columns, comma-separated. Defaults to 1e7,1e8,1e9,1e10,1e15,...,1e35.
    #[arg(long, value_parser = parse::modulus_list)]
    p0: Option<std::vec::Vec<f64>>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, value_parser = parse::modulus)]
    p: f64,
    /// Row of the constant; defaults to n.
    #[arg(long)]
    n0: Option<u32>,
    /// Column of the constant; defaults to p.
    #[arg(long, value_parser = parse::modulus)]
    p0: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct NonresiduesArgs {
    #[arg(long, value_parser = parse::integer)]
    p: u64,
    #[arg(long, default_value_t = 2)]
    d: u64,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Largest candidate examined.
    #[arg(long, value_parser = parse::integer, default_value_t = DEFAULT_SEARCH_CAP)]
    cap: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("selector").required(true).args(["all", "lemma"]))]
struct VerifyArgs {
    /// Every lemma.
    #[arg(long)]
    all: bool,
    /// Selected lemmas, repeatable or comma-separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_lemma)]
    lemma: Vec<Lemma>,
    /// Desk-sized grids instead of the extended ones.
    #[arg(long)]
    small: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Stirling ratio up to this r.
    #[arg(long)]
    r_max: Option<u32>,
    /// Totient inequality at x = k/10 up to this k.
    #[arg(long)]
    k_max: Option<u64>,
    /// Convexity for h, r up to this value.
    #[arg(long)]
    convexity_max: Option<u64>,
    #[arg(long)]
    s_upper_p_max: Option<u64>,
    #[arg(long)]
    s_upper_h_max: Option<u64>,
    #[arg(long)]
    s_upper_r_max: Option<u32>,
    /// Random disjointness trials.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    proposition_p_max: Option<u64>,
    #[arg(long)]
    proposition_n_max: Option<u32>,
    /// Write the JSON report here.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long, value_parser = parse::integer)]
    p_lo: u64,
    /// Inclusive.
    #[arg(long, value_parser = parse::integer)]
    p_hi: u64,
    /// `quadratic`, `up-to:D` (every order d <= D dividing p - 1), or a list.
    #[arg(long, default_value = "quadratic", value_parser = parse::order_policy)]
    orders: OrderPolicy,
    #[arg(long, default_value_t = 1)]
    n_max: u32,
    /// Check records against C = g(n0, p0). Requires --p0.
    #[arg(long, requires = "p0")]
    n0: Option<u32>,
    #[arg(long, value_parser = parse::modulus, requires = "n0")]
    p0: Option<f64>,
    /// The constant to check against; defaults to g(n0, p0) rounded up to
    /// three decimals.
    #[arg(long, requires = "n0")]
    c: Option<f64>,
    #[arg(long, value_parser = parse::integer, default_value_t = DEFAULT_SEARCH_CAP)]
    cap: u64,
    #[arg(long, value_parser = parse::integer, default_value_t = DEFAULT_SHARD_WIDTH)]
    shard_width: u64,
    /// Resume from and save progress to this file. Requires --output.
    #[arg(long, requires = "output")]
    checkpoint: Option<PathBuf>,
    /// Stop after this many shards; the checkpoint allows resuming.
    #[arg(long)]
    max_shards: Option<u64>,
    /// Records file; stdout if absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Summary JSON file; stdout (or stderr when records go to stdout) if absent.
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn parse_lemma(s: &str) -> Result<Lemma, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = Lemma::ALL.iter().map(|l| l.name()).collect();
        format!("unknown lemma '{s}'; expected one of {}", names.join(", "))
    })
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_)
            | Error::Precondition(_)
            | Error::NotPrime(_)
            | Error::InvalidOrder { .. }
            | Error::TableLimit { .. }
            | Error::Checkpoint(_) => 2,
            Error::SearchCap { .. } => 3,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

struct Ctx {
    format: Option<Format>,
    threads: usize,
    verbose: bool,
    quiet: bool,
}

impl Ctx {
    fn warn(&self, msg: &str) {
        if !self.quiet {
            eprintln!("warning: {msg}");
        }
    }

    fn info(&self, msg: &str) {
        if self.verbose {
            eprintln!("{msg}");
        }
    }
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(path: Option<&Path>, text: &str) -> io::Result<()> {
    let mut out = open_output(path)?;
    out.write_all(text.as_bytes())?;
    out.flush()
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

fn cmd_table(ctx: &Ctx, args: &TableArgs) -> Outcome {
    let p0s = args.p0.clone().unwrap_or_else(|| TABLE_P0.to_vec());
    let table = make_table(&args.n0, &p0s)?;
    let text = match ctx.format.unwrap_or(Format::Text) {
        Format::Text => table.render_text(),
        Format::Csv => table.to_csv(),
        Format::Json => pretty(&table.to_json()),
    };
    emit(args.output.as_deref(), &text)?;
    Ok(0)
}

fn cmd_bound(ctx: &Ctx, args: &BoundArgs) -> Outcome {
    let n0 = args.n0.unwrap_or(args.n);
    let p0 = args.p0.unwrap_or(args.p);
    let input = BoundInput::new(args.n, args.p)?;
    if args.n > n0 {
        return Err(Failure::usage(format!("n = {} exceeds n0 = {n0}", args.n)));
    }
    let validity = corollary_validity(n0, p0)?;
    let constants = compute_g(&BoundInput::new(n0, p0)?);
    let c = match constants.g {
        Some(g) if validity.holds => g,
        _ => {
            let ids: Vec<&str> = validity.failed_conditions.iter().map(|c| c.id()).collect();
            return Err(Failure::usage(format!(
                "(n0, p0) = ({n0}, {p0:e}) does not give a valid constant: {}",
                if ids.is_empty() { "g is undefined".to_string() } else { ids.join(", ") }
            )));
        }
    };
    let mut warnings = Vec::new();
    if args.p < p0 {
        warnings.push(format!("p = {:e} is below p0 = {p0:e}; the bound is not guaranteed", args.p));
    }
    for w in &warnings {
        ctx.warn(w);
    }
    let scale = bound_scale(&input);
    let bound = c * scale;
    let text = match ctx.format.unwrap_or(Format::Text) {
        Format::Json => pretty(&json!({
            "n": args.n,
            "p": args.p,
            "n0": n0,
            "p0": p0,
            "c": c,
            "c_rounded": round_up_3(c),
            "xstar": constants.xstar,
            "scale": scale,
            "bound": bound,
            "valid": true,
            "warnings": warnings,
        })),
        Format::Csv => format!(
            "n,p,n0,p0,c,scale,bound\n{},{:e},{n0},{p0:e},{c},{scale},{bound}\n",
            args.n, args.p
        ),
        Format::Text => format!(
            "C = g({n0}, {p0:e}) = {c:.10} (rounded up {:.3})\n\
             X* = {:.6}\n\
             q_{} <= C p^(1/4) (log p)^({}/2) = {c:.6} * {scale:.6e} = {bound:.6e} at p = {:e}\n",
            round_up_3(c),
            constants.xstar,
            args.n,
            args.n + 1,
            args.p
        ),
    };
    emit(args.output.as_deref(), &text)?;
    Ok(0)
}

fn cmd_nonresidues(ctx: &Ctx, args: &NonresiduesArgs) -> Outcome {
    let (q, exhausted) = match prime_nonresidues(args.p, args.d, args.n, args.cap) {
        Ok(q) => (q, false),
        Err(Error::SearchCap { found, .. }) => (found, true),
        Err(e) => return Err(e.into()),
    };
    if exhausted {
        ctx.warn(&format!(
            "search cap {} reached after {} of {} nonresidues",
            args.cap,
            q.len(),
            args.n
        ));
    }
    let list: Vec<String> = q.iter().map(u64::to_string).collect();
    let text = match ctx.format.unwrap_or(Format::Text) {
        Format::Json => pretty(&json!({
            "p": args.p,
            "d": args.d,
            "n": args.n,
            "q": q,
            "cap": args.cap,
            "cap_exhausted": exhausted,
        })),
        Format::Csv => format!("{}\n", list.join(",")),
        Format::Text => format!("{}\n", list.join(" ")),
    };
    emit(args.output.as_deref(), &text)?;
    Ok(if exhausted { 3 } else { 0 })
}

fn grid_config(args: &VerifyArgs) -> GridConfig {
    let mut c = if args.small { GridConfig::desk() } else { GridConfig::extended() };
    macro_rules! set {
        ($($flag:ident => $field:ident),*) => {
            $(if let Some(v) = args.$flag { c.$field = v; })*
        };
    }
    set!(
        seed => seed,
        r_max => stirling_r_max,
        k_max => totient_k_max,
        convexity_max => convexity_max,
        s_upper_p_max => s_upper_p_max,
        s_upper_h_max => s_upper_h_max,
        s_upper_r_max => s_upper_r_max,
        trials => disjoint_trials,
        proposition_p_max => proposition_p_max,
        proposition_n_max => proposition_n_max
    );
    c
}

fn cmd_verify(ctx: &Ctx, args: &VerifyArgs) -> Outcome {
    let config = grid_config(args);
    let lemmas: Vec<Lemma> = if args.all {
        Lemma::ALL.to_vec()
    } else {
        let mut ls = args.lemma.clone();
        ls.sort();
        ls.dedup();
        ls
    };
    let mut reports = std::collections::BTreeMap::new();
    for lemma in lemmas {
        let start = Instant::now();
        let report = run_lemma(lemma, &config)?;
        ctx.info(&format!("{lemma}: {:.2}s", start.elapsed().as_secs_f64()));
        reports.insert(lemma, report);
    }
    let suite = SuiteReport {
        seed: config.seed,
        all_passed: reports.values().all(|r| r.passed()),
        lemmas: reports,
    };
    let mut doc = serde_json::to_value(&suite).map_err(Error::from)?;
    doc["config"] = serde_json::to_value(&config).map_err(Error::from)?;
    if let Some(path) = &args.output {
        emit(Some(path), &pretty(&doc))?;
    }
    let text = match ctx.format.unwrap_or(Format::Text) {
        Format::Json => pretty(&doc),
        Format::Csv => {
            let mut s = String::from("lemma,instances_run,passes,failures,vacuous_skips,min_slack\n");
            for r in suite.lemmas.values() {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.lemma,
                    r.instances_run,
                    r.passes,
                    r.failures + r.hypothesis_failures,
                    r.vacuous_skips,
                    r.min_slack.map(|m| m.to_string()).unwrap_or_default()
                ));
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for r in suite.lemmas.values() {
                s.push_str(&format!(
                    "{} {}: {} instances, {} passes, {} failures, {} vacuous, min slack {}\n",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.lemma,
                    r.instances_run,
                    r.passes,
                    r.failures + r.hypothesis_failures,
                    r.vacuous_skips,
                    r.min_slack.map(|m| format!("{m:.3e}")).unwrap_or_else(|| "-".into())
                ));
                for f in &r.failed_instances {
                    s.push_str(&format!("    {f}\n"));
                }
            }
            s
        }
    };
    emit(None, &text)?;
    Ok(if suite.all_passed { 0 } else { 1 })
}

fn scan_task(args: &ScanArgs) -> Result<ScanTask, Failure> {
    let mut task = ScanTask::new(args.p_lo, args.p_hi, args.n_max);
    task.order_policy = args.orders.clone();
    task.search_cap = args.cap;
    task.shard_width = args.shard_width;
    if let (Some(n0), Some(p0)) = (args.n0, args.p0) {
        let c = match args.c {
            Some(c) => c,
            None => {
                let g = compute_g(&BoundInput::new(n0, p0)?).g.ok_or_else(|| {
                    Failure::usage(format!("g({n0}, {p0:e}) is undefined"))
                })?;
                round_up_3(g)
            }
        };
        task = task.with_reference(n0, p0, c);
    }
    task.validate()?;
    Ok(task)
}

fn cmd_scan(ctx: &Ctx, args: &ScanArgs) -> Outcome {
    let format = match ctx.format.unwrap_or(Format::Csv) {
        Format::Csv => RecordFormat::Csv,
        Format::Json => RecordFormat::Jsonl,
        Format::Text => return Err(Failure::usage("scan records are written as csv or json")),
    };
    let task = scan_task(args)?;
    let options = ScanOptions {
        threads: ctx.threads,
        checkpoint: args.checkpoint.clone(),
        stop_after_shards: args.max_shards,
    };
    let start = Instant::now();
    let summary: ScanSummary = match &args.output {
        Some(path) => run_scan_to_path(&task, &options, format, path)?,
        None => {
            let stdout = io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            run_scan(&task, &options, format, &mut out)?
        }
    };
    ctx.info(&format!(
        "{} primes, {} records in {:.2}s",
        summary.aggregate.primes,
        summary.aggregate.records,
        start.elapsed().as_secs_f64()
    ));
    let json = summary.to_json();
    match (&args.summary, &args.output) {
        (Some(path), _) => emit(Some(path), &json)?,
        (None, Some(_)) => emit(None, &json)?,
        (None, None) => eprint!("{json}"),
    }
    let agg = &summary.aggregate;
    if let Some(v) = &agg.first_violation {
        ctx.warn(&format!(
            "{} bound violations; first at p = {}, d = {}, n = {}, q = {}",
            agg.violations, v.p, v.d, v.n, v.q
        ));
        return Ok(1);
    }
    if agg.cap_exhausted > 0 {
        ctx.warn(&format!("search cap reached for {} records", agg.cap_exhausted));
        return Ok(3);
    }
    if !summary.complete {
        ctx.info("stopped early; rerun with the same checkpoint to continue");
    }
    Ok(0)
}

fn run(cli: Cli) -> Outcome {
    let ctx = Ctx {
        format: cli.format,
        threads: cli.threads,
        verbose: cli.verbose,
        quiet: cli.quiet,
    };
    if ctx.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(ctx.threads)
            .build_global()
            .map_err(|e| Failure {
                code: 1,
                message: e.to_string(),
            })?;
    }
    match &cli.command {
        Command::Table(a) => cmd_table(&ctx, a),
        Command::Bound(a) => cmd_bound(&ctx, a),
        Command::Nonresidues(a) => cmd_nonresidues(&ctx, a),
        Command::Verify(a) => cmd_verify(&ctx, a),
        Command::Scan(a) => cmd_scan(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
