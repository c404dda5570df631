//! The `stlmon` command line: `eval`, `pastify` and `bench`.
//!
//! Exit codes: 0 success, 1 usage/specification error, 2 trace error,
//! 3 violation under `--fail-on-violation`. Diagnostics go to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use stlmon::bench::{format_table, run_bench, Pattern, DEFAULT_KS};
use stlmon::dense::DenseMonitor;
use stlmon::discrete::DiscreteMonitor;
use stlmon::format::format_formula;
use stlmon::formula::TimeDomain;
use stlmon::pastify::pastify_all;
use stlmon::time::{Decimal, Duration, TimeUnit};
use stlmon::trace_io::{read_dense_batches, read_discrete_trace, sample_times, write_series_to, Series};
use stlmon::{parse_spec, ExtReal, SemanticsMode, SpecModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_TRACE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "stlmon", version, about = "Online robustness monitoring for STL and IA-STL")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Replay a trace through the monitor and write the robustness series.
    Eval(EvalArgs),
    /// Print each formula's past-only form with its horizon and past depth.
    Pastify(PastifyArgs),
    /// Time single updates of `always[0:k] (a+b > -2)`.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Time {
    Discrete,
    Dense,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Semantics {
    Standard,
    OutputRobustness,
    InputVacuity,
}

impl From<Semantics> for SemanticsMode {
    fn from(s: Semantics) -> Self {
        match s {
            Semantics::Standard => SemanticsMode::Standard,
            Semantics::OutputRobustness => SemanticsMode::OutputRobustness,
            Semantics::InputVacuity => SemanticsMode::InputVacuity,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BenchPattern {
    Uniform,
    Increasing,
}

#[derive(Args, Clone, Debug)]
struct SpecArgs {
    /// Specification file.
    #[arg(long = "stl", visible_alias = "spec")]
    spec: PathBuf,
    /// Sampling period (discrete time), in `--unit`.
    #[arg(long)]
    period: Option<String>,
    /// Unit of the period and of interval bounds written without a unit.
    #[arg(long, default_value = "s", value_parser = ["s", "ms", "us", "ns"])]
    unit: String,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// CSV trace; a leading `time` column is required in dense time.
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, value_enum, default_value = "discrete")]
    time: Time,
    #[arg(long, value_enum)]
    semantics: Option<Semantics>,
    /// Drop rows before the warm-up `L + H` has elapsed.
    #[arg(long)]
    skip_warmup: bool,
    /// Output CSV; the series is only written when given.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with 3 when any reported value is negative.
    #[arg(long)]
    fail_on_violation: bool,
}

#[derive(Args, Debug)]
struct PastifyArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, value_enum, default_value = "discrete")]
    time: Time,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Window bound in samples; repeatable.
    #[arg(long = "k")]
    k: Vec<u64>,
    /// Timed updates per bound, after the warm-up.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "uniform")]
    pattern: BenchPattern,
    /// One JSON object per bound instead of a table.
    #[arg(long)]
    json: bool,
}

/// A failure with its exit code; the message goes to stderr.
struct Failure(i32, String);

fn usage(msg: impl ToString) -> Failure {
    Failure(EXIT_USAGE, msg.to_string())
}

fn trace_err(msg: impl ToString) -> Failure {
    Failure(EXIT_TRACE, msg.to_string())
}

/// Runs the command line `args` (program name first).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Eval(a) => eval(&a, stdout),
        Command::Pastify(a) => pastify(&a, stdout),
        Command::Bench(a) => bench(&a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}

fn load_model(args: &SpecArgs, time: Time, semantics: Option<Semantics>) -> Result<SpecModel, Failure> {
    let text = std::fs::read_to_string(&args.spec).map_err(|e| usage(format!("{}: {e}", args.spec.display())))?;
    let mut model = parse_spec(&text).map_err(|e| usage(format!("{}: {e}", args.spec.display())))?;
    let unit = TimeUnit::parse(&args.unit).expect("validated by clap");
    model.default_unit = unit;
    if let Some(s) = semantics {
        model.mode = s.into();
    }
    model.time_domain = match time {
        Time::Dense => TimeDomain::Dense,
        Time::Discrete => {
            let raw = args.period.as_deref().ok_or_else(|| usage("discrete time needs --period"))?;
            let value: Decimal = raw.parse().map_err(|_| usage(format!("--period `{raw}` is not a number")))?;
            if value.is_zero() {
                return Err(usage("--period must be positive"));
            }
            TimeDomain::Discrete { period: Duration::new(value, unit).map_err(usage)? }
        }
    };
    Ok(model)
}

fn eval(args: &EvalArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let model = load_model(&args.spec, args.time, args.semantics)?;
    let series = match model.time_domain {
        TimeDomain::Discrete { period } => eval_discrete(&model, period, args)?,
        TimeDomain::Dense => eval_dense(&model, args)?,
    };
    if let Some(path) = &args.out {
        write_file(path, &series)?;
    }
    for (k, name) in series.names.iter().enumerate() {
        match series.rows.last() {
            Some((_, values)) => writeln!(stdout, "{name} = {}", values[k]),
            None => writeln!(stdout, "{name} = (no output)"),
        }
        .map_err(trace_err)?;
    }
    let violated = series.rows.iter().flat_map(|r| &r.1).any(|v| *v < ExtReal::ZERO);
    Ok(if args.fail_on_violation && violated { EXIT_VIOLATION } else { EXIT_OK })
}

fn write_file(path: &Path, series: &Series) -> Result<(), Failure> {
    let file = std::fs::File::create(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    write_series_to(std::io::BufWriter::new(file), series).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn eval_discrete(model: &SpecModel, period: Duration, args: &EvalArgs) -> Result<Series, Failure> {
    let mut mon = DiscreteMonitor::new(model).map_err(usage)?;
    let trace =
        read_discrete_trace(&args.trace, period).map_err(|e| trace_err(format!("{}: {e}", args.trace.display())))?;
    let used: Vec<_> = mon.variables().cloned().collect();
    let skip = if args.skip_warmup { mon.warmup() as usize } else { 0 };
    if let Some(v) = used.iter().find(|v| !trace.columns().contains_key(*v)) {
        return Err(trace_err(format!("{}: no column for variable `{v}`", args.trace.display())));
    }
    let mut series = Series::new(mon.formulas().iter().map(|p| p.name.clone()).collect());
    for (t, time) in sample_times(period, trace.len()).enumerate() {
        let row = used.iter().map(|v| (v.as_str(), trace.columns()[v][t]));
        let out = mon.update(t as u64, row).map_err(|e| trace_err(format!("sample {t}: {e}")))?;
        if t >= skip {
            series.rows.push((time, out.into_values().collect()));
        }
    }
    Ok(series)
}

fn eval_dense(model: &SpecModel, args: &EvalArgs) -> Result<Series, Failure> {
    let mut mon = DenseMonitor::new(model).map_err(usage)?;
    let batches = read_dense_batches(&args.trace).map_err(|e| trace_err(format!("{}: {e}", args.trace.display())))?;
    let used: Vec<String> = mon.variables().map(|v| v.as_str().to_string()).collect();
    if let Some(v) = used.iter().find(|v| !batches.iter().any(|(name, _)| name == *v)) {
        return Err(trace_err(format!("{}: no column for variable `{v}`", args.trace.display())));
    }
    let batch = batches.into_iter().filter(|(name, _)| used.contains(name));
    let out = mon.update(batch).map_err(|e| trace_err(format!("{}: {e}", args.trace.display())))?;
    let names: Vec<String> = out.keys().cloned().collect();
    let signals: Vec<_> = out.into_values().collect();
    let mut series = Series::from_segments(names, &signals);
    if args.skip_warmup {
        let warm = mon.formulas().iter().map(|p| p.report.warmup().to_f64()).fold(0.0, f64::max);
        series.rows.retain(|r| r.0 >= warm);
    }
    Ok(series)
}

fn pastify(args: &PastifyArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let mut spec = args.spec.clone();
    if spec.period.is_none() {
        spec.period = Some("1".into());
    }
    let model = load_model(&spec, args.time, None)?;
    let plans = pastify_all(&model).map_err(usage)?;
    for p in plans {
        let depth = p.report.past_depth.map_or("inf".to_string(), |d| d.to_string());
        writeln!(stdout, "{} = {}", p.name, format_formula(&p.pastified)).map_err(usage)?;
        writeln!(stdout, "  H={} L={}", p.report.horizon, depth).map_err(usage)?;
    }
    Ok(EXIT_OK)
}

fn bench(args: &BenchArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    if args.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    let ks = if args.k.is_empty() { DEFAULT_KS.to_vec() } else { args.k.clone() };
    let pattern = match args.pattern {
        BenchPattern::Uniform => Pattern::Uniform,
        BenchPattern::Increasing => Pattern::Increasing,
    };
    let results = run_bench(&ks, args.samples, args.seed, pattern).map_err(usage)?;
    if args.json {
        for r in &results {
            writeln!(stdout, "{}", serde_json::to_string(r).expect("plain data")).map_err(usage)?;
        }
    } else {
        write!(stdout, "{}", format_table(&results)).map_err(usage)?;
    }
    Ok(EXIT_OK)
}
