//! `lowweight`: find low-weight multiples of binary primitive polynomials.
//!
//! Records go to stdout, one per line; reports and advice go to stderr.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lowweight::dlog::{predict_memory, read_engine, write_engine, Strategy};
use lowweight::sampler::{self, SampleOutcome, SampleParams};
use lowweight::search::{self, default_split, estimate_count, SearchOutcome, DEFAULT_BUDGET_BYTES};
use lowweight::{
    oracle, parse_poly, Algorithm, EngineConfig, Error, FieldContext, LogEngine, MultipleRecord,
    SearchParams,
};

#[derive(Parser)]
#[command(name = "lowweight", version, about = "Low-weight multiples of binary primitive polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Every multiple of the given weight up to a degree bound.
    FindAll(FindAllArgs),
    /// Some multiples by random sampling.
    FindSome(FindSomeArgs),
    /// Discrete logarithm of a field element, base x.
    Log(LogArgs),
    /// Zech logarithm Log(1 + x^i).
    Zech(ZechArgs),
    /// Expected number of multiples.
    Estimate(EstimateArgs),
    /// Build a discrete-log engine and save it.
    EngineBuild(EngineBuildArgs),
    /// Brute-force reference values.
    #[command(hide = true)]
    Oracle(OracleArgs),
}

#[derive(Args)]
struct EngineArgs {
    /// Primes up to this bound get full subgroup tables.
    #[arg(long)]
    threshold: Option<u64>,
    /// Baby-step table size for primes above the threshold.
    #[arg(long)]
    baby_steps: Option<u64>,
    /// Cap on engine table bytes.
    #[arg(long, default_value_t = lowweight::dlog::DEFAULT_MEMORY_CAP)]
    engine_memory: u64,
    /// Load the engine from this cache file.
    #[arg(long)]
    cache: Option<PathBuf>,
}

impl EngineArgs {
    fn config(&self) -> EngineConfig {
        EngineConfig {
            tabulation_threshold: self.threshold,
            baby_steps: self.baby_steps,
            memory_cap: self.engine_memory,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Tmto,
    Logtmto,
    Auto,
}

#[derive(Args)]
struct FindAllArgs {
    #[arg(long)]
    poly: String,
    #[arg(long)]
    weight: u32,
    #[arg(long)]
    max_degree: u64,
    #[arg(long, value_enum, default_value = "auto")]
    algorithm: AlgorithmArg,
    /// Enumerate the probe side only up to the reduced degree bound.
    #[arg(long)]
    restrict: bool,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = DEFAULT_BUDGET_BYTES)]
    budget_bytes: u64,
    /// Check every record before printing it.
    #[arg(long)]
    verify: bool,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Logsample,
    Birthday,
    BirthdayLog,
}

#[derive(Args)]
struct FindSomeArgs {
    #[arg(long)]
    poly: String,
    #[arg(long)]
    weight: u32,
    #[arg(long)]
    max_degree: u64,
    #[arg(long)]
    count: u64,
    #[arg(long, value_enum, default_value = "birthday-log")]
    method: Method,
    #[arg(long)]
    precompute_degree: Option<u64>,
    #[arg(long)]
    q1: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1 << 20)]
    max_iterations: u64,
    #[arg(long)]
    progress_csv: Option<PathBuf>,
    #[arg(long, default_value_t = sampler::DEFAULT_PROGRESS_STRIDE)]
    progress_stride: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    verify: bool,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct LogArgs {
    #[arg(long)]
    poly: String,
    /// Element as an exponent list or 0x hex, reduced mod P.
    #[arg(long)]
    element: String,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct ZechArgs {
    #[arg(long)]
    poly: String,
    #[arg(long)]
    exponent: u64,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    weight: u32,
    #[arg(long)]
    max_degree: u64,
}

#[derive(Args)]
struct EngineBuildArgs {
    #[arg(long)]
    poly: String,
    #[arg(long)]
    threshold: Option<u64>,
    #[arg(long)]
    baby_steps: Option<u64>,
    #[arg(long, default_value_t = lowweight::dlog::DEFAULT_MEMORY_CAP)]
    engine_memory: u64,
    #[arg(long)]
    cache: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    poly: String,
    #[arg(long)]
    weight: Option<u32>,
    #[arg(long)]
    max_degree: Option<u64>,
    #[arg(long)]
    element: Option<String>,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(io::Error),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(e) => match e {
                Error::NotPrimitive(_) => 3,
                Error::MemoryBudgetExceeded { .. } | Error::InstanceTooLarge(_) => 4,
                Error::LogOfZero | Error::ZechUndefined(_) => 6,
                Error::Cache(_) => 1,
                _ => 2,
            },
            Failure::Io(_) | Failure::Other(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e @ Error::MemoryBudgetExceeded { .. }) => {
                format!("{e}; lower --max-degree, raise --budget-bytes, or use find-some")
            }
            Failure::Core(e) => e.to_string(),
            Failure::Io(e) => e.to_string(),
            Failure::Other(s) => s.clone(),
        }
    }
}

type CliResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::FindAll(a) => find_all(a),
        Command::FindSome(a) => find_some(a),
        Command::Log(a) => log(a),
        Command::Zech(a) => zech(a),
        Command::Estimate(a) => estimate(a),
        Command::EngineBuild(a) => engine_build(a),
        Command::Oracle(a) => run_oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn context(spec: &str) -> Result<FieldContext, Failure> {
    Ok(FieldContext::new(parse_poly(spec)?)?)
}

fn engine(ctx: &FieldContext, args: &EngineArgs) -> Result<(LogEngine, Duration), Failure> {
    let t = Instant::now();
    let engine = match &args.cache {
        Some(path) => {
            let e = read_engine(path)?;
            if e.ctx().poly() != ctx.poly() {
                return Err(Failure::Other(format!(
                    "cache {} holds an engine for {}, not {}",
                    path.display(),
                    e.ctx().poly(),
                    ctx.poly()
                )));
            }
            e
        }
        None => LogEngine::build(ctx, &args.config())?,
    };
    Ok((engine, t.elapsed()))
}

fn print_records<'a>(
    records: impl IntoIterator<Item = &'a MultipleRecord>,
    json: bool,
    verify: Option<(&FieldContext, u32, u64)>,
) -> io::Result<u64> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut n = 0;
    for r in records {
        if let Some((ctx, w, d)) = verify {
            assert!(
                ctx.verify_multiple(&r.poly, w as usize, d),
                "record {} failed verification",
                r.poly
            );
        }
        if json {
            let v = serde_json::json!({
                "exponents": r.poly.exponents(),
                "weight": r.weight,
                "degree": r.degree,
            });
            writeln!(out, "{v}")?;
        } else {
            writeln!(out, "{}", r.poly)?;
        }
        n += 1;
    }
    out.flush()?;
    Ok(n)
}

fn report(lines: &[(&str, String)]) {
    let stderr = io::stderr();
    let mut err = stderr.lock();
    for (k, v) in lines {
        let _ = writeln!(err, "{k}: {v}");
    }
}

fn secs(d: Duration) -> String {
    format!("{:.3}s", d.as_secs_f64())
}

fn choose_algorithm(args: &FindAllArgs, ctx: &FieldContext) -> (Algorithm, String) {
    match args.algorithm {
        AlgorithmArg::Tmto => (Algorithm::Classical, "requested".into()),
        AlgorithmArg::Logtmto => (Algorithm::Logarithmic, "requested".into()),
        AlgorithmArg::Auto => {
            if args.weight % 2 == 1 || args.weight < 4 {
                return (
                    Algorithm::Classical,
                    "odd weight: both trade-offs cost the same, tmto needs no logarithms".into(),
                );
            }
            if args.engine.cache.is_some() {
                return (Algorithm::Logarithmic, "even weight, engine from cache".into());
            }
            let predicted = predict_memory(ctx.factorization(), &args.engine.config());
            if predicted <= args.engine.engine_memory as u128 {
                (
                    Algorithm::Logarithmic,
                    format!("even weight, engine needs {predicted} bytes"),
                )
            } else {
                (
                    Algorithm::Classical,
                    format!(
                        "even weight but engine needs {predicted} bytes > {}",
                        args.engine.engine_memory
                    ),
                )
            }
        }
    }
}

fn find_all(args: FindAllArgs) -> CliResult {
    let ctx = context(&args.poly)?;
    let (algorithm, why) = choose_algorithm(&args, &ctx);
    let params = SearchParams::new(algorithm, args.weight, args.max_degree)?
        .restricted(args.restrict)
        .threads(args.threads)
        .budget(args.budget_bytes);
    let mut engine_time = None;
    let outcome: SearchOutcome = match algorithm {
        Algorithm::Classical => search::tmto_find_all(&ctx, &params)?,
        Algorithm::Logarithmic => {
            let (e, t) = engine(&ctx, &args.engine)?;
            engine_time = Some(t);
            search::logtmto_find_all(&e, &params)?
        }
    };
    let verify = args.verify.then_some((&ctx, args.weight, args.max_degree));
    let found = print_records(&outcome.records, args.json, verify)?;
    let s = &outcome.stats;
    let mut lines = vec![
        ("algorithm", format!("{} ({why})", algorithm.name())),
        ("poly", ctx.poly().to_string()),
        ("n", ctx.n().to_string()),
        ("weight", args.weight.to_string()),
        ("max_degree", args.max_degree.to_string()),
        ("split", format!("{},{}", params.q1, params.q2)),
        ("threads", args.threads.to_string()),
        ("found", found.to_string()),
        ("duplicates", s.duplicates.to_string()),
        ("zero_shift_skips", s.zero_shift_skips.to_string()),
        ("cancelled", s.cancelled.to_string()),
        ("table_entries", s.table_entries.to_string()),
        ("table_bytes", s.table_bytes.to_string()),
        ("probes", s.probes.to_string()),
        ("log_calls", s.log_calls.to_string()),
        ("second_phase_bound", s.second_phase_bound.to_string()),
        ("phase1_time", secs(s.phase1_time)),
        ("phase2_time", secs(s.phase2_time)),
    ];
    if let Some(t) = engine_time {
        lines.push(("engine_time", secs(t)));
    }
    lines.push((
        "estimate",
        format!("{:.1}", estimate_count(ctx.n(), args.weight, args.max_degree)),
    ));
    report(&lines);
    Ok(0)
}

fn find_some(args: FindSomeArgs) -> CliResult {
    let ctx = context(&args.poly)?;
    let mut params = SampleParams::new(args.weight, args.max_degree, args.count)
        .seed(args.seed)
        .max_iterations(args.max_iterations)
        .threads(args.threads)
        .progress_stride(args.progress_stride);
    params.q1 = args.q1;
    params.precompute_degree = args.precompute_degree;
    let mut engine_time = None;
    let (name, outcome): (&str, SampleOutcome) = match args.method {
        Method::Birthday => ("birthday", sampler::birthday_tmto(&ctx, &params)?),
        Method::Logsample | Method::BirthdayLog => {
            let (e, t) = engine(&ctx, &args.engine)?;
            engine_time = Some(t);
            match args.method {
                Method::Logsample => ("logsample", sampler::random_log_sample(&e, &params)?),
                _ => ("birthday-log", sampler::birthday_logtmto(&e, &params)?),
            }
        }
    };
    let verify = args.verify.then_some((&ctx, args.weight, args.max_degree));
    let found = print_records(&outcome.records, args.json, verify)?;
    if let Some(path) = &args.progress_csv {
        sampler::write_progress_csv(&outcome.events, BufWriter::new(File::create(path)?))?;
    }
    let mut lines = vec![
        ("method", name.to_string()),
        ("poly", ctx.poly().to_string()),
        ("weight", args.weight.to_string()),
        ("max_degree", args.max_degree.to_string()),
        ("seed", args.seed.to_string()),
        ("found", found.to_string()),
        ("raw_hits", outcome.raw_hits.to_string()),
        ("duplicates", outcome.duplicates.to_string()),
        ("iterations", outcome.iterations.to_string()),
        ("table_entries", outcome.table_entries.to_string()),
    ];
    if let Some(t) = engine_time {
        lines.push(("engine_time", secs(t)));
    }
    report(&lines);
    if let Some(advice) = sampler::wagner_advice(ctx.n(), args.weight, args.max_degree) {
        eprintln!("advice: {advice}");
    }
    if outcome.exhausted {
        eprintln!(
            "iteration budget exhausted with {found} of {} multiples",
            args.count
        );
        return Ok(5);
    }
    Ok(0)
}

fn log(args: LogArgs) -> CliResult {
    let ctx = context(&args.poly)?;
    let a = ctx.residue(&parse_poly(&args.element)?);
    let (e, _) = engine(&ctx, &args.engine)?;
    println!("{}", e.discrete_log(a)?);
    Ok(0)
}

fn zech(args: ZechArgs) -> CliResult {
    let ctx = context(&args.poly)?;
    let (e, _) = engine(&ctx, &args.engine)?;
    println!("{}", e.zech_log(args.exponent)?);
    Ok(0)
}

fn estimate(args: EstimateArgs) -> CliResult {
    if args.weight < 2 {
        return Err(Error::WeightTooSmall(args.weight).into());
    }
    println!("≈{:.1}", estimate_count(args.n, args.weight, args.max_degree));
    for alg in [Algorithm::Classical, Algorithm::Logarithmic] {
        if let Ok((q1, q2)) = default_split(args.weight, alg) {
            eprintln!("{} split: {q1},{q2}", alg.name());
        }
    }
    Ok(0)
}

fn engine_build(args: EngineBuildArgs) -> CliResult {
    let ctx = context(&args.poly)?;
    let config = EngineConfig {
        tabulation_threshold: args.threshold,
        baby_steps: args.baby_steps,
        memory_cap: args.engine_memory,
    };
    let predicted = predict_memory(ctx.factorization(), &config);
    let t = Instant::now();
    let e = LogEngine::build(&ctx, &config)?;
    let built = t.elapsed();
    write_engine(&e, &args.cache)?;
    println!("predicted_bytes: {predicted}");
    println!("table_bytes: {}", e.table_bytes());
    println!("threshold: {}", e.threshold());
    for (p, s) in e.strategies() {
        match s {
            Strategy::FullTable => println!("prime {p}: full table"),
            Strategy::BabyStepGiantStep { baby_steps } => {
                println!("prime {p}: baby-step giant-step, {baby_steps} baby steps")
            }
        }
    }
    eprintln!("build_time: {}", secs(built));
    Ok(0)
}

fn run_oracle(args: OracleArgs) -> CliResult {
    let ctx = context(&args.poly)?;
    if let Some(el) = &args.element {
        let a = ctx.residue(&parse_poly(el)?);
        println!("{}", oracle::brute_force_log(&ctx, a)?);
        return Ok(0);
    }
    let (Some(w), Some(d)) = (args.weight, args.max_degree) else {
        return Err(Failure::Other("oracle needs --element or --weight with --max-degree".into()));
    };
    let records = oracle::brute_force_multiples(&ctx, w, d)?;
    print_records(&records, false, None)?;
    Ok(0)
}
