use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dqm_landscape::landscape::{energy_lines, Landscape};
use dqm_landscape::sample::{exhaustive_min, greedy_descent, simulated_annealing, AnnealSchedule};
use dqm_landscape::thresholds::{search_counterexample, SearchParams};
use dqm_landscape::{
    encode, export_qubo, import_qubo, verify_predicates, BitString, DqmInstance, EncodingDescriptor, EncodingKind,
    Error, QuboPair, SearchPredicate, ThresholdReport, DEFAULT_CAP,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

/// Encode discrete quadratic models as QUBOs and analyse their landscapes.
#[derive(Debug, Parser)]
#[command(name = "dqm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode a model file into the QUBO text format.
    Encode(EncodeArgs),
    /// Decode a bitstring back to discrete values.
    Decode(DecodeArgs),
    /// Dump every solution of the landscape as JSON.
    Analyze(AnalyzeArgs),
    /// Compute the penalty thresholds with witnesses.
    Thresholds(InputArgs),
    /// Write energy against penalty weight as long-form CSV.
    Sweep(SweepArgs),
    /// Minimise the penalised energy at a fixed weight.
    Solve(SolveArgs),
    /// Draw random models until the thresholds separate as asked.
    Search(SearchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    OneHot,
    DomainWall,
}

impl From<Kind> for EncodingKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::OneHot => EncodingKind::OneHot,
            Kind::DomainWall => EncodingKind::DomainWall,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Exhaustive,
    Greedy,
    Sa,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exhaustive => "exhaustive",
            Method::Greedy => "greedy",
            Method::Sa => "sa",
        })
    }
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Model JSON file, or a QUBO text file.
    #[arg(long)]
    input: PathBuf,
    /// Required when the input is a model file.
    #[arg(long, value_enum)]
    encoding: Option<Kind>,
    /// Value orderings as a JSON list of permutations, one per register.
    #[arg(long)]
    perms: Option<String>,
    /// Largest variable count that may be enumerated.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    max_vars: usize,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    encoding: Kind,
    #[arg(long)]
    perms: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    #[arg(long, value_enum)]
    encoding: Kind,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    l: usize,
    /// Bitstring, variable 0 first.
    #[arg(long)]
    bits: BitString,
    #[arg(long)]
    perms: Option<String>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Also report which solutions are strict local minima at this weight.
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, allow_negative_numbers = true)]
    gamma_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    gamma_max: f64,
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = Method::Exhaustive)]
    method: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra annealing runs after the first.
    #[arg(long, default_value_t = 0)]
    restarts: usize,
    #[arg(long)]
    sweeps: Option<usize>,
    /// Starting bitstring for greedy descent; drawn from the seed if absent.
    #[arg(long)]
    start: Option<BitString>,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, value_enum)]
    encoding: Kind,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    l: usize,
    #[arg(long, allow_negative_numbers = true)]
    coeff_lo: i64,
    #[arg(long, allow_negative_numbers = true)]
    coeff_hi: i64,
    /// gamma_prime_gt_star or gamma_double_prime_lt_star
    #[arg(long)]
    predicate: SearchPredicate,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    /// Where to write the model that was found.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
struct NotFound(u64);

impl fmt::Display for NotFound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "no instance found within {} draws", self.0)
    }
}

impl std::error::Error for NotFound {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<NotFound>().is_some() {
            return 3;
        }
        match cause.downcast_ref::<Error>() {
            Some(Error::CapExceeded { .. }) => return 2,
            Some(Error::Degenerate(_)) => return 4,
            _ => {}
        }
    }
    1
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parse_perms(perms: Option<&str>) -> anyhow::Result<Option<Vec<Vec<usize>>>> {
    perms
        .map(|s| serde_json::from_str(s).context("--perms must be a JSON list of permutations"))
        .transpose()
}

fn load_model(path: &Path) -> anyhow::Result<DqmInstance> {
    let text = read(path)?;
    DqmInstance::from_json(&text).with_context(|| format!("{}", path.display()))
}

impl InputArgs {
    fn load(&self) -> anyhow::Result<QuboPair> {
        let text = read(&self.input)?;
        let q = if text.trim_start().starts_with('{') {
            let dqm = DqmInstance::from_json(&text).with_context(|| format!("{}", self.input.display()))?;
            let Some(kind) = self.encoding else {
                bail!("--encoding is required for model input");
            };
            encode(&dqm, kind.into(), parse_perms(self.perms.as_deref())?)?
        } else {
            import_qubo(&text).with_context(|| format!("{}", self.input.display()))?
        };
        if q.n() > self.max_vars {
            return Err(Error::CapExceeded {
                n: q.n(),
                cap: self.max_vars,
            }
            .into());
        }
        Ok(q)
    }
}

fn emit(output: Option<&Path>, body: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, body).with_context(|| format!("cannot write {}", path.display())),
        None => {
            io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

fn to_json(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json value serializes");
    s.push('\n');
    s
}

fn cmd_encode(args: &EncodeArgs) -> anyhow::Result<()> {
    let dqm = load_model(&args.input)?;
    let q = encode(&dqm, args.encoding.into(), parse_perms(args.perms.as_deref())?)?;
    emit(args.output.as_deref(), &export_qubo(&q))
}

fn cmd_decode(args: &DecodeArgs) -> anyhow::Result<()> {
    let d = EncodingDescriptor::new(args.encoding.into(), args.k, args.l, parse_perms(args.perms.as_deref())?)?;
    let result = d.decode(&args.bits)?;
    emit(None, &to_json(&serde_json::to_value(result)?))
}

fn cmd_analyze(args: &AnalyzeArgs) -> anyhow::Result<()> {
    let q = args.input.load()?;
    let land = Landscape::new(&q, args.input.max_vars)?;
    // thresholds are undefined for some models; the dump is still useful
    let thresholds = match ThresholdReport::compute(&land) {
        Ok(r) => Some(r),
        Err(Error::Degenerate(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut report = json!({
        "descriptor": q.descriptor(),
        "stats": land.stats(),
        "thresholds": thresholds,
        "solutions": land.records(args.gamma),
    });
    if let Some(g) = args.gamma {
        report["predicates"] = serde_json::to_value(verify_predicates(&land, g))?;
    }
    emit(args.output.as_deref(), &to_json(&report))
}

fn cmd_thresholds(args: &InputArgs) -> anyhow::Result<()> {
    let q = args.load()?;
    let report = ThresholdReport::from_qubo(&q, args.max_vars)?;
    emit(None, &to_json(&serde_json::to_value(report)?))
}

fn cmd_sweep(args: &SweepArgs) -> anyhow::Result<()> {
    if !(args.gamma_min < args.gamma_max) {
        bail!("--gamma-min must be below --gamma-max");
    }
    if args.steps < 2 {
        bail!("--steps must be at least 2");
    }
    let q = args.input.load()?;
    let lines = energy_lines(&q, args.input.max_vars)?;
    let width = args.gamma_max - args.gamma_min;
    let last = (args.steps - 1) as f64;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["gamma", "bits", "valid", "f"])?;
    for i in 0..args.steps {
        let gamma = if i + 1 == args.steps {
            args.gamma_max
        } else {
            args.gamma_min + width * i as f64 / last
        };
        for line in &lines {
            let f = line.intercept + line.slope * gamma;
            w.write_record([gamma.to_string(), line.bits.to_string(), line.valid.to_string(), f.to_string()])?;
        }
    }
    let body = String::from_utf8(w.into_inner()?)?;
    emit(args.output.as_deref(), &body)
}

fn cmd_solve(args: &SolveArgs) -> anyhow::Result<()> {
    let q = args.input.load()?;
    let (bits, f, steps) = match args.method {
        Method::Exhaustive => {
            let s = exhaustive_min(&q, args.gamma, args.input.max_vars)?;
            (s.bits, s.f, None)
        }
        Method::Greedy => {
            let start = match &args.start {
                Some(b) => b.clone(),
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
                    BitString::from((0..q.n()).map(|_| rng.gen::<bool>()).collect::<Vec<_>>())
                }
            };
            let t = greedy_descent(&q, args.gamma, &start)?;
            let steps = t.step_count();
            (t.final_bits, t.final_f, Some(steps))
        }
        Method::Sa => {
            let mut schedule = AnnealSchedule {
                restarts: args.restarts,
                ..Default::default()
            };
            if let Some(s) = args.sweeps {
                schedule.sweeps = s;
            }
            let s = simulated_annealing(&q, args.gamma, &schedule, args.seed)?;
            (s.bits, s.f, Some(schedule.sweeps))
        }
    };
    let valid = q.is_valid(&bits);
    let report = json!({
        "method": args.method.to_string(),
        "gamma": args.gamma,
        "seed": args.seed,
        "bits": bits,
        "f": f,
        "valid": valid,
        "steps_or_sweeps": steps,
    });
    emit(None, &to_json(&report))
}

fn cmd_search(args: &SearchArgs) -> anyhow::Result<()> {
    let params = SearchParams {
        kind: args.encoding.into(),
        k: args.k,
        l: args.l,
        coeff_lo: args.coeff_lo,
        coeff_hi: args.coeff_hi,
        predicate: args.predicate,
        seed: args.seed,
        budget: args.budget,
    };
    let Some(hit) = search_counterexample(&params)? else {
        return Err(NotFound(args.budget).into());
    };
    let model = hit.dqm.to_json();
    if let Some(path) = &args.output {
        fs::write(path, &model).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let report = json!({
        "predicate": args.predicate.to_string(),
        "seed": args.seed,
        "draws": hit.draws,
        "model": serde_json::from_str::<serde_json::Value>(&model)?,
        "report": hit.report,
    });
    emit(None, &to_json(&report))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Encode(a) => cmd_encode(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Thresholds(a) => cmd_thresholds(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Search(a) => cmd_search(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
