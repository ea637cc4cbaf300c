//! Command line for pairwise-comparison matrices: conversions, rankings,
//! consistency, equalizing projections, promotion runs, stability indices,
//! and the simulation campaign with its aggregate tables.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pcmlead::io::{self, fmt_f64, LoadedMatrix, MatrixKind};
use pcmlead::montecarlo::{
    read_experiment_dir, run_experiment, summarize, write_experiment_outputs, write_figures,
    ExperimentConfig, TrialRecord, CONFIG_FILE,
};
use pcmlead::{
    additive_ranking, arsi, best_alternative, cached_orthogonal_basis, consistency_index, eq,
    geometric_ranking, nudge_leader, promote, rsi, rsi_min, AdditivePcm, Algorithm, PcmError,
    Result, ScaleBound, WEIGHT_TOL,
};

#[derive(Parser)]
#[command(version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite a matrix file in the other representation.
    Convert(ConvertArgs),
    /// Print the priority weights of a matrix.
    Rank(InputArgs),
    /// Print the consistency index of a matrix.
    Ci(InputArgs),
    /// Equalize the weights of one pair of alternatives.
    Project(ProjectArgs),
    /// Promote an alternative to the top of the ranking.
    Promote(PromoteArgs),
    /// Print the pairwise stability indices of a matrix.
    Stability(StabilityArgs),
    /// Run a simulation campaign from a JSON config.
    Simulate(SimulateArgs),
    /// Rebuild aggregate tables from an existing records directory.
    Report(ReportArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Matrix file to read.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Which way to convert; the input file must hold the source kind.
    #[arg(long)]
    direction: Direction,
}

#[derive(Copy, Clone, ValueEnum)]
enum Direction {
    Add2mul,
    Mul2add,
}

#[derive(Copy, Clone, ValueEnum)]
enum Emit {
    Add,
    Mul,
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Pair to equalize as two 1-based indices, e.g. 1,2.
    #[arg(long, value_parser = parse_pair)]
    pair: (usize, usize),
    /// Output representation; defaults to the input's.
    #[arg(long)]
    emit: Option<Emit>,
}

#[derive(Args)]
struct PromoteArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// 1-based index of the alternative to promote.
    #[arg(long)]
    target: usize,
    #[arg(long, default_value_t = Algorithm::Greedy)]
    algorithm: Algorithm,
    /// Break the final tie in the target's favor by this amount.
    #[arg(long)]
    nudge: Option<f64>,
    /// Directory for per-step matrices, rankings, and trace values.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    /// Scale bound used for the ARSI trace values.
    #[arg(long, default_value_t = SAATY_BOUND)]
    scale_bound: f64,
    /// Output representation; defaults to the input's.
    #[arg(long)]
    emit: Option<Emit>,
}

#[derive(Args)]
struct StabilityArgs {
    #[arg(long)]
    input: PathBuf,
    /// Scale bound M; every entry must lie within [-M, M].
    #[arg(long, default_value_t = SAATY_BOUND)]
    scale_bound: f64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for records and aggregate tables.
    #[arg(long, required_unless_present = "dry_run")]
    out: Option<PathBuf>,
    /// Worker threads for the trial loop; defaults to the logical cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Print the planned trial counts without running anything.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Records directory produced by `simulate`.
    #[arg(long)]
    input: PathBuf,
    /// Where to write the aggregate tables; defaults to the records directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

const SAATY_BOUND: f64 = 2.1972245773362196;

fn parse_pair(text: &str) -> std::result::Result<(usize, usize), String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected two comma-separated indices, got {text:?}"));
    }
    let i: usize = parts[0]
        .trim()
        .parse()
        .map_err(|e| format!("bad index {:?}: {e}", parts[0]))?;
    let j: usize = parts[1]
        .trim()
        .parse()
        .map_err(|e| format!("bad index {:?}: {e}", parts[1]))?;
    Ok((i, j))
}

/// 1-based flag value to 0-based library index. The error echoes the index
/// as the user wrote it.
fn to_zero_based(index: usize, n: usize) -> Result<usize> {
    if index == 0 || index > n {
        return Err(PcmError::IndexOutOfRange { index, n });
    }
    Ok(index - 1)
}

fn write_in_kind(path: &Path, a: &AdditivePcm, kind: MatrixKind) -> Result<()> {
    match kind {
        MatrixKind::Additive => io::write_additive(path, a),
        MatrixKind::Multiplicative => io::write_multiplicative(path, &a.to_multiplicative()),
    }
}

fn output_kind(emit: Option<Emit>, input: MatrixKind) -> MatrixKind {
    match emit {
        Some(Emit::Add) => MatrixKind::Additive,
        Some(Emit::Mul) => MatrixKind::Multiplicative,
        None => input,
    }
}

fn cmd_convert(args: &ConvertArgs) -> Result<()> {
    let loaded = io::read_matrix(&args.input)?;
    match (args.direction, loaded) {
        (Direction::Add2mul, LoadedMatrix::Additive(a)) => {
            io::write_multiplicative(&args.output, &a.to_multiplicative())
        }
        (Direction::Mul2add, LoadedMatrix::Multiplicative(m)) => {
            io::write_additive(&args.output, &m.to_additive())
        }
        (direction, loaded) => Err(PcmError::Parse {
            what: "matrix file".into(),
            detail: format!(
                "direction {} expects a {} input, file holds kind={}",
                match direction {
                    Direction::Add2mul => "add2mul",
                    Direction::Mul2add => "mul2add",
                },
                match direction {
                    Direction::Add2mul => "kind=additive",
                    Direction::Mul2add => "kind=multiplicative",
                },
                loaded.kind().as_str()
            ),
        }),
    }
}

fn cmd_rank(args: &InputArgs) -> Result<()> {
    let loaded = io::read_matrix(&args.input)?;
    let weights = match &loaded {
        LoadedMatrix::Additive(a) => additive_ranking(a),
        LoadedMatrix::Multiplicative(m) => geometric_ranking(m),
    };
    println!("alternative,weight");
    for i in 0..weights.len() {
        println!("{},{}", i + 1, fmt_f64(weights.get(i)));
    }
    Ok(())
}

fn cmd_ci(args: &InputArgs) -> Result<()> {
    let m = io::read_matrix(&args.input)?.into_multiplicative();
    println!("{}", fmt_f64(consistency_index(&m)?));
    Ok(())
}

fn cmd_project(args: &ProjectArgs) -> Result<()> {
    let loaded = io::read_matrix(&args.input)?;
    let kind = output_kind(args.emit, loaded.kind());
    let a = loaded.into_additive();
    let n = a.n();
    let (i, j) = (to_zero_based(args.pair.0, n)?, to_zero_based(args.pair.1, n)?);
    let basis = cached_orthogonal_basis(n)?;
    let out = eq(&a, i.min(j), i.max(j), &basis)?;
    write_in_kind(&args.output, &out, kind)
}

fn write_promotion_trace(
    dir: &Path,
    input: &AdditivePcm,
    trace: &pcmlead::PromotionTrace,
    bound: &ScaleBound,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let n = input.n();

    let mut steps = String::from("step,equated,frobenius_from_input,arsi\n");
    steps.push_str(&format!(
        "0,,{},{}\n",
        fmt_f64(0.0),
        fmt_f64(arsi(input, &bound.covering(input))?)
    ));
    let mut rankings = String::from("step");
    for i in 1..=n {
        rankings.push_str(&format!(",w_{i}"));
    }
    rankings.push('\n');
    rankings.push('0');
    let w0 = additive_ranking(input);
    for i in 0..n {
        rankings.push_str(&format!(",{}", fmt_f64(w0.get(i))));
    }
    rankings.push('\n');

    for (index, step) in trace.steps.iter().enumerate() {
        let number = index + 1;
        io::write_additive(
            &dir.join(format!("step_{number:02}.csv")),
            &step.matrix_after,
        )?;
        steps.push_str(&format!(
            "{number},{},{},{}\n",
            step.equated + 1,
            fmt_f64(step.frobenius_from_input),
            fmt_f64(step.arsi)
        ));
        rankings.push_str(&number.to_string());
        for i in 0..n {
            rankings.push_str(&format!(",{}", fmt_f64(step.ranking.get(i))));
        }
        rankings.push('\n');
    }
    fs::write(dir.join("trace.csv"), steps)?;
    fs::write(dir.join("rankings.csv"), rankings)?;
    Ok(())
}

/// Tie-breaking partner: the last equalized alternative, or for a run with
/// no steps whichever other alternative shares the top weight.
fn nudge_partner(out: &AdditivePcm, trace: &pcmlead::PromotionTrace, target: usize) -> usize {
    if let Some(step) = trace.steps.last() {
        return step.equated;
    }
    let w = additive_ranking(out);
    let top = w.get(target);
    (0..out.n())
        .filter(|&k| k != target)
        .find(|&k| (w.get(k) - top).abs() <= WEIGHT_TOL)
        .unwrap_or((target + 1) % out.n())
}

fn cmd_promote(args: &PromoteArgs) -> Result<()> {
    let loaded = io::read_matrix(&args.input)?;
    let kind = output_kind(args.emit, loaded.kind());
    let a = loaded.into_additive();
    let target = to_zero_based(args.target, a.n())?;
    let basis = cached_orthogonal_basis(a.n())?;
    let bound = ScaleBound::new(args.scale_bound)?;
    let (mut out, trace) = promote(&a, target, args.algorithm, &basis, &bound)?;
    if let Some(dir) = &args.trace_dir {
        write_promotion_trace(dir, &a, &trace, &bound)?;
    }
    if let Some(delta) = args.nudge {
        out = nudge_leader(&out, target, nudge_partner(&out, &trace, target), delta)?;
    }
    write_in_kind(&args.output, &out, kind)?;
    let w = additive_ranking(&out);
    println!(
        "target {} after {} iteration(s): weight {}, leader {}",
        args.target,
        trace.iterations(),
        fmt_f64(w.get(target)),
        best_alternative(&w) + 1
    );
    Ok(())
}

fn cmd_stability(args: &StabilityArgs) -> Result<()> {
    let a = io::read_matrix(&args.input)?.into_additive();
    let bound = ScaleBound::new(args.scale_bound)?;
    let n = a.n();
    println!("i,j,rsi");
    for i in 0..n {
        for j in (i + 1)..n {
            println!("{},{},{}", i + 1, j + 1, fmt_f64(rsi(&a, i, j, &bound)?));
        }
    }
    println!("rsi_min,{}", fmt_f64(rsi_min(&a, &bound)?));
    println!("arsi,{}", fmt_f64(arsi(&a, &bound)?));
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.dry_run {
        println!("planned matrices: {}", config.planned_matrices());
        println!("planned runs: {}", config.planned_runs());
        return Ok(());
    }
    let records = match args.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| PcmError::InvalidConfig {
                    reason: format!("cannot build a {jobs}-thread pool: {e}"),
                })?;
            pool.install(|| run_experiment(&config))?
        }
        None => run_experiment(&config)?,
    };
    let out = args.out.as_ref().expect("clap requires --out without --dry-run");
    write_experiment_outputs(out, &config, &records)?;
    for s in summarize(&records) {
        println!(
            "{} {}: {} trial(s), {} failed, mean iterations {}, mean ci {} -> {}",
            s.algorithm,
            s.strategy,
            s.trials,
            s.failed,
            fmt_f64(s.mean_iterations),
            fmt_f64(s.mean_ci_input),
            fmt_f64(s.mean_ci_output)
        );
    }
    Ok(())
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

fn print_ci_shift(records: &[TrialRecord]) {
    let mut shifts: Vec<f64> = records
        .iter()
        .filter(|r| !r.is_failed())
        .map(|r| (r.ci_output - r.ci_input).abs())
        .collect();
    shifts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if shifts.is_empty() {
        println!("ci shift: no usable records");
        return;
    }
    let mean = shifts.iter().sum::<f64>() / shifts.len() as f64;
    println!(
        "ci shift |after - before|: mean {}, median {}, p90 {}, max {}",
        fmt_f64(mean),
        fmt_f64(quantile(&shifts, 0.5)),
        fmt_f64(quantile(&shifts, 0.9)),
        fmt_f64(shifts[shifts.len() - 1])
    );
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let records = read_experiment_dir(&args.input)?;
    let config_path = args.input.join(CONFIG_FILE);
    let (bin_width, bin_min_count) = if config_path.exists() {
        let config = ExperimentConfig::from_json(&fs::read_to_string(&config_path)?)?;
        (config.ci_bin_width, config.ci_bin_min_count)
    } else {
        (0.01, 30)
    };
    let out = args.out.clone().unwrap_or_else(|| args.input.clone());
    fs::create_dir_all(&out)?;
    write_figures(&out, &records, bin_width, bin_min_count)?;
    for s in summarize(&records) {
        println!(
            "{} {}: {} trial(s), {} failed, mean iterations {}",
            s.algorithm,
            s.strategy,
            s.trials,
            s.failed,
            fmt_f64(s.mean_iterations)
        );
    }
    print_ci_shift(&records);
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Convert(args) => cmd_convert(args),
        Command::Rank(args) => cmd_rank(args),
        Command::Ci(args) => cmd_ci(args),
        Command::Project(args) => cmd_project(args),
        Command::Promote(args) => cmd_promote(args),
        Command::Stability(args) => cmd_stability(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn exit_code(err: &PcmError) -> i32 {
    match err {
        PcmError::Parse { .. } | PcmError::InvalidConfig { .. } | PcmError::Io(_) => 2,
        PcmError::IndexOutOfRange { .. }
        | PcmError::InvalidPair { .. }
        | PcmError::NotTiedAtTop { .. }
        | PcmError::NegativeDelta { .. }
        | PcmError::PromotionStalled { .. } => 4,
        _ => 3,
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
