//! `wlrt`: analyze survival datasets, inspect score representations,
//! simulate trials, and run Monte Carlo power studies.
//!
//! Exit codes: 0 success, 2 validation error, 3 degenerate analysis,
//! 4 I/O error. All randomness enters through `--seed`; there is no
//! time-based default, so identical invocations produce byte-identical
//! output.

mod methods;
mod output;

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wlrt_core::{
    landmark_test, make_weights, read_dataset, relative_efficiency, run_power_study, scenario,
    score_statistic, simulate_trial, weighted_logrank, weights_to_scores, MethodSpec, PowerRow,
    ReplicationRng, RiskTable, ScenarioId, Scheme, StudyConfig, SubjectRecord, TestResult,
    TrialDesign, VarianceKind,
};

use methods::{parse_method_grid, resolve_method};
use output::{fmt_f64, json_escape};

#[derive(Parser)]
#[command(name = "wlrt", version, about = "Weighted and modestly weighted logrank analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one test on a dataset CSV and emit a result JSON object.
    Analyze(AnalyzeArgs),
    /// Emit the score representation (t,c,C,w) of a logrank-family method.
    Scores(ScoresArgs),
    /// Simulate one trial dataset under a canonical scenario.
    Simulate(SimulateArgs),
    /// Run a Monte Carlo power study over scenarios x methods.
    Power(PowerArgs),
    /// Relative efficiency of two powers at a one-sided level.
    Efficiency(EfficiencyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VarianceArg {
    Plugin,
    Permutation,
}

impl From<VarianceArg> for VarianceKind {
    fn from(v: VarianceArg) -> Self {
        match v {
            VarianceArg::Plugin => VarianceKind::Plugin,
            VarianceArg::Permutation => VarianceKind::Permutation,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Dataset CSV with header `time,event,arm`.
    #[arg(long)]
    input: PathBuf,
    /// One of `lrt`, `wlrt:<t*>`, `mwlrt:<t*>`, `landmark:<t*>`.
    #[arg(long)]
    method: String,
    /// Pivot/landmark time in months; alternative to the colon form.
    #[arg(long)]
    tstar: Option<f64>,
    /// Variance estimator for the logrank-family methods.
    #[arg(long, value_enum, default_value = "plugin")]
    variance: VarianceArg,
    /// Also report the two-sided convention (U^2/V against chi-square).
    #[arg(long)]
    two_sided: bool,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoresArgs {
    #[arg(long)]
    input: PathBuf,
    /// One of `lrt`, `wlrt:<t*>`, `mwlrt:<t*>` (landmark has no scores).
    #[arg(long)]
    method: String,
    /// Pivot time in months; alternative to the colon form.
    #[arg(long)]
    tstar: Option<f64>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario I, II, III, or IV.
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 100)]
    n_per_arm: u32,
    /// Accrual window in months.
    #[arg(long, default_value_t = 12.0)]
    accrual: f64,
    /// Calendar cutoff in months.
    #[arg(long, default_value_t = 36.0)]
    cutoff: f64,
    /// Master seed (required: no time-based default).
    #[arg(long)]
    seed: u64,
    /// Replication index within the seed's stream.
    #[arg(long, default_value_t = 0)]
    replication: u64,
    /// Write the dataset CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PowerArgs {
    /// Comma-separated scenario list, e.g. `I,II,III,IV`.
    #[arg(long)]
    scenarios: String,
    /// Comma-separated method descriptors; grids as
    /// `<family>:<start>:<stop>:<step>`, e.g. `lrt,wlrt:6,mwlrt:3:30:3`.
    #[arg(long)]
    methods: String,
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    /// One-sided significance level.
    #[arg(long, default_value_t = 0.025)]
    alpha: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    n_per_arm: u32,
    #[arg(long, default_value_t = 12.0)]
    accrual: f64,
    #[arg(long, default_value_t = 36.0)]
    cutoff: f64,
    /// Variance estimator used by mwlrt methods.
    #[arg(long, value_enum, default_value = "plugin")]
    variance: VarianceArg,
    /// Write the results CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EfficiencyArgs {
    #[arg(long)]
    power_a: f64,
    #[arg(long)]
    power_b: f64,
    /// One-sided significance level.
    #[arg(long, default_value_t = 0.025)]
    alpha: f64,
}

// ── error handling ───────────────────────────────────────────────────────

#[derive(Debug)]
enum CliError {
    Validation(String),
    Degenerate(String),
    Io(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Degenerate(_) => "degenerate",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Degenerate(m) | CliError::Io(m) => m,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<wlrt_core::Error> for CliError {
    fn from(e: wlrt_core::Error) -> Self {
        if e.is_degenerate() {
            CliError::Degenerate(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!(
                "{{\"error\":{{\"kind\":\"{}\",\"message\":\"{}\"}}}}",
                err.kind(),
                json_escape(err.message())
            );
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Scores(args) => scores(args),
        Command::Simulate(args) => simulate(args),
        Command::Power(args) => power(args),
        Command::Efficiency(args) => efficiency(args),
    }
}

// ── subcommands ──────────────────────────────────────────────────────────

fn load_records(path: &Path) -> Result<Vec<SubjectRecord>, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    Ok(read_dataset(BufReader::new(file))?)
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut file = File::create(path)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
            file.write_all(content.as_bytes())?;
            Ok(())
        }
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

fn analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let method = resolve_method(&args.method, args.tstar)?;
    let records = load_records(&args.input)?;
    let variance: VarianceKind = args.variance.into();

    let result: TestResult = match method {
        MethodSpec::Landmark { t_star } => {
            if variance == VarianceKind::Permutation {
                return Err(CliError::Validation(
                    "landmark has no permutation-variance form".to_string(),
                ));
            }
            landmark_test(&records, t_star)?
        }
        logrank_family => {
            let table = RiskTable::from_records(&records)?;
            let scheme = match logrank_family {
                MethodSpec::Lrt => make_weights(&table, Scheme::Standard)?,
                MethodSpec::Wlrt { t_star } => {
                    make_weights(&table, Scheme::Threshold { t_star })?
                }
                MethodSpec::Mwlrt { t_star } => {
                    make_weights(&table, Scheme::Modest { t_star })?
                }
                MethodSpec::Landmark { .. } => unreachable!(),
            };
            match variance {
                VarianceKind::Plugin => weighted_logrank(&table, &scheme)?,
                VarianceKind::Permutation => {
                    let score_set = weights_to_scores(&table, &scheme)?;
                    let s = score_statistic(&table, &score_set)?;
                    TestResult {
                        statistic: s.statistic,
                        variance: s.variance,
                        z: s.z,
                        p_one_sided: wlrt_core::normal_cdf(-s.z),
                        method: scheme.label().to_string(),
                    }
                }
            }
        }
    };

    let t_star_json = match method.t_star() {
        Some(t) => fmt_f64(t),
        None => "null".to_string(),
    };
    let mut json = format!(
        "{{\"method\":\"{}\",\"t_star\":{},\"U\":{},\"V\":{},\"z\":{},\"p_one_sided\":{}",
        method.family(),
        t_star_json,
        fmt_f64(result.statistic),
        fmt_f64(result.variance),
        fmt_f64(result.z),
        fmt_f64(result.p_one_sided),
    );
    if args.two_sided {
        let chi_square = result.z * result.z;
        let p_two_sided = 2.0 * wlrt_core::normal_cdf(-result.z.abs());
        json.push_str(&format!(
            ",\"chi_square\":{},\"p_two_sided\":{}",
            fmt_f64(chi_square),
            fmt_f64(p_two_sided)
        ));
    }
    json.push_str("}\n");
    emit(args.out.as_deref(), &json)
}

fn scores(args: ScoresArgs) -> Result<(), CliError> {
    let method = resolve_method(&args.method, args.tstar)?;
    let records = load_records(&args.input)?;
    let table = RiskTable::from_records(&records)?;
    let scheme = match method {
        MethodSpec::Lrt => make_weights(&table, Scheme::Standard)?,
        MethodSpec::Wlrt { t_star } => make_weights(&table, Scheme::Threshold { t_star })?,
        MethodSpec::Mwlrt { t_star } => make_weights(&table, Scheme::Modest { t_star })?,
        MethodSpec::Landmark { .. } => {
            return Err(CliError::Validation(
                "landmark is not a rank test; it has no score representation".to_string(),
            ))
        }
    };
    let score_set = weights_to_scores(&table, &scheme)?;

    let mut csv = String::from("t,c,C,w\n");
    for (j, row) in table.rows().iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(row.time),
            fmt_f64(score_set.event_scores()[j]),
            fmt_f64(score_set.censor_scores()[j + 1]),
            fmt_f64(scheme.weights()[j]),
        ));
    }
    emit(args.out.as_deref(), &csv)
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let id = ScenarioId::parse(&args.scenario)?;
    let spec = scenario(id)?;
    let design = TrialDesign::new(args.n_per_arm, args.accrual, args.cutoff)?;
    if design.cutoff_before_accrual_end() {
        eprintln!(
            "warning: cutoff {} lies inside the accrual window {}; late enrollees get zero follow-up",
            args.cutoff, args.accrual
        );
    }
    let mut rng = ReplicationRng::for_scenario(args.seed, id, args.replication);
    let records = simulate_trial(&spec, &design, &mut rng);

    let mut buf = Vec::new();
    wlrt_core::write_dataset(&mut buf, &records)?;
    let csv = String::from_utf8(buf).expect("dataset CSV is ASCII");
    emit(args.out.as_deref(), &csv)
}

fn power(args: PowerArgs) -> Result<(), CliError> {
    let mut scenarios = Vec::new();
    for part in args.scenarios.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(CliError::Validation("empty scenario entry".to_string()));
        }
        scenarios.push(scenario(ScenarioId::parse(part)?)?);
    }
    let methods = parse_method_grid(&args.methods)?;
    let design = TrialDesign::new(args.n_per_arm, args.accrual, args.cutoff)?;
    if design.cutoff_before_accrual_end() {
        eprintln!(
            "warning: cutoff {} lies inside the accrual window {}; late enrollees get zero follow-up",
            args.cutoff, args.accrual
        );
    }

    let mut config = StudyConfig::new(scenarios, methods, args.seed);
    config.n_reps = args.reps;
    config.alpha_one_sided = args.alpha;
    config.design = design;
    config.mwlrt_variance = args.variance.into();
    let rows = run_power_study(&config)?;

    let mut csv =
        String::from("scenario,method,t_star,n_reps,rejections,rejection_rate,mc_se,degenerate_count\n");
    for row in &rows {
        csv.push_str(&power_row_csv(row));
    }
    emit(args.out.as_deref(), &csv)
}

fn power_row_csv(row: &PowerRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{}\n",
        row.scenario,
        row.method,
        row.t_star.map(|t| t.to_string()).unwrap_or_default(),
        row.n_reps,
        row.rejections,
        fmt_f64(row.rejection_rate),
        fmt_f64(row.mc_se),
        row.degenerate,
    )
}

fn efficiency(args: EfficiencyArgs) -> Result<(), CliError> {
    let value = relative_efficiency(args.power_a, args.power_b, args.alpha)?;
    let json = format!(
        "{{\"power_a\":{},\"power_b\":{},\"alpha_one_sided\":{},\"relative_efficiency_percent\":{}}}\n",
        fmt_f64(args.power_a),
        fmt_f64(args.power_b),
        fmt_f64(args.alpha),
        fmt_f64(value),
    );
    emit(None, &json)
}
