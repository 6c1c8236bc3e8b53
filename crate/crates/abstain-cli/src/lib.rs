//! Command-line front end: dataset generation, rejector training and
//! evaluation, precision/coverage sweeps, theory verification, and the
//! coverage-limit calculator.
//!
//! Exit codes: 0 success, 1 validation error (bad flags, bad values,
//! malformed inputs), 2 verification failure, 3 I/O error. Every run is
//! reproducible: fixed seed means byte-identical primary outputs, and the
//! resolved configuration is echoed as `<out stem>.config.json` beside each
//! output file.

pub mod config;
pub mod verify;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use abstain_core::curve::{export_json, export_plot_data};
use abstain_core::dataset::{read_jsonl_path, write_jsonl_path, Dataset, TitlePolicy};
use abstain_core::eval::{precision_coverage, sweep, theoretical_limit, Method, SweepSettings};
use abstain_core::folds::Folds;
use abstain_core::models::{
    init_rejector, Rejector, RejectorSpec, DEFAULT_MLP_WIDTH, DEFAULT_SCORE_OFFSET,
};
use abstain_core::params::RejectionParams;
use abstain_core::synthetic::{sample, task_by_name, SyntheticTask};
use abstain_core::train::{train_cross_entropy, train_surrogate, TrainConfig, TrainReport};
use abstain_core::CoreError;

use config::{echo_config, pick, pick_opt, EffectiveConfig, FileConfig};

#[derive(Debug)]
pub enum CliError {
    Core(CoreError),
    Msg(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Msg(s) => write!(f, "{s}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    /// 3 for I/O failures, 1 for everything else (validation).
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::Io(_)) => 3,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "abstain",
    version,
    about = "Learning-to-reject toolkit: train rejectors, sweep precision/coverage curves, verify the calibration theory"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize a dataset from a task spec into JSONL
    Gen(GenArgs),
    /// Train a rejector and emit a JSON report
    Train(TrainArgs),
    /// Precision/coverage of a serialized rejector on a dataset
    Eval(EvalArgs),
    /// Cross-validated precision/coverage curve to CSV
    Sweep(SweepArgs),
    /// Run the theory property grids and emit a pass/fail table
    Verify(VerifyArgs),
    /// Print the coverage ceiling for a positive rate and target precision
    Limit(LimitArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Catalog task name (try: const-0.8, logistic-1d, two-level, near-limit)
    #[arg(long)]
    task: Option<String>,
    /// Number of examples [default: 1000]
    #[arg(long)]
    n: Option<usize>,
    /// Sampling seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Override the task's rejection cost
    #[arg(long)]
    c: Option<f64>,
    /// Attach confidence scores: accuracy plus uniform noise of this amplitude
    #[arg(long)]
    score_noise: Option<f64>,
    /// Output JSONL path
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config file mirroring these flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Input dataset (JSONL); alternative to --task
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Catalog task name to sample a dataset from
    #[arg(long)]
    task: Option<String>,
    /// Examples to sample when using --task [default: 1000]
    #[arg(long)]
    n: Option<usize>,
    /// Training objective: surrogate or cross_entropy [default: surrogate]
    #[arg(long)]
    method: Option<String>,
    /// Rejection cost (required for the surrogate objective)
    #[arg(long)]
    c: Option<f64>,
    /// Margin scale of the surrogate [default: 4]
    #[arg(long)]
    alpha: Option<f64>,
    /// Explicit reject-term rate; defaults to the constraint-tied value
    #[arg(long)]
    beta: Option<f64>,
    /// Rejector family: constant, linear, mlp1 or score_offset [default: linear]
    #[arg(long)]
    model: Option<String>,
    /// Hidden width for mlp1 [default: 16]
    #[arg(long)]
    width: Option<usize>,
    /// Score offset for the score_offset family [default: 0.5]
    #[arg(long)]
    offset: Option<f64>,
    /// Learning rate [default: 0.01]
    #[arg(long)]
    lr: Option<f64>,
    /// Training epochs [default: 500]
    #[arg(long)]
    epochs: Option<usize>,
    /// Mini-batch size [default: 64]
    #[arg(long)]
    batch: Option<usize>,
    /// L2 penalty [default: 0]
    #[arg(long)]
    l2: Option<f64>,
    /// Seed for init, shuffling and sampling [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// How the "title" annotation is counted: correct or incorrect [default: correct]
    #[arg(long)]
    title_policy: Option<String>,
    /// Write the JSON train report here (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the bare rejector JSON here
    #[arg(long)]
    rejector_out: Option<PathBuf>,
    /// TOML config file mirroring these flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Input dataset (JSONL)
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Serialized rejector (bare JSON or a train report containing one)
    #[arg(long)]
    rejector: Option<PathBuf>,
    /// Accept when rejector output exceeds this [default: 0]
    #[arg(long)]
    threshold: Option<f64>,
    /// How the "title" annotation is counted: correct or incorrect [default: correct]
    #[arg(long)]
    title_policy: Option<String>,
    /// Also write the JSON metrics here
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config file mirroring these flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Input dataset (JSONL); alternative to --task
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Catalog task name to sample a dataset from
    #[arg(long)]
    task: Option<String>,
    /// Examples to sample when using --task [default: 1000]
    #[arg(long)]
    n: Option<usize>,
    /// Method to sweep: maxprob, cross_entropy or surrogate
    #[arg(long)]
    method: Option<String>,
    /// Grid values, comma separated: costs for surrogate, target precisions otherwise
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Cross-validation folds [default: 4]
    #[arg(long)]
    k: Option<usize>,
    /// Margin scale for surrogate cells [default: 4]
    #[arg(long)]
    alpha: Option<f64>,
    /// Rejector family: constant, linear, mlp1 or score_offset [default: linear]
    #[arg(long)]
    model: Option<String>,
    /// Hidden width for mlp1 [default: 16]
    #[arg(long)]
    width: Option<usize>,
    /// Score offset for the score_offset family [default: 0.5]
    #[arg(long)]
    offset: Option<f64>,
    /// Learning rate [default: 0.01]
    #[arg(long)]
    lr: Option<f64>,
    /// Training epochs [default: 500]
    #[arg(long)]
    epochs: Option<usize>,
    /// Mini-batch size [default: 64]
    #[arg(long)]
    batch: Option<usize>,
    /// L2 penalty [default: 0]
    #[arg(long)]
    l2: Option<f64>,
    /// Base seed; folds and cells derive theirs from it [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Fit score thresholds on half of each held-out fold instead of the training split
    #[arg(long)]
    fit_on_half_holdout: bool,
    /// How the "title" annotation is counted: correct or incorrect [default: correct]
    #[arg(long)]
    title_policy: Option<String>,
    /// Write the curve CSV here (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the curve as JSON
    #[arg(long)]
    json_out: Option<PathBuf>,
    /// Also write a gnuplot-ready data file
    #[arg(long)]
    dat_out: Option<PathBuf>,
    /// TOML config file mirroring these flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Smaller grids and sample counts (seconds instead of minutes)
    #[arg(long)]
    quick: bool,
    /// Write the pass/fail CSV here as well
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LimitArgs {
    /// Positive rate: fraction of correct predictions
    #[arg(long)]
    b: Option<f64>,
    /// Target precision
    #[arg(long)]
    p: Option<f64>,
    /// TOML config file mirroring these flags
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Parses argv and runs; returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            if code == 0 {
                print!("{e}");
            } else {
                eprint!("{e}");
            }
            return code;
        }
    };
    let result = match cli.cmd {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Train(a) => cmd_train(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Limit(a) => cmd_limit(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn parse_model(name: &str, width: usize, offset: f64) -> Result<RejectorSpec, CliError> {
    match name {
        "constant" => Ok(RejectorSpec::Constant),
        "linear" => Ok(RejectorSpec::Linear),
        "mlp1" => Ok(RejectorSpec::Mlp1 { width }),
        "score_offset" => Ok(RejectorSpec::ScoreOffset { offset }),
        other => Err(CliError::Msg(format!(
            "unknown model {other:?} (expected constant, linear, mlp1 or score_offset)"
        ))),
    }
}

fn parse_title_policy(name: &str) -> Result<TitlePolicy, CliError> {
    match name {
        "correct" => Ok(TitlePolicy::Correct),
        "incorrect" => Ok(TitlePolicy::Incorrect),
        other => Err(CliError::Msg(format!(
            "unknown title policy {other:?} (expected correct or incorrect)"
        ))),
    }
}

fn parse_method(name: &str) -> Result<Method, CliError> {
    name.parse().map_err(CliError::Msg)
}

/// Task from the --task name flag or the config file (name or inline table).
fn resolve_task(
    flag: &Option<String>,
    cfg: &FileConfig,
    default_c: f64,
) -> Result<Option<SyntheticTask>, CliError> {
    if let Some(name) = flag {
        return task_by_name(name, default_c)
            .map(Some)
            .ok_or_else(|| CliError::Msg(format!("unknown task name {name:?}")));
    }
    cfg.resolve_task(default_c)
}

/// Dataset from --dataset or sampled from a task; returns the task too so
/// its cost can serve as a default.
fn resolve_dataset(
    dataset: Option<PathBuf>,
    task_flag: &Option<String>,
    cfg: &FileConfig,
    c: Option<f64>,
    n: usize,
    seed: u64,
    policy: TitlePolicy,
) -> Result<(Dataset, Option<SyntheticTask>, Option<String>), CliError> {
    let dataset_path = pick_opt(dataset, cfg.dataset.clone());
    if let Some(path) = dataset_path {
        let data = read_jsonl_path(&path, policy)?;
        return Ok((data, None, Some(path.display().to_string())));
    }
    let mut task = resolve_task(task_flag, cfg, c.unwrap_or(0.1))?
        .ok_or_else(|| CliError::Msg("need --dataset or --task".to_string()))?;
    if let Some(c) = c {
        task.c = c;
    }
    task.validate()?;
    let data = sample(&task, n, seed)?;
    Ok((data, Some(task), None))
}

fn write_text(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Core(CoreError::Io(e)))?;
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<i32, CliError> {
    let cfg = FileConfig::load(args.config.as_deref())?;
    let c = pick_opt(args.c, cfg.c);
    let n = pick(args.n, cfg.n, 1000);
    let seed = pick(args.seed, cfg.seed, 0);
    let score_noise = pick_opt(args.score_noise, cfg.score_noise);
    let out = pick_opt(args.out, cfg.out.clone())
        .ok_or_else(|| CliError::Msg("gen needs --out".to_string()))?;

    let mut task = resolve_task(&args.task, &cfg, c.unwrap_or(0.1))?
        .ok_or_else(|| CliError::Msg("gen needs --task or a task in the config".to_string()))?;
    if let Some(c) = c {
        task.c = c;
    }
    if let Some(a) = score_noise {
        task.score_noise = Some(a);
    }
    task.validate()?;

    let data = sample(&task, n, seed)?;
    write_jsonl_path(&data, &out)?;
    echo_config(
        &EffectiveConfig {
            subcommand: "gen",
            task: Some(task),
            n: Some(n),
            seed: Some(seed),
            out: Some(out.display().to_string()),
            ..Default::default()
        },
        &out,
    )?;
    println!("wrote {} examples to {}", n, out.display());
    Ok(0)
}

fn cmd_train(args: TrainArgs) -> Result<i32, CliError> {
    let cfg = FileConfig::load(args.config.as_deref())?;
    let policy = parse_title_policy(&pick(
        args.title_policy.clone(),
        cfg.title_policy.clone(),
        "correct".to_string(),
    ))?;
    let seed = pick(args.seed, cfg.seed, 0);
    let n = pick(args.n, cfg.n, 1000);
    let c_flag = pick_opt(args.c, cfg.c);
    let (data, task, dataset_path) = resolve_dataset(
        args.dataset.clone(),
        &args.task,
        &cfg,
        c_flag,
        n,
        seed,
        policy,
    )?;

    let method_name = pick(args.method.clone(), cfg.method.clone(), "surrogate".into());
    let width = pick(args.width, cfg.width, DEFAULT_MLP_WIDTH);
    let offset = pick(args.offset, cfg.offset, DEFAULT_SCORE_OFFSET);
    let model_name = pick(args.model.clone(), cfg.model.clone(), "linear".into());
    let spec = parse_model(&model_name, width, offset)?;
    let train_cfg = TrainConfig {
        learning_rate: pick(args.lr, cfg.lr, 1e-2),
        epochs: pick(args.epochs, cfg.epochs, 500),
        batch_size: pick(args.batch, cfg.batch, 64),
        l2_penalty: pick(args.l2, cfg.l2, 0.0),
        seed,
    };
    let rejector0 = init_rejector(spec, data.dim(), seed)?;

    let alpha = pick(args.alpha, cfg.alpha, 4.0);
    let beta = pick_opt(args.beta, cfg.beta);
    let mut effective_c = None;
    let report = match parse_method(&method_name)? {
        Method::Surrogate => {
            let c = c_flag.or_else(|| task.as_ref().map(|t| t.c)).ok_or_else(|| {
                CliError::Msg("surrogate training needs --c (or a task with a cost)".to_string())
            })?;
            effective_c = Some(c);
            let params = RejectionParams::new(c, alpha, beta)?;
            if !params.constraint_satisfied() {
                eprintln!(
                    "warning: beta is not the constraint-tied value; the trained rejector's \
                     accept/reject sign may disagree with the target optimum"
                );
            }
            train_surrogate(&data, &params, &rejector0, &train_cfg)?
        }
        Method::CrossEntropy => train_cross_entropy(&data, &rejector0, &train_cfg)?,
        Method::MaxProb => {
            return Err(CliError::Msg(
                "maxprob has no training step; use sweep or eval with a score_offset rejector"
                    .to_string(),
            ))
        }
    };

    emit_train_outputs(&args, &report, effective_c, alpha, beta, &TrainMeta {
        dataset: dataset_path,
        task,
        n,
        seed,
        method: method_name,
        model: model_name,
        width,
        train_cfg,
    })
}

struct TrainMeta {
    dataset: Option<String>,
    task: Option<SyntheticTask>,
    n: usize,
    seed: u64,
    method: String,
    model: String,
    width: usize,
    train_cfg: TrainConfig,
}

fn emit_train_outputs(
    args: &TrainArgs,
    report: &TrainReport,
    c: Option<f64>,
    alpha: f64,
    beta: Option<f64>,
    meta: &TrainMeta,
) -> Result<i32, CliError> {
    let json = report.to_json();
    if let Some(path) = &args.rejector_out {
        abstain_core::models::save_json(&report.rejector, path)?;
    }
    match &args.out {
        Some(path) => {
            write_text(path, &(json + "\n"))?;
            echo_config(
                &EffectiveConfig {
                    subcommand: "train",
                    dataset: meta.dataset.clone(),
                    task: meta.task.clone(),
                    n: meta.task.as_ref().map(|_| meta.n),
                    c,
                    alpha: Some(alpha),
                    beta,
                    method: Some(meta.method.clone()),
                    model: Some(meta.model.clone()),
                    width: (meta.model == "mlp1").then_some(meta.width),
                    lr: Some(meta.train_cfg.learning_rate),
                    epochs: Some(meta.train_cfg.epochs),
                    batch: Some(meta.train_cfg.batch_size),
                    l2: Some(meta.train_cfg.l2_penalty),
                    seed: Some(meta.seed),
                    out: Some(path.display().to_string()),
                    ..Default::default()
                },
                path,
            )?;
            let last = report.loss_trace.last().copied().unwrap_or(f64::NAN);
            println!(
                "trained {} for {} epochs, final loss {}, converged {}",
                meta.model,
                meta.train_cfg.epochs,
                abstain_core::curve::fmt_sig(last, 6),
                report.converged
            );
        }
        None => println!("{json}"),
    }
    Ok(0)
}

/// Accepts a bare rejector wire file or a train report wrapping one.
fn load_rejector(path: &PathBuf) -> Result<Rejector, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Core(CoreError::Io(e)))?;
    match abstain_core::models::from_json(&text) {
        Ok(r) => Ok(r),
        Err(first) => {
            let wrapped: Option<Rejector> = serde_json::from_str::<serde_json::Value>(&text)
                .ok()
                .and_then(|v| v.get("rejector").cloned())
                .and_then(|r| abstain_core::models::from_json(&r.to_string()).ok());
            wrapped.ok_or(CliError::Core(first))
        }
    }
}

fn cmd_eval(args: EvalArgs) -> Result<i32, CliError> {
    let cfg = FileConfig::load(args.config.as_deref())?;
    let policy = parse_title_policy(&pick(
        args.title_policy.clone(),
        cfg.title_policy.clone(),
        "correct".to_string(),
    ))?;
    let dataset_path = pick_opt(args.dataset.clone(), cfg.dataset.clone())
        .ok_or_else(|| CliError::Msg("eval needs --dataset".to_string()))?;
    let rejector_path = args
        .rejector
        .clone()
        .ok_or_else(|| CliError::Msg("eval needs --rejector".to_string()))?;
    let threshold = pick(args.threshold, cfg.threshold, 0.0);

    let data = read_jsonl_path(&dataset_path, policy)?;
    let rejector = load_rejector(&rejector_path)?;
    let r_values: Vec<f64> = data
        .examples()
        .iter()
        .map(|e| rejector.predict(e).map(|r| r - threshold))
        .collect::<Result<_, _>>()?;
    let annotations: Vec<_> = data.examples().iter().map(|e| e.annotation).collect();
    let point = precision_coverage(&r_values, &annotations)?;
    let json = serde_json::to_string_pretty(&point).map_err(CoreError::Json)?;
    println!("{json}");
    if let Some(path) = &args.out {
        write_text(path, &(json.clone() + "\n"))?;
        echo_config(
            &EffectiveConfig {
                subcommand: "eval",
                dataset: Some(dataset_path.display().to_string()),
                threshold: Some(threshold),
                out: Some(path.display().to_string()),
                ..Default::default()
            },
            path,
        )?;
    }
    Ok(0)
}

fn cmd_sweep(args: SweepArgs) -> Result<i32, CliError> {
    let cfg = FileConfig::load(args.config.as_deref())?;
    let policy = parse_title_policy(&pick(
        args.title_policy.clone(),
        cfg.title_policy.clone(),
        "correct".to_string(),
    ))?;
    let seed = pick(args.seed, cfg.seed, 0);
    let n = pick(args.n, cfg.n, 1000);
    let (data, task, dataset_path) =
        resolve_dataset(args.dataset.clone(), &args.task, &cfg, None, n, seed, policy)?;

    let method_name = pick_opt(args.method.clone(), cfg.method.clone())
        .ok_or_else(|| CliError::Msg("sweep needs --method".to_string()))?;
    let method = parse_method(&method_name)?;
    let grid = pick_opt(args.grid.clone(), cfg.grid.clone())
        .ok_or_else(|| CliError::Msg("sweep needs --grid".to_string()))?;
    let k = pick(args.k, cfg.k, 4);
    let folds = if k == 1 {
        Folds::single(data.len())?
    } else {
        Folds::kfold(data.len(), k, seed)?
    };

    let width = pick(args.width, cfg.width, DEFAULT_MLP_WIDTH);
    let offset = pick(args.offset, cfg.offset, DEFAULT_SCORE_OFFSET);
    let model_name = pick(args.model.clone(), cfg.model.clone(), "linear".into());
    let settings = SweepSettings {
        train: TrainConfig {
            learning_rate: pick(args.lr, cfg.lr, 1e-2),
            epochs: pick(args.epochs, cfg.epochs, 500),
            batch_size: pick(args.batch, cfg.batch, 64),
            l2_penalty: pick(args.l2, cfg.l2, 0.0),
            seed,
        },
        alpha: pick(args.alpha, cfg.alpha, 4.0),
        model: parse_model(&model_name, width, offset)?,
        fit_on_half_holdout: args.fit_on_half_holdout
            || cfg.fit_on_half_holdout.unwrap_or(false),
    };

    let rows = sweep(&data, method, &grid, &folds, &settings)?;

    let mut csv = Vec::new();
    abstain_core::curve::export_curve(&rows, &mut csv)?;
    let csv = String::from_utf8(csv).expect("CSV is UTF-8");
    match &args.out {
        Some(path) => {
            write_text(path, &csv)?;
            echo_config(
                &EffectiveConfig {
                    subcommand: "sweep",
                    dataset: dataset_path,
                    task,
                    n: args.task.as_ref().map(|_| n),
                    method: Some(method_name),
                    model: Some(model_name),
                    grid: Some(grid.clone()),
                    k: Some(k),
                    alpha: Some(settings.alpha),
                    lr: Some(settings.train.learning_rate),
                    epochs: Some(settings.train.epochs),
                    batch: Some(settings.train.batch_size),
                    l2: Some(settings.train.l2_penalty),
                    seed: Some(seed),
                    fit_on_half_holdout: Some(settings.fit_on_half_holdout),
                    out: Some(path.display().to_string()),
                    ..Default::default()
                },
                path,
            )?;
            println!("wrote {} curve rows to {}", rows.len(), path.display());
        }
        None => print!("{csv}"),
    }
    if let Some(path) = &args.json_out {
        write_text(path, &(export_json(&rows)? + "\n"))?;
    }
    if let Some(path) = &args.dat_out {
        let mut buf = Vec::new();
        export_plot_data(&rows, &mut buf)?;
        write_text(path, &String::from_utf8(buf).expect("plot data is UTF-8"))?;
    }
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, CliError> {
    let rows = verify::run_verify(args.quick);
    let csv = verify::report_csv(&rows);
    print!("{csv}");
    if let Some(path) = &args.out {
        write_text(path, &csv)?;
        echo_config(
            &EffectiveConfig {
                subcommand: "verify",
                quick: Some(args.quick),
                out: Some(path.display().to_string()),
                ..Default::default()
            },
            path,
        )?;
    }
    Ok(if rows.iter().all(|r| r.pass()) { 0 } else { 2 })
}

fn cmd_limit(args: LimitArgs) -> Result<i32, CliError> {
    let cfg = FileConfig::load(args.config.as_deref())?;
    let b = pick_opt(args.b, cfg.b).ok_or_else(|| CliError::Msg("limit needs --b".to_string()))?;
    let p = pick_opt(args.p, cfg.p).ok_or_else(|| CliError::Msg("limit needs --p".to_string()))?;
    for (name, v) in [("b", b), ("p", p)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(CliError::Core(CoreError::InvalidParameter {
                name: if name == "b" { "b" } else { "p" },
                value: v,
                constraint: "must lie in (0, 1]",
            }));
        }
    }
    println!("{:.4}", theoretical_limit(b, p));
    Ok(0)
}
