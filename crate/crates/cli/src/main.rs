use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use ambigqa::cotrain::{democratic_cotrain, CotrainConfig, LabeledQuestion, PredictorCommand};
use ambigqa::data::{parse_candidates, parse_partial, parse_predictions, PredictedPair};
use ambigqa::metrics::dataset_agreement;
use ambigqa::report::Fixed4;
use ambigqa::selection::to_prediction;
use ambigqa::stats::stats_report;
use ambigqa::{aggregate, parse_dataset, select_answers, tune_gamma, validate_dataset, SimilarityKind, ThresholdConfig, TuneMode};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

const DATASET_SCHEMA: &str = "Dataset JSON: [{\"id\": str, \"question\": str, \"annotations\": [\
{\"type\": \"singleAnswer\", \"answer\": [str]} | \
{\"type\": \"multipleQAs\", \"qaPairs\": [{\"question\": str, \"answer\": [str]}]}]}]";
const PREDICTION_SCHEMA: &str = "Prediction JSON: {id: [{\"question\": str, \"answer\": str}]}; \
the question may be omitted when an example has a single pair";
const CANDIDATE_SCHEMA: &str = "Candidate JSON: {id: [{\"answer\": str, \"score\": number}]}";

#[derive(Parser)]
#[command(name = "ambigqa", version, about = "Evaluation and data tools for ambiguous open-domain questions")]
struct Cli {
    /// More diagnostics on stderr (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    /// Worker threads for per-example work (default: all cores).
    #[arg(long, global = true, env = "AMBIG_EVAL_THREADS")]
    threads: Option<usize>,

    /// Indent JSON output.
    #[arg(long, global = true)]
    pretty: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score predictions against a gold dataset.
    #[command(after_long_help = evaluate_help())]
    Evaluate(EvaluateArgs),
    /// Check a dataset for structural and semantic problems; exits 1 if any are found.
    #[command(after_long_help = validate_help())]
    Validate(DataArgs),
    /// QA-count histogram and question edit statistics of a dataset.
    #[command(after_long_help = stats_help())]
    Stats(StatsArgs),
    /// Agreement between accepted annotations of the same prompt.
    #[command(after_long_help = agreement_help())]
    Agreement(DataArgs),
    /// Turn scored answer candidates into predictions with a fixed threshold.
    #[command(after_long_help = select_help())]
    Select(SelectArgs),
    /// Pick the threshold that maximizes answer F1 on a dev set.
    #[command(after_long_help = tune_help())]
    TuneThreshold(TuneArgs),
    /// Harvest multi-answer labels for weakly labeled questions with external predictors.
    #[command(after_long_help = cotrain_help())]
    Cotrain(CotrainArgs),
}

fn evaluate_help() -> String {
    format!(
        "{DATASET_SCHEMA}\n{PREDICTION_SCHEMA}\n\nOutput: {{\"f1_ans\": {{\"all\": r, \"multi\": r}}, \"f1_bleu\": r, \
\"f1_edit_f1\": r, \"n_all\": k, \"n_multi\": k, \"n_missing\": k}}\nwith reals to 4 decimals; metrics not requested are omitted."
    )
}

fn validate_help() -> String {
    format!("{DATASET_SCHEMA}\n\nOutput: {{\"violations\": [{{\"id\": str, \"rule\": str, \"detail\": str}}]}}")
}

fn stats_help() -> String {
    format!(
        "{DATASET_SCHEMA}\n\nOutput: {{\"n_examples\": k, \"qa_count\": {{\"1\"|\"2\"|\"3\"|\"4+\": {{\"count\": k, \"percent\": r}}}}, \
\"total_edits\": k, \"distinct_edits\": k, \"top_edits\": [{{\"edit\": str, \"count\": k}}], \
\"coverage\": {{\"10\"|\"100\"|\"1000\": r|null}}}}"
    )
}

fn agreement_help() -> String {
    format!("{DATASET_SCHEMA}\n\nOutput: {{\"agreement_f1_ans\": r, \"n_examples\": k, \"n_pairs\": k}}")
}

fn select_help() -> String {
    format!(
        "{CANDIDATE_SCHEMA}\n\nOutput: Prediction JSON {{id: [{{\"question\": str, \"answer\": str}}]}}. \
Questions are the dataset prompt when --data is given and empty otherwise. \
Examples left with no answer are omitted."
    )
}

fn tune_help() -> String {
    format!("{CANDIDATE_SCHEMA}\n{DATASET_SCHEMA}\n\nOutput: {{\"gamma\": g, \"dev_f1_ans\": r}}")
}

fn cotrain_help() -> String {
    format!(
        "--full takes {DATASET_SCHEMA}\n--partial takes [{{\"id\": str, \"question\": str, \"answer\": str}}]\n\n\
Each --predictor is a command line that speaks line-delimited JSON on stdin/stdout:\n  \
{{\"op\": \"train\", \"iteration\": k, \"dataset\": [{{\"question\": str, \"answers\": [str]}}]}} -> {{\"ok\": true}}\n  \
{{\"op\": \"predict\", \"id\": str, \"question\": str, \"prefix\": str|null}} -> {{\"id\": str, \"answers\": [str]}}\n\n\
Output (--out): [{{\"id\": str, \"question\": str, \"answers\": [str]}}]\n\
Audit (--audit): one JSON object per line with iteration, id, question, known_answer, prefixed, unprefixed, \
verdict (multiple|single|skip) and added_answers."
    )
}

#[derive(Args)]
struct DataArgs {
    /// Dataset file.
    #[arg(long)]
    data: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Ans,
    Bleu,
    Edit,
}

impl From<Metric> for SimilarityKind {
    fn from(m: Metric) -> Self {
        match m {
            Metric::Ans => SimilarityKind::Answer,
            Metric::Bleu => SimilarityKind::Bleu,
            Metric::Edit => SimilarityKind::EditF1,
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    /// Gold dataset file.
    #[arg(long)]
    gold: PathBuf,
    /// Prediction file.
    #[arg(long)]
    pred: PathBuf,
    /// Metrics to compute.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ans,bleu,edit")]
    metrics: Vec<Metric>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Dataset file.
    #[arg(long)]
    data: PathBuf,
    /// Number of most frequent edits to list.
    #[arg(long, default_value_t = 50)]
    top_k: usize,
}

#[derive(Args)]
struct SelectArgs {
    /// Candidate file.
    #[arg(long)]
    candidates: PathBuf,
    /// Keep answers scoring strictly above this value.
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
    /// Dataset supplying prompts used as prediction questions.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Do not fall back to the top candidate when nothing clears the threshold.
    #[arg(long)]
    no_fallback: bool,
    /// Write predictions here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    All,
    Multi,
}

#[derive(Args)]
struct TuneArgs {
    /// Candidate file for the dev set.
    #[arg(long)]
    candidates: PathBuf,
    /// Gold dev dataset.
    #[arg(long)]
    gold: PathBuf,
    /// Examples the objective averages over.
    #[arg(long, value_enum, default_value = "all")]
    mode: Mode,
    /// Do not fall back to the top candidate when nothing clears the threshold.
    #[arg(long)]
    no_fallback: bool,
}

#[derive(Args)]
struct CotrainArgs {
    /// Fully labeled seed dataset.
    #[arg(long)]
    full: PathBuf,
    /// Weakly labeled questions with one known answer each.
    #[arg(long)]
    partial: PathBuf,
    /// Predictor command line; repeat once per model.
    #[arg(long = "predictor", required = true)]
    predictors: Vec<String>,
    /// Number of iterations.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    iters: u32,
    /// Output file for the grown dataset.
    #[arg(long)]
    out: PathBuf,
    /// Output file for the per-question audit log.
    #[arg(long)]
    audit: Option<PathBuf>,
    /// Seconds to wait for each predictor response.
    #[arg(long, default_value_t = 600)]
    timeout: u64,
}

impl Command {
    fn inputs(&self) -> Vec<&Path> {
        match self {
            Command::Evaluate(a) => vec![&a.gold, &a.pred],
            Command::Validate(a) | Command::Agreement(a) => vec![&a.data],
            Command::Stats(a) => vec![&a.data],
            Command::Select(a) => std::iter::once(&a.candidates).chain(&a.data).map(PathBuf::as_path).collect(),
            Command::TuneThreshold(a) => vec![&a.candidates, &a.gold],
            Command::Cotrain(a) => vec![&a.full, &a.partial],
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load<T, E>(path: &Path, parse: impl Fn(&[u8]) -> Result<T, E>) -> Result<T>
where
    E: std::error::Error + Send + Sync + 'static,
{
    parse(&read(path)?).with_context(|| format!("invalid data in {}", path.display()))
}

fn to_json<T: Serialize>(value: &T, pretty: bool) -> String {
    if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .expect("serializing plain data cannot fail")
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n")).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
            Ok(())
        }
    }
}

fn evaluate(args: &EvaluateArgs, pretty: bool) -> Result<()> {
    let gold = load(&args.gold, parse_dataset)?;
    let preds = load(&args.pred, parse_predictions)?;
    let mut kinds: Vec<SimilarityKind> = Vec::new();
    for kind in args.metrics.iter().copied().map(SimilarityKind::from) {
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    let report = aggregate(&gold, &preds, &kinds)?;
    if report.n_defaulted_questions > 0 {
        log::warn!(
            "{} predictions have no question; the prompt was used in its place",
            report.n_defaulted_questions
        );
    }
    if report.n_missing > 0 {
        log::warn!("{} gold examples have no prediction and score 0", report.n_missing);
    }
    emit(&report.to_json(pretty), args.out.as_deref())
}

fn validate(args: &DataArgs, pretty: bool) -> Result<bool> {
    let data = load(&args.data, parse_dataset)?;
    let report = validate_dataset(&data);
    for v in &report.violations {
        log::warn!("{}: {} {}", v.id, v.rule, v.detail);
    }
    emit(&to_json(&report, pretty), None)?;
    Ok(report.is_clean())
}

fn select(args: &SelectArgs, pretty: bool) -> Result<()> {
    let candidates = load(&args.candidates, parse_candidates)?;
    let prompts: HashMap<String, String> = match &args.data {
        Some(path) => load(path, parse_dataset)?.into_iter().map(|e| (e.id, e.prompt)).collect(),
        None => HashMap::new(),
    };
    let cfg = ThresholdConfig { gamma: args.gamma, fallback_top1: !args.no_fallback };
    let mut preds = Vec::with_capacity(candidates.len());
    for set in &candidates {
        let answers = select_answers(set, &cfg);
        if answers.is_empty() {
            log::info!("{}: no candidate above {}", set.id, args.gamma);
            continue;
        }
        if args.data.is_some() && !prompts.contains_key(&set.id) {
            bail!("candidate id `{}` is not in the dataset", set.id);
        }
        let prompt = prompts.get(&set.id).map_or("", String::as_str);
        preds.push(to_prediction(&set.id, answers, prompt));
    }
    let by_id: BTreeMap<&str, &[PredictedPair]> = preds.iter().map(|p| (p.id.as_str(), p.pairs.as_slice())).collect();
    emit(&to_json(&by_id, pretty), args.out.as_deref())
}

#[derive(Serialize)]
struct TuneOutput {
    gamma: f64,
    dev_f1_ans: Fixed4,
}

fn tune(args: &TuneArgs, pretty: bool) -> Result<()> {
    let candidates = load(&args.candidates, parse_candidates)?;
    let gold = load(&args.gold, parse_dataset)?;
    let mode = match args.mode {
        Mode::All => TuneMode::All,
        Mode::Multi => TuneMode::Multi,
    };
    let best = tune_gamma(&candidates, &gold, !args.no_fallback, mode)?;
    emit(&to_json(&TuneOutput { gamma: best.gamma, dev_f1_ans: Fixed4(best.dev_f1_ans) }, pretty), None)
}

fn cotrain(args: &CotrainArgs, pretty: bool) -> Result<()> {
    let full: Vec<LabeledQuestion> =
        load(&args.full, parse_dataset)?.iter().map(LabeledQuestion::from_annotated).collect();
    let partial = load(&args.partial, parse_partial)?;
    let predictors = args
        .predictors
        .iter()
        .map(|line| {
            let mut words = shell_words::split(line).with_context(|| format!("cannot parse predictor command `{line}`"))?;
            if words.is_empty() {
                bail!("empty predictor command");
            }
            let program = words.remove(0);
            Ok(PredictorCommand::new(program, words))
        })
        .collect::<Result<Vec<_>>>()?;
    let config = CotrainConfig { iterations: args.iters as usize, predictors };
    let mut models = config.spawn(Duration::from_secs(args.timeout))?;
    let state = democratic_cotrain(&full, &partial, config.iterations, &mut models)?;
    drop(models);

    emit(&to_json(&state.d_full_hat, pretty), Some(&args.out))?;
    if let Some(path) = &args.audit {
        let mut lines = String::new();
        for record in &state.audit_log {
            lines.push_str(&serde_json::to_string(record)?);
            lines.push('\n');
        }
        fs::write(path, lines).with_context(|| format!("cannot write {}", path.display()))?;
    }
    log::info!("{} questions in the grown dataset", state.d_full_hat.len());
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    for path in cli.command.inputs() {
        if !path.is_file() {
            bail!("cannot read {}: no such file", path.display());
        }
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("cannot configure worker threads")?;
    }
    let pretty = cli.pretty;
    match &cli.command {
        Command::Evaluate(a) => evaluate(a, pretty)?,
        Command::Validate(a) => return validate(a, pretty),
        Command::Stats(a) => {
            let data = load(&a.data, parse_dataset)?;
            emit(&to_json(&stats_report(&data, a.top_k), pretty), None)?;
        }
        Command::Agreement(a) => {
            let data = load(&a.data, parse_dataset)?;
            emit(&dataset_agreement(&data).to_json(pretty), None)?;
        }
        Command::Select(a) => select(a, pretty)?,
        Command::TuneThreshold(a) => tune(a, pretty)?,
        Command::Cotrain(a) => cotrain(a, pretty)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
