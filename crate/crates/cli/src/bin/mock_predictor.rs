//! Lookup-table predictor speaking the co-training wire protocol.
//!
//! The table is a JSON array of `{"question", "prefix", "iteration", "answers"}`
//! entries; `prefix` and `iteration` are optional.

use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use ambigqa::cotrain::{
    LabeledQuestion, LookupEntry, LookupPredictor, PredictResponse, Predictor, TrainResponse, WireRequest,
};
use anyhow::{Context, Result};
use clap::Parser;

#[derive(Parser)]
#[command(name = "mock-predictor", about = "Deterministic lookup-table predictor for co-training runs")]
struct Args {
    /// Lookup table file.
    #[arg(long)]
    table: PathBuf,
}

fn serve(args: &Args) -> Result<()> {
    let raw = std::fs::read(&args.table).with_context(|| format!("cannot read {}", args.table.display()))?;
    let table: Vec<LookupEntry> =
        serde_json::from_slice(&raw).with_context(|| format!("invalid table in {}", args.table.display()))?;
    let mut predictor = LookupPredictor::new(table);
    let stdin = std::io::stdin().lock();
    let mut stdout = std::io::stdout().lock();
    for line in stdin.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let request: WireRequest = serde_json::from_str(&line).with_context(|| format!("bad request: {line}"))?;
        let response = match request {
            WireRequest::Train { iteration, dataset } => {
                let dataset: Vec<LabeledQuestion> = dataset
                    .into_iter()
                    .map(|item| LabeledQuestion { id: String::new(), question: item.question, answers: item.answers })
                    .collect();
                predictor.train(iteration, &dataset)?;
                serde_json::to_string(&TrainResponse { ok: true, error: None })?
            }
            WireRequest::Predict { id, question, prefix } => {
                let answers = predictor.predict(&id, &question, prefix.as_deref())?;
                serde_json::to_string(&PredictResponse { id, answers })?
            }
        };
        writeln!(stdout, "{response}")?;
        stdout.flush()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match serve(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("mock-predictor: {err:#}");
            ExitCode::from(1)
        }
    }
}
