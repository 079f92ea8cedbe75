//! Democratic co-training over black-box predictors.
//!
//! Each iteration retrains `C` predictors on the current augmented set, then
//! asks every predictor about every weakly labeled question twice: once with
//! the known answer as a decoding prefix and once without. Answers proposed
//! by a strict majority under the prefix are added as extra gold answers; if
//! there are none and every unprefixed prediction agrees with the known
//! answer, the question is added as a single-answer case; otherwise it is
//! skipped. Additions are rebuilt from the seed set in every iteration.

mod mock;
mod process;

use std::collections::{HashMap, HashSet};
use std::thread;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{AnnotatedExample, PartialExample};
use crate::text::normalize_answer;

pub use mock::{LookupEntry, LookupPredictor};
pub use process::{
    PredictResponse, PredictorCommand, ProcessPredictor, TrainItem, TrainResponse, WireRequest, DEFAULT_TIMEOUT,
};

/// A question with its full answer list, as sent to predictors for training.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledQuestion {
    pub id: String,
    pub question: String,
    pub answers: Vec<String>,
}

impl LabeledQuestion {
    /// Seed entry for an annotated example: the prompt with the first
    /// surface form of every pair in the first accepted annotation.
    pub fn from_annotated(ex: &AnnotatedExample) -> Self {
        let answers = ex
            .annotations
            .first()
            .map(|a| a.pairs.iter().filter_map(|p| p.answers.first().cloned()).collect())
            .unwrap_or_default();
        Self { id: ex.id.clone(), question: ex.prompt.clone(), answers }
    }
}

#[derive(Debug, Error)]
pub enum PredictorError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("no response within {0:?}")]
    Timeout(std::time::Duration),
    #[error("predictor process exited")]
    Exited,
}

/// A trainable question-answering model reachable as a black box.
pub trait Predictor: Send {
    fn train(&mut self, iteration: usize, dataset: &[LabeledQuestion]) -> Result<(), PredictorError>;

    /// Answers for `question`, optionally decoded after `prefix`.
    fn predict(&mut self, id: &str, question: &str, prefix: Option<&str>) -> Result<Vec<String>, PredictorError>;
}

#[derive(Debug, Error)]
pub enum CotrainError {
    #[error("predictor {index} failed on request `{request}`: {source}")]
    Predictor {
        index: usize,
        request: String,
        #[source]
        source: PredictorError,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("id `{0}` occurs in both the full and the partial data")]
    OverlappingId(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CotrainConfig {
    pub iterations: usize,
    pub predictors: Vec<PredictorCommand>,
}

impl CotrainConfig {
    pub fn model_count(&self) -> usize {
        self.predictors.len()
    }

    pub fn check(&self) -> Result<(), CotrainError> {
        if self.iterations == 0 {
            return Err(CotrainError::Config("at least one iteration is required".into()));
        }
        if self.predictors.is_empty() {
            return Err(CotrainError::Config("at least one predictor is required".into()));
        }
        Ok(())
    }

    /// Launches every configured predictor process.
    pub fn spawn(&self, timeout: std::time::Duration) -> Result<Vec<Box<dyn Predictor>>, CotrainError> {
        self.check()?;
        self.predictors
            .iter()
            .enumerate()
            .map(|(index, cmd)| {
                ProcessPredictor::spawn(cmd, timeout)
                    .map(|p| Box::new(p) as Box<dyn Predictor>)
                    .map_err(|source| CotrainError::Predictor { index, request: "spawn".into(), source })
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Multiple,
    Single,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub iteration: usize,
    pub id: String,
    pub question: String,
    pub known_answer: String,
    /// Per predictor, answers decoded with the known answer as prefix.
    pub prefixed: Vec<Vec<String>>,
    pub unprefixed: Vec<Vec<String>>,
    pub verdict: Verdict,
    /// Answers of the added entry; empty when skipped.
    pub added_answers: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CotrainState {
    pub d_full_hat: Vec<LabeledQuestion>,
    pub audit_log: Vec<AuditRecord>,
}

/// Answers proposed by strictly more than half of the responses, excluding
/// the known answer. Each response votes at most once per normalized answer.
/// Surface forms and order follow first appearance in predictor order.
pub fn vote_additional_answers<S: AsRef<str>>(responses: &[Vec<S>], known: &str) -> Vec<String> {
    let known = normalize_answer(known);
    let mut votes: HashMap<String, usize> = HashMap::new();
    let mut first_seen: Vec<(String, String)> = Vec::new();
    for response in responses {
        let mut voted = HashSet::new();
        for answer in response {
            let norm = normalize_answer(answer.as_ref());
            if norm.is_empty() || norm == known || !voted.insert(norm.clone()) {
                continue;
            }
            let count = votes.entry(norm.clone()).or_insert(0);
            if *count == 0 {
                first_seen.push((norm, answer.as_ref().to_owned()));
            }
            *count += 1;
        }
    }
    let c = responses.len();
    first_seen
        .into_iter()
        .filter(|(norm, _)| 2 * votes[norm] > c)
        .map(|(_, surface)| surface)
        .collect()
}

/// True when no response contains anything besides the known answer.
pub fn single_answer_consensus<S: AsRef<str>>(responses: &[Vec<S>], known: &str) -> bool {
    let known = normalize_answer(known);
    responses.iter().flatten().all(|a| normalize_answer(a.as_ref()) == known)
}

/// Runs `task` on every predictor concurrently and returns the results in
/// predictor order.
fn on_each<T, F>(predictors: &mut [Box<dyn Predictor>], task: F) -> Vec<Result<T, PredictorError>>
where
    T: Send,
    F: Fn(&mut dyn Predictor) -> Result<T, PredictorError> + Sync,
{
    if predictors.len() == 1 {
        return vec![task(predictors[0].as_mut())];
    }
    let task = &task;
    thread::scope(|scope| {
        let handles: Vec<_> = predictors
            .iter_mut()
            .map(|p| scope.spawn(move || task(p.as_mut())))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(PredictorError::Protocol("predictor task panicked".into()))))
            .collect()
    })
}

fn collect<T>(results: Vec<Result<T, PredictorError>>, request: &str) -> Result<Vec<T>, CotrainError> {
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| r.map_err(|source| CotrainError::Predictor { index, request: request.to_owned(), source }))
        .collect()
}

/// Grows a fully labeled training set from weakly labeled questions.
///
/// `d_full` is the seed set; every entry of it is kept in the result. The
/// returned set holds the seed plus the additions of the final iteration.
pub fn democratic_cotrain(
    d_full: &[LabeledQuestion],
    d_partial: &[PartialExample],
    iterations: usize,
    predictors: &mut [Box<dyn Predictor>],
) -> Result<CotrainState, CotrainError> {
    if iterations == 0 {
        return Err(CotrainError::Config("at least one iteration is required".into()));
    }
    if predictors.is_empty() {
        return Err(CotrainError::Config("at least one predictor is required".into()));
    }
    if d_full.is_empty() {
        return Err(CotrainError::Config("the full data set is empty".into()));
    }
    let full_ids: HashSet<&str> = d_full.iter().map(|q| q.id.as_str()).collect();
    if let Some(p) = d_partial.iter().find(|p| full_ids.contains(p.id.as_str())) {
        return Err(CotrainError::OverlappingId(p.id.clone()));
    }

    let mut state = CotrainState { d_full_hat: d_full.to_vec(), audit_log: Vec::new() };
    for iteration in 1..=iterations {
        log::info!("iteration {iteration}: training {} predictors on {} questions", predictors.len(), state.d_full_hat.len());
        let train_set = &state.d_full_hat;
        collect(on_each(predictors, |p| p.train(iteration, train_set)), &format!("train-{iteration}"))?;

        let mut harvested = d_full.to_vec();
        for example in d_partial {
            let responses = collect(
                on_each(predictors, |p| {
                    let prefixed = p.predict(&example.id, &example.question, Some(&example.answer))?;
                    let unprefixed = p.predict(&example.id, &example.question, None)?;
                    Ok((prefixed, unprefixed))
                }),
                &example.id,
            )?;
            let (prefixed, unprefixed): (Vec<_>, Vec<_>) = responses.into_iter().unzip();

            let extra = vote_additional_answers(&prefixed, &example.answer);
            let (verdict, added_answers) = if !extra.is_empty() {
                let mut answers = vec![example.answer.clone()];
                answers.extend(extra);
                (Verdict::Multiple, answers)
            } else if single_answer_consensus(&unprefixed, &example.answer) {
                (Verdict::Single, vec![example.answer.clone()])
            } else {
                (Verdict::Skip, Vec::new())
            };
            if verdict != Verdict::Skip {
                harvested.push(LabeledQuestion {
                    id: example.id.clone(),
                    question: example.question.clone(),
                    answers: added_answers.clone(),
                });
            }
            state.audit_log.push(AuditRecord {
                iteration,
                id: example.id.clone(),
                question: example.question.clone(),
                known_answer: example.answer.clone(),
                prefixed,
                unprefixed,
                verdict,
                added_answers,
            });
        }
        log::info!("iteration {iteration}: {} questions after harvesting", harvested.len());
        state.d_full_hat = harvested;
    }
    Ok(state)
}
