//! Multi-answer precision, recall and F1 with question-similarity weighting.
//!
//! Each predicted pair earns credit `c_i` for at most one gold pair: the
//! weight of `(i, j)` is the answer indicator times the question similarity,
//! and credits come from a maximum-weight one-to-one assignment. A prediction
//! that repeats an already-credited answer therefore earns nothing and lowers
//! precision.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::assignment::max_weight_assignment;
use crate::data::{AnnotatedExample, PredictedExample, PredictedPair, ReferenceAnnotation};
use crate::report::Fixed4;
use crate::similarity::{prepared_similarity, PreparedQuestion, SimilarityKind};
use crate::text::{normalize_answer, normalized_match, tokenize_question};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("prediction id `{0}` does not occur in the gold data")]
    UnknownPredictionId(String),
    #[error("duplicate prediction id `{0}`")]
    DuplicatePredictionId(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExampleScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `(prediction index, reference index, credit)`; only positive credits.
    pub assignment: Vec<(usize, usize, f64)>,
}

impl ExampleScore {
    pub fn zero() -> Self {
        Self { precision: 0.0, recall: 0.0, f1: 0.0, assignment: Vec::new() }
    }

    fn from_credit(total: f64, m: usize, n: usize, assignment: Vec<(usize, usize, f64)>) -> Self {
        let precision = total / m as f64;
        let recall = total / n as f64;
        Self { precision, recall, f1: harmonic_mean(precision, recall), assignment }
    }
}

pub fn harmonic_mean(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

struct PreparedReference {
    pairs: Vec<(PreparedQuestion, Vec<String>)>,
}

struct PreparedPrediction {
    pairs: Vec<(PreparedQuestion, String)>,
}

/// Tokenized and normalized view of one example, reused across kinds.
struct PreparedExample {
    references: Vec<PreparedReference>,
}

fn prepare_reference(prompt_tokens: &crate::text::TokenList, ann: &ReferenceAnnotation) -> PreparedReference {
    PreparedReference {
        pairs: ann
            .pairs
            .iter()
            .map(|p| {
                (
                    PreparedQuestion::new(prompt_tokens, &p.question),
                    p.answers.iter().map(|a| normalize_answer(a)).collect(),
                )
            })
            .collect(),
    }
}

fn prepare_prediction(prompt: &str, prompt_tokens: &crate::text::TokenList, pairs: &[PredictedPair]) -> PreparedPrediction {
    PreparedPrediction {
        pairs: pairs
            .iter()
            .map(|p| {
                (
                    PreparedQuestion::new(prompt_tokens, p.question_or(prompt)),
                    normalize_answer(&p.answer),
                )
            })
            .collect(),
    }
}

fn score_prepared(pred: &PreparedPrediction, reference: &PreparedReference, kind: SimilarityKind) -> ExampleScore {
    let (m, n) = (pred.pairs.len(), reference.pairs.len());
    if m == 0 || n == 0 {
        return ExampleScore::zero();
    }
    let weights: Vec<Vec<f64>> = pred
        .pairs
        .iter()
        .map(|(pq, answer)| {
            reference
                .pairs
                .iter()
                .map(|(gq, gold)| {
                    if normalized_match(answer, gold) {
                        prepared_similarity(kind, pq, gq)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let assignment = max_weight_assignment(&weights);
    ExampleScore::from_credit(assignment.total, m, n, assignment.pairs)
}

/// Scores one prediction against one reference annotation.
pub fn score_example(
    pred: &PredictedExample,
    reference: &ReferenceAnnotation,
    kind: SimilarityKind,
    prompt: &str,
) -> ExampleScore {
    let prompt_tokens = tokenize_question(prompt);
    score_prepared(
        &prepare_prediction(prompt, &prompt_tokens, &pred.pairs),
        &prepare_reference(&prompt_tokens, reference),
        kind,
    )
}

/// The best score over an example's accepted annotations.
#[derive(Clone, Debug, PartialEq)]
pub struct BestScore {
    /// Index of the annotation that produced `score`.
    pub annotation: usize,
    pub score: ExampleScore,
}

fn best_of(pred: &PreparedPrediction, prepared: &PreparedExample, kind: SimilarityKind) -> BestScore {
    let mut best: Option<BestScore> = None;
    for (i, reference) in prepared.references.iter().enumerate() {
        let score = score_prepared(pred, reference, kind);
        if best.as_ref().is_none_or(|b| score.f1 > b.score.f1) {
            best = Some(BestScore { annotation: i, score });
        }
    }
    best.unwrap_or(BestScore { annotation: 0, score: ExampleScore::zero() })
}

fn prepare_example(ex: &AnnotatedExample) -> (crate::text::TokenList, PreparedExample) {
    let prompt_tokens = tokenize_question(&ex.prompt);
    let references = ex.annotations.iter().map(|a| prepare_reference(&prompt_tokens, a)).collect();
    (prompt_tokens, PreparedExample { references })
}

/// Scores against every accepted annotation and keeps the highest F1; ties
/// go to the earliest annotation.
pub fn score_against_annotations(pred: &PredictedExample, ex: &AnnotatedExample, kind: SimilarityKind) -> BestScore {
    let (prompt_tokens, prepared) = prepare_example(ex);
    let pred = prepare_prediction(&ex.prompt, &prompt_tokens, &pred.pairs);
    best_of(&pred, &prepared, kind)
}

/// Per-example outcome used by [`aggregate`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExampleResult {
    pub id: String,
    pub missing: bool,
    /// Whether the Answer-kind best annotation has two or more pairs.
    pub multi: bool,
    pub f1: HashMap<SimilarityKind, f64>,
}

pub fn evaluate_example(ex: &AnnotatedExample, pred: Option<&PredictedExample>, kinds: &[SimilarityKind]) -> ExampleResult {
    let (prompt_tokens, prepared) = prepare_example(ex);
    let pair_count = |idx: usize| ex.annotations.get(idx).map_or(0, |a| a.pairs.len());
    match pred {
        None => ExampleResult {
            id: ex.id.clone(),
            missing: true,
            multi: pair_count(0) >= 2,
            f1: kinds.iter().map(|&k| (k, 0.0)).collect(),
        },
        Some(pred) => {
            let pred = prepare_prediction(&ex.prompt, &prompt_tokens, &pred.pairs);
            let answer_best = best_of(&pred, &prepared, SimilarityKind::Answer);
            let f1 = kinds
                .iter()
                .map(|&k| {
                    let f1 = if k == SimilarityKind::Answer {
                        answer_best.score.f1
                    } else {
                        best_of(&pred, &prepared, k).score.f1
                    };
                    (k, f1)
                })
                .collect();
            ExampleResult { id: ex.id.clone(), missing: false, multi: pair_count(answer_best.annotation) >= 2, f1 }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateReport {
    pub f1_ans_all: Option<f64>,
    pub f1_ans_multi: Option<f64>,
    pub f1_bleu: Option<f64>,
    pub f1_edit: Option<f64>,
    pub n_examples_all: usize,
    pub n_examples_multi: usize,
    pub n_missing: usize,
    /// Predictions whose question was absent and defaulted to the prompt.
    pub n_defaulted_questions: usize,
}

#[derive(Serialize)]
struct AnsJson {
    all: Fixed4,
    multi: Fixed4,
}

#[derive(Serialize)]
struct ReportJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    f1_ans: Option<AnsJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f1_bleu: Option<Fixed4>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f1_edit_f1: Option<Fixed4>,
    n_all: usize,
    n_multi: usize,
    n_missing: usize,
}

impl AggregateReport {
    fn json_body(&self) -> ReportJson {
        ReportJson {
            f1_ans: self.f1_ans_all.map(|all| AnsJson {
                all: Fixed4(all),
                multi: Fixed4(self.f1_ans_multi.unwrap_or(0.0)),
            }),
            f1_bleu: self.f1_bleu.map(Fixed4),
            f1_edit_f1: self.f1_edit.map(Fixed4),
            n_all: self.n_examples_all,
            n_multi: self.n_examples_multi,
            n_missing: self.n_missing,
        }
    }

    /// The report as JSON with reals fixed to four decimals. Metrics that
    /// were not requested are omitted.
    pub fn to_json(&self, pretty: bool) -> String {
        let body = self.json_body();
        if pretty {
            serde_json::to_string_pretty(&body)
        } else {
            serde_json::to_string(&body)
        }
        .expect("report serialization cannot fail")
    }
}

fn mean(values: impl Iterator<Item = f64>) -> (f64, usize) {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        (0.0, 0)
    } else {
        (sum / n as f64, n)
    }
}

/// Scores every example, in parallel, and returns the per-example results in
/// dataset order.
pub fn evaluate_all(
    dataset: &[AnnotatedExample],
    predictions: &[PredictedExample],
    kinds: &[SimilarityKind],
) -> Result<Vec<ExampleResult>, MetricsError> {
    let gold_ids: HashSet<&str> = dataset.iter().map(|e| e.id.as_str()).collect();
    let mut by_id: HashMap<&str, &PredictedExample> = HashMap::with_capacity(predictions.len());
    for p in predictions {
        if !gold_ids.contains(p.id.as_str()) {
            return Err(MetricsError::UnknownPredictionId(p.id.clone()));
        }
        if by_id.insert(p.id.as_str(), p).is_some() {
            return Err(MetricsError::DuplicatePredictionId(p.id.clone()));
        }
    }
    Ok(dataset
        .par_iter()
        .map(|ex| evaluate_example(ex, by_id.get(ex.id.as_str()).copied(), kinds))
        .collect())
}

/// Macro-averaged F1 over a dataset.
///
/// Gold examples without a prediction score zero. The multi subset holds the
/// examples whose Answer-kind best annotation has at least two pairs. Sums
/// run in dataset order, so the result does not depend on thread count.
pub fn aggregate(
    dataset: &[AnnotatedExample],
    predictions: &[PredictedExample],
    kinds: &[SimilarityKind],
) -> Result<AggregateReport, MetricsError> {
    let results = evaluate_all(dataset, predictions, kinds)?;
    let has = |k| kinds.contains(&k);
    let avg = |k: SimilarityKind, multi_only: bool| {
        mean(results.iter().filter(|r| !multi_only || r.multi).map(|r| r.f1[&k])).0
    };
    Ok(AggregateReport {
        f1_ans_all: has(SimilarityKind::Answer).then(|| avg(SimilarityKind::Answer, false)),
        f1_ans_multi: has(SimilarityKind::Answer).then(|| avg(SimilarityKind::Answer, true)),
        f1_bleu: has(SimilarityKind::Bleu).then(|| avg(SimilarityKind::Bleu, false)),
        f1_edit: has(SimilarityKind::EditF1).then(|| avg(SimilarityKind::EditF1, false)),
        n_examples_all: results.len(),
        n_examples_multi: results.iter().filter(|r| r.multi).count(),
        n_missing: results.iter().filter(|r| r.missing).count(),
        n_defaulted_questions: predictions.iter().filter(|p| p.has_defaulted_question()).count(),
    })
}

/// Answer-only F1 of annotation `a` read as a prediction against `b`.
///
/// Each of `a`'s pairs contributes its question and its first answer string.
pub fn pairwise_agreement(a: &ReferenceAnnotation, b: &ReferenceAnnotation, prompt: &str) -> f64 {
    let pairs: Vec<PredictedPair> = a
        .pairs
        .iter()
        .filter_map(|p| p.answers.first().map(|ans| PredictedPair::new(p.question.clone(), ans.clone())))
        .collect();
    if pairs.is_empty() {
        return 0.0;
    }
    let pred = PredictedExample { id: String::new(), pairs };
    score_example(&pred, b, SimilarityKind::Answer, prompt).f1
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgreementReport {
    /// Macro average over examples of the mean agreement across ordered
    /// annotation pairs.
    pub f1_ans: f64,
    pub n_examples: usize,
    pub n_pairs: usize,
}

#[derive(Serialize)]
struct AgreementJson {
    agreement_f1_ans: Fixed4,
    n_examples: usize,
    n_pairs: usize,
}

impl AgreementReport {
    pub fn to_json(&self, pretty: bool) -> String {
        let json = AgreementJson {
            agreement_f1_ans: Fixed4(self.f1_ans),
            n_examples: self.n_examples,
            n_pairs: self.n_pairs,
        };
        if pretty {
            serde_json::to_string_pretty(&json)
        } else {
            serde_json::to_string(&json)
        }
        .expect("report serialization cannot fail")
    }
}

/// Inter-annotator agreement over every example with two or more accepted
/// annotations.
pub fn dataset_agreement(data: &[AnnotatedExample]) -> AgreementReport {
    let per_example: Vec<(f64, usize)> = data
        .par_iter()
        .filter(|ex| ex.annotations.len() >= 2)
        .map(|ex| {
            let anns = &ex.annotations;
            let mut sum = 0.0;
            let mut count = 0;
            for (i, a) in anns.iter().enumerate() {
                for (j, b) in anns.iter().enumerate() {
                    if i != j {
                        sum += pairwise_agreement(a, b, &ex.prompt);
                        count += 1;
                    }
                }
            }
            (sum / count as f64, count)
        })
        .collect();
    let (f1_ans, n_examples) = mean(per_example.iter().map(|p| p.0));
    AgreementReport { f1_ans, n_examples, n_pairs: per_example.iter().map(|p| p.1).sum() }
}
