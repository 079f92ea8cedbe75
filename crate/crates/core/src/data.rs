//! Datasets, predictions and answer candidates, plus their JSON forms.
//!
//! Structural problems (malformed JSON, missing fields, duplicate ids, empty
//! prediction lists) are parse errors. Semantic invariants such as disjoint
//! gold answer sets are checked by [`validate_dataset`], which reports
//! violations instead of failing so that imperfect data can still be audited.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::text::normalize_answer;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("malformed JSON at byte {offset}: {message}")]
    Json { offset: usize, message: String },
    #[error("example `{id}`: {message}")]
    Schema { id: String, message: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("empty prediction for id `{0}`")]
    EmptyPrediction(String),
    #[error("empty candidate list for id `{0}`")]
    EmptyCandidates(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AnnotationKind {
    Single,
    Multiple,
}

/// One disambiguated question and the acceptable surface forms of its answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferencePair {
    pub question: String,
    pub answers: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceAnnotation {
    pub kind: AnnotationKind,
    pub pairs: Vec<ReferencePair>,
}

impl ReferenceAnnotation {
    /// A single-answer annotation; its only question is the prompt itself.
    pub fn single(prompt: &str, answers: Vec<String>) -> Self {
        Self {
            kind: AnnotationKind::Single,
            pairs: vec![ReferencePair { question: prompt.to_owned(), answers }],
        }
    }

    pub fn multiple(pairs: Vec<ReferencePair>) -> Self {
        Self { kind: AnnotationKind::Multiple, pairs }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedExample {
    pub id: String,
    pub prompt: String,
    pub annotations: Vec<ReferenceAnnotation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedPair {
    /// Absent only for single-pair predictions, where it defaults to the prompt.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
    pub answer: String,
}

impl PredictedPair {
    pub fn new(question: impl Into<String>, answer: impl Into<String>) -> Self {
        Self { question: Some(question.into()), answer: answer.into() }
    }

    pub fn question_or<'a>(&'a self, prompt: &'a str) -> &'a str {
        self.question.as_deref().unwrap_or(prompt)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredictedExample {
    pub id: String,
    pub pairs: Vec<PredictedPair>,
}

impl PredictedExample {
    pub fn has_defaulted_question(&self) -> bool {
        self.pairs.iter().any(|p| p.question.is_none())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub answer: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    pub id: String,
    pub candidates: Vec<Candidate>,
}

/// A question from the weakly labeled pool with its single known answer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialExample {
    pub id: String,
    pub question: String,
    pub answer: String,
}

#[derive(Deserialize, Serialize)]
struct RawExample {
    id: String,
    question: String,
    annotations: Vec<RawAnnotation>,
}

#[derive(Deserialize, Serialize)]
#[serde(tag = "type")]
enum RawAnnotation {
    #[serde(rename = "singleAnswer")]
    Single { answer: Vec<String> },
    #[serde(rename = "multipleQAs")]
    Multiple {
        #[serde(rename = "qaPairs")]
        qa_pairs: Vec<RawPair>,
    },
}

#[derive(Deserialize, Serialize)]
struct RawPair {
    question: String,
    answer: Vec<String>,
}

fn json_error(raw: &[u8], err: serde_json::Error) -> DataError {
    // serde_json reports 1-based line and byte column.
    let mut offset = 0;
    for (line_no, line) in raw.split(|&b| b == b'\n').enumerate() {
        if line_no + 1 == err.line() {
            offset += err.column().saturating_sub(1).min(line.len());
            break;
        }
        offset += line.len() + 1;
    }
    DataError::Json { offset: offset.min(raw.len()), message: err.to_string() }
}

fn parse_json<'a, T: Deserialize<'a>>(raw: &'a [u8]) -> Result<T, DataError> {
    serde_json::from_slice(raw).map_err(|e| json_error(raw, e))
}

fn schema_error(id: impl Into<String>, err: impl fmt::Display) -> DataError {
    DataError::Schema { id: id.into(), message: err.to_string() }
}

fn check_unique<'a>(ids: impl IntoIterator<Item = &'a str>) -> Result<(), DataError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(DataError::DuplicateId(id.to_owned()));
        }
    }
    Ok(())
}

/// Parses a dataset file: a JSON array of annotated examples.
pub fn parse_dataset(raw: &[u8]) -> Result<Vec<AnnotatedExample>, DataError> {
    let values: Vec<Value> = parse_json(raw)?;
    let mut out = Vec::with_capacity(values.len());
    for (index, value) in values.into_iter().enumerate() {
        let label = value
            .get("id")
            .and_then(Value::as_str)
            .map_or_else(|| format!("#{index}"), str::to_owned);
        let example: RawExample = serde_json::from_value(value).map_err(|e| schema_error(&label, e))?;
        if example.annotations.is_empty() {
            return Err(schema_error(label, "field `annotations` is empty"));
        }
        let prompt = example.question;
        let annotations = example
            .annotations
            .into_iter()
            .map(|a| match a {
                RawAnnotation::Single { answer } => ReferenceAnnotation::single(&prompt, answer),
                RawAnnotation::Multiple { qa_pairs } => ReferenceAnnotation::multiple(
                    qa_pairs
                        .into_iter()
                        .map(|p| ReferencePair { question: p.question, answers: p.answer })
                        .collect(),
                ),
            })
            .collect();
        out.push(AnnotatedExample { id: example.id, prompt, annotations });
    }
    check_unique(out.iter().map(|e| e.id.as_str()))?;
    Ok(out)
}

pub fn serialize_dataset(data: &[AnnotatedExample]) -> String {
    let raw: Vec<RawExample> = data
        .iter()
        .map(|ex| RawExample {
            id: ex.id.clone(),
            question: ex.prompt.clone(),
            annotations: ex
                .annotations
                .iter()
                .map(|a| match a.kind {
                    AnnotationKind::Single => RawAnnotation::Single {
                        answer: a.pairs.first().map(|p| p.answers.clone()).unwrap_or_default(),
                    },
                    AnnotationKind::Multiple => RawAnnotation::Multiple {
                        qa_pairs: a
                            .pairs
                            .iter()
                            .map(|p| RawPair { question: p.question.clone(), answer: p.answers.clone() })
                            .collect(),
                    },
                })
                .collect(),
        })
        .collect();
    serde_json::to_string_pretty(&raw).expect("dataset serialization cannot fail")
}

/// Parses a prediction file: a JSON object mapping id to `[{question, answer}]`.
///
/// Examples come back sorted by id; pair order is preserved.
pub fn parse_predictions(raw: &[u8]) -> Result<Vec<PredictedExample>, DataError> {
    let map: BTreeMap<String, Value> = parse_json(raw)?;
    map.into_iter()
        .map(|(id, value)| {
            let pairs: Vec<PredictedPair> = serde_json::from_value(value).map_err(|e| schema_error(&id, e))?;
            if pairs.is_empty() {
                return Err(DataError::EmptyPrediction(id));
            }
            if pairs.len() > 1 && pairs.iter().any(|p| p.question.is_none()) {
                return Err(schema_error(id, "missing field `question` in a multi-pair prediction"));
            }
            if pairs.iter().any(|p| p.answer.trim().is_empty()) {
                return Err(schema_error(id, "field `answer` is empty"));
            }
            Ok(PredictedExample { id, pairs })
        })
        .collect()
}

pub fn serialize_predictions(preds: &[PredictedExample]) -> String {
    let map: BTreeMap<&str, &[PredictedPair]> =
        preds.iter().map(|p| (p.id.as_str(), p.pairs.as_slice())).collect();
    serde_json::to_string_pretty(&map).expect("prediction serialization cannot fail")
}

/// Parses a candidate file: a JSON object mapping id to `[{answer, score}]`.
pub fn parse_candidates(raw: &[u8]) -> Result<Vec<CandidateSet>, DataError> {
    let map: BTreeMap<String, Value> = parse_json(raw)?;
    map.into_iter()
        .map(|(id, value)| {
            let candidates: Vec<Candidate> =
                serde_json::from_value(value).map_err(|e| schema_error(&id, e))?;
            if candidates.is_empty() {
                return Err(DataError::EmptyCandidates(id));
            }
            if candidates.iter().any(|c| !c.score.is_finite()) {
                return Err(schema_error(id, "field `score` is not finite"));
            }
            Ok(CandidateSet { id, candidates })
        })
        .collect()
}

/// Parses a weakly labeled pool: a JSON array of `{id, question, answer}`.
pub fn parse_partial(raw: &[u8]) -> Result<Vec<PartialExample>, DataError> {
    let values: Vec<Value> = parse_json(raw)?;
    let mut out = Vec::with_capacity(values.len());
    for (index, value) in values.into_iter().enumerate() {
        let label = value
            .get("id")
            .and_then(Value::as_str)
            .map_or_else(|| format!("#{index}"), str::to_owned);
        let ex: PartialExample = serde_json::from_value(value).map_err(|e| schema_error(&label, e))?;
        if ex.answer.trim().is_empty() {
            return Err(schema_error(label, "field `answer` is empty"));
        }
        out.push(ex);
    }
    check_unique(out.iter().map(|e| e.id.as_str()))?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    #[serde(rename = "duplicate id")]
    DuplicateId,
    #[serde(rename = "empty prompt")]
    EmptyPrompt,
    #[serde(rename = "no annotations")]
    NoAnnotations,
    #[serde(rename = "empty annotation")]
    EmptyAnnotation,
    #[serde(rename = "too few pairs")]
    TooFewPairs,
    #[serde(rename = "empty answer set")]
    EmptyAnswerSet,
    #[serde(rename = "empty answer string")]
    EmptyAnswerString,
    #[serde(rename = "overlapping answer sets")]
    OverlappingAnswers,
    #[serde(rename = "question equals prompt")]
    QuestionEqualsPrompt,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::DuplicateId => "duplicate id",
            Rule::EmptyPrompt => "empty prompt",
            Rule::NoAnnotations => "no annotations",
            Rule::EmptyAnnotation => "empty annotation",
            Rule::TooFewPairs => "too few pairs",
            Rule::EmptyAnswerSet => "empty answer set",
            Rule::EmptyAnswerString => "empty answer string",
            Rule::OverlappingAnswers => "overlapping answer sets",
            Rule::QuestionEqualsPrompt => "question equals prompt",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub id: String,
    pub rule: Rule,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn validate_annotation(ex: &AnnotatedExample, index: usize, ann: &ReferenceAnnotation, out: &mut Vec<Violation>) {
    let mut push = |rule, detail: String| {
        out.push(Violation { id: ex.id.clone(), rule, detail: format!("annotation {index}: {detail}") })
    };
    match (ann.kind, ann.pairs.len()) {
        (_, 0) => push(Rule::EmptyAnnotation, "no question-answer pairs".into()),
        (AnnotationKind::Single, n) if n != 1 => {
            push(Rule::TooFewPairs, format!("single-answer annotation has {n} pairs"))
        }
        (AnnotationKind::Multiple, 1) => push(Rule::TooFewPairs, "multiple-QA annotation has 1 pair".into()),
        _ => {}
    }
    for (j, pair) in ann.pairs.iter().enumerate() {
        if pair.answers.is_empty() {
            push(Rule::EmptyAnswerSet, format!("pair {j} has no answers"));
        }
        if pair.answers.iter().any(|a| a.trim().is_empty()) {
            push(Rule::EmptyAnswerString, format!("pair {j} has an empty answer"));
        }
        if ann.kind == AnnotationKind::Multiple && pair.question == ex.prompt {
            push(Rule::QuestionEqualsPrompt, format!("pair {j}"));
        }
    }
    let normalized: Vec<HashSet<String>> = ann
        .pairs
        .iter()
        .map(|p| p.answers.iter().map(|a| normalize_answer(a)).collect())
        .collect();
    for a in 0..normalized.len() {
        for b in a + 1..normalized.len() {
            let mut shared: Vec<&String> = normalized[a].intersection(&normalized[b]).collect();
            if !shared.is_empty() {
                shared.sort();
                push(Rule::OverlappingAnswers, format!("pairs {a} and {b} share {shared:?}"));
            }
        }
    }
}

/// Checks every semantic invariant of a parsed dataset.
///
/// The report is sorted, so it does not depend on example order.
pub fn validate_dataset(data: &[AnnotatedExample]) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    for ex in data {
        if !seen.insert(ex.id.as_str()) {
            violations.push(Violation { id: ex.id.clone(), rule: Rule::DuplicateId, detail: String::new() });
        }
        if ex.prompt.trim().is_empty() {
            violations.push(Violation { id: ex.id.clone(), rule: Rule::EmptyPrompt, detail: String::new() });
        }
        if ex.annotations.is_empty() {
            violations.push(Violation { id: ex.id.clone(), rule: Rule::NoAnnotations, detail: String::new() });
        }
        for (i, ann) in ex.annotations.iter().enumerate() {
            validate_annotation(ex, i, ann, &mut violations);
        }
    }
    violations.sort();
    ValidationReport { violations }
}
