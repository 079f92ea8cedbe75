//! Evaluation and training-data tooling for ambiguous open-domain questions.
//!
//! A prompt question may admit several plausible answers, each tied to a
//! disambiguated rewrite of the prompt. This crate scores multi-answer
//! predictions against such references ([`metrics`]), turns scored answer
//! candidates into multi-answer predictions ([`selection`]), harvests extra
//! answers for weakly labeled questions by majority vote over external
//! predictors ([`cotrain`]) and summarizes datasets ([`stats`]).

pub mod assignment;
pub mod cotrain;
pub mod data;
pub mod metrics;
pub mod report;
pub mod selection;
pub mod similarity;
pub mod stats;
pub mod text;

pub use assignment::{max_weight_assignment, Assignment};
pub use data::{
    parse_candidates, parse_dataset, parse_partial, parse_predictions, validate_dataset, AnnotatedExample,
    AnnotationKind, Candidate, CandidateSet, DataError, PartialExample, PredictedExample, PredictedPair,
    ReferenceAnnotation, ReferencePair, ValidationReport,
};
pub use metrics::{aggregate, pairwise_agreement, score_against_annotations, score_example, AggregateReport, ExampleScore};
pub use selection::{select_answers, tune_gamma, ThresholdConfig, TuneMode};
pub use similarity::{edit_f1, extract_edits, sentence_bleu, similarity, EditBag, SimilarityKind};
pub use text::{answer_match, normalize_answer, tokenize_question, TokenList};
