//! Thresholded multi-answer selection and threshold tuning on dev data.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{AnnotatedExample, Candidate, CandidateSet, PredictedExample, PredictedPair};
use crate::metrics::{score_against_annotations, ExampleScore};
use crate::similarity::SimilarityKind;
use crate::text::normalize_answer;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("no candidates to tune on")]
    EmptyDev,
    #[error("candidate id `{0}` does not occur in the gold data")]
    UnknownId(String),
    #[error("no gold examples in the multi subset")]
    EmptyMultiSubset,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub gamma: f64,
    /// Return the top candidate when nothing clears `gamma`.
    pub fallback_top1: bool,
}

impl ThresholdConfig {
    pub fn new(gamma: f64) -> Self {
        Self { gamma, fallback_top1: true }
    }
}

/// Which gold examples the tuning objective averages over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TuneMode {
    #[default]
    All,
    Multi,
}

/// Candidates merged by normalized answer and sorted by descending score.
///
/// Each group keeps its highest-scored surface form; equal scores keep the
/// earliest candidate.
fn ranked(cands: &CandidateSet) -> Vec<&Candidate> {
    let mut best: Vec<(usize, &Candidate)> = Vec::new();
    let mut slot: HashMap<String, usize> = HashMap::new();
    for (i, c) in cands.candidates.iter().enumerate() {
        let key = normalize_answer(&c.answer);
        match slot.get(&key) {
            Some(&s) => {
                if c.score > best[s].1.score {
                    best[s] = (best[s].0, c);
                }
            }
            None => {
                slot.insert(key, best.len());
                best.push((i, c));
            }
        }
    }
    best.sort_by(|a, b| b.1.score.total_cmp(&a.1.score).then(a.0.cmp(&b.0)));
    best.into_iter().map(|(_, c)| c).collect()
}

fn take_above<'a>(ranked: &[&'a Candidate], gamma: f64, fallback_top1: bool) -> Vec<&'a Candidate> {
    let kept: Vec<&Candidate> = ranked.iter().copied().take_while(|c| c.score > gamma).collect();
    if kept.is_empty() && fallback_top1 {
        ranked.first().copied().into_iter().collect()
    } else {
        kept
    }
}

/// Answers scoring strictly above `gamma`, deduplicated under normalization,
/// in descending score order.
pub fn select_answers(cands: &CandidateSet, cfg: &ThresholdConfig) -> Vec<String> {
    take_above(&ranked(cands), cfg.gamma, cfg.fallback_top1)
        .into_iter()
        .map(|c| c.answer.clone())
        .collect()
}

/// Wraps selected answers as a prediction whose questions are all `prompt`.
pub fn to_prediction(id: &str, answers: Vec<String>, prompt: &str) -> PredictedExample {
    PredictedExample {
        id: id.to_owned(),
        pairs: answers.into_iter().map(|a| PredictedPair::new(prompt, a)).collect(),
    }
}

fn answer_f1(ex: &AnnotatedExample, answers: Vec<String>) -> f64 {
    if answers.is_empty() {
        return ExampleScore::zero().f1;
    }
    let pred = to_prediction(&ex.id, answers, &ex.prompt);
    score_against_annotations(&pred, ex, SimilarityKind::Answer).score.f1
}

/// Dev-set F1_ans of thresholding every candidate set at `cfg.gamma`.
///
/// Gold examples without candidates score zero. This is the plain
/// evaluation that [`tune_gamma`] optimizes.
pub fn dev_f1(
    dev: &[CandidateSet],
    gold: &[AnnotatedExample],
    cfg: &ThresholdConfig,
    mode: TuneMode,
) -> Result<f64, SelectionError> {
    let objective = Objective::new(dev, gold, mode)?;
    let sum: f64 = objective
        .members
        .iter()
        .map(|&(ex, cands)| cands.map_or(0.0, |c| answer_f1(ex, select_answers(c, cfg))))
        .sum();
    Ok(sum / objective.members.len() as f64)
}

struct Objective<'a> {
    /// Gold examples in scope, each with its candidates if any.
    members: Vec<(&'a AnnotatedExample, Option<&'a CandidateSet>)>,
}

impl<'a> Objective<'a> {
    fn new(dev: &'a [CandidateSet], gold: &'a [AnnotatedExample], mode: TuneMode) -> Result<Self, SelectionError> {
        if dev.is_empty() {
            return Err(SelectionError::EmptyDev);
        }
        let gold_ids: HashSet<&str> = gold.iter().map(|e| e.id.as_str()).collect();
        let mut by_id = HashMap::new();
        for c in dev {
            if !gold_ids.contains(c.id.as_str()) {
                return Err(SelectionError::UnknownId(c.id.clone()));
            }
            by_id.insert(c.id.as_str(), c);
        }
        let members: Vec<_> = gold
            .iter()
            .map(|ex| (ex, by_id.get(ex.id.as_str()).copied()))
            .filter(|(ex, _)| match mode {
                TuneMode::All => true,
                TuneMode::Multi => is_multi(ex),
            })
            .collect();
        if members.is_empty() {
            return Err(SelectionError::EmptyMultiSubset);
        }
        Ok(Self { members })
    }
}

/// An example belongs to the multi subset when every accepted annotation has
/// two or more pairs, so membership does not move with the threshold.
fn is_multi(ex: &AnnotatedExample) -> bool {
    ex.annotations.iter().map(|a| a.pairs.len()).min().is_some_and(|n| n >= 2)
}

/// Result of a threshold sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TunedThreshold {
    pub gamma: f64,
    pub dev_f1_ans: f64,
}

/// F1 ties within this distance go to the larger threshold.
const F1_TIE_EPS: f64 = 1e-12;

/// Sweeps every threshold at which some selection can change and returns
/// the one with the highest macro F1_ans on the dev data.
///
/// Candidate thresholds are the midpoints between consecutive distinct
/// scores in the pooled dev candidates, plus one value below the smallest
/// and one above the largest score. Ties go to the largest threshold, except
/// that with `fallback_top1` the point above the largest score must win
/// outright: there every example keeps only its top candidate, which usually
/// matches the highest midpoint.
pub fn tune_gamma(
    dev: &[CandidateSet],
    gold: &[AnnotatedExample],
    fallback_top1: bool,
    mode: TuneMode,
) -> Result<TunedThreshold, SelectionError> {
    let objective = Objective::new(dev, gold, mode)?;
    let thresholds = sweep_thresholds(dev);

    // Per example: its distinct scores ascending, and the F1 obtained when
    // exactly `level` of them lie above the threshold.
    let tables: Vec<Option<(Vec<f64>, Vec<f64>)>> = objective
        .members
        .par_iter()
        .map(|&(ex, cands)| {
            cands.map(|c| {
                let order = ranked(c);
                let mut distinct: Vec<f64> = order.iter().map(|c| c.score).collect();
                distinct.dedup();
                distinct.reverse();
                let levels = (0..=distinct.len())
                    .map(|level| {
                        let chosen = if level == 0 {
                            take_above(&order, f64::INFINITY, fallback_top1)
                        } else {
                            let cutoff = distinct[distinct.len() - level];
                            order.iter().copied().take_while(|c| c.score >= cutoff).collect()
                        };
                        answer_f1(ex, chosen.into_iter().map(|c| c.answer.clone()).collect())
                    })
                    .collect();
                (distinct, levels)
            })
        })
        .collect();

    let n = objective.members.len() as f64;
    let scored: Vec<f64> = thresholds
        .par_iter()
        .map(|&gamma| {
            let sum: f64 = tables
                .iter()
                .map(|t| {
                    t.as_ref().map_or(0.0, |(distinct, levels)| {
                        let above = distinct.len() - distinct.partition_point(|&s| s <= gamma);
                        levels[above]
                    })
                })
                .sum();
            sum / n
        })
        .collect();

    let mut points: Vec<(f64, f64)> = thresholds.into_iter().zip(scored).collect();
    let above_max = (fallback_top1 && points.len() > 2).then(|| points.pop()).flatten();
    let mut best = TunedThreshold { gamma: f64::NAN, dev_f1_ans: f64::NEG_INFINITY };
    for &(gamma, f1) in points.iter().rev() {
        if f1 > best.dev_f1_ans + F1_TIE_EPS {
            best = TunedThreshold { gamma, dev_f1_ans: f1 };
        }
    }
    if let Some((gamma, f1)) = above_max {
        if f1 > best.dev_f1_ans + F1_TIE_EPS {
            best = TunedThreshold { gamma, dev_f1_ans: f1 };
        }
    }
    Ok(best)
}

/// Ascending candidate thresholds for a pooled score list.
pub fn sweep_thresholds(dev: &[CandidateSet]) -> Vec<f64> {
    let mut scores: Vec<f64> = dev.iter().flat_map(|c| c.candidates.iter().map(|c| c.score)).collect();
    scores.sort_by(f64::total_cmp);
    scores.dedup();
    let (Some(&lo), Some(&hi)) = (scores.first(), scores.last()) else {
        return Vec::new();
    };
    let mut out = Vec::with_capacity(scores.len() + 1);
    out.push(lo - 1.0);
    out.extend(scores.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0));
    out.push(hi + 1.0);
    out
}
