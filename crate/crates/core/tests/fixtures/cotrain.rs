//! Scripted co-training scenario with a hand-traced outcome.
//!
//! Three lookup-table predictors, two iterations, six weakly labeled
//! questions. Per question and iteration (M = multiple, S = single, K = skip):
//!
//! | id | known | iteration 1 | iteration 2 |
//! |----|-------|-------------|-------------|
//! | p1 | A     | M: B has 2 of 3 prefixed votes | K: no votes, P2 adds Z unprefixed |
//! | p2 | C     | S: all unprefixed say C | S |
//! | p3 | D     | K: E has 1 vote, P1 adds F unprefixed | K |
//! | p4 | G     | M: H has 3 votes, I has 2 | M |
//! | p5 | J     | S: K and L have 1 vote each, unprefixed J or nothing | S |
//! | p6 | M     | K: P2 adds N unprefixed | M: O has 2 votes |
//!
//! Additions are rebuilt every iteration, so p1 is missing from the result.

use std::sync::{Arc, Mutex};

use ambigqa::cotrain::{LabeledQuestion, LookupEntry, LookupPredictor, Predictor, PredictorError, Verdict};
use ambigqa::PartialExample;

pub type TrainLog = Arc<Mutex<Vec<(usize, Vec<LabeledQuestion>)>>>;

/// Lookup predictor that also shares the training sets it receives.
pub struct Recording {
    inner: LookupPredictor,
    log: TrainLog,
}

impl Predictor for Recording {
    fn train(&mut self, iteration: usize, dataset: &[LabeledQuestion]) -> Result<(), PredictorError> {
        self.log.lock().unwrap().push((iteration, dataset.to_vec()));
        self.inner.train(iteration, dataset)
    }

    fn predict(&mut self, id: &str, question: &str, prefix: Option<&str>) -> Result<Vec<String>, PredictorError> {
        self.inner.predict(id, question, prefix)
    }
}

pub fn labeled(id: &str, question: &str, answers: &[&str]) -> LabeledQuestion {
    LabeledQuestion {
        id: id.into(),
        question: question.into(),
        answers: answers.iter().map(|s| s.to_string()).collect(),
    }
}

pub fn d_full() -> Vec<LabeledQuestion> {
    vec![labeled("f1", "who founded rome", &["Romulus"])]
}

pub fn d_partial() -> Vec<PartialExample> {
    [("p1", "A"), ("p2", "C"), ("p3", "D"), ("p4", "G"), ("p5", "J"), ("p6", "M")]
        .into_iter()
        .map(|(id, answer)| PartialExample { id: id.into(), question: format!("question {id}"), answer: answer.into() })
        .collect()
}

fn e(id: &str, prefix: Option<&str>, answers: &[&str]) -> LookupEntry {
    LookupEntry::new(&format!("question {id}"), prefix, answers)
}

/// Lookup tables for predictors P0, P1 and P2.
pub fn tables() -> Vec<Vec<LookupEntry>> {
    vec![
        vec![
            e("p1", Some("A"), &["A", "B"]),
            e("p1", Some("A"), &["A"]).at_iteration(2),
            e("p1", None, &["A"]),
            e("p2", Some("C"), &["C"]),
            e("p2", None, &["C"]),
            e("p3", Some("D"), &["D", "E"]),
            e("p3", None, &["D"]),
            e("p4", Some("G"), &["G", "H", "I"]),
            e("p4", None, &["G"]),
            e("p5", Some("J"), &["K"]),
            e("p5", None, &["J"]),
            e("p6", Some("M"), &["M"]),
            e("p6", Some("M"), &["O"]).at_iteration(2),
            e("p6", None, &["M"]),
        ],
        vec![
            e("p1", Some("A"), &["B"]),
            e("p1", Some("A"), &[]).at_iteration(2),
            e("p1", None, &["A"]),
            e("p2", Some("C"), &["the C"]),
            e("p2", None, &["c"]),
            e("p3", Some("D"), &["D"]),
            e("p3", None, &["D", "F"]),
            e("p4", Some("G"), &["H"]),
            e("p4", None, &["G", "H"]),
            e("p5", Some("J"), &["L"]),
            e("p5", None, &[]),
            e("p6", Some("M"), &["M", "O"]).at_iteration(2),
            e("p6", None, &["M"]),
        ],
        vec![
            e("p1", Some("A"), &["A"]),
            e("p1", None, &["A"]),
            e("p1", None, &["A", "Z"]).at_iteration(2),
            e("p2", Some("C"), &["C"]),
            e("p2", None, &["C"]),
            e("p3", None, &["D"]),
            e("p4", Some("G"), &["I", "H"]),
            e("p4", None, &["G"]),
            e("p5", None, &["j"]),
            e("p6", Some("M"), &["M"]),
            e("p6", None, &["N"]),
        ],
    ]
}

pub fn predictors(log: &TrainLog) -> Vec<Box<dyn Predictor>> {
    tables()
        .into_iter()
        .map(|t| Box::new(Recording { inner: LookupPredictor::new(t), log: log.clone() }) as Box<dyn Predictor>)
        .collect()
}

pub fn expected_d_full_hat() -> Vec<LabeledQuestion> {
    vec![
        labeled("f1", "who founded rome", &["Romulus"]),
        labeled("p2", "question p2", &["C"]),
        labeled("p4", "question p4", &["G", "H", "I"]),
        labeled("p5", "question p5", &["J"]),
        labeled("p6", "question p6", &["M", "O"]),
    ]
}

/// Training set sent to every predictor in iteration 2.
pub fn expected_second_training_set() -> Vec<LabeledQuestion> {
    vec![
        labeled("f1", "who founded rome", &["Romulus"]),
        labeled("p1", "question p1", &["A", "B"]),
        labeled("p2", "question p2", &["C"]),
        labeled("p4", "question p4", &["G", "H", "I"]),
        labeled("p5", "question p5", &["J"]),
    ]
}

pub fn expected_verdicts() -> Vec<(usize, &'static str, Verdict)> {
    use Verdict::*;
    let first = [Multiple, Single, Skip, Multiple, Single, Skip];
    let second = [Skip, Single, Skip, Multiple, Single, Multiple];
    let ids = ["p1", "p2", "p3", "p4", "p5", "p6"];
    ids.iter()
        .zip(first)
        .map(|(&id, v)| (1, id, v))
        .chain(ids.iter().zip(second).map(|(&id, v)| (2, id, v)))
        .collect()
}
