//! Deterministic lookup-table predictor for tests and dry runs.

use serde::{Deserialize, Serialize};

use super::{LabeledQuestion, Predictor, PredictorError};

/// One scripted response. Entries with an `iteration` apply only to that
/// iteration and take precedence over entries without one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LookupEntry {
    pub question: String,
    #[serde(default)]
    pub prefix: Option<String>,
    #[serde(default)]
    pub iteration: Option<usize>,
    pub answers: Vec<String>,
}

impl LookupEntry {
    pub fn new(question: &str, prefix: Option<&str>, answers: &[&str]) -> Self {
        Self {
            question: question.to_owned(),
            prefix: prefix.map(str::to_owned),
            iteration: None,
            answers: answers.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn at_iteration(mut self, iteration: usize) -> Self {
        self.iteration = Some(iteration);
        self
    }
}

/// Answers from a fixed table; unknown questions get no answers.
#[derive(Clone, Debug, Default)]
pub struct LookupPredictor {
    table: Vec<LookupEntry>,
    iteration: usize,
    /// Every training set received, in order.
    pub trained_on: Vec<(usize, Vec<LabeledQuestion>)>,
}

impl LookupPredictor {
    pub fn new(table: Vec<LookupEntry>) -> Self {
        Self { table, iteration: 0, trained_on: Vec::new() }
    }

    pub fn lookup(&self, question: &str, prefix: Option<&str>) -> Vec<String> {
        let matching = |e: &&LookupEntry| e.question == question && e.prefix.as_deref() == prefix;
        self.table
            .iter()
            .filter(matching)
            .find(|e| e.iteration == Some(self.iteration))
            .or_else(|| self.table.iter().filter(matching).find(|e| e.iteration.is_none()))
            .map(|e| e.answers.clone())
            .unwrap_or_default()
    }
}

impl Predictor for LookupPredictor {
    fn train(&mut self, iteration: usize, dataset: &[LabeledQuestion]) -> Result<(), PredictorError> {
        self.iteration = iteration;
        self.trained_on.push((iteration, dataset.to_vec()));
        Ok(())
    }

    fn predict(&mut self, _id: &str, question: &str, prefix: Option<&str>) -> Result<Vec<String>, PredictorError> {
        Ok(self.lookup(question, prefix))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iteration_entries_take_precedence() {
        let mut p = LookupPredictor::new(vec![
            LookupEntry::new("q", None, &["a"]),
            LookupEntry::new("q", None, &["b"]).at_iteration(2),
            LookupEntry::new("q", Some("a"), &["a", "c"]),
        ]);
        p.train(1, &[]).unwrap();
        assert_eq!(p.predict("i", "q", None).unwrap(), ["a"]);
        assert_eq!(p.predict("i", "q", Some("a")).unwrap(), ["a", "c"]);
        assert!(p.predict("i", "q", Some("z")).unwrap().is_empty());
        p.train(2, &[]).unwrap();
        assert_eq!(p.predict("i", "q", None).unwrap(), ["b"]);
        assert!(p.predict("i", "other", None).unwrap().is_empty());
    }
}
