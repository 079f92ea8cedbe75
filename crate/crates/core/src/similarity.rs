//! Question similarity functions used to weight answer credit.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::text::{tokenize_question, TokenList};

/// Signed unigram edits of a disambiguated question relative to its prompt.
///
/// `added` and `deleted` are multisets stored as token counts. They never
/// share a token because both come from a multiset difference.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EditBag {
    pub added: BTreeMap<String, usize>,
    pub deleted: BTreeMap<String, usize>,
}

impl EditBag {
    pub fn added_len(&self) -> usize {
        self.added.values().sum()
    }

    pub fn deleted_len(&self) -> usize {
        self.deleted.values().sum()
    }

    pub fn len(&self) -> usize {
        self.added_len() + self.deleted_len()
    }

    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.deleted.is_empty()
    }
}

impl fmt::Display for EditBag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items = Vec::new();
        for (tok, &n) in &self.deleted {
            items.extend(std::iter::repeat_n(format!("-{tok}"), n));
        }
        for (tok, &n) in &self.added {
            items.extend(std::iter::repeat_n(format!("+{tok}"), n));
        }
        write!(f, "{{{}}}", items.join(", "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityKind {
    /// Answer-only credit; the question is ignored.
    Answer,
    Bleu,
    EditF1,
}

impl SimilarityKind {
    pub const ALL: [SimilarityKind; 3] = [Self::Answer, Self::Bleu, Self::EditF1];

    pub fn name(self) -> &'static str {
        match self {
            Self::Answer => "ans",
            Self::Bleu => "bleu",
            Self::EditF1 => "edit",
        }
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimilarityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ans" | "answer" => Ok(Self::Answer),
            "bleu" => Ok(Self::Bleu),
            "edit" | "edit_f1" | "edit-f1" => Ok(Self::EditF1),
            other => Err(format!("unknown metric `{other}` (expected ans, bleu or edit)")),
        }
    }
}

/// Multiset difference `left - right` of two sorted token slices.
fn sorted_difference(left: &[&str], right: &[&str]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    let (mut i, mut j) = (0, 0);
    while i < left.len() {
        if j == right.len() || left[i] < right[j] {
            *out.entry(left[i].to_owned()).or_insert(0) += 1;
            i += 1;
        } else if left[i] > right[j] {
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn edits_from_tokens(prompt: &TokenList, question: &TokenList) -> EditBag {
    let mut p: Vec<&str> = prompt.iter().map(String::as_str).collect();
    let mut q: Vec<&str> = question.iter().map(String::as_str).collect();
    p.sort_unstable();
    q.sort_unstable();
    EditBag {
        added: sorted_difference(&q, &p),
        deleted: sorted_difference(&p, &q),
    }
}

/// Added and deleted unigrams of `question` compared to `prompt`.
pub fn extract_edits(prompt: &str, question: &str) -> EditBag {
    edits_from_tokens(&tokenize_question(prompt), &tokenize_question(question))
}

fn overlap(a: &BTreeMap<String, usize>, b: &BTreeMap<String, usize>) -> usize {
    a.iter()
        .filter_map(|(tok, &n)| b.get(tok).map(|&m| n.min(m)))
        .sum()
}

/// F1 between two edit bags, treating `+tok` and `-tok` as distinct items.
///
/// Two empty bags agree perfectly (1.0); exactly one empty bag scores 0.0.
pub fn edit_f1(pred: &EditBag, gold: &EditBag) -> f64 {
    let (pred_len, gold_len) = (pred.len(), gold.len());
    match (pred_len, gold_len) {
        (0, 0) => return 1.0,
        (0, _) | (_, 0) => return 0.0,
        _ => {}
    }
    let common = overlap(&pred.added, &gold.added) + overlap(&pred.deleted, &gold.deleted);
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / pred_len as f64;
    let recall = common as f64 / gold_len as f64;
    2.0 * precision * recall / (precision + recall)
}

const MAX_ORDER: usize = 4;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Sentence-level BLEU of `pred` against a single reference.
///
/// Orders 1 through `min(4, |pred|)` are weighted uniformly. Unigram
/// precision is unsmoothed; higher orders use add-one smoothing on both the
/// clipped match count and the n-gram total. The brevity penalty applies when
/// the prediction is shorter than the reference.
pub fn sentence_bleu(pred: &TokenList, reference: &TokenList) -> f64 {
    let (pred, reference) = (pred.tokens(), reference.tokens());
    match (pred.is_empty(), reference.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let max_order = MAX_ORDER.min(pred.len());
    let mut log_sum = 0.0;
    for n in 1..=max_order {
        let ref_counts = ngram_counts(reference, n);
        let pred_counts = ngram_counts(pred, n);
        let matches: usize = pred_counts
            .iter()
            .map(|(gram, &c)| c.min(ref_counts.get(gram).copied().unwrap_or(0)))
            .sum();
        let total = pred.len() + 1 - n;
        let precision = if n == 1 {
            if matches == 0 {
                return 0.0;
            }
            matches as f64 / total as f64
        } else {
            (matches + 1) as f64 / (total + 1) as f64
        };
        log_sum += precision.ln();
    }
    let brevity = if pred.len() < reference.len() {
        (1.0 - reference.len() as f64 / pred.len() as f64).exp()
    } else {
        1.0
    };
    // Guard against rounding pushing an exact match a hair above 1.
    (brevity * (log_sum / max_order as f64).exp()).min(1.0)
}

/// Similarity `f(pred_q, gold_q)` in `[0, 1]` for the given kind.
pub fn similarity(kind: SimilarityKind, prompt: &str, pred_q: &str, gold_q: &str) -> f64 {
    match kind {
        SimilarityKind::Answer => 1.0,
        SimilarityKind::Bleu => sentence_bleu(&tokenize_question(pred_q), &tokenize_question(gold_q)),
        SimilarityKind::EditF1 => edit_f1(&extract_edits(prompt, pred_q), &extract_edits(prompt, gold_q)),
    }
}

/// Pre-tokenized question view used when one prompt is compared against many
/// question pairs.
#[derive(Clone, Debug)]
pub(crate) struct PreparedQuestion {
    pub tokens: TokenList,
    pub edits: EditBag,
}

impl PreparedQuestion {
    pub fn new(prompt: &TokenList, question: &str) -> Self {
        let tokens = tokenize_question(question);
        let edits = edits_from_tokens(prompt, &tokens);
        Self { tokens, edits }
    }
}

pub(crate) fn prepared_similarity(
    kind: SimilarityKind,
    pred: &PreparedQuestion,
    gold: &PreparedQuestion,
) -> f64 {
    match kind {
        SimilarityKind::Answer => 1.0,
        SimilarityKind::Bleu => sentence_bleu(&pred.tokens, &gold.tokens),
        SimilarityKind::EditF1 => edit_f1(&pred.edits, &gold.edits),
    }
}
