//! Dataset summaries: QA-count histogram and signed edit frequencies.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::LazyLock;

use serde::Serialize;

use crate::data::AnnotatedExample;
use crate::report::Fixed4;
use crate::similarity::extract_edits;

/// Question words kept even though common stopword lists contain them.
pub const WH_WORDS: [&str; 9] = ["who", "what", "when", "where", "which", "why", "how", "whom", "whose"];

/// A standard English stopword list, apostrophes stripped to match question
/// tokens. Wh-words are listed here too but exempted by [`is_stopword`].
pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "ain", "all", "am", "an", "and", "any", "are", "aren",
    "arent", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by",
    "can", "couldn", "couldnt", "d", "did", "didn", "didnt", "do", "does", "doesn", "doesnt", "doing", "don",
    "dont", "down", "during", "each", "few", "for", "from", "further", "had", "hadn", "hadnt", "has", "hasn",
    "hasnt", "have", "haven", "havent", "having", "he", "her", "here", "hers", "herself", "him", "himself",
    "his", "how", "i", "if", "in", "into", "is", "isn", "isnt", "it", "its", "itself", "just", "ll", "m", "ma",
    "me", "mightn", "mightnt", "more", "most", "mustn", "mustnt", "my", "myself", "needn", "neednt", "no",
    "nor", "not", "now", "o", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves",
    "out", "over", "own", "re", "s", "same", "shan", "shant", "she", "shes", "should", "shouldn", "shouldnt",
    "shouldve", "so", "some", "such", "t", "than", "that", "thatll", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too", "under", "until",
    "up", "ve", "very", "was", "wasn", "wasnt", "we", "were", "weren", "werent", "what", "when", "where",
    "which", "while", "who", "whom", "why", "will", "with", "won", "wont", "wouldn", "wouldnt", "y", "you",
    "youd", "youll", "your", "youre", "yours", "yourself", "yourselves", "youve",
];

static STOPWORD_SET: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    STOPWORDS.iter().copied().filter(|w| !WH_WORDS.contains(w)).collect()
});

pub fn is_stopword(token: &str) -> bool {
    STOPWORD_SET.contains(token)
}

/// A literal token, or the digit class `D{k}` of a k-digit numeral.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EditClassToken {
    Literal(String),
    Digits(usize),
}

impl EditClassToken {
    /// Tokens made only of ASCII digits become digit classes.
    pub fn classify(token: &str) -> Self {
        if !token.is_empty() && token.bytes().all(|b| b.is_ascii_digit()) {
            Self::Digits(token.len())
        } else {
            Self::Literal(token.to_owned())
        }
    }
}

impl fmt::Display for EditClassToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Literal(s) => f.write_str(s),
            Self::Digits(k) => write!(f, "D{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignedEdit {
    pub added: bool,
    pub token: EditClassToken,
}

impl SignedEdit {
    pub fn added(token: &str) -> Self {
        Self { added: true, token: EditClassToken::classify(token) }
    }

    pub fn deleted(token: &str) -> Self {
        Self { added: false, token: EditClassToken::classify(token) }
    }
}

impl fmt::Display for SignedEdit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.added { '+' } else { '-' }, self.token)
    }
}

/// Number of examples per QA-count bucket `1`, `2`, `3`, `4+`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QaCountHistogram {
    pub buckets: [usize; 4],
}

impl QaCountHistogram {
    pub const LABELS: [&'static str; 4] = ["1", "2", "3", "4+"];

    pub fn total(&self) -> usize {
        self.buckets.iter().sum()
    }

    pub fn percentages(&self) -> [f64; 4] {
        let total = self.total();
        if total == 0 {
            return [0.0; 4];
        }
        self.buckets.map(|c| 100.0 * c as f64 / total as f64)
    }
}

/// Buckets examples by QA count, taking the minimum over accepted annotations.
pub fn qa_count_distribution(data: &[AnnotatedExample]) -> QaCountHistogram {
    let mut hist = QaCountHistogram::default();
    for ex in data {
        let Some(count) = ex.annotations.iter().map(|a| a.pairs.len()).min() else {
            continue;
        };
        hist.buckets[count.clamp(1, 4) - 1] += 1;
    }
    hist
}

pub type EditTable = BTreeMap<SignedEdit, usize>;

/// Signed edit counts over every disambiguated question in the data.
///
/// Stopwords other than wh-words are dropped and numerals are replaced by
/// their digit class.
pub fn edit_distribution(data: &[AnnotatedExample]) -> EditTable {
    let mut table = EditTable::new();
    for ex in data {
        for pair in ex.annotations.iter().flat_map(|a| &a.pairs) {
            let bag = extract_edits(&ex.prompt, &pair.question);
            let signed = bag
                .added
                .iter()
                .map(|(t, &n)| (SignedEdit::added(t), n, t))
                .chain(bag.deleted.iter().map(|(t, &n)| (SignedEdit::deleted(t), n, t)));
            for (edit, n, raw) in signed {
                if !is_stopword(raw) {
                    *table.entry(edit).or_insert(0) += n;
                }
            }
        }
    }
    table
}

/// Edits ordered by descending count, ties by their printed form.
pub fn ranked_edits(freq: &EditTable) -> Vec<(String, usize)> {
    let mut items: Vec<(String, usize)> = freq.iter().map(|(e, &n)| (e.to_string(), n)).collect();
    items.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    items
}

/// `(k, share of all edit occurrences covered by the k most frequent edits)`.
pub fn coverage_curve(freq: &EditTable) -> Vec<(usize, f64)> {
    let ranked = ranked_edits(freq);
    let total: usize = ranked.iter().map(|r| r.1).sum();
    let mut running = 0;
    ranked
        .iter()
        .enumerate()
        .map(|(i, (_, n))| {
            running += n;
            (i + 1, running as f64 / total as f64)
        })
        .collect()
}

/// Coverage of the top `k` edits, saturating at the end of the curve.
pub fn coverage_at(curve: &[(usize, f64)], k: usize) -> Option<f64> {
    if k == 0 {
        return Some(0.0);
    }
    curve.get(k - 1).or(curve.last()).map(|p| p.1)
}

#[derive(Serialize)]
struct BucketJson {
    count: usize,
    percent: Fixed4,
}

#[derive(Serialize)]
struct EditJson {
    edit: String,
    count: usize,
}

#[derive(Serialize)]
pub struct StatsReport {
    n_examples: usize,
    qa_count: BTreeMap<&'static str, BucketJson>,
    total_edits: usize,
    distinct_edits: usize,
    top_edits: Vec<EditJson>,
    coverage: BTreeMap<String, Option<Fixed4>>,
}

pub const COVERAGE_POINTS: [usize; 3] = [10, 100, 1000];

pub fn stats_report(data: &[AnnotatedExample], top_k: usize) -> StatsReport {
    let hist = qa_count_distribution(data);
    let percents = hist.percentages();
    let table = edit_distribution(data);
    let ranked = ranked_edits(&table);
    let curve = coverage_curve(&table);
    StatsReport {
        n_examples: data.len(),
        qa_count: QaCountHistogram::LABELS
            .iter()
            .enumerate()
            .map(|(i, &label)| (label, BucketJson { count: hist.buckets[i], percent: Fixed4(percents[i]) }))
            .collect(),
        total_edits: table.values().sum(),
        distinct_edits: table.len(),
        top_edits: ranked.into_iter().take(top_k).map(|(edit, count)| EditJson { edit, count }).collect(),
        coverage: COVERAGE_POINTS
            .iter()
            .map(|&k| (k.to_string(), coverage_at(&curve, k).map(Fixed4)))
            .collect(),
    }
}
