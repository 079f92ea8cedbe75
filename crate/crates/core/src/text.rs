//! Answer normalization and question tokenization.
//!
//! Both routines share one pipeline: compatibility folding (NFKC), lowercasing,
//! removal of every character that is neither alphanumeric nor whitespace, and
//! whitespace splitting. Answers additionally drop the articles `a`, `an` and
//! `the`; questions keep them, since an added or deleted article is a real
//! question edit.

use std::fmt;

use unicode_normalization::UnicodeNormalization;

const ARTICLES: [&str; 3] = ["a", "an", "the"];

/// Lowercased, punctuation-free tokens of a question.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TokenList(Vec<String>);

impl TokenList {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }
}

impl fmt::Display for TokenList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

impl<'a> IntoIterator for &'a TokenList {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

fn fold(s: &str) -> String {
    // Lowercasing can produce sequences that are not NFKC-stable (e.g. a
    // dotted capital I), so fold a second time afterwards.
    let lowered: String = s.nfkc().collect::<String>().to_lowercase();
    lowered
        .nfkc()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect()
}

/// Lowercase, strip punctuation and articles, collapse whitespace.
pub fn normalize_answer(s: &str) -> String {
    let folded = fold(s);
    let mut out = String::with_capacity(folded.len());
    for word in folded
        .split_whitespace()
        .filter(|w| !ARTICLES.contains(w))
    {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

pub fn tokenize_question(s: &str) -> TokenList {
    TokenList(fold(s).split_whitespace().map(str::to_owned).collect())
}

/// True when `pred` equals one of the `gold` strings after normalization.
pub fn answer_match<S: AsRef<str>>(pred: &str, gold: &[S]) -> bool {
    let pred = normalize_answer(pred);
    gold.iter().any(|g| normalize_answer(g.as_ref()) == pred)
}

/// Like [`answer_match`] but against strings that are already normalized.
pub(crate) fn normalized_match(pred_norm: &str, gold_norm: &[String]) -> bool {
    gold_norm.iter().any(|g| g == pred_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalizes_answers() {
        assert_eq!(normalize_answer("The United Kingdom"), "united kingdom");
        assert_eq!(normalize_answer("October 1, 1981"), "october 1 1981");
        assert_eq!(normalize_answer("Marloes Sands Beach"), "marloes sands beach");
        assert_eq!(normalize_answer("  a   Tale of   Two Cities. "), "tale of two cities");
        assert_eq!(normalize_answer(""), "");
    }

    #[test]
    fn typographic_quotes_fold() {
        assert_eq!(normalize_answer("Rock \u{2018}n\u{2019} Roll"), normalize_answer("Rock 'n' Roll"));
        assert_eq!(normalize_answer("\u{FF21}BC"), "abc");
    }

    #[test]
    fn tokenizes_questions() {
        let toks = tokenize_question("Who made the play the crucible?");
        assert_eq!(toks.tokens(), ["who", "made", "the", "play", "the", "crucible"]);
        let toks = tokenize_question("When does family guy season 16 come out?");
        assert_eq!(
            toks.tokens(),
            ["when", "does", "family", "guy", "season", "16", "come", "out"]
        );
        assert!(tokenize_question("").is_empty());
        assert!(tokenize_question(" ?! ").is_empty());
    }

    #[test]
    fn matches_answers() {
        assert!(answer_match("eight", &["eight"]));
        assert!(!answer_match("seven", &["eight"]));
        assert!(answer_match("THE 1624", &["1624"]));
        assert!(!answer_match("the year 1624", &["1624"]));
        assert!(answer_match("Manchester United", &["Man utd", "Manchester United"]));
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,40}") {
            let once = normalize_answer(&s);
            prop_assert_eq!(normalize_answer(&once), once);
        }

        #[test]
        fn normalize_ascii_idempotent(s in "[ a-zA-Z0-9.,'!?-]{0,40}") {
            let once = normalize_answer(&s);
            prop_assert_eq!(normalize_answer(&once), once);
        }

        #[test]
        fn tokens_well_formed(s in "\\PC{0,40}") {
            for t in tokenize_question(&s).iter() {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(char::is_whitespace));
            }
        }

        #[test]
        fn tokens_are_normalization_without_articles(
            words in proptest::collection::vec("(a|an|the|[A-Za-z0-9]{1,6})[.,?]?", 0..10)
        ) {
            let s = words.join(" ");
            let joined = tokenize_question(&s).to_string();
            let expected: Vec<&str> = joined
                .split(' ')
                .filter(|w| !w.is_empty() && !ARTICLES.contains(w))
                .collect();
            prop_assert_eq!(normalize_answer(&s), expected.join(" "));
        }

        #[test]
        fn match_is_reflexive_and_order_free(
            s in "[a-zA-Z0-9]{1,8}( [a-zA-Z0-9]{1,8}){0,3}",
            others in proptest::collection::vec("[a-z]{1,6}", 0..4),
        ) {
            prop_assert!(answer_match(&s, std::slice::from_ref(&s)));
            let mut gold = others.clone();
            gold.push(s.to_uppercase());
            let hit = answer_match(&s, &gold);
            gold.reverse();
            prop_assert_eq!(answer_match(&s, &gold), hit);
            prop_assert!(hit);
        }
    }
}
