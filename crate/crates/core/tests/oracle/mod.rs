//! Brute-force reference implementations used as test oracles.
//!
//! Nothing here calls the assignment solver or the metric code under test;
//! only the public answer normalization and similarity functions are reused.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use ambigqa::{normalize_answer, similarity, EditBag, PredictedExample, ReferenceAnnotation, SimilarityKind};

/// Best total over every injective partial map from rows to columns.
pub fn best_partial_matching(weights: &[Vec<f64>]) -> f64 {
    fn go(weights: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
        if row == weights.len() {
            return 0.0;
        }
        let mut best = go(weights, row + 1, used);
        for col in 0..used.len() {
            if !used[col] {
                used[col] = true;
                best = best.max(weights[row][col] + go(weights, row + 1, used));
                used[col] = false;
            }
        }
        best
    }
    let n = weights.first().map_or(0, Vec::len);
    go(weights, 0, &mut vec![false; n])
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for perm in permutations(k - 1) {
        for pos in 0..=perm.len() {
            let mut p = perm.clone();
            p.insert(pos, k - 1);
            out.push(p);
        }
    }
    out
}

/// Lexicographically smallest optimal row-to-column vector of the zero-padded
/// square matrix, reported as positive-weight `(row, col)` pairs.
pub fn lexicographic_optimum(weights: &[Vec<f64>], eps: f64) -> Vec<(usize, usize)> {
    let m = weights.len();
    let n = weights.first().map_or(0, Vec::len);
    let k = m.max(n);
    let w = |r: usize, c: usize| if r < m && c < n { weights[r][c] } else { 0.0 };
    let mut perms = permutations(k);
    perms.sort();
    let total = |p: &Vec<usize>| p.iter().enumerate().map(|(r, &c)| w(r, c)).sum::<f64>();
    let best = perms.iter().map(total).fold(0.0, f64::max);
    let chosen = perms.iter().find(|p| total(p) >= best - eps).expect("some permutation is optimal");
    chosen
        .iter()
        .enumerate()
        .filter(|&(r, &c)| r < m && c < n && weights[r][c] > 0.0)
        .map(|(r, &c)| (r, c))
        .collect()
}

/// Weight matrix built straight from the metric definition.
pub fn weight_matrix(pred: &PredictedExample, reference: &ReferenceAnnotation, kind: SimilarityKind, prompt: &str) -> Vec<Vec<f64>> {
    pred.pairs
        .iter()
        .map(|p| {
            let answer = normalize_answer(&p.answer);
            reference
                .pairs
                .iter()
                .map(|g| {
                    let hit = g.answers.iter().any(|a| normalize_answer(a) == answer);
                    if hit {
                        similarity(kind, prompt, p.question_or(prompt), &g.question)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// `(precision, recall, f1)` by exhaustive enumeration of assignments.
pub fn brute_force_score(
    pred: &PredictedExample,
    reference: &ReferenceAnnotation,
    kind: SimilarityKind,
    prompt: &str,
) -> (f64, f64, f64) {
    let total = best_partial_matching(&weight_matrix(pred, reference, kind, prompt));
    let p = total / pred.pairs.len() as f64;
    let r = total / reference.pairs.len() as f64;
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f1)
}

/// Multiset difference by count maps.
pub fn count_map_edits(prompt: &[String], question: &[String]) -> EditBag {
    let mut counts: HashMap<&str, i64> = HashMap::new();
    for t in question {
        *counts.entry(t.as_str()).or_default() += 1;
    }
    for t in prompt {
        *counts.entry(t.as_str()).or_default() -= 1;
    }
    let mut added = BTreeMap::new();
    let mut deleted = BTreeMap::new();
    for (tok, c) in counts {
        if c > 0 {
            added.insert(tok.to_owned(), c as usize);
        } else if c < 0 {
            deleted.insert(tok.to_owned(), (-c) as usize);
        }
    }
    EditBag { added, deleted }
}
