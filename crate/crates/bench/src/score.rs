use std::collections::BTreeSet;

use serde::Serialize;
use vweave_core::rdf::SolutionMapping;

/// Answer quality under set semantics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Score {
    pub returned: usize,
    pub expected: usize,
    pub correct: usize,
    pub precision: f64,
    pub recall: f64,
    /// Jaccard index of returned and expected answers.
    pub accuracy: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores `returned` against `truth`. Duplicates are ignored on both sides;
/// an empty denominator counts as a perfect score.
pub fn score(returned: &[SolutionMapping], truth: &[SolutionMapping]) -> Score {
    let got: BTreeSet<&SolutionMapping> = returned.iter().collect();
    let want: BTreeSet<&SolutionMapping> = truth.iter().collect();
    let correct = got.intersection(&want).count();
    let union = got.len() + want.len() - correct;
    let precision = ratio(correct, got.len());
    let recall = ratio(correct, want.len());
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Score {
        returned: got.len(),
        expected: want.len(),
        correct,
        precision,
        recall,
        accuracy: ratio(correct, union),
        f1,
    }
}
