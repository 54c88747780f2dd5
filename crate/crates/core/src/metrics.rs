//! Token and boundary precision/recall/F1 between gold and predicted
//! segmentations.
//!
//! A predicted token counts as correct only when its exact span is a gold
//! token span. Boundary scores are over interior positions; sentence edges
//! are given, not predicted. Corpus scores micro-aggregate counts over
//! sentences before computing P/R/F.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{spans_of, Corpus};

/// True positives, false positives, and misses (false negatives).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchCounts {
    pub tp: u64,
    pub fp: u64,
    pub missed: u64,
}

impl std::ops::AddAssign for MatchCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.tp += rhs.tp;
        self.fp += rhs.fp;
        self.missed += rhs.missed;
    }
}

/// Per-sentence (or aggregated) token and boundary counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegEvalCounts {
    pub token: MatchCounts,
    pub boundary: MatchCounts,
}

impl std::ops::AddAssign for SegEvalCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.token += rhs.token;
        self.boundary += rhs.boundary;
    }
}

/// Compare one sentence's boundary sets. Both must be sorted, duplicate-free
/// and interior to a sentence of `len` symbols.
pub fn sentence_counts(gold: &[usize], predicted: &[usize], len: usize) -> Result<SegEvalCounts> {
    validate_boundaries(gold, len)?;
    validate_boundaries(predicted, len)?;

    let boundary_tp = sorted_intersection(gold, predicted);
    let boundary = MatchCounts {
        tp: boundary_tp,
        fp: predicted.len() as u64 - boundary_tp,
        missed: gold.len() as u64 - boundary_tp,
    };

    let g_spans = spans_of(gold, len);
    let p_spans = spans_of(predicted, len);
    let mut token_tp = 0u64;
    let mut gi = 0;
    let mut pi = 0;
    while gi < g_spans.len() && pi < p_spans.len() {
        match g_spans[gi].cmp(&p_spans[pi]) {
            std::cmp::Ordering::Equal => {
                token_tp += 1;
                gi += 1;
                pi += 1;
            }
            std::cmp::Ordering::Less => gi += 1,
            std::cmp::Ordering::Greater => pi += 1,
        }
    }
    let token = MatchCounts {
        tp: token_tp,
        fp: p_spans.len() as u64 - token_tp,
        missed: g_spans.len() as u64 - token_tp,
    };
    Ok(SegEvalCounts { token, boundary })
}

fn validate_boundaries(bounds: &[usize], len: usize) -> Result<()> {
    for (i, &b) in bounds.iter().enumerate() {
        if b == 0 || b >= len {
            return Err(Error::Domain(format!(
                "boundary {b} out of range for sentence of length {len}"
            )));
        }
        if i > 0 && bounds[i - 1] >= b {
            return Err(Error::Domain(
                "boundaries must be sorted and duplicate-free".into(),
            ));
        }
    }
    Ok(())
}

fn sorted_intersection(a: &[usize], b: &[usize]) -> u64 {
    let mut ai = 0;
    let mut bi = 0;
    let mut common = 0;
    while ai < a.len() && bi < b.len() {
        match a[ai].cmp(&b[bi]) {
            std::cmp::Ordering::Equal => {
                common += 1;
                ai += 1;
                bi += 1;
            }
            std::cmp::Ordering::Less => ai += 1,
            std::cmp::Ordering::Greater => bi += 1,
        }
    }
    common
}

/// Precision, recall, F1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Standard P/R/F with the 0/0 -> 0 convention, except that the all-zero case
/// (nothing to find, nothing predicted) scores 1.
pub fn prf(tp: u64, fp: u64, missed: u64) -> Prf {
    if tp == 0 && fp == 0 && missed == 0 {
        return Prf {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
        };
    }
    let ratio = |num: u64, den: u64| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + missed);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Prf {
        precision,
        recall,
        f1,
    }
}

impl From<MatchCounts> for Prf {
    fn from(c: MatchCounts) -> Self {
        prf(c.tp, c.fp, c.missed)
    }
}

/// Corpus-level token and boundary scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusEval {
    pub token: Prf,
    pub boundary: Prf,
    pub counts: SegEvalCounts,
}

/// Micro-aggregate counts over all sentences, then score. Sentence counts and
/// symbol lengths must line up.
pub fn evaluate_corpus(gold: &Corpus, predicted: &Corpus) -> Result<CorpusEval> {
    if gold.len() != predicted.len() {
        return Err(Error::Precondition(format!(
            "gold has {} sentences, predicted has {}",
            gold.len(),
            predicted.len()
        )));
    }
    let counts = gold
        .sentences()
        .par_iter()
        .zip(predicted.sentences().par_iter())
        .enumerate()
        .map(|(index, (g, p))| {
            if g.len() != p.len() {
                return Err(Error::Alignment {
                    index,
                    gold: g.len(),
                    predicted: p.len(),
                });
            }
            sentence_counts(g.boundaries(), p.boundaries(), g.len())
        })
        .try_reduce(SegEvalCounts::default, |mut acc, c| {
            acc += c;
            Ok(acc)
        })?;
    Ok(CorpusEval {
        token: counts.token.into(),
        boundary: counts.boundary.into(),
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::AlphabetKind;

    #[test]
    fn perfect_match_counts() {
        let c = sentence_counts(&[3], &[3], 7).unwrap();
        assert_eq!(
            c.token,
            MatchCounts {
                tp: 2,
                fp: 0,
                missed: 0
            }
        );
        assert_eq!(
            c.boundary,
            MatchCounts {
                tp: 1,
                fp: 0,
                missed: 0
            }
        );
    }

    #[test]
    fn empty_prediction_counts() {
        let c = sentence_counts(&[3], &[], 7).unwrap();
        assert_eq!(
            c.token,
            MatchCounts {
                tp: 0,
                fp: 1,
                missed: 2
            }
        );
        assert_eq!(
            c.boundary,
            MatchCounts {
                tp: 0,
                fp: 0,
                missed: 1
            }
        );
    }

    #[test]
    fn partial_match_counts() {
        // gold spans [0,2) [2,5) [5,7); predicted [0,2) [2,7)
        let c = sentence_counts(&[2, 5], &[2], 7).unwrap();
        assert_eq!(
            c.boundary,
            MatchCounts {
                tp: 1,
                fp: 0,
                missed: 1
            }
        );
        assert_eq!(
            c.token,
            MatchCounts {
                tp: 1,
                fp: 1,
                missed: 2
            }
        );
    }

    #[test]
    fn out_of_range_boundary_is_domain_error() {
        assert!(sentence_counts(&[7], &[], 7).is_err());
        assert!(sentence_counts(&[0], &[], 7).is_err());
        assert!(sentence_counts(&[2, 2], &[], 7).is_err());
    }

    #[test]
    fn prf_examples() {
        let p = prf(1, 0, 1);
        assert_eq!(p.precision, 1.0);
        assert_eq!(p.recall, 0.5);
        assert!((p.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            prf(0, 0, 0),
            Prf {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0
            }
        );
        assert_eq!(
            prf(0, 5, 5),
            Prf {
                precision: 0.0,
                recall: 0.0,
                f1: 0.0
            }
        );
    }

    #[test]
    fn identical_corpora_score_one() {
        let c = Corpus::parse_str("the dog\na cat\n", AlphabetKind::Character, None, "t").unwrap();
        let eval = evaluate_corpus(&c, &c).unwrap();
        for prf in [eval.token, eval.boundary] {
            assert_eq!(prf.precision, 1.0);
            assert_eq!(prf.recall, 1.0);
            assert_eq!(prf.f1, 1.0);
        }
    }

    #[test]
    fn no_predicted_boundaries_scores_zero_recall() {
        let gold =
            Corpus::parse_str("the dog\na cat\n", AlphabetKind::Character, None, "t").unwrap();
        let predicted = gold.with_boundaries(vec![vec![], vec![]]).unwrap();
        let eval = evaluate_corpus(&gold, &predicted).unwrap();
        assert_eq!(eval.boundary.recall, 0.0);
        assert_eq!(eval.boundary.f1, 0.0);
    }

    #[test]
    fn length_mismatch_names_the_sentence() {
        let gold = Corpus::parse_str("ab\ncd e\n", AlphabetKind::Character, None, "t").unwrap();
        let predicted =
            Corpus::parse_str("ab\ncdef\n", AlphabetKind::Character, None, "t").unwrap();
        match evaluate_corpus(&gold, &predicted) {
            Err(Error::Alignment { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected alignment error, got {other:?}"),
        }
    }

    #[test]
    fn micro_aggregation_sums_counts_before_scoring() {
        let gold = Corpus::parse_str("a b\ncc\n", AlphabetKind::Character, None, "t").unwrap();
        let predicted = gold.with_boundaries(vec![vec![1], vec![1]]).unwrap();
        let eval = evaluate_corpus(&gold, &predicted).unwrap();
        // token counts: s1 tp=2; s2 gold [0,2), predicted [0,1),[1,2): fp=2, missed=1
        assert_eq!(
            eval.counts.token,
            MatchCounts {
                tp: 2,
                fp: 2,
                missed: 1
            }
        );
        assert!((eval.token.precision - 0.5).abs() < 1e-15);
        assert!((eval.token.recall - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn swapping_gold_and_predicted_swaps_precision_recall() {
        let gold = Corpus::parse_str("abc de\nf gh\n", AlphabetKind::Character, None, "t").unwrap();
        let predicted = gold.with_boundaries(vec![vec![1, 3], vec![2]]).unwrap();
        let ab = evaluate_corpus(&gold, &predicted).unwrap();
        let ba = evaluate_corpus(&predicted, &gold).unwrap();
        assert_eq!(ab.token.precision, ba.token.recall);
        assert_eq!(ab.token.recall, ba.token.precision);
        assert_eq!(ab.boundary.precision, ba.boundary.recall);
        assert_eq!(ab.token.f1, ba.token.f1);
    }
}
