//! Stochastic balancing of benchmark sets against baseline scorers.
//!
//! Selects one nonword per word (or a pair subset) so that every scorer's
//! spot-the-word accuracy sits as close to 50% as possible: the objective is
//! the sum over scorers of |accuracy - 0.5|. Acceptance comparisons run on
//! exact integer half-credits, so results are reproducible bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bench::MinimalPair;
use crate::error::{Error, Result};
use crate::ngram::Scorer;
use crate::rng::stream_rng;

/// A word with its stratum label and candidate nonwords.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateWord {
    pub word: String,
    pub stratum: String,
    pub candidates: Vec<String>,
}

/// The pWUGGY balancing input: every word keeps at least one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub words: Vec<CandidateWord>,
}

impl CandidateSet {
    pub fn new(words: Vec<CandidateWord>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::Precondition("no candidate words".into()));
        }
        for w in &words {
            if w.candidates.is_empty() {
                return Err(Error::Precondition(format!(
                    "word `{}` has no candidates",
                    w.word
                )));
            }
        }
        Ok(CandidateSet { words })
    }

    /// Load `word<TAB>stratum<TAB>candidate1,candidate2,...`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path.display().to_string();
        let mut words = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let fields: Vec<&str> = line.split('\t').collect();
            let [word, stratum, candidates] = fields.as_slice() else {
                return Err(Error::parse(
                    &name,
                    lineno,
                    "expected `word<TAB>stratum<TAB>candidates`",
                ));
            };
            let candidates: Vec<String> = candidates
                .split(',')
                .filter(|c| !c.is_empty())
                .map(str::to_string)
                .collect();
            if word.is_empty() || candidates.is_empty() {
                return Err(Error::parse(&name, lineno, "empty word or candidate list"));
            }
            words.push(CandidateWord {
                word: word.to_string(),
                stratum: stratum.to_string(),
                candidates,
            });
        }
        CandidateSet::new(words)
    }
}

/// One chosen pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancedPair {
    pub word: String,
    pub nonword: String,
    pub stratum: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumReport {
    pub pairs: usize,
    pub objective: f64,
}

/// The balanced selection plus its objective values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancedSelection {
    pub pairs: Vec<BalancedPair>,
    pub objective: f64,
    pub per_stratum: BTreeMap<String, StratumReport>,
}

/// Sum over scorers of |accuracy - 0.5| for the given (word, nonword) pairs;
/// ties count half.
pub fn objective<S: Scorer + ?Sized>(pairs: &[(String, String)], scorers: &[&S]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Precondition(
            "objective of an empty pair list".into(),
        ));
    }
    let mut total = 0.0;
    for scorer in scorers {
        let mut wins = 0.0;
        for (word, nonword) in pairs {
            wins += crate::bench::score_credit(scorer.score(word)?, scorer.score(nonword)?);
        }
        total += (wins / pairs.len() as f64 - 0.5).abs();
    }
    Ok(total)
}

/// Win credit in half-units: 2 = word wins, 1 = tie, 0 = nonword wins.
fn half_credit(word_score: f64, nonword_score: f64) -> u64 {
    if word_score > nonword_score {
        2
    } else if word_score == nonword_score {
        1
    } else {
        0
    }
}

/// Objective of `wins` half-credits over `n` pairs, in exact arithmetic the
/// comparison below relies on: `sum_m |wins_m - n| / (2n)`.
fn objective_halves(wins: &[u64], n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    wins.iter()
        .map(|&w| (w as i64 - n as i64).unsigned_abs())
        .sum::<u64>() as f64
        / (2 * n) as f64
}

/// Exact test: does adding a pair with `delta` half-credits keep the
/// objective from increasing?
fn acceptable(wins: &[u64], n: u64, delta: &[u64]) -> bool {
    let new_sum: u64 = wins
        .iter()
        .zip(delta)
        .map(|(&w, &d)| (w as i64 + d as i64 - (n as i64 + 1)).unsigned_abs())
        .sum();
    if n == 0 {
        return new_sum == 0;
    }
    let old_sum: u64 = wins
        .iter()
        .map(|&w| (w as i64 - n as i64).unsigned_abs())
        .sum();
    // new_sum / (2(n+1)) <= old_sum / (2n)
    new_sum * n <= old_sum * (n + 1)
}

/// Choose one nonword per word, stratum by stratum: visit words in random
/// order, sample candidates without replacement, and accept the first that
/// does not increase the running objective (a uniformly random candidate if
/// they all do). Deterministic under `seed`; strata are independent.
pub fn balance_wuggy<S: Scorer + ?Sized>(
    set: &CandidateSet,
    scorers: &[&S],
    seed: u64,
) -> Result<BalancedSelection> {
    if scorers.is_empty() {
        return Err(Error::Precondition("need at least one scorer".into()));
    }
    let m = scorers.len();

    // score every string once, in parallel over words
    let credits: Vec<Vec<Vec<u64>>> = set
        .words
        .par_iter()
        .map(|w| {
            let word_scores: Vec<f64> = scorers
                .iter()
                .map(|s| s.score(&w.word))
                .collect::<Result<_>>()?;
            w.candidates
                .iter()
                .map(|c| {
                    scorers
                        .iter()
                        .zip(&word_scores)
                        .map(|(s, &ws)| Ok(half_credit(ws, s.score(c)?)))
                        .collect::<Result<Vec<u64>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut strata: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, w) in set.words.iter().enumerate() {
        strata.entry(&w.stratum).or_default().push(i);
    }

    let chosen_per_stratum: Vec<Vec<(usize, usize)>> = strata
        .values()
        .enumerate()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(si, members)| {
            let mut rng = stream_rng(seed, 0x0ba1_a0ce, si as u64);
            let mut order = members.clone();
            order.shuffle(&mut rng);
            let mut wins = vec![0u64; m];
            let mut chosen = Vec::with_capacity(members.len());
            for (n, wi) in order.into_iter().enumerate() {
                let k = set.words[wi].candidates.len();
                let mut cand_order: Vec<usize> = (0..k).collect();
                cand_order.shuffle(&mut rng);
                let mut pick = None;
                for ci in cand_order {
                    if acceptable(&wins, n as u64, &credits[wi][ci]) {
                        pick = Some(ci);
                        break;
                    }
                }
                let ci = pick.unwrap_or_else(|| rng.gen_range(0..k));
                for (w, d) in wins.iter_mut().zip(&credits[wi][ci]) {
                    *w += d;
                }
                chosen.push((wi, ci));
            }
            chosen
        })
        .collect();

    let mut all: Vec<(usize, usize)> = chosen_per_stratum.into_iter().flatten().collect();
    all.sort_by_key(|&(wi, _)| wi);

    let mut global_wins = vec![0u64; m];
    let mut per_stratum_acc: BTreeMap<String, (Vec<u64>, u64)> = BTreeMap::new();
    let mut pairs = Vec::with_capacity(all.len());
    for &(wi, ci) in &all {
        let w = &set.words[wi];
        for (g, d) in global_wins.iter_mut().zip(&credits[wi][ci]) {
            *g += d;
        }
        let slot = per_stratum_acc
            .entry(w.stratum.clone())
            .or_insert_with(|| (vec![0u64; m], 0));
        for (s, d) in slot.0.iter_mut().zip(&credits[wi][ci]) {
            *s += d;
        }
        slot.1 += 1;
        pairs.push(BalancedPair {
            word: w.word.clone(),
            nonword: w.candidates[ci].clone(),
            stratum: w.stratum.clone(),
        });
    }
    Ok(BalancedSelection {
        objective: objective_halves(&global_wins, all.len() as u64),
        per_stratum: per_stratum_acc
            .into_iter()
            .map(|(k, (wins, n))| {
                (
                    k,
                    StratumReport {
                        pairs: n as usize,
                        objective: objective_halves(&wins, n),
                    },
                )
            })
            .collect(),
        pairs,
    })
}

/// A balanced subset of minimal pairs and the objective it reaches.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlimpSelection {
    pub chosen: Vec<MinimalPair>,
    pub objective: f64,
}

/// Grow a subset to `k` pairs: sample unchosen pairs in random passes, adding
/// any that do not increase the objective; if a whole pass adds nothing, add
/// one sampled pair unconditionally. Deterministic under `seed`.
pub fn balance_blimp<S: Scorer + ?Sized>(
    pairs: &[MinimalPair],
    scorers: &[&S],
    k: usize,
    seed: u64,
) -> Result<BlimpSelection> {
    if scorers.is_empty() {
        return Err(Error::Precondition("need at least one scorer".into()));
    }
    if k == 0 {
        return Err(Error::Precondition("subset size must be positive".into()));
    }
    if k > pairs.len() {
        return Err(Error::Precondition(format!(
            "requested {k} pairs from a pool of {}",
            pairs.len()
        )));
    }
    let m = scorers.len();
    let credits: Vec<Vec<u64>> = pairs
        .par_iter()
        .map(|p| {
            scorers
                .iter()
                .map(|s| Ok(half_credit(s.score(&p.positive)?, s.score(&p.negative)?)))
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<_>>()?;

    let mut rng = stream_rng(seed, 0xb11b, 0);
    let mut chosen_mask = vec![false; pairs.len()];
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut wins = vec![0u64; m];
    while chosen.len() < k {
        let mut unchosen: Vec<usize> = (0..pairs.len()).filter(|&i| !chosen_mask[i]).collect();
        unchosen.shuffle(&mut rng);
        let mut added = false;
        for &i in &unchosen {
            if chosen.len() == k {
                break;
            }
            if acceptable(&wins, chosen.len() as u64, &credits[i]) {
                for (w, d) in wins.iter_mut().zip(&credits[i]) {
                    *w += d;
                }
                chosen_mask[i] = true;
                chosen.push(i);
                added = true;
            }
        }
        if !added && chosen.len() < k {
            let remaining: Vec<usize> = (0..pairs.len()).filter(|&i| !chosen_mask[i]).collect();
            let i = remaining[rng.gen_range(0..remaining.len())];
            for (w, d) in wins.iter_mut().zip(&credits[i]) {
                *w += d;
            }
            chosen_mask[i] = true;
            chosen.push(i);
        }
    }
    chosen.sort_unstable();
    Ok(BlimpSelection {
        objective: objective_halves(&wins, k as u64),
        chosen: chosen.into_iter().map(|i| pairs[i].clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed_scorer<'a>(map: &'a [(&'a str, f64)]) -> impl Fn(&str) -> f64 + 'a {
        move |s: &str| {
            map.iter()
                .find(|(k, _)| *k == s)
                .map(|(_, v)| *v)
                .unwrap_or(0.0)
        }
    }

    #[test]
    fn objective_examples() {
        // 4 pairs split 2/2 -> 0
        let even = |s: &str| {
            if ["w0", "w1", "n2", "n3"].contains(&s) {
                1.0
            } else {
                0.0
            }
        };
        let pairs: Vec<(String, String)> =
            (0..4).map(|i| (format!("w{i}"), format!("n{i}"))).collect();
        let obj = objective(&pairs, &[&even as &dyn Scorer]).unwrap();
        assert_eq!(obj, 0.0);

        // all words higher -> 0.5
        let always = |s: &str| if s.starts_with('w') { 1.0 } else { 0.0 };
        let obj = objective(&pairs, &[&always as &dyn Scorer]).unwrap();
        assert_eq!(obj, 0.5);

        // 3 of 4 -> 0.25
        let three = |s: &str| {
            if (s.starts_with('w') && s != "w3") || s == "n3" {
                1.0
            } else {
                0.0
            }
        };
        let obj = objective(&pairs, &[&three as &dyn Scorer]).unwrap();
        assert_eq!(obj, 0.25);
    }

    #[test]
    fn forced_choice_with_single_candidates() {
        let set = CandidateSet::new(vec![
            CandidateWord {
                word: "aa".into(),
                stratum: "s".into(),
                candidates: vec!["xx".into()],
            },
            CandidateWord {
                word: "bb".into(),
                stratum: "s".into(),
                candidates: vec!["yy".into()],
            },
        ])
        .unwrap();
        let scorer = |s: &str| s.len() as f64;
        let sel = balance_wuggy(&set, &[&scorer as &dyn Scorer], 1).unwrap();
        assert_eq!(sel.pairs.len(), 2);
        assert_eq!(sel.pairs[0].nonword, "xx");
        assert_eq!(sel.pairs[1].nonword, "yy");
    }

    #[test]
    fn achievable_balance_is_found() {
        // every word has one candidate scoring above it and one below:
        // perfect balance (accuracy 0.5) is reachable in every stratum
        let mut words = Vec::new();
        for i in 0..40 {
            words.push(CandidateWord {
                word: format!("w{i:02}"),
                stratum: format!("s{}", i % 4),
                candidates: vec![format!("hi{i:02}"), format!("lo{i:02}")],
            });
        }
        let set = CandidateSet::new(words).unwrap();
        let scorer = |s: &str| {
            if s.starts_with("hi") {
                10.0
            } else if s.starts_with("lo") {
                -10.0
            } else {
                0.0
            }
        };
        let sel = balance_wuggy(&set, &[&scorer as &dyn Scorer], 99).unwrap();
        assert!(sel.objective <= 0.02);
        for report in sel.per_stratum.values() {
            assert!(
                report.objective <= 0.02,
                "stratum objective {}",
                report.objective
            );
        }
    }

    #[test]
    fn same_seed_same_selection() {
        let words: Vec<CandidateWord> = (0..30)
            .map(|i| CandidateWord {
                word: format!("w{i}"),
                stratum: (i % 3).to_string(),
                candidates: (0..5).map(|c| format!("c{i}_{c}")).collect(),
            })
            .collect();
        let set = CandidateSet::new(words).unwrap();
        let scorer = |s: &str| (s.bytes().map(u64::from).sum::<u64>() % 17) as f64;
        let a = balance_wuggy(&set, &[&scorer as &dyn Scorer], 5).unwrap();
        let b = balance_wuggy(&set, &[&scorer as &dyn Scorer], 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn blimp_perfect_pool_keeps_objective_zero() {
        // pool of pairs where positives win exactly half the time
        let pairs: Vec<MinimalPair> = (0..20)
            .map(|i| {
                MinimalPair::new(
                    i.to_string(),
                    "cat",
                    format!("{}p{i}", if i % 2 == 0 { "hi" } else { "lo" }),
                    format!("{}n{i}", if i % 2 == 0 { "lo" } else { "hi" }),
                )
                .unwrap()
            })
            .collect();
        let scorer = |s: &str| if s.starts_with("hi") { 1.0 } else { 0.0 };
        let sel = balance_blimp(&pairs, &[&scorer as &dyn Scorer], 20, 3).unwrap();
        assert_eq!(sel.chosen.len(), 20);
        assert_eq!(sel.objective, 0.0);
    }

    #[test]
    fn blimp_k_one_objective() {
        let pairs = vec![
            MinimalPair::new("0", "c", "hi0", "lo0").unwrap(),
            MinimalPair::new("1", "c", "hi1", "lo1").unwrap(),
        ];
        let scorer = |s: &str| if s.starts_with("hi") { 1.0 } else { 0.0 };
        let sel = balance_blimp(&pairs, &[&scorer as &dyn Scorer], 1, 1).unwrap();
        assert_eq!(sel.chosen.len(), 1);
        assert_eq!(sel.objective, 0.5);
    }

    #[test]
    fn blimp_k_larger_than_pool_is_error() {
        let pairs = vec![MinimalPair::new("0", "c", "a", "b").unwrap()];
        let scorer = |_: &str| 0.0;
        assert!(balance_blimp(&pairs, &[&scorer as &dyn Scorer], 2, 0).is_err());
    }

    #[test]
    fn accepted_steps_never_increase_running_objective() {
        // replay the acceptance rule directly on random credit streams
        let mut rng = stream_rng(17, 0, 0);
        for _ in 0..200 {
            let m = rng.gen_range(1..4);
            let mut wins = vec![0u64; m];
            let mut n = 0u64;
            for _ in 0..50 {
                let delta: Vec<u64> = (0..m).map(|_| rng.gen_range(0..3) as u64).collect();
                let before = objective_halves(&wins, n);
                if acceptable(&wins, n, &delta) {
                    for (w, d) in wins.iter_mut().zip(&delta) {
                        *w += d;
                    }
                    n += 1;
                    let after = objective_halves(&wins, n);
                    assert!(after <= before + 1e-12, "{after} > {before}");
                }
            }
        }
    }

    #[test]
    fn objective_bounded_by_half_per_scorer() {
        let pairs: Vec<(String, String)> =
            (0..7).map(|i| (format!("w{i}"), format!("n{i}"))).collect();
        let s1 = |s: &str| s.len() as f64;
        let s2 = |s: &str| if s.starts_with('w') { 1.0 } else { 2.0 };
        let obj = objective(&pairs, &[&s1 as &dyn Scorer, &s2 as &dyn Scorer]).unwrap();
        assert!((0.0..=1.0).contains(&obj));
    }

    #[test]
    fn fixed_scores_stay_deterministic_across_runs() {
        let map = [("w0", 1.0), ("n0", 2.0), ("w1", 3.0), ("n1", 0.5)];
        let scorer = fixed_scorer(&map);
        let pairs = vec![
            ("w0".to_string(), "n0".to_string()),
            ("w1".to_string(), "n1".to_string()),
        ];
        let a = objective(&pairs, &[&scorer as &dyn Scorer]).unwrap();
        assert_eq!(a, 0.0);
    }
}
