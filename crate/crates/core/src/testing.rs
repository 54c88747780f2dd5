//! Brute-force oracles and fixture generators used by the test suites.
//!
//! Everything here recomputes results by exhaustive or first-principles
//! routes and must stay independent of the production implementations it
//! cross-checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::segment::{Parse, UnigramModel};
use crate::text::Sentence;

/// All `2^(len-1)` segmentations of a sentence scored span by span, sorted by
/// cost then boundary order. Exhaustive counterpart of the lattice search;
/// only usable for short sentences.
pub fn enumerate_parses(
    sentence: &Sentence,
    model: &UnigramModel,
    max_token_len: usize,
) -> Result<Vec<Parse>> {
    let symbols = sentence.symbols();
    let n = symbols.len();
    if n == 0 {
        return Err(Error::Precondition("empty sentence".into()));
    }
    let mut out = Vec::new();
    let masks = 1u64 << (n - 1);
    'mask: for mask in 0..masks {
        let mut boundaries = Vec::new();
        for b in 1..n {
            if mask & (1 << (b - 1)) != 0 {
                boundaries.push(b);
            }
        }
        let mut cost = 0.0;
        let mut start = 0;
        for &b in boundaries.iter().chain(std::iter::once(&n)) {
            if b - start > max_token_len {
                continue 'mask;
            }
            cost += model.token_neg_log_prob(&symbols[start..b])?;
            start = b;
        }
        out.push(Parse {
            boundaries,
            neg_log_prob: cost,
        });
    }
    out.sort_by(|a, b| {
        a.neg_log_prob
            .total_cmp(&b.neg_log_prob)
            .then_with(|| a.boundaries.cmp(&b.boundaries))
    });
    Ok(out)
}

/// Token and boundary (tp, fp, fn) counts via explicit span-set intersection.
pub fn brute_force_seg_counts(
    gold: &[usize],
    predicted: &[usize],
    len: usize,
) -> ((u64, u64, u64), (u64, u64, u64)) {
    use std::collections::HashSet;

    let spans = |bounds: &[usize]| -> HashSet<(usize, usize)> {
        let mut set = HashSet::new();
        let mut start = 0;
        for &b in bounds {
            set.insert((start, b));
            start = b;
        }
        set.insert((start, len));
        set
    };
    let g_spans = spans(gold);
    let p_spans = spans(predicted);
    let token_tp = g_spans.intersection(&p_spans).count() as u64;
    let token = (
        token_tp,
        p_spans.len() as u64 - token_tp,
        g_spans.len() as u64 - token_tp,
    );

    let g_set: HashSet<usize> = gold.iter().copied().collect();
    let p_set: HashSet<usize> = predicted.iter().copied().collect();
    let boundary_tp = g_set.intersection(&p_set).count() as u64;
    let boundary = (
        boundary_tp,
        p_set.len() as u64 - boundary_tp,
        g_set.len() as u64 - boundary_tp,
    );
    (token, boundary)
}

/// Spearman's rho by first-principles average ranks (quadratic counting) and
/// a direct Pearson formula.
pub fn brute_force_spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let rank = |vals: &[f64]| -> Vec<f64> {
        vals.iter()
            .map(|&v| {
                let less = vals.iter().filter(|&&w| w < v).count() as f64;
                let equal = vals.iter().filter(|&&w| w == v).count() as f64;
                less + (equal - 1.0) / 2.0 + 1.0
            })
            .collect()
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for i in 0..xs.len() {
        cov += (rx[i] - mx) * (ry[i] - my);
        vx += (rx[i] - mx).powi(2);
        vy += (ry[i] - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

/// A synthetic word-concatenation corpus with known gold boundaries.
pub struct SyntheticCorpus {
    /// Corpus file contents, words separated by single spaces.
    pub text: String,
    /// The word inventory the sentences were drawn from.
    pub words: Vec<String>,
}

/// Generate `n_sentences` sentences of `words_per_sentence` words drawn
/// uniformly from a random lexicon of `n_words` types (lengths in
/// `word_lens`, symbols from `alphabet`).
pub fn synthetic_word_corpus(
    seed: u64,
    n_sentences: usize,
    words_per_sentence: std::ops::RangeInclusive<usize>,
    n_words: usize,
    word_lens: std::ops::RangeInclusive<usize>,
    alphabet: &[char],
) -> SyntheticCorpus {
    let mut rng = stream_rng(seed, 0x5e9, 0);
    let mut words = Vec::with_capacity(n_words);
    let mut seen = std::collections::HashSet::new();
    while words.len() < n_words {
        let len = rng.gen_range(*word_lens.start()..=*word_lens.end());
        let w: String = (0..len)
            .map(|_| *alphabet.choose(&mut rng).expect("non-empty alphabet"))
            .collect();
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }
    let mut text = String::new();
    for _ in 0..n_sentences {
        let k = rng.gen_range(*words_per_sentence.start()..=*words_per_sentence.end());
        let sentence: Vec<&str> = (0..k)
            .map(|_| words.choose(&mut rng).expect("non-empty lexicon").as_str())
            .collect();
        text.push_str(&sentence.join(" "));
        text.push('\n');
    }
    SyntheticCorpus { text, words }
}
