//! The unigram lexicon model: token counts, base distribution, and the
//! Chinese-restaurant posterior over candidate tokens.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::text::{Corpus, SymbolId};

/// A candidate word token: a non-empty symbol sequence.
pub type Token = Box<[SymbolId]>;

/// Candidate word tokens with their counts. `total` is the number of tokens
/// segmented so far, i.e. the sum of all counts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TokenLexicon {
    counts: FxHashMap<Token, u64>,
    total: u64,
}

impl TokenLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, token: &[SymbolId], n: u64) {
        if n == 0 {
            return;
        }
        *self.counts.entry(token.into()).or_insert(0) += n;
        self.total += n;
    }

    pub fn count(&self, token: &[SymbolId]) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct token types.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[SymbolId], u64)> {
        self.counts.iter().map(|(t, &c)| (t.as_ref(), c))
    }
}

/// Seed the lexicon with every sentence shorter than `init_max_len`, with
/// multiplicity.
pub fn init_lexicon(corpus: &Corpus, init_max_len: usize) -> Result<TokenLexicon> {
    if corpus.is_empty() {
        return Err(Error::Precondition("empty corpus".into()));
    }
    let mut lexicon = TokenLexicon::new();
    for sentence in corpus.sentences() {
        if sentence.len() < init_max_len {
            lexicon.add(sentence.symbols(), 1);
        }
    }
    if lexicon.is_empty() {
        return Err(Error::Init(format!(
            "no sentence shorter than {init_max_len} symbols; cannot seed the lexicon"
        )));
    }
    Ok(lexicon)
}

/// Per-symbol probabilities of the base distribution. Symbols may be absent
/// (e.g. unseen under the empirical prior); using one is a domain error.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolDistribution {
    log_probs: Vec<Option<f64>>,
}

impl SymbolDistribution {
    /// Validates that present probabilities are strictly positive and sum to
    /// one within 1e-9.
    pub fn from_probs(probs: Vec<Option<f64>>) -> Result<Self> {
        let mut sum = 0.0;
        let mut any = false;
        for p in probs.iter().flatten() {
            if p.is_nan() || *p <= 0.0 {
                return Err(Error::Domain(format!(
                    "symbol probability must be strictly positive, got {p}"
                )));
            }
            sum += p;
            any = true;
        }
        if !any {
            return Err(Error::Domain("empty symbol distribution".into()));
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "symbol probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(SymbolDistribution {
            log_probs: probs.into_iter().map(|p| p.map(f64::ln)).collect(),
        })
    }

    /// Unigram symbol frequencies over the corpus.
    pub fn empirical(corpus: &Corpus) -> Result<Self> {
        let mut counts = vec![0u64; corpus.alphabet().len()];
        let mut total = 0u64;
        for sentence in corpus.sentences() {
            for &s in sentence.symbols() {
                counts[s.index()] += 1;
                total += 1;
            }
        }
        if total == 0 {
            return Err(Error::Precondition("empty corpus".into()));
        }
        let probs = counts
            .into_iter()
            .map(|c| {
                if c == 0 {
                    None
                } else {
                    Some(c as f64 / total as f64)
                }
            })
            .collect();
        SymbolDistribution::from_probs(probs)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain(
                "uniform distribution over zero symbols".into(),
            ));
        }
        SymbolDistribution::from_probs(vec![Some(1.0 / n as f64); n])
    }

    pub fn log_prob(&self, symbol: SymbolId) -> Result<f64> {
        self.log_probs
            .get(symbol.index())
            .copied()
            .flatten()
            .ok_or_else(|| Error::Domain(format!("symbol id {} not in distribution", symbol.0)))
    }
}

/// log(exp(a) + exp(b)) without overflow.
fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Log probability that a novel token is exactly this symbol sequence:
/// geometric length prior times the per-symbol probabilities.
pub fn base_log_prob(
    token: &[SymbolId],
    dist: &SymbolDistribution,
    word_end_prob: f64,
) -> Result<f64> {
    if token.is_empty() {
        return Err(Error::Precondition("empty token".into()));
    }
    let mut lp = word_end_prob.ln() + (token.len() - 1) as f64 * (1.0 - word_end_prob).ln();
    for &s in token {
        lp += dist.log_prob(s)?;
    }
    Ok(lp)
}

pub fn base_prob(token: &[SymbolId], dist: &SymbolDistribution, word_end_prob: f64) -> Result<f64> {
    base_log_prob(token, dist, word_end_prob).map(f64::exp)
}

/// Chinese-restaurant posterior for one token given the frozen lexicon:
/// `(n + a * P0) / (total + a)` with `n` the token's count.
pub fn token_log_prob(
    token: &[SymbolId],
    lexicon: &TokenLexicon,
    concentration: f64,
    dist: &SymbolDistribution,
    word_end_prob: f64,
) -> Result<f64> {
    let novel = concentration.ln() + base_log_prob(token, dist, word_end_prob)?;
    let n = lexicon.count(token);
    let numerator = if n == 0 {
        novel
    } else {
        log_add_exp((n as f64).ln(), novel)
    };
    Ok(numerator - (lexicon.total() as f64 + concentration).ln())
}

pub fn token_prob(
    token: &[SymbolId],
    lexicon: &TokenLexicon,
    concentration: f64,
    dist: &SymbolDistribution,
    word_end_prob: f64,
) -> Result<f64> {
    token_log_prob(token, lexicon, concentration, dist, word_end_prob).map(f64::exp)
}

/// A frozen scoring model: one iteration's lexicon plus the base
/// distribution's parameters.
#[derive(Debug, Clone)]
pub struct UnigramModel {
    pub lexicon: TokenLexicon,
    pub dist: SymbolDistribution,
    pub concentration: f64,
    pub word_end_prob: f64,
}

impl UnigramModel {
    pub fn token_neg_log_prob(&self, token: &[SymbolId]) -> Result<f64> {
        token_log_prob(
            token,
            &self.lexicon,
            self.concentration,
            &self.dist,
            self.word_end_prob,
        )
        .map(|lp| -lp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::AlphabetKind;

    fn sym(ids: &[u32]) -> Vec<SymbolId> {
        ids.iter().map(|&i| SymbolId(i)).collect()
    }

    #[test]
    fn init_keeps_short_sentences_with_multiplicity() {
        let long: String = ('a'..='y').collect();
        let text = format!("ab\nab\n{long}\n");
        let c = Corpus::parse_str(&text, AlphabetKind::Character, None, "t").unwrap();
        let lex = init_lexicon(&c, 20).unwrap();
        assert_eq!(lex.total(), 2);
        assert_eq!(lex.len(), 1);
        let ab = c.alphabet().parse_token("ab").unwrap();
        assert_eq!(lex.count(&ab), 2);
    }

    #[test]
    fn init_with_only_long_sentences_fails() {
        let long: String = ('a'..='y').collect();
        let c =
            Corpus::parse_str(&format!("{long}\n"), AlphabetKind::Character, None, "t").unwrap();
        assert!(matches!(init_lexicon(&c, 20), Err(Error::Init(_))));
    }

    #[test]
    fn init_single_symbol_sentence() {
        let c = Corpus::parse_str("a\n", AlphabetKind::Character, None, "t").unwrap();
        let lex = init_lexicon(&c, 20).unwrap();
        assert_eq!(lex.total(), 1);
        assert_eq!(lex.count(&sym(&[0])), 1);
    }

    #[test]
    fn base_prob_reduces_to_word_end_prob_for_single_symbol() {
        let dist = SymbolDistribution::from_probs(vec![Some(1.0)]).unwrap();
        let p = base_prob(&sym(&[0]), &dist, 0.5).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn base_prob_two_symbols() {
        // M=2, P(x1)=P(x2)=0.5, p=0.5 -> 0.5 * 0.5 * 0.25 = 0.0625
        let dist = SymbolDistribution::from_probs(vec![Some(0.5), Some(0.5)]).unwrap();
        let p = base_prob(&sym(&[0, 1]), &dist, 0.5).unwrap();
        assert!((p - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn base_prob_bounded_by_length_prior() {
        let dist = SymbolDistribution::from_probs(vec![Some(0.25), Some(0.75)]).unwrap();
        for token in [sym(&[0]), sym(&[0, 1]), sym(&[1, 1, 0])] {
            let p = base_prob(&token, &dist, 0.3).unwrap();
            let bound = 0.3 * 0.7f64.powi(token.len() as i32 - 1);
            assert!(p <= bound + 1e-12);
        }
    }

    #[test]
    fn token_prob_on_empty_lexicon_is_base_prob() {
        let dist = SymbolDistribution::from_probs(vec![Some(0.5), Some(0.5)]).unwrap();
        let lex = TokenLexicon::new();
        let t = sym(&[0, 1]);
        let tp = token_prob(&t, &lex, 3.0, &dist, 0.5).unwrap();
        let p0 = base_prob(&t, &dist, 0.5).unwrap();
        assert!((tp - p0).abs() < 1e-12);
    }

    #[test]
    fn token_prob_mixes_count_and_base() {
        // lexicon {ab: 2}, total 2, a0 = 1, P0(ab) = 0.0625 -> 2.0625 / 3
        let dist = SymbolDistribution::from_probs(vec![Some(0.5), Some(0.5)]).unwrap();
        let mut lex = TokenLexicon::new();
        let ab = sym(&[0, 1]);
        lex.add(&ab, 2);
        let tp = token_prob(&ab, &lex, 1.0, &dist, 0.5).unwrap();
        assert!((tp - 0.6875).abs() < 1e-12);
    }

    #[test]
    fn token_prob_monotone_in_count() {
        let dist = SymbolDistribution::from_probs(vec![Some(0.5), Some(0.5)]).unwrap();
        let ab = sym(&[0, 1]);
        let mut prev = 0.0;
        for n in 1..60 {
            let mut lex = TokenLexicon::new();
            lex.add(&ab, n);
            lex.add(&sym(&[0]), 5);
            let tp = token_prob(&ab, &lex, 2.0, &dist, 0.5).unwrap();
            assert!(tp > prev);
            prev = tp;
        }
    }

    #[test]
    fn token_prob_dominates_both_mixture_terms() {
        let dist = SymbolDistribution::from_probs(vec![Some(0.5), Some(0.5)]).unwrap();
        let mut lex = TokenLexicon::new();
        lex.add(&sym(&[0, 1]), 3);
        lex.add(&sym(&[1]), 2);
        let a0 = 2.5;
        for token in [sym(&[0, 1]), sym(&[1]), sym(&[0, 0, 1])] {
            let tp = token_prob(&token, &lex, a0, &dist, 0.5).unwrap();
            let p0 = base_prob(&token, &dist, 0.5).unwrap();
            let denom = lex.total() as f64 + a0;
            assert!(tp + 1e-12 >= a0 * p0 / denom);
            assert!(tp + 1e-12 >= lex.count(&token) as f64 / denom);
        }
    }

    #[test]
    fn missing_symbol_is_domain_error() {
        let dist = SymbolDistribution::from_probs(vec![Some(1.0), None]).unwrap();
        let err = base_log_prob(&sym(&[1]), &dist, 0.5);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn distribution_validation() {
        assert!(SymbolDistribution::from_probs(vec![Some(0.5), Some(0.4)]).is_err());
        assert!(SymbolDistribution::from_probs(vec![Some(0.0), Some(1.0)]).is_err());
        assert!(SymbolDistribution::uniform(4).is_ok());
    }
}
