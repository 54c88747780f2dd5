//! N-best lattice search over all segmentations of a sentence.
//!
//! Costs are additive negative log probabilities, so keeping the `beam_width`
//! cheapest prefix hypotheses at every position yields the exact N best
//! parses (any top-N parse's prefix is a top-N prefix at each boundary it
//! crosses). With `beam_width >= 2^(len-1)` the search enumerates every
//! segmentation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::segment::config::DpParseConfig;
use crate::segment::model::UnigramModel;
use crate::text::Sentence;

/// One segmentation of a sentence with its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Parse {
    pub boundaries: Vec<usize>,
    pub neg_log_prob: f64,
}

#[derive(Clone, Copy)]
struct Hyp {
    cost: f64,
    prev_pos: u32,
    prev_idx: u32,
}

/// Up to `beam_width` best parses, cheapest first (ties broken by boundary
/// order). With `invert_beam` the ranking is reversed end to end.
pub fn nbest_parses(
    sentence: &Sentence,
    model: &UnigramModel,
    config: &DpParseConfig,
) -> Result<Vec<Parse>> {
    let symbols = sentence.symbols();
    let n = symbols.len();
    if n == 0 {
        return Err(Error::Precondition("empty sentence".into()));
    }
    let beam = config.beam_width;
    let better = |a: f64, b: f64| {
        if config.invert_beam {
            b.total_cmp(&a)
        } else {
            a.total_cmp(&b)
        }
    };

    let mut hyps: Vec<Vec<Hyp>> = Vec::with_capacity(n + 1);
    hyps.push(vec![Hyp {
        cost: 0.0,
        prev_pos: 0,
        prev_idx: 0,
    }]);
    let mut candidates: Vec<Hyp> = Vec::new();
    for j in 1..=n {
        candidates.clear();
        let lo = j.saturating_sub(config.max_token_len);
        for i in lo..j {
            if hyps[i].is_empty() {
                continue;
            }
            let span_cost = model.token_neg_log_prob(&symbols[i..j])?;
            for (k, h) in hyps[i].iter().enumerate() {
                candidates.push(Hyp {
                    cost: h.cost + span_cost,
                    prev_pos: i as u32,
                    prev_idx: k as u32,
                });
            }
        }
        candidates.sort_by(|a, b| better(a.cost, b.cost));
        candidates.truncate(beam);
        hyps.push(candidates.clone());
    }

    let mut parses: Vec<Parse> = hyps[n].iter().map(|h| reconstruct(&hyps, h)).collect();
    parses.sort_by(|a, b| {
        better(a.neg_log_prob, b.neg_log_prob).then_with(|| a.boundaries.cmp(&b.boundaries))
    });
    Ok(parses)
}

fn reconstruct(hyps: &[Vec<Hyp>], last: &Hyp) -> Parse {
    let mut boundaries = Vec::new();
    let mut hyp = *last;
    loop {
        let pos = hyp.prev_pos as usize;
        if pos == 0 {
            break;
        }
        boundaries.push(pos);
        hyp = hyps[pos][hyp.prev_idx as usize];
    }
    boundaries.reverse();
    Parse {
        boundaries,
        neg_log_prob: last.cost,
    }
}

/// Draw one parse uniformly at random from the N-best list.
pub fn sample_parse<R: Rng>(nbest: &[Parse], rng: &mut R) -> Result<Parse> {
    if nbest.is_empty() {
        return Err(Error::Precondition("empty N-best list".into()));
    }
    Ok(nbest[rng.gen_range(0..nbest.len())].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::segment::model::{SymbolDistribution, TokenLexicon};
    use crate::testing::enumerate_parses;
    use crate::text::{AlphabetKind, Corpus};

    fn toy_model(corpus: &Corpus) -> UnigramModel {
        let mut lexicon = TokenLexicon::new();
        for s in corpus.sentences() {
            lexicon.add(s.symbols(), 1);
        }
        UnigramModel {
            lexicon,
            dist: SymbolDistribution::empirical(corpus).unwrap(),
            concentration: 2.0,
            word_end_prob: 0.4,
        }
    }

    fn config(beam: usize) -> DpParseConfig {
        DpParseConfig {
            beam_width: beam,
            ..DpParseConfig::default()
        }
    }

    #[test]
    fn single_symbol_sentence_has_one_parse() {
        let c = Corpus::parse_str("a\nab\n", AlphabetKind::Character, None, "t").unwrap();
        let model = toy_model(&c);
        let parses = nbest_parses(&c.sentences()[0], &model, &config(8)).unwrap();
        assert_eq!(parses.len(), 1);
        assert!(parses[0].boundaries.is_empty());
        let expected = model
            .token_neg_log_prob(c.sentences()[0].symbols())
            .unwrap();
        assert_eq!(parses[0].neg_log_prob, expected);
    }

    #[test]
    fn three_symbol_sentence_enumerates_four_parses() {
        let c = Corpus::parse_str("abc\nab\nbc\n", AlphabetKind::Character, None, "t").unwrap();
        let model = toy_model(&c);
        let parses = nbest_parses(&c.sentences()[0], &model, &config(8)).unwrap();
        assert_eq!(parses.len(), 4);
        let oracle = enumerate_parses(&c.sentences()[0], &model, 20).unwrap();
        for (p, o) in parses.iter().zip(&oracle) {
            assert_eq!(p.boundaries, o.boundaries);
            assert_eq!(p.neg_log_prob, o.neg_log_prob);
        }
    }

    #[test]
    fn beam_one_is_viterbi() {
        let c =
            Corpus::parse_str("abcab\nab\nab\ncab\n", AlphabetKind::Character, None, "t").unwrap();
        let model = toy_model(&c);
        for s in c.sentences() {
            let best = nbest_parses(s, &model, &config(1)).unwrap();
            let oracle = enumerate_parses(s, &model, 20).unwrap();
            assert_eq!(best.len(), 1);
            assert_eq!(best[0].boundaries, oracle[0].boundaries);
            assert!((best[0].neg_log_prob - oracle[0].neg_log_prob).abs() <= 1e-9);
        }
    }

    #[test]
    fn parses_partition_the_sentence() {
        let c = Corpus::parse_str("abcabc\nabc\n", AlphabetKind::Character, None, "t").unwrap();
        let model = toy_model(&c);
        let parses = nbest_parses(&c.sentences()[0], &model, &config(16)).unwrap();
        for p in &parses {
            for w in p.boundaries.windows(2) {
                assert!(w[0] < w[1]);
            }
            for &b in &p.boundaries {
                assert!(b > 0 && b < 6);
            }
        }
    }

    #[test]
    fn costs_respect_max_token_len() {
        let c = Corpus::parse_str("abcd\nab\n", AlphabetKind::Character, None, "t").unwrap();
        let model = toy_model(&c);
        let mut cfg = config(64);
        cfg.max_token_len = 2;
        let parses = nbest_parses(&c.sentences()[0], &model, &cfg).unwrap();
        let oracle = enumerate_parses(&c.sentences()[0], &model, 2).unwrap();
        assert_eq!(parses.len(), oracle.len());
        for p in &parses {
            let mut start = 0;
            for &b in p.boundaries.iter().chain(std::iter::once(&4)) {
                assert!(b - start <= 2);
                start = b;
            }
        }
    }

    #[test]
    fn inverted_beam_ranks_worst_first() {
        let c = Corpus::parse_str("abc\nab\n", AlphabetKind::Character, None, "t").unwrap();
        let model = toy_model(&c);
        let mut cfg = config(8);
        cfg.invert_beam = true;
        let inverted = nbest_parses(&c.sentences()[0], &model, &cfg).unwrap();
        let normal = nbest_parses(&c.sentences()[0], &model, &config(8)).unwrap();
        assert_eq!(inverted.len(), normal.len());
        assert_eq!(
            inverted.first().unwrap().neg_log_prob,
            normal.last().unwrap().neg_log_prob
        );
    }

    #[test]
    fn sample_parse_is_uniform_and_seeded() {
        let c = Corpus::parse_str("abc\nab\n", AlphabetKind::Character, None, "t").unwrap();
        let model = toy_model(&c);
        let parses = nbest_parses(&c.sentences()[0], &model, &config(4)).unwrap();
        assert_eq!(parses.len(), 4);

        let mut rng = stream_rng(11, 0, 0);
        let mut freq = [0u32; 4];
        let draws = 100_000;
        for _ in 0..draws {
            let p = sample_parse(&parses, &mut rng).unwrap();
            let idx = parses.iter().position(|q| q == &p).unwrap();
            freq[idx] += 1;
        }
        for f in freq {
            let rate = f as f64 / draws as f64;
            assert!((rate - 0.25).abs() < 0.01, "rate {rate}");
        }

        let seq1: Vec<Parse> = {
            let mut r = stream_rng(5, 1, 2);
            (0..32)
                .map(|_| sample_parse(&parses, &mut r).unwrap())
                .collect()
        };
        let seq2: Vec<Parse> = {
            let mut r = stream_rng(5, 1, 2);
            (0..32)
                .map(|_| sample_parse(&parses, &mut r).unwrap())
                .collect()
        };
        assert_eq!(seq1, seq2);
    }

    #[test]
    fn empty_nbest_list_is_an_error() {
        let mut rng = stream_rng(0, 0, 0);
        assert!(sample_parse(&[], &mut rng).is_err());
    }

    #[test]
    fn single_candidate_always_selected() {
        let p = Parse {
            boundaries: vec![2],
            neg_log_prob: 1.5,
        };
        let mut rng = stream_rng(0, 0, 0);
        assert_eq!(sample_parse(std::slice::from_ref(&p), &mut rng).unwrap(), p);
    }
}
