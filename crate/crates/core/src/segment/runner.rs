//! The DP-Parse iteration loop.
//!
//! Each iteration freezes the lexicon, parses every sentence independently
//! (sampling uniformly among its N best parses), then rebuilds the lexicon
//! from the sampled tokens. Iterations stop once the corpus NLL no longer
//! improves on the best seen, or at `max_iters`; the best-NLL segmentation is
//! returned.
//!
//! Every sentence draws from an RNG stream keyed by `(seed, iteration,
//! sentence index)`, so results do not depend on thread scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::segment::config::{DpParseConfig, SymbolPrior};
use crate::segment::lattice::{nbest_parses, sample_parse, Parse};
use crate::segment::model::{init_lexicon, SymbolDistribution, TokenLexicon, UnigramModel};
use crate::text::{Alphabet, Corpus, Sentence};

/// One iteration's record: NLL of the sampled segmentation under the frozen
/// model, plus the size of the lexicon rebuilt from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub corpus_nll: f64,
    pub lexicon_size: usize,
    pub token_count: u64,
}

/// Outcome of a full run.
///
/// `corpus` carries the sampled segmentation of the best-NLL iteration;
/// `model` is the lexicon populated by the final iteration, i.e. the trained
/// model one decodes with afterwards (see [`segment_with_model`]).
#[derive(Debug, Clone)]
pub struct SegmentationResult {
    pub corpus: Corpus,
    pub stats: Vec<IterationStats>,
    pub best_iteration: usize,
    pub model: UnigramModel,
}

/// Run DP-Parse to convergence on `corpus` (boundaries, if any, are ignored).
pub fn run(corpus: &Corpus, config: &DpParseConfig) -> Result<SegmentationResult> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::Precondition("empty corpus".into()));
    }
    let dist = match config.symbol_prior {
        SymbolPrior::Empirical => SymbolDistribution::empirical(corpus)?,
        SymbolPrior::Uniform => SymbolDistribution::uniform(corpus.alphabet().len())?,
    };
    let mut lexicon = init_lexicon(corpus, config.init_max_len)?;

    let mut stats = Vec::new();
    let mut best_nll = f64::INFINITY;
    let mut best_iteration = 0usize;
    let mut best_state = None;
    let mut stalled = 0usize;
    for iteration in 1..=config.max_iters {
        let model = UnigramModel {
            lexicon,
            dist: dist.clone(),
            concentration: config.concentration,
            word_end_prob: config.word_end_prob,
        };
        let parses: Vec<Parse> = corpus
            .sentences()
            .par_iter()
            .enumerate()
            .map(|(idx, sentence)| {
                let nbest = nbest_parses(sentence, &model, config)?;
                let mut rng = stream_rng(config.seed, iteration as u64, idx as u64);
                sample_parse(&nbest, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;

        let corpus_nll: f64 = parses.iter().map(|p| p.neg_log_prob).sum();
        let rebuilt = rebuild_lexicon(corpus, &parses);
        stats.push(IterationStats {
            iteration,
            corpus_nll,
            lexicon_size: rebuilt.len(),
            token_count: rebuilt.total(),
        });

        let improved = corpus_nll < best_nll - config.min_nll_improvement;
        if improved {
            best_nll = corpus_nll;
            best_iteration = iteration;
            best_state = Some(parses);
            stalled = 0;
        } else {
            // grace of one stalled iteration; a second in a row stops
            stalled += 1;
        }
        lexicon = rebuilt;
        if stalled >= 2 {
            break;
        }
    }

    let best_parses = best_state.expect("first iteration always improves");
    let segmented =
        corpus.with_boundaries(best_parses.into_iter().map(|p| p.boundaries).collect())?;
    Ok(SegmentationResult {
        corpus: segmented,
        stats,
        best_iteration,
        model: UnigramModel {
            lexicon,
            dist,
            concentration: config.concentration,
            word_end_prob: config.word_end_prob,
        },
    })
}

fn rebuild_lexicon(corpus: &Corpus, parses: &[Parse]) -> TokenLexicon {
    let mut lexicon = TokenLexicon::new();
    for (sentence, parse) in corpus.sentences().iter().zip(parses) {
        let symbols = sentence.symbols();
        let mut start = 0;
        for &b in parse
            .boundaries
            .iter()
            .chain(std::iter::once(&symbols.len()))
        {
            lexicon.add(&symbols[start..b], 1);
            start = b;
        }
    }
    lexicon
}

/// Parse each sentence with the frozen model (Viterbi, no sampling) and
/// return the corpus with the predicted boundaries attached.
pub fn segment_with_model(
    corpus: &Corpus,
    model: &UnigramModel,
    config: &DpParseConfig,
) -> Result<Corpus> {
    let viterbi = DpParseConfig {
        beam_width: 1,
        ..config.clone()
    };
    let boundaries = corpus
        .sentences()
        .par_iter()
        .map(|s| {
            nbest_parses(s, model, &viterbi).map(|mut parses| parses.swap_remove(0).boundaries)
        })
        .collect::<Result<Vec<_>>>()?;
    corpus.with_boundaries(boundaries)
}

/// Parse one line of raw text with a trained model: existing boundaries are
/// discarded and the Viterbi segmentation under the model is attached. The
/// text's symbols must belong to the training `alphabet`.
pub fn segment_text(
    text: &str,
    model: &UnigramModel,
    alphabet: &Alphabet,
    config: &DpParseConfig,
) -> Result<Sentence> {
    let parsed = Corpus::parse_str(text, alphabet.kind(), None, "<input>")?;
    if parsed.len() != 1 {
        return Err(Error::Precondition(format!(
            "expected one line of text, got {}",
            parsed.len()
        )));
    }
    let mut symbols = Vec::with_capacity(parsed.sentences()[0].len());
    for &id in parsed.sentences()[0].symbols() {
        let surface = parsed.alphabet().surface(id).expect("interned symbol");
        let mapped = alphabet.get(surface).ok_or_else(|| {
            Error::Domain(format!("symbol `{surface}` not in the training alphabet"))
        })?;
        symbols.push(mapped);
    }
    let sentence = Sentence::new(symbols, Vec::new())?;
    let viterbi = DpParseConfig {
        beam_width: 1,
        ..config.clone()
    };
    let parse = nbest_parses(&sentence, model, &viterbi)?
        .into_iter()
        .next()
        .expect("non-empty sentence yields a parse");
    Sentence::new(sentence.symbols().to_vec(), parse.boundaries)
}
