//! DP-Parse configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-symbol probabilities used by the base distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolPrior {
    /// Unigram symbol frequencies of the training corpus.
    Empirical,
    /// Uniform over the alphabet.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpParseConfig {
    /// Concentration of the Chinese-restaurant process: larger values make
    /// novel tokens cheaper relative to reused ones.
    pub concentration: f64,
    /// Word-end probability of the base distribution; the implied token
    /// length prior is geometric.
    pub word_end_prob: f64,
    /// How many parses the lattice search keeps per position.
    pub beam_width: usize,
    /// Longest candidate token the lattice will consider.
    pub max_token_len: usize,
    /// Sentences shorter than this seed the initial lexicon.
    pub init_max_len: usize,
    pub max_iters: usize,
    /// Required drop of corpus NLL below the best seen so far; anything less
    /// stops the iteration.
    pub min_nll_improvement: f64,
    pub seed: u64,
    pub symbol_prior: SymbolPrior,
    /// Keep the *least* probable parses instead of the most probable ones.
    /// Off by default; exposed for comparison runs.
    pub invert_beam: bool,
}

impl Default for DpParseConfig {
    fn default() -> Self {
        DpParseConfig {
            concentration: 20.0,
            word_end_prob: 0.5,
            beam_width: 10,
            max_token_len: 20,
            init_max_len: 20,
            max_iters: 10,
            min_nll_improvement: 0.0,
            seed: 0,
            symbol_prior: SymbolPrior::Empirical,
            invert_beam: false,
        }
    }
}

impl DpParseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.word_end_prob > 0.0 && self.word_end_prob < 1.0) {
            return Err(Error::Config(format!(
                "word-end probability must lie in (0, 1), got {}",
                self.word_end_prob
            )));
        }
        if self.concentration.is_nan() || self.concentration <= 0.0 {
            return Err(Error::Config(format!(
                "concentration must be positive, got {}",
                self.concentration
            )));
        }
        if self.beam_width == 0 {
            return Err(Error::Config("beam width must be at least 1".into()));
        }
        if self.max_token_len == 0 {
            return Err(Error::Config("max token length must be at least 1".into()));
        }
        if self.init_max_len == 0 {
            return Err(Error::Config("init max length must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("at least one iteration is required".into()));
        }
        if self.min_nll_improvement < 0.0 {
            return Err(Error::Config(
                "minimum NLL improvement must be non-negative".into(),
            ));
        }
        Ok(())
    }
}
