//! DP-Parse unsupervised word segmentation: a Dirichlet-process unigram
//! lexicon model decoded by N-best lattice search and iterated to
//! convergence.

mod config;
mod lattice;
mod model;
mod runner;

pub use config::{DpParseConfig, SymbolPrior};
pub use lattice::{nbest_parses, sample_parse, Parse};
pub use model::{
    base_log_prob, base_prob, init_lexicon, token_log_prob, token_prob, SymbolDistribution, Token,
    TokenLexicon, UnigramModel,
};
pub use runner::{run, segment_text, segment_with_model, IterationStats, SegmentationResult};
