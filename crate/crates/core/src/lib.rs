//! DP-Parse unsupervised word segmentation and its evaluation harness.
//!
//! The crate covers the full pipeline for studying language models over
//! boundary-free character or phoneme corpora:
//!
//! - corpus ingestion with out-of-band word boundaries ([`text`])
//! - the DP-Parse segmentation algorithm: a Dirichlet-process unigram
//!   lexicon decoded by N-best lattice search ([`segment`])
//! - token/boundary segmentation scoring ([`metrics`])
//! - unigram/bigram baseline language models over any unit scheme
//!   ([`ngram`])
//! - BPE over character or phoneme units ([`bpe`])
//! - spot-the-word, acceptability and semantic-similarity benchmark runners
//!   ([`mod@bench`])
//! - the stochastic sampler that balances benchmark sets against baseline
//!   scorers ([`balance`])
//!
//! All randomized stages take explicit seeds and produce identical results
//! across runs and thread counts.

pub mod balance;
pub mod bench;
pub mod bpe;
pub mod error;
pub mod metrics;
pub mod ngram;
pub mod rng;
pub mod segment;
pub mod testing;
pub mod text;

pub use error::{Error, Result};
