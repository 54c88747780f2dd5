//! Benchmark runners: spot-the-word, acceptability, and semantic similarity,
//! over internal n-gram scorers or externally supplied scores/embeddings.

mod pairs;
mod simi;

pub use pairs::{
    load_pairs, load_scores, pair_accuracy, score_credit, MinimalPair, PairAccuracy, ScoreTable,
    Side,
};
pub use simi::{
    cosine, load_embeddings, load_similarity, parse_embeddings, parse_similarity, pool, psimi_eval,
    spearman, EmbeddingSet, PoolingFn, PsimiReport, SimilarityItem,
};
