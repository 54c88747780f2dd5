//! Corpus ingestion, alphabets, boundary handling, and tokenization modes.

mod alphabet;
mod corpus;
mod lexicon;
mod tokenize;

pub use alphabet::{Alphabet, AlphabetKind, Symbol, SymbolId, EOS, RESERVED, SPACE, UNK};
pub use corpus::{render_sentence, spans_of, Corpus, CorpusMeta, Sentence};
pub use lexicon::{build_word_lexicon, WordLexicon};
pub use tokenize::{TokenizationMode, Tokenizer, UnitId, UnitKind, UnitVocab};
