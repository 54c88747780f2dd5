//! Tokenization modes mapping symbol streams to model units.
//!
//! Unit id layout is stable per mode: base units first (alphabet symbols,
//! lexicon words, or BPE units), then the reserved markers `<EOS>`, `<UNK>`,
//! `<SPACE>` in that order.

use std::collections::HashMap;

use crate::bpe::BpeModel;
use crate::error::{Error, Result};
use crate::text::alphabet::{Alphabet, AlphabetKind, SymbolId, EOS, SPACE, UNK};
use crate::text::corpus::{spans_of, Corpus, Sentence};
use crate::text::lexicon::WordLexicon;

/// What the base units are.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitKind {
    /// One unit per character symbol.
    Char,
    /// One unit per phoneme symbol.
    Phone,
    /// Whole words from a capped lexicon; OOVs become `<UNK>`.
    Word { cap: usize },
    /// Whole words from a capped lexicon; OOVs expand to their symbols.
    WordFallback { cap: usize },
    /// Words encoded independently by a BPE model.
    Bpe,
}

impl UnitKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            UnitKind::Char => "char",
            UnitKind::Phone => "phone",
            UnitKind::Word { .. } => "word",
            UnitKind::WordFallback { .. } => "word_fallback",
            UnitKind::Bpe => "bpe",
        }
    }

    pub fn needs_boundaries(&self) -> bool {
        !matches!(self, UnitKind::Char | UnitKind::Phone)
    }

    pub fn cap(&self) -> Option<usize> {
        match self {
            UnitKind::Word { cap } | UnitKind::WordFallback { cap } => Some(*cap),
            _ => None,
        }
    }
}

/// A tokenization mode: unit kind plus whether `<SPACE>` markers are kept at
/// word boundaries (symbol-level and BPE streams only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenizationMode {
    pub units: UnitKind,
    pub keep_space_marker: bool,
}

impl TokenizationMode {
    pub fn new(units: UnitKind) -> Self {
        TokenizationMode {
            units,
            keep_space_marker: false,
        }
    }

    pub fn with_space_marker(mut self, keep: bool) -> Self {
        self.keep_space_marker = keep;
        self
    }

    /// Symbol-level mode matching the corpus kind.
    pub fn symbols(kind: AlphabetKind) -> Self {
        match kind {
            AlphabetKind::Character => TokenizationMode::new(UnitKind::Char),
            AlphabetKind::Phoneme => TokenizationMode::new(UnitKind::Phone),
        }
    }
}

/// Index of a unit in a [`UnitVocab`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitId(pub u32);

impl UnitId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Unit inventory for one tokenization mode.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVocab {
    surfaces: Vec<String>,
    index: HashMap<String, UnitId>,
    base_len: usize,
    eos: UnitId,
    unk: UnitId,
    space: UnitId,
}

impl UnitVocab {
    fn build(base: Vec<String>) -> Self {
        let mut surfaces = Vec::with_capacity(base.len() + 3);
        let mut index = HashMap::new();
        for s in base {
            if !index.contains_key(&s) {
                index.insert(s.clone(), UnitId(surfaces.len() as u32));
                surfaces.push(s);
            }
        }
        let base_len = surfaces.len();
        let mut reserve = |marker: &str| {
            let id = UnitId(surfaces.len() as u32);
            index.insert(marker.to_string(), id);
            surfaces.push(marker.to_string());
            id
        };
        let eos = reserve(EOS);
        let unk = reserve(UNK);
        let space = reserve(SPACE);
        UnitVocab {
            surfaces,
            index,
            base_len,
            eos,
            unk,
            space,
        }
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    /// Number of units before the reserved markers.
    pub fn base_len(&self) -> usize {
        self.base_len
    }

    pub fn eos(&self) -> UnitId {
        self.eos
    }

    pub fn unk(&self) -> UnitId {
        self.unk
    }

    pub fn space(&self) -> UnitId {
        self.space
    }

    pub fn get(&self, surface: &str) -> Option<UnitId> {
        self.index.get(surface).copied()
    }

    pub fn surface(&self, id: UnitId) -> Option<&str> {
        self.surfaces.get(id.index()).map(String::as_str)
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.surfaces.iter().map(String::as_str)
    }
}

/// Maps sentences to unit id sequences under one mode.
pub struct Tokenizer<'a> {
    mode: TokenizationMode,
    alphabet: &'a Alphabet,
    lexicon: Option<&'a WordLexicon>,
    bpe: Option<&'a BpeModel>,
    vocab: UnitVocab,
    // symbol id -> unit id, for symbol-level and fallback emission
    symbol_units: Vec<UnitId>,
}

impl<'a> Tokenizer<'a> {
    pub fn new(
        mode: TokenizationMode,
        alphabet: &'a Alphabet,
        lexicon: Option<&'a WordLexicon>,
        bpe: Option<&'a BpeModel>,
    ) -> Result<Self> {
        match (mode.units, alphabet.kind()) {
            (UnitKind::Char, AlphabetKind::Phoneme) => {
                return Err(Error::Config(
                    "char units requested for a phoneme corpus".into(),
                ))
            }
            (UnitKind::Phone, AlphabetKind::Character) => {
                return Err(Error::Config(
                    "phone units requested for a character corpus".into(),
                ))
            }
            _ => {}
        }
        let alpha_surfaces: Vec<String> = alphabet.surfaces().map(str::to_string).collect();
        let (vocab, symbol_units) = match mode.units {
            UnitKind::Char | UnitKind::Phone => {
                let vocab = UnitVocab::build(alpha_surfaces);
                let units = (0..alphabet.len() as u32).map(UnitId).collect();
                (vocab, units)
            }
            UnitKind::Word { .. } => {
                let lexicon = lexicon
                    .ok_or_else(|| Error::Config("word tokenization needs a lexicon".into()))?;
                let base: Vec<String> = lexicon.entries().iter().map(|(w, _)| w.clone()).collect();
                (UnitVocab::build(base), Vec::new())
            }
            UnitKind::WordFallback { .. } => {
                let lexicon = lexicon.ok_or_else(|| {
                    Error::Config("word-fallback tokenization needs a lexicon".into())
                })?;
                let mut base: Vec<String> =
                    lexicon.entries().iter().map(|(w, _)| w.clone()).collect();
                base.extend(alpha_surfaces.iter().cloned());
                let vocab = UnitVocab::build(base);
                let units = alpha_surfaces
                    .iter()
                    .map(|s| vocab.get(s).expect("alphabet surface interned"))
                    .collect();
                (vocab, units)
            }
            UnitKind::Bpe => {
                let bpe = bpe.ok_or_else(|| {
                    Error::Config("BPE tokenization needs a learned model".into())
                })?;
                if bpe.kind() != alphabet.kind() {
                    return Err(Error::Config(format!(
                        "BPE model is {} but corpus is {}",
                        bpe.kind().as_str(),
                        alphabet.kind().as_str()
                    )));
                }
                let same_base =
                    bpe.base_len() == alphabet.len() && bpe.base_surfaces().eq(alphabet.surfaces());
                if !same_base {
                    return Err(Error::Config(
                        "BPE model base alphabet does not match the corpus alphabet".into(),
                    ));
                }
                let base: Vec<String> = bpe.unit_surfaces().map(str::to_string).collect();
                (UnitVocab::build(base), Vec::new())
            }
        };
        Ok(Tokenizer {
            mode,
            alphabet,
            lexicon,
            bpe,
            vocab,
            symbol_units,
        })
    }

    pub fn mode(&self) -> TokenizationMode {
        self.mode
    }

    pub fn vocab(&self) -> &UnitVocab {
        &self.vocab
    }

    /// Tokenize one sentence. `boundaries` are the model-visible word
    /// boundaries (`None` once stripped); word-level modes require them.
    pub fn tokenize(
        &self,
        sentence: &Sentence,
        boundaries: Option<&[usize]>,
    ) -> Result<Vec<UnitId>> {
        if self.mode.units.needs_boundaries() && boundaries.is_none() {
            return Err(Error::Precondition(format!(
                "{} tokenization needs word boundaries",
                self.mode.units.as_str()
            )));
        }
        let symbols = sentence.symbols();
        let spans = match boundaries {
            Some(b) => spans_of(b, symbols.len()),
            None => vec![(0, symbols.len())],
        };
        let mut out = Vec::with_capacity(symbols.len() + spans.len());
        for (wi, &(a, b)) in spans.iter().enumerate() {
            let emit_space = self.mode.keep_space_marker
                && wi > 0
                && matches!(
                    self.mode.units,
                    UnitKind::Char | UnitKind::Phone | UnitKind::Bpe
                );
            if emit_space {
                out.push(self.vocab.space());
            }
            match self.mode.units {
                UnitKind::Char | UnitKind::Phone => {
                    out.extend(symbols[a..b].iter().map(|s| self.symbol_units[s.index()]));
                }
                UnitKind::Word { .. } => {
                    let word = self.alphabet.render(&symbols[a..b]);
                    let lexicon = self.lexicon.expect("checked in new");
                    match lexicon.rank(&word) {
                        Some(rank) => out.push(UnitId(rank)),
                        None => out.push(self.vocab.unk()),
                    }
                }
                UnitKind::WordFallback { .. } => {
                    let word = self.alphabet.render(&symbols[a..b]);
                    let lexicon = self.lexicon.expect("checked in new");
                    match lexicon.rank(&word) {
                        Some(rank) => out.push(UnitId(rank)),
                        None => {
                            out.extend(symbols[a..b].iter().map(|s| self.symbol_units[s.index()]))
                        }
                    }
                }
                UnitKind::Bpe => {
                    let bpe = self.bpe.expect("checked in new");
                    let units = bpe.encode(&symbols[a..b])?;
                    out.extend(units.into_iter().map(|u| UnitId(u.0)));
                }
            }
        }
        Ok(out)
    }

    /// Tokenize every sentence using the corpus's visible boundaries.
    pub fn tokenize_corpus(&self, corpus: &Corpus) -> Result<Vec<Vec<UnitId>>> {
        corpus
            .sentences()
            .iter()
            .enumerate()
            .map(|(i, s)| self.tokenize(s, corpus.visible_boundaries(i)))
            .collect()
    }

    /// Expand a unit back to the symbols it stands for. Reserved markers have
    /// no expansion.
    pub fn expand_unit(&self, unit: UnitId) -> Result<Vec<SymbolId>> {
        if unit.index() >= self.vocab.base_len() {
            return Err(Error::Domain(format!(
                "unit `{}` has no symbol expansion",
                self.vocab.surface(unit).unwrap_or("?")
            )));
        }
        let surface = self.vocab.surface(unit).expect("base unit");
        self.alphabet.parse_token(surface)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::lexicon::build_word_lexicon;

    fn corpus(text: &str) -> Corpus {
        Corpus::parse_str(text, AlphabetKind::Character, None, "test").unwrap()
    }

    fn surfaces(tok: &Tokenizer<'_>, units: &[UnitId]) -> Vec<String> {
        units
            .iter()
            .map(|&u| tok.vocab().surface(u).unwrap().to_string())
            .collect()
    }

    #[test]
    fn char_units_with_space_marker() {
        let c = corpus("the dog\n");
        let mode = TokenizationMode::symbols(AlphabetKind::Character).with_space_marker(true);
        let tok = Tokenizer::new(mode, c.alphabet(), None, None).unwrap();
        let units = tok
            .tokenize(&c.sentences()[0], c.visible_boundaries(0))
            .unwrap();
        assert_eq!(
            surfaces(&tok, &units),
            vec!["t", "h", "e", "<SPACE>", "d", "o", "g"]
        );
    }

    #[test]
    fn char_units_without_marker_are_lossless() {
        let c = corpus("the dog\n");
        let mode = TokenizationMode::symbols(AlphabetKind::Character);
        let tok = Tokenizer::new(mode, c.alphabet(), None, None).unwrap();
        let units = tok
            .tokenize(&c.sentences()[0], c.visible_boundaries(0))
            .unwrap();
        assert_eq!(surfaces(&tok, &units).concat(), "thedog");
    }

    #[test]
    fn word_units_map_oov_to_unk() {
        let train = corpus("the dog\nthe cat\n");
        let lex = build_word_lexicon(&train, 20_000).unwrap();
        let c = corpus("the blicket\n");
        let mode = TokenizationMode::new(UnitKind::Word { cap: 20_000 });
        let tok = Tokenizer::new(mode, c.alphabet(), Some(&lex), None).unwrap();
        let units = tok
            .tokenize(&c.sentences()[0], c.visible_boundaries(0))
            .unwrap();
        assert_eq!(surfaces(&tok, &units), vec!["the", "<UNK>"]);
    }

    #[test]
    fn fallback_expands_oov_to_symbols() {
        let train = corpus("the dog\nthe cat\n");
        let lex = build_word_lexicon(&train, 20_000).unwrap().with_unk(false);
        let c = corpus("the blicket\n");
        let mode = TokenizationMode::new(UnitKind::WordFallback { cap: 20_000 });
        let tok = Tokenizer::new(mode, c.alphabet(), Some(&lex), None).unwrap();
        let units = tok
            .tokenize(&c.sentences()[0], c.visible_boundaries(0))
            .unwrap();
        assert_eq!(
            surfaces(&tok, &units),
            vec!["the", "b", "l", "i", "c", "k", "e", "t"]
        );
    }

    #[test]
    fn fallback_expansion_reproduces_symbol_stream() {
        let train = corpus("ab ba\nabc ab\n");
        let lex = build_word_lexicon(&train, 2).unwrap().with_unk(false);
        let mode = TokenizationMode::new(UnitKind::WordFallback { cap: 2 });
        let tok = Tokenizer::new(mode, train.alphabet(), Some(&lex), None).unwrap();
        for (i, s) in train.sentences().iter().enumerate() {
            let units = tok.tokenize(s, train.visible_boundaries(i)).unwrap();
            let mut expanded = Vec::new();
            for u in units {
                expanded.extend(tok.expand_unit(u).unwrap());
            }
            assert_eq!(expanded, s.symbols());
        }
    }

    #[test]
    fn word_mode_requires_boundaries() {
        let train = corpus("the dog\n");
        let lex = build_word_lexicon(&train, 10).unwrap();
        let stripped = train.strip_boundaries();
        let mode = TokenizationMode::new(UnitKind::Word { cap: 10 });
        let tok = Tokenizer::new(mode, stripped.alphabet(), Some(&lex), None).unwrap();
        let err = tok.tokenize(&stripped.sentences()[0], stripped.visible_boundaries(0));
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn missing_lexicon_is_config_error() {
        let c = corpus("the dog\n");
        let mode = TokenizationMode::new(UnitKind::Word { cap: 10 });
        assert!(matches!(
            Tokenizer::new(mode, c.alphabet(), None, None),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn reserved_ids_follow_base_units() {
        let c = corpus("ab\n");
        let mode = TokenizationMode::symbols(AlphabetKind::Character);
        let tok = Tokenizer::new(mode, c.alphabet(), None, None).unwrap();
        let n = c.alphabet().len() as u32;
        assert_eq!(tok.vocab().eos(), UnitId(n));
        assert_eq!(tok.vocab().unk(), UnitId(n + 1));
        assert_eq!(tok.vocab().space(), UnitId(n + 2));
    }

    #[test]
    fn bpe_units_encode_each_word() {
        let c = corpus("aaab ab\naaab ab\n");
        let model = crate::bpe::learn(&c, c.alphabet().len() + 2).unwrap();
        let mode = TokenizationMode::new(UnitKind::Bpe);
        let tok = Tokenizer::new(mode, c.alphabet(), None, Some(&model)).unwrap();
        let units = tok
            .tokenize(&c.sentences()[0], c.visible_boundaries(0))
            .unwrap();
        let rendered = surfaces(&tok, &units);
        assert_eq!(rendered.concat(), "aaabab");
    }

    #[test]
    fn bpe_stream_can_keep_boundary_markers() {
        let c = corpus("aaab ab\naaab ab\n");
        let model = crate::bpe::learn(&c, c.alphabet().len() + 2).unwrap();
        let mode = TokenizationMode::new(UnitKind::Bpe).with_space_marker(true);
        let tok = Tokenizer::new(mode, c.alphabet(), None, Some(&model)).unwrap();
        let units = tok
            .tokenize(&c.sentences()[0], c.visible_boundaries(0))
            .unwrap();
        let rendered = surfaces(&tok, &units);
        assert_eq!(rendered.iter().filter(|s| *s == "<SPACE>").count(), 1);
        let joined: String = rendered
            .iter()
            .filter(|s| *s != "<SPACE>")
            .cloned()
            .collect();
        assert_eq!(joined, "aaabab");
    }
}
