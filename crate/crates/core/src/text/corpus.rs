//! Corpus records: symbol sequences with out-of-band word boundaries.
//!
//! A boundary at position `k` separates symbol `k-1` from symbol `k`; valid
//! positions are strictly interior (`1..len`). Boundaries read from a corpus
//! file are kept even after [`Corpus::strip_boundaries`], which only hides
//! them from models so that evaluation can still reach the gold segmentation.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::text::alphabet::{Alphabet, AlphabetKind, SymbolId};

/// One sentence: a symbol sequence plus its known word boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    symbols: Vec<SymbolId>,
    boundaries: Vec<usize>,
}

impl Sentence {
    /// Build a sentence, validating that boundaries are strictly interior,
    /// sorted and duplicate-free.
    pub fn new(symbols: Vec<SymbolId>, boundaries: Vec<usize>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Domain("empty sentence".into()));
        }
        for (i, &b) in boundaries.iter().enumerate() {
            if b == 0 || b >= symbols.len() {
                return Err(Error::Domain(format!(
                    "boundary {b} not interior to sentence of length {}",
                    symbols.len()
                )));
            }
            if i > 0 && boundaries[i - 1] >= b {
                return Err(Error::Domain(
                    "boundaries must be sorted and duplicate-free".into(),
                ));
            }
        }
        Ok(Sentence {
            symbols,
            boundaries,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[SymbolId] {
        &self.symbols
    }

    /// Gold (or predicted) boundary positions, regardless of visibility.
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// Word spans `(start, end)` induced by the boundaries.
    pub fn spans(&self) -> Vec<(usize, usize)> {
        spans_of(&self.boundaries, self.symbols.len())
    }
}

/// Word spans induced by a boundary set over a sequence of `len` symbols.
pub fn spans_of(boundaries: &[usize], len: usize) -> Vec<(usize, usize)> {
    let mut spans = Vec::with_capacity(boundaries.len() + 1);
    let mut start = 0;
    for &b in boundaries {
        spans.push((start, b));
        start = b;
    }
    spans.push((start, len));
    spans
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusMeta {
    pub source: Option<PathBuf>,
    pub symbol_count: u64,
    pub sentence_count: u64,
}

/// A loaded corpus: sentences over one alphabet.
///
/// `boundaries_visible` controls whether models may consult word boundaries;
/// evaluation always can.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    alphabet: Alphabet,
    sentences: Vec<Sentence>,
    meta: CorpusMeta,
    boundaries_visible: bool,
}

impl Corpus {
    pub fn from_sentences(alphabet: Alphabet, sentences: Vec<Sentence>) -> Result<Self> {
        let mut symbol_count = 0u64;
        for s in &sentences {
            for &id in s.symbols() {
                if id.index() >= alphabet.len() {
                    return Err(Error::Domain(format!(
                        "symbol id {} out of range for alphabet of size {}",
                        id.0,
                        alphabet.len()
                    )));
                }
            }
            symbol_count += s.len() as u64;
        }
        let meta = CorpusMeta {
            source: None,
            symbol_count,
            sentence_count: sentences.len() as u64,
        };
        Ok(Corpus {
            alphabet,
            sentences,
            meta,
            boundaries_visible: true,
        })
    }

    /// Load a corpus file: UTF-8, one sentence per line.
    ///
    /// Character corpora treat each character as a symbol and the boundary
    /// marker (default a single space) as a word boundary. Phoneme corpora
    /// are space-separated label sequences with a dedicated marker token
    /// (default `|`) between words.
    pub fn load(path: impl AsRef<Path>, kind: AlphabetKind, marker: Option<&str>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut corpus = Self::parse_str(&text, kind, marker, &path.display().to_string())?;
        corpus.meta.source = Some(path.to_path_buf());
        Ok(corpus)
    }

    /// Parse corpus text. `source` is only used in error messages.
    pub fn parse_str(
        text: &str,
        kind: AlphabetKind,
        marker: Option<&str>,
        source: &str,
    ) -> Result<Self> {
        let marker = default_marker(kind, marker)?;
        let mut alphabet = Alphabet::new(kind);
        let mut sentences = Vec::new();
        let mut symbol_count = 0u64;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            let lineno = lineno + 1;
            let words = split_words(line, kind, &marker)
                .map_err(|msg| Error::parse(source, lineno, msg))?;
            let mut symbols = Vec::new();
            let mut boundaries = Vec::new();
            for (wi, word) in words.iter().enumerate() {
                if wi > 0 {
                    boundaries.push(symbols.len());
                }
                for surface in word {
                    let id = alphabet
                        .intern(surface)
                        .map_err(|e| Error::parse(source, lineno, e.to_string()))?;
                    symbols.push(id);
                }
            }
            symbol_count += symbols.len() as u64;
            let sentence = Sentence::new(symbols, boundaries)
                .map_err(|e| Error::parse(source, lineno, e.to_string()))?;
            sentences.push(sentence);
        }

        let meta = CorpusMeta {
            source: None,
            symbol_count,
            sentence_count: sentences.len() as u64,
        };
        Ok(Corpus {
            alphabet,
            sentences,
            meta,
            boundaries_visible: true,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn kind(&self) -> AlphabetKind {
        self.alphabet.kind()
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn meta(&self) -> &CorpusMeta {
        &self.meta
    }

    pub fn boundaries_visible(&self) -> bool {
        self.boundaries_visible
    }

    /// Boundaries of sentence `i` as models may see them: `None` once the
    /// corpus has been stripped.
    pub fn visible_boundaries(&self, i: usize) -> Option<&[usize]> {
        if self.boundaries_visible {
            Some(self.sentences[i].boundaries())
        } else {
            None
        }
    }

    /// Hide word boundaries from models. Symbol streams are unchanged and the
    /// boundaries stay available for evaluation. Idempotent.
    pub fn strip_boundaries(&self) -> Corpus {
        let mut c = self.clone();
        c.boundaries_visible = false;
        c
    }

    /// Re-attach the preserved boundaries (inverse of `strip_boundaries`).
    pub fn restore_boundaries(&self) -> Corpus {
        let mut c = self.clone();
        c.boundaries_visible = true;
        c
    }

    /// Replace every sentence's boundaries (e.g. with predicted ones).
    pub fn with_boundaries(&self, per_sentence: Vec<Vec<usize>>) -> Result<Corpus> {
        if per_sentence.len() != self.sentences.len() {
            return Err(Error::Precondition(format!(
                "boundary sets for {} sentences, corpus has {}",
                per_sentence.len(),
                self.sentences.len()
            )));
        }
        let sentences = self
            .sentences
            .iter()
            .zip(per_sentence)
            .map(|(s, b)| Sentence::new(s.symbols().to_vec(), b))
            .collect::<Result<Vec<_>>>()?;
        let mut c = Corpus {
            alphabet: self.alphabet.clone(),
            sentences,
            meta: self.meta.clone(),
            boundaries_visible: true,
        };
        c.meta.source = None;
        Ok(c)
    }

    /// Render the corpus back to its file format. Boundaries are written only
    /// when visible, using `marker` (defaults per kind).
    pub fn render(&self, marker: Option<&str>) -> Result<String> {
        let marker = default_marker(self.kind(), marker)?;
        let mut out = String::new();
        for sentence in &self.sentences {
            let spans = if self.boundaries_visible {
                sentence.spans()
            } else {
                vec![(0, sentence.len())]
            };
            let words: Vec<String> = spans
                .iter()
                .map(|&(a, b)| self.alphabet.render(&sentence.symbols()[a..b]))
                .collect();
            let line = match self.kind() {
                AlphabetKind::Character => words.join(&marker),
                AlphabetKind::Phoneme => words.join(&format!(" {marker} ")),
            };
            out.push_str(&line);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write(&self, path: impl AsRef<Path>, marker: Option<&str>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.render(marker)?).map_err(|e| Error::io(path, e))
    }
}

/// Render one sentence with its boundaries as corpus-file text.
pub fn render_sentence(
    alphabet: &Alphabet,
    sentence: &Sentence,
    marker: Option<&str>,
) -> Result<String> {
    let marker = default_marker(alphabet.kind(), marker)?;
    let words: Vec<String> = sentence
        .spans()
        .into_iter()
        .map(|(a, b)| alphabet.render(&sentence.symbols()[a..b]))
        .collect();
    Ok(match alphabet.kind() {
        AlphabetKind::Character => words.join(&marker),
        AlphabetKind::Phoneme => words.join(&format!(" {marker} ")),
    })
}

fn default_marker(kind: AlphabetKind, marker: Option<&str>) -> Result<String> {
    let m = match marker {
        Some(m) => m.to_string(),
        None => match kind {
            AlphabetKind::Character => " ".to_string(),
            AlphabetKind::Phoneme => "|".to_string(),
        },
    };
    if m.is_empty() {
        return Err(Error::Config("boundary marker must be non-empty".into()));
    }
    if kind == AlphabetKind::Character && m.chars().count() != 1 {
        return Err(Error::Config(
            "character corpora need a single-character boundary marker".into(),
        ));
    }
    Ok(m)
}

/// Split one line into words of symbol surfaces.
fn split_words(
    line: &str,
    kind: AlphabetKind,
    marker: &str,
) -> std::result::Result<Vec<Vec<String>>, String> {
    let tokens: Vec<String> = match kind {
        AlphabetKind::Character => line.chars().map(|c| c.to_string()).collect(),
        AlphabetKind::Phoneme => line.split(' ').map(|s| s.to_string()).collect(),
    };
    let mut words = vec![Vec::new()];
    for token in tokens {
        if token == marker {
            match words.last() {
                Some(w) if w.is_empty() => {
                    return Err("boundary marker at sentence edge or doubled".into())
                }
                _ => words.push(Vec::new()),
            }
        } else if token.is_empty() {
            return Err("empty token".into());
        } else {
            words.last_mut().expect("non-empty words").push(token);
        }
    }
    match words.last() {
        Some(w) if w.is_empty() => Err(if words.len() == 1 {
            "empty sentence".into()
        } else {
            "boundary marker at sentence edge or doubled".into()
        }),
        _ => Ok(words),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_line_maps_space_to_boundary() {
        let c = Corpus::parse_str("the dog\n", AlphabetKind::Character, None, "t").unwrap();
        let s = &c.sentences()[0];
        assert_eq!(s.len(), 6);
        assert_eq!(s.boundaries(), &[3]);
        assert_eq!(c.alphabet().render(s.symbols()), "thedog");
    }

    #[test]
    fn phone_line_maps_marker_to_boundary() {
        let c = Corpus::parse_str("DH AH0 | D AO1 G\n", AlphabetKind::Phoneme, None, "t").unwrap();
        let s = &c.sentences()[0];
        assert_eq!(s.len(), 5);
        assert_eq!(s.boundaries(), &[2]);
    }

    #[test]
    fn malformed_lines_report_line_number() {
        for bad in ["a  b", " ab", "ab ", ""] {
            let text = format!("ok\n{bad}\n");
            let err = Corpus::parse_str(&text, AlphabetKind::Character, None, "t").unwrap_err();
            match err {
                Error::Parse { line, .. } => assert_eq!(line, 2, "input {bad:?}"),
                other => panic!("unexpected error {other:?}"),
            }
        }
        let err = Corpus::parse_str("A | | B\n", AlphabetKind::Phoneme, None, "t").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn strip_preserves_gold_and_is_idempotent() {
        let c = Corpus::parse_str("the dog\n", AlphabetKind::Character, None, "t").unwrap();
        let stripped = c.strip_boundaries();
        assert!(stripped.visible_boundaries(0).is_none());
        assert_eq!(stripped.sentences()[0].boundaries(), &[3]);
        assert_eq!(
            stripped.sentences()[0].symbols(),
            c.sentences()[0].symbols()
        );
        let twice = stripped.strip_boundaries();
        assert_eq!(stripped, twice);
    }

    #[test]
    fn strip_then_restore_round_trips_bit_exact() {
        let text = "the dog\na cat sat\n";
        let c = Corpus::parse_str(text, AlphabetKind::Character, None, "t").unwrap();
        let restored = c.strip_boundaries().restore_boundaries();
        assert_eq!(restored.render(None).unwrap(), text);
        assert_eq!(c.render(None).unwrap(), text);
    }

    #[test]
    fn phone_render_round_trips() {
        let text = "DH AH0 | D AO1 G\nK AE1 T\n";
        let c = Corpus::parse_str(text, AlphabetKind::Phoneme, None, "t").unwrap();
        assert_eq!(c.render(None).unwrap(), text);
    }

    #[test]
    fn meta_counts_match_contents() {
        let c = Corpus::parse_str("ab c\nd\n", AlphabetKind::Character, None, "t").unwrap();
        assert_eq!(c.meta().sentence_count, 2);
        assert_eq!(c.meta().symbol_count, 4);
    }
}
