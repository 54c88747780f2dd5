//! Frequency-ranked word lexicons with a size cap.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::corpus::Corpus;

/// Top-`cap` word types by corpus frequency. Ties break by first occurrence,
/// so two builds over the same corpus agree exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct WordLexicon {
    entries: Vec<(String, u64)>,
    index: HashMap<String, u32>,
    cap: usize,
    has_unk: bool,
}

impl WordLexicon {
    pub fn from_entries(entries: Vec<(String, u64)>, cap: usize, has_unk: bool) -> Result<Self> {
        if entries.len() > cap {
            return Err(Error::Domain(format!(
                "{} entries exceed cap {cap}",
                entries.len()
            )));
        }
        for w in entries.windows(2) {
            if w[0].1 < w[1].1 {
                return Err(Error::Domain(
                    "entries not sorted by descending count".into(),
                ));
            }
        }
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (s, _))| (s.clone(), i as u32))
            .collect();
        Ok(WordLexicon {
            entries,
            index,
            cap,
            has_unk,
        })
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn has_unk(&self) -> bool {
        self.has_unk
    }

    pub fn with_unk(mut self, has_unk: bool) -> Self {
        self.has_unk = has_unk;
        self
    }

    /// Rank of `word`, if in the lexicon.
    pub fn rank(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn surface(&self, rank: u32) -> Option<&str> {
        self.entries.get(rank as usize).map(|(s, _)| s.as_str())
    }

    /// TSV export: `surface<TAB>count`, rank order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (surface, count) in &self.entries {
            out.push_str(surface);
            out.push('\t');
            out.push_str(&count.to_string());
            out.push('\n');
        }
        out
    }

    pub fn write_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }
}

/// Count word types over a corpus with visible boundaries and keep the
/// `cap` most frequent.
pub fn build_word_lexicon(corpus: &Corpus, cap: usize) -> Result<WordLexicon> {
    if !corpus.boundaries_visible() {
        return Err(Error::Precondition(
            "word lexicon needs a corpus with visible boundaries".into(),
        ));
    }
    if cap == 0 {
        return Err(Error::Config("lexicon cap must be positive".into()));
    }
    // count -> (count, first occurrence order)
    let mut counts: HashMap<String, (u64, usize)> = HashMap::new();
    let mut next = 0usize;
    for sentence in corpus.sentences() {
        for (a, b) in sentence.spans() {
            let word = corpus.alphabet().render(&sentence.symbols()[a..b]);
            let entry = counts.entry(word).or_insert_with(|| {
                let slot = (0, next);
                next += 1;
                slot
            });
            entry.0 += 1;
        }
    }
    let mut ranked: Vec<(String, u64, usize)> = counts
        .into_iter()
        .map(|(w, (c, first))| (w, c, first))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    ranked.truncate(cap);
    let entries = ranked.into_iter().map(|(w, c, _)| (w, c)).collect();
    WordLexicon::from_entries(entries, cap, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::alphabet::AlphabetKind;

    fn corpus(text: &str) -> Corpus {
        Corpus::parse_str(text, AlphabetKind::Character, None, "test").unwrap()
    }

    #[test]
    fn top_cap_by_frequency() {
        let lex = build_word_lexicon(&corpus("a b\na c\na b\n"), 2).unwrap();
        assert_eq!(lex.entries(), &[("a".into(), 3), ("b".into(), 2)]);
    }

    #[test]
    fn cap_at_least_types_keeps_all() {
        let lex = build_word_lexicon(&corpus("a b\na c\na b\n"), 10).unwrap();
        assert_eq!(lex.len(), 3);
        assert_eq!(lex.entries()[2], ("c".into(), 1));
    }

    #[test]
    fn ties_break_by_first_occurrence() {
        let lex = build_word_lexicon(&corpus("z q\nq z\nm\n"), 3).unwrap();
        assert_eq!(
            lex.entries(),
            &[("z".into(), 2), ("q".into(), 2), ("m".into(), 1)]
        );
    }

    #[test]
    fn deterministic_across_builds() {
        let c = corpus("aa b cc\ncc aa\nb aa cc\n");
        let l1 = build_word_lexicon(&c, 2).unwrap();
        let l2 = build_word_lexicon(&c, 2).unwrap();
        assert_eq!(l1, l2);
    }

    #[test]
    fn stripped_corpus_is_rejected() {
        let c = corpus("a b\n").strip_boundaries();
        assert!(matches!(
            build_word_lexicon(&c, 2),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn tsv_round_trip_shape() {
        let lex = build_word_lexicon(&corpus("a b\na c\na b\n"), 2).unwrap();
        assert_eq!(lex.to_tsv(), "a\t3\nb\t2\n");
    }
}
