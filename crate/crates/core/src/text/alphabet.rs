//! Symbol alphabets for character- and phoneme-level corpora.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// End-of-sequence marker emitted around scored token streams.
pub const EOS: &str = "<EOS>";
/// Out-of-vocabulary marker for capped word inventories.
pub const UNK: &str = "<UNK>";
/// Word-boundary marker optionally kept in symbol-level unit streams.
pub const SPACE: &str = "<SPACE>";

/// Markers that may never appear as corpus symbols.
pub const RESERVED: [&str; 3] = [EOS, UNK, SPACE];

/// Index of a symbol in its [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// An atomic unit together with its id: one character, or one phoneme label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Symbol<'a> {
    pub id: SymbolId,
    pub surface: &'a str,
}

/// Whether symbols are single characters or phoneme labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphabetKind {
    Character,
    Phoneme,
}

impl AlphabetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AlphabetKind::Character => "char",
            AlphabetKind::Phoneme => "phone",
        }
    }
}

impl std::str::FromStr for AlphabetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "char" | "character" => Ok(AlphabetKind::Character),
            "phone" | "phoneme" => Ok(AlphabetKind::Phoneme),
            other => Err(Error::Config(format!("unknown corpus kind `{other}`"))),
        }
    }
}

/// Ordered inventory of unique symbol surfaces. Ids are assigned in insertion
/// order and never change; reserved markers are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    kind: AlphabetKind,
    surfaces: Vec<String>,
    index: HashMap<String, SymbolId>,
}

impl Alphabet {
    pub fn new(kind: AlphabetKind) -> Self {
        Alphabet {
            kind,
            surfaces: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn kind(&self) -> AlphabetKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    /// Id for `surface`, inserting it if new.
    pub fn intern(&mut self, surface: &str) -> Result<SymbolId> {
        if let Some(&id) = self.index.get(surface) {
            return Ok(id);
        }
        validate_surface(surface)?;
        let id = SymbolId(self.surfaces.len() as u32);
        self.surfaces.push(surface.to_string());
        self.index.insert(surface.to_string(), id);
        Ok(id)
    }

    pub fn get(&self, surface: &str) -> Option<SymbolId> {
        self.index.get(surface).copied()
    }

    pub fn symbol(&self, id: SymbolId) -> Option<Symbol<'_>> {
        self.surfaces.get(id.index()).map(|s| Symbol {
            id,
            surface: s.as_str(),
        })
    }

    pub fn surface(&self, id: SymbolId) -> Option<&str> {
        self.surfaces.get(id.index()).map(String::as_str)
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.surfaces.iter().map(String::as_str)
    }

    /// Render a symbol sequence as text: concatenated for characters,
    /// space-joined for phonemes.
    pub fn render(&self, symbols: &[SymbolId]) -> String {
        let parts: Vec<&str> = symbols
            .iter()
            .map(|&id| self.surface(id).unwrap_or("?"))
            .collect();
        match self.kind {
            AlphabetKind::Character => parts.concat(),
            AlphabetKind::Phoneme => parts.join(" "),
        }
    }

    /// Parse a rendered token (no boundaries) back into symbol ids.
    pub fn parse_token(&self, text: &str) -> Result<Vec<SymbolId>> {
        let mut out = Vec::new();
        match self.kind {
            AlphabetKind::Character => {
                for ch in text.chars() {
                    let mut buf = [0u8; 4];
                    let s = ch.encode_utf8(&mut buf);
                    out.push(
                        self.get(s).ok_or_else(|| {
                            Error::Domain(format!("symbol `{s}` not in alphabet"))
                        })?,
                    );
                }
            }
            AlphabetKind::Phoneme => {
                for label in text.split_whitespace() {
                    out.push(self.get(label).ok_or_else(|| {
                        Error::Domain(format!("symbol `{label}` not in alphabet"))
                    })?);
                }
            }
        }
        Ok(out)
    }
}

fn validate_surface(surface: &str) -> Result<()> {
    if surface.is_empty() {
        return Err(Error::Domain("empty symbol surface".into()));
    }
    if surface.chars().any(char::is_whitespace) {
        return Err(Error::Domain(format!(
            "symbol surface `{surface}` contains whitespace"
        )));
    }
    if RESERVED.contains(&surface) {
        return Err(Error::Domain(format!(
            "symbol surface `{surface}` is a reserved marker"
        )));
    }
    Ok(())
}
