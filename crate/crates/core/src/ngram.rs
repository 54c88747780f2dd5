//! Unigram and bigram language models over any tokenization mode.
//!
//! Counting runs over EOS-wrapped streams: each sentence contributes the
//! emissions `u_1 .. u_n <EOS>`, with a leading `<EOS>` serving as bigram
//! context only. Add-k smoothing keeps every conditional proper; unknown
//! surfaces score as `<UNK>` (which holds real counts in capped word modes
//! and zero counts elsewhere, i.e. plain smoothed mass).

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::bpe::BpeModel;
use crate::error::{Error, Result};
use crate::text::{
    build_word_lexicon, AlphabetKind, Corpus, TokenizationMode, Tokenizer, UnitKind, EOS, SPACE,
    UNK,
};

const BIN_MAGIC: &[u8; 6] = b"DPNG\x00\x01";

/// Anything that maps a test string to a real-valued score.
pub trait Scorer: Sync {
    fn score(&self, text: &str) -> Result<f64>;
}

impl Scorer for NGramModel {
    fn score(&self, text: &str) -> Result<f64> {
        self.score_text(text)
    }
}

impl<F: Fn(&str) -> f64 + Sync> Scorer for F {
    fn score(&self, text: &str) -> Result<f64> {
        Ok(self(text))
    }
}

/// Add-k smoothing; `k = 0` keeps raw maximum-likelihood counts (unseen
/// events then score `-inf`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Smoothing {
    AddK(f64),
}

impl Smoothing {
    pub fn k(self) -> f64 {
        match self {
            Smoothing::AddK(k) => k,
        }
    }

    /// Defaults: 1.0 for symbol-level units, 0.1 for word-level and BPE
    /// inventories.
    pub fn default_for(units: UnitKind) -> Self {
        match units {
            UnitKind::Char | UnitKind::Phone => Smoothing::AddK(1.0),
            _ => Smoothing::AddK(0.1),
        }
    }

    fn validate(self) -> Result<()> {
        let k = self.k();
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::Config(format!(
                "smoothing k must be finite and non-negative, got {k}"
            )));
        }
        Ok(())
    }
}

/// A trained unigram or bigram model with its full unit vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: u8,
    kind: AlphabetKind,
    units: UnitKind,
    keep_space: bool,
    k: f64,
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    eos: u32,
    unk: u32,
    unigram: Vec<u64>,
    bigram: FxHashMap<(u32, u32), u64>,
    context: Vec<u64>,
    total: u64,
}

/// Train a model of the given order over the corpus tokenized under `mode`.
/// Word modes build their capped lexicon from this corpus; BPE mode needs the
/// learned `bpe` model.
pub fn train(
    corpus: &Corpus,
    order: u8,
    mode: TokenizationMode,
    smoothing: Smoothing,
    bpe: Option<&BpeModel>,
) -> Result<NGramModel> {
    if !(order == 1 || order == 2) {
        return Err(Error::Config(format!("order must be 1 or 2, got {order}")));
    }
    smoothing.validate()?;
    if corpus.is_empty() {
        return Err(Error::Precondition(
            "cannot train on an empty corpus".into(),
        ));
    }
    if mode.units.needs_boundaries() && !corpus.boundaries_visible() {
        return Err(Error::Config(format!(
            "{} units need a corpus with visible boundaries",
            mode.units.as_str()
        )));
    }
    let lexicon = match mode.units {
        UnitKind::Word { cap } => Some(build_word_lexicon(corpus, cap)?),
        UnitKind::WordFallback { cap } => Some(build_word_lexicon(corpus, cap)?.with_unk(false)),
        _ => None,
    };
    let tokenizer = Tokenizer::new(mode, corpus.alphabet(), lexicon.as_ref(), bpe)?;
    let streams = tokenizer.tokenize_corpus(corpus)?;

    let vocab: Vec<String> = tokenizer.vocab().surfaces().map(str::to_string).collect();
    let eos = tokenizer.vocab().eos().0;
    let v = vocab.len();

    struct Counts {
        unigram: Vec<u64>,
        bigram: FxHashMap<(u32, u32), u64>,
        total: u64,
    }
    let counts = streams
        .par_iter()
        .fold(
            || Counts {
                unigram: vec![0; v],
                bigram: FxHashMap::default(),
                total: 0,
            },
            |mut acc, units| {
                let mut prev = eos;
                for &u in units.iter() {
                    acc.unigram[u.index()] += 1;
                    if order == 2 {
                        *acc.bigram.entry((prev, u.0)).or_insert(0) += 1;
                    }
                    prev = u.0;
                }
                acc.unigram[eos as usize] += 1;
                if order == 2 {
                    *acc.bigram.entry((prev, eos)).or_insert(0) += 1;
                }
                acc.total += units.len() as u64 + 1;
                acc
            },
        )
        .reduce(
            || Counts {
                unigram: vec![0; v],
                bigram: FxHashMap::default(),
                total: 0,
            },
            |mut a, b| {
                for (x, y) in a.unigram.iter_mut().zip(b.unigram) {
                    *x += y;
                }
                for (pair, c) in b.bigram {
                    *a.bigram.entry(pair).or_insert(0) += c;
                }
                a.total += b.total;
                a
            },
        );

    let mut context = vec![0u64; v];
    for (&(c, _), &n) in &counts.bigram {
        context[c as usize] += n;
    }
    let index = vocab
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i as u32))
        .collect();
    let unk = tokenizer.vocab().unk().0;
    Ok(NGramModel {
        order,
        kind: corpus.kind(),
        units: mode.units,
        keep_space: mode.keep_space_marker,
        k: smoothing.k(),
        vocab,
        index,
        eos,
        unk,
        unigram: counts.unigram,
        bigram: counts.bigram,
        context,
        total: counts.total,
    })
}

impl NGramModel {
    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn kind(&self) -> AlphabetKind {
        self.kind
    }

    pub fn units(&self) -> UnitKind {
        self.units
    }

    pub fn keep_space(&self) -> bool {
        self.keep_space
    }

    pub fn smoothing_k(&self) -> f64 {
        self.k
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn vocab(&self) -> impl Iterator<Item = &str> {
        self.vocab.iter().map(String::as_str)
    }

    fn unit_id(&self, surface: &str) -> u32 {
        self.index.get(surface).copied().unwrap_or(self.unk)
    }

    /// Raw emission count of a unit.
    pub fn unigram_count(&self, surface: &str) -> u64 {
        self.unigram[self.unit_id(surface) as usize]
    }

    /// How often a unit served as bigram context.
    pub fn context_count(&self, surface: &str) -> u64 {
        self.context[self.unit_id(surface) as usize]
    }

    pub fn total_emissions(&self) -> u64 {
        self.total
    }

    /// Smoothed unigram probability of a unit surface.
    pub fn unigram_prob(&self, surface: &str) -> f64 {
        let c = self.unigram[self.unit_id(surface) as usize] as f64;
        let v = self.vocab.len() as f64;
        (c + self.k) / (self.total as f64 + self.k * v)
    }

    /// Smoothed conditional probability `P(emit | ctx)`.
    pub fn cond_prob(&self, ctx: &str, emit: &str) -> f64 {
        let c = self.unit_id(ctx);
        let e = self.unit_id(emit);
        let pair = self.bigram.get(&(c, e)).copied().unwrap_or(0) as f64;
        let v = self.vocab.len() as f64;
        (pair + self.k) / (self.context[c as usize] as f64 + self.k * v)
    }

    /// Chain-rule log probability of a unit sequence.
    ///
    /// The unigram model scores the given units; the bigram model scores the
    /// EOS-wrapped sequence (initial `<EOS>` as context, final `<EOS>` as an
    /// emission).
    pub fn log_prob<S: AsRef<str>>(&self, units: &[S]) -> Result<f64> {
        if units.is_empty() {
            return Err(Error::Precondition("cannot score an empty sequence".into()));
        }
        let ids: Vec<u32> = units.iter().map(|s| self.unit_id(s.as_ref())).collect();
        let v = self.vocab.len() as f64;
        let mut lp = 0.0;
        match self.order {
            1 => {
                let denom = (self.total as f64 + self.k * v).ln();
                for &u in &ids {
                    lp += (self.unigram[u as usize] as f64 + self.k).ln() - denom;
                }
            }
            _ => {
                let mut prev = self.eos;
                for &u in ids.iter().chain(std::iter::once(&self.eos)) {
                    let pair = self.bigram.get(&(prev, u)).copied().unwrap_or(0) as f64;
                    let denom = self.context[prev as usize] as f64 + self.k * v;
                    lp += (pair + self.k).ln() - denom.ln();
                    prev = u;
                }
            }
        }
        Ok(lp)
    }

    /// Score raw text by tokenizing it under the model's own mode. Boundary
    /// syntax follows the model's corpus kind (spaces for characters, the
    /// default `|` marker for phonemes).
    pub fn score_text(&self, text: &str) -> Result<f64> {
        self.score_text_with(text, None, None)
    }

    /// [`NGramModel::score_text`] with an explicit boundary marker and, for
    /// BPE-mode models, the BPE model to encode with.
    pub fn score_text_with(
        &self,
        text: &str,
        marker: Option<&str>,
        bpe: Option<&BpeModel>,
    ) -> Result<f64> {
        let parsed = Corpus::parse_str(text, self.kind, marker, "<score>")?;
        if parsed.len() != 1 {
            return Err(Error::Precondition(format!(
                "expected one line of text, got {}",
                parsed.len()
            )));
        }
        let sentence = &parsed.sentences()[0];
        let alphabet = parsed.alphabet();
        let mut units: Vec<String> = Vec::new();
        for (wi, (a, b)) in sentence.spans().into_iter().enumerate() {
            let span = &sentence.symbols()[a..b];
            let surfaces: Vec<&str> = span
                .iter()
                .map(|&s| alphabet.surface(s).expect("symbol interned"))
                .collect();
            if wi > 0
                && self.keep_space
                && !matches!(
                    self.units,
                    UnitKind::Word { .. } | UnitKind::WordFallback { .. }
                )
            {
                units.push(SPACE.to_string());
            }
            match self.units {
                UnitKind::Char | UnitKind::Phone => {
                    units.extend(surfaces.iter().map(|s| s.to_string()));
                }
                UnitKind::Word { .. } => {
                    units.push(alphabet.render(span));
                }
                UnitKind::WordFallback { .. } => {
                    let word = alphabet.render(span);
                    if self.index.contains_key(&word) {
                        units.push(word);
                    } else {
                        units.extend(surfaces.iter().map(|s| s.to_string()));
                    }
                }
                UnitKind::Bpe => {
                    let bpe = bpe.ok_or_else(|| {
                        Error::Config("scoring under BPE units needs the BPE model".into())
                    })?;
                    for unit in bpe.encode_surfaces(&surfaces)? {
                        units.push(
                            bpe.unit_surface(unit)
                                .expect("encoded unit exists")
                                .to_string(),
                        );
                    }
                }
            }
        }
        self.log_prob(&units)
    }

    /// TSV count dump, the interchange format.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str("#dpparse-ngram\t1\n");
        out.push_str(&format!("#order\t{}\n", self.order));
        out.push_str(&format!("#kind\t{}\n", self.kind.as_str()));
        out.push_str(&format!("#units\t{}\n", self.units.as_str()));
        if let Some(cap) = self.units.cap() {
            out.push_str(&format!("#cap\t{cap}\n"));
        }
        out.push_str(&format!("#keep_space\t{}\n", self.keep_space));
        out.push_str(&format!("#smoothing_k\t{}\n", self.k));
        for (i, s) in self.vocab.iter().enumerate() {
            out.push_str(&format!("V\t{i}\t{s}\n"));
        }
        for (i, &c) in self.unigram.iter().enumerate() {
            if c > 0 {
                out.push_str(&format!("U\t{i}\t{c}\n"));
            }
        }
        let mut pairs: Vec<(&(u32, u32), &u64)> = self.bigram.iter().collect();
        pairs.sort();
        for (&(a, b), &c) in pairs {
            out.push_str(&format!("B\t{a}\t{b}\t{c}\n"));
        }
        out
    }

    pub fn from_tsv(text: &str, source: &str) -> Result<Self> {
        let mut order = 0u8;
        let mut kind: Option<AlphabetKind> = None;
        let mut units: Option<String> = None;
        let mut cap = 0usize;
        let mut keep_space = false;
        let mut k = 0.0f64;
        let mut vocab: Vec<String> = Vec::new();
        let mut unigram_entries: Vec<(u32, u64)> = Vec::new();
        let mut bigram_entries: Vec<(u32, u32, u64)> = Vec::new();
        let mut versioned = false;

        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let bad = |msg: &str| Error::parse(source, lineno, msg);
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.splitn(2, '\t');
                let key = it.next().unwrap_or("");
                let value = it.next().unwrap_or("");
                match key {
                    "dpparse-ngram" => {
                        if value != "1" {
                            return Err(bad(&format!("unsupported format version {value}")));
                        }
                        versioned = true;
                    }
                    "order" => order = value.parse().map_err(|_| bad("bad order"))?,
                    "kind" => kind = Some(value.parse()?),
                    "units" => units = Some(value.to_string()),
                    "cap" => cap = value.parse().map_err(|_| bad("bad cap"))?,
                    "keep_space" => {
                        keep_space = value.parse().map_err(|_| bad("bad keep_space"))?
                    }
                    "smoothing_k" => k = value.parse().map_err(|_| bad("bad smoothing_k"))?,
                    _ => return Err(bad(&format!("unknown header `{key}`"))),
                }
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                ["V", id, surface] => {
                    let id: usize = id.parse().map_err(|_| bad("bad vocab id"))?;
                    if id != vocab.len() {
                        return Err(bad("vocab ids must be consecutive from 0"));
                    }
                    vocab.push(surface.to_string());
                }
                ["U", id, count] => unigram_entries.push((
                    id.parse().map_err(|_| bad("bad unit id"))?,
                    count.parse().map_err(|_| bad("bad count"))?,
                )),
                ["B", a, b, count] => bigram_entries.push((
                    a.parse().map_err(|_| bad("bad context id"))?,
                    b.parse().map_err(|_| bad("bad unit id"))?,
                    count.parse().map_err(|_| bad("bad count"))?,
                )),
                _ => return Err(bad("unrecognized line")),
            }
        }
        if !versioned {
            return Err(Error::parse(source, 1, "missing #dpparse-ngram header"));
        }
        let kind = kind.ok_or_else(|| Error::parse(source, 1, "missing #kind header"))?;
        let units = match units.as_deref() {
            Some("char") => UnitKind::Char,
            Some("phone") => UnitKind::Phone,
            Some("word") => UnitKind::Word { cap },
            Some("word_fallback") => UnitKind::WordFallback { cap },
            Some("bpe") => UnitKind::Bpe,
            other => {
                return Err(Error::parse(
                    source,
                    1,
                    format!("missing or unknown #units header {other:?}"),
                ))
            }
        };
        Self::assemble(
            order,
            kind,
            units,
            keep_space,
            k,
            vocab,
            unigram_entries,
            bigram_entries,
            source,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        order: u8,
        kind: AlphabetKind,
        units: UnitKind,
        keep_space: bool,
        k: f64,
        vocab: Vec<String>,
        unigram_entries: Vec<(u32, u64)>,
        bigram_entries: Vec<(u32, u32, u64)>,
        source: &str,
    ) -> Result<Self> {
        if !(order == 1 || order == 2) {
            return Err(Error::parse(source, 1, format!("bad order {order}")));
        }
        let v = vocab.len();
        let find = |marker: &str| -> Result<u32> {
            vocab
                .iter()
                .position(|s| s == marker)
                .map(|i| i as u32)
                .ok_or_else(|| Error::parse(source, 1, format!("vocab lacks {marker}")))
        };
        let eos = find(EOS)?;
        let unk = find(UNK)?;
        let mut unigram = vec![0u64; v];
        let mut total = 0u64;
        for (id, c) in unigram_entries {
            let slot = unigram
                .get_mut(id as usize)
                .ok_or_else(|| Error::parse(source, 1, format!("unit id {id} out of range")))?;
            *slot = c;
            total += c;
        }
        let mut bigram = FxHashMap::default();
        let mut context = vec![0u64; v];
        for (a, b, c) in bigram_entries {
            if a as usize >= v || b as usize >= v {
                return Err(Error::parse(source, 1, "bigram unit id out of range"));
            }
            bigram.insert((a, b), c);
            context[a as usize] += c;
        }
        let index = vocab
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        Ok(NGramModel {
            order,
            kind,
            units,
            keep_space,
            k,
            vocab,
            index,
            eos,
            unk,
            unigram,
            bigram,
            context,
            total,
        })
    }

    /// Versioned binary serialization.
    pub fn to_bytes(&self) -> Vec<u8> {
        let file = BinModel {
            order: self.order,
            kind: self.kind,
            units: self.units.as_str().to_string(),
            cap: self.units.cap().unwrap_or(0),
            keep_space: self.keep_space,
            k: self.k,
            vocab: self.vocab.clone(),
            unigram: self
                .unigram
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, &c)| (i as u32, c))
                .collect(),
            bigram: {
                let mut pairs: Vec<(u32, u32, u64)> =
                    self.bigram.iter().map(|(&(a, b), &c)| (a, b, c)).collect();
                pairs.sort();
                pairs
            },
        };
        let mut out = BIN_MAGIC.to_vec();
        out.extend(bincode::serialize(&file).expect("model serializes"));
        out
    }

    pub fn from_bytes(bytes: &[u8], source: &str) -> Result<Self> {
        let payload = bytes
            .strip_prefix(BIN_MAGIC.as_slice())
            .ok_or_else(|| Error::parse(source, 0, "bad magic for binary model"))?;
        let file: BinModel = bincode::deserialize(payload)
            .map_err(|e| Error::parse(source, 0, format!("binary decode: {e}")))?;
        let units = match file.units.as_str() {
            "char" => UnitKind::Char,
            "phone" => UnitKind::Phone,
            "word" => UnitKind::Word { cap: file.cap },
            "word_fallback" => UnitKind::WordFallback { cap: file.cap },
            "bpe" => UnitKind::Bpe,
            other => return Err(Error::parse(source, 0, format!("unknown units `{other}`"))),
        };
        Self::assemble(
            file.order,
            file.kind,
            units,
            file.keep_space,
            file.k,
            file.vocab,
            file.unigram,
            file.bigram,
            source,
        )
    }

    /// Write the model; `.bin` extension selects the binary format, anything
    /// else the TSV dump.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = if path.extension().is_some_and(|e| e == "bin") {
            self.to_bytes()
        } else {
            self.to_tsv().into_bytes()
        };
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    /// Read a model in either format (sniffed from the leading bytes).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let name = path.display().to_string();
        if bytes.starts_with(BIN_MAGIC) {
            Self::from_bytes(&bytes, &name)
        } else {
            let text = String::from_utf8(bytes)
                .map_err(|_| Error::parse(&name, 0, "model file is not UTF-8"))?;
            Self::from_tsv(&text, &name)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct BinModel {
    order: u8,
    kind: AlphabetKind,
    units: String,
    cap: usize,
    keep_space: bool,
    k: f64,
    vocab: Vec<String>,
    unigram: Vec<(u32, u64)>,
    bigram: Vec<(u32, u32, u64)>,
}
