//! Byte-pair encoding over symbol sequences.
//!
//! Works on alphabet symbols rather than bytes, so phoneme labels count as
//! single base units. Merges are learned within words only and never span a
//! word boundary.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::{Alphabet, AlphabetKind, Corpus, SymbolId};

/// Id of a BPE unit: base symbols first (same order as the alphabet), merged
/// units after, in merge order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BpeUnit(pub u32);

/// A learned BPE vocabulary: ordered merges plus the unit inventory they
/// produce over a base alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct BpeModel {
    kind: AlphabetKind,
    base: Vec<String>,
    base_index: HashMap<String, u32>,
    // expansion of every unit into base symbol indices
    expansions: Vec<Vec<u32>>,
    surfaces: Vec<String>,
    merges: Vec<(u32, u32)>,
    ranks: HashMap<(u32, u32), u32>,
    target: usize,
}

impl BpeModel {
    fn from_base(kind: AlphabetKind, base: Vec<String>, target: usize) -> Self {
        let expansions: Vec<Vec<u32>> = (0..base.len() as u32).map(|i| vec![i]).collect();
        let surfaces = base.clone();
        let base_index = base
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        BpeModel {
            kind,
            base,
            base_index,
            expansions,
            surfaces,
            merges: Vec::new(),
            ranks: HashMap::new(),
            target,
        }
    }

    fn push_merge(&mut self, left: u32, right: u32) -> u32 {
        let id = self.expansions.len() as u32;
        let mut expansion = self.expansions[left as usize].clone();
        expansion.extend_from_slice(&self.expansions[right as usize]);
        let surface = self.render_expansion(&expansion);
        self.ranks.insert((left, right), self.merges.len() as u32);
        self.merges.push((left, right));
        self.expansions.push(expansion);
        self.surfaces.push(surface);
        id
    }

    fn render_expansion(&self, expansion: &[u32]) -> String {
        let parts: Vec<&str> = expansion
            .iter()
            .map(|&i| self.base[i as usize].as_str())
            .collect();
        match self.kind {
            AlphabetKind::Character => parts.concat(),
            AlphabetKind::Phoneme => parts.join(" "),
        }
    }

    pub fn kind(&self) -> AlphabetKind {
        self.kind
    }

    pub fn base_len(&self) -> usize {
        self.base.len()
    }

    pub fn base_surfaces(&self) -> impl Iterator<Item = &str> {
        self.base.iter().map(String::as_str)
    }

    /// Total unit inventory: base symbols plus merged units.
    pub fn vocab_size(&self) -> usize {
        self.expansions.len()
    }

    pub fn merges(&self) -> &[(u32, u32)] {
        &self.merges
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn unit_surface(&self, unit: BpeUnit) -> Option<&str> {
        self.surfaces.get(unit.0 as usize).map(String::as_str)
    }

    pub fn unit_surfaces(&self) -> impl Iterator<Item = &str> {
        self.surfaces.iter().map(String::as_str)
    }

    /// Encode one word (no boundaries inside) by applying merges in learned
    /// order. Any word over the base alphabet is encodable.
    pub fn encode(&self, word: &[SymbolId]) -> Result<Vec<BpeUnit>> {
        let mut units: Vec<u32> = Vec::with_capacity(word.len());
        for &s in word {
            if s.index() >= self.base.len() {
                return Err(Error::Domain(format!(
                    "symbol id {} outside the model's base alphabet",
                    s.0
                )));
            }
            units.push(s.0);
        }
        self.apply_merges(units)
    }

    /// Encode a word given as base symbol surfaces (e.g. parsed from raw
    /// text rather than an interned corpus).
    pub fn encode_surfaces<S: AsRef<str>>(&self, symbols: &[S]) -> Result<Vec<BpeUnit>> {
        let mut units: Vec<u32> = Vec::with_capacity(symbols.len());
        for s in symbols {
            let s = s.as_ref();
            match self.base_index.get(s) {
                Some(&i) => units.push(i),
                None => {
                    return Err(Error::Domain(format!(
                        "symbol `{s}` outside the model's base alphabet"
                    )))
                }
            }
        }
        self.apply_merges(units)
    }

    fn apply_merges(&self, mut units: Vec<u32>) -> Result<Vec<BpeUnit>> {
        if units.is_empty() {
            return Err(Error::Precondition("cannot encode an empty word".into()));
        }
        // Repeatedly apply the lowest-ranked adjacent pair; equivalent to
        // replaying merges in learned order.
        loop {
            let mut best: Option<(u32, usize)> = None;
            for i in 0..units.len().saturating_sub(1) {
                if let Some(&rank) = self.ranks.get(&(units[i], units[i + 1])) {
                    if best.is_none_or(|(r, _)| rank < r) {
                        best = Some((rank, i));
                    }
                }
            }
            let Some((rank, _)) = best else { break };
            let (left, right) = self.merges[rank as usize];
            let merged = self.merge_unit_id(rank);
            let mut out = Vec::with_capacity(units.len());
            let mut i = 0;
            while i < units.len() {
                if i + 1 < units.len() && units[i] == left && units[i + 1] == right {
                    out.push(merged);
                    i += 2;
                } else {
                    out.push(units[i]);
                    i += 1;
                }
            }
            units = out;
        }
        Ok(units.into_iter().map(BpeUnit).collect())
    }

    fn merge_unit_id(&self, rank: u32) -> u32 {
        self.base.len() as u32 + rank
    }

    /// Expand units back into the underlying symbol sequence.
    pub fn decode(&self, units: &[BpeUnit]) -> Result<Vec<SymbolId>> {
        let mut out = Vec::new();
        for &u in units {
            let expansion = self
                .expansions
                .get(u.0 as usize)
                .ok_or_else(|| Error::Domain(format!("unknown BPE unit id {}", u.0)))?;
            out.extend(expansion.iter().map(|&i| SymbolId(i)));
        }
        Ok(out)
    }

    /// TSV of ordered merges, `left<TAB>right`, with a versioned header.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str("#dpparse-bpe\t1\n");
        out.push_str(&format!("#kind\t{}\n", self.kind.as_str()));
        out.push_str(&format!("#target\t{}\n", self.target));
        for &(l, r) in &self.merges {
            out.push_str(&format!(
                "{}\t{}\n",
                self.surfaces[l as usize], self.surfaces[r as usize]
            ));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    /// Rebuild a model from saved merges, bound to `alphabet`. Merges whose
    /// sides cannot be formed over this alphabet can never fire and are
    /// dropped.
    pub fn from_merges(
        alphabet: &Alphabet,
        target: usize,
        merge_surfaces: &[(String, String)],
    ) -> Self {
        let mut model = BpeModel::from_base(
            alphabet.kind(),
            alphabet.surfaces().map(str::to_string).collect(),
            target,
        );
        let mut by_surface: HashMap<String, u32> = model
            .surfaces
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        for (l, r) in merge_surfaces {
            let (Some(&li), Some(&ri)) = (by_surface.get(l), by_surface.get(r)) else {
                continue;
            };
            let id = model.push_merge(li, ri);
            let surface = model.surfaces[id as usize].clone();
            by_surface.entry(surface).or_insert(id);
        }
        model
    }

    pub fn load(path: impl AsRef<Path>, alphabet: &Alphabet) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path.display().to_string();
        let mut target = 0usize;
        let mut kind: Option<AlphabetKind> = None;
        let mut merges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split('\t');
                match (it.next(), it.next()) {
                    (Some("dpparse-bpe"), Some("1")) => {}
                    (Some("dpparse-bpe"), v) => {
                        return Err(Error::parse(
                            &name,
                            lineno,
                            format!("unsupported format version {v:?}"),
                        ))
                    }
                    (Some("kind"), Some(k)) => kind = Some(k.parse()?),
                    (Some("target"), Some(t)) => {
                        target = t
                            .parse()
                            .map_err(|_| Error::parse(&name, lineno, "bad target value"))?;
                    }
                    _ => return Err(Error::parse(&name, lineno, "unknown header")),
                }
                continue;
            }
            let mut it = line.split('\t');
            match (it.next(), it.next(), it.next()) {
                (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => {
                    merges.push((l.to_string(), r.to_string()));
                }
                _ => return Err(Error::parse(&name, lineno, "expected `left<TAB>right`")),
            }
        }
        if let Some(k) = kind {
            if k != alphabet.kind() {
                return Err(Error::Config(format!(
                    "BPE model is {} but corpus is {}",
                    k.as_str(),
                    alphabet.kind().as_str()
                )));
            }
        }
        Ok(BpeModel::from_merges(alphabet, target, &merges))
    }
}

/// Learn merges until the unit inventory reaches `target` or no adjacent pair
/// occurs twice. Pair frequencies are counted within words only; ties break
/// to the lexicographically smallest `(left, right)` unit pair.
pub fn learn(corpus: &Corpus, target: usize) -> Result<BpeModel> {
    if !corpus.boundaries_visible() {
        return Err(Error::Precondition(
            "BPE learning needs a corpus with visible boundaries".into(),
        ));
    }
    if corpus.is_empty() {
        return Err(Error::Precondition("empty corpus".into()));
    }
    let mut model = BpeModel::from_base(
        corpus.kind(),
        corpus.alphabet().surfaces().map(str::to_string).collect(),
        target,
    );

    // word types with frequencies, currently encoded as unit sequences
    let mut word_freqs: HashMap<Vec<u32>, u64> = HashMap::new();
    for sentence in corpus.sentences() {
        for (a, b) in sentence.spans() {
            let units: Vec<u32> = sentence.symbols()[a..b].iter().map(|s| s.0).collect();
            *word_freqs.entry(units).or_insert(0) += 1;
        }
    }
    let mut words: Vec<(Vec<u32>, u64)> = word_freqs.into_iter().collect();

    while model.vocab_size() < target {
        let mut pair_counts: HashMap<(u32, u32), u64> = HashMap::new();
        for (units, freq) in &words {
            for w in units.windows(2) {
                *pair_counts.entry((w[0], w[1])).or_insert(0) += freq;
            }
        }
        let best = pair_counts
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)));
        let Some((pair, count)) = best else { break };
        if count < 2 {
            break;
        }
        let merged = model.push_merge(pair.0, pair.1);
        for (units, _) in words.iter_mut() {
            if units.len() < 2 {
                continue;
            }
            let mut out = Vec::with_capacity(units.len());
            let mut i = 0;
            while i < units.len() {
                if i + 1 < units.len() && units[i] == pair.0 && units[i + 1] == pair.1 {
                    out.push(merged);
                    i += 2;
                } else {
                    out.push(units[i]);
                    i += 1;
                }
            }
            *units = out;
        }
    }
    Ok(model)
}
