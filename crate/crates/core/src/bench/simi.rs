//! Semantic-similarity benchmark (pSIMI): pooled hidden-state embeddings,
//! cosine distances, Spearman correlation against human judgements.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A human-judged word pair, score normalised to 0-10.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityItem {
    pub word_a: String,
    pub word_b: String,
    pub human_score: f64,
}

impl SimilarityItem {
    pub fn new(
        word_a: impl Into<String>,
        word_b: impl Into<String>,
        human_score: f64,
    ) -> Result<Self> {
        let item = SimilarityItem {
            word_a: word_a.into(),
            word_b: word_b.into(),
            human_score,
        };
        if item.word_a.is_empty() || item.word_b.is_empty() {
            return Err(Error::Domain("similarity words must be non-empty".into()));
        }
        if !(0.0..=10.0).contains(&human_score) {
            return Err(Error::Domain(format!(
                "human score {human_score} outside the 0-10 scale"
            )));
        }
        Ok(item)
    }
}

/// Load `word_a<TAB>word_b<TAB>score` items. Pairs made of the same words in
/// either order are averaged into one item (first occurrence keeps its slot).
pub fn load_similarity(path: impl AsRef<Path>) -> Result<Vec<SimilarityItem>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_similarity(&text, &path.display().to_string())
}

pub fn parse_similarity(text: &str, source: &str) -> Result<Vec<SimilarityItem>> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut scores: HashMap<(String, String), Vec<f64>> = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        let [a, b, score] = fields.as_slice() else {
            return Err(Error::parse(
                source,
                lineno,
                "expected `word_a<TAB>word_b<TAB>score`",
            ));
        };
        let score: f64 = score
            .parse()
            .map_err(|_| Error::parse(source, lineno, "bad score"))?;
        let item = SimilarityItem::new(*a, *b, score)
            .map_err(|e| Error::parse(source, lineno, e.to_string()))?;
        let key = if item.word_a <= item.word_b {
            (item.word_a.clone(), item.word_b.clone())
        } else {
            (item.word_b.clone(), item.word_a.clone())
        };
        if !scores.contains_key(&key) {
            order.push(key.clone());
        }
        scores.entry(key).or_default().push(score);
    }
    order
        .into_iter()
        .map(|key| {
            let vals = &scores[&key];
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            SimilarityItem::new(key.0, key.1, mean)
        })
        .collect()
}

/// Element-wise pooling across token positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolingFn {
    Mean,
    Max,
    Min,
}

impl PoolingFn {
    pub const ALL: [PoolingFn; 3] = [PoolingFn::Mean, PoolingFn::Max, PoolingFn::Min];

    pub fn as_str(self) -> &'static str {
        match self {
            PoolingFn::Mean => "mean",
            PoolingFn::Max => "max",
            PoolingFn::Min => "min",
        }
    }
}

/// Pool a non-empty sequence of equal-width vectors into one vector.
pub fn pool(vectors: &[Vec<f64>], f: PoolingFn) -> Result<Vec<f64>> {
    let Some(first) = vectors.first() else {
        return Err(Error::Precondition(
            "pooling needs at least one vector".into(),
        ));
    };
    let width = first.len();
    let mut out = first.clone();
    for v in &vectors[1..] {
        if v.len() != width {
            return Err(Error::Domain(format!(
                "vector width {} does not match {width}",
                v.len()
            )));
        }
        for (o, &x) in out.iter_mut().zip(v) {
            match f {
                PoolingFn::Mean => *o += x,
                PoolingFn::Max => *o = o.max(x),
                PoolingFn::Min => *o = o.min(x),
            }
        }
    }
    if f == PoolingFn::Mean {
        let n = vectors.len() as f64;
        for o in &mut out {
            *o /= n;
        }
    }
    Ok(out)
}

/// Cosine similarity; zero vectors compare as 0.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Domain(format!(
            "vector widths differ: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok(dot / (nu.sqrt() * nv.sqrt()))
}

/// Spearman's rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Precondition(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Precondition("need at least two observations".into()));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for i in 0..xs.len() {
        cov += (rx[i] - mx) * (ry[i] - my);
        vx += (rx[i] - mx).powi(2);
        vy += (ry[i] - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::Domain(
            "correlation undefined for a constant list".into(),
        ));
    }
    Ok(cov / (vx * vy).sqrt())
}

fn average_ranks(vals: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let mut ranks = vec![0.0; vals.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && vals[idx[j]] == vals[idx[i]] {
            j += 1;
        }
        let rank = (i + j - 1) as f64 / 2.0 + 1.0;
        for &slot in &idx[i..j] {
            ranks[slot] = rank;
        }
        i = j;
    }
    ranks
}

/// Per-word, per-layer sequences of hidden vectors from an external model.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    layers: usize,
    width: usize,
    // word -> layer -> position -> vector
    map: HashMap<String, Vec<Vec<Vec<f64>>>>,
}

impl EmbeddingSet {
    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    pub fn vectors(&self, word: &str, layer: usize) -> Option<&[Vec<f64>]> {
        self.map
            .get(word)
            .and_then(|layers| layers.get(layer))
            .map(Vec::as_slice)
            .filter(|v| !v.is_empty())
    }
}

/// Load an embedding file: a `layers=<L> width=<D>` header, then
/// `word<TAB>layer<TAB>position<TAB>d0 d1 ... dD-1` rows.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&text, &path.display().to_string())
}

pub fn parse_embeddings(text: &str, source: &str) -> Result<EmbeddingSet> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(Error::parse(source, 1, "missing header"));
    };
    let mut layers = None;
    let mut width = None;
    for field in header.split_whitespace() {
        if let Some(v) = field.strip_prefix("layers=") {
            layers = v.parse::<usize>().ok();
        } else if let Some(v) = field.strip_prefix("width=") {
            width = v.parse::<usize>().ok();
        }
    }
    let (Some(layers), Some(width)) = (layers, width) else {
        return Err(Error::parse(
            source,
            1,
            "header must be `layers=<L> width=<D>`",
        ));
    };
    if layers == 0 || width == 0 {
        return Err(Error::parse(source, 1, "layers and width must be positive"));
    }

    // word -> layer -> (position -> vector)
    let mut staging: HashMap<String, Vec<BTreeMap<usize, Vec<f64>>>> = HashMap::new();
    for (lineno, line) in lines {
        let lineno = lineno + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        let [word, layer, position, values] = fields.as_slice() else {
            return Err(Error::parse(
                source,
                lineno,
                "expected `word<TAB>layer<TAB>position<TAB>values`",
            ));
        };
        let layer: usize = layer
            .parse()
            .map_err(|_| Error::parse(source, lineno, "bad layer"))?;
        if layer >= layers {
            return Err(Error::parse(
                source,
                lineno,
                format!("layer {layer} outside 0..{layers}"),
            ));
        }
        let position: usize = position
            .parse()
            .map_err(|_| Error::parse(source, lineno, "bad position"))?;
        let vector: Vec<f64> = values
            .split_whitespace()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(source, lineno, "bad vector value"))?;
        if vector.len() != width {
            return Err(Error::parse(
                source,
                lineno,
                format!("vector has {} values, header says {width}", vector.len()),
            ));
        }
        if !vector.iter().all(|v| v.is_finite()) {
            return Err(Error::parse(source, lineno, "non-finite vector value"));
        }
        let slots = staging
            .entry(word.to_string())
            .or_insert_with(|| vec![BTreeMap::new(); layers]);
        if slots[layer].insert(position, vector).is_some() {
            return Err(Error::parse(
                source,
                lineno,
                format!("duplicate position {position} for {word} layer {layer}"),
            ));
        }
    }

    let mut map = HashMap::with_capacity(staging.len());
    for (word, slots) in staging {
        let mut per_layer = Vec::with_capacity(layers);
        for (layer, positions) in slots.into_iter().enumerate() {
            let mut vectors = Vec::with_capacity(positions.len());
            for (expect, (pos, v)) in positions.into_iter().enumerate() {
                if pos != expect {
                    return Err(Error::parse(
                        source,
                        0,
                        format!("{word} layer {layer}: positions not contiguous from 0"),
                    ));
                }
                vectors.push(v);
            }
            per_layer.push(vectors);
        }
        map.insert(word, per_layer);
    }
    Ok(EmbeddingSet { layers, width, map })
}

/// The selected grid cell and its scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsimiReport {
    pub layer: usize,
    pub pooling: PoolingFn,
    pub dev_rho: f64,
    pub test_rhos: BTreeMap<String, f64>,
}

/// Grid-search `(layer, pooling)` for the best dev-set Spearman rho, then
/// report test-set rhos from that cell only. Ties prefer the lower layer,
/// then mean < max < min.
pub fn psimi_eval(
    dev: &[SimilarityItem],
    tests: &[(String, Vec<SimilarityItem>)],
    embeddings: &EmbeddingSet,
) -> Result<PsimiReport> {
    if dev.len() < 2 {
        return Err(Error::Precondition(
            "dev set needs at least two items".into(),
        ));
    }
    let mut missing: Vec<String> = Vec::new();
    let mut check = |word: &str| {
        if embeddings.vectors(word, 0).is_none() && !missing.iter().any(|m| m == word) {
            missing.push(word.to_string());
        }
    };
    for item in dev.iter().chain(tests.iter().flat_map(|(_, t)| t.iter())) {
        check(&item.word_a);
        check(&item.word_b);
    }
    if !missing.is_empty() {
        return Err(Error::Coverage {
            context: "embeddings".into(),
            missing,
        });
    }

    let cell_sims = |items: &[SimilarityItem], layer: usize, f: PoolingFn| -> Result<Vec<f64>> {
        items
            .iter()
            .map(|item| {
                let a = pool(vectors_for(embeddings, &item.word_a, layer)?, f)?;
                let b = pool(vectors_for(embeddings, &item.word_b, layer)?, f)?;
                cosine(&a, &b)
            })
            .collect()
    };

    let humans: Vec<f64> = dev.iter().map(|i| i.human_score).collect();
    let mut best: Option<(usize, PoolingFn, f64)> = None;
    for layer in 0..embeddings.layers() {
        for f in PoolingFn::ALL {
            let sims = cell_sims(dev, layer, f)?;
            let Ok(rho) = spearman(&sims, &humans) else {
                continue;
            };
            if best.is_none_or(|(_, _, b)| rho > b) {
                best = Some((layer, f, rho));
            }
        }
    }
    let Some((layer, pooling, dev_rho)) = best else {
        return Err(Error::Domain(
            "no (layer, pooling) cell yields a defined dev correlation".into(),
        ));
    };

    let mut test_rhos = BTreeMap::new();
    for (name, items) in tests {
        let sims = cell_sims(items, layer, pooling)?;
        let humans: Vec<f64> = items.iter().map(|i| i.human_score).collect();
        test_rhos.insert(name.clone(), spearman(&sims, &humans)?);
    }
    Ok(PsimiReport {
        layer,
        pooling,
        dev_rho,
        test_rhos,
    })
}

fn vectors_for<'a>(
    embeddings: &'a EmbeddingSet,
    word: &str,
    layer: usize,
) -> Result<&'a [Vec<f64>]> {
    embeddings
        .vectors(word, layer)
        .ok_or_else(|| Error::Coverage {
            context: "embeddings".into(),
            missing: vec![format!("{word} (layer {layer})")],
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::brute_force_spearman;

    #[test]
    fn pool_examples() {
        let v = vec![vec![1.0, 3.0]];
        assert_eq!(pool(&v, PoolingFn::Mean).unwrap(), vec![1.0, 3.0]);
        let v = vec![vec![1.0, 3.0], vec![3.0, 1.0]];
        assert_eq!(pool(&v, PoolingFn::Mean).unwrap(), vec![2.0, 2.0]);
        let v = vec![vec![1.0, 3.0], vec![3.0, 1.0], vec![2.0, 2.0]];
        assert_eq!(pool(&v, PoolingFn::Max).unwrap(), vec![3.0, 3.0]);
        assert_eq!(pool(&v, PoolingFn::Min).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn pool_rejects_mixed_widths() {
        let v = vec![vec![1.0, 2.0], vec![1.0]];
        assert!(pool(&v, PoolingFn::Mean).is_err());
        assert!(pool(&[], PoolingFn::Mean).is_err());
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine(&[1.0, 2.0], &[1.0, 2.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 2.0], &[-1.0, -2.0]).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(cosine(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn cosine_scale_invariance() {
        let u = [0.3, -1.2, 2.0];
        let v = [1.4, 0.2, -0.7];
        let base = cosine(&u, &v).unwrap();
        let au: Vec<f64> = u.iter().map(|x| x * 3.5).collect();
        let bv: Vec<f64> = v.iter().map(|x| x * -2.0).collect();
        assert!((cosine(&au, &bv).unwrap() + base).abs() < 1e-12);
    }

    #[test]
    fn spearman_perfect_and_reversed() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman(&xs, &xs).unwrap(), 1.0);
        let ys = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(spearman(&xs, &ys).unwrap(), -1.0);
    }

    #[test]
    fn spearman_ties_match_brute_force() {
        let xs = [1.0, 2.0, 2.0, 4.0];
        let ys = [1.0, 3.0, 2.0, 4.0];
        let rho = spearman(&xs, &ys).unwrap();
        let oracle = brute_force_spearman(&xs, &ys).unwrap();
        assert!((rho - oracle).abs() < 1e-12);
        assert!((rho - 0.9486832980505138).abs() < 1e-12);
    }

    #[test]
    fn spearman_constant_list_is_error() {
        assert!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn spearman_monotone_invariance() {
        let xs = [0.4, -1.0, 3.1, 2.2, 0.1];
        let ys = [9.0, 2.0, 5.5, 7.1, 0.3];
        let base = spearman(&xs, &ys).unwrap();
        let tx: Vec<f64> = xs.iter().map(|x| (x * 0.7).exp()).collect();
        assert!((spearman(&tx, &ys).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn similarity_duplicates_average() {
        let items = parse_similarity("a\tb\t4\nb\ta\t6\nc\td\t1\n", "t").unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0].human_score, 5.0);
        assert!(parse_similarity("a\tb\t11\n", "t").is_err());
    }

    fn fixture() -> (Vec<SimilarityItem>, EmbeddingSet) {
        // layer 1 mean encodes the human score exactly in the first
        // component; other cells are noise with repeated values
        let dev = vec![
            SimilarityItem::new("w1", "w2", 1.0).unwrap(),
            SimilarityItem::new("w3", "w4", 5.0).unwrap(),
            SimilarityItem::new("w5", "w6", 9.0).unwrap(),
        ];
        let mut text = String::from("layers=2 width=2\n");
        // cosine of (1, eps_i) pairs orders by eps; craft per-pair angles
        let angles = [(0.9, 0.1), (0.5, 0.5), (0.1, 0.9)];
        for (i, (a, b)) in angles.iter().enumerate() {
            let w1 = format!("w{}", 2 * i + 1);
            let w2 = format!("w{}", 2 * i + 2);
            // layer 0: identical for everyone (constant sims -> skipped)
            text.push_str(&format!("{w1}\t0\t0\t1 0\n"));
            text.push_str(&format!("{w2}\t0\t0\t1 0\n"));
            // layer 1: angle between the pair grows with human score
            text.push_str(&format!("{w1}\t1\t0\t1 0\n"));
            text.push_str(&format!("{w2}\t1\t0\t{a} {b}\n"));
        }
        let emb = parse_embeddings(&text, "t").unwrap();
        (dev, emb)
    }

    #[test]
    fn psimi_selects_the_informative_cell() {
        let (dev, emb) = fixture();
        // cosine grows as b shrinks... human scores 1,5,9 with angles
        // (0.9,0.1) closest -> highest cosine; so order is reversed:
        // flip human scores to match increasing cosine
        let dev = vec![
            SimilarityItem::new(&dev[0].word_a, &dev[0].word_b, 9.0).unwrap(),
            SimilarityItem::new(&dev[1].word_a, &dev[1].word_b, 5.0).unwrap(),
            SimilarityItem::new(&dev[2].word_a, &dev[2].word_b, 1.0).unwrap(),
        ];
        let tests = vec![("t1".to_string(), dev.clone())];
        let report = psimi_eval(&dev, &tests, &emb).unwrap();
        assert_eq!(report.layer, 1);
        assert_eq!(report.pooling, PoolingFn::Mean);
        assert_eq!(report.dev_rho, 1.0);
        assert_eq!(report.test_rhos["t1"], 1.0);
    }

    #[test]
    fn psimi_selection_ignores_test_scores() {
        let (dev, emb) = fixture();
        let dev = vec![
            SimilarityItem::new(&dev[0].word_a, &dev[0].word_b, 9.0).unwrap(),
            SimilarityItem::new(&dev[1].word_a, &dev[1].word_b, 5.0).unwrap(),
            SimilarityItem::new(&dev[2].word_a, &dev[2].word_b, 1.0).unwrap(),
        ];
        let t1 = dev.clone();
        let mut t2 = dev.clone();
        t2[0].human_score = 1.0;
        t2[2].human_score = 9.0;
        let r1 = psimi_eval(&dev, &[("t".into(), t1)], &emb).unwrap();
        let r2 = psimi_eval(&dev, &[("t".into(), t2)], &emb).unwrap();
        assert_eq!((r1.layer, r1.pooling), (r2.layer, r2.pooling));
    }

    #[test]
    fn psimi_reports_missing_words() {
        let (dev, emb) = fixture();
        let mut dev = dev;
        dev.push(SimilarityItem::new("unknown", "w1", 2.0).unwrap());
        match psimi_eval(&dev, &[], &emb) {
            Err(Error::Coverage { missing, .. }) => assert_eq!(missing, vec!["unknown"]),
            other => panic!("expected coverage error, got {other:?}"),
        }
    }
}
