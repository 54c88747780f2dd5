//! Minimal-pair benchmarks: spot-the-word (pWUGGY) and acceptability
//! (pBLIMP) accuracy from per-side scores.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One benchmark record: the acceptable string and its matched foil.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalPair {
    pub id: String,
    pub category: String,
    pub positive: String,
    pub negative: String,
}

impl MinimalPair {
    pub fn new(
        id: impl Into<String>,
        category: impl Into<String>,
        positive: impl Into<String>,
        negative: impl Into<String>,
    ) -> Result<Self> {
        let pair = MinimalPair {
            id: id.into(),
            category: category.into(),
            positive: positive.into(),
            negative: negative.into(),
        };
        if pair.id.is_empty() || pair.positive.is_empty() || pair.negative.is_empty() {
            return Err(Error::Domain("pair fields must be non-empty".into()));
        }
        if pair.positive == pair.negative {
            return Err(Error::Domain(format!(
                "pair {}: positive and negative sides are identical",
                pair.id
            )));
        }
        Ok(pair)
    }
}

/// `id<TAB>category<TAB>positive<TAB>negative`, one pair per line.
pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<MinimalPair>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, category, positive, negative] = fields.as_slice() else {
            return Err(Error::parse(
                &name,
                lineno,
                "expected `id<TAB>category<TAB>positive<TAB>negative`",
            ));
        };
        pairs.push(
            MinimalPair::new(*id, *category, *positive, *negative)
                .map_err(|e| Error::parse(&name, lineno, e.to_string()))?,
        );
    }
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Positive,
    Negative,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Positive => "positive",
            Side::Negative => "negative",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" | "pos" => Ok(Side::Positive),
            "negative" | "neg" => Ok(Side::Negative),
            other => Err(Error::Domain(format!("unknown side `{other}`"))),
        }
    }
}

/// Scores per `(pair id, side)`, e.g. from an external neural model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    map: HashMap<(String, Side), f64>,
}

impl ScoreTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, side: Side, score: f64) -> Result<()> {
        if !score.is_finite() {
            return Err(Error::Domain(format!("non-finite score {score}")));
        }
        self.map.insert((id.into(), side), score);
        Ok(())
    }

    pub fn get(&self, id: &str, side: Side) -> Option<f64> {
        self.map.get(&(id.to_string(), side)).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// TSV rendering, sorted for stable output.
    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<(&String, Side, f64)> = self
            .map
            .iter()
            .map(|((id, side), &s)| (id, *side, s))
            .collect();
        rows.sort_by(|a, b| a.0.cmp(b.0).then_with(|| a.1.as_str().cmp(b.1.as_str())));
        let mut out = String::new();
        for (id, side, score) in rows {
            out.push_str(&format!("{id}\t{}\t{score}\n", side.as_str()));
        }
        out
    }
}

/// Load `id<TAB>side<TAB>score`. Duplicate `(id, side)` rows keep the last
/// value; each duplicate is reported in the returned warnings.
pub fn load_scores(path: impl AsRef<Path>) -> Result<(ScoreTable, Vec<String>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    let mut table = ScoreTable::new();
    let mut warnings = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, side, score] = fields.as_slice() else {
            return Err(Error::parse(
                &name,
                lineno,
                "expected `id<TAB>side<TAB>score`",
            ));
        };
        let side: Side = side
            .parse()
            .map_err(|e: Error| Error::parse(&name, lineno, e.to_string()))?;
        let score: f64 = score
            .parse()
            .map_err(|_| Error::parse(&name, lineno, "bad score"))?;
        if table.get(id, side).is_some() {
            warnings.push(format!(
                "line {lineno}: duplicate score for {id}/{}, keeping the last",
                side.as_str()
            ));
        }
        table
            .insert(*id, side, score)
            .map_err(|e| Error::parse(&name, lineno, e.to_string()))?;
    }
    Ok((table, warnings))
}

/// Accuracy of preferring the positive side, with ties worth half credit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairAccuracy {
    pub overall: f64,
    pub n: usize,
    pub per_category: BTreeMap<String, f64>,
}

pub fn pair_accuracy(pairs: &[MinimalPair], scores: &ScoreTable) -> Result<PairAccuracy> {
    if pairs.is_empty() {
        return Err(Error::Precondition("no pairs to evaluate".into()));
    }
    let mut missing = Vec::new();
    let mut total = 0.0;
    let mut by_category: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for pair in pairs {
        let pos = scores.get(&pair.id, Side::Positive);
        let neg = scores.get(&pair.id, Side::Negative);
        let (Some(pos), Some(neg)) = (pos, neg) else {
            if pos.is_none() {
                missing.push(format!("{}/positive", pair.id));
            }
            if neg.is_none() {
                missing.push(format!("{}/negative", pair.id));
            }
            continue;
        };
        let credit = score_credit(pos, neg);
        total += credit;
        let slot = by_category.entry(pair.category.clone()).or_insert((0.0, 0));
        slot.0 += credit;
        slot.1 += 1;
    }
    if !missing.is_empty() {
        return Err(Error::Coverage {
            context: "pair scores".into(),
            missing,
        });
    }
    Ok(PairAccuracy {
        overall: total / pairs.len() as f64,
        n: pairs.len(),
        per_category: by_category
            .into_iter()
            .map(|(cat, (sum, n))| (cat, sum / n as f64))
            .collect(),
    })
}

/// 1 if the positive side wins, 0.5 on a tie, else 0.
pub fn score_credit(positive: f64, negative: f64) -> f64 {
    if positive > negative {
        1.0
    } else if positive == negative {
        0.5
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(id: &str, cat: &str) -> MinimalPair {
        MinimalPair::new(id, cat, format!("w{id}"), format!("n{id}")).unwrap()
    }

    fn table(entries: &[(&str, f64, f64)]) -> ScoreTable {
        let mut t = ScoreTable::new();
        for (id, pos, neg) in entries {
            t.insert(*id, Side::Positive, *pos).unwrap();
            t.insert(*id, Side::Negative, *neg).unwrap();
        }
        t
    }

    #[test]
    fn all_positive_higher_is_perfect() {
        let pairs = vec![pair("1", "a"), pair("2", "a")];
        let t = table(&[("1", 2.0, 1.0), ("2", 0.0, -3.0)]);
        let acc = pair_accuracy(&pairs, &t).unwrap();
        assert_eq!(acc.overall, 1.0);
    }

    #[test]
    fn ties_earn_half_credit() {
        let pairs = vec![pair("1", "a"), pair("2", "a")];
        let t = table(&[("1", 1.0, 1.0), ("2", 1.0, 1.0)]);
        let acc = pair_accuracy(&pairs, &t).unwrap();
        assert_eq!(acc.overall, 0.5);
    }

    #[test]
    fn three_of_four_wins() {
        let pairs = vec![
            pair("1", "a"),
            pair("2", "a"),
            pair("3", "b"),
            pair("4", "b"),
        ];
        let t = table(&[
            ("1", 2.0, 1.0),
            ("2", 2.0, 1.0),
            ("3", 2.0, 1.0),
            ("4", 0.0, 1.0),
        ]);
        let acc = pair_accuracy(&pairs, &t).unwrap();
        assert_eq!(acc.overall, 0.75);
        assert_eq!(acc.per_category["a"], 1.0);
        assert_eq!(acc.per_category["b"], 0.5);
    }

    #[test]
    fn missing_scores_list_ids() {
        let pairs = vec![pair("1", "a"), pair("2", "a")];
        let mut t = ScoreTable::new();
        t.insert("1", Side::Positive, 1.0).unwrap();
        t.insert("1", Side::Negative, 0.0).unwrap();
        t.insert("2", Side::Positive, 1.0).unwrap();
        match pair_accuracy(&pairs, &t) {
            Err(Error::Coverage { missing, .. }) => {
                assert_eq!(missing, vec!["2/negative".to_string()]);
            }
            other => panic!("expected coverage error, got {other:?}"),
        }
    }

    #[test]
    fn accuracy_invariant_under_monotone_transform() {
        let pairs: Vec<MinimalPair> = (0..20).map(|i| pair(&i.to_string(), "c")).collect();
        let mut t = ScoreTable::new();
        let mut t2 = ScoreTable::new();
        for (i, p) in pairs.iter().enumerate() {
            let pos = (i as f64).sin() * 3.0;
            let neg = (i as f64).cos() * 2.0;
            t.insert(&p.id, Side::Positive, pos).unwrap();
            t.insert(&p.id, Side::Negative, neg).unwrap();
            // strictly monotone transform
            t2.insert(&p.id, Side::Positive, (pos * 0.5).exp()).unwrap();
            t2.insert(&p.id, Side::Negative, (neg * 0.5).exp()).unwrap();
        }
        assert_eq!(
            pair_accuracy(&pairs, &t).unwrap().overall,
            pair_accuracy(&pairs, &t2).unwrap().overall
        );
    }

    #[test]
    fn identical_sides_rejected() {
        assert!(MinimalPair::new("1", "c", "same", "same").is_err());
    }

    #[test]
    fn score_file_loading_edge_cases() {
        let dir = std::env::temp_dir().join(format!("dpparse-scores-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();

        let empty = dir.join("empty.tsv");
        std::fs::write(&empty, "").unwrap();
        let (table, warnings) = load_scores(&empty).unwrap();
        assert!(table.is_empty() && warnings.is_empty());

        let dup = dir.join("dup.tsv");
        std::fs::write(&dup, "a\tpositive\t1.0\na\tpositive\t2.0\n").unwrap();
        let (table, warnings) = load_scores(&dup).unwrap();
        assert_eq!(table.get("a", Side::Positive), Some(2.0));
        assert_eq!(warnings.len(), 1);

        let bad = dir.join("bad.tsv");
        std::fs::write(&bad, "a\tpositive\tnan\n").unwrap();
        assert!(matches!(
            load_scores(&bad),
            Err(Error::Parse { line: 1, .. })
        ));

        std::fs::remove_dir_all(&dir).ok();
    }
}
