//! Python bindings for the DP-Parse toolkit: corpus handling, segmentation,
//! n-gram scoring, BPE, and the benchmark/balancing utilities.

// pymethods-generated PyErr conversions trip useless_conversion
#![allow(clippy::useless_conversion)]

use std::collections::{BTreeMap, HashMap};

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dpparse::balance::{CandidateSet, CandidateWord};
use dpparse::bench::{self, PoolingFn, Side};
use dpparse::metrics::evaluate_corpus;
use dpparse::ngram::{Scorer, Smoothing};
use dpparse::segment::{DpParseConfig, IterationStats, SymbolPrior};
use dpparse::text::{self, AlphabetKind, TokenizationMode, UnitKind};

fn err(e: dpparse::Error) -> PyErr {
    match e {
        dpparse::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_kind(kind: &str) -> PyResult<AlphabetKind> {
    kind.parse().map_err(err)
}

/// A corpus of sentences with out-of-band word boundaries.
#[pyclass(name = "Corpus")]
#[derive(Clone)]
struct PyCorpus {
    inner: text::Corpus,
}

#[pymethods]
impl PyCorpus {
    /// Load a corpus file (`kind` is "char" or "phone").
    #[staticmethod]
    #[pyo3(signature = (path, kind, marker=None))]
    fn load(path: &str, kind: &str, marker: Option<&str>) -> PyResult<Self> {
        let corpus = text::Corpus::load(path, parse_kind(kind)?, marker).map_err(err)?;
        Ok(PyCorpus { inner: corpus })
    }

    /// Parse corpus text directly.
    #[staticmethod]
    #[pyo3(signature = (text, kind, marker=None))]
    fn parse(text: &str, kind: &str, marker: Option<&str>) -> PyResult<Self> {
        let corpus =
            text::Corpus::parse_str(text, parse_kind(kind)?, marker, "<python>").map_err(err)?;
        Ok(PyCorpus { inner: corpus })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().as_str()
    }

    #[getter]
    fn symbol_count(&self) -> u64 {
        self.inner.meta().symbol_count
    }

    #[getter]
    fn alphabet_size(&self) -> usize {
        self.inner.alphabet().len()
    }

    #[getter]
    fn boundaries_visible(&self) -> bool {
        self.inner.boundaries_visible()
    }

    /// Hide boundaries from models (evaluation still sees them).
    fn strip_boundaries(&self) -> Self {
        PyCorpus {
            inner: self.inner.strip_boundaries(),
        }
    }

    fn restore_boundaries(&self) -> Self {
        PyCorpus {
            inner: self.inner.restore_boundaries(),
        }
    }

    /// Boundary positions of one sentence.
    fn boundaries(&self, index: usize) -> PyResult<Vec<usize>> {
        self.inner
            .sentences()
            .get(index)
            .map(|s| s.boundaries().to_vec())
            .ok_or_else(|| PyValueError::new_err(format!("sentence {index} out of range")))
    }

    /// Render the corpus back to its file format.
    #[pyo3(signature = (marker=None))]
    fn render(&self, marker: Option<&str>) -> PyResult<String> {
        self.inner.render(marker).map_err(err)
    }

    #[pyo3(signature = (path, marker=None))]
    fn write(&self, path: &str, marker: Option<&str>) -> PyResult<()> {
        self.inner.write(path, marker).map_err(err)
    }

    /// Frequency-ranked word lexicon (needs visible boundaries).
    fn word_lexicon(&self, cap: usize) -> PyResult<Vec<(String, u64)>> {
        let lexicon = text::build_word_lexicon(&self.inner, cap).map_err(err)?;
        Ok(lexicon.entries().to_vec())
    }
}

#[allow(clippy::too_many_arguments)]
fn build_config(
    alpha0: f64,
    p_hash: f64,
    beam: usize,
    max_token_len: usize,
    init_max_len: usize,
    iters: usize,
    min_improvement: f64,
    seed: u64,
    symbol_prior: &str,
    invert_beam: bool,
) -> PyResult<DpParseConfig> {
    let symbol_prior = match symbol_prior {
        "empirical" => SymbolPrior::Empirical,
        "uniform" => SymbolPrior::Uniform,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown symbol prior `{other}`"
            )))
        }
    };
    let config = DpParseConfig {
        concentration: alpha0,
        word_end_prob: p_hash,
        beam_width: beam,
        max_token_len,
        init_max_len,
        max_iters: iters,
        min_nll_improvement: min_improvement,
        seed,
        symbol_prior,
        invert_beam,
    };
    config.validate().map_err(err)?;
    Ok(config)
}

/// Result of a DP-Parse run.
#[pyclass(name = "Segmentation")]
struct PySegmentation {
    #[pyo3(get)]
    corpus: PyCorpus,
    #[pyo3(get)]
    sampled: PyCorpus,
    #[pyo3(get)]
    best_iteration: usize,
    stats: Vec<IterationStats>,
}

#[pymethods]
impl PySegmentation {
    /// Per-iteration records as dicts.
    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.stats
            .iter()
            .map(|s| {
                let d = PyDict::new_bound(py);
                d.set_item("iteration", s.iteration)?;
                d.set_item("corpus_nll", s.corpus_nll)?;
                d.set_item("lexicon_size", s.lexicon_size)?;
                d.set_item("token_count", s.token_count)?;
                Ok(d)
            })
            .collect()
    }
}

/// Run DP-Parse on a corpus (its boundaries are ignored) and return the
/// decoded segmentation plus training stats.
#[pyfunction]
#[pyo3(signature = (corpus, alpha0=20.0, p_hash=0.5, beam=10, max_token_len=20,
                    init_max_len=20, iters=10, min_improvement=0.0, seed=0,
                    symbol_prior="empirical", invert_beam=false))]
#[allow(clippy::too_many_arguments)]
fn segment(
    corpus: &PyCorpus,
    alpha0: f64,
    p_hash: f64,
    beam: usize,
    max_token_len: usize,
    init_max_len: usize,
    iters: usize,
    min_improvement: f64,
    seed: u64,
    symbol_prior: &str,
    invert_beam: bool,
) -> PyResult<PySegmentation> {
    let config = build_config(
        alpha0,
        p_hash,
        beam,
        max_token_len,
        init_max_len,
        iters,
        min_improvement,
        seed,
        symbol_prior,
        invert_beam,
    )?;
    let input = corpus.inner.strip_boundaries();
    let result = dpparse::segment::run(&input, &config).map_err(err)?;
    let decoded =
        dpparse::segment::segment_with_model(&input, &result.model, &config).map_err(err)?;
    Ok(PySegmentation {
        corpus: PyCorpus { inner: decoded },
        sampled: PyCorpus {
            inner: result.corpus,
        },
        best_iteration: result.best_iteration,
        stats: result.stats,
    })
}

/// Token and boundary precision/recall/F1 between two corpora.
#[pyfunction]
fn evaluate_segmentation<'py>(
    py: Python<'py>,
    gold: &PyCorpus,
    predicted: &PyCorpus,
) -> PyResult<Bound<'py, PyDict>> {
    let eval = evaluate_corpus(&gold.inner, &predicted.inner).map_err(err)?;
    let out = PyDict::new_bound(py);
    for (name, prf) in [("token", eval.token), ("boundary", eval.boundary)] {
        let d = PyDict::new_bound(py);
        d.set_item("precision", prf.precision)?;
        d.set_item("recall", prf.recall)?;
        d.set_item("f1", prf.f1)?;
        out.set_item(name, d)?;
    }
    Ok(out)
}

/// A trained unigram or bigram language model.
#[pyclass(name = "NGramModel")]
struct PyNGramModel {
    inner: dpparse::ngram::NGramModel,
}

#[pymethods]
impl PyNGramModel {
    /// Train on a corpus. `units` is one of char, phone, word,
    /// word-fallback.
    #[staticmethod]
    #[pyo3(signature = (corpus, order=2, units="char", cap=None, keep_space=false, smoothing_k=None))]
    fn train(
        corpus: &PyCorpus,
        order: u8,
        units: &str,
        cap: Option<usize>,
        keep_space: bool,
        smoothing_k: Option<f64>,
    ) -> PyResult<Self> {
        let units = match units {
            "char" => UnitKind::Char,
            "phone" => UnitKind::Phone,
            "word" => UnitKind::Word {
                cap: cap.unwrap_or(40_000),
            },
            "word-fallback" | "word_fallback" => UnitKind::WordFallback {
                cap: cap.unwrap_or(20_000),
            },
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown unit mode `{other}`"
                )))
            }
        };
        let smoothing = smoothing_k
            .map(Smoothing::AddK)
            .unwrap_or_else(|| Smoothing::default_for(units));
        let mode = TokenizationMode::new(units).with_space_marker(keep_space);
        let model =
            dpparse::ngram::train(&corpus.inner, order, mode, smoothing, None).map_err(err)?;
        Ok(PyNGramModel { inner: model })
    }

    #[getter]
    fn order(&self) -> u8 {
        self.inner.order()
    }

    #[getter]
    fn vocab_size(&self) -> usize {
        self.inner.vocab_size()
    }

    /// Chain-rule log probability of a pre-tokenized unit sequence.
    fn log_prob(&self, units: Vec<String>) -> PyResult<f64> {
        self.inner.log_prob(&units).map_err(err)
    }

    /// Score raw text under the model's own tokenization mode.
    fn score_text(&self, text: &str) -> PyResult<f64> {
        self.inner.score_text(text).map_err(err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyNGramModel {
            inner: dpparse::ngram::NGramModel::load(path).map_err(err)?,
        })
    }
}

/// A learned BPE vocabulary.
#[pyclass(name = "BpeModel")]
struct PyBpeModel {
    inner: dpparse::bpe::BpeModel,
    kind: AlphabetKind,
}

impl PyBpeModel {
    fn word_symbols(&self, word: &str) -> Vec<String> {
        match self.kind {
            AlphabetKind::Character => word.chars().map(|c| c.to_string()).collect(),
            AlphabetKind::Phoneme => word.split_whitespace().map(str::to_string).collect(),
        }
    }
}

#[pymethods]
impl PyBpeModel {
    /// Learn merges until the unit inventory reaches `target`.
    #[staticmethod]
    fn learn(corpus: &PyCorpus, target: usize) -> PyResult<Self> {
        let model = dpparse::bpe::learn(&corpus.inner, target).map_err(err)?;
        Ok(PyBpeModel {
            inner: model,
            kind: corpus.inner.kind(),
        })
    }

    #[getter]
    fn vocab_size(&self) -> usize {
        self.inner.vocab_size()
    }

    #[getter]
    fn merge_count(&self) -> usize {
        self.inner.merges().len()
    }

    /// Encode one word into unit surfaces.
    fn encode_word(&self, word: &str) -> PyResult<Vec<String>> {
        let symbols = self.word_symbols(word);
        let units = self.inner.encode_surfaces(&symbols).map_err(err)?;
        Ok(units
            .into_iter()
            .map(|u| self.inner.unit_surface(u).unwrap_or("?").to_string())
            .collect())
    }

    /// Expand unit surfaces back into the word they encode.
    fn decode_units(&self, units: Vec<String>) -> String {
        match self.kind {
            AlphabetKind::Character => units.concat(),
            AlphabetKind::Phoneme => units.join(" "),
        }
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(err)
    }

    /// Load a merges file, bound to the corpus's alphabet.
    #[staticmethod]
    fn load(path: &str, corpus: &PyCorpus) -> PyResult<Self> {
        let model = dpparse::bpe::BpeModel::load(path, corpus.inner.alphabet()).map_err(err)?;
        Ok(PyBpeModel {
            inner: model,
            kind: corpus.inner.kind(),
        })
    }
}

/// Spearman's rank correlation (average ranks for ties).
#[pyfunction]
fn spearman(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<f64> {
    bench::spearman(&xs, &ys).map_err(err)
}

/// Cosine similarity (zero vectors compare as 0).
#[pyfunction]
fn cosine(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    bench::cosine(&u, &v).map_err(err)
}

/// Element-wise pooling ("mean", "max", or "min") across vectors.
#[pyfunction]
fn pool(vectors: Vec<Vec<f64>>, pooling: &str) -> PyResult<Vec<f64>> {
    let f = match pooling {
        "mean" => PoolingFn::Mean,
        "max" => PoolingFn::Max,
        "min" => PoolingFn::Min,
        other => return Err(PyValueError::new_err(format!("unknown pooling `{other}`"))),
    };
    bench::pool(&vectors, f).map_err(err)
}

/// Spot-the-word accuracy: pairs are `(id, category, positive, negative)`,
/// scores map `(id, "positive"|"negative")` to a float. Ties count half.
#[pyfunction]
fn pair_accuracy(
    pairs: Vec<(String, String, String, String)>,
    scores: HashMap<(String, String), f64>,
) -> PyResult<(f64, BTreeMap<String, f64>)> {
    let pairs: Vec<bench::MinimalPair> = pairs
        .into_iter()
        .map(|(id, cat, pos, neg)| bench::MinimalPair::new(id, cat, pos, neg).map_err(err))
        .collect::<PyResult<_>>()?;
    let mut table = bench::ScoreTable::new();
    for ((id, side), score) in scores {
        let side: Side = side.parse().map_err(err)?;
        table.insert(id, side, score).map_err(err)?;
    }
    let acc = bench::pair_accuracy(&pairs, &table).map_err(err)?;
    Ok((acc.overall, acc.per_category))
}

type BalancedRows = Vec<(String, String, String)>;

/// Balance a pWUGGY candidate pool against n-gram scorers. `words` rows are
/// `(word, stratum, candidates)`; returns `(pairs, objective)` where each
/// pair is `(word, nonword, stratum)`.
#[pyfunction]
fn balance_wuggy(
    py: Python<'_>,
    words: Vec<(String, String, Vec<String>)>,
    scorers: Vec<Py<PyNGramModel>>,
    seed: u64,
) -> PyResult<(BalancedRows, f64)> {
    let set = CandidateSet::new(
        words
            .into_iter()
            .map(|(word, stratum, candidates)| CandidateWord {
                word,
                stratum,
                candidates,
            })
            .collect(),
    )
    .map_err(err)?;
    let borrowed: Vec<PyRef<'_, PyNGramModel>> = scorers.iter().map(|m| m.borrow(py)).collect();
    let refs: Vec<&dyn Scorer> = borrowed.iter().map(|m| &m.inner as &dyn Scorer).collect();
    let selection = dpparse::balance::balance_wuggy(&set, &refs, seed).map_err(err)?;
    Ok((
        selection
            .pairs
            .into_iter()
            .map(|p| (p.word, p.nonword, p.stratum))
            .collect(),
        selection.objective,
    ))
}

/// Select the (layer, pooling) cell that best explains the dev set and
/// report test correlations from that cell.
#[pyfunction]
fn psimi_eval<'py>(
    py: Python<'py>,
    dev: Vec<(String, String, f64)>,
    tests: BTreeMap<String, Vec<(String, String, f64)>>,
    embeddings_path: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let to_items = |rows: Vec<(String, String, f64)>| -> PyResult<Vec<bench::SimilarityItem>> {
        rows.into_iter()
            .map(|(a, b, s)| bench::SimilarityItem::new(a, b, s).map_err(err))
            .collect()
    };
    let dev = to_items(dev)?;
    let tests: Vec<(String, Vec<bench::SimilarityItem>)> = tests
        .into_iter()
        .map(|(name, rows)| Ok((name, to_items(rows)?)))
        .collect::<PyResult<_>>()?;
    let embeddings = bench::load_embeddings(embeddings_path).map_err(err)?;
    let report = bench::psimi_eval(&dev, &tests, &embeddings).map_err(err)?;
    let out = PyDict::new_bound(py);
    out.set_item("layer", report.layer)?;
    out.set_item("pooling", report.pooling.as_str())?;
    out.set_item("dev_rho", report.dev_rho)?;
    out.set_item("test_rhos", report.test_rhos)?;
    Ok(out)
}

#[pymodule]
fn dpparse_py(_py: Python<'_>, m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCorpus>()?;
    m.add_class::<PySegmentation>()?;
    m.add_class::<PyNGramModel>()?;
    m.add_class::<PyBpeModel>()?;
    m.add_function(wrap_pyfunction!(segment, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_segmentation, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(cosine, m)?)?;
    m.add_function(wrap_pyfunction!(pool, m)?)?;
    m.add_function(wrap_pyfunction!(pair_accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(balance_wuggy, m)?)?;
    m.add_function(wrap_pyfunction!(psimi_eval, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
