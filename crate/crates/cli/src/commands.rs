//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde_json::json;

use dpparse::balance::{balance_blimp, balance_wuggy, CandidateSet};
use dpparse::bench::{
    load_embeddings, load_pairs, load_scores, load_similarity, pair_accuracy, psimi_eval,
    MinimalPair, ScoreTable, Side,
};
use dpparse::bpe::BpeModel;
use dpparse::metrics::{evaluate_corpus, CorpusEval};
use dpparse::ngram::{NGramModel, Scorer, Smoothing};
use dpparse::segment::{segment_with_model, DpParseConfig, SymbolPrior};
use dpparse::text::{AlphabetKind, Corpus, TokenizationMode, UnitKind};

use crate::report::{print_table, Report};
use crate::SeedArg;

pub(crate) fn parse_kind(kind: &str) -> Result<AlphabetKind> {
    kind.parse::<AlphabetKind>()
        .map_err(|e| anyhow::anyhow!("{e}"))
}

/// DP-Parse hyperparameters shared by `segment` and `pipeline`.
#[derive(Args, Clone, serde::Serialize)]
pub struct DpFlags {
    /// Concentration of the Chinese-restaurant process.
    #[arg(long, default_value_t = 20.0)]
    pub alpha0: f64,
    /// Word-end probability of the base distribution.
    #[arg(long = "p-hash", default_value_t = 0.5)]
    pub p_hash: f64,
    /// N-best beam width.
    #[arg(long, default_value_t = 10)]
    pub beam: usize,
    #[arg(long = "max-token-len", default_value_t = 20)]
    pub max_token_len: usize,
    #[arg(long = "init-max-len", default_value_t = 20)]
    pub init_max_len: usize,
    /// Maximum number of training iterations.
    #[arg(long = "iters", default_value_t = 10)]
    pub iters: usize,
    /// Required NLL improvement over the best iteration so far.
    #[arg(long = "min-improvement", default_value_t = 0.0)]
    pub min_improvement: f64,
    /// Per-symbol base probabilities: empirical or uniform.
    #[arg(long = "symbol-dist", default_value = "empirical")]
    pub symbol_dist: String,
    /// Keep the least probable parses instead of the best (comparison runs).
    #[arg(long = "invert-beam", default_value_t = false)]
    pub invert_beam: bool,
}

impl DpFlags {
    pub fn to_config(&self, seed: u64) -> Result<DpParseConfig> {
        let symbol_prior = match self.symbol_dist.as_str() {
            "empirical" => SymbolPrior::Empirical,
            "uniform" => SymbolPrior::Uniform,
            other => bail!("unknown symbol distribution `{other}`"),
        };
        let config = DpParseConfig {
            concentration: self.alpha0,
            word_end_prob: self.p_hash,
            beam_width: self.beam,
            max_token_len: self.max_token_len,
            init_max_len: self.init_max_len,
            max_iters: self.iters,
            min_nll_improvement: self.min_improvement,
            seed,
            symbol_prior,
            invert_beam: self.invert_beam,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
pub struct SegmentArgs {
    /// Corpus to segment (boundaries, if present, are ignored for training).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "char")]
    kind: String,
    /// Boundary marker (default: space for char, `|` for phone).
    #[arg(long)]
    marker: Option<String>,
    #[command(flatten)]
    dp: DpFlags,
    #[command(flatten)]
    seed: SeedArg,
    /// Where the segmented corpus is written; iteration stats go to
    /// `<output>.stats.json`.
    #[arg(long)]
    output: PathBuf,
}

pub fn segment(args: SegmentArgs) -> Result<()> {
    let kind = parse_kind(&args.kind)?;
    let config = args.dp.to_config(args.seed.seed)?;
    let corpus = Corpus::load(&args.input, kind, args.marker.as_deref())?.strip_boundaries();
    let result = dpparse::segment::run(&corpus, &config)?;
    let decoded = segment_with_model(&corpus, &result.model, &config)?;
    decoded.write(&args.output, args.marker.as_deref())?;

    let stats = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "seed": config.seed,
        "config": config,
        "input": crate::report::sha256_file(&args.input)?,
        "best_iteration": result.best_iteration,
        "iterations": result.stats,
        "lexicon_size": result.model.lexicon.len(),
        "token_count": result.model.lexicon.total(),
    });
    let stats_path = sidecar(&args.output, "stats.json");
    fs::write(
        &stats_path,
        format!("{}\n", serde_json::to_string_pretty(&stats)?),
    )
    .with_context(|| format!("writing {}", stats_path.display()))?;

    print_table(
        "segmentation",
        &[
            ("sentences".into(), decoded.len().to_string()),
            ("iterations".into(), result.stats.len().to_string()),
            ("best iteration".into(), result.best_iteration.to_string()),
            (
                "lexicon size".into(),
                result.model.lexicon.len().to_string(),
            ),
            ("output".into(), args.output.display().to_string()),
        ],
    );
    Report::new("segment")
        .seed(config.seed)
        .config(&config)?
        .input(&args.input)?
        .results(json!({
            "best_iteration": result.best_iteration,
            "iterations": result.stats,
            "lexicon_size": result.model.lexicon.len(),
            "output": args.output.display().to_string(),
            "stats": stats_path.display().to_string(),
        }))?
        .emit(None)
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(".");
    name.push(suffix);
    path.with_file_name(name)
}

#[derive(Args)]
pub struct EvalSegArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    predicted: PathBuf,
    #[arg(long, default_value = "char")]
    kind: String,
    #[arg(long)]
    marker: Option<String>,
}

pub fn eval_seg(args: EvalSegArgs) -> Result<()> {
    let kind = parse_kind(&args.kind)?;
    let gold = Corpus::load(&args.gold, kind, args.marker.as_deref())?;
    let predicted = Corpus::load(&args.predicted, kind, args.marker.as_deref())?;
    let eval = evaluate_corpus(&gold, &predicted)?;

    print_table(
        "segmentation scores",
        &[
            ("token P/R/F".into(), prf_line(&eval, true)),
            ("boundary P/R/F".into(), prf_line(&eval, false)),
        ],
    );
    Report::new("eval-seg")
        .config(json!({ "kind": kind.as_str(), "marker": args.marker }))?
        .input(&args.gold)?
        .input(&args.predicted)?
        .results(eval_json(&eval))?
        .emit(None)
}

pub(crate) fn eval_json(eval: &CorpusEval) -> serde_json::Value {
    let pct = |x: f64| (x * 10_000.0).round() / 100.0;
    json!({
        "token": { "p": eval.token.precision, "r": eval.token.recall, "f": eval.token.f1 },
        "boundary": { "p": eval.boundary.precision, "r": eval.boundary.recall, "f": eval.boundary.f1 },
        "token_pct": { "p": pct(eval.token.precision), "r": pct(eval.token.recall), "f": pct(eval.token.f1) },
        "boundary_pct": { "p": pct(eval.boundary.precision), "r": pct(eval.boundary.recall), "f": pct(eval.boundary.f1) },
        "counts": eval.counts,
    })
}

pub(crate) fn prf_line(eval: &CorpusEval, token: bool) -> String {
    let p = if token { eval.token } else { eval.boundary };
    format!(
        "{:.2} / {:.2} / {:.2}",
        p.precision * 100.0,
        p.recall * 100.0,
        p.f1 * 100.0
    )
}

#[derive(Args)]
pub struct TrainNgramArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "char")]
    kind: String,
    #[arg(long)]
    marker: Option<String>,
    /// Model order: 1 (unigram) or 2 (bigram).
    #[arg(long, default_value_t = 2)]
    order: u8,
    /// Units: char, phone, word, word-fallback, or bpe.
    #[arg(long, default_value = "char")]
    mode: String,
    /// Lexicon cap for word modes.
    #[arg(long)]
    cap: Option<usize>,
    /// Keep a `<SPACE>` unit at word boundaries (symbol/BPE modes).
    #[arg(long = "keep-space", default_value_t = false)]
    keep_space: bool,
    /// Add-k smoothing constant (defaults depend on the unit mode).
    #[arg(long = "smoothing-k")]
    smoothing_k: Option<f64>,
    /// BPE model file (required for --mode bpe).
    #[arg(long = "bpe-model")]
    bpe_model: Option<PathBuf>,
    /// Model output path (`.bin` selects the binary format).
    #[arg(long)]
    out: PathBuf,
}

pub(crate) fn parse_units(mode: &str, cap: Option<usize>) -> Result<UnitKind> {
    Ok(match mode {
        "char" => UnitKind::Char,
        "phone" => UnitKind::Phone,
        "word" => UnitKind::Word {
            cap: cap.unwrap_or(40_000),
        },
        "word-fallback" | "word_fallback" => UnitKind::WordFallback {
            cap: cap.unwrap_or(20_000),
        },
        "bpe" => UnitKind::Bpe,
        other => bail!("unknown unit mode `{other}`"),
    })
}

pub fn train_ngram(args: TrainNgramArgs) -> Result<()> {
    let kind = parse_kind(&args.kind)?;
    let units = parse_units(&args.mode, args.cap)?;
    let corpus = Corpus::load(&args.input, kind, args.marker.as_deref())?;
    let bpe = match (&args.bpe_model, units) {
        (Some(path), UnitKind::Bpe) => Some(BpeModel::load(path, corpus.alphabet())?),
        (None, UnitKind::Bpe) => bail!("--mode bpe needs --bpe-model"),
        _ => None,
    };
    let smoothing = args
        .smoothing_k
        .map(Smoothing::AddK)
        .unwrap_or_else(|| Smoothing::default_for(units));
    let mode = TokenizationMode::new(units).with_space_marker(args.keep_space);
    let model = dpparse::ngram::train(&corpus, args.order, mode, smoothing, bpe.as_ref())?;
    model.save(&args.out)?;

    print_table(
        "n-gram model",
        &[
            ("order".into(), model.order().to_string()),
            ("units".into(), model.units().as_str().to_string()),
            ("vocab".into(), model.vocab_size().to_string()),
            ("smoothing k".into(), model.smoothing_k().to_string()),
            ("output".into(), args.out.display().to_string()),
        ],
    );
    let mut report = Report::new("train-ngram")
        .config(json!({
            "kind": kind.as_str(),
            "order": args.order,
            "mode": args.mode,
            "cap": args.cap,
            "keep_space": args.keep_space,
            "smoothing_k": smoothing.k(),
        }))?
        .input(&args.input)?;
    if let Some(p) = &args.bpe_model {
        report = report.input(p)?;
    }
    report
        .results(json!({
            "vocab_size": model.vocab_size(),
            "output": args.out.display().to_string(),
        }))?
        .emit(None)
}

#[derive(Args)]
pub struct ScoreArgs {
    /// Trained n-gram model (TSV or binary).
    #[arg(long)]
    model: PathBuf,
    /// Lines of `id<TAB>text` (or bare text; ids default to line numbers).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    marker: Option<String>,
    #[arg(long = "bpe-model")]
    bpe_model: Option<PathBuf>,
    /// Write the TSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn score(args: ScoreArgs) -> Result<()> {
    let model = NGramModel::load(&args.model)?;
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let bpe = load_bpe_for(&args.bpe_model, &model, &text, args.marker.as_deref())?;

    let mut tsv = String::new();
    let mut n = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let (id, body) = match line.split_once('\t') {
            Some((id, body)) => (id.to_string(), body),
            None => ((lineno + 1).to_string(), line),
        };
        let lp = model.score_text_with(body, args.marker.as_deref(), bpe.as_ref())?;
        tsv.push_str(&format!("{id}\t{lp}\n"));
        n += 1;
    }
    match &args.out {
        Some(path) => {
            fs::write(path, &tsv).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{tsv}"),
    }

    let mut report = Report::new("score")
        .config(json!({ "model": args.model.display().to_string(), "marker": args.marker }))?
        .input(&args.model)?
        .input(&args.input)?;
    if let Some(p) = &args.bpe_model {
        report = report.input(p)?;
    }
    report
        .results(json!({
            "scored": n,
            "out": args.out.as_ref().map(|p| p.display().to_string()),
        }))?
        .emit(None)
}

/// BPE-mode models score raw text, so the BPE model must be bound to an
/// alphabet covering that text.
fn load_bpe_for(
    path: &Option<PathBuf>,
    model: &NGramModel,
    text: &str,
    marker: Option<&str>,
) -> Result<Option<BpeModel>> {
    let Some(path) = path else {
        if model.units() == UnitKind::Bpe {
            bail!("this model needs --bpe-model to encode its input");
        }
        return Ok(None);
    };
    let stripped: String = text
        .lines()
        .filter_map(|l| l.split_once('\t').map(|(_, b)| b).or(Some(l)))
        .collect::<Vec<_>>()
        .join("\n");
    let corpus = Corpus::parse_str(&stripped, model.kind(), marker, "<score-input>")?;
    Ok(Some(BpeModel::load(path, corpus.alphabet())?))
}

#[derive(Args)]
pub struct LearnBpeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "char")]
    kind: String,
    #[arg(long)]
    marker: Option<String>,
    /// Total unit inventory to reach (base symbols plus merges).
    #[arg(long, default_value_t = 20_000)]
    target: usize,
    #[arg(long)]
    out: PathBuf,
}

pub fn learn_bpe(args: LearnBpeArgs) -> Result<()> {
    let kind = parse_kind(&args.kind)?;
    let corpus = Corpus::load(&args.input, kind, args.marker.as_deref())?;
    let model = dpparse::bpe::learn(&corpus, args.target)?;
    model.save(&args.out)?;
    print_table(
        "bpe model",
        &[
            ("base symbols".into(), model.base_len().to_string()),
            ("merges".into(), model.merges().len().to_string()),
            ("vocab".into(), model.vocab_size().to_string()),
            ("output".into(), args.out.display().to_string()),
        ],
    );
    Report::new("learn-bpe")
        .config(json!({ "kind": kind.as_str(), "target": args.target }))?
        .input(&args.input)?
        .results(json!({
            "base": model.base_len(),
            "merges": model.merges().len(),
            "vocab": model.vocab_size(),
            "output": args.out.display().to_string(),
        }))?
        .emit(None)
}

#[derive(Args)]
pub struct ApplyBpeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "char")]
    kind: String,
    #[arg(long)]
    marker: Option<String>,
    #[arg(long)]
    output: PathBuf,
}

pub fn apply_bpe(args: ApplyBpeArgs) -> Result<()> {
    let kind = parse_kind(&args.kind)?;
    let corpus = Corpus::load(&args.input, kind, args.marker.as_deref())?;
    let model = BpeModel::load(&args.model, corpus.alphabet())?;
    let mut out = String::new();
    let mut units_emitted = 0usize;
    for sentence in corpus.sentences() {
        let mut words = Vec::new();
        for (a, b) in sentence.spans() {
            let units = model.encode(&sentence.symbols()[a..b])?;
            units_emitted += units.len();
            let rendered: Vec<String> = units
                .iter()
                .map(|&u| {
                    let s = model.unit_surface(u).expect("encoded unit");
                    match kind {
                        AlphabetKind::Character => s.to_string(),
                        AlphabetKind::Phoneme => s.replace(' ', "_"),
                    }
                })
                .collect();
            words.push(rendered.join(" "));
        }
        out.push_str(&words.join(" | "));
        out.push('\n');
    }
    fs::write(&args.output, out).with_context(|| format!("writing {}", args.output.display()))?;
    print_table(
        "bpe encoding",
        &[
            ("sentences".into(), corpus.len().to_string()),
            ("units".into(), units_emitted.to_string()),
            ("output".into(), args.output.display().to_string()),
        ],
    );
    Report::new("apply-bpe")
        .config(json!({ "kind": kind.as_str() }))?
        .input(&args.model)?
        .input(&args.input)?
        .results(json!({
            "sentences": corpus.len(),
            "units": units_emitted,
            "output": args.output.display().to_string(),
        }))?
        .emit(None)
}

#[derive(Args)]
pub struct BenchPairsArgs {
    /// TSV of `id<TAB>category<TAB>positive<TAB>negative`.
    #[arg(long)]
    pairs: PathBuf,
    /// Internal scorer, as `internal:<model-file>`.
    #[arg(long)]
    scorer: Option<String>,
    /// External score file `id<TAB>side<TAB>score`.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long = "bpe-model")]
    bpe_model: Option<PathBuf>,
    #[arg(long)]
    marker: Option<String>,
}

pub fn bench_pairs(command: &str, args: BenchPairsArgs) -> Result<()> {
    let pairs = load_pairs(&args.pairs)?;
    let mut report = Report::new(command)
        .config(json!({
            "pairs": args.pairs.display().to_string(),
            "scorer": args.scorer,
            "scores": args.scores.as_ref().map(|p| p.display().to_string()),
        }))?
        .input(&args.pairs)?;

    let table = match (&args.scorer, &args.scores) {
        (Some(scorer_arg), None) => {
            let path = scorer_arg
                .strip_prefix("internal:")
                .ok_or_else(|| anyhow::anyhow!("--scorer must look like internal:<model>"))?;
            report = report.input(path)?;
            let model = NGramModel::load(path)?;
            let bpe = match &args.bpe_model {
                Some(p) => {
                    let all_text: String = pairs
                        .iter()
                        .flat_map(|p| [p.positive.as_str(), p.negative.as_str()])
                        .collect::<Vec<_>>()
                        .join("\n");
                    let corpus = Corpus::parse_str(
                        &all_text,
                        model.kind(),
                        args.marker.as_deref(),
                        "<pairs>",
                    )?;
                    Some(BpeModel::load(p, corpus.alphabet())?)
                }
                None => None,
            };
            score_pairs(&pairs, &model, args.marker.as_deref(), bpe.as_ref())?
        }
        (None, Some(path)) => {
            report = report.input(path)?;
            let (table, warnings) = load_scores(path)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            table
        }
        _ => bail!("exactly one of --scorer or --scores is required"),
    };

    let accuracy = pair_accuracy(&pairs, &table)?;
    let mut rows = vec![
        ("pairs".to_string(), accuracy.n.to_string()),
        ("accuracy".to_string(), format!("{:.4}", accuracy.overall)),
    ];
    for (cat, acc) in &accuracy.per_category {
        rows.push((format!("  {cat}"), format!("{acc:.4}")));
    }
    print_table(command, &rows);
    report.results(&accuracy)?.emit(None)
}

pub(crate) fn score_pairs(
    pairs: &[MinimalPair],
    model: &NGramModel,
    marker: Option<&str>,
    bpe: Option<&BpeModel>,
) -> Result<ScoreTable> {
    let mut table = ScoreTable::new();
    for pair in pairs {
        table.insert(
            &pair.id,
            Side::Positive,
            model.score_text_with(&pair.positive, marker, bpe)?,
        )?;
        table.insert(
            &pair.id,
            Side::Negative,
            model.score_text_with(&pair.negative, marker, bpe)?,
        )?;
    }
    Ok(table)
}

#[derive(Args)]
pub struct BenchSimiArgs {
    /// Development set used to pick (layer, pooling).
    #[arg(long)]
    dev: PathBuf,
    /// Test sets, as `name=path` (repeatable).
    #[arg(long = "test")]
    tests: Vec<String>,
    /// Embedding file covering every word.
    #[arg(long)]
    embeddings: PathBuf,
}

pub fn bench_simi(args: BenchSimiArgs) -> Result<()> {
    let dev = load_similarity(&args.dev)?;
    let mut tests = Vec::new();
    let mut report = Report::new("bench-simi")
        .config(json!({
            "dev": args.dev.display().to_string(),
            "tests": args.tests,
            "embeddings": args.embeddings.display().to_string(),
        }))?
        .input(&args.dev)?
        .input(&args.embeddings)?;
    for entry in &args.tests {
        let (name, path) = entry
            .split_once('=')
            .ok_or_else(|| anyhow::anyhow!("--test must look like name=path"))?;
        report = report.input(path)?;
        tests.push((name.to_string(), load_similarity(path)?));
    }
    let embeddings = load_embeddings(&args.embeddings)?;
    let result = psimi_eval(&dev, &tests, &embeddings)?;

    let mut rows = vec![
        ("layer".to_string(), result.layer.to_string()),
        ("pooling".to_string(), result.pooling.as_str().to_string()),
        ("dev rho".to_string(), format!("{:.4}", result.dev_rho)),
    ];
    for (name, rho) in &result.test_rhos {
        rows.push((format!("  {name}"), format!("{rho:.4}")));
    }
    print_table("bench-simi", &rows);
    report.results(&result)?.emit(None)
}

#[derive(Args)]
pub struct BalanceArgs {
    /// pWUGGY candidates: `word<TAB>stratum<TAB>cand1,cand2,...`.
    #[arg(long, conflicts_with = "blimp_pairs")]
    candidates: Option<PathBuf>,
    /// pBLIMP pool to subsample instead (TSV pair file).
    #[arg(long = "blimp-pairs")]
    blimp_pairs: Option<PathBuf>,
    /// Pairs to keep per category in blimp mode.
    #[arg(long, short = 'k')]
    k: Option<usize>,
    /// N-gram model files used as balancing scorers (repeatable).
    #[arg(long = "scorer", required = true)]
    scorers: Vec<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
    /// Output TSV of selected pairs.
    #[arg(long)]
    out: PathBuf,
}

pub fn balance(args: BalanceArgs) -> Result<()> {
    let models: Vec<NGramModel> = args
        .scorers
        .iter()
        .map(|p| NGramModel::load(p).map_err(Into::into))
        .collect::<Result<_>>()?;
    let scorer_refs: Vec<&dyn Scorer> = models.iter().map(|m| m as &dyn Scorer).collect();

    let mut report = Report::new("balance").seed(args.seed.seed).config(json!({
        "candidates": args.candidates.as_ref().map(|p| p.display().to_string()),
        "blimp_pairs": args.blimp_pairs.as_ref().map(|p| p.display().to_string()),
        "k": args.k,
        "scorers": args.scorers.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    }))?;
    for p in &args.scorers {
        report = report.input(p)?;
    }

    match (&args.candidates, &args.blimp_pairs) {
        (Some(path), None) => {
            report = report.input(path)?;
            let set = CandidateSet::load(path)?;
            let selection = balance_wuggy(&set, &scorer_refs, args.seed.seed)?;
            let mut out = String::new();
            for pair in &selection.pairs {
                out.push_str(&format!(
                    "{}\t{}\t{}\n",
                    pair.word, pair.nonword, pair.stratum
                ));
            }
            fs::write(&args.out, out).with_context(|| format!("writing {}", args.out.display()))?;
            let mut rows = vec![
                ("pairs".to_string(), selection.pairs.len().to_string()),
                (
                    "objective".to_string(),
                    format!("{:.4}", selection.objective),
                ),
            ];
            for (stratum, rep) in &selection.per_stratum {
                rows.push((
                    format!("  {stratum}"),
                    format!("{} pairs, objective {:.4}", rep.pairs, rep.objective),
                ));
            }
            print_table("balance (spot-the-word)", &rows);
            report
                .results(json!({
                    "pairs": selection.pairs.len(),
                    "objective": selection.objective,
                    "per_stratum": selection.per_stratum,
                    "out": args.out.display().to_string(),
                }))?
                .emit(None)
        }
        (None, Some(path)) => {
            let k = args
                .k
                .ok_or_else(|| anyhow::anyhow!("blimp mode needs --k"))?;
            report = report.input(path)?;
            let pool = load_pairs(path)?;
            // balance each category independently, deterministically ordered
            let mut categories: Vec<String> = pool.iter().map(|p| p.category.clone()).collect();
            categories.sort();
            categories.dedup();
            let mut chosen = Vec::new();
            let mut objectives = std::collections::BTreeMap::new();
            for (idx, category) in categories.iter().enumerate() {
                let members: Vec<MinimalPair> = pool
                    .iter()
                    .filter(|p| &p.category == category)
                    .cloned()
                    .collect();
                let k_cat = k.min(members.len());
                let selection = balance_blimp(
                    &members,
                    &scorer_refs,
                    k_cat,
                    args.seed.seed.wrapping_add(idx as u64),
                )?;
                objectives.insert(category.clone(), selection.objective);
                chosen.extend(selection.chosen);
            }
            let mut out = String::new();
            for p in &chosen {
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\n",
                    p.id, p.category, p.positive, p.negative
                ));
            }
            fs::write(&args.out, out).with_context(|| format!("writing {}", args.out.display()))?;
            let mut rows = vec![("pairs".to_string(), chosen.len().to_string())];
            for (cat, obj) in &objectives {
                rows.push((format!("  {cat}"), format!("objective {obj:.4}")));
            }
            print_table("balance (acceptability subsets)", &rows);
            report
                .results(json!({
                    "pairs": chosen.len(),
                    "per_category_objective": objectives,
                    "out": args.out.display().to_string(),
                }))?
                .emit(None)
        }
        _ => bail!("exactly one of --candidates or --blimp-pairs is required"),
    }
}
