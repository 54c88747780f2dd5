//! End-to-end run: strip boundaries, segment, train an n-gram model on the
//! discovered units, and run whichever benchmarks inputs were provided for.
//! Benchmark strings are parsed with the trained segmentation model before
//! scoring, so the whole path never sees a gold boundary.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde_json::json;

use dpparse::bench::{
    load_embeddings, load_pairs, load_similarity, pair_accuracy, psimi_eval, MinimalPair,
    ScoreTable, Side,
};
use dpparse::metrics::evaluate_corpus;
use dpparse::ngram::Smoothing;
use dpparse::segment::{run as run_dpparse, segment_text, segment_with_model};
use dpparse::text::{build_word_lexicon, render_sentence, Corpus, TokenizationMode};

use crate::commands::{eval_json, parse_kind, parse_units, prf_line, DpFlags};
use crate::report::{print_table, Report};
use crate::SeedArg;

#[derive(Args)]
pub struct PipelineArgs {
    /// Boundary-annotated corpus; boundaries are stripped before training
    /// and used only to score the recovered segmentation.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "char")]
    kind: String,
    #[arg(long)]
    marker: Option<String>,
    #[command(flatten)]
    dp: DpFlags,
    #[command(flatten)]
    seed: SeedArg,
    /// Everything the pipeline produces lands here.
    #[arg(long = "out-dir")]
    out_dir: PathBuf,

    /// Order of the n-gram model trained on the discovered units.
    #[arg(long = "ngram-order", default_value_t = 2)]
    ngram_order: u8,
    /// Unit mode for that model (over the segmented corpus).
    #[arg(long = "ngram-units", default_value = "word")]
    ngram_units: String,
    #[arg(long, default_value_t = 40_000)]
    cap: usize,
    #[arg(long = "smoothing-k")]
    smoothing_k: Option<f64>,

    /// Spot-the-word pairs to evaluate with the trained model.
    #[arg(long = "wuggy-pairs")]
    wuggy_pairs: Option<PathBuf>,
    /// Acceptability pairs to evaluate with the trained model.
    #[arg(long = "blimp-pairs")]
    blimp_pairs: Option<PathBuf>,
    /// Similarity dev set (with --embeddings enables the semantic benchmark).
    #[arg(long = "simi-dev")]
    simi_dev: Option<PathBuf>,
    /// Similarity test sets, as `name=path` (repeatable).
    #[arg(long = "simi-test")]
    simi_tests: Vec<String>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
}

pub fn run(args: PipelineArgs) -> Result<()> {
    let kind = parse_kind(&args.kind)?;
    let config = args.dp.to_config(args.seed.seed)?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;

    let gold = Corpus::load(&args.input, kind, args.marker.as_deref())?;
    let input = gold.strip_boundaries();

    // 1. segment
    let result = run_dpparse(&input, &config)?;
    let predicted = segment_with_model(&input, &result.model, &config)?;
    let segmented_path = args.out_dir.join("segmented.txt");
    predicted.write(&segmented_path, args.marker.as_deref())?;
    let stats_path = args.out_dir.join("stats.json");
    fs::write(
        &stats_path,
        format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({
                "version": env!("CARGO_PKG_VERSION"),
                "seed": config.seed,
                "config": config,
                "best_iteration": result.best_iteration,
                "iterations": result.stats,
            }))?
        ),
    )?;

    // 2. score the recovered segmentation against the input boundaries
    let has_gold = gold.sentences().iter().any(|s| !s.boundaries().is_empty());
    let seg_eval = if has_gold {
        Some(evaluate_corpus(&gold, &predicted)?)
    } else {
        None
    };

    // 3. n-gram model over the discovered units
    let units = parse_units(&args.ngram_units, Some(args.cap))?;
    let smoothing = args
        .smoothing_k
        .map(Smoothing::AddK)
        .unwrap_or_else(|| Smoothing::default_for(units));
    let mode = TokenizationMode::new(units);
    let lm = dpparse::ngram::train(&predicted, args.ngram_order, mode, smoothing, None)?;
    let model_path = args.out_dir.join("ngram.tsv");
    lm.save(&model_path)?;
    let lexicon = build_word_lexicon(&predicted, args.cap)?;
    lexicon.write_tsv(args.out_dir.join("lexicon.tsv"))?;

    // 4. benchmarks over model-parsed strings
    let parse_and_score = |text: &str| -> Result<f64> {
        let sentence = segment_text(text, &result.model, input.alphabet(), &config)?;
        let marked = render_sentence(input.alphabet(), &sentence, args.marker.as_deref())?;
        Ok(lm.score_text_with(&marked, args.marker.as_deref(), None)?)
    };

    let mut bench_results = serde_json::Map::new();
    let mut rows: Vec<(String, String)> = Vec::new();
    if let Some(eval) = &seg_eval {
        rows.push(("token P/R/F".into(), prf_line(eval, true)));
        rows.push(("boundary P/R/F".into(), prf_line(eval, false)));
    }
    let mut run_pairs = |name: &str, path: &PathBuf| -> Result<serde_json::Value> {
        let pairs: Vec<MinimalPair> = load_pairs(path)?;
        let mut table = ScoreTable::new();
        for pair in &pairs {
            table.insert(&pair.id, Side::Positive, parse_and_score(&pair.positive)?)?;
            table.insert(&pair.id, Side::Negative, parse_and_score(&pair.negative)?)?;
        }
        let acc = pair_accuracy(&pairs, &table)?;
        rows.push((
            name.to_string(),
            format!("{:.4} ({} pairs)", acc.overall, acc.n),
        ));
        Ok(serde_json::to_value(acc)?)
    };
    if let Some(path) = &args.wuggy_pairs {
        let value = run_pairs("wuggy accuracy", path)?;
        bench_results.insert("wuggy".into(), value);
    }
    if let Some(path) = &args.blimp_pairs {
        let value = run_pairs("blimp accuracy", path)?;
        bench_results.insert("blimp".into(), value);
    }
    if let (Some(dev_path), Some(emb_path)) = (&args.simi_dev, &args.embeddings) {
        let dev = load_similarity(dev_path)?;
        let mut tests = Vec::new();
        for entry in &args.simi_tests {
            let (name, path) = entry
                .split_once('=')
                .ok_or_else(|| anyhow::anyhow!("--simi-test must look like name=path"))?;
            tests.push((name.to_string(), load_similarity(path)?));
        }
        let embeddings = load_embeddings(emb_path)?;
        let simi = psimi_eval(&dev, &tests, &embeddings)?;
        rows.push((
            "simi dev rho".into(),
            format!(
                "{:.4} (layer {}, {})",
                simi.dev_rho,
                simi.layer,
                simi.pooling.as_str()
            ),
        ));
        bench_results.insert("simi".into(), serde_json::to_value(&simi)?);
    }

    rows.push(("out dir".into(), args.out_dir.display().to_string()));
    print_table("pipeline", &rows);

    let mut report = Report::new("pipeline")
        .seed(config.seed)
        .config(json!({
            "kind": kind.as_str(),
            "dp": config,
            "ngram_order": args.ngram_order,
            "ngram_units": args.ngram_units,
            "cap": args.cap,
        }))?
        .input(&args.input)?;
    for path in [
        &args.wuggy_pairs,
        &args.blimp_pairs,
        &args.simi_dev,
        &args.embeddings,
    ]
    .into_iter()
    .flatten()
    {
        report = report.input(path)?;
    }
    report
        .results(json!({
            "segmentation": seg_eval.as_ref().map(eval_json),
            "best_iteration": result.best_iteration,
            "iterations": result.stats,
            "lexicon_size": result.model.lexicon.len(),
            "bench": bench_results,
            "files": {
                "segmented": segmented_path.display().to_string(),
                "stats": stats_path.display().to_string(),
                "ngram": model_path.display().to_string(),
            },
        }))?
        .emit(Some(&args.out_dir.join("report.json")))
}
