//! Command-line front end for DP-Parse segmentation and its evaluation
//! harness.

mod commands;
mod pipeline;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "dpparse",
    version,
    about = "Unsupervised word segmentation, n-gram baselines, and minimal-pair benchmarks"
)]
struct Cli {
    /// Worker threads for parallel sections (0 = all cores).
    #[arg(long, global = true, default_value_t = 0, env = "DPPARSE_THREADS")]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub(crate) struct SeedArg {
    /// Seed for all randomized stages.
    #[arg(long, default_value_t = 0, env = "DPPARSE_SEED")]
    pub seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Train DP-Parse on a boundary-free corpus and write the segmentation.
    Segment(commands::SegmentArgs),
    /// Token/boundary P/R/F between a gold and a predicted corpus.
    EvalSeg(commands::EvalSegArgs),
    /// Train a unigram or bigram model over a tokenization mode.
    TrainNgram(commands::TrainNgramArgs),
    /// Score lines of text with a trained n-gram model (TSV id/logprob).
    Score(commands::ScoreArgs),
    /// Learn a BPE vocabulary from a boundary-annotated corpus.
    LearnBpe(commands::LearnBpeArgs),
    /// Encode a corpus with a learned BPE model.
    ApplyBpe(commands::ApplyBpeArgs),
    /// Spot-the-word accuracy over minimal pairs.
    BenchWuggy(commands::BenchPairsArgs),
    /// Sentence-acceptability accuracy over minimal pairs.
    BenchBlimp(commands::BenchPairsArgs),
    /// Semantic-similarity correlation from external embeddings.
    BenchSimi(commands::BenchSimiArgs),
    /// Balance a benchmark set so baseline scorers sit at chance.
    Balance(commands::BalanceArgs),
    /// strip -> segment -> train-ngram -> bench-*, end to end.
    Pipeline(pipeline::PipelineArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = if cli.threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        cli.threads
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
    {
        eprintln!("error: building thread pool: {e}");
        return ExitCode::from(1);
    }

    let result = match cli.command {
        Command::Segment(args) => commands::segment(args),
        Command::EvalSeg(args) => commands::eval_seg(args),
        Command::TrainNgram(args) => commands::train_ngram(args),
        Command::Score(args) => commands::score(args),
        Command::LearnBpe(args) => commands::learn_bpe(args),
        Command::ApplyBpe(args) => commands::apply_bpe(args),
        Command::BenchWuggy(args) => commands::bench_pairs("bench-wuggy", args),
        Command::BenchBlimp(args) => commands::bench_pairs("bench-blimp", args),
        Command::BenchSimi(args) => commands::bench_simi(args),
        Command::Balance(args) => commands::balance(args),
        Command::Pipeline(args) => pipeline::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            println!(
                "{}",
                serde_json::json!({ "error": { "message": format!("{e:#}") } })
            );
            ExitCode::from(1)
        }
    }
}
