//! `kpgen`: preprocess, label, train, predict, evaluate and analyze.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use keyphrase_core::metrics::Stemmer;
use keyphrase_core::RunConfig;

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "kpgen",
    version,
    about = "Sentence-selective keyphrase generation pipeline"
)]
struct Cli {
    /// TOML or JSON run configuration; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tokenize raw title/abstract/keywords records and build the vocabulary.
    Preprocess(PreprocessArgs),
    /// Classify gold keyphrases and derive per-sentence weak labels.
    Label(LabelArgs),
    /// Corpus statistics over a labeled file.
    Stats(StatsArgs),
    /// Train the model; writes train_log.jsonl, best.ckpt and last.ckpt.
    Train(Box<TrainArgs>),
    /// Greedy-decode keyphrases with a checkpoint.
    Predict(PredictArgs),
    /// Score predictions against labeled gold data.
    Eval(EvalArgs),
    /// Compare two evaluation reports by sentence-count bucket.
    Analyze(AnalyzeArgs),
    /// Per-step attention under natural, all-significant and all-irrelevant gates.
    DumpAttention(DumpAttentionArgs),
}

#[derive(Args, Debug)]
struct PreprocessArgs {
    /// Raw JSON-lines input with "title", "abstract" and ";"-separated "keywords".
    #[arg(long)]
    input: PathBuf,
    /// Tokenized documents, one JSON object per line.
    #[arg(long)]
    output: PathBuf,
    /// Vocabulary size excluding reserved tokens [default: 50000].
    #[arg(long)]
    vocab_size: Option<usize>,
    /// Sources are cut at the last sentence boundary within this many tokens [default: 400].
    #[arg(long)]
    max_source_len: Option<usize>,
    /// Where to write the vocabulary JSON.
    #[arg(long)]
    vocab_out: PathBuf,
    /// Accept records without keywords (inference-only inputs).
    #[arg(long)]
    allow_unlabeled: bool,
}

#[derive(Args, Debug)]
struct LabelArgs {
    /// Preprocessed documents.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct StatsArgs {
    /// Labeled documents.
    #[arg(long)]
    input: PathBuf,
    /// JSON report path.
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Labeled training documents.
    #[arg(long)]
    data: PathBuf,
    /// Labeled validation documents.
    #[arg(long)]
    val: PathBuf,
    /// Vocabulary JSON written by `preprocess`.
    #[arg(long)]
    vocab: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Continue from a checkpoint written by an earlier run.
    #[arg(long, value_name = "CKPT")]
    resume: Option<PathBuf>,
    /// Weight of the sentence-selector loss [default: 0.08].
    #[arg(long)]
    lambda: Option<f64>,
    /// Seed for initialization and batch order [default: 1].
    #[arg(long)]
    seed: Option<u64>,
    /// Adam learning rate [default: 0.001].
    #[arg(long)]
    learning_rate: Option<f64>,
    /// [default: 16]
    #[arg(long)]
    batch_size: Option<usize>,
    /// [default: 20]
    #[arg(long)]
    epochs: Option<usize>,
    /// Global gradient-norm bound, 0 disables [default: 5.0].
    #[arg(long)]
    clip_norm: Option<f64>,
    /// Uniform initialization range [default: 0.1].
    #[arg(long)]
    init_range: Option<f64>,
    /// Validate every N epochs [default: 1].
    #[arg(long)]
    validation_interval: Option<usize>,
    /// Stop after N validations without improvement, 0 disables [default: 5].
    #[arg(long)]
    patience: Option<usize>,
    /// Word embedding width [default: 300].
    #[arg(long)]
    embed_dim: Option<usize>,
    /// Encoder/decoder state width, also the significance embedding width [default: 300].
    #[arg(long)]
    hidden_dim: Option<usize>,
    /// Convolution channels per kernel size [default: 100].
    #[arg(long)]
    cnn_channels: Option<usize>,
    /// Hidden width of the selector MLP [default: 100].
    #[arg(long)]
    selector_hidden: Option<usize>,
    /// Decoding step limit used during validation [default: 60].
    #[arg(long)]
    max_decode_len: Option<usize>,
    #[command(flatten)]
    matching: MatchArgs,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Preprocessed or labeled documents.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Override the checkpoint's decoding step limit.
    #[arg(long)]
    max_decode_len: Option<usize>,
    #[command(flatten)]
    matching: MatchArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Output of `predict`.
    #[arg(long)]
    pred: PathBuf,
    /// Labeled gold documents.
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    report: PathBuf,
    /// Number of sentence-count quantile buckets in the report.
    #[arg(long, default_value_t = 5)]
    buckets: usize,
    #[command(flatten)]
    matching: MatchArgs,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    baseline: PathBuf,
    #[arg(long)]
    treatment: PathBuf,
    /// Number of sentence-count quantile buckets.
    #[arg(long, default_value_t = 5)]
    buckets: usize,
    /// Explicit bucket edges such as `1,4,7,10,100`; overrides --buckets.
    #[arg(long, value_delimiter = ',')]
    edges: Option<Vec<usize>>,
    /// Write the analysis here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DumpAttentionArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Preprocessed or labeled documents.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Dump only documents with these ids (default: all).
    #[arg(long, value_delimiter = ',')]
    ids: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StemmerArg {
    None,
    Porter,
}

#[derive(Args, Debug)]
struct MatchArgs {
    /// Stemmer used for matching and deduplication [default: porter].
    #[arg(long, value_enum)]
    stemmer: Option<StemmerArg>,
    /// Compare phrases case-sensitively.
    #[arg(long)]
    case_sensitive: bool,
}

impl MatchArgs {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(s) = self.stemmer {
            config.matching.stemmer = match s {
                StemmerArg::None => Stemmer::None,
                StemmerArg::Porter => Stemmer::Porter,
            };
        }
        if self.case_sensitive {
            config.matching.lowercase = false;
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let config: RunConfig = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).with_context(|| format!("invalid TOML config {}", path.display()))?
    } else {
        serde_json::from_str(&text)
            .with_context(|| format!("invalid JSON config {}", path.display()))?
    };
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let mut config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Preprocess(a) => commands::preprocess(&a, &mut config),
        Command::Label(a) => commands::label(&a, &config),
        Command::Stats(a) => commands::stats(&a),
        Command::Train(a) => commands::train(&a, &mut config),
        Command::Predict(a) => commands::predict(&a, &mut config),
        Command::Eval(a) => commands::eval(&a, &mut config),
        Command::Analyze(a) => commands::analyze(&a),
        Command::DumpAttention(a) => commands::dump_attention(&a),
    }
}

fn error_json(err: &anyhow::Error) -> serde_json::Value {
    let kind = err
        .chain()
        .find_map(|e| e.downcast_ref::<keyphrase_core::Error>())
        .map_or("error", keyphrase_core::Error::kind);
    let causes: Vec<String> = err.chain().map(ToString::to_string).collect();
    serde_json::json!({ "error": { "kind": kind, "message": format!("{err:#}"), "causes": causes } })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", error_json(&err));
            ExitCode::FAILURE
        }
    }
}
