use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use keyphrase_core::corpus::{build_vocab, encode_example, preprocess_records, read_raw_records};
use keyphrase_core::io::{read_json, read_jsonl, write_json, write_jsonl};
use keyphrase_core::labeling::{corpus_stats, label_document};
use keyphrase_core::metrics::{
    attention_dump, bucket_analysis, evaluate, MetricsReport, PredictionRecord,
};
use keyphrase_core::model::greedy_decode;
use keyphrase_core::training::{self, Checkpoint, TrainExample, TrainOptions};
use keyphrase_core::{Document, LabeledExample, RunConfig, Vocab};
use serde::Serialize;

use crate::{
    AnalyzeArgs, DumpAttentionArgs, EvalArgs, LabelArgs, PredictArgs, PreprocessArgs, StatsArgs,
    TrainArgs,
};

/// Written next to an output so it records the configuration that produced it.
#[derive(Serialize)]
struct RunRecord<'a> {
    command: &'static str,
    inputs: Vec<(&'static str, &'a Path)>,
    config: &'a RunConfig,
}

fn sidecar(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".run.json");
    output.with_file_name(name)
}

fn write_run_record(output: &Path, record: &RunRecord<'_>) -> Result<()> {
    write_json(&sidecar(output), record)?;
    Ok(())
}

fn print_summary(value: serde_json::Value) {
    println!("{value}");
}

fn read_json_file<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    read_json(path).with_context(|| format!("cannot parse {}", path.display()))
}

pub fn preprocess(args: &PreprocessArgs, config: &mut RunConfig) -> Result<()> {
    if let Some(v) = args.vocab_size {
        config.corpus.vocab_size = v;
    }
    if let Some(v) = args.max_source_len {
        config.corpus.max_source_len = v;
    }
    let records = read_raw_records(&args.input, !args.allow_unlabeled)?;
    let vocab = build_vocab(&records, config.corpus.vocab_size)?;
    let docs = preprocess_records(&records, &config.corpus);
    write_jsonl(&args.output, &docs)?;
    vocab.save(&args.vocab_out)?;
    write_run_record(
        &args.output,
        &RunRecord {
            command: "preprocess",
            inputs: vec![("input", &args.input)],
            config,
        },
    )?;
    print_summary(serde_json::json!({ "documents": docs.len(), "vocab_size": vocab.len() }));
    Ok(())
}

pub fn label(args: &LabelArgs, config: &RunConfig) -> Result<()> {
    let docs: Vec<Document> = read_jsonl(&args.input)?;
    let labeled = docs
        .into_iter()
        .map(|d| {
            let id = d.id;
            label_document(d).with_context(|| format!("document {id}"))
        })
        .collect::<Result<Vec<_>>>()?;
    write_jsonl(&args.output, &labeled)?;
    write_run_record(
        &args.output,
        &RunRecord {
            command: "label",
            inputs: vec![("input", &args.input)],
            config,
        },
    )?;
    print_summary(serde_json::json!({ "documents": labeled.len() }));
    Ok(())
}

pub fn stats(args: &StatsArgs) -> Result<()> {
    let data: Vec<LabeledExample> = read_jsonl(&args.input)?;
    let stats = corpus_stats(&data)?;
    write_json(&args.report, &stats)?;
    print_summary(serde_json::to_value(&stats)?);
    Ok(())
}

fn train_examples(path: &Path, vocab: &Vocab) -> Result<Vec<TrainExample>> {
    let data: Vec<LabeledExample> = read_jsonl(path)?;
    Ok(data
        .iter()
        .map(|l| TrainExample::from_labeled(l, vocab))
        .collect())
}

pub fn train(args: &TrainArgs, config: &mut RunConfig) -> Result<()> {
    let t = &mut config.train;
    let overrides = [
        (args.lambda, &mut t.lambda),
        (args.learning_rate, &mut t.learning_rate),
        (args.clip_norm, &mut t.clip_norm),
        (args.init_range, &mut t.init_range),
    ];
    for (flag, slot) in overrides {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    let counts = [
        (args.batch_size, &mut t.batch_size),
        (args.epochs, &mut t.max_epochs),
        (args.validation_interval, &mut t.validation_interval),
        (args.patience, &mut t.patience),
    ];
    for (flag, slot) in counts {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    if let Some(s) = args.seed {
        t.seed = s;
    }
    let m = &mut config.model;
    if let Some(v) = args.embed_dim {
        m.embed_dim = v;
    }
    if let Some(v) = args.hidden_dim {
        m.hidden_dim = v;
        m.significance_embed_dim = v;
    }
    if let Some(v) = args.cnn_channels {
        m.cnn_channels = v;
    }
    if let Some(v) = args.selector_hidden {
        m.selector_mlp_hidden = v;
    }
    if let Some(v) = args.max_decode_len {
        m.max_decode_len = v;
    }
    args.matching.apply(config);

    let vocab = Vocab::load(&args.vocab)?;
    config.model.vocab_size = vocab.len();
    config.validate()?;
    let train_set = train_examples(&args.data, &vocab)?;
    let val_set = train_examples(&args.val, &vocab)?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    write_json(
        &args.out.join("run_config.json"),
        &RunRecord {
            command: "train",
            inputs: vec![
                ("data", &args.data),
                ("val", &args.val),
                ("vocab", &args.vocab),
            ],
            config,
        },
    )?;
    let outcome = training::train(
        &train_set,
        &val_set,
        &vocab,
        &config.model,
        &config.train,
        &TrainOptions {
            out_dir: args.out.clone(),
            resume_from: args.resume.clone(),
            matching: config.matching,
        },
    )?;
    print_summary(serde_json::json!({
        "epochs": outcome.epochs_completed,
        "steps": outcome.steps,
        "best_present_f1_at_m": outcome.best_score,
        "best_epoch": outcome.best_epoch,
        "stopped_early": outcome.stopped_early,
        "last_epoch_loss": outcome.last_epoch_loss,
        "best_checkpoint": outcome.best_checkpoint,
        "last_checkpoint": outcome.last_checkpoint,
    }));
    Ok(())
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    Ok(Checkpoint::load(path)?)
}

pub fn predict(args: &PredictArgs, config: &mut RunConfig) -> Result<()> {
    let ck = load_checkpoint(&args.checkpoint)?;
    config.model = ck.model_config.clone();
    config.train = ck.train_config.clone();
    if let Some(v) = args.max_decode_len {
        config.model.max_decode_len = v;
    }
    args.matching.apply(config);
    let docs: Vec<Document> = read_jsonl(&args.input)?;
    let mut out = Vec::with_capacity(docs.len());
    for doc in &docs {
        let example = encode_example(doc, &[], &ck.vocab);
        let decoded = greedy_decode(
            &example,
            &ck.params,
            &config.model,
            &ck.vocab,
            &config.matching,
        )
        .with_context(|| format!("document {}", doc.id))?;
        out.push(PredictionRecord {
            id: doc.id,
            present: decoded.prediction.present,
            absent: decoded.prediction.absent,
            eta: decoded.trace.eta,
            z: decoded.trace.z,
        });
    }
    write_jsonl(&args.output, &out)?;
    write_run_record(
        &args.output,
        &RunRecord {
            command: "predict",
            inputs: vec![("checkpoint", &args.checkpoint), ("input", &args.input)],
            config,
        },
    )?;
    print_summary(serde_json::json!({ "documents": out.len() }));
    Ok(())
}

pub fn eval(args: &EvalArgs, config: &mut RunConfig) -> Result<()> {
    args.matching.apply(config);
    let gold: Vec<LabeledExample> = read_jsonl(&args.gold)?;
    let docs: Vec<Document> = gold.into_iter().map(|l| l.document).collect();
    let preds: Vec<PredictionRecord> = read_jsonl(&args.pred)?;
    let report = evaluate(&docs, &preds, &config.matching, args.buckets)?;
    write_json(&args.report, &report)?;
    let s = &report.splits;
    print_summary(serde_json::json!({
        "documents": report.documents,
        "present": { "f1_at_5": s.present.at_5.f1, "f1_at_m": s.present.at_m.f1 },
        "absent": { "f1_at_5": s.absent.at_5.f1, "f1_at_m": s.absent.at_m.f1 },
        "semi_present_recall": s.semi_present.micro_recall_at_m,
        "absent_without_semi_recall": s.absent_without_semi.micro_recall_at_m,
    }));
    Ok(())
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let baseline: MetricsReport = read_json_file(&args.baseline)?;
    let treatment: MetricsReport = read_json_file(&args.treatment)?;
    let analysis = bucket_analysis(&baseline, &treatment, args.edges.as_deref(), args.buckets)?;
    for notice in &analysis.notices {
        eprintln!("notice: {notice}");
    }
    match &args.out {
        Some(path) => write_json(path, &analysis)?,
        None => println!("{}", serde_json::to_string_pretty(&analysis)?),
    }
    Ok(())
}

pub fn dump_attention(args: &DumpAttentionArgs) -> Result<()> {
    let ck = load_checkpoint(&args.checkpoint)?;
    let docs: Vec<Document> = read_jsonl(&args.input)?;
    let mut dumps = Vec::new();
    for doc in &docs {
        if args.ids.as_ref().is_some_and(|ids| !ids.contains(&doc.id)) {
            continue;
        }
        let example = encode_example(doc, &[], &ck.vocab);
        dumps.push(
            attention_dump(&example, &ck.params, &ck.model_config, &ck.vocab)
                .with_context(|| format!("document {}", doc.id))?,
        );
    }
    write_json(
        &args.out,
        &serde_json::json!({ "version": 1, "documents": dumps }),
    )?;
    print_summary(serde_json::json!({ "documents": dumps.len() }));
    Ok(())
}
