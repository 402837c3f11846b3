use criterion::{black_box, criterion_group, criterion_main, Criterion};
use keyphrase_core::corpus::tokenize;
use keyphrase_core::labeling::{classify_keyphrase, label_document};
use keyphrase_core::metrics::{evaluate, f1_at_5, f1_at_m, MatchConfig, PredictionRecord};
use keyphrase_core::model::{greedy_decode, GateMode, ModelConfig, ModelParams};
use keyphrase_core::synthetic::{generate, SyntheticConfig};
use keyphrase_core::training::{loss_and_gradients, TrainExample};

const ABSTRACT: &str = "We propose a sentence-selective encoder for keyphrase generation. \
    The model binarizes a per-sentence gate, e.g. with a threshold of 0.5, and is trained \
    end-to-end with a straight-through estimator. Experiments on 5 datasets show 3.2% gains.";

fn corpus() -> (keyphrase_core::Vocab, Vec<TrainExample>) {
    let c = generate(&SyntheticConfig {
        documents: 16,
        min_sentences: 6,
        max_sentences: 8,
        ..SyntheticConfig::default()
    });
    let ex = c
        .documents
        .iter()
        .map(|d| TrainExample::from_labeled(&label_document(d.document.clone()).unwrap(), &c.vocab))
        .collect();
    (c.vocab, ex)
}

fn bench_text(c: &mut Criterion) {
    c.bench_function("tokenize_abstract", |b| {
        b.iter(|| tokenize(black_box(ABSTRACT)))
    });
    let (_, ex) = corpus();
    let doc = &ex[0].document;
    let kps: Vec<Vec<String>> = doc.keyphrases.clone();
    c.bench_function("classify_keyphrases", |b| {
        b.iter(|| {
            for kp in &kps {
                black_box(classify_keyphrase(doc, kp).unwrap());
            }
        })
    });
}

fn bench_model(c: &mut Criterion) {
    let (vocab, ex) = corpus();
    let config = ModelConfig::tiny(vocab.len(), 32);
    let params = ModelParams::init_uniform(&config, 0.1, 1);
    let e = &ex[0];
    c.bench_function("forward_backward_d32", |b| {
        b.iter(|| {
            loss_and_gradients(
                &e.example,
                &e.labels,
                &params,
                &config,
                0.08,
                &GateMode::Natural,
            )
            .unwrap()
        })
    });
    c.bench_function("greedy_decode_d32", |b| {
        b.iter(|| {
            greedy_decode(
                &e.example,
                &params,
                &config,
                &vocab,
                &MatchConfig::default(),
            )
            .unwrap()
        })
    });
}

fn bench_metrics(c: &mut Criterion) {
    let (_, ex) = corpus();
    let gold: Vec<Vec<String>> = (0..8).map(|i| vec![format!("g{i}"), "x".into()]).collect();
    let preds: Vec<Vec<String>> = (0..12)
        .map(|i| vec![format!("g{}", i * 2), "x".into()])
        .collect();
    c.bench_function("f1_scores", |b| {
        b.iter(|| {
            (
                f1_at_5(black_box(&preds), &gold),
                f1_at_m(black_box(&preds), &gold),
            )
        })
    });
    let docs: Vec<_> = ex.iter().map(|e| e.document.clone()).collect();
    let records: Vec<PredictionRecord> = docs
        .iter()
        .map(|d| PredictionRecord {
            id: d.id,
            present: d.keyphrases[..1].to_vec(),
            absent: d.keyphrases[2..].to_vec(),
            ..PredictionRecord::default()
        })
        .collect();
    c.bench_function("evaluate_16_docs", |b| {
        b.iter(|| evaluate(&docs, &records, &MatchConfig::default(), 5).unwrap())
    });
}

criterion_group!(benches, bench_text, bench_model, bench_metrics);
criterion_main!(benches);
