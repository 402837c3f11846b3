use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::{Checkpoint, TrainState};
use super::config::TrainConfig;
use super::loss::{accumulate_gradients, batch_mean, LossParts};
use super::optim::{clip_global_norm, Adam, AdamConfig};
use crate::corpus::{encode_example, format_target, Document, TokenizedExample, Vocab};
use crate::error::{Error, Result};
use crate::labeling::LabeledExample;
use crate::metrics::{evaluate, MatchConfig, PredictionRecord};
use crate::model::{greedy_decode, GateMode, ModelConfig, ModelParams};

pub const LOG_FILE: &str = "train_log.jsonl";
pub const BEST_CHECKPOINT: &str = "best.ckpt";
pub const LAST_CHECKPOINT: &str = "last.ckpt";
pub const DIVERGENCE_DUMP: &str = "divergence.json";

/// A labeled document together with its encoded form.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainExample {
    pub document: Document,
    pub example: TokenizedExample,
    pub labels: Vec<u8>,
}

impl TrainExample {
    pub fn from_labeled(labeled: &LabeledExample, vocab: &Vocab) -> Self {
        let target = format_target(&labeled.document, &labeled.categories);
        TrainExample {
            document: labeled.document.clone(),
            example: encode_example(&labeled.document, &target, vocab),
            labels: labeled.sentence_labels.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainOptions {
    pub out_dir: PathBuf,
    pub resume_from: Option<PathBuf>,
    pub matching: MatchConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub log_path: PathBuf,
    pub best_checkpoint: PathBuf,
    pub last_checkpoint: PathBuf,
    pub epochs_completed: usize,
    pub steps: usize,
    pub best_score: Option<f64>,
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
    /// Mean losses of the last completed epoch.
    pub last_epoch_loss: LossParts,
    pub params: ModelParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationScores {
    pub present_f1_at_m: f64,
    pub present_f1_at_5: f64,
    pub absent_f1_at_m: f64,
}

#[derive(Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum LogLine<'a> {
    Header {
        version: u32,
        mle_reduction: &'static str,
        bce_reduction: &'static str,
        model_config: &'a ModelConfig,
        train_config: &'a TrainConfig,
        train_examples: usize,
        val_examples: usize,
        parameters: usize,
    },
    Resume {
        epoch: usize,
        step: usize,
    },
    Step {
        epoch: usize,
        step: usize,
        batch_size: usize,
        mle: f64,
        bce: f64,
        total: f64,
        grad_norm: f64,
    },
    Epoch {
        epoch: usize,
        mle: f64,
        bce: f64,
        total: f64,
    },
    Validation {
        epoch: usize,
        #[serde(flatten)]
        scores: ValidationScores,
        improved: bool,
    },
    EarlyStop {
        epoch: usize,
    },
}

struct Log {
    path: PathBuf,
    out: BufWriter<File>,
}

impl Log {
    fn open(path: PathBuf, append: bool) -> Result<Self> {
        let file = OpenOptions::new()
            .create(true)
            .write(true)
            .append(append)
            .truncate(!append)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(Log {
            path,
            out: BufWriter::new(file),
        })
    }

    fn write(&mut self, line: &LogLine<'_>) -> Result<()> {
        serde_json::to_writer(&mut self.out, line)?;
        self.out
            .write_all(b"\n")
            .map_err(|e| Error::io(&self.path, e))
    }

    fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Groups examples of similar source length into batches, in a seed-determined order.
pub fn make_batches(lengths: &[usize], batch_size: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.shuffle(rng);
    order.sort_by_key(|&i| lengths[i]);
    let mut batches: Vec<Vec<usize>> = order
        .chunks(batch_size.max(1))
        .map(<[usize]>::to_vec)
        .collect();
    batches.shuffle(rng);
    batches
}

fn batch_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // keep batch order independent of the parameter-init stream
    rng.set_stream(1);
    rng
}

/// Greedy-decodes `val` and scores it.
pub fn validate(
    val: &[TrainExample],
    params: &ModelParams,
    config: &ModelConfig,
    vocab: &Vocab,
    matching: &MatchConfig,
) -> Result<ValidationScores> {
    let mut predictions = Vec::with_capacity(val.len());
    for ex in val {
        let decoded = greedy_decode(&ex.example, params, config, vocab, matching)?;
        predictions.push(PredictionRecord {
            id: ex.document.id,
            present: decoded.prediction.present,
            absent: decoded.prediction.absent,
            ..Default::default()
        });
    }
    let docs: Vec<Document> = val.iter().map(|e| e.document.clone()).collect();
    let report = evaluate(&docs, &predictions, matching, 1)?;
    Ok(ValidationScores {
        present_f1_at_m: report.splits.present.at_m.f1,
        present_f1_at_5: report.splits.present.at_5.f1,
        absent_f1_at_m: report.splits.absent.at_m.f1,
    })
}

#[derive(Serialize)]
struct DivergenceDump {
    epoch: usize,
    step: usize,
    examples: Vec<DivergedExample>,
}

#[derive(Serialize)]
struct DivergedExample {
    id: usize,
    source_len: usize,
    target_len: usize,
    loss: LossParts,
}

/// Trains from scratch or resumes from a checkpoint, writing the log and
/// `best.ckpt` / `last.ckpt` into `options.out_dir`.
pub fn train(
    train_set: &[TrainExample],
    val_set: &[TrainExample],
    vocab: &Vocab,
    model_config: &ModelConfig,
    train_config: &TrainConfig,
    options: &TrainOptions,
) -> Result<TrainOutcome> {
    if train_set.is_empty() {
        return Err(Error::EmptyDataset("training set"));
    }
    if val_set.is_empty() {
        return Err(Error::EmptyDataset("validation set"));
    }
    model_config.validate()?;
    train_config.validate()?;
    if vocab.len() != model_config.vocab_size {
        return Err(Error::InvalidConfig(format!(
            "vocabulary has {} entries but vocab_size is {}",
            vocab.len(),
            model_config.vocab_size
        )));
    }
    let out_dir = &options.out_dir;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let log_path = out_dir.join(LOG_FILE);
    let best_path = out_dir.join(BEST_CHECKPOINT);
    let last_path = out_dir.join(LAST_CHECKPOINT);

    let mut rng = batch_rng(train_config.seed);
    let (mut params, mut optimizer, mut state, mut log) = match &options.resume_from {
        Some(path) => {
            let ck = Checkpoint::load(path)?;
            if &ck.model_config != model_config {
                return Err(Error::Checkpoint {
                    path: path.clone(),
                    reason: "model configuration differs from the requested one".into(),
                });
            }
            if ck.vocab.tokens() != vocab.tokens() {
                return Err(Error::Checkpoint {
                    path: path.clone(),
                    reason: "vocabulary differs from the requested one".into(),
                });
            }
            let pos: u128 = ck
                .state
                .rng_word_pos
                .parse()
                .map_err(|_| Error::Checkpoint {
                    path: path.clone(),
                    reason: "bad generator position".into(),
                })?;
            rng.set_word_pos(pos);
            let mut log = Log::open(log_path.clone(), true)?;
            log.write(&LogLine::Resume {
                epoch: ck.state.epoch,
                step: ck.state.step,
            })?;
            let mut optimizer = ck.optimizer;
            optimizer.config.learning_rate = train_config.learning_rate;
            (ck.params, optimizer, ck.state, log)
        }
        None => {
            let params =
                ModelParams::init_uniform(model_config, train_config.init_range, train_config.seed);
            let optimizer = Adam::new(
                AdamConfig {
                    learning_rate: train_config.learning_rate,
                    ..AdamConfig::default()
                },
                &params.tensors,
            );
            let mut log = Log::open(log_path.clone(), false)?;
            log.write(&LogLine::Header {
                version: 1,
                mle_reduction: "sum over target steps, mean over batch",
                bce_reduction: "sum over sentences, mean over batch",
                model_config,
                train_config,
                train_examples: train_set.len(),
                val_examples: val_set.len(),
                parameters: params.num_scalars(),
            })?;
            (params, optimizer, TrainState::default(), log)
        }
    };

    let lengths: Vec<usize> = train_set.iter().map(|e| e.example.source_len()).collect();
    let lambda = train_config.lambda;
    let mut last_epoch_loss = LossParts::default();
    let mut stopped_early = false;
    while state.epoch < train_config.max_epochs {
        let epoch = state.epoch;
        let mut sums = (Vec::new(), Vec::new(), Vec::new());
        for batch in make_batches(&lengths, train_config.batch_size, &mut rng) {
            let scale = 1.0 / batch.len() as f64;
            let mut grads = params.zeros_like();
            let mut parts = Vec::with_capacity(batch.len());
            for &i in &batch {
                let ex = &train_set[i];
                let p = accumulate_gradients(
                    &ex.example,
                    &ex.labels,
                    &params,
                    model_config,
                    lambda,
                    &GateMode::Natural,
                    scale,
                    &mut grads,
                )?;
                parts.push(p);
            }
            let mle = batch_mean(&parts.iter().map(|p| p.mle).collect::<Vec<_>>());
            let bce = batch_mean(&parts.iter().map(|p| p.bce).collect::<Vec<_>>());
            let total = batch_mean(&parts.iter().map(|p| p.total).collect::<Vec<_>>());
            let grad_norm = clip_global_norm(&mut grads, train_config.clip_norm);
            if !total.is_finite() || !grad_norm.is_finite() {
                log.flush()?;
                let dump_path = out_dir.join(DIVERGENCE_DUMP);
                let dump = DivergenceDump {
                    epoch,
                    step: state.step,
                    examples: batch
                        .iter()
                        .zip(&parts)
                        .map(|(&i, &loss)| DivergedExample {
                            id: train_set[i].example.id,
                            source_len: train_set[i].example.source_len(),
                            target_len: train_set[i].example.target_ids.len(),
                            loss,
                        })
                        .collect(),
                };
                crate::io::write_json(&dump_path, &dump)?;
                return Err(Error::Divergence {
                    epoch,
                    step: state.step,
                    dump: dump_path,
                });
            }
            optimizer.step(&mut params.tensors, &grads);
            state.step += 1;
            log.write(&LogLine::Step {
                epoch,
                step: state.step,
                batch_size: batch.len(),
                mle,
                bce,
                total,
                grad_norm,
            })?;
            sums.0.extend(parts.iter().map(|p| p.mle));
            sums.1.extend(parts.iter().map(|p| p.bce));
            sums.2.extend(parts.iter().map(|p| p.total));
        }
        last_epoch_loss = LossParts {
            mle: batch_mean(&sums.0),
            bce: batch_mean(&sums.1),
            total: batch_mean(&sums.2),
        };
        log.write(&LogLine::Epoch {
            epoch,
            mle: last_epoch_loss.mle,
            bce: last_epoch_loss.bce,
            total: last_epoch_loss.total,
        })?;
        state.epoch += 1;
        state.rng_word_pos = rng.get_word_pos().to_string();

        let due = state.epoch % train_config.validation_interval == 0
            || state.epoch == train_config.max_epochs;
        let mut improved = false;
        if due {
            let scores = validate(val_set, &params, model_config, vocab, &options.matching)?;
            improved = state.best_score.is_none_or(|b| scores.present_f1_at_m > b);
            if improved {
                state.best_score = Some(scores.present_f1_at_m);
                state.best_epoch = Some(epoch);
                state.validations_without_improvement = 0;
            } else {
                state.validations_without_improvement += 1;
            }
            log.write(&LogLine::Validation {
                epoch,
                scores,
                improved,
            })?;
        }
        let checkpoint = Checkpoint {
            model_config: model_config.clone(),
            train_config: train_config.clone(),
            vocab: vocab.clone(),
            params: params.clone(),
            optimizer: optimizer.clone(),
            state: state.clone(),
        };
        if improved {
            checkpoint.save(&best_path)?;
        }
        checkpoint.save(&last_path)?;
        log.flush()?;
        if train_config.patience > 0
            && state.validations_without_improvement >= train_config.patience
        {
            log.write(&LogLine::EarlyStop { epoch })?;
            stopped_early = true;
            break;
        }
    }
    log.flush()?;
    Ok(TrainOutcome {
        log_path,
        best_checkpoint: best_path,
        last_checkpoint: last_path,
        epochs_completed: state.epoch,
        steps: state.step,
        best_score: state.best_score,
        best_epoch: state.best_epoch,
        stopped_early,
        last_epoch_loss,
        params,
    })
}
