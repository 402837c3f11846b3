use crate::corpus::TokenizedExample;
use crate::error::{Error, Result};
use crate::model::tape::{Tape, Var};
use crate::model::{bind, teacher_forced_on_tape, GateMode, ModelConfig, ModelParams, Tensor};

/// Keeps `ln η` and `ln(1 − η)` finite.
pub const BCE_EPS: f64 = 1e-7;

/// Negative log-likelihood of one target sequence, summed over steps.
pub fn mle_loss(step_logps: &[f64]) -> f64 {
    -step_logps.iter().sum::<f64>()
}

/// Sentence-selector cross-entropy against weak labels, summed over sentences.
pub fn bce_loss(eta: &[f64], labels: &[u8]) -> Result<f64> {
    if eta.len() != labels.len() {
        return Err(Error::InvalidExample(format!(
            "{} selector outputs but {} sentence labels",
            eta.len(),
            labels.len()
        )));
    }
    Ok(eta
        .iter()
        .zip(labels)
        .map(|(&e, &a)| {
            let e = e.clamp(BCE_EPS, 1.0 - BCE_EPS);
            let a = f64::from(a);
            -(a * e.ln() + (1.0 - a) * (1.0 - e).ln())
        })
        .sum())
}

pub fn total_loss(mle: f64, bce: f64, lambda: f64) -> f64 {
    mle + lambda * bce
}

/// Mean of per-example values; the batch reduction used for both loss terms.
pub fn batch_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Both loss terms and their weighted sum for one example.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct LossParts {
    pub mle: f64,
    pub bce: f64,
    pub total: f64,
}

pub(crate) struct TapeLoss {
    pub total: Var,
    pub parts: LossParts,
}

pub(crate) fn loss_on_tape<'p>(
    tape: &mut Tape<'p>,
    params: &'p ModelParams,
    config: &ModelConfig,
    example: &TokenizedExample,
    labels: &[u8],
    lambda: f64,
    mode: &GateMode,
) -> Result<TapeLoss> {
    if labels.len() != example.num_sentences() {
        return Err(Error::InvalidExample(format!(
            "example {} has {} sentences but {} labels",
            example.id,
            example.num_sentences(),
            labels.len()
        )));
    }
    let p = bind(tape, params);
    let tf = teacher_forced_on_tape(tape, &p, config, example, mode)?;

    let logps = tape.concat_cols(&tf.step_logps);
    let logp_sum = tape.sum(logps);
    let mle = tape.affine(logp_sum, -1.0, 0.0);

    let eta = tape.clamp(tf.encoded.eta, BCE_EPS, 1.0 - BCE_EPS);
    let one_minus = tape.affine(eta, -1.0, 1.0);
    let ln_eta = tape.ln(eta);
    let ln_rest = tape.ln(one_minus);
    let a: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let not_a: Vec<f64> = a.iter().map(|x| 1.0 - x).collect();
    let a = tape.constant(Tensor::row_vector(a));
    let not_a = tape.constant(Tensor::row_vector(not_a));
    let pos = tape.mul(a, ln_eta);
    let neg = tape.mul(not_a, ln_rest);
    let both = tape.add(pos, neg);
    let both = tape.sum(both);
    let bce = tape.affine(both, -1.0, 0.0);

    let weighted = tape.affine(bce, lambda, 0.0);
    let total = tape.add(mle, weighted);
    let parts = LossParts {
        mle: tape.scalar(mle),
        bce: tape.scalar(bce),
        total: tape.scalar(total),
    };
    Ok(TapeLoss { total, parts })
}

/// Loss of one example without gradients.
pub fn example_loss(
    example: &TokenizedExample,
    labels: &[u8],
    params: &ModelParams,
    config: &ModelConfig,
    lambda: f64,
    mode: &GateMode,
) -> Result<LossParts> {
    let mut tape = Tape::new();
    Ok(loss_on_tape(&mut tape, params, config, example, labels, lambda, mode)?.parts)
}

/// Adds `scale · ∂L/∂θ` for one example into `grads` and returns its loss.
#[allow(clippy::too_many_arguments)]
pub fn accumulate_gradients(
    example: &TokenizedExample,
    labels: &[u8],
    params: &ModelParams,
    config: &ModelConfig,
    lambda: f64,
    mode: &GateMode,
    scale: f64,
    grads: &mut [Tensor],
) -> Result<LossParts> {
    let mut tape = Tape::new();
    let loss = loss_on_tape(&mut tape, params, config, example, labels, lambda, mode)?;
    tape.backward(loss.total, scale, grads);
    Ok(loss.parts)
}

/// Loss and full parameter gradient of one example.
pub fn loss_and_gradients(
    example: &TokenizedExample,
    labels: &[u8],
    params: &ModelParams,
    config: &ModelConfig,
    lambda: f64,
    mode: &GateMode,
) -> Result<(LossParts, Vec<Tensor>)> {
    let mut grads = params.zeros_like();
    let parts = accumulate_gradients(
        example, labels, params, config, lambda, mode, 1.0, &mut grads,
    )?;
    Ok((parts, grads))
}
