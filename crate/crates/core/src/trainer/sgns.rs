//! The negative-sampling objective and its exact gradients.

use super::matrix::{Matrix, RowRead};

/// Logistic function. Computed exactly — no lookup-table approximation — so
/// analytic gradients match finite differences to high precision.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// ln(1 + e^x), stable for large |x|.
#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// One training step, expressed by role rather than by architecture:
///
/// - `input_words`: rows of the input matrix whose mean forms the projection
///   `h` — the context window for CBOW, the single center word for skip-gram;
/// - `positive`: the row of the output matrix for the true word — the center
///   word for CBOW, the predicted context word for skip-gram;
/// - `negatives`: output rows of the sampled noise words (duplicates allowed).
///
/// With one input word the two architectures coincide.
#[derive(Debug, Clone)]
pub struct Sample<'a> {
    pub input_words: &'a [usize],
    pub positive: usize,
    pub negatives: &'a [usize],
}

/// Loss and exact gradients for one step.
#[derive(Debug, Clone)]
pub struct StepGrads {
    pub loss: f64,
    /// The projection h = mean of the input vectors.
    pub projection: Vec<f64>,
    /// dL/dh. Each input word's vector receives `grad_projection / n`
    /// (per occurrence), n being the number of input words.
    pub grad_projection: Vec<f64>,
    /// dL/du per output slot, positive first and then every negative in
    /// order. A row listed twice accumulates its gradient across slots.
    pub grad_outputs: Vec<(usize, Vec<f64>)>,
}

/// Per-output coefficients of one step: `a = label - sigmoid(u . h)`, so the
/// SGD update is `u += lr * a * h` and the projection error is
/// `sum(a * u)`. Returns the step loss
/// `-log sigmoid(u_pos . h) - sum(log sigmoid(-u_neg . h))`.
pub(crate) fn step_terms<R: RowRead>(
    h: &[f64],
    positive: usize,
    negatives: &[usize],
    outputs: &R,
    coeffs: &mut Vec<(usize, f64)>,
) -> f64 {
    coeffs.clear();
    let f = outputs.dot(positive, h);
    let mut loss = softplus(-f);
    coeffs.push((positive, 1.0 - sigmoid(f)));
    for &neg in negatives {
        let f = outputs.dot(neg, h);
        loss += softplus(f);
        coeffs.push((neg, -sigmoid(f)));
    }
    loss
}

/// Compute the loss `L = -log sigmoid(u_pos . h) - sum -log sigmoid(-u_neg . h)`
/// and its exact gradients with respect to the projection and every output
/// vector involved, at the current parameter values.
pub fn step_loss_and_grads(sample: &Sample, inputs: &Matrix, outputs: &Matrix) -> StepGrads {
    assert!(
        !sample.input_words.is_empty(),
        "a sample needs at least one input word"
    );
    let dim = inputs.dim();
    let n = sample.input_words.len() as f64;

    let mut projection = vec![0.0; dim];
    for &w in sample.input_words {
        for (c, v) in inputs.row(w).iter().enumerate() {
            projection[c] += v;
        }
    }
    for v in &mut projection {
        *v /= n;
    }

    let mut coeffs = Vec::with_capacity(1 + sample.negatives.len());
    let loss = step_terms(
        &projection,
        sample.positive,
        sample.negatives,
        outputs,
        &mut coeffs,
    );

    let mut grad_projection = vec![0.0; dim];
    let mut grad_outputs = Vec::with_capacity(coeffs.len());
    for &(row, a) in &coeffs {
        for (c, u) in outputs.row(row).iter().enumerate() {
            grad_projection[c] -= a * u;
        }
        grad_outputs.push((row, projection.iter().map(|h| -a * h).collect()));
    }

    StepGrads {
        loss,
        projection,
        grad_projection,
        grad_outputs,
    }
}
