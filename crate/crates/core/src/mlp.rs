//! Two-hidden-layer perceptron with softmax output, trained by Adam on
//! cross-entropy over defuzzified features.
//!
//! The network computes `O(x) = phi(phi(x W1 + b1) W2 + b2) W0 + b0` on the
//! defuzzified input and predicts `argmax softmax(O(x))`. Training iterates a
//! fixed number of epochs of seeded-shuffled mini-batches; gradients are the
//! mean cross-entropy gradient over the batch. Adam uses bias-corrected
//! moment estimates with decoupled weight decay on the weight matrices only.
//! Training is single-threaded and fully deterministic given the seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::FuzzyDataset;
use crate::defuzz::{self, DefuzzMethod};
use crate::error::{Error, Result};
use crate::fuzzy::FuzzyVector;
use crate::kv::KvDoc;
use crate::util::argmax_tie_lowest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Relu => "relu",
            Self::Tanh => "tanh",
        }
    }

    fn apply(&self, z: f64) -> f64 {
        match self {
            Self::Relu => z.max(0.0),
            Self::Tanh => z.tanh(),
        }
    }

    fn derivative(&self, z: f64) -> f64 {
        match self {
            Self::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Self::Relu),
            "tanh" => Ok(Self::Tanh),
            other => Err(Error::Domain(format!(
                "unknown activation '{other}' (expected relu|tanh)"
            ))),
        }
    }
}

/// Network parameters. Weight matrices are row-major: `w1` is
/// `input_dim x hidden1`, `w2` is `hidden1 x hidden2`, `w0` is
/// `hidden2 x num_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub input_dim: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub num_classes: usize,
    pub activation: Activation,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub w0: Vec<f64>,
    pub b0: Vec<f64>,
}

impl MlpParams {
    /// Zero-initialized parameters of the given shape.
    pub fn zeros(
        input_dim: usize,
        hidden1: usize,
        hidden2: usize,
        num_classes: usize,
        activation: Activation,
    ) -> Self {
        Self {
            input_dim,
            hidden1,
            hidden2,
            num_classes,
            activation,
            w1: vec![0.0; input_dim * hidden1],
            b1: vec![0.0; hidden1],
            w2: vec![0.0; hidden1 * hidden2],
            b2: vec![0.0; hidden2],
            w0: vec![0.0; hidden2 * num_classes],
            b0: vec![0.0; num_classes],
        }
    }

    /// Seeded uniform initialization in `±sqrt(6 / (fan_in + fan_out))` for
    /// weights, zeros for biases.
    pub fn init(
        input_dim: usize,
        hidden1: usize,
        hidden2: usize,
        num_classes: usize,
        activation: Activation,
        seed: u64,
    ) -> Self {
        let mut params = Self::zeros(input_dim, hidden1, hidden2, num_classes, activation);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fill = |w: &mut [f64], fan_in: usize, fan_out: usize| {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for v in w.iter_mut() {
                *v = rng.gen_range(-bound..bound);
            }
        };
        fill(&mut params.w1, input_dim, hidden1);
        fill(&mut params.w2, hidden1, hidden2);
        fill(&mut params.w0, hidden2, num_classes);
        params
    }

    fn check_shapes(&self) -> Result<()> {
        let ok = self.w1.len() == self.input_dim * self.hidden1
            && self.b1.len() == self.hidden1
            && self.w2.len() == self.hidden1 * self.hidden2
            && self.b2.len() == self.hidden2
            && self.w0.len() == self.hidden2 * self.num_classes
            && self.b0.len() == self.num_classes;
        if !ok {
            return Err(Error::InvalidInput("inconsistent parameter shapes".into()));
        }
        Ok(())
    }
}

/// `x (1 x n) * w (n x m) + b`, written into a fresh vector.
fn affine(x: &[f64], w: &[f64], b: &[f64], n: usize, m: usize) -> Vec<f64> {
    let mut out = b.to_vec();
    for (i, &xi) in x.iter().enumerate().take(n) {
        if xi == 0.0 {
            continue;
        }
        let row = &w[i * m..(i + 1) * m];
        for (o, &wij) in out.iter_mut().zip(row) {
            *o += xi * wij;
        }
    }
    out
}

/// Numerically stable softmax (max subtraction).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Intermediate activations kept for backpropagation.
struct ForwardTrace {
    z1: Vec<f64>,
    a1: Vec<f64>,
    z2: Vec<f64>,
    a2: Vec<f64>,
    logits: Vec<f64>,
    probs: Vec<f64>,
}

fn forward_trace(params: &MlpParams, x: &[f64]) -> Result<ForwardTrace> {
    if x.len() != params.input_dim {
        return Err(Error::SchemaMismatch(format!(
            "input has {} features, network expects {}",
            x.len(),
            params.input_dim
        )));
    }
    let check = |v: &[f64], layer: &str| -> Result<()> {
        if v.iter().any(|z| !z.is_finite()) {
            Err(Error::Numeric(format!("non-finite value in layer {layer}")))
        } else {
            Ok(())
        }
    };
    let z1 = affine(x, &params.w1, &params.b1, params.input_dim, params.hidden1);
    check(&z1, "1 (hidden)")?;
    let a1: Vec<f64> = z1.iter().map(|&z| params.activation.apply(z)).collect();
    let z2 = affine(&a1, &params.w2, &params.b2, params.hidden1, params.hidden2);
    check(&z2, "2 (hidden)")?;
    let a2: Vec<f64> = z2.iter().map(|&z| params.activation.apply(z)).collect();
    let logits = affine(
        &a2,
        &params.w0,
        &params.b0,
        params.hidden2,
        params.num_classes,
    );
    check(&logits, "0 (output)")?;
    let probs = softmax(&logits);
    Ok(ForwardTrace {
        z1,
        a1,
        z2,
        a2,
        logits,
        probs,
    })
}

/// Logits and softmax probabilities for an already-defuzzified input.
pub fn forward_crisp(params: &MlpParams, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    params.check_shapes()?;
    let trace = forward_trace(params, x)?;
    Ok((trace.logits, trace.probs))
}

/// Hidden-layer pre-activations `(z1, z2)`; lets callers check how close the
/// input drives each unit to an activation kink.
pub fn hidden_preactivations(params: &MlpParams, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    params.check_shapes()?;
    let trace = forward_trace(params, x)?;
    Ok((trace.z1, trace.z2))
}

/// Cross-entropy `-ln probs[y]` with a `1e-12` probability floor.
pub fn cross_entropy(probs: &[f64], y: usize) -> Result<f64> {
    if y >= probs.len() {
        return Err(Error::InvalidInput(format!(
            "label {y} out of range for {} classes",
            probs.len()
        )));
    }
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|&p| !(0.0..=1.0 + 1e-9).contains(&p)) || (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidInput(
            "probs must form a probability distribution".into(),
        ));
    }
    Ok(-probs[y].max(1e-12).ln())
}

/// Gradient accumulator with the same shapes as [`MlpParams`].
#[derive(Debug, Clone)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub w0: Vec<f64>,
    pub b0: Vec<f64>,
}

impl Gradients {
    fn zeros_like(params: &MlpParams) -> Self {
        Self {
            w1: vec![0.0; params.w1.len()],
            b1: vec![0.0; params.b1.len()],
            w2: vec![0.0; params.w2.len()],
            b2: vec![0.0; params.b2.len()],
            w0: vec![0.0; params.w0.len()],
            b0: vec![0.0; params.b0.len()],
        }
    }

    fn scale(&mut self, factor: f64) {
        for v in [
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            &mut self.b2,
            &mut self.w0,
            &mut self.b0,
        ] {
            for g in v.iter_mut() {
                *g *= factor;
            }
        }
    }
}

/// Mean cross-entropy of `params` over a crisp batch.
pub fn batch_loss(params: &MlpParams, xs: &[Vec<f64>], ys: &[usize]) -> Result<f64> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::InvalidInput(
            "batch inputs and labels must be nonempty and equal-length".into(),
        ));
    }
    let mut total = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let trace = forward_trace(params, x)?;
        total += cross_entropy(&trace.probs, y)?;
    }
    Ok(total / xs.len() as f64)
}

/// Analytic gradient of the mean batch cross-entropy. Also returns the loss.
pub fn batch_gradients(
    params: &MlpParams,
    xs: &[Vec<f64>],
    ys: &[usize],
) -> Result<(f64, Gradients)> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::InvalidInput(
            "batch inputs and labels must be nonempty and equal-length".into(),
        ));
    }
    params.check_shapes()?;
    let mut grads = Gradients::zeros_like(params);
    let mut loss = 0.0;
    let (h1, h2, k) = (params.hidden1, params.hidden2, params.num_classes);

    for (x, &y) in xs.iter().zip(ys) {
        let trace = forward_trace(params, x)?;
        loss += cross_entropy(&trace.probs, y)?;

        // d loss / d logits for softmax + cross-entropy.
        let mut dlogits = trace.probs.clone();
        dlogits[y] -= 1.0;

        for r in 0..h2 {
            let a = trace.a2[r];
            if a != 0.0 {
                let row = &mut grads.w0[r * k..(r + 1) * k];
                for (g, &d) in row.iter_mut().zip(&dlogits) {
                    *g += a * d;
                }
            }
        }
        for (g, &d) in grads.b0.iter_mut().zip(&dlogits) {
            *g += d;
        }

        let mut dz2 = vec![0.0; h2];
        for r in 0..h2 {
            let row = &params.w0[r * k..(r + 1) * k];
            let da: f64 = row.iter().zip(&dlogits).map(|(w, d)| w * d).sum();
            dz2[r] = da * params.activation.derivative(trace.z2[r]);
        }

        for r in 0..h1 {
            let a = trace.a1[r];
            if a != 0.0 {
                let row = &mut grads.w2[r * h2..(r + 1) * h2];
                for (g, &d) in row.iter_mut().zip(&dz2) {
                    *g += a * d;
                }
            }
        }
        for (g, &d) in grads.b2.iter_mut().zip(&dz2) {
            *g += d;
        }

        let mut dz1 = vec![0.0; h1];
        for r in 0..h1 {
            let row = &params.w2[r * h2..(r + 1) * h2];
            let da: f64 = row.iter().zip(&dz2).map(|(w, d)| w * d).sum();
            dz1[r] = da * params.activation.derivative(trace.z1[r]);
        }

        for (r, &xr) in x.iter().enumerate() {
            if xr != 0.0 {
                let row = &mut grads.w1[r * h1..(r + 1) * h1];
                for (g, &d) in row.iter_mut().zip(&dz1) {
                    *g += xr * d;
                }
            }
        }
        for (g, &d) in grads.b1.iter_mut().zip(&dz1) {
            *g += d;
        }
    }

    let scale = 1.0 / xs.len() as f64;
    grads.scale(scale);
    Ok((loss * scale, grads))
}

/// Optimizer hyperparameters and the epoch budget.
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_adam: f64,
    /// Decoupled weight decay, applied to weight matrices only.
    pub weight_decay: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(learning_rate: f64, epochs: usize, seed: u64) -> Self {
        Self {
            learning_rate,
            epochs,
            batch_size: 32,
            beta1: 0.9,
            beta2: 0.999,
            eps_adam: 1e-8,
            weight_decay: 1e-4,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Domain(
                "training needs learning_rate > 0, epochs >= 1, batch_size >= 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
            || !(self.eps_adam > 0.0)
            || !(self.weight_decay >= 0.0)
        {
            return Err(Error::Domain("invalid Adam hyperparameters".into()));
        }
        Ok(())
    }
}

/// First/second moment estimates for every tensor, plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Gradients,
    v: Gradients,
    step: usize,
}

impl AdamState {
    pub fn new(params: &MlpParams) -> Self {
        Self {
            m: Gradients::zeros_like(params),
            v: Gradients::zeros_like(params),
            step: 0,
        }
    }

    pub fn step_count(&self) -> usize {
        self.step
    }
}

/// One bias-corrected Adam update of a single tensor. `decay` is the
/// decoupled weight-decay coefficient (zero for biases).
pub fn adam_step_tensor(
    param: &mut [f64],
    m: &mut [f64],
    v: &mut [f64],
    grad: &[f64],
    step: usize,
    cfg: &TrainConfig,
    decay: f64,
) -> Result<()> {
    if param.len() != grad.len() || m.len() != grad.len() || v.len() != grad.len() {
        return Err(Error::InvalidInput(format!(
            "adam tensor shape mismatch: param {}, m {}, v {}, grad {}",
            param.len(),
            m.len(),
            v.len(),
            grad.len()
        )));
    }
    let bias1 = 1.0 - cfg.beta1.powi(step as i32);
    let bias2 = 1.0 - cfg.beta2.powi(step as i32);
    for i in 0..param.len() {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        let m_hat = m[i] / bias1;
        let v_hat = v[i] / bias2;
        param[i] -= cfg.learning_rate * (m_hat / (v_hat.sqrt() + cfg.eps_adam) + decay * param[i]);
    }
    Ok(())
}

/// Apply one Adam update to every tensor of `params`.
pub fn adam_step(
    params: &mut MlpParams,
    state: &mut AdamState,
    grads: &Gradients,
    cfg: &TrainConfig,
) -> Result<()> {
    state.step += 1;
    let t = state.step;
    let wd = cfg.weight_decay;
    adam_step_tensor(
        &mut params.w1,
        &mut state.m.w1,
        &mut state.v.w1,
        &grads.w1,
        t,
        cfg,
        wd,
    )?;
    adam_step_tensor(
        &mut params.b1,
        &mut state.m.b1,
        &mut state.v.b1,
        &grads.b1,
        t,
        cfg,
        0.0,
    )?;
    adam_step_tensor(
        &mut params.w2,
        &mut state.m.w2,
        &mut state.v.w2,
        &grads.w2,
        t,
        cfg,
        wd,
    )?;
    adam_step_tensor(
        &mut params.b2,
        &mut state.m.b2,
        &mut state.v.b2,
        &grads.b2,
        t,
        cfg,
        0.0,
    )?;
    adam_step_tensor(
        &mut params.w0,
        &mut state.m.w0,
        &mut state.v.w0,
        &grads.w0,
        t,
        cfg,
        wd,
    )?;
    adam_step_tensor(
        &mut params.b0,
        &mut state.m.b0,
        &mut state.v.b0,
        &grads.b0,
        t,
        cfg,
        0.0,
    )?;
    Ok(())
}

/// A trained perceptron plus the defuzzifier it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub params: MlpParams,
    pub defuzz: DefuzzMethod,
    pub resolution: usize,
    /// Mean training cross-entropy per epoch.
    pub loss_trace: Vec<f64>,
}

/// Train a perceptron with hidden sizes `hidden = (h1, h2)` on `train`.
pub fn train_df_mlp(
    train: &FuzzyDataset,
    hidden: (usize, usize),
    cfg: &TrainConfig,
    method: DefuzzMethod,
    resolution: usize,
) -> Result<MlpModel> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    if hidden.0 == 0 || hidden.1 == 0 {
        return Err(Error::Domain("hidden layer sizes must be positive".into()));
    }
    for (class, &count) in train.class_counts().iter().enumerate() {
        if count == 0 {
            return Err(Error::ClassAbsent(class));
        }
    }

    let xs = train.defuzzify(method, resolution)?;
    let ys = train.labels();
    let mut params = MlpParams::init(
        train.num_features(),
        hidden.0,
        hidden.1,
        train.num_classes(),
        Activation::Relu,
        cfg.seed,
    );
    let mut state = AdamState::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut loss_trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch_x: Vec<Vec<f64>> = chunk.iter().map(|&i| xs[i].clone()).collect();
            let batch_y: Vec<usize> = chunk.iter().map(|&i| ys[i]).collect();
            let (loss, grads) = batch_gradients(&params, &batch_x, &batch_y)?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "training diverged at epoch {epoch}"
                )));
            }
            epoch_loss += loss * chunk.len() as f64;
            adam_step(&mut params, &mut state, &grads, cfg)?;
        }
        loss_trace.push(epoch_loss / xs.len() as f64);
    }

    Ok(MlpModel {
        params,
        defuzz: method,
        resolution,
        loss_trace,
    })
}

impl MlpModel {
    /// Logits and probabilities for a fuzzy input.
    pub fn forward(&self, x: &FuzzyVector) -> Result<(Vec<f64>, Vec<f64>)> {
        let crisp = defuzz::defuzzify_vector(x, self.defuzz, self.resolution)?;
        forward_crisp(&self.params, &crisp)
    }

    /// Predicted class: argmax probability, ties to the lowest index.
    pub fn predict(&self, x: &FuzzyVector) -> Result<usize> {
        let (_, probs) = self.forward(x)?;
        Ok(argmax_tie_lowest(&probs))
    }

    /// Predictions and the probability matrix for a whole dataset.
    pub fn predict_dataset(&self, ds: &FuzzyDataset) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
        if ds.num_features() != self.params.input_dim {
            return Err(Error::SchemaMismatch(format!(
                "dataset has {} features, model expects {}",
                ds.num_features(),
                self.params.input_dim
            )));
        }
        let crisp = ds.defuzzify(self.defuzz, self.resolution)?;
        let mut preds = Vec::with_capacity(crisp.len());
        let mut probs = Vec::with_capacity(crisp.len());
        for x in &crisp {
            let (_, p) = forward_crisp(&self.params, x)?;
            preds.push(argmax_tie_lowest(&p));
            probs.push(p);
        }
        Ok((preds, probs))
    }

    pub fn to_kv(&self) -> KvDoc {
        let mut doc = KvDoc::new("mlp_model");
        doc.set("input_dim", self.params.input_dim);
        doc.set("hidden1", self.params.hidden1);
        doc.set("hidden2", self.params.hidden2);
        doc.set("classes", self.params.num_classes);
        doc.set("activation", self.params.activation.as_str());
        doc.set("defuzz", self.defuzz.as_str());
        doc.set("resolution", self.resolution);
        doc.set_f64_list("w1", &self.params.w1);
        doc.set_f64_list("b1", &self.params.b1);
        doc.set_f64_list("w2", &self.params.w2);
        doc.set_f64_list("b2", &self.params.b2);
        doc.set_f64_list("w0", &self.params.w0);
        doc.set_f64_list("b0", &self.params.b0);
        doc.set_f64_list("loss_trace", &self.loss_trace);
        doc
    }

    pub fn from_kv(doc: &KvDoc) -> Result<Self> {
        doc.expect_type("mlp_model")?;
        let mut params = MlpParams::zeros(
            doc.get_usize("input_dim")?,
            doc.get_usize("hidden1")?,
            doc.get_usize("hidden2")?,
            doc.get_usize("classes")?,
            doc.get_str("activation")?.parse()?,
        );
        params.w1 = doc.get_f64_list("w1")?;
        params.b1 = doc.get_f64_list("b1")?;
        params.w2 = doc.get_f64_list("w2")?;
        params.b2 = doc.get_f64_list("b2")?;
        params.w0 = doc.get_f64_list("w0")?;
        params.b0 = doc.get_f64_list("b0")?;
        params.check_shapes().map_err(|_| Error::KvFormat {
            line: 0,
            msg: "tensor lengths do not match the declared architecture".into(),
        })?;
        Ok(Self {
            params,
            defuzz: doc.get_str("defuzz")?.parse()?,
            resolution: doc.get_usize("resolution")?,
            loss_trace: doc.get_f64_list("loss_trace")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ColumnSpec, FeatureKind, FuzzyDataset};
    use crate::defuzz::DEFAULT_RESOLUTION;
    use crate::fuzzy::FuzzyNumber;

    fn crisp_vec(values: &[f64]) -> FuzzyVector {
        FuzzyVector::from_fuzzy(
            values
                .iter()
                .map(|&v| FuzzyNumber::crisp(v).unwrap())
                .collect(),
        )
    }

    #[test]
    fn all_zero_weights_give_uniform_probs() {
        let params = MlpParams::zeros(3, 4, 4, 5, Activation::Relu);
        let (logits, probs) = forward_crisp(&params, &[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(logits, vec![0.0; 5]);
        for p in probs {
            assert!((p - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_like_weights_give_even_split_at_zero() {
        // O(x) = (x, 0) via a single relu unit per layer.
        let mut params = MlpParams::zeros(1, 1, 1, 2, Activation::Relu);
        params.w1 = vec![1.0];
        params.w2 = vec![1.0];
        params.w0 = vec![1.0, 0.0];
        let (logits, probs) = forward_crisp(&params, &[0.0]).unwrap();
        assert_eq!(logits, vec![0.0, 0.0]);
        assert_eq!(probs, vec![0.5, 0.5]);
    }

    #[test]
    fn softmax_is_normalized_at_extreme_logits() {
        let logits = [1e4, -1e4, 5e3, 0.0];
        let probs = softmax(&logits);
        let total: f64 = probs.iter().sum();
        assert!((total - 1.0).abs() <= 1e-12, "sum = {total}");
        assert!(probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
        for params in probs.windows(2) {
            assert!(params[0].is_finite());
        }
    }

    #[test]
    fn cross_entropy_examples() {
        assert!(cross_entropy(&[1.0, 0.0, 0.0], 0).unwrap() < 1e-11);
        let uniform = vec![0.2; 5];
        assert!((cross_entropy(&uniform, 3).unwrap() - 5.0f64.ln()).abs() < 1e-12);
        assert!((cross_entropy(&[0.5, 0.5], 1).unwrap() - 2.0f64.ln()).abs() < 1e-12);
        assert!(cross_entropy(&[0.9, 0.3], 0).is_err());
        assert!(cross_entropy(&[0.5, 0.5], 2).is_err());
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        let cfg = TrainConfig {
            weight_decay: 0.0,
            ..TrainConfig::new(0.05, 1, 0)
        };
        for grad in [3.0, -0.004] {
            let mut param = [1.0];
            let mut m = [0.0];
            let mut v = [0.0];
            adam_step_tensor(&mut param, &mut m, &mut v, &[grad], 1, &cfg, 0.0).unwrap();
            let moved = param[0] - 1.0;
            assert!(
                (moved + 0.05 * grad.signum()).abs() < 1e-6,
                "grad {grad}: moved {moved}"
            );
        }
    }

    #[test]
    fn adam_zero_grads_are_a_fixed_point() {
        let mut params = MlpParams::init(2, 3, 3, 2, Activation::Relu, 9);
        let before = params.clone();
        let mut state = AdamState::new(&params);
        let grads = Gradients::zeros_like(&params);
        let cfg = TrainConfig {
            weight_decay: 0.0,
            ..TrainConfig::new(0.1, 1, 0)
        };
        adam_step(&mut params, &mut state, &grads, &cfg).unwrap();
        assert_eq!(params, before);
    }

    #[test]
    fn adam_constant_positive_grad_decreases_monotonically() {
        // Scalar reference: with constant positive gradient and zero decay
        // the bias-corrected update is a strictly negative step every time.
        let cfg = TrainConfig {
            weight_decay: 0.0,
            ..TrainConfig::new(0.01, 1, 0)
        };
        let mut param = [2.0];
        let mut m = [0.0];
        let mut v = [0.0];
        let mut last = param[0];
        for step in 1..=5 {
            adam_step_tensor(&mut param, &mut m, &mut v, &[0.7], step, &cfg, 0.0).unwrap();
            assert!(param[0] < last, "step {step}: {} !< {last}", param[0]);
            last = param[0];
        }
    }

    #[test]
    fn adam_rejects_shape_mismatch() {
        let cfg = TrainConfig::new(0.01, 1, 0);
        let mut param = [0.0, 1.0];
        let mut m = [0.0, 0.0];
        let mut v = [0.0, 0.0];
        assert!(adam_step_tensor(&mut param, &mut m, &mut v, &[1.0], 1, &cfg, 0.0).is_err());
    }

    fn xor_dataset() -> FuzzyDataset {
        let schema = vec![
            ColumnSpec {
                name: "x1".into(),
                kind: FeatureKind::Crisp,
            },
            ColumnSpec {
                name: "x2".into(),
                kind: FeatureKind::Crisp,
            },
        ];
        let rows = [
            ([0.0, 0.0], 0),
            ([0.0, 1.0], 1),
            ([1.0, 0.0], 1),
            ([1.0, 1.0], 0),
        ];
        let instances = rows.iter().map(|(x, y)| (crisp_vec(x), *y)).collect();
        FuzzyDataset::new(schema, instances, 2).unwrap()
    }

    #[test]
    fn learns_xor() {
        let ds = xor_dataset();
        let mut cfg = TrainConfig::new(0.01, 2000, 7);
        cfg.batch_size = 4;
        let model = train_df_mlp(&ds, (8, 8), &cfg, DefuzzMethod::Val, DEFAULT_RESOLUTION).unwrap();
        let (preds, _) = model.predict_dataset(&ds).unwrap();
        assert_eq!(preds, ds.labels(), "xor not learned");
        assert!(model.loss_trace.last().unwrap() < &0.1);
    }

    #[test]
    fn loss_decreases_on_separable_blobs() {
        let mut gen_cfg = crate::data::SyntheticConfig::new(60, 4);
        gen_cfg.num_classes = 2;
        gen_cfg.num_features = 3;
        let ds = crate::data::generate_synthetic(&gen_cfg).unwrap();
        let cfg = TrainConfig::new(0.005, 60, 1);
        let model =
            train_df_mlp(&ds, (16, 16), &cfg, DefuzzMethod::Val, DEFAULT_RESOLUTION).unwrap();
        assert!(
            model.loss_trace.last().unwrap() < model.loss_trace.first().unwrap(),
            "loss did not decrease: {:?}",
            (model.loss_trace.first(), model.loss_trace.last())
        );
    }

    #[test]
    fn training_is_deterministic() {
        let ds = xor_dataset();
        let mut cfg = TrainConfig::new(0.01, 50, 3);
        cfg.batch_size = 2;
        let a = train_df_mlp(&ds, (4, 4), &cfg, DefuzzMethod::Val, DEFAULT_RESOLUTION).unwrap();
        let b = train_df_mlp(&ds, (4, 4), &cfg, DefuzzMethod::Val, DEFAULT_RESOLUTION).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.loss_trace, b.loss_trace);
    }

    #[test]
    fn predictions_depend_only_on_defuzzified_values() {
        let ds = xor_dataset();
        let cfg = TrainConfig::new(0.01, 100, 5);
        let model = train_df_mlp(&ds, (6, 6), &cfg, DefuzzMethod::Val, DEFAULT_RESOLUTION).unwrap();
        // VAL(triangular(0, 1, 2)) = 1 = VAL(crisp(1)).
        let fuzzy = FuzzyVector::from_fuzzy(vec![
            FuzzyNumber::triangular(0.0, 1.0, 2.0).unwrap(),
            FuzzyNumber::crisp(0.0).unwrap(),
        ]);
        let crisp = crisp_vec(&[1.0, 0.0]);
        assert_eq!(
            model.forward(&fuzzy).unwrap(),
            model.forward(&crisp).unwrap()
        );
    }

    #[test]
    fn predict_breaks_ties_toward_lowest_class() {
        let params = MlpParams::zeros(1, 2, 2, 3, Activation::Relu);
        let model = MlpModel {
            params,
            defuzz: DefuzzMethod::Val,
            resolution: DEFAULT_RESOLUTION,
            loss_trace: Vec::new(),
        };
        // All-zero parameters: uniform probabilities, tie resolves to 0.
        assert_eq!(model.predict(&crisp_vec(&[0.4])).unwrap(), 0);
    }

    #[test]
    fn model_kv_round_trip() {
        let ds = xor_dataset();
        let cfg = TrainConfig::new(0.01, 30, 2);
        let model = train_df_mlp(&ds, (4, 4), &cfg, DefuzzMethod::Alc, DEFAULT_RESOLUTION).unwrap();
        let doc = model.to_kv();
        let restored = MlpModel::from_kv(&KvDoc::parse(&doc.render()).unwrap()).unwrap();
        assert_eq!(model, restored);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let params = MlpParams::zeros(3, 2, 2, 2, Activation::Relu);
        assert!(forward_crisp(&params, &[1.0, 2.0]).is_err());
    }
}
