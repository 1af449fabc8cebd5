//! Deep belief network base learner.
//!
//! A stack of binary restricted Boltzmann machines is pretrained greedily with
//! contrastive divergence, each layer on the hidden activation probabilities
//! of the one below. A single logistic output unit is then added and the whole
//! stack is fine-tuned as a feed-forward classifier by mini-batch gradient
//! descent on binary cross-entropy, for exactly `max_it` epochs.
//!
//! Inputs must lie in `[0, 1]`; see [`squash`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sigmoid, softplus, Matrix, RngStream};

/// Standard deviation of the Gaussian weight initialisation.
pub const INIT_STDDEV: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DbnHyperparams {
    pub hidden_sizes: Vec<usize>,
    /// Gibbs steps in the negative phase of contrastive divergence.
    pub cd_k: usize,
    pub pretrain_epochs: usize,
    pub pretrain_lr: f64,
    /// With the small initial weights, rates below about 1 leave fine-tuning
    /// on the initial plateau (loss stays at ln 2) within 50 epochs.
    pub finetune_lr: f64,
    pub batch_size: usize,
    /// Exact number of fine-tuning epochs.
    pub max_it: usize,
}

impl Default for DbnHyperparams {
    fn default() -> Self {
        Self {
            hidden_sizes: vec![10, 5],
            cd_k: 1,
            pretrain_epochs: 10,
            pretrain_lr: 0.1,
            finetune_lr: 2.0,
            batch_size: 16,
            max_it: 50,
        }
    }
}

impl DbnHyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_sizes.is_empty() || self.hidden_sizes.contains(&0) {
            return Err(Error::Config(
                "hidden layer sizes must be positive and non-empty".into(),
            ));
        }
        if self.cd_k == 0 || self.batch_size == 0 || self.max_it == 0 {
            return Err(Error::Config(
                "cd_k, batch_size and max_it must be at least 1".into(),
            ));
        }
        let rates = [self.pretrain_lr, self.finetune_lr];
        if rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        Ok(())
    }
}

/// One binary RBM: `weights` is visible × hidden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbmLayer {
    pub weights: Matrix,
    pub visible_bias: Vec<f64>,
    pub hidden_bias: Vec<f64>,
}

impl RbmLayer {
    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        Self {
            weights: Matrix::zeros(n_visible, n_hidden),
            visible_bias: vec![0.0; n_visible],
            hidden_bias: vec![0.0; n_hidden],
        }
    }

    /// Weights from N(0, 0.01²) drawn in row-major order, biases zero.
    pub fn random(n_visible: usize, n_hidden: usize, rng: &mut RngStream) -> Self {
        Self {
            weights: Matrix::from_fn(n_visible, n_hidden, |_, _| INIT_STDDEV * rng.normal()),
            visible_bias: vec![0.0; n_visible],
            hidden_bias: vec![0.0; n_hidden],
        }
    }

    pub fn n_visible(&self) -> usize {
        self.weights.rows()
    }

    pub fn n_hidden(&self) -> usize {
        self.weights.cols()
    }

    /// `P(h = 1 | v) = σ(v·W + b_h)`, row-wise.
    pub fn hidden_probs(&self, visible: &Matrix) -> Result<Matrix> {
        let mut a = visible.matmul(&self.weights)?;
        a.add_row_vector(&self.hidden_bias);
        a.map_inplace(sigmoid);
        Ok(a)
    }

    /// `P(v = 1 | h) = σ(h·Wᵀ + b_v)`, row-wise.
    pub fn visible_probs(&self, hidden: &Matrix) -> Result<Matrix> {
        let mut a = hidden.matmul_t(&self.weights)?;
        a.add_row_vector(&self.visible_bias);
        a.map_inplace(sigmoid);
        Ok(a)
    }

    /// Mean squared error of the mean-field reconstruction `v → p(h) → p(v)`.
    pub fn reconstruction_error(&self, visible: &Matrix) -> Result<f64> {
        let recon = self.visible_probs(&self.hidden_probs(visible)?)?;
        let n = visible.as_slice().len().max(1) as f64;
        Ok(visible
            .as_slice()
            .iter()
            .zip(recon.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / n)
    }

    fn check(&self) -> Result<()> {
        if self.visible_bias.len() != self.n_visible() || self.hidden_bias.len() != self.n_hidden()
        {
            return Err(Error::Contract(
                "RBM bias lengths do not match weights".into(),
            ));
        }
        Ok(())
    }
}

/// Bernoulli samples of `probs`, one uniform draw per entry in row-major order.
fn sample_bernoulli(probs: &Matrix, rng: &mut RngStream) -> Matrix {
    probs.map(|p| if rng.uniform() < p { 1.0 } else { 0.0 })
}

/// One CD-k step on a mini-batch.
///
/// The chain starts from sampled hidden states of the data; each Gibbs step
/// reconstructs visible probabilities (not samples) and recomputes hidden
/// probabilities, sampling hidden states only when another step follows. A
/// CD-1 update therefore consumes exactly `batch_rows × n_hidden` uniforms.
///
/// `ΔW = lr·(v₀ᵀp(h|v₀) − v_kᵀp(h|v_k)) / batch_rows`, with the bias updates
/// given by the corresponding column means.
pub fn rbm_cd_update(
    layer: &RbmLayer,
    batch: &Matrix,
    lr: f64,
    cd_k: usize,
    rng: &mut RngStream,
) -> Result<RbmLayer> {
    layer.check()?;
    if batch.cols() != layer.n_visible() {
        return Err(Error::Contract(format!(
            "batch has {} columns, RBM has {} visible units",
            batch.cols(),
            layer.n_visible()
        )));
    }
    if batch.as_slice().iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Contract(
            "RBM visible values must lie in [0, 1]".into(),
        ));
    }
    if cd_k == 0 {
        return Err(Error::Contract("cd_k must be at least 1".into()));
    }
    let rows = batch.rows();
    if rows == 0 {
        return Ok(layer.clone());
    }

    let pos_hidden = layer.hidden_probs(batch)?;
    let mut hidden = sample_bernoulli(&pos_hidden, rng);
    let mut neg_visible = batch.clone();
    let mut neg_hidden = pos_hidden.clone();
    for step in 0..cd_k {
        neg_visible = layer.visible_probs(&hidden)?;
        neg_hidden = layer.hidden_probs(&neg_visible)?;
        if step + 1 < cd_k {
            hidden = sample_bernoulli(&neg_hidden, rng);
        }
    }

    let pos_assoc = batch.t_matmul(&pos_hidden)?;
    let neg_assoc = neg_visible.t_matmul(&neg_hidden)?;
    let scale = lr / rows as f64;
    let mut next = layer.clone();
    for ((w, p), n) in next
        .weights
        .as_mut_slice()
        .iter_mut()
        .zip(pos_assoc.as_slice())
        .zip(neg_assoc.as_slice())
    {
        *w += scale * (p - n);
    }
    for ((b, p), n) in next
        .visible_bias
        .iter_mut()
        .zip(batch.column_sums())
        .zip(neg_visible.column_sums())
    {
        *b += scale * (p - n);
    }
    for ((b, p), n) in next
        .hidden_bias
        .iter_mut()
        .zip(pos_hidden.column_sums())
        .zip(neg_hidden.column_sums())
    {
        *b += scale * (p - n);
    }
    Ok(next)
}

/// Maps standardized features into `(0, 1)` with the logistic function so they
/// can be read as Bernoulli visible probabilities.
pub fn squash(standardized: &Matrix) -> Matrix {
    standardized.map(sigmoid)
}

/// RBM stack plus logistic output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbnModel {
    pub hyperparams: DbnHyperparams,
    pub layers: Vec<RbmLayer>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

/// Gradient of the mean binary cross-entropy with respect to every
/// discriminative parameter. Visible biases take no part in the feed-forward
/// pass and have no entry here.
#[derive(Debug, Clone, PartialEq)]
pub struct DbnGradients {
    pub weights: Vec<Matrix>,
    pub hidden_bias: Vec<Vec<f64>>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

impl DbnGradients {
    /// Same order as [`DbnModel::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.hidden_bias) {
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b);
        }
        out.extend_from_slice(&self.output_weights);
        out.push(self.output_bias);
        out
    }
}

impl DbnModel {
    /// All-zero model; predicts 0.5 everywhere.
    pub fn zeros(n_visible: usize, hyperparams: DbnHyperparams) -> Self {
        let mut sizes = vec![n_visible];
        sizes.extend(&hyperparams.hidden_sizes);
        let layers = sizes
            .windows(2)
            .map(|w| RbmLayer::zeros(w[0], w[1]))
            .collect();
        Self {
            output_weights: vec![0.0; *sizes.last().unwrap()],
            output_bias: 0.0,
            layers,
            hyperparams,
        }
    }

    /// Visible size followed by each hidden size.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.n_visible()];
        sizes.extend(self.layers.iter().map(RbmLayer::n_hidden));
        sizes
    }

    pub fn n_visible(&self) -> usize {
        self.layers.first().map_or(0, RbmLayer::n_visible)
    }

    /// Checks shape consistency and finiteness, e.g. after deserializing.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Contract("DBN has no layers".into()));
        }
        for layer in &self.layers {
            layer.check()?;
            if !layer.weights.is_finite() {
                return Err(Error::Contract("non-finite DBN weight".into()));
            }
        }
        for w in self.layers.windows(2) {
            if w[0].n_hidden() != w[1].n_visible() {
                return Err(Error::Contract("adjacent DBN layers do not chain".into()));
            }
        }
        if self.output_weights.len() != self.layers.last().unwrap().n_hidden() {
            return Err(Error::Contract(
                "output weights do not match last hidden layer".into(),
            ));
        }
        if !self.output_bias.is_finite() || self.output_weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Contract("non-finite output weight".into()));
        }
        Ok(())
    }

    /// Activations of every layer, input first.
    fn activations(&self, x: &Matrix) -> Result<Vec<Matrix>> {
        if x.cols() != self.n_visible() {
            return Err(Error::Contract(format!(
                "input has {} columns, model expects {}",
                x.cols(),
                self.n_visible()
            )));
        }
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.clone());
        for layer in &self.layers {
            let next = layer.hidden_probs(acts.last().unwrap())?;
            acts.push(next);
        }
        Ok(acts)
    }

    fn output_logits(&self, top: &Matrix) -> Vec<f64> {
        (0..top.rows())
            .map(|i| crate::numerics::dot(top.row(i), &self.output_weights) + self.output_bias)
            .collect()
    }

    pub fn logits(&self, x: &Matrix) -> Result<Vec<f64>> {
        let acts = self.activations(x)?;
        Ok(self.output_logits(acts.last().unwrap()))
    }

    /// Deterministic forward pass; `P(minority)` per row.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        Ok(self.logits(x)?.into_iter().map(sigmoid).collect())
    }

    /// Mean binary cross-entropy, computed from logits.
    pub fn loss(&self, x: &Matrix, y: &[u8]) -> Result<f64> {
        check_labels(x, y)?;
        let z = self.logits(x)?;
        let n = y.len().max(1) as f64;
        Ok(z.iter()
            .zip(y)
            .map(|(&z, &t)| softplus(z) - f64::from(t) * z)
            .sum::<f64>()
            / n)
    }

    /// Backpropagated gradient of [`DbnModel::loss`].
    pub fn gradients(&self, x: &Matrix, y: &[u8]) -> Result<DbnGradients> {
        check_labels(x, y)?;
        let acts = self.activations(x)?;
        let top = acts.last().unwrap();
        let n = y.len().max(1) as f64;
        let out_delta: Vec<f64> = self
            .output_logits(top)
            .into_iter()
            .zip(y)
            .map(|(z, &t)| (sigmoid(z) - f64::from(t)) / n)
            .collect();

        let mut output_weights = vec![0.0; self.output_weights.len()];
        for (i, d) in out_delta.iter().enumerate() {
            for (g, a) in output_weights.iter_mut().zip(top.row(i)) {
                *g += d * a;
            }
        }
        let output_bias = out_delta.iter().sum();

        // delta of the top hidden layer's pre-activations
        let mut delta = Matrix::from_fn(top.rows(), top.cols(), |i, j| {
            let a = top.get(i, j);
            out_delta[i] * self.output_weights[j] * a * (1.0 - a)
        });
        let depth = self.layers.len();
        let mut weights = vec![Matrix::zeros(0, 0); depth];
        let mut hidden_bias = vec![Vec::new(); depth];
        for l in (0..depth).rev() {
            let input = &acts[l];
            weights[l] = input.t_matmul(&delta)?;
            hidden_bias[l] = delta.column_sums();
            if l > 0 {
                let mut back = delta.matmul_t(&self.layers[l].weights)?;
                for (b, a) in back.as_mut_slice().iter_mut().zip(input.as_slice()) {
                    *b *= a * (1.0 - a);
                }
                delta = back;
            }
        }
        Ok(DbnGradients {
            weights,
            hidden_bias,
            output_weights,
            output_bias,
        })
    }

    /// Flattened discriminative parameters: each layer's weights (row-major)
    /// then hidden bias, then the output weights and bias.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            out.extend_from_slice(layer.weights.as_slice());
            out.extend_from_slice(&layer.hidden_bias);
        }
        out.extend_from_slice(&self.output_weights);
        out.push(self.output_bias);
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameters().len() {
            return Err(Error::Contract(format!(
                "expected {} parameters, got {}",
                self.parameters().len(),
                params.len()
            )));
        }
        let mut rest = params;
        for layer in &mut self.layers {
            let (w, r) = rest.split_at(layer.weights.as_slice().len());
            layer.weights.as_mut_slice().copy_from_slice(w);
            let (b, r) = r.split_at(layer.hidden_bias.len());
            layer.hidden_bias.copy_from_slice(b);
            rest = r;
        }
        let (w, r) = rest.split_at(self.output_weights.len());
        self.output_weights.copy_from_slice(w);
        self.output_bias = r[0];
        Ok(())
    }

    /// `θ ← θ − lr·∇θ`.
    pub fn apply_gradients(&mut self, grads: &DbnGradients, lr: f64) {
        for ((layer, gw), gb) in self
            .layers
            .iter_mut()
            .zip(&grads.weights)
            .zip(&grads.hidden_bias)
        {
            for (w, g) in layer.weights.as_mut_slice().iter_mut().zip(gw.as_slice()) {
                *w -= lr * g;
            }
            for (b, g) in layer.hidden_bias.iter_mut().zip(gb) {
                *b -= lr * g;
            }
        }
        for (w, g) in self.output_weights.iter_mut().zip(&grads.output_weights) {
            *w -= lr * g;
        }
        self.output_bias -= lr * grads.output_bias;
    }
}

fn check_labels(x: &Matrix, y: &[u8]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::Contract(format!(
            "{} rows but {} labels",
            x.rows(),
            y.len()
        )));
    }
    Ok(())
}

/// Greedy layer-wise pretraining. Returns the untuned model together with the
/// matrix each layer was trained on (input first).
pub fn pretrain_traced(
    hyper: &DbnHyperparams,
    x: &Matrix,
    rng: &mut RngStream,
) -> Result<(DbnModel, Vec<Matrix>)> {
    hyper.validate()?;
    let mut inputs = vec![x.clone()];
    let mut layers = Vec::with_capacity(hyper.hidden_sizes.len());
    let mut n_visible = x.cols();
    for &n_hidden in &hyper.hidden_sizes {
        let input = inputs.last().unwrap();
        let mut layer = RbmLayer::random(n_visible, n_hidden, rng);
        for _ in 0..hyper.pretrain_epochs {
            let order = rng.permutation(input.rows());
            for chunk in order.chunks(hyper.batch_size) {
                let batch = input.select_rows(chunk);
                layer = rbm_cd_update(&layer, &batch, hyper.pretrain_lr, hyper.cd_k, rng)?;
            }
        }
        let hidden = layer.hidden_probs(input)?;
        layers.push(layer);
        inputs.push(hidden);
        n_visible = n_hidden;
    }
    inputs.pop();
    let output_weights = (0..n_visible).map(|_| INIT_STDDEV * rng.normal()).collect();
    let model = DbnModel {
        hyperparams: hyper.clone(),
        layers,
        output_weights,
        output_bias: 0.0,
    };
    Ok((model, inputs))
}

pub fn pretrain(hyper: &DbnHyperparams, x: &Matrix, rng: &mut RngStream) -> Result<DbnModel> {
    pretrain_traced(hyper, x, rng).map(|(m, _)| m)
}

/// Fine-tunes for exactly `hyper.max_it` epochs and returns the model with
/// the full-data loss recorded after each epoch.
pub fn finetune_traced(
    model: &DbnModel,
    x: &Matrix,
    y: &[u8],
    hyper: &DbnHyperparams,
    rng: &mut RngStream,
) -> Result<(DbnModel, Vec<f64>)> {
    hyper.validate()?;
    check_labels(x, y)?;
    let mut model = model.clone();
    let mut history = Vec::with_capacity(hyper.max_it);
    for _ in 0..hyper.max_it {
        let order = rng.permutation(x.rows());
        for chunk in order.chunks(hyper.batch_size) {
            let bx = x.select_rows(chunk);
            let by: Vec<u8> = chunk.iter().map(|&i| y[i]).collect();
            let grads = model.gradients(&bx, &by)?;
            model.apply_gradients(&grads, hyper.finetune_lr);
        }
        history.push(model.loss(x, y)?);
    }
    if let Some(l) = history.last() {
        if !l.is_finite() {
            return Err(Error::Training("fine-tuning diverged".into()));
        }
    }
    Ok((model, history))
}

pub fn finetune(
    model: &DbnModel,
    x: &Matrix,
    y: &[u8],
    hyper: &DbnHyperparams,
    rng: &mut RngStream,
) -> Result<DbnModel> {
    finetune_traced(model, x, y, hyper, rng).map(|(m, _)| m)
}

/// Pretrain then fine-tune on inputs already in `[0, 1]`.
pub fn train_dbn(
    hyper: &DbnHyperparams,
    x: &Matrix,
    y: &[u8],
    rng: &mut RngStream,
) -> Result<DbnModel> {
    let model = pretrain(hyper, x, rng)?;
    finetune(&model, x, y, hyper, rng)
}
