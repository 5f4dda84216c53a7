//! Binary Fulfilled-vs-Unfulfilled classifiers over sparse feature vectors.
//!
//! Logistic regression is trained by full-batch gradient descent from a zero
//! start on
//!
//! ```text
//! L(w, b) = (1/n) Σ logloss(σ(w·xᵢ + b), yᵢ) + (λ / 2n) ‖w‖²
//! ```
//!
//! The bias is not penalised. Training rows are put into a canonical order
//! before any arithmetic, so the fitted weights do not depend on how the
//! caller ordered the data. Multinomial Naive Bayes uses additive smoothing.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::FulfillmentLabel;
use crate::features::{FeatureConfig, FeatureVector};
use crate::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Keeps probabilities strictly inside (0, 1) when the margin saturates.
const PROB_EPS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Lr,
    Nb,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Lr => "lr",
            ModelKind::Nb => "nb",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lr" | "logistic" => Ok(ModelKind::Lr),
            "nb" | "naive-bayes" => Ok(ModelKind::Nb),
            other => Err(Error::Config(format!("unknown model kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: FulfillmentLabel,
    /// Probability of Fulfilled.
    pub probability: f64,
}

impl Prediction {
    fn from_probability(p: f64, threshold: f64) -> Self {
        let probability = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
        let label = if probability >= threshold {
            FulfillmentLabel::Fulfilled
        } else {
            FulfillmentLabel::Unfulfilled
        };
        Prediction { label, probability }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LrHyper {
    pub l2_lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Halve the step until the loss does not increase.
    pub line_search: bool,
    /// Divide each feature by its largest absolute training value.
    pub scale: bool,
    pub threshold: f64,
}

impl Default for LrHyper {
    fn default() -> Self {
        Self {
            l2_lambda: 1.0,
            learning_rate: 0.1,
            epochs: 500,
            seed: 13,
            line_search: true,
            scale: false,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub epochs: usize,
    pub learning_rate: f64,
    pub line_search: bool,
    pub seed: u64,
    pub final_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// Column order of `weights`.
    pub feature_index: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2_lambda: f64,
    /// Per-column divisors when trained with scaling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Vec<f64>>,
    pub threshold: f64,
    pub training_meta: TrainingMeta,
}

/// Binary target used by the trainers: `true` is Fulfilled.
fn target(label: FulfillmentLabel) -> Result<bool> {
    match label {
        FulfillmentLabel::Fulfilled => Ok(true),
        FulfillmentLabel::Unfulfilled => Ok(false),
        other => Err(Error::Training(format!(
            "label {other} is not Fulfilled or Unfulfilled"
        ))),
    }
}

fn check_classes(train: &[(FeatureVector, FulfillmentLabel)]) -> Result<Vec<bool>> {
    if train.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    let ys = train.iter().map(|(_, l)| target(*l)).collect::<Result<Vec<_>>>()?;
    if ys.iter().all(|&y| y) || ys.iter().all(|&y| !y) {
        return Err(Error::Training("training set contains a single class".into()));
    }
    Ok(ys)
}

fn build_index(train: &[(FeatureVector, FulfillmentLabel)]) -> Vec<String> {
    let names: BTreeSet<&str> = train.iter().flat_map(|(fv, _)| fv.iter().map(|(k, _)| k)).collect();
    names.into_iter().map(str::to_string).collect()
}

type SparseRow = Vec<(usize, f64)>;

fn sparse_row(fv: &FeatureVector, index: &HashMap<&str, usize>) -> SparseRow {
    // FeatureVector iterates in name order and the index is sorted by name,
    // so columns come out ascending.
    fv.iter()
        .filter(|(_, v)| *v != 0.0)
        .filter_map(|(k, v)| index.get(k).map(|&c| (c, v)))
        .collect()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// The regularised logistic objective over fixed data. Parameters are the
/// weights followed by the bias.
#[derive(Debug, Clone)]
pub struct LogisticLoss {
    rows: Vec<SparseRow>,
    ys: Vec<bool>,
    dim: usize,
    lambda: f64,
}

impl LogisticLoss {
    pub fn new(rows: Vec<Vec<(usize, f64)>>, ys: Vec<bool>, dim: usize, lambda: f64) -> Self {
        assert_eq!(rows.len(), ys.len());
        Self { rows, ys, dim, lambda }
    }

    /// Number of parameters including the bias.
    pub fn n_params(&self) -> usize {
        self.dim + 1
    }

    fn margin(&self, row: &SparseRow, params: &[f64]) -> f64 {
        row.iter().map(|&(c, v)| params[c] * v).sum::<f64>() + params[self.dim]
    }

    pub fn loss(&self, params: &[f64]) -> f64 {
        let n = self.rows.len() as f64;
        let data: f64 = self
            .rows
            .iter()
            .zip(&self.ys)
            .map(|(row, &y)| {
                let z = self.margin(row, params);
                softplus(z) - if y { z } else { 0.0 }
            })
            .sum();
        let reg: f64 = params[..self.dim].iter().map(|w| w * w).sum();
        data / n + self.lambda * reg / (2.0 * n)
    }

    /// Gradient of the data term alone.
    pub fn data_gradient(&self, params: &[f64]) -> Vec<f64> {
        let n = self.rows.len() as f64;
        let mut g = vec![0.0; self.dim + 1];
        for (row, &y) in self.rows.iter().zip(&self.ys) {
            let r = sigmoid(self.margin(row, params)) - if y { 1.0 } else { 0.0 };
            for &(c, v) in row {
                g[c] += r * v;
            }
            g[self.dim] += r;
        }
        for gc in g.iter_mut() {
            *gc /= n;
        }
        g
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        let n = self.rows.len() as f64;
        let mut g = self.data_gradient(params);
        for (gc, w) in g.iter_mut().zip(&params[..self.dim]) {
            *gc += self.lambda * w / n;
        }
        g
    }

    /// One descent step of size `step`. The penalty is applied in closed
    /// form (a proximal step), which stays stable however large λ is.
    fn step_into(&self, params: &[f64], data_grad: &[f64], step: f64, out: &mut [f64]) {
        let shrink = 1.0 + step * self.lambda / self.rows.len() as f64;
        for c in 0..self.dim {
            out[c] = (params[c] - step * data_grad[c]) / shrink;
        }
        out[self.dim] = params[self.dim] - step * data_grad[self.dim];
    }
}

/// Full-batch proximal gradient descent on `objective` from `params`.
/// Returns the loss after every step (the first entry is the starting loss).
pub fn gradient_descent(
    objective: &LogisticLoss,
    params: &mut [f64],
    learning_rate: f64,
    epochs: usize,
    line_search: bool,
) -> Result<Vec<f64>> {
    let mut loss = objective.loss(params);
    let mut history = vec![loss];
    let mut candidate = params.to_vec();
    for epoch in 0..epochs {
        let g = objective.data_gradient(params);
        let mut step = learning_rate;
        let mut next;
        loop {
            objective.step_into(params, &g, step, &mut candidate);
            next = objective.loss(&candidate);
            if !line_search || (next.is_finite() && next <= loss) || step < 1e-12 {
                break;
            }
            step /= 2.0;
        }
        if !next.is_finite() {
            return Err(Error::Training(format!(
                "loss became non-finite at epoch {epoch} (learning rate {learning_rate}); \
                 lower the learning rate or enable the line search"
            )));
        }
        if line_search && next > loss {
            // No descent step exists at this precision: converged.
            history.push(loss);
            continue;
        }
        params.copy_from_slice(&candidate);
        loss = next;
        history.push(loss);
    }
    Ok(history)
}

pub fn train_lr(train: &[(FeatureVector, FulfillmentLabel)], hyper: &LrHyper) -> Result<LinearModel> {
    let ys = check_classes(train)?;
    if !(hyper.l2_lambda >= 0.0 && hyper.learning_rate > 0.0) {
        return Err(Error::Training("l2_lambda must be >= 0 and learning_rate > 0".into()));
    }
    let feature_index = build_index(train);
    let lookup: HashMap<&str, usize> = feature_index
        .iter()
        .enumerate()
        .map(|(i, k)| (k.as_str(), i))
        .collect();
    let mut rows: Vec<(bool, SparseRow)> = train
        .iter()
        .zip(ys)
        .map(|((fv, _), y)| (y, sparse_row(fv, &lookup)))
        .collect();

    let scale = hyper.scale.then(|| {
        let mut m = vec![0.0f64; feature_index.len()];
        for (_, row) in &rows {
            for &(c, v) in row {
                m[c] = m[c].max(v.abs());
            }
        }
        m.iter().map(|&x| if x > 0.0 { x } else { 1.0 }).collect::<Vec<_>>()
    });
    if let Some(s) = &scale {
        for (_, row) in &mut rows {
            for (c, v) in row.iter_mut() {
                *v /= s[*c];
            }
        }
    }

    rows.sort_by(|a, b| {
        a.0.cmp(&b.0).then_with(|| {
            let ka = a.1.iter().map(|&(c, v)| (c, v.to_bits()));
            let kb = b.1.iter().map(|&(c, v)| (c, v.to_bits()));
            ka.cmp(kb)
        })
    });
    let (ys, rows): (Vec<bool>, Vec<SparseRow>) = rows.into_iter().unzip();
    let objective = LogisticLoss::new(rows, ys, feature_index.len(), hyper.l2_lambda);
    let mut params = vec![0.0; objective.n_params()];
    let history = gradient_descent(
        &objective,
        &mut params,
        hyper.learning_rate,
        hyper.epochs,
        hyper.line_search,
    )?;
    let bias = params.pop().expect("bias parameter");
    if params.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
        return Err(Error::Training("non-finite weights after training".into()));
    }
    Ok(LinearModel {
        feature_index,
        weights: params,
        bias,
        l2_lambda: hyper.l2_lambda,
        scale,
        threshold: hyper.threshold,
        training_meta: TrainingMeta {
            epochs: hyper.epochs,
            learning_rate: hyper.learning_rate,
            line_search: hyper.line_search,
            seed: hyper.seed,
            final_loss: *history.last().expect("history has the start loss"),
        },
    })
}

impl LinearModel {
    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.feature_index.len() {
            return Err(Error::Model(format!(
                "{} weights for {} features",
                self.weights.len(),
                self.feature_index.len()
            )));
        }
        if let Some(s) = &self.scale {
            if s.len() != self.weights.len() {
                return Err(Error::Model("scale vector length mismatch".into()));
            }
        }
        if self.weights.iter().chain([&self.bias]).any(|w| !w.is_finite()) {
            return Err(Error::Model("non-finite weight".into()));
        }
        Ok(())
    }

    /// w·x + b over the features the model knows.
    pub fn margin(&self, fv: &FeatureVector) -> f64 {
        let mut z = self.bias;
        for (name, v) in fv.iter() {
            if let Ok(c) = self.feature_index.binary_search_by(|k| k.as_str().cmp(name)) {
                let v = match &self.scale {
                    Some(s) => v / s[c],
                    None => v,
                };
                z += self.weights[c] * v;
            }
        }
        z
    }

    pub fn predict(&self, fv: &FeatureVector) -> Prediction {
        Prediction::from_probability(sigmoid(self.margin(fv)), self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    /// P(Fulfilled), P(Unfulfilled).
    pub class_priors: [f64; 2],
    pub feature_index: Vec<String>,
    /// P(feature | Fulfilled), P(feature | Unfulfilled) per feature.
    pub likelihoods: Vec<[f64; 2]>,
    pub alpha: f64,
    pub threshold: f64,
}

pub fn train_nb(train: &[(FeatureVector, FulfillmentLabel)], alpha: f64) -> Result<NbModel> {
    let ys = check_classes(train)?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Training(format!("smoothing alpha must be >= 0, got {alpha}")));
    }
    let feature_index = build_index(train);
    let lookup: HashMap<&str, usize> = feature_index
        .iter()
        .enumerate()
        .map(|(i, k)| (k.as_str(), i))
        .collect();
    let mut counts = vec![[0.0f64; 2]; feature_index.len()];
    let mut docs = [0usize; 2];
    for ((fv, _), y) in train.iter().zip(ys) {
        let class = if y { 0 } else { 1 };
        docs[class] += 1;
        for (name, v) in fv.iter() {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::Training(format!(
                    "Naive Bayes needs non-negative counts; {name} = {v}"
                )));
            }
            counts[lookup[name]][class] += v;
        }
    }
    let vocab = feature_index.len() as f64;
    let totals = [0, 1].map(|c| counts.iter().map(|row| row[c]).sum::<f64>());
    let likelihoods = counts
        .iter()
        .map(|row| {
            [0, 1].map(|c| {
                let denom = totals[c] + alpha * vocab;
                if denom > 0.0 {
                    (row[c] + alpha) / denom
                } else {
                    0.0
                }
            })
        })
        .collect();
    let n = train.len() as f64;
    Ok(NbModel {
        class_priors: [docs[0] as f64 / n, docs[1] as f64 / n],
        feature_index,
        likelihoods,
        alpha,
        threshold: DEFAULT_THRESHOLD,
    })
}

impl NbModel {
    pub fn validate(&self) -> Result<()> {
        if self.likelihoods.len() != self.feature_index.len() {
            return Err(Error::Model("likelihood table length mismatch".into()));
        }
        let sum = self.class_priors[0] + self.class_priors[1];
        if (sum - 1.0).abs() > 1e-9 || self.class_priors.iter().any(|p| *p <= 0.0 || *p >= 1.0) {
            return Err(Error::Model(format!("bad class priors {:?}", self.class_priors)));
        }
        Ok(())
    }

    /// Log joint scores for (Fulfilled, Unfulfilled). Features unseen in
    /// training are skipped; with `alpha = 0` so are zero likelihoods, which
    /// amounts to giving them probability 1.
    pub fn log_scores(&self, fv: &FeatureVector) -> [f64; 2] {
        let mut s = self.class_priors.map(f64::ln);
        for (name, v) in fv.iter() {
            if v == 0.0 {
                continue;
            }
            if let Ok(c) = self.feature_index.binary_search_by(|k| k.as_str().cmp(name)) {
                for (k, sk) in s.iter_mut().enumerate() {
                    let p = self.likelihoods[c][k];
                    if p > 0.0 {
                        *sk += v * p.ln();
                    }
                }
            }
        }
        s
    }

    pub fn predict(&self, fv: &FeatureVector) -> Prediction {
        let [f, u] = self.log_scores(fv);
        Prediction::from_probability(sigmoid(f - u), self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Lr(LinearModel),
    Nb(NbModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Lr(_) => ModelKind::Lr,
            Model::Nb(_) => ModelKind::Nb,
        }
    }

    pub fn predict(&self, fv: &FeatureVector) -> Prediction {
        match self {
            Model::Lr(m) => m.predict(fv),
            Model::Nb(m) => m.predict(fv),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Lr(m) => m.validate(),
            Model::Nb(m) => m.validate(),
        }
    }
}

/// Hyperparameters for either model kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub kind: ModelKind,
    pub lr: LrHyper,
    pub nb_alpha: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::Lr,
            lr: LrHyper::default(),
            nb_alpha: 1.0,
        }
    }
}

pub fn train(data: &[(FeatureVector, FulfillmentLabel)], config: &TrainConfig) -> Result<Model> {
    match config.kind {
        ModelKind::Lr => train_lr(data, &config.lr).map(Model::Lr),
        ModelKind::Nb => train_nb(data, config.nb_alpha).map(Model::Nb),
    }
}

/// What goes on disk: the model plus the feature configuration (including
/// any frozen BOW vocabulary) needed to featurize new instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub features: FeatureConfig,
    pub model: Model,
}

impl ModelFile {
    pub fn new(features: FeatureConfig, model: Model) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            features,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let probe: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        match probe.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == MODEL_FORMAT_VERSION as u64 => {}
            Some(v) => {
                return Err(Error::Model(format!(
                    "format version {v} is not supported (expected {MODEL_FORMAT_VERSION})"
                )))
            }
            None => return Err(Error::Model("missing format_version".into())),
        }
        let file: ModelFile = serde_json::from_value(probe).map_err(|e| Error::Model(e.to_string()))?;
        file.model.validate()?;
        Ok(file)
    }
}

pub fn save_model(path: &Path, file: &ModelFile) -> Result<()> {
    std::fs::write(path, file.to_json()).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ModelFile::from_json(&text)
}
