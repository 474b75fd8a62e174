//! Minibatch training of the projection network and checkpoint I/O.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurizer::{FeatureStore, HashConfig};
use crate::loss::{batch_objective, LossBreakdown, LossConfig, QuadInputs};
use crate::projector::{Dims, ProjectionParams};
use crate::quadgen::Quadruplet;
use crate::rng::seeded;

pub const CHECKPOINT_FORMAT: &str = "quadnet-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

const INIT_STREAM: u64 = 1;
const SHUFFLE_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

impl std::str::FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(format!("unknown optimizer `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub hidden: usize,
    pub d_out: usize,
    pub loss: LossConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 512,
            learning_rate: 0.001,
            epochs: 30,
            optimizer: OptimizerKind::Adam,
            seed: 0,
            hidden: 256,
            d_out: 128,
            loss: LossConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 || self.hidden == 0 || self.d_out == 0 {
            return Err(Error::Config(
                "batch size, epochs and layer sizes must be positive".into(),
            ));
        }
        // lr = 0 is allowed: it freezes the parameters
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        self.loss.validate()
    }

    pub fn dims(&self, d_in: usize) -> Dims {
        Dims::new(d_in, self.hidden, self.d_out)
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerState {
    Sgd,
    Adam {
        step: u64,
        m: ProjectionParams,
        v: ProjectionParams,
    },
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, dims: Dims) -> Self {
        match kind {
            OptimizerKind::Sgd => OptimizerState::Sgd,
            OptimizerKind::Adam => OptimizerState::Adam {
                step: 0,
                m: ProjectionParams::zeros(dims),
                v: ProjectionParams::zeros(dims),
            },
        }
    }

    pub fn apply(&mut self, params: &mut ProjectionParams, grads: &ProjectionParams, lr: f64) {
        match self {
            OptimizerState::Sgd => {
                for (p, g) in params.tensors_mut().into_iter().zip(grads.tensors()) {
                    p.iter_mut().zip(g).for_each(|(p, g)| *p -= lr * g);
                }
            }
            OptimizerState::Adam { step, m, v } => {
                *step += 1;
                let t = *step as i32;
                let c1 = 1.0 - ADAM_BETA1.powi(t);
                let c2 = 1.0 - ADAM_BETA2.powi(t);
                let tensors = params
                    .tensors_mut()
                    .into_iter()
                    .zip(grads.tensors())
                    .zip(m.tensors_mut())
                    .zip(v.tensors_mut());
                for (((p, g), m), v) in tensors {
                    for i in 0..p.len() {
                        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
                        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
                        let m_hat = m[i] / c1;
                        let v_hat = v[i] / c2;
                        p[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainState {
    pub config: TrainConfig,
    /// Hashing settings used to featurize titles, when the run used them.
    pub features: Option<HashConfig>,
    pub params: ProjectionParams,
    pub optimizer: OptimizerState,
    pub epoch: usize,
    /// Mean loss of each completed epoch.
    pub history: Vec<LossBreakdown>,
}

impl TrainState {
    /// Freshly initialized parameters for `config`, before any update.
    pub fn initial(d_in: usize, config: &TrainConfig) -> Result<Self> {
        config.validate()?;
        let dims = config.dims(d_in);
        let params = ProjectionParams::init(dims, &mut seeded(config.seed, INIT_STREAM))?;
        Ok(TrainState {
            config: config.clone(),
            features: None,
            params,
            optimizer: OptimizerState::new(config.optimizer, dims),
            epoch: 0,
            history: Vec::new(),
        })
    }
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub l_sim: f64,
    pub l_comp: f64,
    pub l_neg: f64,
    pub l_reg: f64,
    pub total: f64,
    pub wall_ms: u128,
}

/// Resolves every quadruplet to its four feature vectors, failing up front
/// on the first missing id.
pub fn resolve_inputs<'a>(quads: &[Quadruplet], store: &'a FeatureStore) -> Result<Vec<QuadInputs<'a>>> {
    quads
        .iter()
        .map(|q| {
            Ok([
                store.get(&q.anchor)?,
                store.get(&q.similar)?,
                store.get(&q.complementary)?,
                store.get(&q.negative)?,
            ])
        })
        .collect()
}

pub fn train(quads: &[Quadruplet], store: &FeatureStore, config: &TrainConfig) -> Result<TrainState> {
    train_logged(quads, store, config, |_| {})
}

/// Trains from freshly initialized parameters, calling `on_epoch` after
/// every epoch.
pub fn train_logged(
    quads: &[Quadruplet],
    store: &FeatureStore,
    config: &TrainConfig,
    on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainState> {
    let state = TrainState::initial(store.dim(), config)?;
    resume(state, quads, store, on_epoch)
}

/// Continues training `state` until it reaches `state.config.epochs`.
pub fn resume(
    mut state: TrainState,
    quads: &[Quadruplet],
    store: &FeatureStore,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainState> {
    let config = state.config.clone();
    config.validate()?;
    if quads.is_empty() {
        return Err(Error::Config("no training quadruplets".into()));
    }
    if store.dim() != state.params.dims.d_in {
        return Err(Error::Shape {
            expected: format!("features of dimension {}", state.params.dims.d_in),
            found: format!("dimension {}", store.dim()),
        });
    }
    let inputs = resolve_inputs(quads, store)?;
    let mut rng = seeded(config.seed, SHUFFLE_STREAM);
    // replay the shuffles of epochs already completed
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    for _ in 0..state.epoch {
        order.shuffle(&mut rng);
    }
    let mut batch: Vec<QuadInputs<'_>> = Vec::with_capacity(config.batch_size);
    while state.epoch < config.epochs {
        let started = Instant::now();
        order.shuffle(&mut rng);
        let (mut sums, mut reg_sum, mut used, mut batches) = ((0.0, 0.0, 0.0), 0.0, 0usize, 0usize);
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| inputs[i]));
            let obj = batch_objective(&state.params, &batch, &config.loss)?;
            if !obj.loss.is_finite() {
                return Err(Error::NonFinite {
                    what: "loss",
                    epoch: state.epoch + 1,
                    batch: b,
                });
            }
            if !obj.grads.all_finite() {
                return Err(Error::NonFinite {
                    what: "gradient",
                    epoch: state.epoch + 1,
                    batch: b,
                });
            }
            state
                .optimizer
                .apply(&mut state.params, &obj.grads, config.learning_rate);
            if !state.params.all_finite() {
                return Err(Error::NonFinite {
                    what: "parameter",
                    epoch: state.epoch + 1,
                    batch: b,
                });
            }
            let n = obj.used as f64;
            sums.0 += obj.loss.l_sim * n;
            sums.1 += obj.loss.l_comp * n;
            sums.2 += obj.loss.l_neg * n;
            reg_sum += obj.loss.l_reg;
            used += obj.used;
            batches += 1;
        }
        let denom = used.max(1) as f64;
        let (l_sim, l_comp, l_neg) = (sums.0 / denom, sums.1 / denom, sums.2 / denom);
        let l_reg = reg_sum / batches as f64;
        let mean = LossBreakdown {
            l_sim,
            l_comp,
            l_neg,
            l_reg,
            total: l_sim + l_comp + l_neg + config.loss.lambda * l_reg,
        };
        state.history.push(mean);
        state.epoch += 1;
        on_epoch(&EpochRecord {
            epoch: state.epoch,
            l_sim,
            l_comp,
            l_neg,
            l_reg,
            total: mean.total,
            wall_ms: started.elapsed().as_millis(),
        });
    }
    Ok(state)
}

#[derive(Serialize, Deserialize)]
struct Layout {
    order: String,
    w1: [usize; 2],
    b1: [usize; 1],
    w2: [usize; 2],
    b2: [usize; 1],
}

impl Layout {
    fn for_dims(d: Dims) -> Self {
        Layout {
            order: "row-major".into(),
            w1: [d.hidden, d.d_in],
            b1: [d.hidden],
            w2: [d.d_out, d.hidden],
            b2: [d.d_out],
        }
    }
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    layout: Layout,
    seed: u64,
    #[serde(flatten)]
    state: TrainState,
}

pub fn save_checkpoint(state: &TrainState, path: &Path) -> Result<()> {
    let file = CheckpointFile {
        format: CHECKPOINT_FORMAT.into(),
        version: CHECKPOINT_VERSION,
        layout: Layout::for_dims(state.params.dims),
        seed: state.config.seed,
        state: state.clone(),
    };
    let mut json = serde_json::to_string(&file)?;
    json.push('\n');
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<TrainState> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let corrupt = |reason: String| Error::CorruptCheckpoint {
        path: path.into(),
        reason,
    };
    let header: Header = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    if header.format != CHECKPOINT_FORMAT {
        return Err(corrupt(format!("unexpected format tag `{}`", header.format)));
    }
    if header.version != CHECKPOINT_VERSION {
        return Err(Error::CheckpointVersion {
            path: path.into(),
            found: header.version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let file: CheckpointFile = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    let state = file.state;
    let dims = state.params.dims;
    let layout = Layout::for_dims(dims);
    if (
        file.layout.order.as_str(),
        file.layout.w1,
        file.layout.b1,
        file.layout.w2,
        file.layout.b2,
    ) != (layout.order.as_str(), layout.w1, layout.b1, layout.w2, layout.b2)
    {
        return Err(corrupt("layout header does not match dims".into()));
    }
    state.params.validate().map_err(|e| corrupt(e.to_string()))?;
    if let OptimizerState::Adam { m, v, .. } = &state.optimizer {
        if m.dims != dims || v.dims != dims {
            return Err(corrupt("optimizer moments do not match dims".into()));
        }
        m.validate().map_err(|e| corrupt(e.to_string()))?;
        v.validate().map_err(|e| corrupt(e.to_string()))?;
    }
    if state.history.len() != state.epoch {
        return Err(corrupt("history length differs from epoch count".into()));
    }
    Ok(state)
}

/// Loads a checkpoint and checks it against the dimensions a caller is
/// about to use.
pub fn load_checkpoint_for(path: &Path, dims: Dims) -> Result<TrainState> {
    let state = load_checkpoint(path)?;
    if state.params.dims != dims {
        return Err(Error::Shape {
            expected: format!("{dims:?}"),
            found: format!("{:?} in {}", state.params.dims, path.display()),
        });
    }
    Ok(state)
}
