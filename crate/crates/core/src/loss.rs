//! Hinge losses on unit-vector distances and their subgradients.
//!
//! The quadruplet objective places similar items within `m_s` of the anchor,
//! complementary items in the band `[m_s, m_c]`, and negatives beyond `m_n`.
//! The triplet baseline only asks complementary items to be `margin` closer
//! than negatives.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projector::{euclidean, ProjectionParams};

/// Distances at or below this have zero gradient.
pub const EPS_DIST: f64 = 1e-12;

/// Examples per parallel shard when computing a batch gradient. Shard
/// results are reduced in index order, so the sum does not depend on the
/// number of worker threads.
pub const SHARD_SIZE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossMode {
    Quadruplet,
    Triplet,
}

impl std::str::FromStr for LossMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quadruplet" => Ok(LossMode::Quadruplet),
            "triplet" => Ok(LossMode::Triplet),
            other => Err(format!("unknown loss mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossConfig {
    pub m_s: f64,
    pub m_c: f64,
    pub m_n: f64,
    pub lambda: f64,
    pub mode: LossMode,
    pub triplet_margin: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            m_s: 0.1,
            m_c: 0.4,
            m_n: 0.8,
            lambda: 1e-4,
            mode: LossMode::Quadruplet,
            triplet_margin: 0.2,
        }
    }
}

impl LossConfig {
    pub fn new(m_s: f64, m_c: f64, m_n: f64, lambda: f64, mode: LossMode) -> Result<Self> {
        let config = LossConfig {
            m_s,
            m_c,
            m_n,
            lambda,
            mode,
            ..LossConfig::default()
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.m_s && self.m_s < self.m_c && self.m_c < self.m_n) {
            return Err(Error::Config(format!(
                "margins must satisfy 0 < m_s < m_c < m_n, got {}, {}, {}",
                self.m_s, self.m_c, self.m_n
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.triplet_margin >= 0.0 && self.triplet_margin.is_finite()) {
            return Err(Error::Config(format!(
                "triplet margin must be >= 0, got {}",
                self.triplet_margin
            )));
        }
        Ok(())
    }
}

pub fn loss_sim(d_as: f64, m_s: f64) -> f64 {
    (d_as - m_s).max(0.0)
}

pub fn loss_comp(d_ac: f64, m_s: f64, m_c: f64) -> f64 {
    (d_ac - m_c).max(0.0) + (m_s - d_ac).max(0.0)
}

pub fn loss_neg(d_an: f64, m_n: f64) -> f64 {
    (m_n - d_an).max(0.0)
}

pub fn loss_triplet(d_ac: f64, d_an: f64, margin: f64) -> f64 {
    // summed in this order so that d_an == d_ac + margin gives exactly 0
    (d_ac + margin - d_an).max(0.0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub l_sim: f64,
    pub l_comp: f64,
    pub l_neg: f64,
    pub l_reg: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn assemble(l_sim: f64, l_comp: f64, l_neg: f64, l_reg: f64, lambda: f64) -> Self {
        LossBreakdown {
            l_sim,
            l_comp,
            l_neg,
            l_reg,
            total: l_sim + l_comp + l_neg + lambda * l_reg,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.l_sim, self.l_comp, self.l_neg, self.l_reg, self.total]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Anchor-relative distances of one quadruplet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadDistances {
    pub d_as: f64,
    pub d_ac: f64,
    pub d_an: f64,
}

/// Unit projections of one quadruplet.
#[derive(Debug, Clone, Copy)]
pub struct QuadUnits<'a> {
    pub anchor: &'a [f64],
    pub similar: &'a [f64],
    pub complementary: &'a [f64],
    pub negative: &'a [f64],
}

impl QuadUnits<'_> {
    pub fn distances(&self) -> QuadDistances {
        QuadDistances {
            d_as: euclidean(self.anchor, self.similar),
            d_ac: euclidean(self.anchor, self.complementary),
            d_an: euclidean(self.anchor, self.negative),
        }
    }
}

/// `(l_sim, l_comp, l_neg)` for one quadruplet. In triplet mode the single
/// triplet term is reported as `l_comp`.
pub fn hinge_terms(d: QuadDistances, config: &LossConfig) -> (f64, f64, f64) {
    match config.mode {
        LossMode::Quadruplet => (
            loss_sim(d.d_as, config.m_s),
            loss_comp(d.d_ac, config.m_s, config.m_c),
            loss_neg(d.d_an, config.m_n),
        ),
        LossMode::Triplet => (0.0, loss_triplet(d.d_ac, d.d_an, config.triplet_margin), 0.0),
    }
}

pub fn total_loss(units: QuadUnits<'_>, params: &ProjectionParams, config: &LossConfig) -> LossBreakdown {
    let (l_sim, l_comp, l_neg) = hinge_terms(units.distances(), config);
    LossBreakdown::assemble(l_sim, l_comp, l_neg, params.weight_sq_norm(), config.lambda)
}

/// Derivatives of the hinge terms with respect to `(d_as, d_ac, d_an)`.
/// Kinks take subgradient 0.
fn distance_slopes(d: QuadDistances, config: &LossConfig) -> (f64, f64, f64) {
    match config.mode {
        LossMode::Quadruplet => {
            let s_as = if d.d_as > config.m_s { 1.0 } else { 0.0 };
            let s_ac = if d.d_ac > config.m_c {
                1.0
            } else if d.d_ac < config.m_s {
                -1.0
            } else {
                0.0
            };
            let s_an = if d.d_an < config.m_n { -1.0 } else { 0.0 };
            (s_as, s_ac, s_an)
        }
        LossMode::Triplet => {
            if d.d_ac + config.triplet_margin - d.d_an > 0.0 {
                (0.0, 1.0, -1.0)
            } else {
                (0.0, 0.0, 0.0)
            }
        }
    }
}

/// Gradients of the per-example hinge loss with respect to the anchor,
/// similar, complementary and negative unit vectors.
pub fn loss_gradients(units: QuadUnits<'_>, config: &LossConfig) -> [Vec<f64>; 4] {
    let dim = units.anchor.len();
    let d = units.distances();
    let (s_as, s_ac, s_an) = distance_slopes(d, config);
    let mut ga = vec![0.0; dim];
    let mut others = [vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]];
    let pulls = [
        (s_as, d.d_as, units.similar),
        (s_ac, d.d_ac, units.complementary),
        (s_an, d.d_an, units.negative),
    ];
    for ((slope, dist, other), g_other) in pulls.into_iter().zip(others.iter_mut()) {
        if slope == 0.0 || dist <= EPS_DIST {
            continue;
        }
        let k = slope / dist;
        for i in 0..dim {
            let diff = units.anchor[i] - other[i];
            ga[i] += k * diff;
            g_other[i] -= k * diff;
        }
    }
    let [gs, gc, gn] = others;
    [ga, gs, gc, gn]
}

/// Raw feature vectors of one quadruplet, in (anchor, similar,
/// complementary, negative) order.
pub type QuadInputs<'a> = [&'a [f64]; 4];

#[derive(Debug, Clone)]
pub struct BatchObjective {
    /// Hinge terms averaged over the usable examples, plus the regularizer.
    pub loss: LossBreakdown,
    pub grads: ProjectionParams,
    pub used: usize,
    pub degenerate: usize,
}

struct ShardSum {
    sums: (f64, f64, f64),
    grads: ProjectionParams,
    used: usize,
    degenerate: usize,
}

fn shard_gradient(params: &ProjectionParams, shard: &[QuadInputs<'_>], config: &LossConfig) -> Result<ShardSum> {
    let mut out = ShardSum {
        sums: (0.0, 0.0, 0.0),
        grads: ProjectionParams::zeros(params.dims),
        used: 0,
        degenerate: 0,
    };
    for inputs in shard {
        let traces = inputs
            .iter()
            .map(|x| params.forward_trace(x))
            .collect::<Result<Vec<_>>>()?;
        if traces.iter().any(|t| t.point.degenerate) {
            out.degenerate += 1;
            continue;
        }
        let units = QuadUnits {
            anchor: &traces[0].point.unit,
            similar: &traces[1].point.unit,
            complementary: &traces[2].point.unit,
            negative: &traces[3].point.unit,
        };
        let (a, b, c) = hinge_terms(units.distances(), config);
        out.sums.0 += a;
        out.sums.1 += b;
        out.sums.2 += c;
        let grad_units = loss_gradients(units, config);
        for ((x, trace), g) in inputs.iter().zip(&traces).zip(&grad_units) {
            if g.iter().any(|&v| v != 0.0) {
                params.accumulate_gradient(x, trace, g, &mut out.grads);
            }
        }
        out.used += 1;
    }
    Ok(out)
}

/// Mean hinge loss over a batch plus `lambda * |W|^2`, with its gradient
/// with respect to every parameter. Examples with a degenerate projection
/// are skipped and counted.
pub fn batch_objective(
    params: &ProjectionParams,
    batch: &[QuadInputs<'_>],
    config: &LossConfig,
) -> Result<BatchObjective> {
    let shards = batch
        .par_chunks(SHARD_SIZE)
        .map(|shard| shard_gradient(params, shard, config))
        .collect::<Result<Vec<_>>>()?;
    let mut grads = ProjectionParams::zeros(params.dims);
    let (mut s, mut c, mut n) = (0.0, 0.0, 0.0);
    let (mut used, mut degenerate) = (0, 0);
    for shard in &shards {
        grads.add_assign(&shard.grads);
        s += shard.sums.0;
        c += shard.sums.1;
        n += shard.sums.2;
        used += shard.used;
        degenerate += shard.degenerate;
    }
    let scale = if used > 0 { 1.0 / used as f64 } else { 0.0 };
    grads.scale(scale);
    let two_lambda = 2.0 * config.lambda;
    for (g, w) in grads.w1.iter_mut().zip(&params.w1) {
        *g += two_lambda * w;
    }
    for (g, w) in grads.w2.iter_mut().zip(&params.w2) {
        *g += two_lambda * w;
    }
    let loss = LossBreakdown::assemble(s * scale, c * scale, n * scale, params.weight_sq_norm(), config.lambda);
    Ok(BatchObjective {
        loss,
        grads,
        used,
        degenerate,
    })
}
