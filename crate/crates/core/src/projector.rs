//! The projection network: `x -> W2 · relu(W1 · x + b1) + b2`, followed by
//! unit normalization. Forward and backward passes are written out by hand
//! for exactly this architecture.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outputs with a Euclidean norm at or below this are treated as degenerate.
pub const EPS_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub d_in: usize,
    pub hidden: usize,
    pub d_out: usize,
}

impl Default for Dims {
    fn default() -> Self {
        Dims {
            d_in: 512,
            hidden: 256,
            d_out: 128,
        }
    }
}

impl Dims {
    pub fn new(d_in: usize, hidden: usize, d_out: usize) -> Self {
        Dims { d_in, hidden, d_out }
    }

    fn validate(&self) -> Result<()> {
        if self.d_in == 0 || self.hidden == 0 || self.d_out == 0 {
            return Err(Error::Config(format!("dimensions must be positive, got {self:?}")));
        }
        Ok(())
    }
}

/// Weights and biases of the projection. The same layout doubles as the
/// gradient accumulator and as optimizer moment storage.
///
/// `w1` is `hidden x d_in` and `w2` is `d_out x hidden`, both row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionParams {
    pub dims: Dims,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl ProjectionParams {
    pub fn zeros(dims: Dims) -> Self {
        ProjectionParams {
            dims,
            w1: vec![0.0; dims.hidden * dims.d_in],
            b1: vec![0.0; dims.hidden],
            w2: vec![0.0; dims.d_out * dims.hidden],
            b2: vec![0.0; dims.d_out],
        }
    }

    /// Uniform weights in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, zero biases.
    pub fn init<R: Rng + ?Sized>(dims: Dims, rng: &mut R) -> Result<Self> {
        dims.validate()?;
        let mut p = ProjectionParams::zeros(dims);
        let b1 = 1.0 / (dims.d_in as f64).sqrt();
        p.w1.iter_mut().for_each(|w| *w = rng.gen_range(-b1..=b1));
        let b2 = 1.0 / (dims.hidden as f64).sqrt();
        p.w2.iter_mut().for_each(|w| *w = rng.gen_range(-b2..=b2));
        Ok(p)
    }

    pub fn tensors(&self) -> [&[f64]; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn len(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks that every tensor matches `dims` and holds finite values.
    pub fn validate(&self) -> Result<()> {
        let d = self.dims;
        let expected = [d.hidden * d.d_in, d.hidden, d.d_out * d.hidden, d.d_out];
        for ((t, want), name) in self.tensors().iter().zip(expected).zip(["w1", "b1", "w2", "b2"]) {
            if t.len() != want {
                return Err(Error::Shape {
                    expected: format!("{name} with {want} entries"),
                    found: format!("{} entries", t.len()),
                });
            }
        }
        if self.tensors().iter().any(|t| t.iter().any(|v| !v.is_finite())) {
            return Err(Error::Config("parameters contain non-finite values".into()));
        }
        Ok(())
    }

    /// Sum of squared weight-matrix entries; biases are not regularized.
    pub fn weight_sq_norm(&self) -> f64 {
        self.w1.iter().chain(&self.w2).map(|w| w * w).sum()
    }

    /// `self += other`, tensor by tensor.
    pub fn add_assign(&mut self, other: &ProjectionParams) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn forward(&self, x: &[f64]) -> Result<ProjectedPoint> {
        self.forward_trace(x).map(|t| t.point)
    }

    /// Forward pass keeping the hidden activations needed by `backward`.
    pub fn forward_trace(&self, x: &[f64]) -> Result<Trace> {
        let Dims { d_in, hidden, d_out } = self.dims;
        if x.len() != d_in {
            return Err(Error::Shape {
                expected: format!("input of dimension {d_in}"),
                found: format!("dimension {}", x.len()),
            });
        }
        // Hashed title features are sparse; only nonzero inputs contribute.
        let nz: Vec<usize> = (0..d_in).filter(|&i| x[i] != 0.0).collect();
        let mut act = self.b1.clone();
        for (j, a) in act.iter_mut().enumerate() {
            let row = &self.w1[j * d_in..(j + 1) * d_in];
            for &i in &nz {
                *a += row[i] * x[i];
            }
            if *a <= 0.0 {
                *a = 0.0;
            }
        }
        let mut raw = self.b2.clone();
        for (k, r) in raw.iter_mut().enumerate() {
            let row = &self.w2[k * hidden..(k + 1) * hidden];
            *r += row.iter().zip(&act).map(|(w, h)| w * h).sum::<f64>();
        }
        debug_assert_eq!(raw.len(), d_out);
        Ok(Trace {
            active_inputs: nz,
            hidden: act,
            point: ProjectedPoint::from_raw(raw),
        })
    }

    /// Adds the gradient of a scalar objective with respect to the
    /// parameters, given its gradient with respect to `trace.point.unit`.
    /// Returns `false` (adding nothing) for a degenerate projection.
    pub fn accumulate_gradient(
        &self,
        x: &[f64],
        trace: &Trace,
        grad_unit: &[f64],
        grads: &mut ProjectionParams,
    ) -> bool {
        let Dims { d_in, hidden, d_out } = self.dims;
        let p = &trace.point;
        if p.degenerate {
            return false;
        }
        // d unit / d raw = (I - u u^T) / |raw|
        let dot: f64 = p.unit.iter().zip(grad_unit).map(|(u, g)| u * g).sum();
        let grad_raw: Vec<f64> = p
            .unit
            .iter()
            .zip(grad_unit)
            .map(|(u, g)| (g - u * dot) / p.raw_norm)
            .collect();

        let mut grad_hidden = vec![0.0; hidden];
        for k in 0..d_out {
            let g = grad_raw[k];
            grads.b2[k] += g;
            if g == 0.0 {
                continue;
            }
            let w_row = &self.w2[k * hidden..(k + 1) * hidden];
            let gw_row = &mut grads.w2[k * hidden..(k + 1) * hidden];
            for j in 0..hidden {
                gw_row[j] += g * trace.hidden[j];
                grad_hidden[j] += w_row[j] * g;
            }
        }
        for j in 0..hidden {
            // relu'(z) = 0 for z <= 0
            if trace.hidden[j] <= 0.0 {
                continue;
            }
            let g = grad_hidden[j];
            grads.b1[j] += g;
            let gw_row = &mut grads.w1[j * d_in..(j + 1) * d_in];
            for &i in &trace.active_inputs {
                gw_row[i] += g * x[i];
            }
        }
        true
    }

    /// Summed parameter gradient over a batch, plus the number of degenerate
    /// examples that contributed nothing.
    pub fn backward(&self, batch: &[BackwardInput<'_>]) -> (ProjectionParams, usize) {
        let mut grads = ProjectionParams::zeros(self.dims);
        let mut degenerate = 0;
        for item in batch {
            if !self.accumulate_gradient(item.x, item.trace, item.grad_unit, &mut grads) {
                degenerate += 1;
            }
        }
        (grads, degenerate)
    }
}

pub struct BackwardInput<'a> {
    pub x: &'a [f64],
    pub trace: &'a Trace,
    pub grad_unit: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPoint {
    pub raw: Vec<f64>,
    pub unit: Vec<f64>,
    pub raw_norm: f64,
    pub degenerate: bool,
}

impl ProjectedPoint {
    pub fn from_raw(raw: Vec<f64>) -> Self {
        let raw_norm = raw.iter().map(|r| r * r).sum::<f64>().sqrt();
        let degenerate = raw_norm <= EPS_NORM;
        let unit = if degenerate {
            vec![0.0; raw.len()]
        } else {
            raw.iter().map(|r| r / raw_norm).collect()
        };
        ProjectedPoint {
            raw,
            unit,
            raw_norm,
            degenerate,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trace {
    active_inputs: Vec<usize>,
    hidden: Vec<f64>,
    pub point: ProjectedPoint,
}

/// Euclidean distance between the unit vectors of two projections.
pub fn distance(p: &ProjectedPoint, q: &ProjectedPoint) -> Result<f64> {
    if p.degenerate || q.degenerate {
        return Err(Error::DegenerateProjection);
    }
    Ok(euclidean(&p.unit, &q.unit))
}

pub fn euclidean(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}
