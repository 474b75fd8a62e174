//! Ranking and band-classification accuracy, distance statistics, and
//! distance histograms over a set of quadruplets.
//!
//! Distances are computed per quadruplet in parallel and then reduced in
//! quadruplet order with plain left-to-right summation, so reports are
//! reproducible regardless of thread count.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurizer::FeatureStore;
use crate::loss::{LossConfig, QuadDistances, QuadUnits};
use crate::projector::ProjectionParams;
use crate::quadgen::Quadruplet;

pub const HIST_BINS: usize = 100;
pub const HIST_BIN_WIDTH: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Similar,
    Complementary,
    Negative,
}

/// Eq-style ranking check: 1 iff `d_as < d_ac < d_an`; ties score 0.
pub fn ranking_correct(d_as: f64, d_ac: f64, d_an: f64) -> u8 {
    u8::from(d_as < d_ac && d_ac < d_an)
}

/// Band rule: similar up to `m_s`, complementary up to `m_c`, else negative.
pub fn classify_pair(d: f64, config: &LossConfig) -> Relation {
    if d <= config.m_s {
        Relation::Similar
    } else if d <= config.m_c {
        Relation::Complementary
    } else {
        Relation::Negative
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DistanceStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std_dev: f64,
    pub count: usize,
}

impl DistanceStats {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return DistanceStats::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        DistanceStats {
            mean,
            std_dev: var.sqrt(),
            count: values.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationStats {
    pub similar: DistanceStats,
    pub complementary: DistanceStats,
    pub negative: DistanceStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histograms {
    pub bin_width: f64,
    pub similar: Vec<u64>,
    pub complementary: Vec<u64>,
    pub negative: Vec<u64>,
}

pub fn histogram_bin(d: f64) -> usize {
    ((d / HIST_BIN_WIDTH).floor().max(0.0) as usize).min(HIST_BINS - 1)
}

fn histogram(values: &[f64]) -> Vec<u64> {
    let mut bins = vec![0u64; HIST_BINS];
    for &d in values {
        bins[histogram_bin(d)] += 1;
    }
    bins
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub count: usize,
    /// Quadruplets skipped because one of their projections was degenerate.
    pub degenerate: usize,
    pub ranking_acc: f64,
    pub comp_acc: f64,
    pub sim_acc: f64,
    pub dist_stats: RelationStats,
    pub histograms: Histograms,
}

impl EvalReport {
    /// Builds a report from per-quadruplet distances.
    pub fn from_distances(distances: &[QuadDistances], degenerate: usize, config: &LossConfig) -> Result<Self> {
        if distances.is_empty() {
            return Err(Error::EmptyEvalSet);
        }
        let n = distances.len() as f64;
        let d_as: Vec<f64> = distances.iter().map(|d| d.d_as).collect();
        let d_ac: Vec<f64> = distances.iter().map(|d| d.d_ac).collect();
        let d_an: Vec<f64> = distances.iter().map(|d| d.d_an).collect();
        let ranked = distances
            .iter()
            .map(|d| u64::from(ranking_correct(d.d_as, d.d_ac, d.d_an)))
            .sum::<u64>();
        let sim_hits = d_as
            .iter()
            .filter(|&&d| classify_pair(d, config) == Relation::Similar)
            .count();
        let comp_hits = d_ac
            .iter()
            .filter(|&&d| classify_pair(d, config) == Relation::Complementary)
            .count();
        Ok(EvalReport {
            count: distances.len(),
            degenerate,
            ranking_acc: ranked as f64 / n,
            comp_acc: comp_hits as f64 / n,
            sim_acc: sim_hits as f64 / n,
            dist_stats: RelationStats {
                similar: DistanceStats::of(&d_as),
                complementary: DistanceStats::of(&d_ac),
                negative: DistanceStats::of(&d_an),
            },
            histograms: Histograms {
                bin_width: HIST_BIN_WIDTH,
                similar: histogram(&d_as),
                complementary: histogram(&d_ac),
                negative: histogram(&d_an),
            },
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        Ok(json)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn histogram_csv(&self) -> String {
        let h = &self.histograms;
        let mut out = String::from("bin_low,bin_high,count_similar,count_complementary,count_negative\n");
        for i in 0..HIST_BINS {
            let _ = writeln!(
                out,
                "{:.2},{:.2},{},{},{}",
                i as f64 * HIST_BIN_WIDTH,
                (i + 1) as f64 * HIST_BIN_WIDTH,
                h.similar.get(i).copied().unwrap_or(0),
                h.complementary.get(i).copied().unwrap_or(0),
                h.negative.get(i).copied().unwrap_or(0),
            );
        }
        out
    }
}

pub fn emit_histograms(report: &EvalReport, path: &Path) -> Result<()> {
    fs::write(path, report.histogram_csv()).map_err(|e| Error::io(path, e))
}

/// Unit-vector distances for each quadruplet, or `None` when a projection
/// is degenerate.
pub fn quad_distances(
    quads: &[Quadruplet],
    params: &ProjectionParams,
    store: &FeatureStore,
) -> Result<Vec<Option<QuadDistances>>> {
    store.require_all(quads.iter().flat_map(|q| q.ids()))?;
    quads
        .par_iter()
        .map(|q| {
            let points = q
                .ids()
                .iter()
                .map(|id| params.forward(store.get(id)?))
                .collect::<Result<Vec<_>>>()?;
            if points.iter().any(|p| p.degenerate) {
                return Ok(None);
            }
            Ok(Some(
                QuadUnits {
                    anchor: &points[0].unit,
                    similar: &points[1].unit,
                    complementary: &points[2].unit,
                    negative: &points[3].unit,
                }
                .distances(),
            ))
        })
        .collect()
}

pub fn evaluate(
    quads: &[Quadruplet],
    params: &ProjectionParams,
    store: &FeatureStore,
    config: &LossConfig,
) -> Result<EvalReport> {
    if quads.is_empty() {
        return Err(Error::EmptyEvalSet);
    }
    let all = quad_distances(quads, params, store)?;
    let degenerate = all.iter().filter(|d| d.is_none()).count();
    let distances: Vec<QuadDistances> = all.into_iter().flatten().collect();
    EvalReport::from_distances(&distances, degenerate, config)
}
