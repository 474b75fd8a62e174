//! Quadruplet construction and the anchor-disjoint train/test split.
//!
//! Every retained co-purchase pair (anchor, complementary) from different
//! categories is extended with a similar item drawn from the anchor's
//! category and a negative drawn uniformly from the whole catalog. Negatives
//! are only checked for identity with the other three items, so a negative
//! may occasionally share the anchor's or the complement's category.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, CoPurchaseEdge, EdgeList};
use crate::error::{Error, Result};

pub const NEGATIVE_ATTEMPTS: usize = 100;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quadruplet {
    pub anchor: String,
    pub similar: String,
    pub complementary: String,
    pub negative: String,
}

impl Quadruplet {
    pub fn ids(&self) -> [&str; 4] {
        [&self.anchor, &self.similar, &self.complementary, &self.negative]
    }

    /// Checks the structural invariants against `catalog`, returning the
    /// first violation.
    pub fn validate(&self, catalog: &Catalog) -> Result<(), String> {
        let ids = self.ids();
        for (i, a) in ids.iter().enumerate() {
            if ids[i + 1..].contains(a) {
                return Err(format!("id `{a}` repeated in quadruplet"));
            }
        }
        let cat = |id: &str| catalog.category_of(id).ok_or_else(|| format!("unknown id `{id}`"));
        let anchor_cat = cat(&self.anchor)?;
        cat(&self.negative)?;
        if cat(&self.similar)? != anchor_cat {
            return Err(format!("similar `{}` not in anchor category", self.similar));
        }
        if cat(&self.complementary)? == anchor_cat {
            return Err(format!(
                "complementary `{}` shares the anchor category",
                self.complementary
            ));
        }
        Ok(())
    }
}

/// Cross-category (anchor, complementary) pairs with drop counters.
#[derive(Debug, Clone, Default)]
pub struct PairSet {
    pub pairs: Vec<(String, String)>,
    pub same_category: usize,
    pub duplicates: usize,
}

pub fn build_pairs(catalog: &Catalog, edges: &[CoPurchaseEdge]) -> PairSet {
    let mut set = PairSet::default();
    let mut seen = HashSet::new();
    for edge in edges {
        let (Some(src), Some(dst)) = (catalog.category_of(&edge.source), catalog.category_of(&edge.target)) else {
            continue;
        };
        if src == dst {
            set.same_category += 1;
            continue;
        }
        if !seen.insert((edge.source.as_str(), edge.target.as_str())) {
            set.duplicates += 1;
            continue;
        }
        set.pairs.push((edge.source.clone(), edge.target.clone()));
    }
    set
}

pub fn sample_similar<R: Rng + ?Sized>(catalog: &Catalog, anchor: &str, rng: &mut R) -> Result<String> {
    let category = catalog
        .category_of(anchor)
        .ok_or_else(|| Error::UnknownItem(anchor.to_owned()))?;
    let candidates: Vec<&str> = catalog
        .items_in_category(category)
        .into_iter()
        .filter(|&id| id != anchor)
        .collect();
    if candidates.is_empty() {
        return Err(Error::NoSimilar(anchor.to_owned()));
    }
    Ok(candidates[rng.gen_range(0..candidates.len())].to_owned())
}

pub fn sample_negative<R: Rng + ?Sized>(
    catalog: &Catalog,
    anchor: &str,
    complementary: &str,
    similar: &str,
    rng: &mut R,
) -> Result<String> {
    let items = catalog.items();
    for _ in 0..NEGATIVE_ATTEMPTS {
        let id = items[rng.gen_range(0..items.len())].id.as_str();
        if id != anchor && id != similar && id != complementary {
            return Ok(id.to_owned());
        }
    }
    Err(Error::NoNegative {
        anchor: anchor.to_owned(),
        attempts: NEGATIVE_ATTEMPTS,
    })
}

#[derive(Debug, Clone, Default)]
pub struct Generated {
    pub quads: Vec<Quadruplet>,
    pub pairs: usize,
    pub same_category: usize,
    pub duplicate_pairs: usize,
    pub no_similar: usize,
    pub no_negative: usize,
}

/// Builds `similars_per_pair` quadruplets for every cross-category pair.
pub fn generate<R: Rng + ?Sized>(
    catalog: &Catalog,
    edges: &[CoPurchaseEdge],
    similars_per_pair: usize,
    rng: &mut R,
) -> Result<Generated> {
    if similars_per_pair == 0 {
        return Err(Error::Config("similars per pair must be positive".into()));
    }
    let pairs = build_pairs(catalog, edges);
    let mut out = Generated {
        pairs: pairs.pairs.len(),
        same_category: pairs.same_category,
        duplicate_pairs: pairs.duplicates,
        ..Generated::default()
    };
    for (anchor, complementary) in &pairs.pairs {
        for _ in 0..similars_per_pair {
            let similar = match sample_similar(catalog, anchor, rng) {
                Ok(s) => s,
                Err(_) => {
                    out.no_similar += 1;
                    continue;
                }
            };
            match sample_negative(catalog, anchor, complementary, &similar, rng) {
                Ok(negative) => out.quads.push(Quadruplet {
                    anchor: anchor.clone(),
                    similar,
                    complementary: complementary.clone(),
                    negative,
                }),
                Err(_) => out.no_negative += 1,
            }
        }
    }
    if out.quads.is_empty() {
        return Err(Error::NoQuadruplets);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitDataset {
    pub train: Vec<Quadruplet>,
    pub test: Vec<Quadruplet>,
    pub train_anchors: usize,
    pub test_anchors: usize,
}

/// Shuffles the distinct anchors, sends the first `floor(fraction * n)` to
/// train and the rest to test. Quadruplets keep their input order within
/// each side.
pub fn split_by_anchor<R: Rng + ?Sized>(
    quads: &[Quadruplet],
    train_fraction: f64,
    rng: &mut R,
) -> Result<SplitDataset> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut seen = HashSet::new();
    let mut anchors: Vec<&str> = quads
        .iter()
        .map(|q| q.anchor.as_str())
        .filter(|a| seen.insert(*a))
        .collect();
    if anchors.len() < 2 {
        return Err(Error::TooFewAnchors(anchors.len()));
    }
    anchors.shuffle(rng);
    let n_train = (train_fraction * anchors.len() as f64).floor() as usize;
    if n_train == 0 || n_train == anchors.len() {
        return Err(Error::EmptySplit {
            fraction: train_fraction,
            anchors: anchors.len(),
        });
    }
    let train_set: HashSet<&str> = anchors[..n_train].iter().copied().collect();
    let (train, test): (Vec<_>, Vec<_>) = quads
        .iter()
        .cloned()
        .partition(|q| train_set.contains(q.anchor.as_str()));
    Ok(SplitDataset {
        train,
        test,
        train_anchors: n_train,
        test_anchors: anchors.len() - n_train,
    })
}

pub fn render_quads(quads: &[Quadruplet]) -> String {
    let mut out = String::new();
    for q in quads {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", q.anchor, q.similar, q.complementary, q.negative);
    }
    out
}

pub fn write_quads(path: &Path, quads: &[Quadruplet]) -> Result<()> {
    fs::write(path, render_quads(quads)).map_err(|e| Error::io(path, e))
}

pub fn read_quads(path: &Path) -> Result<Vec<Quadruplet>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut quads = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        match cols.as_slice() {
            [a, s, c, n] if cols.iter().all(|c| !c.is_empty()) => quads.push(Quadruplet {
                anchor: a.to_string(),
                similar: s.to_string(),
                complementary: c.to_string(),
                negative: n.to_string(),
            }),
            _ => {
                return Err(Error::Parse {
                    path: path.into(),
                    line: idx + 1,
                    reason: format!("expected 4 tab-separated ids, found {}", cols.len()),
                })
            }
        }
    }
    Ok(quads)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub items: usize,
    pub edges: usize,
    pub pairs: usize,
    pub quadruplets: usize,
    pub train: usize,
    pub test: usize,
    pub train_anchors: usize,
    pub test_anchors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipCounters {
    pub malformed_edges: usize,
    pub self_loops: usize,
    pub dangling_edges: usize,
    pub same_category_pairs: usize,
    pub duplicate_pairs: usize,
    pub no_similar: usize,
    pub no_negative: usize,
}

/// Sidecar written next to `train.tsv` / `test.tsv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub fraction: f64,
    pub similars_per_pair: usize,
    pub counts: SplitCounts,
    pub skipped: SkipCounters,
}

impl SplitManifest {
    pub fn new(
        seed: u64,
        fraction: f64,
        similars_per_pair: usize,
        catalog: &Catalog,
        edges: &EdgeList,
        generated: &Generated,
        split: &SplitDataset,
    ) -> Self {
        SplitManifest {
            seed,
            fraction,
            similars_per_pair,
            counts: SplitCounts {
                items: catalog.len(),
                edges: edges.edges.len(),
                pairs: generated.pairs,
                quadruplets: generated.quads.len(),
                train: split.train.len(),
                test: split.test.len(),
                train_anchors: split.train_anchors,
                test_anchors: split.test_anchors,
            },
            skipped: SkipCounters {
                malformed_edges: edges.malformed.len(),
                self_loops: edges.self_loops,
                dangling_edges: edges.dangling,
                same_category_pairs: generated.same_category,
                duplicate_pairs: generated.duplicate_pairs,
                no_similar: generated.no_similar,
                no_negative: generated.no_negative,
            },
        }
    }
}

/// Writes `train.tsv`, `test.tsv` and `manifest.json` into `dir`.
pub fn write_split(dir: &Path, split: &SplitDataset, manifest: &SplitManifest) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_quads(&dir.join("train.tsv"), &split.train)?;
    write_quads(&dir.join("test.tsv"), &split.test)?;
    let path = dir.join("manifest.json");
    let mut json = serde_json::to_string_pretty(manifest)?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::io(&path, e))
}
