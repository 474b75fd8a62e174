//! Text feature vectors for catalog items.
//!
//! Two sources are supported: precomputed vectors read from a file (for
//! example the output of an external sentence encoder), and a built-in
//! signed feature-hashing featurizer over the item title. Loaded vectors are
//! used as-is; hashed vectors are scaled to unit norm.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::catalog::Catalog;
use crate::error::{Error, Result};

pub const DEFAULT_DIM: usize = 512;
pub const MIN_HASH_DIM: usize = 8;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureStore {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl FeatureStore {
    pub fn new(dim: usize) -> Self {
        FeatureStore {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, id: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.dim {
            return Err(Error::Shape {
                expected: format!("vector of dimension {}", self.dim),
                found: format!("dimension {}", values.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("feature vector has a non-finite entry".into()));
        }
        self.vectors.insert(id.into(), values);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&[f64]> {
        self.vectors
            .get(id)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingFeature(id.to_owned()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.vectors.contains_key(id)
    }

    /// Fails on the first id without a vector.
    pub fn require_all<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Result<()> {
        for id in ids {
            if !self.contains(id) {
                return Err(Error::MissingFeature(id.to_owned()));
            }
        }
        Ok(())
    }

    /// Catalog items without a vector, in catalog order.
    pub fn missing_from(&self, catalog: &Catalog) -> Vec<String> {
        catalog
            .items()
            .iter()
            .filter(|item| !self.contains(&item.id))
            .map(|item| item.id.clone())
            .collect()
    }

    /// Renders the vector file, ordered by `ids`.
    pub fn render<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Result<String> {
        let mut out = String::new();
        for id in ids {
            let values = self.get(id)?;
            out.push_str(id);
            out.push('\t');
            for (i, v) in values.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// Vectors read from a file, plus the catalog ids that had no row.
#[derive(Debug, Clone)]
pub struct LoadedVectors {
    pub store: FeatureStore,
    pub missing: Vec<String>,
}

pub fn load_vectors(path: &Path, catalog: &Catalog) -> Result<LoadedVectors> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut dim = None;
    let mut vectors = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |reason: String| Error::Parse {
            path: path.into(),
            line: line_no,
            reason,
        };
        let (id, rest) = line
            .split_once('\t')
            .ok_or_else(|| parse_err("expected `id<TAB>values`".into()))?;
        let id = id.trim();
        if id.is_empty() {
            return Err(parse_err("empty id".into()));
        }
        let values = rest
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| parse_err(format!("`{tok}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteVector {
                path: path.into(),
                line: line_no,
                id: id.to_owned(),
            });
        }
        let expected = *dim.get_or_insert(values.len());
        if values.len() != expected || expected == 0 {
            return Err(Error::DimensionMismatch {
                path: path.into(),
                line: line_no,
                id: id.to_owned(),
                expected,
                found: values.len(),
            });
        }
        vectors.entry(id.to_owned()).or_insert(values);
    }
    let store = FeatureStore {
        dim: dim.unwrap_or(0),
        vectors,
    };
    let missing = store.missing_from(catalog);
    Ok(LoadedVectors { store, missing })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HashConfig {
    pub dim: usize,
    pub seed: u64,
    pub word_ngrams: Vec<usize>,
    pub char_ngrams: Vec<usize>,
}

impl Default for HashConfig {
    fn default() -> Self {
        HashConfig {
            dim: DEFAULT_DIM,
            seed: 0,
            word_ngrams: vec![1],
            char_ngrams: vec![3],
        }
    }
}

impl HashConfig {
    pub fn with_dim_seed(dim: usize, seed: u64) -> Self {
        HashConfig {
            dim,
            seed,
            ..HashConfig::default()
        }
    }
}

/// Tokens hashed for a title: word n-grams (prefixed `w<n>:`) and character
/// n-grams over the whitespace-normalized lowercase title (prefixed `c<n>:`).
pub fn title_tokens(title: &str, config: &HashConfig) -> Vec<String> {
    let lower = title.to_lowercase();
    let words: Vec<&str> = lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect();
    let mut tokens = Vec::new();
    for &n in &config.word_ngrams {
        if n == 0 {
            continue;
        }
        for gram in words.windows(n) {
            tokens.push(format!("w{n}:{}", gram.join(" ")));
        }
    }
    let normalized: Vec<char> = lower.split_whitespace().collect::<Vec<_>>().join(" ").chars().collect();
    for &n in &config.char_ngrams {
        if n == 0 {
            continue;
        }
        for gram in normalized.windows(n) {
            tokens.push(format!("c{n}:{}", gram.iter().collect::<String>()));
        }
    }
    tokens
}

/// Hashes one title into a `dim`-dimensional vector, unit-normalized unless
/// no tokens were produced.
pub fn hash_title(title: &str, config: &HashConfig) -> Vec<f64> {
    let dim = config.dim;
    let mut v = vec![0.0; dim];
    for token in title_tokens(title, config) {
        let h = xxh3_64_with_seed(token.as_bytes(), config.seed);
        let bucket = (h % dim as u64) as usize;
        // bucket uses the low bits; the sign comes from the top bit
        let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
        v[bucket] += sign;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

#[derive(Debug, Clone)]
pub struct HashedFeatures {
    pub store: FeatureStore,
    /// Items whose title produced no tokens; their vector is all zeros.
    pub zero_vectors: Vec<String>,
}

pub fn hash_featurize(catalog: &Catalog, config: &HashConfig) -> Result<HashedFeatures> {
    if config.dim < MIN_HASH_DIM {
        return Err(Error::Config(format!(
            "hash dimension must be at least {MIN_HASH_DIM}, got {}",
            config.dim
        )));
    }
    let rows: Vec<(String, Vec<f64>)> = catalog
        .items()
        .par_iter()
        .map(|item| (item.id.clone(), hash_title(&item.title, config)))
        .collect();
    let mut store = FeatureStore::new(config.dim);
    let mut zero_vectors = Vec::new();
    for (id, values) in rows {
        if values.iter().all(|&x| x == 0.0) {
            zero_vectors.push(id.clone());
        }
        store.vectors.insert(id, values);
    }
    Ok(HashedFeatures { store, zero_vectors })
}
