//! Planted synthetic catalogs for offline experiments.
//!
//! Each category owns a private pool of made-up title words, so items of the
//! same category share vocabulary. Categories are paired up (0 with 1, 2
//! with 3, ...) and co-purchase edges only run between partners, so the
//! complementary relation is planted but never visible in the titles.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{edges_to_string, Catalog, CatalogFormat, CoPurchaseEdge, Item};
use crate::error::{Error, Result};

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ru", "ze", "ta", "po", "ni", "vu", "se", "da", "fo", "gi", "hu", "be", "xa", "yo", "wi", "qu",
    "re", "no", "la", "mu", "te", "so", "ve", "pi", "go", "du", "ce",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleConfig {
    pub categories: usize,
    pub items_per_category: usize,
    /// Outgoing co-purchase edges drawn for every item.
    pub edges_per_item: usize,
    /// Distinct words owned by each category.
    pub pool_size: usize,
    /// Category words per title.
    pub title_words: usize,
    /// Words shared by every category; one is mixed into each title.
    pub shared_words: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            categories: 40,
            items_per_category: 50,
            edges_per_item: 3,
            pool_size: 10,
            title_words: 4,
            shared_words: 25,
        }
    }
}

impl SampleConfig {
    fn validate(&self) -> Result<()> {
        if self.categories < 2 || !self.categories.is_multiple_of(2) {
            return Err(Error::Config("sample needs an even number of categories (>= 2)".into()));
        }
        if self.items_per_category < 2 {
            return Err(Error::Config("sample needs at least 2 items per category".into()));
        }
        if self.title_words == 0 || self.title_words > self.pool_size {
            return Err(Error::Config("title words must be in 1..=pool size".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub catalog: Catalog,
    pub edges: Vec<CoPurchaseEdge>,
}

pub fn category_name(c: usize) -> String {
    format!("cat{c:02}")
}

/// The category planted as complementary to `c`.
pub fn partner(c: usize) -> usize {
    c ^ 1
}

fn fresh_word<R: Rng + ?Sized>(rng: &mut R, used: &mut HashSet<String>) -> String {
    loop {
        let n = rng.gen_range(2..=4);
        let word: String = (0..n).map(|_| SYLLABLES[rng.gen_range(0..SYLLABLES.len())]).collect();
        if used.insert(word.clone()) {
            return word;
        }
    }
}

pub fn generate_sample<R: Rng + ?Sized>(config: &SampleConfig, rng: &mut R) -> Result<Sample> {
    config.validate()?;
    let mut used = HashSet::new();
    let pools: Vec<Vec<String>> = (0..config.categories)
        .map(|_| (0..config.pool_size).map(|_| fresh_word(rng, &mut used)).collect())
        .collect();
    let shared: Vec<String> = (0..config.shared_words).map(|_| fresh_word(rng, &mut used)).collect();

    let item_id = |c: usize, i: usize| format!("c{c:02}i{i:03}");
    let mut items = Vec::with_capacity(config.categories * config.items_per_category);
    for (c, pool) in pools.iter().enumerate() {
        for i in 0..config.items_per_category {
            let mut words: Vec<&str> = pool
                .choose_multiple(rng, config.title_words)
                .map(String::as_str)
                .collect();
            if let Some(w) = shared.choose(rng) {
                words.push(w);
            }
            words.shuffle(rng);
            items.push(Item {
                id: item_id(c, i),
                title: words.join(" "),
                category: category_name(c),
            });
        }
    }
    let mut edges = Vec::new();
    for c in 0..config.categories {
        for i in 0..config.items_per_category {
            for _ in 0..config.edges_per_item {
                let j = rng.gen_range(0..config.items_per_category);
                edges.push(CoPurchaseEdge {
                    source: item_id(c, i),
                    target: item_id(partner(c), j),
                });
            }
        }
    }
    Ok(Sample {
        catalog: Catalog::from_items(items)?,
        edges,
    })
}

/// Writes `catalog.tsv` and `edges.tsv` into `dir`.
pub fn write_sample(sample: &Sample, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let catalog = dir.join("catalog.tsv");
    fs::write(&catalog, sample.catalog.render(CatalogFormat::Tsv)?).map_err(|e| Error::io(&catalog, e))?;
    let edges = dir.join("edges.tsv");
    fs::write(&edges, edges_to_string(&sample.edges)).map_err(|e| Error::io(&edges, e))
}
