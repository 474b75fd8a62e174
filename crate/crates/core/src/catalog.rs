//! Item catalog and co-purchase edge ingestion.
//!
//! Both loaders are lenient: malformed rows are skipped and counted in the
//! returned statistics, so a dirty catalog dump still loads. Only a catalog
//! with zero usable rows is rejected outright.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub title: String,
    pub category: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalogFormat {
    Jsonl,
    Tsv,
}

impl CatalogFormat {
    /// Guess from the file extension; anything other than `.jsonl`/`.json`
    /// is treated as TSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => CatalogFormat::Jsonl,
            _ => CatalogFormat::Tsv,
        }
    }
}

/// A row that was skipped while loading, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedRow {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CatalogStats {
    pub rows: usize,
    pub duplicates: usize,
    pub malformed: Vec<SkippedRow>,
}

#[derive(Debug, Clone)]
pub struct Catalog {
    items: Vec<Item>,
    positions: HashMap<String, usize>,
    by_category: BTreeMap<String, Vec<usize>>,
    stats: CatalogStats,
}

impl Catalog {
    /// Builds a catalog from in-memory items, applying the same rules as the
    /// file loaders (trimmed non-empty fields, first occurrence wins).
    pub fn from_items(items: impl IntoIterator<Item = Item>) -> Result<Self> {
        let mut catalog = Catalog::empty();
        for (i, item) in items.into_iter().enumerate() {
            catalog.stats.rows += 1;
            if let Err(reason) = catalog.push(item.id, item.title, item.category) {
                catalog.stats.malformed.push(SkippedRow { line: i + 1, reason });
            }
        }
        if catalog.items.is_empty() {
            return Err(Error::EmptyCatalog {
                path: "<memory>".into(),
            });
        }
        Ok(catalog)
    }

    fn empty() -> Self {
        Catalog {
            items: Vec::new(),
            positions: HashMap::new(),
            by_category: BTreeMap::new(),
            stats: CatalogStats::default(),
        }
    }

    fn push(&mut self, id: String, title: String, category: String) -> Result<(), String> {
        let id = id.trim();
        let title = title.trim();
        let category = category.trim();
        if id.is_empty() {
            return Err("empty id".into());
        }
        if title.is_empty() {
            return Err(format!("empty title for `{id}`"));
        }
        if category.is_empty() {
            return Err(format!("empty category for `{id}`"));
        }
        if self.positions.contains_key(id) {
            self.stats.duplicates += 1;
            return Ok(());
        }
        let pos = self.items.len();
        self.positions.insert(id.to_owned(), pos);
        self.by_category.entry(category.to_owned()).or_default().push(pos);
        self.items.push(Item {
            id: id.to_owned(),
            title: title.to_owned(),
            category: category.to_owned(),
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn stats(&self) -> &CatalogStats {
        &self.stats
    }

    pub fn get(&self, id: &str) -> Option<&Item> {
        self.positions.get(id).map(|&p| &self.items[p])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.positions.contains_key(id)
    }

    pub fn category_of(&self, id: &str) -> Option<&str> {
        self.get(id).map(|item| item.category.as_str())
    }

    /// Insertion-ordered ids in `category`; empty for unknown labels.
    pub fn items_in_category(&self, category: &str) -> Vec<&str> {
        self.by_category
            .get(category)
            .map(|positions| positions.iter().map(|&p| self.items[p].id.as_str()).collect())
            .unwrap_or_default()
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.by_category.keys().map(String::as_str)
    }

    /// Serializes the catalog in the given format; loading the output
    /// reproduces the same item set.
    pub fn render(&self, format: CatalogFormat) -> Result<String> {
        let mut out = String::new();
        for item in &self.items {
            match format {
                CatalogFormat::Jsonl => {
                    out.push_str(&serde_json::to_string(item)?);
                    out.push('\n');
                }
                CatalogFormat::Tsv => {
                    let _ = writeln!(out, "{}\t{}\t{}", item.id, item.title, item.category);
                }
            }
        }
        Ok(out)
    }
}

pub fn load_catalog(path: &Path, format: CatalogFormat) -> Result<Catalog> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut catalog = Catalog::empty();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        catalog.stats.rows += 1;
        let parsed = match format {
            CatalogFormat::Tsv => parse_tsv_row(line),
            CatalogFormat::Jsonl => serde_json::from_str::<Item>(line)
                .map(|i| (i.id, i.title, i.category))
                .map_err(|e| e.to_string()),
        };
        let outcome = parsed.and_then(|(id, title, category)| catalog.push(id, title, category));
        if let Err(reason) = outcome {
            catalog.stats.malformed.push(SkippedRow { line: line_no, reason });
        }
    }
    if catalog.items.is_empty() {
        return Err(Error::EmptyCatalog { path: path.into() });
    }
    Ok(catalog)
}

fn parse_tsv_row(line: &str) -> Result<(String, String, String), String> {
    let cols: Vec<&str> = line.split('\t').collect();
    match cols.as_slice() {
        [id, title, category] => Ok((id.to_string(), title.to_string(), category.to_string())),
        _ => Err(format!("expected 3 tab-separated columns, found {}", cols.len())),
    }
}

/// A directed co-purchase link between two catalog items.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoPurchaseEdge {
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, Default)]
pub struct EdgeList {
    pub edges: Vec<CoPurchaseEdge>,
    pub self_loops: usize,
    pub dangling: usize,
    pub malformed: Vec<SkippedRow>,
}

pub fn load_edges(path: &Path, catalog: &Catalog) -> Result<EdgeList> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_edges(&text, catalog))
}

pub fn parse_edges(text: &str, catalog: &Catalog) -> EdgeList {
    let mut list = EdgeList::default();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        let (source, target) = match cols.as_slice() {
            [s, t] if !s.is_empty() && !t.is_empty() => (*s, *t),
            _ => {
                list.malformed.push(SkippedRow {
                    line: idx + 1,
                    reason: "expected 2 tab-separated ids".into(),
                });
                continue;
            }
        };
        if source == target {
            list.self_loops += 1;
        } else if !catalog.contains(source) || !catalog.contains(target) {
            list.dangling += 1;
        } else {
            list.edges.push(CoPurchaseEdge {
                source: source.to_owned(),
                target: target.to_owned(),
            });
        }
    }
    list
}

pub fn edges_to_string(edges: &[CoPurchaseEdge]) -> String {
    let mut out = String::new();
    for e in edges {
        let _ = writeln!(out, "{}\t{}", e.source, e.target);
    }
    out
}
