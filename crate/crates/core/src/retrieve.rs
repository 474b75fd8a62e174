//! Exact nearest-neighbour retrieval over projected catalog items.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::featurizer::FeatureStore;
use crate::loss::LossConfig;
use crate::projector::{euclidean, ProjectionParams};

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub id: String,
    pub distance: f64,
}

/// Unit projections of every catalog item, one row per item.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingIndex {
    ids: Vec<String>,
    categories: Vec<String>,
    dim: usize,
    units: Vec<f64>,
    positions: HashMap<String, usize>,
    degenerate_ids: Vec<String>,
}

impl EmbeddingIndex {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.units[i * self.dim..(i + 1) * self.dim]
    }

    /// Items left out because their projection was degenerate.
    pub fn degenerate_ids(&self) -> &[String] {
        &self.degenerate_ids
    }

    fn position(&self, anchor: &str) -> Result<usize> {
        match self.positions.get(anchor) {
            Some(&p) => Ok(p),
            None if self.degenerate_ids.iter().any(|d| d == anchor) => Err(Error::DegenerateProjection),
            None => Err(Error::UnknownItem(anchor.to_owned())),
        }
    }

    fn scan(&self, anchor: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let a = self.row(anchor);
        (0..self.len())
            .filter(move |&i| i != anchor)
            .map(move |i| (i, euclidean(a, self.row(i))))
    }

    /// The `k` nearest items to `anchor`, ascending by distance, ties broken
    /// by id. The anchor itself is never returned.
    pub fn query_similar(&self, anchor: &str, k: usize) -> Result<Vec<Neighbor>> {
        let a = self.position(anchor)?;
        let mut hits: Vec<(usize, f64)> = self.scan(a).collect();
        hits.sort_by(|x, y| x.1.total_cmp(&y.1).then_with(|| self.ids[x.0].cmp(&self.ids[y.0])));
        Ok(self.neighbors(hits, k))
    }

    /// Items whose distance lies in `(m_s, m_c]`, ranked by closeness to the
    /// band centre. With `category_filter`, items sharing the anchor's
    /// category are dropped.
    pub fn query_complementary(
        &self,
        anchor: &str,
        k: usize,
        margins: &LossConfig,
        category_filter: bool,
    ) -> Result<Vec<Neighbor>> {
        let a = self.position(anchor)?;
        let center = 0.5 * (margins.m_s + margins.m_c);
        let mut hits: Vec<(usize, f64)> = self
            .scan(a)
            .filter(|&(_, d)| d > margins.m_s && d <= margins.m_c)
            .filter(|&(i, _)| !category_filter || self.categories[i] != self.categories[a])
            .collect();
        hits.sort_by(|x, y| {
            (x.1 - center)
                .abs()
                .total_cmp(&(y.1 - center).abs())
                .then_with(|| x.1.total_cmp(&y.1))
                .then_with(|| self.ids[x.0].cmp(&self.ids[y.0]))
        });
        Ok(self.neighbors(hits, k))
    }

    fn neighbors(&self, hits: Vec<(usize, f64)>, k: usize) -> Vec<Neighbor> {
        hits.into_iter()
            .take(k)
            .map(|(i, distance)| Neighbor {
                id: self.ids[i].clone(),
                distance,
            })
            .collect()
    }
}

/// Builder for indexes over arbitrary unit vectors, mostly for tests and
/// benchmarks. Rows are used as given.
pub fn index_from_units(rows: Vec<(String, String, Vec<f64>)>) -> Result<EmbeddingIndex> {
    let dim = rows.first().map(|r| r.2.len()).ok_or(Error::EmptyIndex)?;
    let mut index = EmbeddingIndex {
        ids: Vec::with_capacity(rows.len()),
        categories: Vec::with_capacity(rows.len()),
        dim,
        units: Vec::with_capacity(rows.len() * dim),
        positions: HashMap::new(),
        degenerate_ids: Vec::new(),
    };
    for (id, category, unit) in rows {
        if unit.len() != dim {
            return Err(Error::Shape {
                expected: format!("row of dimension {dim}"),
                found: format!("dimension {}", unit.len()),
            });
        }
        index.positions.insert(id.clone(), index.ids.len());
        index.ids.push(id);
        index.categories.push(category);
        index.units.extend(unit);
    }
    Ok(index)
}

pub fn build_index(catalog: &Catalog, store: &FeatureStore, params: &ProjectionParams) -> Result<EmbeddingIndex> {
    store.require_all(catalog.items().iter().map(|i| i.id.as_str()))?;
    let points = catalog
        .items()
        .par_iter()
        .map(|item| params.forward(store.get(&item.id)?))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(points.len());
    let mut degenerate_ids = Vec::new();
    for (item, point) in catalog.items().iter().zip(points) {
        if point.degenerate {
            degenerate_ids.push(item.id.clone());
        } else {
            rows.push((item.id.clone(), item.category.clone(), point.unit));
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyIndex);
    }
    let mut index = index_from_units(rows)?;
    index.degenerate_ids = degenerate_ids;
    Ok(index)
}
