//! Shared fixtures for the benchmarks.

use quadnet_core::loss::QuadInputs;
use quadnet_core::retrieve::index_from_units;
use quadnet_core::synthetic::{generate_sample, Sample, SampleConfig};
use quadnet_core::{
    generate, hash_featurize, seeded, Dims, EmbeddingIndex, FeatureStore, HashConfig, ProjectionParams, Quadruplet,
};
use rand::Rng;

/// A planted catalog with hashed features and its quadruplets.
pub struct Fixture {
    pub sample: Sample,
    pub store: FeatureStore,
    pub quads: Vec<Quadruplet>,
    pub params: ProjectionParams,
}

pub fn fixture(categories: usize, items_per_category: usize) -> Fixture {
    let config = SampleConfig {
        categories,
        items_per_category,
        ..SampleConfig::default()
    };
    let mut rng = seeded(1, 0);
    let sample = generate_sample(&config, &mut rng).expect("sample");
    let store = hash_featurize(&sample.catalog, &HashConfig::with_dim_seed(512, 1))
        .expect("features")
        .store;
    let quads = generate(&sample.catalog, &sample.edges, 1, &mut rng)
        .expect("quadruplets")
        .quads;
    let params = ProjectionParams::init(Dims::default(), &mut rng).expect("params");
    Fixture {
        sample,
        store,
        quads,
        params,
    }
}

impl Fixture {
    pub fn batch(&self, n: usize) -> Vec<QuadInputs<'_>> {
        self.quads
            .iter()
            .cycle()
            .take(n)
            .map(|q| q.ids().map(|id| self.store.get(id).expect("feature")))
            .collect()
    }
}

/// An index of `n` random unit vectors spread over a handful of categories.
pub fn random_index(n: usize, dim: usize) -> EmbeddingIndex {
    let mut rng = seeded(2, 0);
    let rows = (0..n)
        .map(|i| {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            (
                format!("i{i}"),
                format!("c{}", i % 16),
                v.into_iter().map(|x| x / norm).collect(),
            )
        })
        .collect();
    index_from_units(rows).expect("index")
}
