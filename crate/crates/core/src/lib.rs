//! Learning a shared embedding space for catalog items in which similar
//! items sit closest to an anchor, complementary items fall in a band
//! further out, and unrelated items are pushed beyond it.
//!
//! The pipeline runs:
//!
//! 1. [`catalog`]: load items and co-purchase edges.
//! 2. [`quadgen`]: turn cross-category co-purchases into
//!    (anchor, similar, complementary, negative) quadruplets and split them
//!    by anchor.
//! 3. [`featurizer`]: attach a text feature vector to every item.
//! 4. [`trainer`]: fit the [`projector`] network under the [`loss`].
//! 5. [`eval`] and [`retrieve`]: score a held-out split and query
//!    neighbours.

pub mod catalog;
pub mod error;
pub mod eval;
pub mod featurizer;
pub mod loss;
pub mod projector;
pub mod quadgen;
pub mod retrieve;
pub mod rng;
pub mod synthetic;
pub mod trainer;

pub use catalog::{load_catalog, load_edges, Catalog, CatalogFormat, CoPurchaseEdge, EdgeList, Item};
pub use error::{Error, Result};
pub use eval::{classify_pair, emit_histograms, evaluate, ranking_correct, EvalReport, Relation};
pub use featurizer::{hash_featurize, load_vectors, FeatureStore, HashConfig};
pub use loss::{LossBreakdown, LossConfig, LossMode};
pub use projector::{distance, Dims, ProjectedPoint, ProjectionParams};
pub use quadgen::{generate, split_by_anchor, Quadruplet, SplitDataset, SplitManifest};
pub use retrieve::{build_index, EmbeddingIndex, Neighbor};
pub use rng::seeded;
pub use trainer::{load_checkpoint, save_checkpoint, train, OptimizerKind, TrainConfig, TrainState};
