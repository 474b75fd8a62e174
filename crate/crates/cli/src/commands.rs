use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use quadnet_core::eval::emit_histograms;
use quadnet_core::featurizer::{hash_featurize, load_vectors, HashConfig};
use quadnet_core::quadgen::{self, read_quads, write_split, SplitManifest};
use quadnet_core::synthetic::{generate_sample, write_sample};
use quadnet_core::trainer::{load_checkpoint, save_checkpoint, train_logged};
use quadnet_core::{
    build_index, evaluate, load_catalog, load_edges, seeded, Catalog, CatalogFormat, FeatureStore, LossConfig,
};

use crate::args::*;
use crate::config::{set, RunConfig};
use crate::UsageError;

const SAMPLE_STREAM: u64 = 10;
const QUADGEN_STREAM: u64 = 11;

fn open_catalog(args: &CatalogArgs, cfg: &RunConfig) -> Result<Catalog> {
    let path = args
        .catalog
        .clone()
        .or_else(|| cfg.catalog.clone())
        .ok_or_else(|| UsageError("missing --catalog".into()))?;
    let format = match args.format.as_deref().or(cfg.catalog_format.as_deref()) {
        Some("jsonl") => CatalogFormat::Jsonl,
        Some("tsv") => CatalogFormat::Tsv,
        Some(other) => return Err(UsageError(format!("unknown catalog format `{other}`")).into()),
        None => CatalogFormat::from_path(&path),
    };
    let catalog = load_catalog(&path, format)?;
    let stats = catalog.stats();
    eprintln!(
        "catalog {}: {} items ({} rows, {} duplicate ids, {} malformed)",
        path.display(),
        catalog.len(),
        stats.rows,
        stats.duplicates,
        stats.malformed.len()
    );
    for row in stats.malformed.iter().take(10) {
        eprintln!("  skipped {}:{}: {}", path.display(), row.line, row.reason);
    }
    Ok(catalog)
}

fn hash_config(dim: Option<usize>, seed: Option<u64>, cfg: &RunConfig) -> HashConfig {
    HashConfig::with_dim_seed(
        dim.or(cfg.hash_dim).unwrap_or(quadnet_core::featurizer::DEFAULT_DIM),
        seed.or(cfg.hash_seed).unwrap_or(cfg.seed),
    )
}

fn hashed(catalog: &Catalog, config: &HashConfig) -> Result<FeatureStore> {
    let feats = hash_featurize(catalog, config)?;
    if !feats.zero_vectors.is_empty() {
        eprintln!(
            "warning: {} items have no title tokens and a zero feature vector (first: {})",
            feats.zero_vectors.len(),
            feats.zero_vectors[0]
        );
    }
    Ok(feats.store)
}

fn vectors(path: &Path, catalog: &Catalog) -> Result<FeatureStore> {
    let loaded = load_vectors(path, catalog)?;
    if !loaded.missing.is_empty() {
        eprintln!(
            "warning: {} catalog items missing from {} (first: {})",
            loaded.missing.len(),
            path.display(),
            loaded.missing[0]
        );
    }
    Ok(loaded.store)
}

fn apply_margins(loss: &mut LossConfig, m: &MarginArgs) -> Result<()> {
    set(&mut loss.m_s, m.m_s);
    set(&mut loss.m_c, m.m_c);
    set(&mut loss.m_n, m.m_n);
    loss.validate().map_err(|e| UsageError(e.to_string()))?;
    Ok(())
}

pub fn gen_sample(args: &GenSampleArgs, cfg: &RunConfig) -> Result<()> {
    let mut sample_cfg = cfg.sample.clone();
    set(&mut sample_cfg.categories, args.categories);
    set(&mut sample_cfg.items_per_category, args.items_per_category);
    set(&mut sample_cfg.edges_per_item, args.edges_per_item);
    let sample = generate_sample(&sample_cfg, &mut seeded(cfg.seed, SAMPLE_STREAM))?;
    write_sample(&sample, &args.out)?;
    eprintln!(
        "wrote {} items and {} edges to {}",
        sample.catalog.len(),
        sample.edges.len(),
        args.out.display()
    );
    Ok(())
}

pub fn gen_quads(args: &GenQuadsArgs, cfg: &RunConfig) -> Result<()> {
    let catalog = open_catalog(&args.catalog, cfg)?;
    let edges_path = args
        .edges
        .clone()
        .or_else(|| cfg.edges.clone())
        .ok_or_else(|| UsageError("missing --edges".into()))?;
    let edges = load_edges(&edges_path, &catalog)?;
    let fraction = args.train_fraction.unwrap_or(cfg.train_fraction);
    let per_pair = args.similars_per_pair.unwrap_or(cfg.similars_per_pair);
    let mut rng = seeded(cfg.seed, QUADGEN_STREAM);
    let generated = quadgen::generate(&catalog, &edges.edges, per_pair, &mut rng)?;
    let split = quadgen::split_by_anchor(&generated.quads, fraction, &mut rng)?;
    let manifest = SplitManifest::new(cfg.seed, fraction, per_pair, &catalog, &edges, &generated, &split);
    write_split(&args.out, &split, &manifest)?;
    eprintln!(
        "{} quadruplets: {} train ({} anchors), {} test ({} anchors) -> {}",
        generated.quads.len(),
        split.train.len(),
        split.train_anchors,
        split.test.len(),
        split.test_anchors,
        args.out.display()
    );
    Ok(())
}

pub fn featurize(args: &FeaturizeArgs, cfg: &RunConfig) -> Result<()> {
    let catalog = open_catalog(&args.catalog, cfg)?;
    let store = hashed(&catalog, &hash_config(args.hash_dim, args.hash_seed, cfg))?;
    let text = store.render(catalog.items().iter().map(|i| i.id.as_str()))?;
    fs::write(&args.out, text).with_context(|| format!("cannot write {}", args.out.display()))?;
    Ok(())
}

pub fn train(args: &TrainArgs, cfg: &RunConfig) -> Result<()> {
    let mut config = cfg.train.clone();
    config.seed = cfg.seed;
    set(&mut config.loss.mode, args.mode);
    set(&mut config.optimizer, args.optimizer);
    set(&mut config.epochs, args.epochs);
    set(&mut config.batch_size, args.batch_size);
    set(&mut config.learning_rate, args.lr);
    set(&mut config.loss.lambda, args.lambda);
    set(&mut config.loss.triplet_margin, args.triplet_margin);
    set(&mut config.hidden, args.hidden);
    set(&mut config.d_out, args.d_out);
    apply_margins(&mut config.loss, &args.margins)?;
    config.validate().map_err(|e| UsageError(e.to_string()))?;

    let quads = read_quads(&args.quads)?;
    let catalog = open_catalog(&args.catalog, cfg)?;
    let (store, features) = match args.features.vectors.clone().or_else(|| cfg.vectors.clone()) {
        Some(path) => (vectors(&path, &catalog)?, None),
        None => {
            let hc = hash_config(args.features.hash_dim, args.features.hash_seed, cfg);
            (hashed(&catalog, &hc)?, Some(hc))
        }
    };

    let log_path = args.log.clone().unwrap_or_else(|| suffixed(&args.out, ".log.jsonl"));
    let mut log =
        BufWriter::new(File::create(&log_path).with_context(|| format!("cannot write {}", log_path.display()))?);
    let mut log_err = None;
    let mut state = train_logged(&quads, &store, &config, |rec| {
        eprintln!("epoch {:>3}  loss {:.6}  ({} ms)", rec.epoch, rec.total, rec.wall_ms);
        let line = serde_json::to_string(rec).map_err(anyhow::Error::from);
        if let Err(e) = line.and_then(|l| writeln!(log, "{l}").map_err(Into::into)) {
            log_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = log_err {
        return Err(e.context(format!("cannot write {}", log_path.display())));
    }
    log.flush()?;
    state.features = features;
    save_checkpoint(&state, &args.out)?;
    eprintln!("checkpoint written to {}", args.out.display());
    Ok(())
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Feature store for a trained model: explicit flags first, then the
/// hashing settings recorded in the checkpoint.
fn features_for_model(
    features: &FeatureArgs,
    recorded: Option<&HashConfig>,
    catalog: &Catalog,
    cfg: &RunConfig,
) -> Result<FeatureStore> {
    if let Some(path) = features.vectors.clone().or_else(|| cfg.vectors.clone()) {
        return vectors(&path, catalog);
    }
    let hc = match (features.hash_dim.or(cfg.hash_dim), recorded) {
        (Some(dim), _) => hash_config(Some(dim), features.hash_seed, cfg),
        (None, Some(rec)) => rec.clone(),
        (None, None) => {
            return Err(UsageError("checkpoint records no featurizer; pass --vectors or --hash-dim".into()).into())
        }
    };
    hashed(catalog, &hc)
}

pub fn eval(args: &EvalArgs, cfg: &RunConfig) -> Result<()> {
    let state = load_checkpoint(&args.ckpt)?;
    let mut margins = state.config.loss;
    apply_margins(&mut margins, &args.margins)?;
    let quads = read_quads(&args.quads)?;
    let catalog = open_catalog(&args.catalog, cfg)?;
    let store = features_for_model(&args.features, state.features.as_ref(), &catalog, cfg)?;
    let report = evaluate(&quads, &state.params, &store, &margins)?;
    report.write_json(&args.out)?;
    if let Some(hist) = &args.hist {
        emit_histograms(&report, hist)?;
    }
    eprintln!(
        "ranking {:.4}  similar {:.4}  complementary {:.4}  ({} quadruplets, {} degenerate)",
        report.ranking_acc, report.sim_acc, report.comp_acc, report.count, report.degenerate
    );
    Ok(())
}

pub fn recommend(args: &RecommendArgs, cfg: &RunConfig) -> Result<()> {
    let state = load_checkpoint(&args.ckpt)?;
    let mut margins = state.config.loss;
    apply_margins(&mut margins, &args.margins)?;
    let catalog = open_catalog(&args.catalog, cfg)?;
    if !catalog.contains(&args.anchor) {
        return Err(quadnet_core::Error::UnknownItem(args.anchor.clone()).into());
    }
    let store = features_for_model(&args.features, state.features.as_ref(), &catalog, cfg)?;
    let index = build_index(&catalog, &store, &state.params)?;
    let filter = cfg.category_filter && !args.no_category_filter;
    let similar = index.query_similar(&args.anchor, args.k)?;
    let complementary = index.query_complementary(&args.anchor, args.k, &margins, filter)?;

    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    writeln!(out, "section\trank\tid\tcategory\tdistance\ttitle")?;
    for (section, hits) in [("similar", &similar), ("complementary", &complementary)] {
        for (rank, n) in hits.iter().enumerate() {
            let item = catalog.get(&n.id).expect("index ids come from the catalog");
            writeln!(
                out,
                "{section}\t{}\t{}\t{}\t{:.6}\t{}",
                rank + 1,
                n.id,
                item.category,
                n.distance,
                item.title
            )?;
        }
    }
    out.flush()?;
    Ok(())
}
