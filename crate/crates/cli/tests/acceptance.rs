//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion failed.
//!
//! Run with `cargo test -p quadnet-cli --test acceptance`.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use quadnet_core::loss::{
    batch_objective, hinge_terms, loss_comp, loss_neg, loss_sim, loss_triplet, QuadDistances, QuadInputs, QuadUnits,
};
use quadnet_core::retrieve::index_from_units;
use quadnet_core::synthetic::{generate_sample, SampleConfig};
use quadnet_core::{
    evaluate, generate, hash_featurize, seeded, split_by_anchor, Catalog, CoPurchaseEdge, Dims, EvalReport, HashConfig,
    Item, LossBreakdown, LossConfig, LossMode, ProjectionParams, Quadruplet,
};
use rand::seq::SliceRandom;
use rand::Rng;

type Outcome = Result<String, String>;

fn quadnet(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_quadnet"))
        .args(args)
        .output()
        .map_err(|e| format!("cannot spawn quadnet: {e}"))?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "quadnet {} exited with {}: {}",
            args.join(" "),
            out.status,
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn read_report(path: &Path) -> Result<EvalReport, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

struct Planted {
    quadruplet: EvalReport,
    triplet: EvalReport,
    untrained: EvalReport,
    seconds: f64,
}

/// Runs the planted benchmark through the binary on a single worker thread.
fn planted_benchmark(dir: &Path) -> Result<Planted, String> {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let start = Instant::now();
    let common = ["--seed", "7", "--threads", "1"];
    let run = |args: &[&str]| {
        let mut all = common.to_vec();
        all.extend_from_slice(args);
        quadnet(&all)
    };
    run(&[
        "gen-sample",
        "--out",
        &p("data"),
        "--categories",
        "40",
        "--items-per-category",
        "50",
    ])?;
    let catalog = p("data/catalog.tsv");
    run(&[
        "gen-quads",
        "--catalog",
        &catalog,
        "--edges",
        &p("data/edges.tsv"),
        "--out",
        &p("quads"),
    ])?;
    let (train, test) = (p("quads/train.tsv"), p("quads/test.tsv"));
    let variants: [(&str, &[&str]); 3] = [
        ("quadruplet", &["--mode", "quadruplet"]),
        ("triplet", &["--mode", "triplet"]),
        // a zero learning rate leaves the seeded initialization untouched
        ("untrained", &["--mode", "quadruplet", "--epochs", "1", "--lr", "0"]),
    ];
    let mut reports = HashMap::new();
    for (name, extra) in variants {
        let ckpt = p(&format!("{name}.json"));
        let mut args = vec!["train", "--quads", &train, "--catalog", &catalog, "--out", &ckpt];
        args.extend_from_slice(extra);
        run(&args)?;
        let report = p(&format!("{name}-report.json"));
        run(&[
            "eval",
            "--quads",
            &test,
            "--ckpt",
            &ckpt,
            "--catalog",
            &catalog,
            "--out",
            &report,
        ])?;
        reports.insert(name, read_report(Path::new(&report))?);
    }
    Ok(Planted {
        quadruplet: reports.remove("quadruplet").unwrap(),
        triplet: reports.remove("triplet").unwrap(),
        untrained: reports.remove("untrained").unwrap(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn criterion_1(planted: &Result<Planted, String>) -> Outcome {
    let r = &planted.as_ref().map_err(Clone::clone)?.quadruplet.dist_stats;
    let (s, c, n) = (r.similar.mean, r.complementary.mean, r.negative.mean);
    check(s < c && c < n, || {
        format!("mean distances out of order: {s:.4} / {c:.4} / {n:.4}")
    })?;
    Ok(format!(
        "published benchmark numbers need the original retail data and encoder and are not reproduced; \
         synthetic mean distances s/c/n = {s:.3} < {c:.3} < {n:.3}"
    ))
}

fn criterion_3(planted: &Result<Planted, String>) -> Outcome {
    let p = planted.as_ref().map_err(Clone::clone)?;
    let (q, t, u) = (p.quadruplet.ranking_acc, p.triplet.ranking_acc, p.untrained.ranking_acc);
    check(q >= 0.90, || format!("ranking accuracy {q:.4} < 0.90"))?;
    check(q > u, || {
        format!("ranking accuracy {q:.4} does not beat untrained {u:.4}")
    })?;
    check(q > t, || {
        format!("ranking accuracy {q:.4} does not beat triplet {t:.4}")
    })?;
    check(p.seconds < 600.0, || format!("took {:.0} s", p.seconds))?;
    Ok(format!(
        "ranking {q:.4} (untrained {u:.4}, triplet {t:.4}) on {} test quadruplets, {:.0} s on one thread",
        p.quadruplet.count, p.seconds
    ))
}

/// Central-difference check of the full objective (projection, unit
/// normalization, hinge terms, weight penalty) on small random networks.
fn criterion_2() -> Outcome {
    const STEP: f64 = 1e-5;
    const TOL: f64 = 1e-4;
    // Keep finite differences away from hinge kinks and ReLU corners.
    const CLEARANCE: f64 = 1e-3;
    // Below this projection norm or distance the third derivative is large
    // enough that the central difference itself is off by more than TOL.
    const CONDITIONING: f64 = 0.05;
    let start = Instant::now();
    let dims = Dims::new(5, 4, 3);
    let config = LossConfig {
        lambda: 0.01,
        ..LossConfig::default()
    };
    let mut rng = seeded(2024, 0);
    let (mut instances, mut rejected, mut worst, mut checked) = (0, 0, 0.0f64, 0usize);
    while instances < 25 {
        let params = ProjectionParams::init(dims, &mut rng).map_err(|e| e.to_string())?;
        let inputs: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let batch: Vec<QuadInputs> = vec![
            [&inputs[0], &inputs[1], &inputs[2], &inputs[3]],
            [&inputs[4], &inputs[5], &inputs[6], &inputs[7]],
        ];
        if !well_clear(&params, &batch, &config, CLEARANCE, CONDITIONING) {
            rejected += 1;
            continue;
        }
        let analytic = batch_objective(&params, &batch, &config).map_err(|e| e.to_string())?;
        let active = analytic.loss.l_sim + analytic.loss.l_comp + analytic.loss.l_neg;
        check(active > 0.0, || "instance has no open hinge".into())?;
        let grads = analytic.grads.tensors().concat();
        for k in 0..params.len() {
            let objective = |delta: f64| {
                let mut shifted = params.clone();
                *flat_mut(&mut shifted, k) += delta;
                batch_objective(&shifted, &batch, &config).map(|o| o.loss.total)
            };
            let numeric = (objective(STEP).map_err(|e| e.to_string())?
                - objective(-STEP).map_err(|e| e.to_string())?)
                / (2.0 * STEP);
            let rel = (grads[k] - numeric).abs() / grads[k].abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
            checked += 1;
            check(rel <= TOL, || {
                format!(
                    "instance {instances} parameter {k}: analytic {} vs numeric {numeric} (rel {rel:.2e})",
                    grads[k]
                )
            })?;
        }
        instances += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 10.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "{instances} instances, {checked} parameters, worst relative error {worst:.1e}, {rejected} near-kink or ill-conditioned draws redrawn, {secs:.2} s"
    ))
}

fn flat_mut(params: &mut ProjectionParams, mut k: usize) -> &mut f64 {
    for t in params.tensors_mut() {
        if k < t.len() {
            return &mut t[k];
        }
        k -= t.len();
    }
    panic!("parameter index out of range")
}

fn well_clear(params: &ProjectionParams, batch: &[QuadInputs], config: &LossConfig, gap: f64, floor: f64) -> bool {
    let Dims { d_in, hidden, .. } = params.dims;
    for quad in batch {
        let mut units = Vec::new();
        for x in quad {
            for j in 0..hidden {
                let pre = params.b1[j] + (0..d_in).map(|i| params.w1[j * d_in + i] * x[i]).sum::<f64>();
                if pre.abs() < gap {
                    return false;
                }
            }
            let p = params.forward(x).unwrap();
            if p.raw_norm < floor {
                return false;
            }
            units.push(p.unit);
        }
        let d = QuadUnits {
            anchor: &units[0],
            similar: &units[1],
            complementary: &units[2],
            negative: &units[3],
        }
        .distances();
        let kinks = [
            d.d_as - config.m_s,
            d.d_ac - config.m_s,
            d.d_ac - config.m_c,
            d.d_an - config.m_n,
        ];
        if kinks.iter().any(|k| k.abs() < gap) || d.d_as < floor || d.d_ac < floor || d.d_an < floor {
            return false;
        }
    }
    true
}

fn criterion_4() -> Outcome {
    let cfg = LossConfig::default();
    let mut cases = 0;
    let mut expect = |name: &str, got: f64, want: f64| {
        cases += 1;
        check(got == want, || format!("{name}: got {got}, expected {want}"))
    };
    expect("sim inside", loss_sim(0.0, 0.1), 0.0)?;
    expect("sim boundary", loss_sim(0.1, 0.1), 0.0)?;
    // decimal results that are not representable are compared against the
    // same arithmetic evaluated in f64
    expect("sim open", loss_sim(0.35, 0.1), 0.35 - 0.1)?;
    expect("comp band", loss_comp(0.25, 0.1, 0.4), 0.0)?;
    expect("comp collapsed", loss_comp(0.0, 0.1, 0.4), 0.1)?;
    expect("comp far", loss_comp(0.6, 0.1, 0.4), 0.6 - 0.4)?;
    expect("neg beyond", loss_neg(1.0, 0.8), 0.0)?;
    expect("neg boundary", loss_neg(0.8, 0.8), 0.0)?;
    expect("neg close", loss_neg(0.3, 0.8), 0.8 - 0.3)?;
    expect("triplet zero loss, far pair", loss_triplet(1.8, 2.0, 0.2), 0.0)?;
    expect("triplet zero loss, near pair", loss_triplet(0.2, 0.4, 0.2), 0.0)?;
    expect("triplet open", loss_triplet(0.5, 0.4, 0.2), 0.5 + 0.2 - 0.4)?;

    let zero = LossConfig { lambda: 0.0, ..cfg };
    let total = |d: QuadDistances| {
        let (s, c, n) = hinge_terms(d, &zero);
        LossBreakdown::assemble(s, c, n, 0.0, 0.0).total
    };
    expect(
        "all closed",
        total(QuadDistances {
            d_as: 0.05,
            d_ac: 0.25,
            d_an: 1.0,
        }),
        0.0,
    )?;
    expect(
        "three hinges",
        total(QuadDistances {
            d_as: 0.35,
            d_ac: 0.0,
            d_an: 0.3,
        }),
        (0.35 - 0.1) + 0.1 + (0.8 - 0.3),
    )?;

    let mut params = ProjectionParams::zeros(Dims::new(1, 1, 1));
    params.w1[0] = 1.0;
    params.w2[0] = -1.0;
    let reg = LossConfig { lambda: 1.0, ..cfg };
    let (a, c, n) = ([1.0, 0.0], [0.25f64.cos(), 0.25f64.sin()], [-1.0, 0.0]);
    let units = QuadUnits {
        anchor: &a,
        similar: &a,
        complementary: &c,
        negative: &n,
    };
    expect(
        "regularizer",
        quadnet_core::loss::total_loss(units, &params, &reg).total,
        2.0,
    )?;

    Ok(format!(
        "{cases} hinge table entries exact, including both triplet zero-loss cases"
    ))
}

fn random_catalog<R: Rng>(rng: &mut R) -> (Catalog, Vec<CoPurchaseEdge>) {
    let n_categories = rng.gen_range(2..8);
    let mut items = Vec::new();
    for c in 0..n_categories {
        for i in 0..rng.gen_range(1..12) {
            items.push(Item {
                id: format!("k{c}x{i}"),
                title: format!("item {i}"),
                category: format!("cat{c}"),
            });
        }
    }
    let n_edges = rng.gen_range(1..3 * items.len());
    let edges = (0..n_edges)
        .map(|_| CoPurchaseEdge {
            source: items.choose(rng).unwrap().id.clone(),
            target: items.choose(rng).unwrap().id.clone(),
        })
        .collect();
    (Catalog::from_items(items).unwrap(), edges)
}

fn criterion_5() -> Outcome {
    let (mut total, mut seeds, mut splits) = (0usize, 0u64, 0usize);
    while total < 2000 || seeds < 50 {
        let seed = seeds;
        seeds += 1;
        let mut rng = seeded(seed, 0);
        let (catalog, edges) = random_catalog(&mut rng);
        let cross: HashSet<(&str, &str)> = edges
            .iter()
            .filter(|e| catalog.category_of(&e.source) != catalog.category_of(&e.target))
            .map(|e| (e.source.as_str(), e.target.as_str()))
            .collect();
        let generated = match generate(&catalog, &edges, 1, &mut rng) {
            Ok(g) => g,
            Err(quadnet_core::Error::NoQuadruplets) => continue,
            Err(e) => return Err(format!("seed {seed}: {e}")),
        };
        for q in &generated.quads {
            let cat = |id: &str| {
                catalog
                    .category_of(id)
                    .ok_or_else(|| format!("seed {seed}: unknown id {id}"))
            };
            let ids: HashSet<&str> = q.ids().into_iter().collect();
            check(ids.len() == 4, || format!("seed {seed}: repeated id in {q:?}"))?;
            check(cat(&q.anchor)? == cat(&q.similar)?, || {
                format!("seed {seed}: similar crosses category in {q:?}")
            })?;
            check(cat(&q.anchor)? != cat(&q.complementary)?, || {
                format!("seed {seed}: complementary shares category in {q:?}")
            })?;
            check(cross.contains(&(q.anchor.as_str(), q.complementary.as_str())), || {
                format!("seed {seed}: anchor/complementary pair not a cross-category edge in {q:?}")
            })?;
            cat(&q.negative)?;
        }
        total += generated.quads.len();
        if let Ok(split) = split_by_anchor(&generated.quads, 0.9, &mut rng) {
            splits += 1;
            let train: HashSet<&str> = split.train.iter().map(|q| q.anchor.as_str()).collect();
            let test: HashSet<&str> = split.test.iter().map(|q| q.anchor.as_str()).collect();
            let distinct = train.len() + test.len();
            check(train.is_disjoint(&test), || {
                format!("seed {seed}: split shares anchors")
            })?;
            check(train.len() == (0.9 * distinct as f64).floor() as usize, || {
                format!("seed {seed}: {} train anchors out of {distinct}", train.len())
            })?;
            check(split.train.len() + split.test.len() == generated.quads.len(), || {
                format!("seed {seed}: split lost quadruplets")
            })?;
        }
    }
    Ok(format!(
        "{total} quadruplets over {seeds} random catalogs, {splits} anchor-disjoint splits"
    ))
}

fn pipeline(dir: &Path, threads: &str) -> Result<Vec<(String, Vec<u8>)>, String> {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let run = |args: &[&str]| {
        let mut all = vec!["--seed", "11", "--threads", threads];
        all.extend_from_slice(args);
        quadnet(&all)
    };
    let catalog = p("data/catalog.tsv");
    run(&[
        "gen-sample",
        "--out",
        &p("data"),
        "--categories",
        "8",
        "--items-per-category",
        "15",
    ])?;
    run(&[
        "gen-quads",
        "--catalog",
        &catalog,
        "--edges",
        &p("data/edges.tsv"),
        "--out",
        &p("quads"),
    ])?;
    run(&[
        "featurize",
        "--catalog",
        &catalog,
        "--hash-dim",
        "64",
        "--out",
        &p("vectors.tsv"),
    ])?;
    run(&[
        "train",
        "--quads",
        &p("quads/train.tsv"),
        "--catalog",
        &catalog,
        "--vectors",
        &p("vectors.tsv"),
        "--epochs",
        "4",
        "--batch-size",
        "100",
        "--hidden",
        "32",
        "--d-out",
        "16",
        "--out",
        &p("model.json"),
    ])?;
    run(&[
        "eval",
        "--quads",
        &p("quads/test.tsv"),
        "--ckpt",
        &p("model.json"),
        "--catalog",
        &catalog,
        "--vectors",
        &p("vectors.tsv"),
        "--out",
        &p("report.json"),
        "--hist",
        &p("hist.csv"),
    ])?;
    let files = [
        "data/catalog.tsv",
        "data/edges.tsv",
        "quads/train.tsv",
        "quads/test.tsv",
        "quads/manifest.json",
        "vectors.tsv",
        "model.json",
        "report.json",
        "hist.csv",
    ];
    files
        .iter()
        .map(|f| {
            fs::read(dir.join(f))
                .map(|b| (f.to_string(), b))
                .map_err(|e| format!("{f}: {e}"))
        })
        .collect()
}

fn criterion_6(root: &Path) -> Outcome {
    let a = pipeline(&root.join("run-a"), "4")?;
    let b = pipeline(&root.join("run-b"), "1")?;
    for ((name, x), (_, y)) in a.iter().zip(&b) {
        check(x == y, || format!("{name} differs between runs"))?;
    }
    Ok(format!(
        "{} artifacts byte-identical across two runs (4 threads vs 1)",
        a.len()
    ))
}

/// Straightforward dense forward pass, written independently of the library.
fn oracle_unit(params: &ProjectionParams, x: &[f64]) -> Vec<f64> {
    let Dims { d_in, hidden, d_out } = params.dims;
    let mut h = vec![0.0; hidden];
    for j in 0..hidden {
        let mut a = params.b1[j];
        for i in 0..d_in {
            if x[i] != 0.0 {
                a += params.w1[j * d_in + i] * x[i];
            }
        }
        h[j] = if a > 0.0 { a } else { 0.0 };
    }
    let mut raw = vec![0.0; d_out];
    for k in 0..d_out {
        let mut dot = 0.0;
        for j in 0..hidden {
            dot += params.w2[k * hidden + j] * h[j];
        }
        raw[k] = params.b2[k] + dot;
    }
    let norm = raw.iter().map(|r| r * r).sum::<f64>().sqrt();
    raw.iter().map(|r| r / norm).collect()
}

fn oracle_distance(u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..u.len() {
        s += (u[i] - v[i]) * (u[i] - v[i]);
    }
    s.sqrt()
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mut sum = 0.0;
    for v in values {
        sum += v;
    }
    let mean = sum / n;
    let mut sq = 0.0;
    for v in values {
        sq += (v - mean) * (v - mean);
    }
    (mean, (sq / n).sqrt())
}

fn criterion_7() -> Outcome {
    let mut rng = seeded(77, 0);
    let cfg = SampleConfig {
        categories: 6,
        items_per_category: 20,
        ..SampleConfig::default()
    };
    let sample = generate_sample(&cfg, &mut rng).map_err(|e| e.to_string())?;
    let store = hash_featurize(&sample.catalog, &HashConfig::with_dim_seed(64, 77))
        .map_err(|e| e.to_string())?
        .store;
    let quads: Vec<Quadruplet> = generate(&sample.catalog, &sample.edges, 1, &mut rng)
        .map_err(|e| e.to_string())?
        .quads
        .into_iter()
        .take(50)
        .collect();
    check(quads.len() == 50, || format!("only {} quadruplets", quads.len()))?;
    let params = ProjectionParams::init(Dims::new(64, 16, 8), &mut rng).map_err(|e| e.to_string())?;
    let (mut d_as, mut d_ac, mut d_an) = (vec![], vec![], vec![]);
    for q in &quads {
        let u: Vec<Vec<f64>> = q
            .ids()
            .iter()
            .map(|id| oracle_unit(&params, store.get(id).unwrap()))
            .collect();
        d_as.push(oracle_distance(&u[0], &u[1]));
        d_ac.push(oracle_distance(&u[0], &u[2]));
        d_an.push(oracle_distance(&u[0], &u[3]));
    }
    // margins at the tertiles of the observed distances, so both bands are populated
    let mut pooled: Vec<f64> = d_as.iter().chain(&d_ac).chain(&d_an).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let (m_s, m_c) = (pooled[pooled.len() / 3], pooled[2 * pooled.len() / 3]);
    let margins = LossConfig::new(m_s, m_c, 2.0, 0.0, LossMode::Quadruplet).map_err(|e| e.to_string())?;
    let report = evaluate(&quads, &params, &store, &margins).map_err(|e| e.to_string())?;

    let (mut ranked, mut sim, mut comp) = (0usize, 0usize, 0usize);
    for i in 0..quads.len() {
        let (s, c, n) = (d_as[i], d_ac[i], d_an[i]);
        ranked += usize::from(s < c && c < n);
        sim += usize::from(s <= m_s);
        comp += usize::from(c > m_s && c <= m_c);
    }
    let pairs = [
        ("ranking", report.ranking_acc, ranked as f64 / 50.0),
        ("similar", report.sim_acc, sim as f64 / 50.0),
        ("complementary", report.comp_acc, comp as f64 / 50.0),
    ];
    for (name, got, want) in pairs {
        check(got == want, || format!("{name} accuracy {got} vs brute force {want}"))?;
    }
    let stats = &report.dist_stats;
    for (name, got, values) in [
        ("similar", &stats.similar, &d_as),
        ("complementary", &stats.complementary, &d_ac),
        ("negative", &stats.negative, &d_an),
    ] {
        let (mean, std) = mean_std(values);
        check(got.mean == mean && got.std_dev == std && got.count == 50, || {
            format!("{name} stats {}/{} vs brute force {mean}/{std}", got.mean, got.std_dev)
        })?;
    }
    Ok(format!(
        "50 quadruplets: ranking {:.2}, similar {:.2}, complementary {:.2}, three means and stds identical",
        report.ranking_acc, report.sim_acc, report.comp_acc
    ))
}

fn criterion_8() -> Outcome {
    let mut rng = seeded(88, 0);
    let dim = 16;
    let rows: Vec<(String, String, Vec<f64>)> = (0..200)
        .map(|i| {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            (
                format!("item{i:03}"),
                format!("cat{}", i % 7),
                v.iter().map(|x| x / norm).collect(),
            )
        })
        .collect();
    let index = index_from_units(rows.clone()).map_err(|e| e.to_string())?;
    // wide band so the complementary query returns something on random points
    let margins = LossConfig::new(0.9, 1.3, 1.8, 0.0, LossMode::Quadruplet).map_err(|e| e.to_string())?;
    let k = 10;
    let mut anchors: Vec<usize> = (0..200).collect();
    anchors.shuffle(&mut rng);
    for &a in &anchors[..20] {
        let (id, cat, unit) = &rows[a];
        let mut all: Vec<(f64, &str, &str)> = rows
            .iter()
            .filter(|r| &r.0 != id)
            .map(|r| (oracle_distance(unit, &r.2), r.0.as_str(), r.1.as_str()))
            .collect();
        all.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(y.1)));
        let want: Vec<(&str, f64)> = all.iter().take(k).map(|x| (x.1, x.0)).collect();
        let got = index.query_similar(id, k).map_err(|e| e.to_string())?;
        let got: Vec<(&str, f64)> = got.iter().map(|n| (n.id.as_str(), n.distance)).collect();
        check(got == want, || {
            format!("similar neighbours of {id} differ: {got:?} vs {want:?}")
        })?;

        let center = 0.5 * (margins.m_s + margins.m_c);
        let mut band: Vec<&(f64, &str, &str)> = all
            .iter()
            .filter(|x| x.0 > margins.m_s && x.0 <= margins.m_c && x.2 != cat)
            .collect();
        band.sort_by(|x, y| {
            (x.0 - center)
                .abs()
                .partial_cmp(&(y.0 - center).abs())
                .unwrap()
                .then(x.0.partial_cmp(&y.0).unwrap())
                .then(x.1.cmp(y.1))
        });
        let want: Vec<(&str, f64)> = band.iter().take(k).map(|x| (x.1, x.0)).collect();
        let got = index
            .query_complementary(id, k, &margins, true)
            .map_err(|e| e.to_string())?;
        let got: Vec<(&str, f64)> = got.iter().map(|n| (n.id.as_str(), n.distance)).collect();
        check(got == want, || format!("complementary candidates of {id} differ"))?;
    }
    Ok(format!(
        "20 anchors on a 200-item index, top-{k} similar and complementary lists identical to a full scan"
    ))
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let planted = planted_benchmark(&dir.path().join("planted"));
    let results: Vec<(u32, Outcome)> = vec![
        (1, criterion_1(&planted)),
        (2, criterion_2()),
        (3, criterion_3(&planted)),
        (4, criterion_4()),
        (5, criterion_5()),
        (6, criterion_6(dir.path())),
        (7, criterion_7()),
        (8, criterion_8()),
    ];
    let mut failed = Vec::new();
    for (n, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS  {detail}"),
            Err(reason) => {
                println!("criterion {n}: FAIL  {reason}");
                failed.push(*n);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
