//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs as a plain binary (`harness = false`) so the lines
//! are always visible in `cargo test` output.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use boundary_path::cli::cmd_segment;
use boundary_path::graph::{shortest_path, GraphConfig};
use boundary_path::metrics::{compute_metrics, confusion, ConfusionCounts};
use boundary_path::morphology::otsu_threshold;
use boundary_path::orientation::Orientation;
use boundary_path::phantom::{boundary_distance, corpus_specs, generate, Scenario, DEFAULT_SIZE};
use boundary_path::pipeline::{segment, PipelineConfig};
use boundary_path::raster::{BinaryMask, EdgeProbMap, Pixel, Raster};
use boundary_path::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------- oracles

const EPS: f64 = 1e-6;

/// Cheapest simple 8-connected path by exhaustive enumeration, pruned only
/// by the best complete cost found so far (weights are positive).
fn brute_force_path(m: &EdgeProbMap, b: &BinaryMask, s: Pixel, e: Pixel) -> Option<f64> {
    let (w, h) = (b.width() as isize, b.height() as isize);
    fn walk(
        ctx: (&EdgeProbMap, &BinaryMask, Pixel, isize, isize),
        cur: Pixel,
        cost: f64,
        seen: &mut Vec<bool>,
        best: &mut Option<f64>,
    ) {
        let (m, b, e, w, h) = ctx;
        if cur == e {
            *best = Some(best.map_or(cost, |c: f64| c.min(cost)));
            return;
        }
        if best.is_some_and(|c| cost >= c) {
            return;
        }
        for dr in -1..=1isize {
            for dc in -1..=1isize {
                let (r, c) = (cur.row as isize + dr, cur.col as isize + dc);
                if (dr, dc) == (0, 0) || r < 0 || c < 0 || r >= h || c >= w {
                    continue;
                }
                let q = Pixel::new(r as usize, c as usize);
                let qi = (r * w + c) as usize;
                if !b.get(q) || seen[qi] {
                    continue;
                }
                seen[qi] = true;
                let step = 2.0 / (m.get(cur) as f64 + m.get(q) as f64 + EPS);
                walk(ctx, q, cost + step, seen, best);
                seen[qi] = false;
            }
        }
    }
    if !b.get(s) || !b.get(e) {
        return None;
    }
    let mut seen = vec![false; b.len()];
    seen[s.row * b.width() + s.col] = true;
    let mut best = None;
    walk((m, b, e, w, h), s, 0.0, &mut seen, &mut best);
    best
}

/// Exhaustive Otsu: tries every split of the 256 probability bins and keeps
/// the first one with the largest between-class variance, compared exactly
/// as integer fractions of bin-index sums.
fn otsu_exhaustive(map: &EdgeProbMap) -> Option<f32> {
    let bin = |v: f32| ((v as f64 * 256.0).ceil() as i64 - 1).clamp(0, 255);
    let bins: Vec<i64> = map.data().iter().map(|&v| bin(v)).collect();
    let n = bins.len() as i128;
    let total: i128 = bins.iter().map(|&b| b as i128).sum();
    // variance ∝ (n·s0 − n0·S)² / (n0·n1)
    let mut best: Option<(i64, i128, i128)> = None;
    for k in 0..255i64 {
        let n0 = bins.iter().filter(|&&b| b <= k).count() as i128;
        let s0: i128 = bins.iter().filter(|&&b| b <= k).map(|&b| b as i128).sum();
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let num = (n * s0 - n0 * total).pow(2);
        let den = n0 * n1;
        let better = match best {
            None => true,
            Some((_, bn, bd)) => num * bd > bn * den,
        };
        if better {
            best = Some((k, num, den));
        }
    }
    best.map(|(k, _, _)| (k + 1) as f32 / 256.0)
}

fn confusion_oracle(r: &BinaryMask, g: &BinaryMask) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for row in 0..r.height() {
        for col in 0..r.width() {
            let p = Pixel::new(row, col);
            match (r.get(p), g.get(p)) {
                (true, true) => c.tp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
            }
        }
    }
    c
}

// ---------------------------------------------------------------- criteria

fn dijkstra_optimality() -> Outcome {
    let start = Instant::now();
    let cfg = GraphConfig::default();
    let mut mismatches = Vec::new();
    let mut solvable = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Raster::from_fn(5, 5, |_| rng.gen_range(0.05f32..=1.0));
        let mut b = Raster::from_fn(5, 5, |_| rng.gen_bool(0.7));
        let s = Pixel::new(rng.gen_range(0..5), rng.gen_range(0..5));
        let e = Pixel::new(rng.gen_range(0..5), rng.gen_range(0..5));
        b.set(s, true);
        b.set(e, true);
        match (
            shortest_path(&m, &b, s, e, &cfg),
            brute_force_path(&m, &b, s, e),
        ) {
            (Ok(p), Some(best)) => {
                solvable += 1;
                // equal-cost routes may sum their weights in a different order
                if (p.total_cost - best).abs() > 1e-12 * best {
                    mismatches.push(seed);
                }
            }
            (Err(Error::NoPath { .. }), None) => {}
            _ => mismatches.push(seed),
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches.is_empty() && elapsed < Duration::from_secs(5),
        format!(
            "100 instances ({solvable} connected), mismatches {mismatches:?}, {:.3}s (limit 5s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn otsu_oracle() -> Outcome {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let map = Raster::from_fn(16, 16, |_| rng.gen::<f32>());
        if otsu_threshold(&map).ok() != otsu_exhaustive(&map) {
            mismatches.push(seed);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches.is_empty() && elapsed < Duration::from_secs(1),
        format!(
            "100 maps, mismatches {mismatches:?}, {:.3}s (limit 1s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut count_mismatch = 0;
    let mut undefined = 0;
    for _ in 0..1000 {
        let (pr, pg) = (rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
        let r = Raster::from_fn(32, 32, |_| rng.gen_bool(pr));
        let g = Raster::from_fn(32, 32, |_| rng.gen_bool(pg));
        let c = confusion(&r, &g).expect("same shape");
        if c != confusion_oracle(&r, &g) {
            count_mismatch += 1;
        }
        match compute_metrics(c) {
            Ok(m) => {
                worst = worst
                    .max((m.dsc - 2.0 * m.jac / (1.0 + m.jac)).abs())
                    .max((m.sen - (1.0 - m.fnr)).abs())
                    .max((m.spe - (1.0 - m.fpr)).abs());
            }
            Err(_) => undefined += 1,
        }
    }
    outcome(
        worst <= 1e-12 && count_mismatch == 0 && undefined == 0,
        format!(
            "1000 pairs, max identity error {worst:.2e} (limit 1e-12), count mismatches {count_mismatch}, undefined {undefined}"
        ),
    )
}

struct CorpusStats {
    n: usize,
    failures: Vec<String>,
    dsc: f64,
    distance: f64,
    completed: usize,
}

fn run_corpus(seed: u64, scenario: Scenario) -> CorpusStats {
    let specs = corpus_specs(seed, 50, scenario, DEFAULT_SIZE);
    let cfg = PipelineConfig::default();
    let mut stats = CorpusStats {
        n: 0,
        failures: Vec::new(),
        dsc: 0.0,
        distance: 0.0,
        completed: 0,
    };
    for spec in &specs {
        let p = generate(spec).expect("valid spec");
        match segment(&p.image, &p.out1, &p.out2, &cfg) {
            Ok(r) => {
                let c = confusion_oracle(&r.breast_mask, &p.gt_breast);
                stats.dsc += 2.0 * c.tp as f64 / (2 * c.tp + c.fp + c.fn_) as f64;
                stats.distance += boundary_distance(&r.boundary, &p.gt_boundary)
                    .expect("non-empty paths")
                    .mean;
                stats.completed += usize::from(r.run_report.completion_applied());
                stats.n += 1;
            }
            Err(e) => stats.failures.push(format!("seed {}: {e}", spec.seed)),
        }
    }
    if stats.n > 0 {
        stats.dsc /= stats.n as f64;
        stats.distance /= stats.n as f64;
    }
    stats
}

fn clean_corpus() -> Outcome {
    let start = Instant::now();
    let s = run_corpus(11, Scenario::Clean);
    let elapsed = start.elapsed();
    outcome(
        s.failures.is_empty()
            && s.distance <= 1.5
            && s.dsc >= 0.95
            && elapsed < Duration::from_secs(60),
        format!(
            "50 phantoms, mean boundary distance {:.3} px (limit 1.5), mean DSC {:.4} (limit 0.95), failures {:?}, {:.2}s (limit 60s)",
            s.distance,
            s.dsc,
            s.failures,
            elapsed.as_secs_f64()
        ),
    )
}

fn truncated_corpus() -> Outcome {
    let s = run_corpus(12, Scenario::Truncated);
    let no_path = s.failures.iter().filter(|f| f.contains("no path")).count();
    outcome(
        s.failures.is_empty() && s.completed == 50 && s.dsc >= 0.90,
        format!(
            "50 phantoms, completion on {}/50, mean DSC {:.4} (limit 0.90), NoPath {no_path}, failures {:?}",
            s.completed, s.dsc, s.failures
        ),
    )
}

fn orientation_equivariance() -> Outcome {
    let cfg = PipelineConfig::default();
    let flips = [
        Orientation::new(true, false),
        Orientation::new(false, true),
        Orientation::new(true, true),
    ];
    let mut bad = Vec::new();
    for spec in corpus_specs(13, 20, Scenario::Clean, DEFAULT_SIZE) {
        let p = generate(&spec).expect("valid spec");
        let base = match segment(&p.image, &p.out1, &p.out2, &cfg) {
            Ok(r) => r,
            Err(e) => {
                bad.push(format!("seed {}: {e}", spec.seed));
                continue;
            }
        };
        for o in flips {
            let r = segment(
                &o.apply(&p.image),
                &o.apply(&p.out1),
                &o.apply(&p.out2),
                &cfg,
            );
            let same = r.as_ref().is_ok_and(|r| {
                r.breast_mask == o.apply(&base.breast_mask)
                    && r.pectoral_mask == o.apply(&base.pectoral_mask)
            });
            if !same {
                bad.push(format!("seed {} flip {:?}", spec.seed, o));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("20 phantoms x 3 flips, mismatches {bad:?}"),
    )
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn visit(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).expect("readable dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                visit(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).expect("inside root");
                out.insert(
                    rel.display().to_string(),
                    std::fs::read(&path).expect("readable"),
                );
            }
        }
    }
    let mut out = BTreeMap::new();
    visit(root, root, &mut out);
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().expect("temp dir");
    let corpus = tmp.path().join("corpus");
    boundary_path::cli::cmd_synth(6, Scenario::Truncated, 14, 128, &corpus).expect("synth");
    let cfg = PipelineConfig::default();
    let manifest = corpus.join("manifest.txt");
    let (a, b) = (tmp.path().join("run-a"), tmp.path().join("run-b"));
    let ra = cmd_segment(&manifest, &a, &cfg, 4).expect("first run");
    let rb = cmd_segment(&manifest, &b, &cfg, 2).expect("second run");
    let (ta, tb) = (read_tree(&a), read_tree(&b));
    outcome(
        ra.failures.is_empty() && rb.failures.is_empty() && !ta.is_empty() && ta == tb,
        format!(
            "{} files per run, identical: {}, failures {}+{}",
            ta.len(),
            ta == tb,
            ra.failures.len(),
            rb.failures.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("dijkstra-optimality", dijkstra_optimality),
        ("otsu-oracle", otsu_oracle),
        ("metric-identities", metric_identities),
        ("clean-corpus", clean_corpus),
        ("truncated-corpus", truncated_corpus),
        ("orientation-equivariance", orientation_equivariance),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {}/{} passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
