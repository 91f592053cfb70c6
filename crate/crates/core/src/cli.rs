//! Batch commands behind the `boundary-path` binary.
//!
//! Exit codes: 0 success, 1 when at least one item failed, 2 for usage or
//! manifest problems.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info};
use rayon::prelude::*;

use crate::error::Error;
use crate::io;
use crate::metrics::{evaluate_masks, write_csv, MetricsReport};
use crate::morphology::CompletionParams;
use crate::phantom::{corpus_specs, generate, Scenario, DEFAULT_SIZE};
use crate::pipeline::{segment, FusionSource, PipelineConfig, Stage};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURES: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Errors that stop a command before any item is processed.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("prediction and ground-truth sets differ: {0}")]
    ManifestMismatch(String),
    #[error(transparent)]
    Lib(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(_) => EXIT_FAILURES,
            _ => EXIT_USAGE,
        }
    }
}

/// One failed item of a batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemFailure {
    pub id: String,
    /// Pipeline stage, or `write`/`evaluate`/`synth` outside the pipeline.
    pub stage: String,
    pub message: String,
}

impl fmt::Display for ItemFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: [{}] {}", self.id, self.stage, self.message)
    }
}

#[derive(Debug, Default)]
pub struct BatchOutcome {
    pub processed: usize,
    pub failures: Vec<ItemFailure>,
}

impl BatchOutcome {
    pub fn exit_code(&self) -> u8 {
        if self.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_FAILURES
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub id: String,
    pub image: PathBuf,
    pub out1: PathBuf,
    pub out2: PathBuf,
    pub ground_truth: Option<PathBuf>,
}

/// Parses `<id> <image> <out1> <out2> [gt]` lines; blank lines and `#`
/// comments are skipped, relative paths resolve against `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>, CliError> {
    let mut entries: Vec<ManifestEntry> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if !(4..=5).contains(&f.len()) {
            return Err(CliError::Manifest(format!(
                "line {}: expected `<id> <image> <out1> <out2> [gt]`, got {} fields",
                n + 1,
                f.len()
            )));
        }
        if entries.iter().any(|e| e.id == f[0]) {
            return Err(CliError::Manifest(format!(
                "line {}: duplicate id {}",
                n + 1,
                f[0]
            )));
        }
        entries.push(ManifestEntry {
            id: f[0].to_string(),
            image: base.join(f[1]),
            out1: base.join(f[2]),
            out2: base.join(f[3]),
            ground_truth: f.get(4).map(|g| base.join(g)),
        });
    }
    if entries.is_empty() {
        return Err(CliError::Manifest("no entries".into()));
    }
    Ok(entries)
}

/// Reads and parses a manifest file and checks that every referenced file
/// exists.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Manifest(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let entries = parse_manifest(&text, base)?;
    for e in &entries {
        let files = [&e.image, &e.out1, &e.out2]
            .into_iter()
            .chain(e.ground_truth.as_ref());
        for f in files {
            if !f.is_file() {
                return Err(CliError::Manifest(format!(
                    "{}: missing {}",
                    e.id,
                    f.display()
                )));
            }
        }
    }
    Ok(entries)
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))
}

fn fail(id: &str, stage: &str, message: impl fmt::Display) -> ItemFailure {
    ItemFailure {
        id: id.to_string(),
        stage: stage.to_string(),
        message: message.to_string(),
    }
}

fn boundary_text(nodes: &[crate::raster::Pixel]) -> String {
    nodes
        .iter()
        .map(|p| format!("{} {}\n", p.row, p.col))
        .collect()
}

fn segment_one(
    e: &ManifestEntry,
    out_dir: &Path,
    cfg: &PipelineConfig,
) -> Result<Option<MetricsReport>, ItemFailure> {
    let input = Stage::Input.as_str();
    let named = |path: &Path| {
        let shown = path.display().to_string();
        move |err: Error| fail(&e.id, input, format!("{shown}: {err}"))
    };
    let image = io::read_gray_image(&e.image).map_err(named(&e.image))?;
    let out1 = io::read_prob_map(&e.out1).map_err(named(&e.out1))?;
    let out2 = io::read_prob_map(&e.out2).map_err(named(&e.out2))?;
    let result = segment(&image, &out1, &out2, cfg)
        .map_err(|err| fail(&e.id, err.stage.as_str(), &err.error))?;

    let write = |r: crate::error::Result<()>| r.map_err(|err| fail(&e.id, "write", err));
    let name = format!("{}.pgm", e.id);
    write(io::write_mask(
        out_dir.join("breast").join(&name),
        &result.breast_mask,
    ))?;
    write(io::write_mask(
        out_dir.join("pectoral").join(&name),
        &result.pectoral_mask,
    ))?;
    write(io::write_atomic(
        &out_dir.join("boundaries").join(format!("{}.txt", e.id)),
        boundary_text(&result.boundary.nodes).as_bytes(),
    ))?;
    write(io::write_atomic(
        &out_dir.join("reports").join(format!("{}.txt", e.id)),
        result.run_report.to_key_values().as_bytes(),
    ))?;

    match &e.ground_truth {
        None => Ok(None),
        Some(gt) => {
            let gt = io::read_mask(gt).map_err(|err| fail(&e.id, "evaluate", err))?;
            evaluate_masks(&result.breast_mask, &gt)
                .map(Some)
                .map_err(|err| fail(&e.id, "evaluate", err))
        }
    }
}

fn create_dirs(root: &Path, subdirs: &[&str]) -> Result<(), CliError> {
    for d in subdirs {
        let p = root.join(d);
        std::fs::create_dir_all(&p).map_err(|e| Error::io(p, e))?;
    }
    Ok(())
}

fn failures_text(failures: &[ItemFailure]) -> String {
    failures.iter().map(|f| format!("{f}\n")).collect()
}

/// Segments every manifest entry, writing `breast/<id>.pgm`,
/// `pectoral/<id>.pgm`, `boundaries/<id>.txt` and `reports/<id>.txt` under
/// `out_dir`. Entries with ground truth are scored into `metrics.csv`;
/// failed entries are listed in `failures.txt`. `jobs == 0` uses every core.
pub fn cmd_segment(
    manifest: &Path,
    out_dir: &Path,
    cfg: &PipelineConfig,
    jobs: usize,
) -> Result<BatchOutcome, CliError> {
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let entries = load_manifest(manifest)?;
    create_dirs(out_dir, &["breast", "pectoral", "boundaries", "reports"])?;
    let pool = thread_pool(jobs)?;
    let results: Vec<_> = pool.install(|| {
        entries
            .par_iter()
            .map(|e| {
                let r = segment_one(e, out_dir, cfg);
                match &r {
                    Ok(_) => info!("{}: done", e.id),
                    Err(f) => error!("{f}"),
                }
                r
            })
            .collect()
    });

    let mut outcome = BatchOutcome::default();
    let mut rows: Vec<(String, MetricsReport)> = Vec::new();
    for (e, r) in entries.iter().zip(results) {
        match r {
            Ok(report) => {
                outcome.processed += 1;
                if let Some(m) = report {
                    rows.push((e.id.clone(), m));
                }
            }
            Err(f) => outcome.failures.push(f),
        }
    }
    if !rows.is_empty() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows)?;
        io::write_atomic(&out_dir.join("metrics.csv"), &buf)?;
    }
    let failures = out_dir.join("failures.txt");
    if outcome.failures.is_empty() {
        if failures.exists() {
            std::fs::remove_file(&failures).map_err(|e| Error::io(&failures, e))?;
        }
    } else {
        io::write_atomic(&failures, failures_text(&outcome.failures).as_bytes())?;
    }
    Ok(outcome)
}

/// Ground truth for `id`: `<gt>/<id>.pgm`, else `<gt>/<id>/gt_breast.pgm`.
fn gt_path(gt_dir: &Path, id: &str) -> Option<PathBuf> {
    [
        gt_dir.join(format!("{id}.pgm")),
        gt_dir.join(id).join("gt_breast.pgm"),
    ]
    .into_iter()
    .find(|p| p.is_file())
}

fn pgm_ids(dir: &Path) -> Result<Vec<String>, CliError> {
    let rd = std::fs::read_dir(dir)
        .map_err(|e| CliError::Usage(format!("cannot list {}: {e}", dir.display())))?;
    let mut ids = Vec::new();
    for entry in rd {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|x| x == "pgm") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                ids.push(stem.to_string());
            }
        }
    }
    ids.sort();
    Ok(ids)
}

/// Scores every `<pred>/<id>.pgm` against its ground truth and writes the
/// CSV to `out` (stdout when `None`). Rows follow sorted id order.
pub fn cmd_evaluate(
    pred_dir: &Path,
    gt_dir: &Path,
    out: Option<&Path>,
) -> Result<BatchOutcome, CliError> {
    let ids = pgm_ids(pred_dir)?;
    if ids.is_empty() {
        return Err(CliError::Usage(format!(
            "no .pgm files in {}",
            pred_dir.display()
        )));
    }
    let missing: Vec<&str> = ids
        .iter()
        .filter(|id| gt_path(gt_dir, id).is_none())
        .map(String::as_str)
        .collect();
    if !missing.is_empty() {
        return Err(CliError::ManifestMismatch(format!(
            "no ground truth for {}",
            missing.join(", ")
        )));
    }
    let mut outcome = BatchOutcome::default();
    let mut rows = Vec::new();
    for id in &ids {
        let scored = io::read_mask(pred_dir.join(format!("{id}.pgm"))).and_then(|p| {
            let g = io::read_mask(gt_path(gt_dir, id).expect("checked above"))?;
            evaluate_masks(&p, &g)
        });
        match scored {
            Ok(m) => {
                outcome.processed += 1;
                rows.push((id.clone(), m));
            }
            Err(e) => {
                let f = fail(id, "evaluate", e);
                error!("{f}");
                outcome.failures.push(f);
            }
        }
    }
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows)?;
    match out {
        Some(path) => io::write_atomic(path, &buf)?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&buf)
                .map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(outcome)
}

/// Writes `count` phantoms to `<out>/<id>/` plus `<out>/manifest.txt`
/// listing them with their ground truth.
pub fn cmd_synth(
    count: usize,
    scenario: Scenario,
    seed: u64,
    size: usize,
    out_dir: &Path,
) -> Result<BatchOutcome, CliError> {
    if count == 0 {
        return Err(CliError::Usage("count must be at least 1".into()));
    }
    let specs = corpus_specs(seed, count, scenario, size);
    let ids: Vec<String> = (0..count).map(|i| format!("{scenario}-{i:04}")).collect();
    let results: Vec<Result<(), Error>> = specs
        .par_iter()
        .zip(&ids)
        .map(|(spec, id)| generate(spec)?.write_to_dir(&out_dir.join(id)))
        .collect();
    let mut outcome = BatchOutcome::default();
    let mut manifest = format!("# scenario={scenario} seed={seed} count={count}\n");
    for (id, r) in ids.iter().zip(results) {
        match r {
            Ok(()) => {
                outcome.processed += 1;
                manifest.push_str(&format!(
                    "{id} {id}/image.pgm {id}/out1.epm {id}/out2.epm {id}/gt_breast.pgm\n"
                ));
            }
            Err(e) => outcome.failures.push(fail(id, "synth", e)),
        }
    }
    io::write_atomic(&out_dir.join("manifest.txt"), manifest.as_bytes())?;
    Ok(outcome)
}

#[derive(Debug, Parser)]
#[command(
    name = "boundary-path",
    version,
    about = "Pectoral boundary reconstruction from edge-probability maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment every image listed in a manifest.
    Segment {
        /// Lines of `<id> <image.pgm> <out1.epm> <out2.epm> [gt.pgm]`.
        #[arg(long)]
        manifest: PathBuf,
        /// Receives breast/, pectoral/, boundaries/ and reports/.
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value = "out2", value_parser = ["out1", "out2"])]
        fusion_source: String,
        /// Fixed threshold for OUT2 instead of Otsu.
        #[arg(long)]
        threshold: Option<f32>,
        #[arg(long, default_value_t = 25)]
        arc_distance: u32,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Score predicted breast masks against ground truth.
    Evaluate {
        /// Directory of predicted `<id>.pgm` masks.
        #[arg(long)]
        pred: PathBuf,
        /// Directory with `<id>.pgm` or `<id>/gt_breast.pgm`.
        #[arg(long)]
        gt: PathBuf,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic phantom corpus.
    Synth {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
        #[arg(long, default_value = "clean", value_parser = ["clean", "truncated", "low-contrast", "cluttered"])]
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SIZE)]
        size: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn report(outcome: Result<BatchOutcome, CliError>) -> u8 {
    match outcome {
        Ok(o) => {
            for f in &o.failures {
                eprintln!("failed {f}");
            }
            eprintln!("{} succeeded, {} failed", o.processed, o.failures.len());
            o.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command line and returns its exit code.
pub fn run(cli: Cli) -> u8 {
    match cli.command {
        Command::Segment {
            manifest,
            out_dir,
            fusion_source,
            threshold,
            arc_distance,
            jobs,
        } => {
            let cfg = PipelineConfig {
                fusion_source: fusion_source.parse::<FusionSource>().unwrap_or_default(),
                completion: CompletionParams { arc_distance },
                threshold_override: threshold,
                ..PipelineConfig::default()
            };
            report(cmd_segment(&manifest, &out_dir, &cfg, jobs))
        }
        Command::Evaluate { pred, gt, out } => report(cmd_evaluate(&pred, &gt, out.as_deref())),
        Command::Synth {
            count,
            scenario,
            seed,
            size,
            out_dir,
        } => {
            let outcome = scenario
                .parse::<Scenario>()
                .map_err(|e| CliError::Usage(e.to_string()))
                .and_then(|sc| cmd_synth(count as usize, sc, seed, size, &out_dir));
            report(outcome)
        }
    }
}

/// Entry point for the binary: logging from `BOUNDARY_PATH_LOG`, then
/// argument parsing (usage errors exit with 2).
pub fn main_entry() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BOUNDARY_PATH_LOG", "warn"))
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    ExitCode::from(run(cli))
}
