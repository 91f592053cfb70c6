// The three CLI commands driven through the library: synthesize a corpus,
// segment it from its manifest, then score the predictions.
use boundary_path::cli::{cmd_evaluate, cmd_segment, cmd_synth};
use boundary_path::phantom::Scenario;
use boundary_path::pipeline::PipelineConfig;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let corpus = dir.path().join("corpus");
    let out = dir.path().join("out");

    cmd_synth(4, Scenario::Cluttered, 99, 128, &corpus)?;
    print!("{}", std::fs::read_to_string(corpus.join("manifest.txt"))?);

    let run = cmd_segment(
        &corpus.join("manifest.txt"),
        &out,
        &PipelineConfig::default(),
        0,
    )?;
    println!("segmented {}, failed {}", run.processed, run.failures.len());
    print!("{}", std::fs::read_to_string(out.join("metrics.csv"))?);

    let csv = dir.path().join("scores.csv");
    let scored = cmd_evaluate(&out.join("breast"), &corpus, Some(&csv))?;
    assert_eq!(scored.processed, 4);
    assert_eq!(
        std::fs::read(&csv)?,
        std::fs::read(out.join("metrics.csv"))?
    );
    Ok(())
}

fn main() {
    run_example().unwrap();
}
