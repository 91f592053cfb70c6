// Overlap metrics for predicted masks and a CSV summary.
use boundary_path::metrics::{aggregate, evaluate_masks, write_csv, METRIC_NAMES};
use boundary_path::raster::Raster;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let truth = Raster::from_fn(8, 8, |p| p.col < 4);
    let predictions = [
        ("exact", truth.clone()),
        ("wide", Raster::from_fn(8, 8, |p| p.col < 5)),
        ("narrow", Raster::from_fn(8, 8, |p| p.col < 3)),
    ];

    let mut rows = Vec::new();
    for (id, pred) in predictions {
        rows.push((id.to_string(), evaluate_masks(&pred, &truth)?));
    }
    let reports: Vec<_> = rows.iter().map(|(_, r)| *r).collect();
    for (name, s) in METRIC_NAMES.iter().zip(aggregate(&reports)?) {
        println!("{name}: {:.4} ± {:.4}", s.mean, s.stddev);
    }

    write_csv(std::io::stdout().lock(), &rows)?;
    Ok(())
}

fn main() {
    run_example().unwrap();
}
