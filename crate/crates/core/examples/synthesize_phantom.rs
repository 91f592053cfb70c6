// Generate one synthetic phantom and inspect its ground truth.
use boundary_path::phantom::{generate, PhantomSpec, Scenario};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = PhantomSpec::sample(7, Scenario::Truncated, 128);
    let phantom = generate(&spec)?;

    print!("{}", spec.to_record());
    let b = &phantom.gt_boundary;
    println!(
        "boundary: {} pixels from {:?} to {:?}",
        b.len(),
        b.first().unwrap(),
        b.last().unwrap()
    );
    println!(
        "pectoral {} px, breast {} px, foreground {} px",
        phantom.gt_pectoral.count(),
        phantom.gt_breast.count(),
        phantom.foreground.count()
    );
    assert_eq!(
        phantom.gt_breast.count() + phantom.gt_pectoral.count(),
        phantom.foreground.count()
    );

    // same spec, same bytes
    assert_eq!(generate(&spec)?, phantom);

    let dir = tempfile::tempdir()?;
    phantom.write_to_dir(dir.path())?;
    let mut files: Vec<_> = std::fs::read_dir(dir.path())?
        .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect::<Result<_, _>>()?;
    files.sort();
    println!("wrote {}", files.join(", "));
    Ok(())
}

fn main() {
    run_example().unwrap();
}
