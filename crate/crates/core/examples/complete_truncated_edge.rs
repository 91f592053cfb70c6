// Extending a coarse edge that stops short of the image borders.
use boundary_path::morphology::{
    binarize, complete_mask, is_disconnected, longest_component, otsu_threshold, CompletionParams,
};
use boundary_path::phantom::{generate, PhantomSpec, Scenario};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut spec = PhantomSpec::sample(21, Scenario::Clean, 256);
    spec.out2_truncation = 0.3;
    let phantom = generate(&spec)?;

    let t = otsu_threshold(&phantom.out2)?;
    let coarse = longest_component(&binarize(&phantom.out2, t))?;
    let (left_short, bottom_short) = is_disconnected(&coarse);
    println!(
        "threshold {t:.4}: {} px, short of left={left_short} bottom={bottom_short}",
        coarse.count()
    );

    let done = complete_mask(&coarse, &CompletionParams::default())?;
    for (side, fit) in [("left", done.left), ("bottom", done.bottom)] {
        if let Some(f) = fit {
            println!(
                "{side}: fitted on {} skeleton px, slope dr/dc {:.3}",
                f.samples,
                f.slope()
            );
        }
    }
    println!(
        "stroke width {}, {} px added",
        done.stroke_width,
        done.added(&coarse).count()
    );
    assert_eq!(is_disconnected(&done.mask), (false, false));
    Ok(())
}

fn main() {
    run_example().unwrap();
}
