// Right-facing images are flipped into the canonical frame and back.
use boundary_path::orientation::{corner_means, detect_orientation, Orientation};
use boundary_path::phantom::{generate, PhantomSpec, Scenario};
use boundary_path::pipeline::{segment, PipelineConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = generate(&PhantomSpec::sample(5, Scenario::Clean, 128))?;
    let cfg = PipelineConfig::default();
    let canonical = segment(&p.image, &p.out1, &p.out2, &cfg)?;

    let mirror = Orientation::new(true, false);
    let image = mirror.apply(&p.image);
    println!("corner means (LL, LR, UL, UR): {:?}", corner_means(&image));
    let detected = detect_orientation(&image)?;
    println!("detected {detected:?}");
    assert_eq!(detected, mirror);

    let flipped = segment(&image, &mirror.apply(&p.out1), &mirror.apply(&p.out2), &cfg)?;
    assert_eq!(flipped.breast_mask, mirror.apply(&canonical.breast_mask));
    println!(
        "mirrored run starts at {:?}, canonical at {:?}",
        flipped.boundary.first().unwrap(),
        canonical.boundary.first().unwrap()
    );
    Ok(())
}

fn main() {
    run_example().unwrap();
}
