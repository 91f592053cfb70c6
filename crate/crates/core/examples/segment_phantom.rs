// Full pipeline on a phantom, scored against its ground truth.
use boundary_path::metrics::evaluate_masks;
use boundary_path::phantom::{boundary_distance, generate, PhantomSpec, Scenario};
use boundary_path::pipeline::{segment, PipelineConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let phantom = generate(&PhantomSpec::sample(3, Scenario::Clean, 256))?;
    let result = segment(
        &phantom.image,
        &phantom.out1,
        &phantom.out2,
        &PipelineConfig::default(),
    )?;

    print!("{}", result.run_report.to_key_values());
    let m = evaluate_masks(&result.breast_mask, &phantom.gt_breast)?;
    let d = boundary_distance(&result.boundary, &phantom.gt_boundary)?;
    println!(
        "DSC {:.4}  JAC {:.4}  SEN {:.4}  SPE {:.4}",
        m.dsc, m.jac, m.sen, m.spe
    );
    println!(
        "boundary distance: mean {:.3} px, max {:.3} px",
        d.mean, d.max
    );
    assert!(m.dsc > 0.95);
    Ok(())
}

fn main() {
    run_example().unwrap();
}
