// Cheapest 8-connected route through an edge map.
//
// Every step between neighbours p and q costs 2 / (M(p) + M(q) + eps), so
// the search prefers pixels with high edge probability.
use boundary_path::graph::{shortest_path, GraphConfig};
use boundary_path::raster::{Pixel, Raster};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // a bright ridge bending through a dim 7x7 field
    let ridge = [
        (0, 0),
        (1, 1),
        (2, 2),
        (2, 3),
        (2, 4),
        (3, 5),
        (4, 6),
        (5, 6),
        (6, 6),
    ];
    let m = Raster::from_fn(7, 7, |p| {
        if ridge.contains(&(p.row, p.col)) {
            0.9f32
        } else {
            0.1
        }
    });
    let allowed = Raster::filled(7, 7, true);

    let path = shortest_path(
        &m,
        &allowed,
        Pixel::new(0, 0),
        Pixel::new(6, 6),
        &GraphConfig::default(),
    )?;
    for r in 0..7 {
        let line: String = (0..7)
            .map(|c| {
                if path.nodes.contains(&Pixel::new(r, c)) {
                    '#'
                } else {
                    '.'
                }
            })
            .collect();
        println!("{line}");
    }
    println!("{} nodes, cost {:.4}", path.len(), path.total_cost);
    assert_eq!(path.len(), ridge.len());
    Ok(())
}

fn main() {
    run_example().unwrap();
}
