//! Synthetic MLO-like phantoms with exact ground truth.
//!
//! A phantom is drawn in the canonical frame: the breast is an ellipse
//! anchored at the lower-left corner, and the pectoral wedge lies below a
//! quadratic Bezier boundary running from column 0 to the last row. Along
//! with the image, the generator emits stand-ins for the two network maps:
//! a blurred band around the (optionally truncated) boundary for OUT2, and
//! a thin boundary trace with clutter blobs and noise for OUT1.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`, which is specified bit-for-bit and platform independent,
//! so a spec always produces the same bytes.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::PixelPath;
use crate::io;
use crate::pipeline::mask_from_boundary;
use crate::raster::{BinaryMask, EdgeProbMap, GrayImage, Pixel, Raster};

/// Quadratic Bezier from `(left_row, 0)` through control point `control`
/// to `(size - 1, bottom_col)`, all in `(row, col)` pixel units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryModel {
    pub left_row: f64,
    pub bottom_col: f64,
    pub control: (f64, f64),
}

impl BoundaryModel {
    fn endpoints(&self, size: usize) -> ((f64, f64), (f64, f64)) {
        ((self.left_row, 0.0), ((size - 1) as f64, self.bottom_col))
    }

    pub fn point(&self, size: usize, t: f64) -> (f64, f64) {
        let (a, c) = self.endpoints(size);
        let k = self.control;
        let u = 1.0 - t;
        (
            u * u * a.0 + 2.0 * u * t * k.0 + t * t * c.0,
            u * u * a.1 + 2.0 * u * t * k.1 + t * t * c.1,
        )
    }

    /// Both coordinates are non-decreasing in `t` iff the control point
    /// lies in the box spanned by the two endpoints.
    pub fn is_monotone(&self, size: usize) -> bool {
        let (a, c) = self.endpoints(size);
        let k = self.control;
        (a.0..=c.0).contains(&k.0) && (a.1..=c.1).contains(&k.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contrast {
    pub background: u8,
    pub tissue: u8,
    pub pectoral: u8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhantomSpec {
    pub seed: u64,
    pub size: usize,
    pub boundary: BoundaryModel,
    pub contrast: Contrast,
    /// Semi-axes of the breast ellipse (vertical, horizontal) as fractions
    /// of `size`, centred on the lower-left corner.
    pub breast_axes: (f64, f64),
    pub clutter_density: f64,
    /// Fraction of the boundary removed from each end of OUT2.
    pub out2_truncation: f64,
    pub out2_blur_radius: usize,
    pub out1_noise_level: f64,
}

/// Corpus flavours for [`PhantomSpec::sample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Clean,
    Truncated,
    LowContrast,
    Cluttered,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Clean,
        Scenario::Truncated,
        Scenario::LowContrast,
        Scenario::Cluttered,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Clean => "clean",
            Scenario::Truncated => "truncated",
            Scenario::LowContrast => "low-contrast",
            Scenario::Cluttered => "cluttered",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario {s:?}")))
    }
}

pub const DEFAULT_SIZE: usize = 256;

impl PhantomSpec {
    /// Draws a spec for `scenario` from `seed`.
    pub fn sample(seed: u64, scenario: Scenario, size: usize) -> PhantomSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let last = (size - 1) as f64;
        let left_row = rng.gen_range(0.15..0.45) * last;
        let bottom_col = rng.gen_range(0.30..0.60) * last;
        let (a, c) = ((left_row, 0.0), (last, bottom_col));
        let chord = (c.0 - a.0, c.1 - a.1);
        let len = (chord.0 * chord.0 + chord.1 * chord.1).sqrt();
        let bulge = rng.gen_range(-0.10..0.10) * len;
        let mid = ((a.0 + c.0) / 2.0, (a.1 + c.1) / 2.0);
        let control = (
            (mid.0 + bulge * chord.1 / len).clamp(a.0, c.0),
            (mid.1 - bulge * chord.0 / len).clamp(a.1, c.1),
        );
        let breast_axes = (rng.gen_range(0.92..1.0), rng.gen_range(0.75..0.92));
        let mut spec = PhantomSpec {
            seed,
            size,
            boundary: BoundaryModel {
                left_row,
                bottom_col,
                control,
            },
            contrast: Contrast {
                background: 0,
                tissue: 110,
                pectoral: 190,
            },
            breast_axes,
            clutter_density: 0.0,
            out2_truncation: 0.0,
            out2_blur_radius: 2,
            out1_noise_level: 0.0,
        };
        match scenario {
            Scenario::Clean => {}
            Scenario::Truncated => spec.out2_truncation = rng.gen_range(0.15..=0.35),
            Scenario::LowContrast => {
                spec.contrast = Contrast {
                    background: 0,
                    tissue: 120,
                    pectoral: 135,
                };
                spec.clutter_density = 0.2;
                spec.out1_noise_level = 0.05;
            }
            Scenario::Cluttered => {
                spec.clutter_density = 0.8;
                spec.out1_noise_level = 0.3;
            }
        }
        spec
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadSpec(m));
        if self.size < crate::pipeline::MIN_SIDE {
            return bad(format!("size {} is below 16", self.size));
        }
        let last = (self.size - 1) as f64;
        let b = &self.boundary;
        if !(0.0..last).contains(&b.left_row)
            || !(0.0..=last).contains(&b.bottom_col)
            || b.bottom_col <= 0.0
        {
            return bad("boundary endpoints must lie on column 0 and the last row".into());
        }
        if !b.is_monotone(self.size) {
            return bad(format!(
                "control point {:?} makes the curve non-monotone",
                b.control
            ));
        }
        let c = &self.contrast;
        if c.background >= c.tissue || c.tissue > c.pectoral {
            return bad("intensities must satisfy background < tissue <= pectoral".into());
        }
        if !(0.0..=0.4).contains(&self.out2_truncation) {
            return bad(format!(
                "truncation {} outside [0, 0.4]",
                self.out2_truncation
            ));
        }
        for (name, v) in [
            ("clutter density", self.clutter_density),
            ("noise level", self.out1_noise_level),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} {v} outside [0, 1]"));
            }
        }
        let (ay, ax) = self.breast_axes;
        if !(ay > 0.0 && ax > 0.0) {
            return bad("breast axes must be positive".into());
        }
        Ok(())
    }

    /// `key=value` record of every field.
    pub fn to_record(&self) -> String {
        let b = &self.boundary;
        let c = &self.contrast;
        format!(
            "seed={}\nsize={}\nboundary_left_row={}\nboundary_bottom_col={}\nboundary_control={},{}\n\
             background={}\ntissue={}\npectoral={}\nbreast_axes={},{}\nclutter_density={}\n\
             out2_truncation={}\nout2_blur_radius={}\nout1_noise_level={}\n",
            self.seed,
            self.size,
            b.left_row,
            b.bottom_col,
            b.control.0,
            b.control.1,
            c.background,
            c.tissue,
            c.pectoral,
            self.breast_axes.0,
            self.breast_axes.1,
            self.clutter_density,
            self.out2_truncation,
            self.out2_blur_radius,
            self.out1_noise_level,
        )
    }
}

/// A generated phantom; every raster is in the canonical frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub spec: PhantomSpec,
    pub image: GrayImage,
    pub gt_boundary: PixelPath,
    pub gt_pectoral: BinaryMask,
    pub gt_breast: BinaryMask,
    pub foreground: BinaryMask,
    pub out1: EdgeProbMap,
    pub out2: EdgeProbMap,
}

/// 8-connected staircase through the rounded curve samples.
fn rasterize_boundary(model: &BoundaryModel, size: usize) -> Vec<Pixel> {
    let samples = size * 16;
    let mut nodes: Vec<Pixel> = Vec::with_capacity(size * 2);
    for i in 0..=samples {
        let (r, c) = model.point(size, i as f64 / samples as f64);
        let p = Pixel::new(
            (r.round().max(0.0) as usize).min(size - 1),
            (c.round().max(0.0) as usize).min(size - 1),
        );
        if nodes.last() != Some(&p) {
            nodes.push(p);
        }
    }
    nodes
}

/// Separable box blur with edge replication.
fn box_blur(map: &Raster<f32>, radius: usize) -> Raster<f32> {
    if radius == 0 {
        return map.clone();
    }
    let (w, h) = map.dims();
    let r = radius as isize;
    let norm = (2 * radius + 1) as f32;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let horiz = Raster::from_fn(w, h, |p| {
        (-r..=r)
            .map(|d| map.get(Pixel::new(p.row, clamp(p.col as isize + d, w))))
            .sum::<f32>()
            / norm
    });
    Raster::from_fn(w, h, |p| {
        (-r..=r)
            .map(|d| horiz.get(Pixel::new(clamp(p.row as isize + d, h), p.col)))
            .sum::<f32>()
            / norm
    })
}

/// Sets every pixel within `radius` of any of `centers`.
fn dilate_points(w: usize, h: usize, centers: &[Pixel], radius: f64) -> BinaryMask {
    let mut m = Raster::filled(w, h, false);
    let reach = radius.floor() as isize;
    for &c in centers {
        for dr in -reach..=reach {
            for dc in -reach..=reach {
                if ((dr * dr + dc * dc) as f64) > radius * radius {
                    continue;
                }
                let (r, col) = (c.row as isize + dr, c.col as isize + dc);
                if r >= 0 && col >= 0 && (r as usize) < h && (col as usize) < w {
                    m.set(Pixel::new(r as usize, col as usize), true);
                }
            }
        }
    }
    m
}

struct Bump {
    center: (f64, f64),
    sigma: f64,
    amplitude: f64,
}

impl Bump {
    fn at(&self, p: Pixel) -> f64 {
        let dr = p.row as f64 - self.center.0;
        let dc = p.col as f64 - self.center.1;
        self.amplitude * (-(dr * dr + dc * dc) / (2.0 * self.sigma * self.sigma)).exp()
    }
}

/// Random bump inside the breast (rejection sampled against `foreground`).
fn bump_in(
    rng: &mut ChaCha8Rng,
    foreground: &BinaryMask,
    sigma: std::ops::Range<f64>,
    amplitude: std::ops::Range<f64>,
) -> Bump {
    let size = foreground.width();
    let mut center = (0.0, 0.0);
    for _ in 0..64 {
        let p = Pixel::new(rng.gen_range(0..size), rng.gen_range(0..size));
        center = (p.row as f64, p.col as f64);
        if foreground.get(p) {
            break;
        }
    }
    Bump {
        center,
        sigma: rng.gen_range(sigma),
        amplitude: rng.gen_range(amplitude),
    }
}

/// Maximum number of clutter blobs, reached at density 1.
const MAX_CLUTTER_BLOBS: f64 = 60.0;
/// Lowest tissue intensity after texturing.
pub const TISSUE_FLOOR: u8 = 60;
const OUT2_BAND_RADIUS: f64 = 2.0;

/// Renders a phantom from its spec. Pure in `spec`.
pub fn generate(spec: &PhantomSpec) -> Result<Phantom> {
    spec.validate()?;
    let size = spec.size;
    // a distinct stream from the one `sample` uses for the same seed
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x005e_ed0f_b0da_7a11);

    let nodes = rasterize_boundary(&spec.boundary, size);
    let gt_boundary = PixelPath {
        nodes,
        total_cost: 0.0,
    };
    let (gt_pectoral, _) = mask_from_boundary(&gt_boundary, size, size)?;
    let (ay, ax) = (
        spec.breast_axes.0 * size as f64,
        spec.breast_axes.1 * size as f64,
    );
    let ellipse = Raster::from_fn(size, size, |p| {
        let y = (size - 1 - p.row) as f64 / ay;
        let x = p.col as f64 / ax;
        x * x + y * y <= 1.0
    });
    let foreground = ellipse.union(&gt_pectoral);
    let gt_breast = foreground.difference(&gt_pectoral);

    // image: smooth texture on tissue, clutter blobs, per-pixel jitter
    let texture: Vec<Bump> = (0..6)
        .map(|_| {
            let mut b = bump_in(&mut rng, &foreground, 20.0..50.0, 5.0..15.0);
            if rng.gen_bool(0.5) {
                b.amplitude = -b.amplitude;
            }
            b
        })
        .collect();
    let n_blobs = (spec.clutter_density * MAX_CLUTTER_BLOBS).round() as usize;
    let blobs: Vec<Bump> = (0..n_blobs)
        .map(|_| bump_in(&mut rng, &gt_breast, 2.0..6.0, 0.3..0.8))
        .collect();
    let c = spec.contrast;
    let image = Raster::from_fn(size, size, |p| {
        if !foreground.get(p) {
            return c.background;
        }
        let jitter = rng.gen_range(-4.0..4.0);
        if gt_pectoral.get(p) {
            let v = c.pectoral as f64 + jitter;
            return v.round().clamp(TISSUE_FLOOR as f64, 255.0) as u8;
        }
        let tex: f64 = texture.iter().map(|b| b.at(p)).sum();
        let dense: f64 = blobs.iter().map(|b| b.at(p) * 50.0).sum();
        let v = c.tissue as f64 + tex + dense + jitter;
        v.round().clamp(TISSUE_FLOOR as f64, 255.0) as u8
    });

    // OUT2: blurred band around the kept stretch of the boundary
    let n = gt_boundary.len();
    let cut = (spec.out2_truncation * n as f64).floor() as usize;
    let kept = &gt_boundary.nodes[cut..n - cut];
    let band = dilate_points(size, size, kept, OUT2_BAND_RADIUS);
    let out2 = box_blur(
        &band.map(|b| if b { 1.0f32 } else { 0.0 }),
        spec.out2_blur_radius,
    )
    .map(|v| v.clamp(0.0, 1.0));

    // OUT1: thin trace of the full boundary plus clutter and noise
    let trace = BinaryMask::from_pixels(size, size, gt_boundary.nodes.iter().copied());
    let halo = dilate_points(size, size, &gt_boundary.nodes, std::f64::consts::SQRT_2);
    let noise = spec.out1_noise_level;
    let out1 = Raster::from_fn(size, size, |p| {
        let mut v = if trace.get(p) {
            0.9
        } else if halo.get(p) {
            0.45
        } else {
            0.0
        };
        v += blobs.iter().map(|b| b.at(p)).sum::<f64>();
        if noise > 0.0 {
            v += noise * rng.gen::<f64>();
        }
        v.clamp(0.0, 1.0) as f32
    });

    Ok(Phantom {
        spec: *spec,
        image,
        gt_boundary,
        gt_pectoral,
        gt_breast,
        foreground,
        out1,
        out2,
    })
}

impl Phantom {
    /// Writes `image.pgm`, `out1.epm`, `out2.epm`, `gt_breast.pgm`,
    /// `gt_pectoral.pgm` and `spec.txt` into `dir` (created if missing).
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        io::write_gray_image(dir.join("image.pgm"), &self.image)?;
        io::write_prob_map(dir.join("out1.epm"), &self.out1)?;
        io::write_prob_map(dir.join("out2.epm"), &self.out2)?;
        io::write_mask(dir.join("gt_breast.pgm"), &self.gt_breast)?;
        io::write_mask(dir.join("gt_pectoral.pgm"), &self.gt_pectoral)?;
        io::write_atomic(&dir.join("spec.txt"), self.spec.to_record().as_bytes())
    }
}

/// Per-phantom seeds of a corpus, drawn from a master stream.
pub fn corpus_seeds(master_seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    (0..count).map(|_| rng.gen()).collect()
}

/// `count` specs for `scenario`, reproducible from `master_seed`.
pub fn corpus_specs(
    master_seed: u64,
    count: usize,
    scenario: Scenario,
    size: usize,
) -> Vec<PhantomSpec> {
    corpus_seeds(master_seed, count)
        .into_iter()
        .map(|s| PhantomSpec::sample(s, scenario, size))
        .collect()
}

/// Mean and maximum, over `est` nodes, of the distance to the nearest
/// `gt` node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryDistance {
    pub mean: f64,
    pub max: f64,
}

const BUCKET: usize = 8;

/// Distance from each estimated node to the closest ground-truth node,
/// searched over a coarse bucket grid ring by ring.
pub fn boundary_distance(est: &PixelPath, gt: &PixelPath) -> Result<BoundaryDistance> {
    if est.is_empty() || gt.is_empty() {
        return Err(Error::Shape(
            "boundary_distance needs two non-empty paths".into(),
        ));
    }
    let max_row = est
        .nodes
        .iter()
        .chain(&gt.nodes)
        .map(|p| p.row)
        .max()
        .unwrap_or(0);
    let max_col = est
        .nodes
        .iter()
        .chain(&gt.nodes)
        .map(|p| p.col)
        .max()
        .unwrap_or(0);
    let (gr, gc) = (max_row / BUCKET + 1, max_col / BUCKET + 1);
    let mut grid: Vec<Vec<Pixel>> = vec![Vec::new(); gr * gc];
    for &p in &gt.nodes {
        grid[(p.row / BUCKET) * gc + p.col / BUCKET].push(p);
    }
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for &p in &est.nodes {
        let (br, bc) = (p.row / BUCKET, p.col / BUCKET);
        let mut best = f64::INFINITY;
        for ring in 0..gr.max(gc) {
            // anything in ring k is at least (k - 1) * BUCKET away
            if ring > 0 && ((ring - 1) * BUCKET) as f64 > best {
                break;
            }
            let r0 = br.saturating_sub(ring);
            let c0 = bc.saturating_sub(ring);
            for r in r0..=(br + ring).min(gr - 1) {
                for c in c0..=(bc + ring).min(gc - 1) {
                    if r.abs_diff(br) != ring && c.abs_diff(bc) != ring {
                        continue;
                    }
                    for &q in &grid[r * gc + c] {
                        best = best.min(p.distance(q));
                    }
                }
            }
        }
        sum += best;
        max = max.max(best);
    }
    Ok(BoundaryDistance {
        mean: sum / est.len() as f64,
        max,
    })
}
