//! End-to-end boundary reconstruction: probability maps in, boundary path
//! and breast/pectoral masks out.
//!
//! Stages, all in the canonical frame (pectoral region at the lower left):
//!
//! 1. reorient the image and both maps,
//! 2. threshold the coarse map (Otsu unless overridden) and keep its largest
//!    8-connected component,
//! 3. extend that component to column 0 / the last row if it falls short,
//! 4. fuse it with a probability map into the edge map `M`,
//! 5. take the skeleton endpoints as terminals and find the cheapest path
//!    between them, anchored to both image borders,
//! 6. fill the pectoral region below the path and intersect the breast
//!    foreground with its complement,
//! 7. map everything back to the input frame.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use log::debug;

use crate::error::{Error, Result};
use crate::graph::{path_cost, select_terminals, shortest_path, GraphConfig, PixelPath};
use crate::morphology::{
    binarize, complete_mask, is_disconnected, longest_component, otsu_split, otsu_threshold,
    CompletionParams, HISTOGRAM_BINS,
};
use crate::orientation::{detect_orientation, Orientation};
use crate::raster::{BinaryMask, EdgeProbMap, GrayImage, Pixel, Raster, NEIGHBORS_4};

/// Smallest accepted raster side.
pub const MIN_SIDE: usize = 16;

/// Which probability map is multiplied with the completed mask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum FusionSource {
    Out1,
    #[default]
    Out2,
}

impl FusionSource {
    pub fn as_str(self) -> &'static str {
        match self {
            FusionSource::Out1 => "out1",
            FusionSource::Out2 => "out2",
        }
    }
}

impl std::str::FromStr for FusionSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "out1" => Ok(FusionSource::Out1),
            "out2" => Ok(FusionSource::Out2),
            other => Err(Error::Config(format!("unknown fusion source {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PipelineConfig {
    pub fusion_source: FusionSource,
    pub completion: CompletionParams,
    pub graph: GraphConfig,
    /// Replaces the Otsu threshold of the coarse map when set.
    pub threshold_override: Option<f32>,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.threshold_override {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Config(format!("threshold {t} outside [0, 1]")));
            }
        }
        self.completion.validate()?;
        self.graph.validate()
    }
}

/// Pipeline stage names used to label failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Input,
    Orientation,
    Threshold,
    Pruning,
    Completion,
    Fusion,
    Terminals,
    ShortestPath,
    Masks,
    Foreground,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Input => "input",
            Stage::Orientation => "orientation",
            Stage::Threshold => "threshold",
            Stage::Pruning => "pruning",
            Stage::Completion => "completion",
            Stage::Fusion => "fusion",
            Stage::Terminals => "terminals",
            Stage::ShortestPath => "shortest-path",
            Stage::Masks => "masks",
            Stage::Foreground => "foreground",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A failure tagged with the stage that produced it.
#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {error}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub error: Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

/// Key values of one run, in the canonical frame unless noted.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub width: usize,
    pub height: usize,
    pub orientation: Orientation,
    pub fusion_source: FusionSource,
    pub threshold: f32,
    pub threshold_from_otsu: bool,
    pub component_pixels: usize,
    pub left_short: bool,
    pub bottom_short: bool,
    pub short_skeleton: bool,
    pub stroke_width: usize,
    pub completed_pixels: usize,
    pub fill_value: Option<f32>,
    pub start: Pixel,
    pub end: Pixel,
    pub path_len: usize,
    pub path_cost: f64,
    pub pectoral_pixels: usize,
    pub breast_pixels: usize,
}

impl RunReport {
    pub fn completion_applied(&self) -> bool {
        self.left_short || self.bottom_short
    }

    fn completion_label(&self) -> &'static str {
        match (self.left_short, self.bottom_short) {
            (false, false) => "none",
            (true, false) => "left",
            (false, true) => "bottom",
            (true, true) => "both",
        }
    }

    /// Plain-text `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let mut lines = vec![
            format!("width={}", self.width),
            format!("height={}", self.height),
            format!("flip_horizontal={}", self.orientation.flip_horizontal),
            format!("flip_vertical={}", self.orientation.flip_vertical),
            format!("fusion_source={}", self.fusion_source.as_str()),
            format!("threshold={}", self.threshold),
            format!(
                "threshold_source={}",
                if self.threshold_from_otsu {
                    "otsu"
                } else {
                    "override"
                }
            ),
            format!("component_pixels={}", self.component_pixels),
            format!("left_short={}", self.left_short),
            format!("bottom_short={}", self.bottom_short),
            format!("completion={}", self.completion_label()),
            format!("short_skeleton={}", self.short_skeleton),
            format!("stroke_width={}", self.stroke_width),
            format!("completed_pixels={}", self.completed_pixels),
        ];
        if let Some(v) = self.fill_value {
            lines.push(format!("fill_value={v}"));
        }
        lines.extend([
            format!("start={},{}", self.start.row, self.start.col),
            format!("end={},{}", self.end.row, self.end.col),
            format!("path_len={}", self.path_len),
            format!("path_cost={}", self.path_cost),
            format!("pectoral_pixels={}", self.pectoral_pixels),
            format!("breast_pixels={}", self.breast_pixels),
        ]);
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }
}

/// Everything [`segment`] produces, in the input frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    pub boundary: PixelPath,
    pub pectoral_mask: BinaryMask,
    /// Breast foreground without the pectoral region.
    pub breast_mask: BinaryMask,
    pub run_report: RunReport,
}

fn source<'a>(
    out1: &'a EdgeProbMap,
    out2: &'a EdgeProbMap,
    cfg: &PipelineConfig,
) -> &'a EdgeProbMap {
    match cfg.fusion_source {
        FusionSource::Out1 => out1,
        FusionSource::Out2 => out2,
    }
}

/// Element-wise product of `b` with the configured probability map.
pub fn fuse(
    b: &BinaryMask,
    out1: &EdgeProbMap,
    out2: &EdgeProbMap,
    cfg: &PipelineConfig,
) -> Result<EdgeProbMap> {
    b.check_same_shape(out1, "mask vs OUT1")?;
    b.check_same_shape(out2, "mask vs OUT2")?;
    let src = source(out1, out2, cfg);
    let data = b
        .data()
        .iter()
        .zip(src.data())
        .map(|(&bit, &v)| if bit { v } else { 0.0 })
        .collect();
    Raster::from_vec(b.width(), b.height(), data)
}

/// Like [`fuse`], but pixels of `completed` that are not in `original` take
/// the mean source value over `original`, so extrapolated corridors cost
/// about as much as the detected edge. Returns the map and the fill value.
pub fn fuse_completed(
    original: &BinaryMask,
    completed: &BinaryMask,
    out1: &EdgeProbMap,
    out2: &EdgeProbMap,
    cfg: &PipelineConfig,
) -> Result<(EdgeProbMap, f32)> {
    original.check_same_shape(completed, "original vs completed mask")?;
    let mut m = fuse(completed, out1, out2, cfg)?;
    let src = source(out1, out2, cfg);
    let (sum, n) = original
        .data()
        .iter()
        .zip(src.data())
        .filter(|(&bit, _)| bit)
        .fold((0.0f64, 0usize), |(s, n), (_, &v)| (s + v as f64, n + 1));
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    let fill = (sum / n as f64) as f32;
    for (i, (&o, &c)) in original.data().iter().zip(completed.data()).enumerate() {
        if c && !o {
            m.data_mut()[i] = fill;
        }
    }
    Ok((m, fill))
}

/// Drops any loop so the chain visits each pixel once.
fn remove_loops(nodes: Vec<Pixel>) -> Vec<Pixel> {
    let mut out: Vec<Pixel> = Vec::with_capacity(nodes.len());
    let mut at: HashMap<Pixel, usize> = HashMap::new();
    for p in nodes {
        if let Some(&i) = at.get(&p) {
            for q in out.drain(i + 1..) {
                at.remove(&q);
            }
        } else {
            at.insert(p, out.len());
            out.push(p);
        }
    }
    out
}

/// Pixel of `b` on the given border line closest to `from` (row-major ties).
fn nearest_on_border(b: &BinaryMask, from: Pixel, column_zero: bool) -> Option<Pixel> {
    let candidates: Box<dyn Iterator<Item = Pixel>> = if column_zero {
        Box::new((0..b.height()).map(|row| Pixel::new(row, 0)))
    } else {
        let last = b.height() - 1;
        Box::new((0..b.width()).map(move |col| Pixel::new(last, col)))
    };
    candidates.filter(|&p| b.get(p)).min_by(|a, c| {
        from.distance(*a)
            .total_cmp(&from.distance(*c))
            .then(a.cmp(c))
    })
}

/// Extends the `S -> E` path so it starts on column 0 and ends on the last
/// row, following the cheapest routes inside `b`.
pub fn anchor_to_borders(
    m: &EdgeProbMap,
    b: &BinaryMask,
    path: &PixelPath,
    cfg: &GraphConfig,
) -> Result<PixelPath> {
    let (Some(start), Some(end)) = (path.first(), path.last()) else {
        return Err(Error::OpenBoundary);
    };
    let mut nodes = Vec::with_capacity(path.len() + 16);
    if start.col != 0 {
        let anchor = nearest_on_border(b, start, true).ok_or(Error::OpenBoundary)?;
        let lead = shortest_path(m, b, anchor, start, cfg)?;
        nodes.extend_from_slice(&lead.nodes[..lead.nodes.len() - 1]);
    }
    nodes.extend_from_slice(&path.nodes);
    if end.row != b.height() - 1 {
        let anchor = nearest_on_border(b, end, false).ok_or(Error::OpenBoundary)?;
        let tail = shortest_path(m, b, end, anchor, cfg)?;
        nodes.extend_from_slice(&tail.nodes[1..]);
    }
    let nodes = remove_loops(nodes);
    let total_cost = path_cost(m, b, &nodes, cfg);
    Ok(PixelPath { nodes, total_cost })
}

/// Splits the raster along a boundary running from column 0 to the last
/// row (canonical frame).
///
/// The pectoral side is the 4-connected region of non-path pixels holding
/// the lower-left corner, plus the path itself. Returns
/// `(pectoral, breast_region)`, where `breast_region` is the complement.
pub fn mask_from_boundary(
    path: &PixelPath,
    width: usize,
    height: usize,
) -> Result<(BinaryMask, BinaryMask)> {
    if path.nodes.iter().any(|p| p.row >= height || p.col >= width) {
        return Err(Error::Shape("boundary node outside the raster".into()));
    }
    let touches_left = path.nodes.iter().any(|p| p.col == 0);
    let touches_bottom = path.nodes.iter().any(|p| p.row == height - 1);
    if !touches_left || !touches_bottom {
        return Err(Error::OpenBoundary);
    }
    let wall = BinaryMask::from_pixels(width, height, path.nodes.iter().copied());
    let mut pectoral = wall.clone();
    let corner = Pixel::new(height - 1, 0);
    if !wall.get(corner) {
        let mut queue = VecDeque::from([corner]);
        pectoral.set(corner, true);
        while let Some(p) = queue.pop_front() {
            for &(dr, dc) in &NEIGHBORS_4 {
                if let Some(q) = pectoral.offset(p, dr, dc) {
                    if !pectoral.get(q) {
                        pectoral.set(q, true);
                        queue.push_back(q);
                    }
                }
            }
        }
    }
    let breast = pectoral.complement();
    Ok((pectoral, breast))
}

/// Foreground of a mammogram: Otsu on the intensity histogram, largest
/// component, holes filled.
pub fn breast_foreground(image: &GrayImage) -> Result<BinaryMask> {
    let mut hist = [0u64; HISTOGRAM_BINS];
    for &v in image.data() {
        hist[v as usize] += 1;
    }
    let k = otsu_split(&hist)?;
    let raw = image.map(|v| v as usize > k);
    let body = longest_component(&raw)?;
    Ok(fill_holes(&body))
}

/// Background pixels not 4-connected to the raster border become foreground.
pub fn fill_holes(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let mut outside = Raster::filled(w, h, false);
    let mut queue = VecDeque::new();
    for p in mask.pixels() {
        let on_border = p.row == 0 || p.col == 0 || p.row == h - 1 || p.col == w - 1;
        if on_border && !mask.get(p) {
            outside.set(p, true);
            queue.push_back(p);
        }
    }
    while let Some(p) = queue.pop_front() {
        for &(dr, dc) in &NEIGHBORS_4 {
            if let Some(q) = mask.offset(p, dr, dc) {
                if !mask.get(q) && !outside.get(q) {
                    outside.set(q, true);
                    queue.push_back(q);
                }
            }
        }
    }
    outside.complement()
}

fn check_inputs(image: &GrayImage, out1: &EdgeProbMap, out2: &EdgeProbMap) -> Result<()> {
    let (w, h) = image.dims();
    if w < MIN_SIDE || h < MIN_SIDE {
        return Err(Error::TooSmall {
            width: w,
            height: h,
        });
    }
    image.check_same_shape(out1, "image vs OUT1")?;
    image.check_same_shape(out2, "image vs OUT2")?;
    out1.validate_probabilities(crate::io::PROBABILITY_TOLERANCE)?;
    out2.validate_probabilities(crate::io::PROBABILITY_TOLERANCE)
}

/// Runs the full reconstruction on one image and its two probability maps.
pub fn segment(
    image: &GrayImage,
    out1: &EdgeProbMap,
    out2: &EdgeProbMap,
    cfg: &PipelineConfig,
) -> std::result::Result<SegmentationResult, StageError> {
    cfg.validate().at(Stage::Input)?;
    check_inputs(image, out1, out2).at(Stage::Input)?;
    let (w, h) = image.dims();

    let orientation = detect_orientation(image).at(Stage::Orientation)?;
    let image_c = orientation.apply(image);
    let out1_c = orientation.apply(out1);
    let out2_c = orientation.apply(out2);

    let (threshold, from_otsu) = match cfg.threshold_override {
        Some(t) => (t, false),
        None => (otsu_threshold(&out2_c).at(Stage::Threshold)?, true),
    };
    let coarse = binarize(&out2_c, threshold);
    let component = longest_component(&coarse).at(Stage::Pruning)?;
    let (left_short, bottom_short) = is_disconnected(&component);
    debug!(
        "threshold={threshold} component={} left_short={left_short} bottom_short={bottom_short}",
        component.count()
    );

    let completion = complete_mask(&component, &cfg.completion).at(Stage::Completion)?;
    let b = completion.mask.clone();
    let (m, fill_value) = if completion.extended() {
        let (m, fill) = fuse_completed(&component, &b, &out1_c, &out2_c, cfg).at(Stage::Fusion)?;
        (m, Some(fill))
    } else {
        (fuse(&b, &out1_c, &out2_c, cfg).at(Stage::Fusion)?, None)
    };

    let (start, end) = select_terminals(&b).at(Stage::Terminals)?;
    let core = shortest_path(&m, &b, start, end, &cfg.graph).at(Stage::ShortestPath)?;
    let path = anchor_to_borders(&m, &b, &core, &cfg.graph).at(Stage::ShortestPath)?;

    let (pectoral_c, _) = mask_from_boundary(&path, w, h).at(Stage::Masks)?;
    let foreground = breast_foreground(&image_c).at(Stage::Foreground)?;
    let breast_c = foreground.difference(&pectoral_c);

    let run_report = RunReport {
        width: w,
        height: h,
        orientation,
        fusion_source: cfg.fusion_source,
        threshold,
        threshold_from_otsu: from_otsu,
        component_pixels: component.count(),
        left_short,
        bottom_short,
        short_skeleton: completion.short_skeleton,
        stroke_width: completion.stroke_width,
        completed_pixels: b.count() - component.count(),
        fill_value,
        start,
        end,
        path_len: path.len(),
        path_cost: path.total_cost,
        pectoral_pixels: pectoral_c.count(),
        breast_pixels: breast_c.count(),
    };

    let boundary = PixelPath {
        nodes: path
            .nodes
            .iter()
            .map(|&p| orientation.map_pixel(p, w, h))
            .collect(),
        total_cost: path.total_cost,
    };
    Ok(SegmentationResult {
        boundary,
        pectoral_mask: orientation.apply(&pectoral_c),
        breast_mask: orientation.apply(&breast_c),
        run_report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path_of(nodes: &[(usize, usize)]) -> PixelPath {
        PixelPath {
            nodes: nodes.iter().map(|&(r, c)| Pixel::new(r, c)).collect(),
            total_cost: 0.0,
        }
    }

    #[test]
    fn fuse_with_full_and_empty_masks() {
        let out2 = Raster::from_fn(4, 4, |p| (p.row * 4 + p.col) as f32 / 16.0);
        let out1 = Raster::filled(4, 4, 0.25f32);
        let cfg = PipelineConfig::default();
        assert_eq!(
            fuse(&Raster::filled(4, 4, true), &out1, &out2, &cfg).unwrap(),
            out2
        );
        let zero = fuse(&Raster::filled(4, 4, false), &out1, &out2, &cfg).unwrap();
        assert!(zero.data().iter().all(|&v| v == 0.0));
        let cfg1 = PipelineConfig {
            fusion_source: FusionSource::Out1,
            ..cfg
        };
        assert_eq!(
            fuse(&Raster::filled(4, 4, true), &out1, &out2, &cfg1).unwrap(),
            out1
        );
        assert!(matches!(
            fuse(&Raster::filled(3, 4, true), &out1, &out2, &cfg),
            Err(Error::Shape(_))
        ));
    }

    proptest! {
        #[test]
        fn fuse_is_pointwise(bits in proptest::collection::vec(any::<bool>(), 36),
                             vals in proptest::collection::vec(0.0f32..=1.0, 36)) {
            let b = Raster::from_vec(6, 6, bits).unwrap();
            let out2 = Raster::from_vec(6, 6, vals).unwrap();
            let m = fuse(&b, &out2, &out2, &PipelineConfig::default()).unwrap();
            for p in b.pixels() {
                let expected = if b.get(p) { out2.get(p) } else { 0.0 };
                prop_assert_eq!(m.get(p).to_bits(), expected.to_bits());
            }
        }
    }

    #[test]
    fn completed_pixels_take_the_component_mean() {
        let original = Raster::from_vec(3, 1, vec![true, true, false]).unwrap();
        let completed = Raster::filled(3, 1, true);
        let out2 = Raster::from_vec(3, 1, vec![0.2f32, 0.6, 0.0]).unwrap();
        let (m, fill) = fuse_completed(
            &original,
            &completed,
            &out2,
            &out2,
            &PipelineConfig::default(),
        )
        .unwrap();
        assert!((fill - 0.4).abs() < 1e-7);
        assert_eq!(m.data()[0], 0.2);
        assert_eq!(m.data()[2], fill);
    }

    #[test]
    fn diagonal_splits_a_4x4_raster() {
        let path = path_of(&[(0, 0), (1, 1), (2, 2), (3, 3)]);
        let (pect, breast) = mask_from_boundary(&path, 4, 4).unwrap();
        assert_eq!(pect.count(), 10);
        assert_eq!(breast.count(), 6);
        assert!(pect.pixels().all(|p| pect.get(p) == (p.row >= p.col)));
    }

    #[test]
    fn border_hugging_path_is_its_own_pectoral_region() {
        let mut nodes: Vec<(usize, usize)> = (0..5).map(|r| (r, 0)).collect();
        nodes.extend((1..5).map(|c| (4, c)));
        let path = path_of(&nodes);
        let (pect, breast) = mask_from_boundary(&path, 5, 5).unwrap();
        assert_eq!(pect.count(), 9);
        assert_eq!(breast.count(), 16);
        assert!(breast
            .pixels()
            .all(|p| breast.get(p) == (p.row < 4 && p.col > 0)));
    }

    #[test]
    fn open_boundary_is_rejected() {
        let path = path_of(&[(0, 1), (1, 2), (2, 3)]);
        assert!(matches!(
            mask_from_boundary(&path, 4, 4),
            Err(Error::OpenBoundary)
        ));
    }

    /// Region of pixels on or below a monotone staircase path: brute-force
    /// scan, no flood fill involved.
    fn below_oracle(path: &PixelPath, w: usize, h: usize) -> BinaryMask {
        Raster::from_fn(w, h, |p| {
            path.nodes.contains(&p)
                || path
                    .nodes
                    .iter()
                    .filter(|n| n.col == p.col)
                    .all(|n| n.row < p.row)
                    && path.nodes.iter().any(|n| n.col == p.col)
        })
    }

    proptest! {
        #[test]
        fn monotone_path_fill_matches_column_scan(
            start_row in 0usize..12, moves in proptest::collection::vec(0u8..3, 40)
        ) {
            // 4-connected monotone staircase from column 0 to the last row
            let (w, h) = (12usize, 12usize);
            let mut p = Pixel::new(start_row, 0);
            let mut nodes = vec![p];
            for m in moves {
                if p.row == h - 1 { break; }
                p = match m {
                    0 if p.col + 1 < w => Pixel::new(p.row, p.col + 1),
                    _ => Pixel::new(p.row + 1, p.col),
                };
                nodes.push(p);
            }
            while p.row < h - 1 {
                p = Pixel::new(p.row + 1, p.col);
                nodes.push(p);
            }
            let path = PixelPath { nodes, total_cost: 0.0 };
            let (pect, breast) = mask_from_boundary(&path, w, h).unwrap();
            let mut oracle = below_oracle(&path, w, h);
            // columns right of the path's last column lie entirely on the breast side
            let last_col = path.last().unwrap().col;
            for q in oracle.clone().pixels() {
                if q.col > last_col { oracle.set(q, false); }
            }
            prop_assert_eq!(&pect, &oracle);
            prop_assert_eq!(pect.intersection(&breast).count(), 0);
            prop_assert_eq!(pect.union(&breast).count(), w * h);
        }
    }

    #[test]
    fn foreground_of_a_disc_with_a_hole() {
        let img = Raster::from_fn(40, 40, |p| {
            let d = Pixel::new(20, 20).distance(p);
            if d < 4.0 {
                0
            } else if d < 15.0 {
                90
            } else {
                0
            }
        });
        let fg = breast_foreground(&img).unwrap();
        assert!(fg.get(Pixel::new(20, 20)));
        assert_eq!(
            fg.count(),
            img.pixels()
                .filter(|&p| Pixel::new(20, 20).distance(p) < 15.0)
                .count()
        );
        assert!(matches!(
            breast_foreground(&Raster::filled(20, 20, 0u8)),
            Err(Error::DegenerateHistogram)
        ));
    }

    #[test]
    fn loops_are_cut() {
        let a = Pixel::new(0, 0);
        let b = Pixel::new(0, 1);
        let c = Pixel::new(1, 1);
        let d = Pixel::new(1, 2);
        assert_eq!(remove_loops(vec![a, b, c, b, d]), vec![a, b, d]);
    }

    #[test]
    fn threshold_override_is_validated() {
        let cfg = PipelineConfig {
            threshold_override: Some(1.5),
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn tiny_inputs_are_rejected() {
        let img = Raster::filled(8, 8, 0u8);
        let map = Raster::filled(8, 8, 0.0f32);
        let err = segment(&img, &map, &map, &PipelineConfig::default()).unwrap_err();
        assert_eq!(err.stage, Stage::Input);
        assert!(matches!(err.error, Error::TooSmall { .. }));
    }

    #[test]
    fn report_renders_key_values() {
        let r = RunReport {
            width: 16,
            height: 16,
            orientation: Orientation::IDENTITY,
            fusion_source: FusionSource::Out2,
            threshold: 0.5,
            threshold_from_otsu: true,
            component_pixels: 10,
            left_short: false,
            bottom_short: false,
            short_skeleton: false,
            stroke_width: 0,
            completed_pixels: 0,
            fill_value: None,
            start: Pixel::new(3, 0),
            end: Pixel::new(15, 4),
            path_len: 14,
            path_cost: 14.5,
            pectoral_pixels: 30,
            breast_pixels: 100,
        };
        let text = r.to_key_values();
        assert!(text.contains("completion=none\n"));
        assert!(text.contains("threshold_source=otsu\n"));
        assert!(text.contains("start=3,0\n"));
        assert!(!text.contains("fill_value"));
    }
}
