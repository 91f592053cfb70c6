//! Binarization, component pruning, thinning and linear edge completion of
//! the coarse edge mask.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, EdgeProbMap, Pixel, Raster, NEIGHBORS_8};

/// Number of histogram bins used by [`otsu_threshold`].
pub const HISTOGRAM_BINS: usize = 256;

/// Histogram bin of a probability: bin `k` holds `(k/256, (k+1)/256]`, and
/// bin 0 also holds 0.
///
/// With this layout "bin <= k" is exactly "value <= (k+1)/256", matching the
/// strict `value > threshold` rule of [`binarize`].
pub fn probability_bin(value: f32) -> usize {
    let scaled = (value as f64 * HISTOGRAM_BINS as f64).ceil() as i64 - 1;
    scaled.clamp(0, HISTOGRAM_BINS as i64 - 1) as usize
}

/// Otsu split of a 256-bin histogram, using bin indices as levels.
///
/// Returns the last bin `k` of the lower class (`0..=k`). Between-class
/// variances are compared exactly in integer arithmetic; equal variances
/// keep the lower split.
pub fn otsu_split(hist: &[u64; HISTOGRAM_BINS]) -> Result<usize> {
    let occupied = hist.iter().filter(|&&h| h > 0).count();
    if occupied < 2 {
        return Err(Error::DegenerateHistogram);
    }
    let total: i128 = hist.iter().map(|&h| h as i128).sum();
    let total_sum: i128 = hist
        .iter()
        .enumerate()
        .map(|(i, &h)| i as i128 * h as i128)
        .sum();

    // sigma_b^2 * total^2 = (w1*s0 - w0*s1)^2 / (w0*w1); kept as a fraction.
    let mut best: Option<(usize, i128, i128)> = None;
    let (mut w0, mut s0) = (0i128, 0i128);
    for (k, &h) in hist.iter().enumerate().take(HISTOGRAM_BINS - 1) {
        w0 += h as i128;
        s0 += k as i128 * h as i128;
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let s1 = total_sum - s0;
        let diff = w1 * s0 - w0 * s1;
        let num = diff * diff;
        let den = w0 * w1;
        let better = match best {
            None => true,
            Some((_, bn, bd)) => num * bd > bn * den,
        };
        if better {
            best = Some((k, num, den));
        }
    }
    best.map(|(k, _, _)| k).ok_or(Error::DegenerateHistogram)
}

/// Otsu threshold of a probability map over a 256-bin histogram.
///
/// The result is the upper edge `(k+1)/256` of the last lower-class bin, so
/// `binarize(map, t)` reproduces the histogram partition exactly.
pub fn otsu_threshold(map: &EdgeProbMap) -> Result<f32> {
    let mut hist = [0u64; HISTOGRAM_BINS];
    for &v in map.data() {
        hist[probability_bin(v)] += 1;
    }
    let k = otsu_split(&hist)?;
    Ok((k + 1) as f32 / HISTOGRAM_BINS as f32)
}

/// Pixel is set iff its value is strictly above `threshold`.
pub fn binarize(map: &EdgeProbMap, threshold: f32) -> BinaryMask {
    map.map(|v| v > threshold)
}

/// 8-connected component labels of a mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentLabeling {
    /// 0 for background, otherwise `1..=component_count`.
    pub labels: Raster<u32>,
    /// `component_sizes[id - 1]` is the pixel count of component `id`.
    pub component_sizes: Vec<usize>,
}

impl ComponentLabeling {
    pub fn component_count(&self) -> usize {
        self.component_sizes.len()
    }

    pub fn mask_of(&self, id: u32) -> BinaryMask {
        self.labels.map(|l| l == id)
    }
}

/// Labels 8-connected components. Ids follow the row-major order of each
/// component's first pixel.
pub fn label_components(mask: &BinaryMask) -> ComponentLabeling {
    let mut labels = Raster::filled(mask.width(), mask.height(), 0u32);
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..mask.len() {
        if !mask.data()[start] || labels.data()[start] != 0 {
            continue;
        }
        let id = sizes.len() as u32 + 1;
        let mut size = 0;
        labels.data_mut()[start] = id;
        queue.push_back(mask.pixel_at(start));
        while let Some(p) = queue.pop_front() {
            size += 1;
            for q in mask.neighbors8(p) {
                if mask.get(q) && labels.get(q) == 0 {
                    labels.set(q, id);
                    queue.push_back(q);
                }
            }
        }
        sizes.push(size);
    }
    ComponentLabeling {
        labels,
        component_sizes: sizes,
    }
}

/// Keeps the 8-connected component with the most pixels. Equal sizes resolve
/// to the component whose first pixel comes first in row-major order.
pub fn longest_component(mask: &BinaryMask) -> Result<BinaryMask> {
    let labeling = label_components(mask);
    let mut best: Option<(usize, usize)> = None;
    for (i, &size) in labeling.component_sizes.iter().enumerate() {
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((i, size));
        }
    }
    let (index, _) = best.ok_or(Error::EmptyMask)?;
    Ok(labeling.mask_of(index as u32 + 1))
}

/// A one-pixel-wide skeleton and its endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonInfo {
    pub skeleton: BinaryMask,
    /// Pixels with exactly one 8-neighbour in the skeleton, row-major.
    pub endpoints: Vec<Pixel>,
}

impl SkeletonInfo {
    pub fn len(&self) -> usize {
        self.skeleton.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

// Neighbourhood bits, counter-clockwise from east:
// x[0]=E, x[1]=NE, x[2]=N, x[3]=NW, x[4]=W, x[5]=SW, x[6]=S, x[7]=SE.
const RING: [(isize, isize); 8] = [
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
];

fn ring(mask: &BinaryMask, p: Pixel) -> [bool; 8] {
    let mut x = [false; 8];
    for (bit, &(dr, dc)) in x.iter_mut().zip(RING.iter()) {
        *bit = mask.offset(p, dr, dc).is_some_and(|q| mask.get(q));
    }
    x
}

fn neighbor_count(x: &[bool; 8]) -> usize {
    x.iter().filter(|&&b| b).count()
}

/// Yokoi connectivity number for 8-connected foreground. A pixel is simple
/// (removable without changing topology) iff this equals 1.
fn connectivity_number(x: &[bool; 8]) -> usize {
    let nx = |i: usize| !x[i % 8] as usize;
    (0..4)
        .map(|j| {
            let k = 2 * j;
            nx(k) - nx(k) * nx(k + 1) * nx(k + 2)
        })
        .sum()
}

/// 0-to-1 transitions around the ring, starting at north (Zhang-Suen `A`).
fn transitions(x: &[bool; 8]) -> usize {
    // clockwise from N: N, NE, E, SE, S, SW, W, NW
    let cw = [x[2], x[1], x[0], x[7], x[6], x[5], x[4], x[3]];
    (0..8).filter(|&i| !cw[i] && cw[(i + 1) % 8]).count()
}

fn zhang_suen_candidate(x: &[bool; 8], first: bool) -> bool {
    let b = neighbor_count(x);
    if !(2..=6).contains(&b) || transitions(x) != 1 {
        return false;
    }
    let (n, e, s, w) = (x[2], x[0], x[6], x[4]);
    if first {
        !(n && e && s) && !(e && s && w)
    } else {
        !(n && e && w) && !(n && s && w)
    }
}

fn removable(mask: &BinaryMask, p: Pixel) -> bool {
    let x = ring(mask, p);
    neighbor_count(&x) >= 2 && connectivity_number(&x) == 1
}

/// Zhang-Suen sub-iterations; flagged pixels are re-checked for simplicity
/// before each deletion, so small blocks never vanish entirely.
fn thin(mask: &mut BinaryMask) {
    let mut active: Vec<Pixel> = mask.true_pixels().collect();
    loop {
        let mut changed = false;
        for first in [true, false] {
            let flagged: Vec<Pixel> = active
                .iter()
                .copied()
                .filter(|&p| mask.get(p) && zhang_suen_candidate(&ring(mask, p), first))
                .collect();
            for p in flagged {
                if removable(mask, p) {
                    mask.set(p, false);
                    changed = true;
                }
            }
        }
        active.retain(|&p| mask.get(p));
        if !changed {
            break;
        }
    }
}

/// Removes simple non-end pixels left after thinning (staircase corners and
/// residual 2x2 blocks).
fn remove_redundant(mask: &mut BinaryMask) {
    loop {
        let mut changed = false;
        let pixels: Vec<Pixel> = mask.true_pixels().collect();
        for p in pixels {
            if removable(mask, p) {
                mask.set(p, false);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

fn skeleton_degree(mask: &BinaryMask, p: Pixel) -> usize {
    mask.neighbors8(p).filter(|&q| mask.get(q)).count()
}

pub(crate) fn endpoints_of(skeleton: &BinaryMask) -> Vec<Pixel> {
    skeleton
        .true_pixels()
        .filter(|&p| skeleton_degree(skeleton, p) == 1)
        .collect()
}

/// Follows degree-2 pixels from an endpoint. Returns the branch pixels
/// (endpoint first) if it ends at a junction, `None` if it reaches another
/// endpoint.
fn spur_from(skeleton: &BinaryMask, end: Pixel) -> Option<Vec<Pixel>> {
    let mut branch = vec![end];
    let mut prev = end;
    let mut cur = skeleton.neighbors8(end).find(|&q| skeleton.get(q))?;
    loop {
        let next: Vec<Pixel> = skeleton
            .neighbors8(cur)
            .filter(|&q| skeleton.get(q) && q != prev)
            .collect();
        match next.len() {
            0 => return None,
            1 if !branch.contains(&next[0]) => {
                branch.push(cur);
                prev = cur;
                cur = next[0];
            }
            1 => return None,
            _ => return Some(branch),
        }
    }
}

/// Drops side branches no longer than `max_len` pixels, shortest first,
/// while more than two endpoints remain.
fn prune_spurs(skeleton: &mut BinaryMask, max_len: usize) {
    loop {
        let ends = endpoints_of(skeleton);
        if ends.len() <= 2 {
            return;
        }
        let shortest = ends
            .iter()
            .filter_map(|&e| spur_from(skeleton, e))
            .filter(|b| b.len() <= max_len)
            .min_by_key(|b| (b.len(), b[0]));
        let Some(branch) = shortest else {
            return;
        };
        for p in branch {
            skeleton.set(p, false);
        }
        remove_redundant(skeleton);
    }
}

/// Thins a mask to a one-pixel-wide skeleton.
///
/// Zhang-Suen thinning runs until stable, followed by removal of redundant
/// simple pixels and pruning of spurs no longer than the mean stroke
/// thickness (area divided by skeleton length, at least 3 pixels).
pub fn skeletonize(mask: &BinaryMask) -> Result<SkeletonInfo> {
    let area = mask.count();
    if area == 0 {
        return Err(Error::EmptyMask);
    }
    let mut skeleton = mask.clone();
    thin(&mut skeleton);
    remove_redundant(&mut skeleton);
    let length = skeleton.count().max(1);
    let spur_limit = area.div_ceil(length).max(3);
    prune_spurs(&mut skeleton, spur_limit);
    let endpoints = endpoints_of(&skeleton);
    Ok(SkeletonInfo {
        skeleton,
        endpoints,
    })
}

/// `(left_short, right_short)`: whether the mask misses column 0 and the
/// last row respectively. Expects the canonical (pectoral lower-left) frame.
pub fn is_disconnected(mask: &BinaryMask) -> (bool, bool) {
    let (w, h) = mask.dims();
    let touches_left = (0..h).any(|row| mask.get(Pixel { row, col: 0 }));
    let touches_bottom = (0..w).any(|col| mask.get(Pixel { row: h - 1, col }));
    (!touches_left, !touches_bottom)
}

/// Parameters of the linear edge completion.
///
/// The completing line is a least-squares fit to the skeleton pixels within
/// `arc_distance` of the loose end. It is drawn with a stroke as wide as
/// the component's average thickness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletionParams {
    /// Arc length, in pixels, of the skeleton stretch used for the fit.
    pub arc_distance: u32,
}

impl Default for CompletionParams {
    fn default() -> Self {
        CompletionParams { arc_distance: 25 }
    }
}

impl CompletionParams {
    pub fn validate(&self) -> Result<()> {
        if self.arc_distance < 2 {
            return Err(Error::Config(format!(
                "arc distance {} is below 2",
                self.arc_distance
            )));
        }
        Ok(())
    }
}

/// A fitted line through `centroid` along the unit vector `direction`,
/// both in `(row, col)` order. `direction` points away from the mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub centroid: (f64, f64),
    pub direction: (f64, f64),
    /// Number of skeleton pixels the fit used.
    pub samples: usize,
}

impl LineFit {
    /// Rows gained per column along the line; infinite for vertical lines.
    pub fn slope(&self) -> f64 {
        self.direction.0 / self.direction.1
    }
}

/// Output of [`complete_mask`].
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub mask: BinaryMask,
    pub left: Option<LineFit>,
    pub bottom: Option<LineFit>,
    /// Set when the skeleton was shorter than the arc distance and the fit
    /// used the whole skeleton.
    pub short_skeleton: bool,
    pub stroke_width: usize,
}

impl Completion {
    pub fn extended(&self) -> bool {
        self.left.is_some() || self.bottom.is_some()
    }

    /// Pixels added by the completion.
    pub fn added(&self, original: &BinaryMask) -> BinaryMask {
        self.mask.difference(original)
    }
}

/// Geodesic route through the skeleton from `from` to `to` (axial steps
/// cost 1, diagonal steps sqrt 2), with cumulative arc length per pixel.
fn skeleton_route(skeleton: &BinaryMask, from: Pixel, to: Pixel) -> Vec<(Pixel, f64)> {
    #[derive(PartialEq)]
    struct Item(f64, usize);
    impl Eq for Item {}
    impl Ord for Item {
        fn cmp(&self, other: &Self) -> Ordering {
            other
                .0
                .total_cmp(&self.0)
                .then_with(|| other.1.cmp(&self.1))
        }
    }
    impl PartialOrd for Item {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }

    let n = skeleton.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let start = skeleton.index(from);
    let goal = skeleton.index(to);
    dist[start] = 0.0;
    let mut heap = BinaryHeap::from([Item(0.0, start)]);
    while let Some(Item(d, i)) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        if i == goal {
            break;
        }
        let p = skeleton.pixel_at(i);
        for &(dr, dc) in &NEIGHBORS_8 {
            let Some(q) = skeleton.offset(p, dr, dc) else {
                continue;
            };
            if !skeleton.get(q) {
                continue;
            }
            let step = if dr != 0 && dc != 0 {
                std::f64::consts::SQRT_2
            } else {
                1.0
            };
            let j = skeleton.index(q);
            if d + step < dist[j] {
                dist[j] = d + step;
                parent[j] = i;
                heap.push(Item(d + step, j));
            }
        }
    }
    let mut route = Vec::new();
    let mut i = goal;
    if dist[goal].is_infinite() {
        return vec![(from, 0.0)];
    }
    while i != usize::MAX {
        route.push((skeleton.pixel_at(i), dist[i]));
        i = parent[i];
    }
    route.reverse();
    route
}

/// Total least-squares line through the points, oriented so that it points
/// from the centroid toward `tip`.
fn fit_line(points: &[Pixel], tip: Pixel) -> Option<LineFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mr = points.iter().map(|p| p.row as f64).sum::<f64>() / n;
    let mc = points.iter().map(|p| p.col as f64).sum::<f64>() / n;
    let (mut srr, mut scc, mut src) = (0.0, 0.0, 0.0);
    for p in points {
        let dr = p.row as f64 - mr;
        let dc = p.col as f64 - mc;
        srr += dr * dr;
        scc += dc * dc;
        src += dr * dc;
    }
    if srr + scc == 0.0 {
        return None;
    }
    let theta = 0.5 * (2.0 * src).atan2(scc - srr);
    let (mut dr, mut dc) = (theta.sin(), theta.cos());
    let (tr, tc) = (tip.row as f64 - mr, tip.col as f64 - mc);
    if dr * tr + dc * tc < 0.0 {
        dr = -dr;
        dc = -dc;
    }
    Some(LineFit {
        centroid: (mr, mc),
        direction: (dr, dc),
        samples: points.len(),
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Left,
    Bottom,
}

impl Side {
    fn name(self) -> &'static str {
        match self {
            Side::Left => "left (column 0)",
            Side::Bottom => "bottom (last row)",
        }
    }
}

fn stamp_disc(mask: &mut BinaryMask, center: (f64, f64), radius: f64) {
    let (cr, cc) = (center.0.round() as isize, center.1.round() as isize);
    let reach = radius.floor() as isize;
    for dr in -reach..=reach {
        for dc in -reach..=reach {
            if ((dr * dr + dc * dc) as f64) > radius * radius + 1e-9 {
                continue;
            }
            let (row, col) = (cr + dr, cc + dc);
            if row >= 0
                && col >= 0
                && (row as usize) < mask.height()
                && (col as usize) < mask.width()
            {
                mask.set(Pixel::new(row as usize, col as usize), true);
            }
        }
    }
}

const STEP: f64 = 0.25;

/// Draws the stroke from `tip` along the fitted line until the rounded
/// position reaches the required border.
fn extend(
    mask: &mut BinaryMask,
    tip: Pixel,
    fit: &LineFit,
    side: Side,
    stroke_width: usize,
) -> Result<()> {
    let (h, w) = (mask.height() as f64, mask.width() as f64);
    let (dr, dc) = fit.direction;
    let heading_ok = match side {
        Side::Left => dc < -1e-9,
        Side::Bottom => dr > 1e-9,
    };
    if !heading_ok {
        return Err(Error::ExtrapolationDiverged(side.name()));
    }
    let radius = (stroke_width as f64 - 1.0) / 2.0;
    let tip_f = (tip.row as f64, tip.col as f64);
    // Projection of the tip onto the fitted line.
    let t0 = (tip_f.0 - fit.centroid.0) * dr + (tip_f.1 - fit.centroid.1) * dc;
    let foot = (fit.centroid.0 + t0 * dr, fit.centroid.1 + t0 * dc);

    let gap = ((foot.0 - tip_f.0).powi(2) + (foot.1 - tip_f.1).powi(2)).sqrt();
    let gap_steps = (gap / STEP).ceil() as usize;
    for i in 0..=gap_steps {
        let f = if gap_steps == 0 {
            1.0
        } else {
            i as f64 / gap_steps as f64
        };
        let pos = (
            tip_f.0 + (foot.0 - tip_f.0) * f,
            tip_f.1 + (foot.1 - tip_f.1) * f,
        );
        stamp_disc(mask, pos, radius);
    }

    let max_steps = ((h + w) * 4.0 / STEP) as usize;
    for i in 0..=max_steps {
        let t = i as f64 * STEP;
        let pos = (foot.0 + t * dr, foot.1 + t * dc);
        let (row, col) = (pos.0.round(), pos.1.round());
        if row < 0.0 || col < 0.0 || row > h - 1.0 || col > w - 1.0 {
            return Err(Error::ExtrapolationDiverged(side.name()));
        }
        stamp_disc(mask, pos, radius);
        let reached = match side {
            Side::Left => col == 0.0,
            Side::Bottom => row == h - 1.0,
        };
        if reached {
            return Ok(());
        }
    }
    Err(Error::ExtrapolationDiverged(side.name()))
}

/// Extends a partial edge to column 0 and/or the last row by linear
/// extrapolation of its skeleton.
///
/// For each short side, the skeleton is walked from the loose endpoint for
/// `arc_distance` pixels of arc length. A line is fitted to the walked
/// pixels and drawn outward from the endpoint to the border with a stroke
/// `round(area / skeleton length)` pixels wide (at least 1). The left end
/// is the endpoint with the smaller column. An already complete mask is
/// returned unchanged.
pub fn complete_mask(mask: &BinaryMask, params: &CompletionParams) -> Result<Completion> {
    params.validate()?;
    let (left_short, bottom_short) = is_disconnected(mask);
    if !left_short && !bottom_short {
        return Ok(Completion {
            mask: mask.clone(),
            left: None,
            bottom: None,
            short_skeleton: false,
            stroke_width: 0,
        });
    }
    let skel = skeletonize(mask)?;
    if skel.endpoints.len() != 2 {
        return Err(Error::AmbiguousSkeleton(skel.endpoints.len()));
    }
    let (left_end, bottom_end) = order_endpoints(skel.endpoints[0], skel.endpoints[1]);
    let area = mask.count();
    let stroke_width = ((area as f64 / skel.len() as f64).round() as usize).max(1);
    let arc = params.arc_distance as f64;

    let mut out = mask.clone();
    let mut short_skeleton = false;
    let mut fits = [None, None];
    for (slot, (side, tip, other)) in [
        (Side::Left, left_end, bottom_end),
        (Side::Bottom, bottom_end, left_end),
    ]
    .into_iter()
    .enumerate()
    {
        let needed = match side {
            Side::Left => left_short,
            Side::Bottom => bottom_short,
        };
        if !needed {
            continue;
        }
        let route = skeleton_route(&skel.skeleton, tip, other);
        let total = route.last().map_or(0.0, |&(_, d)| d);
        if total < arc {
            short_skeleton = true;
        }
        let cut = route
            .iter()
            .position(|&(_, d)| d >= arc)
            .unwrap_or(route.len() - 1);
        let walked: Vec<Pixel> = route[..=cut].iter().map(|&(p, _)| p).collect();
        let fit = fit_line(&walked, tip).ok_or(Error::ExtrapolationDiverged(side.name()))?;
        extend(&mut out, tip, &fit, side, stroke_width)?;
        fits[slot] = Some(fit);
    }
    Ok(Completion {
        mask: out,
        left: fits[0],
        bottom: fits[1],
        short_skeleton,
        stroke_width,
    })
}

/// `(left, bottom)`: the endpoint with the smaller column (then smaller row)
/// comes first.
pub(crate) fn order_endpoints(a: Pixel, b: Pixel) -> (Pixel, Pixel) {
    if (a.col, a.row) <= (b.col, b.row) {
        (a, b)
    } else {
        (b, a)
    }
}
