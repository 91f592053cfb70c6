//! Minimal-path boundary extraction on the implicit pixel graph.
//!
//! Nodes are pixels; each pixel of the mask `B` is joined to its 8-neighbours
//! in `B` with weight `2 / (M(p) + M(q) + epsilon)`, so paths through high
//! edge probability are cheap. Everything outside `B` is unreachable.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::morphology::{order_endpoints, skeletonize};
use crate::raster::{BinaryMask, EdgeProbMap, Pixel, NEIGHBORS_8};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphConfig {
    /// Added to every weight denominator so zero-probability pixels stay
    /// finite (but very expensive).
    pub epsilon: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig { epsilon: 1e-6 }
    }
}

impl GraphConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon > 0.0 && self.epsilon.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )))
        }
    }
}

/// An 8-connected pixel path with its accumulated weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelPath {
    pub nodes: Vec<Pixel>,
    pub total_cost: f64,
}

impl PixelPath {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> Option<Pixel> {
        self.nodes.first().copied()
    }

    pub fn last(&self) -> Option<Pixel> {
        self.nodes.last().copied()
    }

    /// Consecutive nodes are 8-neighbours and no node repeats.
    pub fn is_simple_chain(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.nodes.len());
        self.nodes.windows(2).all(|w| w[0].is_neighbor(w[1]))
            && self.nodes.iter().all(|p| seen.insert(*p))
    }
}

/// Weight of the graph edge `p -> q`; infinite unless `q` is an
/// 8-neighbour of `p` and both lie in `B`.
pub fn edge_weight(m: &EdgeProbMap, b: &BinaryMask, p: Pixel, q: Pixel, cfg: &GraphConfig) -> f64 {
    if !b.contains(p) || !b.contains(q) || !p.is_neighbor(q) || !b.get(p) || !b.get(q) {
        return f64::INFINITY;
    }
    2.0 / (m.get(p) as f64 + m.get(q) as f64 + cfg.epsilon)
}

/// Sum of [`edge_weight`] over consecutive nodes.
pub fn path_cost(m: &EdgeProbMap, b: &BinaryMask, nodes: &[Pixel], cfg: &GraphConfig) -> f64 {
    nodes
        .windows(2)
        .map(|w| edge_weight(m, b, w[0], w[1], cfg))
        .sum()
}

/// Start and end nodes: the two skeleton endpoints of `B`, the one with the
/// smaller column (the column-0 side) first.
pub fn select_terminals(b: &BinaryMask) -> Result<(Pixel, Pixel)> {
    let skel = skeletonize(b)?;
    match skel.endpoints.as_slice() {
        &[a, c] => Ok(order_endpoints(a, c)),
        other => Err(Error::AmbiguousSkeleton(other.len())),
    }
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    index: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // BinaryHeap is a max-heap: reverse so the smallest distance, then the
    // smallest row-major index, pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NIL: usize = usize::MAX;

/// Globally cheapest `S -> E` path restricted to `B`.
///
/// Dijkstra with a binary heap; the search never leaves `B` and stops once
/// `E` is settled, after which the path is rebuilt by following parents
/// back from `E`. When two relaxations reach a node at the same distance the
/// parent with the smaller `(row, col)` wins, so output is deterministic.
pub fn shortest_path(
    m: &EdgeProbMap,
    b: &BinaryMask,
    start: Pixel,
    end: Pixel,
    cfg: &GraphConfig,
) -> Result<PixelPath> {
    m.check_same_shape(b, "edge map vs mask")?;
    cfg.validate()?;
    let no_path = Error::NoPath {
        from: (start.row, start.col),
        to: (end.row, end.col),
    };
    if !b.contains(start) || !b.contains(end) || !b.get(start) || !b.get(end) {
        return Err(no_path);
    }

    let n = b.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![NIL; n];
    let mut settled = vec![false; n];
    let s = b.index(start);
    let e = b.index(end);
    dist[s] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry {
        dist: 0.0,
        index: s,
    });

    while let Some(Entry { dist: d, index: u }) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if u == e {
            break;
        }
        let pu = b.pixel_at(u);
        let mu = m.data()[u] as f64;
        for &(dr, dc) in &NEIGHBORS_8 {
            let Some(q) = b.offset(pu, dr, dc) else {
                continue;
            };
            let v = b.index(q);
            if !b.data()[v] || settled[v] {
                continue;
            }
            let candidate = d + 2.0 / (mu + m.data()[v] as f64 + cfg.epsilon);
            if candidate < dist[v] {
                dist[v] = candidate;
                parent[v] = u;
                heap.push(Entry {
                    dist: candidate,
                    index: v,
                });
            } else if candidate == dist[v] && u < parent[v] {
                parent[v] = u;
            }
        }
    }

    if !settled[e] {
        return Err(no_path);
    }
    let mut nodes = Vec::new();
    let mut i = e;
    while i != NIL {
        nodes.push(b.pixel_at(i));
        if i == s {
            break;
        }
        i = parent[i];
    }
    nodes.reverse();
    Ok(PixelPath {
        nodes,
        total_cost: dist[e],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Raster;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    const EPS: f64 = 1e-6;

    fn cfg() -> GraphConfig {
        GraphConfig::default()
    }

    #[test]
    fn weight_examples() {
        let b = Raster::filled(2, 1, true);
        let (p, q) = (Pixel::new(0, 0), Pixel::new(0, 1));
        let full = Raster::from_vec(2, 1, vec![1.0f32, 1.0]).unwrap();
        assert!((edge_weight(&full, &b, p, q, &cfg()) - 2.0 / (2.0 + EPS)).abs() < 1e-15);
        let low = Raster::from_vec(2, 1, vec![0.2f32, 0.3]).unwrap();
        let w = edge_weight(&low, &b, p, q, &cfg());
        assert!((w - 4.0).abs() < 1e-5, "{w}");
        let outside = Raster::from_vec(2, 1, vec![true, false]).unwrap();
        assert!(edge_weight(&low, &outside, p, q, &cfg()).is_infinite());
        assert!(edge_weight(&low, &b, p, p, &cfg()).is_infinite());
    }

    #[test]
    fn single_corridor() {
        let m = Raster::filled(5, 1, 0.5f32);
        let b = Raster::filled(5, 1, true);
        let path = shortest_path(&m, &b, Pixel::new(0, 0), Pixel::new(0, 4), &cfg()).unwrap();
        assert_eq!(
            path.nodes,
            (0..5).map(|c| Pixel::new(0, c)).collect::<Vec<_>>()
        );
        assert!((path.total_cost - 4.0 * 2.0 / (1.0 + EPS)).abs() < 1e-12);
        assert!((path.total_cost - 8.0).abs() < 1e-4);
    }

    #[test]
    fn start_equals_end() {
        let m = Raster::filled(3, 3, 0.5f32);
        let b = Raster::filled(3, 3, true);
        let p = Pixel::new(1, 1);
        let path = shortest_path(&m, &b, p, p, &cfg()).unwrap();
        assert_eq!(path.nodes, vec![p]);
        assert_eq!(path.total_cost, 0.0);
    }

    #[test]
    fn unreachable_end_is_no_path() {
        let m = Raster::filled(5, 1, 0.5f32);
        let b = Raster::from_vec(5, 1, vec![true, true, false, true, true]).unwrap();
        assert!(matches!(
            shortest_path(&m, &b, Pixel::new(0, 0), Pixel::new(0, 4), &cfg()),
            Err(Error::NoPath { .. })
        ));
        assert!(matches!(
            shortest_path(&m, &b, Pixel::new(0, 2), Pixel::new(0, 4), &cfg()),
            Err(Error::NoPath { .. })
        ));
    }

    #[test]
    fn path_prefers_high_probability() {
        // the middle row is a ridge; the straight route along it should win
        let m = Raster::from_fn(7, 3, |p| if p.row == 1 { 1.0f32 } else { 0.1 });
        let b = Raster::filled(7, 3, true);
        let path = shortest_path(&m, &b, Pixel::new(1, 0), Pixel::new(1, 6), &cfg()).unwrap();
        assert!(path.nodes.iter().all(|p| p.row == 1));
    }

    #[test]
    fn diagonal_band_terminals() {
        let b = Raster::from_fn(40, 40, |p| {
            (p.row as isize - p.col as isize - 10).abs() <= 1
        });
        let (s, e) = select_terminals(&b).unwrap();
        assert!(s.col <= 2, "{s:?}");
        assert!(e.row >= 37, "{e:?}");
    }

    #[test]
    fn t_shape_terminals_are_ambiguous() {
        let b = Raster::from_fn(40, 40, |p| {
            let bar = (4..=6).contains(&p.row) && (4..=35).contains(&p.col);
            let stem = (19..=21).contains(&p.col) && (4..=35).contains(&p.row);
            bar || stem
        });
        assert!(matches!(
            select_terminals(&b),
            Err(Error::AmbiguousSkeleton(3))
        ));
    }

    /// Cheapest simple path by exhaustive depth-first enumeration. Partial
    /// paths already costlier than the best complete one are cut, which
    /// keeps the search exact because every weight is positive.
    fn brute_force(m: &EdgeProbMap, b: &BinaryMask, s: Pixel, e: Pixel) -> Option<f64> {
        fn dfs(
            m: &EdgeProbMap,
            b: &BinaryMask,
            cur: Pixel,
            e: Pixel,
            cost: f64,
            visited: &mut Vec<bool>,
            best: &mut Option<f64>,
        ) {
            if cur == e {
                if best.is_none_or(|c| cost < c) {
                    *best = Some(cost);
                }
                return;
            }
            if best.is_some_and(|c| cost >= c) {
                return;
            }
            for dr in -1isize..=1 {
                for dc in -1isize..=1 {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let (r, c) = (cur.row as isize + dr, cur.col as isize + dc);
                    if r < 0 || c < 0 || r >= b.height() as isize || c >= b.width() as isize {
                        continue;
                    }
                    let q = Pixel::new(r as usize, c as usize);
                    let qi = q.row * b.width() + q.col;
                    if !b.get(q) || visited[qi] {
                        continue;
                    }
                    let w = 2.0 / (m.get(cur) as f64 + m.get(q) as f64 + EPS);
                    visited[qi] = true;
                    dfs(m, b, q, e, cost + w, visited, best);
                    visited[qi] = false;
                }
            }
        }
        if !b.get(s) || !b.get(e) {
            return None;
        }
        let mut visited = vec![false; b.len()];
        visited[s.row * b.width() + s.col] = true;
        let mut best = None;
        dfs(m, b, s, e, 0.0, &mut visited, &mut best);
        best
    }

    fn random_instance(seed: u64) -> (EdgeProbMap, BinaryMask, Pixel, Pixel) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = Raster::from_fn(5, 5, |_| rng.gen_range(1..=10) as f32 / 10.0);
        let mut b = Raster::from_fn(5, 5, |_| rng.gen_bool(0.7));
        let s = Pixel::new(rng.gen_range(0..5), rng.gen_range(0..5));
        let e = Pixel::new(rng.gen_range(0..5), rng.gen_range(0..5));
        b.set(s, true);
        b.set(e, true);
        (m, b, s, e)
    }

    #[test]
    fn matches_brute_force_on_small_rasters() {
        for seed in 0..100 {
            let (m, b, s, e) = random_instance(seed);
            let got = shortest_path(&m, &b, s, e, &cfg());
            match (got, brute_force(&m, &b, s, e)) {
                (Ok(path), Some(best)) => {
                    assert!(
                        (path.total_cost - best).abs() <= 1e-12 * best.max(1.0),
                        "seed {seed}: {} vs {best}",
                        path.total_cost
                    );
                    assert!(path.is_simple_chain());
                    assert_eq!(path.first(), Some(s));
                    assert_eq!(path.last(), Some(e));
                    assert!(path.nodes.iter().all(|&p| b.get(p)));
                }
                (Err(Error::NoPath { .. }), None) => {}
                (got, want) => panic!("seed {seed}: {got:?} vs {want:?}"),
            }
        }
    }

    proptest! {
        #[test]
        fn total_cost_is_the_sum_of_edge_weights(seed in any::<u64>()) {
            let (m, b, s, e) = random_instance(seed);
            if let Ok(path) = shortest_path(&m, &b, s, e, &cfg()) {
                let sum = path_cost(&m, &b, &path.nodes, &cfg());
                prop_assert!((sum - path.total_cost).abs() <= 1e-9 * sum.max(1.0));
            }
        }

        #[test]
        fn raising_path_probabilities_never_raises_cost(seed in any::<u64>(), boost in 0.0f32..0.5) {
            let (m, b, s, e) = random_instance(seed);
            if let Ok(path) = shortest_path(&m, &b, s, e, &cfg()) {
                let mut raised = m.clone();
                for &p in &path.nodes {
                    raised.set(p, (m.get(p) + boost).min(1.0));
                }
                let again = shortest_path(&raised, &b, s, e, &cfg()).unwrap();
                prop_assert!(again.total_cost <= path.total_cost + 1e-12);
            }
        }

        #[test]
        fn output_is_deterministic(seed in any::<u64>()) {
            let (m, b, s, e) = random_instance(seed);
            let a = shortest_path(&m, &b, s, e, &cfg()).ok();
            let c = shortest_path(&m, &b, s, e, &cfg()).ok();
            prop_assert_eq!(a, c);
        }
    }

    #[test]
    fn uniform_grid_ties_resolve_identically() {
        let m = Raster::filled(6, 6, 0.5f32);
        let b = Raster::filled(6, 6, true);
        let a = shortest_path(&m, &b, Pixel::new(0, 0), Pixel::new(5, 3), &cfg()).unwrap();
        for _ in 0..5 {
            let again = shortest_path(&m, &b, Pixel::new(0, 0), Pixel::new(5, 3), &cfg()).unwrap();
            assert_eq!(a.nodes, again.nodes);
        }
        assert_eq!(a.len(), 6);
    }

    #[test]
    fn invalid_epsilon_is_rejected() {
        let m = Raster::filled(2, 1, 0.5f32);
        let b = Raster::filled(2, 1, true);
        let bad = GraphConfig { epsilon: 0.0 };
        assert!(matches!(
            shortest_path(&m, &b, Pixel::new(0, 0), Pixel::new(0, 1), &bad),
            Err(Error::Config(_))
        ));
    }
}
