//! Canonical reorientation: the pectoral region is moved to the lower-left
//! corner before any boundary processing.

use crate::error::{Error, Result};
use crate::raster::{GrayImage, Pixel, Raster};

/// Mirror flags. Applying the same orientation twice restores the input.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Orientation {
    pub flip_horizontal: bool,
    pub flip_vertical: bool,
}

impl Orientation {
    pub const IDENTITY: Orientation = Orientation {
        flip_horizontal: false,
        flip_vertical: false,
    };

    pub const fn new(flip_horizontal: bool, flip_vertical: bool) -> Self {
        Orientation {
            flip_horizontal,
            flip_vertical,
        }
    }

    pub fn is_identity(self) -> bool {
        self == Self::IDENTITY
    }

    /// Where `p` lands after mirroring a `width` x `height` raster.
    pub fn map_pixel(self, p: Pixel, width: usize, height: usize) -> Pixel {
        Pixel {
            row: if self.flip_vertical {
                height - 1 - p.row
            } else {
                p.row
            },
            col: if self.flip_horizontal {
                width - 1 - p.col
            } else {
                p.col
            },
        }
    }

    pub fn apply<T: Copy>(self, raster: &Raster<T>) -> Raster<T> {
        if self.is_identity() {
            return raster.clone();
        }
        let (w, h) = raster.dims();
        Raster::from_fn(w, h, |p| raster.get(self.map_pixel(p, w, h)))
    }
}

/// Mirrors `raster` as flagged by `o`.
pub fn apply_orientation<T: Copy>(raster: &Raster<T>, o: Orientation) -> Raster<T> {
    o.apply(raster)
}

/// Corner order used by [`corner_means`]: lower-left, lower-right,
/// upper-left, upper-right.
const CORNER_FLIPS: [Orientation; 4] = [
    Orientation::new(false, false),
    Orientation::new(true, false),
    Orientation::new(false, true),
    Orientation::new(true, true),
];

/// Mean intensity of the four 25% x 25% corner windows, in
/// lower-left, lower-right, upper-left, upper-right order.
pub fn corner_means(image: &GrayImage) -> [f64; 4] {
    let (w, h) = image.dims();
    let ww = (w / 4).max(1);
    let wh = (h / 4).max(1);
    let window_mean = |rows: std::ops::Range<usize>, cols: std::ops::Range<usize>| {
        let mut sum = 0u64;
        for row in rows.clone() {
            for col in cols.clone() {
                sum += image.get(Pixel { row, col }) as u64;
            }
        }
        sum as f64 / (rows.len() * cols.len()) as f64
    };
    [
        window_mean(h - wh..h, 0..ww),
        window_mean(h - wh..h, w - ww..w),
        window_mean(0..wh, 0..ww),
        window_mean(0..wh, w - ww..w),
    ]
}

/// Picks the flips that bring the brightest corner window to the lower left.
///
/// Fails with [`Error::AmbiguousOrientation`] when all corner means lie
/// within one intensity level. Equal maxima resolve in lower-left,
/// lower-right, upper-left, upper-right order.
pub fn detect_orientation(image: &GrayImage) -> Result<Orientation> {
    let means = corner_means(image);
    let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = means.iter().copied().fold(f64::INFINITY, f64::min);
    if max - min <= 1.0 {
        return Err(Error::AmbiguousOrientation(means));
    }
    let best = means.iter().position(|&m| m == max).unwrap_or(0);
    Ok(CORNER_FLIPS[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn block_at(lower: bool, left: bool) -> GrayImage {
        Raster::from_fn(256, 256, |p| {
            let in_rows = if lower { p.row >= 192 } else { p.row < 64 };
            let in_cols = if left { p.col < 64 } else { p.col >= 192 };
            if in_rows && in_cols {
                200
            } else {
                0
            }
        })
    }

    #[test]
    fn mirror_small_raster() {
        let r = Raster::from_vec(2, 2, vec![1, 2, 3, 4]).unwrap();
        assert_eq!(
            apply_orientation(&r, Orientation::new(true, false)).data(),
            &[2, 1, 4, 3]
        );
        assert_eq!(
            apply_orientation(&r, Orientation::new(false, true)).data(),
            &[3, 4, 1, 2]
        );
        assert_eq!(apply_orientation(&r, Orientation::IDENTITY), r);
    }

    #[test]
    fn canonical_block_needs_no_flip() {
        assert_eq!(
            detect_orientation(&block_at(true, true)).unwrap(),
            Orientation::IDENTITY
        );
    }

    #[test]
    fn upper_right_block_needs_both_flips() {
        assert_eq!(
            detect_orientation(&block_at(false, false)).unwrap(),
            Orientation::new(true, true)
        );
        assert_eq!(
            detect_orientation(&block_at(true, false)).unwrap(),
            Orientation::new(true, false)
        );
        assert_eq!(
            detect_orientation(&block_at(false, true)).unwrap(),
            Orientation::new(false, true)
        );
    }

    #[test]
    fn uniform_image_is_ambiguous() {
        let img = Raster::filled(64, 64, 90u8);
        assert!(matches!(
            detect_orientation(&img),
            Err(Error::AmbiguousOrientation(_))
        ));
    }

    fn flips() -> impl Strategy<Value = Orientation> {
        (any::<bool>(), any::<bool>()).prop_map(|(h, v)| Orientation::new(h, v))
    }

    proptest! {
        #[test]
        fn orientation_is_an_involution(
            w in 1usize..20, h in 1usize..20, o in flips(), salt in any::<u32>()
        ) {
            let r = Raster::from_fn(w, h, |p| (p.row as u32 * 977 + p.col as u32 * 131) ^ salt);
            prop_assert_eq!(o.apply(&o.apply(&r)), r);
        }

        #[test]
        fn flipped_copies_share_a_canonical_frame(o in flips(), lower in any::<bool>(), left in any::<bool>()) {
            let img = block_at(lower, left);
            let flipped = o.apply(&img);
            let a = detect_orientation(&img).unwrap().apply(&img);
            let b = detect_orientation(&flipped).unwrap().apply(&flipped);
            prop_assert_eq!(a, b);
        }
    }
}
