//! Dense row-major rasters and pixel coordinates.

use crate::error::{Error, Result};

/// A pixel position, `row` counted from the top and `col` from the left.
///
/// Ordering is row-major, which is the tie-breaking order used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pixel {
    pub row: usize,
    pub col: usize,
}

impl Pixel {
    pub const fn new(row: usize, col: usize) -> Self {
        Pixel { row, col }
    }

    /// True when `other` is one of the 8 neighbours (never itself).
    pub fn is_neighbor(self, other: Pixel) -> bool {
        self != other && self.row.abs_diff(other.row) <= 1 && self.col.abs_diff(other.col) <= 1
    }

    /// Euclidean distance in pixels.
    pub fn distance(self, other: Pixel) -> f64 {
        let dr = self.row as f64 - other.row as f64;
        let dc = self.col as f64 - other.col as f64;
        (dr * dr + dc * dc).sqrt()
    }
}

impl From<(usize, usize)> for Pixel {
    fn from((row, col): (usize, usize)) -> Self {
        Pixel { row, col }
    }
}

/// Offsets of the 8-neighbourhood in row-major order.
pub(crate) const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

pub(crate) const NEIGHBORS_4: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];

/// A dense single-channel raster stored row-major, top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// 8-bit grayscale image.
pub type GrayImage = Raster<u8>;
/// Per-pixel edge probabilities in `[0, 1]`.
pub type EdgeProbMap = Raster<f32>;
/// Per-pixel boolean mask.
pub type BinaryMask = Raster<bool>;

impl<T: Copy> Raster<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Raster {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "{} values for a {width}x{height} raster",
                data.len()
            )));
        }
        Ok(Raster {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(Pixel) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(Pixel { row, col }));
            }
        }
        Raster {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, p: Pixel) -> usize {
        p.row * self.width + p.col
    }

    #[inline]
    pub fn pixel_at(&self, index: usize) -> Pixel {
        Pixel {
            row: index / self.width,
            col: index % self.width,
        }
    }

    #[inline]
    pub fn contains(&self, p: Pixel) -> bool {
        p.row < self.height && p.col < self.width
    }

    #[inline]
    pub fn get(&self, p: Pixel) -> T {
        self.data[p.row * self.width + p.col]
    }

    #[inline]
    pub fn set(&mut self, p: Pixel, value: T) {
        let i = p.row * self.width + p.col;
        self.data[i] = value;
    }

    /// Neighbour of `p` at `(dr, dc)` if it lies inside the raster.
    #[inline]
    pub fn offset(&self, p: Pixel, dr: isize, dc: isize) -> Option<Pixel> {
        let row = p.row.checked_add_signed(dr)?;
        let col = p.col.checked_add_signed(dc)?;
        (row < self.height && col < self.width).then_some(Pixel { row, col })
    }

    /// In-bounds 8-neighbours of `p`, row-major.
    pub fn neighbors8(&self, p: Pixel) -> impl Iterator<Item = Pixel> + '_ {
        NEIGHBORS_8
            .iter()
            .filter_map(move |&(dr, dc)| self.offset(p, dr, dc))
    }

    pub fn pixels(&self) -> impl Iterator<Item = Pixel> {
        let (w, h) = (self.width, self.height);
        (0..h).flat_map(move |row| (0..w).map(move |col| Pixel { row, col }))
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn same_shape<U>(&self, other: &Raster<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_same_shape<U>(&self, other: &Raster<U>, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{what}: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )))
        }
    }
}

impl BinaryMask {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn true_pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| self.pixel_at(i))
    }

    /// Mask holding exactly the given pixels.
    pub fn from_pixels(
        width: usize,
        height: usize,
        pixels: impl IntoIterator<Item = Pixel>,
    ) -> Self {
        let mut m = Raster::filled(width, height, false);
        for p in pixels {
            m.set(p, true);
        }
        m
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.same_shape(other) && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    pub fn union(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> BinaryMask {
        self.map(|b| !b)
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> BinaryMask {
        assert!(self.same_shape(other), "mask shapes differ");
        Raster {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl EdgeProbMap {
    /// Checks every value lies in `[0, 1]` up to `tol`.
    pub fn validate_probabilities(&self, tol: f32) -> Result<()> {
        for (index, &value) in self.data.iter().enumerate() {
            if !(value >= -tol && value <= 1.0 + tol) {
                return Err(Error::Range { index, value });
            }
        }
        Ok(())
    }
}
