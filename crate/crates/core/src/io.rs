//! Raster file formats.
//!
//! * PGM: `P5\n<width> <height>\n255\n` followed by `width * height` raw bytes.
//! * EPM1: `EPM1\n<width> <height>\n` followed by `width * height`
//!   little-endian IEEE-754 `f32` values.
//! * Mask files are PGM restricted to the values 0 and 255.
//!
//! All payloads are row-major, top row first. Writers produce exactly the
//! headers above; readers also accept arbitrary whitespace between header
//! tokens and `#` comments in PGM headers.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, EdgeProbMap, GrayImage, Raster};

/// Values outside `[0, 1]` by more than this are rejected by [`decode_prob_map`].
pub const PROBABILITY_TOLERANCE: f32 = 1e-6;

const EPM_MAGIC: &[u8] = b"EPM1";

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    comments: bool,
}

impl<'a> HeaderCursor<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if self.comments && b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format("header ended early".into()));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::Format(format!("bad {what} {:?}", String::from_utf8_lossy(tok))))
    }

    /// Consumes the single whitespace byte that terminates the header.
    fn end_header(&mut self) -> Result<usize> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => Ok(self.pos + 1),
            _ => Err(Error::Format("missing whitespace after header".into())),
        }
    }
}

fn payload_len(width: usize, height: usize, elem: usize) -> Result<usize> {
    width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(elem))
        .ok_or_else(|| Error::Format(format!("dimensions {width}x{height} overflow")))
}

/// Decodes a binary 8-bit PGM.
pub fn decode_gray_image(bytes: &[u8]) -> Result<GrayImage> {
    let mut cur = HeaderCursor {
        bytes,
        pos: 0,
        comments: true,
    };
    if cur.token()? != b"P5" {
        return Err(Error::Format("magic is not P5".into()));
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedDepth(maxval.min(u32::MAX as usize) as u32));
    }
    let start = cur.end_header()?;
    let n = payload_len(width, height, 1)?;
    let payload = &bytes[start..];
    if payload.len() != n {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {n}",
            payload.len()
        )));
    }
    Raster::from_vec(width, height, payload.to_vec())
}

pub fn encode_gray_image(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.data());
    out
}

/// Decodes an EPM1 probability map, rejecting values outside `[0, 1]`.
///
/// Values within [`PROBABILITY_TOLERANCE`] of the interval are clamped into it.
pub fn decode_prob_map(bytes: &[u8]) -> Result<EdgeProbMap> {
    if !bytes.starts_with(EPM_MAGIC) {
        return Err(Error::Format("magic is not EPM1".into()));
    }
    let mut cur = HeaderCursor {
        bytes,
        pos: EPM_MAGIC.len(),
        comments: false,
    };
    if !bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Format("magic is not EPM1".into()));
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let start = cur.end_header()?;
    let n = payload_len(width, height, 4)?;
    let payload = &bytes[start..];
    if payload.len() != n {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {n}",
            payload.len()
        )));
    }
    let mut data = Vec::with_capacity(width * height);
    for (index, chunk) in payload.chunks_exact(4).enumerate() {
        let value = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        if !(-PROBABILITY_TOLERANCE..=1.0 + PROBABILITY_TOLERANCE).contains(&value) {
            return Err(Error::Range { index, value });
        }
        data.push(value.clamp(0.0, 1.0));
    }
    Raster::from_vec(width, height, data)
}

pub fn encode_prob_map(map: &EdgeProbMap) -> Vec<u8> {
    let mut out = format!("EPM1\n{} {}\n", map.width(), map.height()).into_bytes();
    out.reserve(map.len() * 4);
    for v in map.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes a 0/255 PGM into a mask.
pub fn decode_mask(bytes: &[u8]) -> Result<BinaryMask> {
    let img = decode_gray_image(bytes)?;
    if let Some((i, v)) = img
        .data()
        .iter()
        .enumerate()
        .find(|(_, &v)| v != 0 && v != 255)
    {
        return Err(Error::Format(format!(
            "mask value {v} at index {i} is neither 0 nor 255"
        )));
    }
    Ok(img.map(|v| v == 255))
}

pub fn encode_mask(mask: &BinaryMask) -> Vec<u8> {
    encode_gray_image(&mask.map(|b| if b { 255u8 } else { 0 }))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Writes via a sibling temporary file and rename, so readers never see a
/// partially written raster.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Format(format!("{} has no file name", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_gray_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    decode_gray_image(&read_bytes(path.as_ref())?)
}

pub fn write_gray_image(path: impl AsRef<Path>, image: &GrayImage) -> Result<()> {
    write_atomic(path.as_ref(), &encode_gray_image(image))
}

pub fn read_prob_map(path: impl AsRef<Path>) -> Result<EdgeProbMap> {
    decode_prob_map(&read_bytes(path.as_ref())?)
}

pub fn write_prob_map(path: impl AsRef<Path>, map: &EdgeProbMap) -> Result<()> {
    write_atomic(path.as_ref(), &encode_prob_map(map))
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    decode_mask(&read_bytes(path.as_ref())?)
}

pub fn write_mask(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    write_atomic(path.as_ref(), &encode_mask(mask))
}
