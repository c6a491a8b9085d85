//! Rasters, masks and the pixel-wise operations the segmenters build on.

mod image;
mod mask;
pub mod morph;
pub mod pgm;
pub mod png;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lip::GreyScale;

pub use image::GreyImage;
pub use mask::RegionMask;
pub use morph::{components_touching, dilate, Connectivity, StructuringElement};

/// Negative `Sub` results this close to zero (relative to `M`) are rounding
/// noise from a complement round trip and are read as white.
const ROUNDING_SLACK: f64 = 1e-12;

/// ITU-R BT.601 luma weights.
const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// Luminance of an interleaved 8-bit RGB (or RGBA, alpha ignored) buffer.
pub fn luminance(
    width: usize,
    height: usize,
    channels: usize,
    data: &[u8],
    scale: GreyScale,
) -> Result<GreyImage> {
    if channels != 3 && channels != 4 {
        return Err(Error::UnsupportedChannels(channels));
    }
    if data.len() != width * height * channels {
        return Err(Error::Format(format!(
            "expected {} samples for {width}x{height}x{channels}, got {}",
            width * height * channels,
            data.len()
        )));
    }
    let pixels = data
        .chunks_exact(channels)
        .map(|px| LUMA[0] * px[0] as f64 + LUMA[1] * px[1] as f64 + LUMA[2] * px[2] as f64)
        .collect();
    GreyImage::new(width, height, scale, pixels)
}

/// A LIP law applied with a constant operand.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "op", content = "value")]
pub enum LipOp {
    /// `f ⊕ k`: darkening, as by a shorter exposure or weaker source.
    Add(f64),
    /// `f ⊖ k`: brightening, the inverse of `Add`.
    Sub(f64),
    /// `λ ⊗ f`: thickening (`λ > 1`) or thinning (`λ < 1`) the absorbing object.
    Mul(f64),
}

impl fmt::Display for LipOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LipOp::Add(k) => write!(f, "lip-add {k}"),
            LipOp::Sub(k) => write!(f, "lip-sub {k}"),
            LipOp::Mul(l) => write!(f, "lip-mul {l}"),
        }
    }
}

impl LipOp {
    pub(crate) fn validate(&self, scale: &GreyScale) -> Result<()> {
        match *self {
            LipOp::Add(k) | LipOp::Sub(k) => scale.check_tone("k", k),
            LipOp::Mul(l) => GreyScale::check_scalar("lambda", l),
        }
    }

    /// Applies the law to a tone already checked to be in `[0, M)`. The result
    /// of `Sub` may be negative.
    #[inline]
    pub(crate) fn apply(&self, scale: &GreyScale, v: f64) -> f64 {
        match *self {
            LipOp::Add(k) => scale.add_unchecked(v, k),
            LipOp::Sub(k) => scale.sub_unchecked(v, k),
            LipOp::Mul(l) => scale.mul_unchecked(l, v),
        }
    }
}

/// Applies `op` to every pixel, optionally conjugated by the complement:
/// `(op(f^c))^c`, which is how lighting changes are simulated on a
/// conventionally oriented image.
///
/// Fails on the first pixel whose operand or result leaves the grey scale.
pub fn lip_transform_image(img: &GreyImage, op: LipOp, in_complement: bool) -> Result<GreyImage> {
    transform(img, op, in_complement, false).map(|(out, _)| out)
}

/// Like [`lip_transform_image`], but results of `Sub` that would fall below the
/// white end of the scale are pinned to it. Returns the mask of pinned pixels.
pub fn lip_transform_saturating(
    img: &GreyImage,
    op: LipOp,
    in_complement: bool,
) -> Result<(GreyImage, RegionMask)> {
    transform(img, op, in_complement, true)
}

fn transform(
    img: &GreyImage,
    op: LipOp,
    in_complement: bool,
    saturate: bool,
) -> Result<(GreyImage, RegionMask)> {
    let scale = img.scale();
    op.validate(&scale)?;
    let (w, h) = img.dims();
    let mut saturated = RegionMask::empty(w, h);
    let mut out = Vec::with_capacity(img.len());
    let violation = |i: usize, value: f64| Error::RangeViolation {
        x: i % w,
        y: i / w,
        value,
        op: if in_complement {
            format!("{op} on the complement")
        } else {
            op.to_string()
        },
    };
    for (i, &p) in img.pixels().iter().enumerate() {
        let v = if in_complement {
            scale.complement(p).map_err(|_| violation(i, p))?
        } else {
            p
        };
        if !scale.contains(v) {
            return Err(violation(i, p));
        }
        let mut r = op.apply(&scale, v);
        if r < 0.0 && r >= -ROUNDING_SLACK * scale.m() {
            r = 0.0;
        }
        if r < 0.0 {
            if !saturate {
                return Err(violation(i, p));
            }
            saturated.set_index(i, true);
            r = 0.0;
        }
        out.push(if in_complement {
            scale.max_level() - r
        } else {
            r
        });
    }
    Ok((GreyImage::from_parts(w, h, scale, out), saturated))
}

/// Rounds every pixel to the nearest integer level, clamped to `[0, M - 1]`.
pub fn quantize(img: &GreyImage) -> GreyImage {
    let top = img.scale().max_level().floor();
    img.map(|v| v.round().clamp(0.0, top))
}

/// `[min, max]` of an image over a region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicRange {
    pub lo: f64,
    pub hi: f64,
}

impl DynamicRange {
    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

pub fn dynamic_range(img: &GreyImage, region: &RegionMask) -> Result<DynamicRange> {
    img.check_mask(region)?;
    let px = img.pixels();
    let mut it = region.indices().map(|i| px[i]);
    let first = it.next().ok_or(Error::EmptyRegion)?;
    let (lo, hi) = it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Ok(DynamicRange { lo, hi })
}

/// Grey-level histogram over a region with unit-width classes `[k, k + 1)`.
/// Returns `(class, count)` pairs in increasing class order.
pub fn histogram(img: &GreyImage, region: &RegionMask) -> Result<Vec<(i64, usize)>> {
    img.check_mask(region)?;
    let mut classes: Vec<i64> = region
        .indices()
        .map(|i| img.pixels()[i].floor() as i64)
        .collect();
    classes.sort_unstable();
    let mut out: Vec<(i64, usize)> = Vec::new();
    for c in classes {
        match out.last_mut() {
            Some((k, n)) if *k == c => *n += 1,
            _ => out.push((c, 1)),
        }
    }
    Ok(out)
}

/// Reads a PGM (P2/P5) or PNG file. Colour PNGs are reduced to luminance.
pub fn read_image(path: impl AsRef<Path>, scale: GreyScale) -> Result<GreyImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.starts_with(b"\x89PNG") {
        png::decode_png(&bytes, scale)
    } else {
        pgm::decode_pgm(&bytes, scale)
    }
}

/// Reads a mask file: any non-zero pixel is inside the region.
pub fn read_mask(path: impl AsRef<Path>) -> Result<RegionMask> {
    let img = read_image(path, GreyScale::default())?;
    let bits = img.pixels().iter().map(|&v| v != 0.0).collect();
    RegionMask::from_bits(img.width(), img.height(), bits)
}

/// Writes a mask as a P5 PGM with 255 inside the region and 0 outside.
pub fn write_mask(mask: &RegionMask, path: impl AsRef<Path>) -> Result<()> {
    let img = mask_to_image(mask);
    pgm::write_pgm(&img, path)
}

pub fn mask_to_image(mask: &RegionMask) -> GreyImage {
    let (w, h) = mask.dims();
    GreyImage::from_parts(
        w,
        h,
        GreyScale::default(),
        mask.bits()
            .iter()
            .map(|&b| if b { 255.0 } else { 0.0 })
            .collect(),
    )
}
