use crate::error::{Error, Result};
use crate::lip::GreyScale;

use super::mask::RegionMask;

/// A row-major raster of real grey tones.
///
/// Pixels are finite and lie in `(-1, M)`: the LIP range `[0, M)` together with
/// the complement of that range, so that an image obtained as `(f^c ⊕ k)^c`
/// is representable on the real-valued path without clamping.
#[derive(Clone, Debug, PartialEq)]
pub struct GreyImage {
    width: usize,
    height: usize,
    scale: GreyScale,
    pixels: Vec<f64>,
}

impl GreyImage {
    pub fn new(width: usize, height: usize, scale: GreyScale, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if let Some(i) = pixels.iter().position(|&v| !pixel_in_range(&scale, v)) {
            return Err(Error::domain(
                "pixel",
                pixels[i],
                format!("(-1, {}) at ({}, {})", scale.m(), i % width, i / width),
            ));
        }
        Ok(GreyImage {
            width,
            height,
            scale,
            pixels,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        scale: GreyScale,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, scale, pixels)
    }

    pub fn filled(width: usize, height: usize, scale: GreyScale, value: f64) -> Result<Self> {
        Self::new(width, height, scale, vec![value; width * height])
    }

    // Callers guarantee the invariant.
    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        scale: GreyScale,
        pixels: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        GreyImage {
            width,
            height,
            scale,
            pixels,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn scale(&self) -> GreyScale {
        self.scale
    }

    #[inline]
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// `f^c = M - 1 - f`, pixel-wise.
    pub fn complement(&self) -> Result<GreyImage> {
        let mut out = Vec::with_capacity(self.pixels.len());
        for (i, &v) in self.pixels.iter().enumerate() {
            let c = self
                .scale
                .complement(v)
                .map_err(|_| Error::RangeViolation {
                    x: i % self.width,
                    y: i / self.width,
                    value: v,
                    op: "complement".into(),
                })?;
            out.push(c);
        }
        Ok(GreyImage::from_parts(
            self.width,
            self.height,
            self.scale,
            out,
        ))
    }

    /// True when every pixel is an integer grey level in `[0, M - 1]`.
    pub fn is_quantized(&self) -> bool {
        self.first_non_integer().is_none()
    }

    pub(crate) fn first_non_integer(&self) -> Option<usize> {
        let top = self.scale.max_level();
        self.pixels
            .iter()
            .position(|&v| v.fract() != 0.0 || v < 0.0 || v > top)
    }

    /// Checks that every pixel lies on the LIP scale `[0, M)`.
    pub(crate) fn check_on_scale(&self, what: &str) -> Result<()> {
        match self.pixels.iter().position(|&v| !self.scale.contains(v)) {
            None => Ok(()),
            Some(i) => Err(Error::RangeViolation {
                x: i % self.width,
                y: i / self.width,
                value: self.pixels[i],
                op: what.to_string(),
            }),
        }
    }

    pub(crate) fn check_mask(&self, mask: &RegionMask) -> Result<()> {
        if mask.dims() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: mask.dims(),
            });
        }
        Ok(())
    }

    pub(crate) fn map(&self, f: impl Fn(f64) -> f64) -> GreyImage {
        GreyImage::from_parts(
            self.width,
            self.height,
            self.scale,
            self.pixels.iter().map(|&v| f(v)).collect(),
        )
    }
}

#[inline]
fn pixel_in_range(scale: &GreyScale, v: f64) -> bool {
    v.is_finite() && v > -1.0 && v < scale.m()
}
