//! Logarithmic Image Processing (LIP) arithmetic on grey tones.
//!
//! Grey tones live on the inverted scale `[0, M)`: `0` is the white extremity
//! (the bare source) and values grow toward dark. The laws derive from the
//! optical transmittance law:
//!
//! - addition `a ⊕ b = a + b - a·b/M` superimposes two absorbing layers, which
//!   is how an exposure-time or source-intensity change acts on an image;
//! - scalar multiplication `λ ⊗ a = M - M(1 - a/M)^λ` stacks a layer on itself
//!   `λ` times, which is how a change of object thickness or opacity acts;
//! - subtraction `a ⊖ b = (a - b) / (1 - b/M)` inverts `⊕` and may be negative.
//!
//! Everything here is plain `f64` arithmetic. Quantization to integer grey
//! levels lives in [`crate::raster`].

use crate::error::{Error, Result};

/// Grey levels of 8-bit data.
pub const DEFAULT_M: f64 = 256.0;

/// The grey-scale bound `M`. All grey tones handled under a scale lie in `[0, M)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreyScale {
    m: f64,
}

impl Default for GreyScale {
    fn default() -> Self {
        GreyScale { m: DEFAULT_M }
    }
}

impl GreyScale {
    pub fn new(m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grey-scale bound must be a positive finite number, got {m}"
            )));
        }
        Ok(GreyScale { m })
    }

    #[inline]
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Largest grey level an 8-bit style raster can hold, `M - 1`.
    #[inline]
    pub fn max_level(&self) -> f64 {
        self.m - 1.0
    }

    #[inline]
    pub fn contains(&self, a: f64) -> bool {
        (0.0..self.m).contains(&a)
    }

    pub(crate) fn check_tone(&self, what: &'static str, a: f64) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::domain(what, a, format!("[0, {})", self.m)))
        }
    }

    pub(crate) fn check_scalar(what: &'static str, lambda: f64) -> Result<()> {
        if lambda.is_finite() && lambda >= 0.0 {
            Ok(())
        } else {
            Err(Error::domain(what, lambda, "[0, inf)"))
        }
    }

    // Results that are mathematically below M can round up to M in f64 when the
    // operands sit close to the dark end.
    #[inline]
    fn below_m(&self, v: f64) -> f64 {
        if v >= self.m {
            self.m.next_down()
        } else {
            v
        }
    }

    /// `a ⊕ b`.
    pub fn add(&self, a: f64, b: f64) -> Result<f64> {
        self.check_tone("a", a)?;
        self.check_tone("b", b)?;
        Ok(self.add_unchecked(a, b))
    }

    #[inline]
    pub(crate) fn add_unchecked(&self, a: f64, b: f64) -> f64 {
        self.below_m(a + b - a * b / self.m)
    }

    /// `a ⊖ b`. The result is an unconstrained real: negative whenever `a < b`.
    pub fn sub(&self, a: f64, b: f64) -> Result<f64> {
        self.check_tone("a", a)?;
        self.check_tone("b", b)?;
        Ok(self.sub_unchecked(a, b))
    }

    #[inline]
    pub(crate) fn sub_unchecked(&self, a: f64, b: f64) -> f64 {
        (a - b) / (1.0 - b / self.m)
    }

    /// `λ ⊗ a`.
    pub fn mul(&self, lambda: f64, a: f64) -> Result<f64> {
        Self::check_scalar("lambda", lambda)?;
        self.check_tone("a", a)?;
        Ok(self.mul_unchecked(lambda, a))
    }

    #[inline]
    pub(crate) fn mul_unchecked(&self, lambda: f64, a: f64) -> f64 {
        if lambda == 1.0 {
            return a;
        }
        // M - M(1 - a/M)^λ, written to stay accurate near both ends of the scale.
        let v = -self.m * (lambda * (-a / self.m).ln_1p()).exp_m1();
        self.below_m(v.max(0.0))
    }

    /// `M - 1 - a`, the conversion between the conventional and the LIP
    /// orientation of the scale.
    ///
    /// Accepts `a` in `(-1, M - 1]` so that the complement of any grey tone in
    /// `[0, M)` can itself be complemented back.
    pub fn complement(&self, a: f64) -> Result<f64> {
        if a > -1.0 && a <= self.max_level() {
            Ok(self.max_level() - a)
        } else {
            Err(Error::domain("a", a, format!("(-1, {}]", self.max_level())))
        }
    }

    /// Logarithmic multiplicative contrast: the `μ ≥ 1` with
    /// `μ ⊗ min(g1, g2) = max(g1, g2)`.
    ///
    /// A zero minimum is replaced by one grey level so the ratio stays finite.
    /// Ratios that the substitution pushes below one are reported as one.
    pub fn lmc(&self, g1: f64, g2: f64) -> Result<f64> {
        self.check_tone("g1", g1)?;
        self.check_tone("g2", g2)?;
        Ok(self.lmc_unchecked(g1.max(g2), g1.min(g2)))
    }

    #[inline]
    pub(crate) fn lmc_unchecked(&self, hi: f64, lo: f64) -> f64 {
        let lo = if lo == 0.0 { 1.0 } else { lo };
        if hi <= lo {
            return 1.0;
        }
        let ratio = (-hi / self.m).ln_1p() / (-lo / self.m).ln_1p();
        ratio.max(1.0)
    }
}
