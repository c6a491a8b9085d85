//! Region homogeneity criteria.
//!
//! The two LIP criteria depend on the region only through its supremum and
//! infimum, which is what makes them insensitive to the matching lighting law:
//! `sup(f ⊕ C) = sup f ⊕ C` and `sup(λ ⊗ f) = λ ⊗ sup f` (likewise for `inf`),
//! and both `⊖` and the logarithmic multiplicative contrast cancel the common
//! `C` or `λ`. The variance and the plain `sup - inf` dynamic are kept as
//! classical, lighting-sensitive baselines.
//!
//! Criteria are computed on the image they are handed. Evaluating on the
//! complement `f^c` is the caller's business.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lip::GreyScale;
use crate::raster::{GreyImage, RegionMask};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomogeneityCriterion {
    /// `sup ⊖ inf`, the maximal logarithmic additive contrast. Values in `[0, M)`.
    LipAdditive,
    /// `LMC(sup, inf)`, with a zero infimum read as one grey level. Values `>= 1`.
    LipMultiplicative,
    /// Population variance.
    Variance,
    /// `sup - inf`.
    ClassicalDynamic,
}

impl HomogeneityCriterion {
    pub fn evaluate(&self, img: &GreyImage, region: &RegionMask) -> Result<f64> {
        let stats = RegionStats::collect(img, region)?;
        self.check_domain(img.scale(), &stats)?;
        Ok(self.from_stats(img.scale(), &stats))
    }

    /// Value of the criterion given the running statistics of a non-empty region.
    #[inline]
    pub fn from_stats(&self, scale: GreyScale, stats: &RegionStats) -> f64 {
        match self {
            HomogeneityCriterion::LipAdditive => scale.sub_unchecked(stats.max, stats.min),
            HomogeneityCriterion::LipMultiplicative => scale.lmc_unchecked(stats.max, stats.min),
            HomogeneityCriterion::Variance => stats.variance(),
            HomogeneityCriterion::ClassicalDynamic => stats.max - stats.min,
        }
    }

    /// The LIP criteria need their operands on the LIP scale `[0, M)`.
    pub(crate) fn check_domain(&self, scale: GreyScale, stats: &RegionStats) -> Result<()> {
        if self.is_lip() {
            scale.check_tone("region infimum", stats.min)?;
            scale.check_tone("region supremum", stats.max)?;
        }
        Ok(())
    }

    pub fn is_lip(&self) -> bool {
        matches!(
            self,
            HomogeneityCriterion::LipAdditive | HomogeneityCriterion::LipMultiplicative
        )
    }

    /// Threshold used by the experiments: 200 grey levels for the additive
    /// criterion, 2.7 for the multiplicative one.
    pub fn default_threshold(&self) -> Option<f64> {
        match self {
            HomogeneityCriterion::LipAdditive => Some(200.0),
            HomogeneityCriterion::LipMultiplicative => Some(2.7),
            _ => None,
        }
    }
}

impl fmt::Display for HomogeneityCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HomogeneityCriterion::LipAdditive => "add",
            HomogeneityCriterion::LipMultiplicative => "mul",
            HomogeneityCriterion::Variance => "variance",
            HomogeneityCriterion::ClassicalDynamic => "dynamic",
        })
    }
}

impl FromStr for HomogeneityCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "add" | "additive" | "lip_additive" => Ok(HomogeneityCriterion::LipAdditive),
            "mul" | "multiplicative" | "lip_multiplicative" => {
                Ok(HomogeneityCriterion::LipMultiplicative)
            }
            "variance" => Ok(HomogeneityCriterion::Variance),
            "dynamic" | "classical_dynamic" => Ok(HomogeneityCriterion::ClassicalDynamic),
            _ => Err(Error::InvalidParameter(format!("unknown criterion {s:?}"))),
        }
    }
}

/// Running statistics of a region: enough to evaluate any criterion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionStats {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    sum: f64,
    sum_sq: f64,
}

impl RegionStats {
    pub fn new(v: f64) -> Self {
        RegionStats {
            count: 1,
            min: v,
            max: v,
            sum: v,
            sum_sq: v * v,
        }
    }

    pub fn collect(img: &GreyImage, region: &RegionMask) -> Result<Self> {
        img.check_mask(region)?;
        Self::from_values(region.indices().map(|i| img.pixels()[i])).ok_or(Error::EmptyRegion)
    }

    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut it = values.into_iter();
        let mut stats = Self::new(it.next()?);
        for v in it {
            stats.push(v);
        }
        Some(stats)
    }

    #[inline]
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        self.min = self.min.min(v);
        self.max = self.max.max(v);
        self.sum += v;
        self.sum_sq += v * v;
    }

    #[inline]
    pub fn with(mut self, v: f64) -> Self {
        self.push(v);
        self
    }

    pub fn merge(&mut self, other: &RegionStats) {
        self.count += other.count;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    pub fn variance(&self) -> f64 {
        let n = self.count as f64;
        let mean = self.sum / n;
        (self.sum_sq / n - mean * mean).max(0.0)
    }
}

/// LIP-additive homogeneity: `sup_R f ⊖ inf_R f`.
pub fn h_additive(img: &GreyImage, region: &RegionMask) -> Result<f64> {
    HomogeneityCriterion::LipAdditive.evaluate(img, region)
}

/// LIP-multiplicative homogeneity: `ln(1 - sup/M) / ln(1 - inf/M)`.
pub fn h_multiplicative(img: &GreyImage, region: &RegionMask) -> Result<f64> {
    HomogeneityCriterion::LipMultiplicative.evaluate(img, region)
}

pub fn h_variance(img: &GreyImage, region: &RegionMask) -> Result<f64> {
    HomogeneityCriterion::Variance.evaluate(img, region)
}

pub fn h_classical_dynamic(img: &GreyImage, region: &RegionMask) -> Result<f64> {
    HomogeneityCriterion::ClassicalDynamic.evaluate(img, region)
}
