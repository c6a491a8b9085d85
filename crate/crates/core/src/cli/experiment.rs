//! Lighting-invariance experiment: the LIP criterion of a region on an image
//! and on its simulated darkened and brightened variants.
//!
//! Lighting is simulated in the complement domain, `(f^c op)^c`, and the
//! criterion is evaluated on the complement of each variant. Two pipelines are
//! run: a real-valued one, where the three values must agree to rounding, and
//! an 8-bit one, where each variant is quantized before evaluation.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::criteria::{HomogeneityCriterion, RegionStats};
use crate::error::{Error, Result};
use crate::raster::{lip_transform_saturating, quantize, GreyImage, LipOp, RegionMask};

/// Real-valued path: absolute tolerance in units of `M` (additive mode),
/// relative tolerance (multiplicative mode).
pub const REAL_TOLERANCE: f64 = 1e-9;
/// 8-bit path: absolute tolerance on the criterion value.
pub const QUANTIZED_TOLERANCE: f64 = 2.0;
/// The 8-bit path is only checked when the complemented infimum of the region
/// is at most this fraction of `M`; quantization error blows up near the dark end.
pub const QUANTIZED_DARK_LIMIT: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvarianceMode {
    /// Exposure change: `⊕ k` and `⊖ k`, judged by the additive criterion.
    Additive,
    /// Opacity change: `λ_dark ⊗` and `λ_bright ⊗`, judged by the multiplicative criterion.
    Multiplicative,
}

impl InvarianceMode {
    pub fn criterion(self) -> HomogeneityCriterion {
        match self {
            InvarianceMode::Additive => HomogeneityCriterion::LipAdditive,
            InvarianceMode::Multiplicative => HomogeneityCriterion::LipMultiplicative,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub k: f64,
    pub lambda_dark: f64,
    pub lambda_bright: f64,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            k: 120.0,
            lambda_dark: 4.0,
            lambda_bright: 0.1,
        }
    }
}

impl ExperimentParams {
    /// The darkening and brightening laws for `mode`, in that order.
    pub fn ops(&self, mode: InvarianceMode) -> [LipOp; 2] {
        match mode {
            InvarianceMode::Additive => [LipOp::Add(self.k), LipOp::Sub(self.k)],
            InvarianceMode::Multiplicative => {
                [LipOp::Mul(self.lambda_dark), LipOp::Mul(self.lambda_bright)]
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantValue {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op: Option<LipOp>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceResult {
    pub mode: InvarianceMode,
    pub criterion: HomogeneityCriterion,
    pub params: ExperimentParams,
    /// Original, darkened, brightened.
    pub real: Vec<VariantValue>,
    pub real_max_deviation: f64,
    /// Absolute tolerance applied to `real_max_deviation`.
    pub real_tolerance: f64,
    pub real_within_tolerance: bool,
    pub quantized: Vec<VariantValue>,
    pub quantized_max_deviation: f64,
    pub quantized_tolerance: f64,
    pub quantized_checked: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantized_skip_reason: Option<String>,
    /// `None` when the 8-bit path was not checked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantized_within_tolerance: Option<bool>,
}

fn spread(values: &[VariantValue]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v.value), hi.max(v.value))
        });
    hi - lo
}

const NAMES: [&str; 3] = ["original", "darkened", "brightened"];

fn variants(ops: [LipOp; 2], values: [f64; 3]) -> Vec<VariantValue> {
    let ops = [None, Some(ops[0]), Some(ops[1])];
    NAMES
        .iter()
        .zip(ops)
        .zip(values)
        .map(|((name, op), value)| VariantValue {
            name: name.to_string(),
            op,
            value,
        })
        .collect()
}

/// Runs both pipelines on region `region` of the conventionally oriented image `img`.
pub fn invariance_experiment(
    img: &GreyImage,
    region: &RegionMask,
    mode: InvarianceMode,
    params: ExperimentParams,
) -> Result<InvarianceResult> {
    img.check_mask(region)?;
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let scale = img.scale();
    let criterion = mode.criterion();
    let ops = params.ops(mode);
    for op in &ops {
        op.validate(&scale)?;
    }

    // Real path. Only the region values matter, and brightening may leave the
    // scale on the white side, so the variants are computed on the values.
    let fc: Vec<f64> = region
        .indices()
        .map(|i| scale.max_level() - img.pixels()[i])
        .collect();
    for &v in &fc {
        scale.check_tone("complemented region value", v)?;
    }
    let base = RegionStats::from_values(fc.iter().copied()).ok_or(Error::EmptyRegion)?;
    if mode == InvarianceMode::Multiplicative && base.min == 0.0 {
        return Err(Error::InvalidParameter(
            "multiplicative invariance needs a region without white (zero) complemented tones"
                .into(),
        ));
    }
    let h_of = |op: Option<LipOp>| {
        let stats = match op {
            None => base,
            Some(op) => RegionStats::from_values(fc.iter().map(|&v| op.apply(&scale, v)))
                .expect("non-empty region"),
        };
        criterion.from_stats(scale, &stats)
    };
    let real = variants(ops, [h_of(None), h_of(Some(ops[0])), h_of(Some(ops[1]))]);
    let real_max_deviation = spread(&real);
    let real_tolerance = match mode {
        InvarianceMode::Additive => REAL_TOLERANCE * scale.m(),
        InvarianceMode::Multiplicative => {
            REAL_TOLERANCE * real.iter().map(|v| v.value.abs()).fold(0.0, f64::max)
        }
    };

    // 8-bit path.
    let q = quantize(img);
    let mut quantized_values = [0.0; 3];
    let mut saturated_in_region = false;
    quantized_values[0] = criterion.evaluate(&q.complement()?, region)?;
    for (slot, op) in quantized_values[1..].iter_mut().zip(ops) {
        let (out, saturated) = lip_transform_saturating(&q, op, true)?;
        saturated_in_region |= region.indices().any(|i| saturated.contains_index(i));
        *slot = criterion.evaluate(&quantize(&out).complement()?, region)?;
    }
    let quantized = variants(ops, quantized_values);
    let quantized_max_deviation = spread(&quantized);
    let q_inf = region
        .indices()
        .map(|i| scale.max_level() - q.pixels()[i])
        .fold(f64::INFINITY, f64::min);
    let quantized_skip_reason = if saturated_in_region {
        Some("brightening pins part of the region to white".to_string())
    } else if q_inf > QUANTIZED_DARK_LIMIT * scale.m() {
        Some(format!(
            "complemented infimum {q_inf} exceeds {QUANTIZED_DARK_LIMIT} M"
        ))
    } else {
        None
    };
    let quantized_checked = quantized_skip_reason.is_none();

    Ok(InvarianceResult {
        mode,
        criterion,
        params,
        real,
        real_max_deviation,
        real_tolerance,
        real_within_tolerance: real_max_deviation <= real_tolerance,
        quantized,
        quantized_max_deviation,
        quantized_tolerance: QUANTIZED_TOLERANCE,
        quantized_checked,
        quantized_skip_reason,
        quantized_within_tolerance: quantized_checked
            .then_some(quantized_max_deviation <= QUANTIZED_TOLERANCE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lip::GreyScale;

    #[test]
    fn constant_image_gives_neutral_triplets() {
        let img = GreyImage::filled(5, 4, GreyScale::default(), 60.0).unwrap();
        let region = RegionMask::full(5, 4);
        let p = ExperimentParams::default();
        let add = invariance_experiment(&img, &region, InvarianceMode::Additive, p).unwrap();
        assert!(add.real.iter().all(|v| v.value == 0.0));
        assert!(add.real_within_tolerance);
        let mul = invariance_experiment(&img, &region, InvarianceMode::Multiplicative, p).unwrap();
        assert!(mul.real.iter().all(|v| v.value == 1.0));
        assert_eq!(mul.quantized_within_tolerance, Some(true));
    }

    #[test]
    fn two_level_region() {
        // complemented tones 192 and 128
        let img = GreyImage::new(2, 1, GreyScale::default(), vec![63.0, 127.0]).unwrap();
        let region = RegionMask::full(2, 1);
        let p = ExperimentParams::default();
        let add = invariance_experiment(&img, &region, InvarianceMode::Additive, p).unwrap();
        for v in &add.real {
            assert!((v.value - 128.0).abs() <= 1e-9 * 256.0, "{v:?}");
        }
        let mul = invariance_experiment(&img, &region, InvarianceMode::Multiplicative, p).unwrap();
        for v in &mul.real {
            assert!((v.value - 2.0).abs() <= 1e-9 * 2.0, "{v:?}");
        }
    }

    #[test]
    fn brightening_past_white_skips_the_8bit_check() {
        // complemented tones 55 and 15, both below k
        let img = GreyImage::new(2, 1, GreyScale::default(), vec![200.0, 240.0]).unwrap();
        let region = RegionMask::full(2, 1);
        let r = invariance_experiment(
            &img,
            &region,
            InvarianceMode::Additive,
            ExperimentParams::default(),
        )
        .unwrap();
        assert!(r.real_within_tolerance);
        assert!(!r.quantized_checked);
        assert_eq!(r.quantized_within_tolerance, None);
    }

    #[test]
    fn preconditions() {
        let img = GreyImage::new(2, 1, GreyScale::default(), vec![255.0, 100.0]).unwrap();
        let p = ExperimentParams::default();
        assert!(matches!(
            invariance_experiment(&img, &RegionMask::empty(2, 1), InvarianceMode::Additive, p),
            Err(Error::EmptyRegion)
        ));
        assert!(invariance_experiment(
            &img,
            &RegionMask::full(2, 1),
            InvarianceMode::Multiplicative,
            p
        )
        .is_err());
        assert!(
            invariance_experiment(&img, &RegionMask::full(1, 1), InvarianceMode::Additive, p)
                .is_err()
        );
    }
}
