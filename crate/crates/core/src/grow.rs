//! Homogeneity-driven region growing.
//!
//! Starting from a homogeneous seed region `R_0`, each outer iteration dilates
//! the current region `R_n` by the structuring element into `D_{n+1}` and
//! measures its homogeneity `H`:
//!
//! 1. `H(D_{n+1}) <= t`: accept, `R_{n+1} = D_{n+1}`.
//! 2. otherwise *reduce*: keep only the pixels of `D_{n+1}` whose value lies in
//!    the dynamic range of `R_n`, giving `D'_{n+1}`;
//!    - (a) `H(D'_{n+1}) <= t`: *extend* `D'_{n+1}` by neighbouring pixels within
//!      one grey level (LIP difference) of its extremes that keep it homogeneous;
//!    - (b) otherwise *contract* `D'_{n+1}` by dropping extremal histogram
//!      classes until it is homogeneous.
//!
//! The loop stops when the region no longer grows or after `max_iterations`.
//! Pixels removed by reduce or contract can disconnect the region; only the
//! part connected to the seed is kept.
//!
//! All criteria are evaluated on the working image, which is the complement
//! `f^c` when [`GrowConfig::work_in_complement`] is set.

use serde::{Deserialize, Serialize};

use crate::criteria::{HomogeneityCriterion, RegionStats};
use crate::error::{Error, Result};
use crate::raster::{
    components_touching, dilate, dynamic_range, Connectivity, GreyImage, RegionMask,
    StructuringElement,
};

/// Largest LIP difference between a candidate pixel and the region extremes
/// for the candidate to be considered by the extension step.
const EXTENSION_TOLERANCE: f64 = 1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct GrowConfig {
    pub criterion: HomogeneityCriterion,
    pub threshold: f64,
    pub se: StructuringElement,
    pub connectivity: Connectivity,
    /// `None` means `10 * max(width, height)`.
    pub max_iterations: Option<usize>,
    pub work_in_complement: bool,
}

impl GrowConfig {
    /// 3×3 square, 4-connectivity, complement domain.
    pub fn new(criterion: HomogeneityCriterion, threshold: f64) -> Self {
        GrowConfig {
            criterion,
            threshold,
            se: StructuringElement::default(),
            connectivity: Connectivity::Four,
            max_iterations: None,
            work_in_complement: true,
        }
    }

    /// The configuration used by the experiments for a LIP criterion.
    pub fn with_default_threshold(criterion: HomogeneityCriterion) -> Result<Self> {
        let t = criterion.default_threshold().ok_or_else(|| {
            Error::InvalidParameter(format!("criterion {criterion} has no default threshold"))
        })?;
        Ok(Self::new(criterion, t))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold must be positive, got {}",
                self.threshold
            )));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn iteration_limit(&self, width: usize, height: usize) -> usize {
        self.max_iterations.unwrap_or(10 * width.max(height))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    /// The dilated region was homogeneous and accepted as is.
    Grow,
    /// Reduction alone: the reduced region was homogeneous but extension added nothing.
    Reduce,
    /// Reduction followed by extension.
    Extend,
    /// Reduction followed by contraction.
    Contract,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub step: Step,
    /// `|D_{n+1}|`
    pub dilated_size: usize,
    /// `|D'_{n+1}|` when a reduction took place.
    pub reduced_size: Option<usize>,
    /// `|R_{n+1}|`
    pub region_size: usize,
    /// `H(R_{n+1})`
    pub criterion: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GrowTrace {
    pub entries: Vec<TraceEntry>,
}

impl GrowTrace {
    /// `|R_n|` after each outer iteration.
    pub fn region_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.region_size)
    }

    pub fn is_monotone(&self) -> bool {
        self.entries
            .windows(2)
            .all(|w| w[0].region_size <= w[1].region_size)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowOutcome {
    pub region: RegionMask,
    pub trace: GrowTrace,
    /// Criterion of the final region on the working image.
    pub criterion: f64,
    /// Criterion of the seed region on the working image.
    pub seed_criterion: f64,
}

impl GrowOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.entries.len()
    }
}

/// The image the criteria are evaluated on under `cfg`.
pub fn working_image(img: &GreyImage, cfg: &GrowConfig) -> Result<GreyImage> {
    let work = if cfg.work_in_complement {
        img.complement()?
    } else {
        img.clone()
    };
    if cfg.criterion.is_lip() {
        work.check_on_scale("LIP homogeneity")?;
    }
    Ok(work)
}

/// Grows `seed` on `img` under `cfg`.
pub fn grow(img: &GreyImage, seed: &RegionMask, cfg: &GrowConfig) -> Result<GrowOutcome> {
    cfg.validate()?;
    img.check_mask(seed)?;
    if seed.is_empty() {
        return Err(Error::EmptySeed);
    }
    let work = working_image(img, cfg)?;
    let scale = work.scale();
    let h = |m: &RegionMask| -> Result<f64> {
        Ok(cfg
            .criterion
            .from_stats(scale, &RegionStats::collect(&work, m)?))
    };
    let t = cfg.threshold;

    let seed_criterion = h(seed)?;
    if seed_criterion > t {
        return Err(Error::SeedNotHomogeneous {
            value: seed_criterion,
            threshold: t,
        });
    }

    let mut region = seed.clone();
    let mut current = seed_criterion;
    let mut trace = GrowTrace::default();
    let limit = cfg.iteration_limit(work.width(), work.height());

    for iteration in 1..=limit {
        let dilated = dilate(&region, &cfg.se);
        if dilated == region {
            break;
        }
        let dilated_size = dilated.count();
        let h_dilated = h(&dilated)?;

        let (next, step, reduced_size) = if h_dilated <= t {
            (dilated, Step::Grow, None)
        } else {
            let reduced = reduce(&work, &dilated, &region, cfg.connectivity)?;
            let reduced_size = Some(reduced.count());
            if h(&reduced)? <= t {
                let extended = extend(&work, &reduced, cfg)?;
                let step = if extended == reduced {
                    Step::Reduce
                } else {
                    Step::Extend
                };
                (extended, step, reduced_size)
            } else {
                // Reduction keeps exactly the dynamic range of the accepted
                // region, so this branch only triggers through rounding.
                match contract(&work, &reduced, seed, cfg) {
                    Ok(c) if region.is_subset_of(&c) => (c, Step::Contract, reduced_size),
                    _ => (region.clone(), Step::Contract, reduced_size),
                }
            }
        };

        let grew = next.count() > region.count();
        if grew {
            current = h(&next)?;
        }
        trace.entries.push(TraceEntry {
            iteration,
            step,
            dilated_size,
            reduced_size,
            region_size: next.count(),
            criterion: current,
        });
        region = next;
        if !grew {
            break;
        }
    }

    Ok(GrowOutcome {
        region,
        trace,
        criterion: current,
        seed_criterion,
    })
}

/// Keeps the pixels of `grown` whose value lies in the dynamic range of
/// `prev`, then the part of them connected to `prev`.
///
/// Operates directly on `img` (the working image).
pub fn reduce(
    img: &GreyImage,
    grown: &RegionMask,
    prev: &RegionMask,
    connectivity: Connectivity,
) -> Result<RegionMask> {
    img.check_mask(grown)?;
    if !prev.is_subset_of(grown) {
        return Err(Error::InvalidParameter(
            "reduction needs the previous region inside the grown one".into(),
        ));
    }
    let range = dynamic_range(img, prev)?;
    let px = img.pixels();
    let (w, h) = img.dims();
    let kept = RegionMask::from_fn(w, h, |x, y| {
        let i = y * w + x;
        grown.contains_index(i) && range.contains(px[i])
    });
    Ok(components_touching(&kept, prev, connectivity))
}

/// Adds neighbouring pixels whose value is within one grey level, in the LIP
/// sense, of the current region maximum or minimum, as long as the region
/// stays homogeneous. Pixels are visited in raster order, pass after pass,
/// until a pass admits nothing.
///
/// Operates directly on `img` (the working image).
pub fn extend(img: &GreyImage, region: &RegionMask, cfg: &GrowConfig) -> Result<RegionMask> {
    let mut stats = RegionStats::collect(img, region)?;
    let scale = img.scale();
    let (w, h) = img.dims();
    let px = img.pixels();
    let mut out = region.clone();

    loop {
        let mut admitted = false;
        for (i, &v) in px.iter().enumerate() {
            if out.contains_index(i) {
                continue;
            }
            let mut touches = false;
            cfg.connectivity
                .for_each_neighbour(i, w, h, |n| touches |= out.contains_index(n));
            if !touches {
                continue;
            }
            let near_max = scale.sub_unchecked(v, stats.max).abs() <= EXTENSION_TOLERANCE;
            let near_min = scale.sub_unchecked(v, stats.min).abs() <= EXTENSION_TOLERANCE;
            if !(near_max || near_min) {
                continue;
            }
            let candidate = stats.with(v);
            if cfg.criterion.from_stats(scale, &candidate) <= cfg.threshold {
                out.set_index(i, true);
                stats = candidate;
                admitted = true;
            }
        }
        if !admitted {
            return Ok(out);
        }
    }
}

/// Removes extremal histogram classes (unit-width bins) from `region` until it
/// is homogeneous, then keeps the part connected to `seed`.
///
/// At each step the side whose removal lowers the criterion most is dropped,
/// the maximum side on ties. A class holding a seed pixel is never dropped;
/// if only such classes remain and the region is still inhomogeneous the
/// contraction fails.
///
/// Operates directly on `img` (the working image).
pub fn contract(
    img: &GreyImage,
    region: &RegionMask,
    seed: &RegionMask,
    cfg: &GrowConfig,
) -> Result<RegionMask> {
    img.check_mask(region)?;
    img.check_mask(seed)?;
    if seed.is_empty() {
        return Err(Error::EmptySeed);
    }
    if !seed.is_subset_of(region) {
        return Err(Error::InvalidParameter(
            "contraction needs the seed inside the region".into(),
        ));
    }
    let scale = img.scale();
    let px = img.pixels();
    let class_of = |v: f64| v.floor() as i64;

    // per-class statistics in increasing class order
    let mut members: Vec<(i64, f64)> = region.indices().map(|i| (class_of(px[i]), px[i])).collect();
    members.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut classes: Vec<(i64, RegionStats)> = Vec::new();
    for (c, v) in members {
        match classes.last_mut() {
            Some((k, s)) if *k == c => s.push(v),
            _ => classes.push((c, RegionStats::new(v))),
        }
    }
    let seed_class: Vec<bool> = {
        let seeded: Vec<i64> = seed.indices().map(|i| class_of(px[i])).collect();
        classes.iter().map(|(c, _)| seeded.contains(c)).collect()
    };
    let span_stats = |lo: usize, hi: usize| -> RegionStats {
        let mut s = classes[lo].1;
        for (_, c) in &classes[lo + 1..=hi] {
            s.merge(c);
        }
        s
    };
    let h = |s: &RegionStats| cfg.criterion.from_stats(scale, s);

    let (mut lo, mut hi) = (0, classes.len() - 1);
    loop {
        let value = h(&span_stats(lo, hi));
        if value <= cfg.threshold {
            break;
        }
        let can_drop_min = lo < hi && !seed_class[lo];
        let can_drop_max = lo < hi && !seed_class[hi];
        match (can_drop_min, can_drop_max) {
            (false, false) => {
                return Err(Error::DegenerateContraction {
                    value,
                    threshold: cfg.threshold,
                })
            }
            (true, false) => lo += 1,
            (false, true) => hi -= 1,
            (true, true) => {
                let without_min = h(&span_stats(lo + 1, hi));
                let without_max = h(&span_stats(lo, hi - 1));
                if without_min < without_max {
                    lo += 1;
                } else {
                    hi -= 1;
                }
            }
        }
    }

    let (lo_class, hi_class) = (classes[lo].0, classes[hi].0);
    let (w, hgt) = img.dims();
    let kept = RegionMask::from_fn(w, hgt, |x, y| {
        let i = y * w + x;
        region.contains_index(i) && (lo_class..=hi_class).contains(&class_of(px[i]))
    });
    Ok(components_touching(&kept, seed, cfg.connectivity))
}
