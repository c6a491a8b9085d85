//! Binary dilation and connected-component selection on region masks.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::mask::RegionMask;

/// Pixel adjacency used by every connected-component computation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Connectivity {
    #[default]
    #[serde(rename = "4")]
    Four,
    #[serde(rename = "8")]
    Eight,
}

const FOUR: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
const EIGHT: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

impl Connectivity {
    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }

    /// Calls `f` with the linear index of every in-bounds neighbour of `idx`.
    #[inline]
    pub(crate) fn for_each_neighbour(
        self,
        idx: usize,
        width: usize,
        height: usize,
        mut f: impl FnMut(usize),
    ) {
        let (x, y) = ((idx % width) as isize, (idx / width) as isize);
        for &(dx, dy) in self.offsets() {
            let (nx, ny) = (x + dx, y + dy);
            if nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height {
                f(ny as usize * width + nx as usize);
            }
        }
    }
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Connectivity::Four => f.write_str("4"),
            Connectivity::Eight => f.write_str("8"),
        }
    }
}

impl FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "4" => Ok(Connectivity::Four),
            "8" => Ok(Connectivity::Eight),
            _ => Err(Error::InvalidParameter(format!(
                "connectivity must be 4 or 8, got {s:?}"
            ))),
        }
    }
}

/// A flat structuring element given by its integer displacements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuringElement {
    offsets: Vec<(isize, isize)>,
}

impl Default for StructuringElement {
    fn default() -> Self {
        Self::square(3).expect("3 is odd")
    }
}

impl StructuringElement {
    pub fn new(offsets: Vec<(isize, isize)>) -> Result<Self> {
        if !offsets.contains(&(0, 0)) {
            return Err(Error::InvalidParameter(
                "structuring element must contain the origin".into(),
            ));
        }
        let mut offsets = offsets;
        offsets.sort_unstable();
        offsets.dedup();
        Ok(StructuringElement { offsets })
    }

    /// Centred square of odd side length.
    pub fn square(side: usize) -> Result<Self> {
        if side.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "square structuring element needs an odd side, got {side}"
            )));
        }
        let r = (side / 2) as isize;
        let offsets = (-r..=r)
            .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
            .collect();
        Self::new(offsets)
    }

    /// The origin and its four direct neighbours.
    pub fn cross() -> Self {
        Self::new(vec![(0, 0), (0, -1), (-1, 0), (1, 0), (0, 1)]).expect("contains origin")
    }

    pub fn offsets(&self) -> &[(isize, isize)] {
        &self.offsets
    }

    pub fn is_symmetric(&self) -> bool {
        self.offsets
            .iter()
            .all(|&(dx, dy)| self.offsets.contains(&(-dx, -dy)))
    }
}

impl FromStr for StructuringElement {
    type Err = Error;

    /// Accepts `NxN` for odd `N`, or `cross`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "cross" {
            return Ok(Self::cross());
        }
        let bad = || Error::InvalidParameter(format!("unrecognised structuring element {s:?}"));
        let (a, b) = s.split_once('x').ok_or_else(bad)?;
        let a: usize = a.parse().map_err(|_| bad())?;
        let b: usize = b.parse().map_err(|_| bad())?;
        if a != b {
            return Err(bad());
        }
        Self::square(a)
    }
}

/// Minkowski dilation `mask ⊕ se`, clipped to the image support.
pub fn dilate(mask: &RegionMask, se: &StructuringElement) -> RegionMask {
    let (w, h) = mask.dims();
    let mut out = RegionMask::empty(w, h);
    for i in mask.indices() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for &(dx, dy) in se.offsets() {
            let (nx, ny) = (x + dx, y + dy);
            if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                out.set_index(ny as usize * w + nx as usize, true);
            }
        }
    }
    out
}

/// The pixels of `mask` connected (inside `mask`) to at least one pixel of `anchors`.
pub fn components_touching(
    mask: &RegionMask,
    anchors: &RegionMask,
    connectivity: Connectivity,
) -> RegionMask {
    let (w, h) = mask.dims();
    let mut out = RegionMask::empty(w, h);
    let mut queue = VecDeque::new();
    for i in anchors.indices() {
        if mask.contains_index(i) && !out.contains_index(i) {
            out.set_index(i, true);
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        connectivity.for_each_neighbour(i, w, h, |n| {
            if mask.contains_index(n) && !out.contains_index(n) {
                out.set_index(n, true);
                queue.push_back(n);
            }
        });
    }
    out
}
