//! Logarithmic Image Processing (LIP) arithmetic, lighting-invariant region
//! homogeneity criteria, a homogeneity-driven region grower and a max-tree
//! segmentation baseline.

pub mod cli;
pub mod criteria;
pub mod ctree;
pub mod error;
pub mod grow;
pub mod lip;
pub mod raster;

pub use criteria::{HomogeneityCriterion, RegionStats};
pub use error::{Error, Result};
pub use lip::GreyScale;
pub use raster::{Connectivity, GreyImage, RegionMask, StructuringElement};
