use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::criteria::HomogeneityCriterion;
use crate::error::{Error, Result};
use crate::grow::TraceEntry;
use crate::raster::{Connectivity, LipOp};

use super::experiment::InvarianceResult;

/// The JSON record every command emits. Fields that do not apply to a command
/// are left out.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SegmentationReport {
    pub command: String,
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<LipOp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<HomogeneityCriterion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<[usize; 2]>,
    /// Size of the user region `G` (segment-ct).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marker_pixels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connectivity: Option<Connectivity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structuring_element: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complement: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_criterion_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_pixels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub false_positives: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub false_negatives: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariance: Option<InvarianceResult>,
}

impl SegmentationReport {
    pub fn new(command: &str, inputs: &[&Path]) -> Self {
        SegmentationReport {
            command: command.to_string(),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(format!("report: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}
