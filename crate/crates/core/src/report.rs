//! Labeling quality report.

use alloc::string::String;

use crate::graph::LabelingGraph;
use crate::labeling::{feature_edge_metrics, fidelity, FeatureEdgeStats, Labeling};
use crate::mesh::SurfaceMesh;
use crate::validity::{validate_labeling, ValidityConfig, ValidityReport};

/// Bumped whenever the serialized layout of [`MetricsReport`] changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Status {
    ValidAllMonotone,
    ValidWithTurningPoints,
    Invalid,
    /// Internal error; the labeling is a fallback.
    Failed,
}

impl Status {
    pub fn from_validity(report: &ValidityReport) -> Status {
        match (report.is_valid, report.turning_points) {
            (false, _) => Status::Invalid,
            (true, 0) => Status::ValidAllMonotone,
            (true, _) => Status::ValidWithTurningPoints,
        }
    }

    pub fn is_valid(self) -> bool {
        matches!(self, Status::ValidAllMonotone | Status::ValidWithTurningPoints)
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::ValidAllMonotone => "valid-all-monotone",
            Status::ValidWithTurningPoints => "valid-with-turning-points",
            Status::Invalid => "invalid",
            Status::Failed => "failed",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FidelitySummary {
    pub min: f64,
    pub area_weighted: f64,
    pub uniform: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComponentCounts {
    pub charts: usize,
    pub boundaries: usize,
    pub corners: usize,
    pub invalid_charts: usize,
    pub invalid_boundaries: usize,
    pub invalid_corners: usize,
}

/// Wall-clock seconds per stage. Kept apart from the other fields since
/// they vary between runs.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Durations {
    pub initial_labeling: f64,
    pub validity_routine: f64,
    pub monotonicity_routine: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub schema_version: u32,
    pub status: Status,
    pub fidelity: FidelitySummary,
    pub feature_edges: FeatureEdgeStats,
    pub components: ComponentCounts,
    pub turning_points: usize,
    pub operators_applied: usize,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub error: Option<String>,
    pub durations: Durations,
}

impl MetricsReport {
    /// Copy with durations zeroed, for comparisons across runs.
    pub fn without_durations(&self) -> MetricsReport {
        MetricsReport { durations: Durations::default(), ..self.clone() }
    }
}

pub fn compute_report(
    mesh: &SurfaceMesh,
    labeling: &Labeling,
    graph: &LabelingGraph,
    config: &ValidityConfig,
    durations: Durations,
) -> MetricsReport {
    let validity = validate_labeling(mesh, graph, config);
    let f = fidelity(mesh, labeling);
    MetricsReport {
        schema_version: SCHEMA_VERSION,
        status: Status::from_validity(&validity),
        fidelity: FidelitySummary { min: f.min, area_weighted: f.area_weighted, uniform: f.uniform },
        feature_edges: feature_edge_metrics(mesh, labeling),
        components: ComponentCounts {
            charts: validity.charts,
            boundaries: validity.boundaries,
            corners: validity.corners,
            invalid_charts: validity.invalid_charts.len(),
            invalid_boundaries: validity.invalid_boundaries.len(),
            invalid_corners: validity.invalid_corners.len(),
        },
        turning_points: validity.turning_points,
        operators_applied: 0,
        error: None,
        durations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TurningPointParams;
    use crate::labeling::{naive_labeling, Label};
    use crate::shapes;

    #[test]
    fn naive_cube_report() {
        let mesh = shapes::cube(2);
        let l = naive_labeling(&mesh);
        let g = LabelingGraph::build(&mesh, &l, &TurningPointParams::default());
        let r = compute_report(&mesh, &l, &g, &ValidityConfig::default(), Durations::default());
        assert_eq!(r.status, Status::ValidAllMonotone);
        assert_eq!(r.fidelity.area_weighted, 1.0);
        assert_eq!(r.components.corners, 8);
        assert_eq!(r.turning_points, 0);
        // Only the 12 cube edges are sharp; cell edges are flat.
        assert_eq!((r.feature_edges.preserved, r.feature_edges.lost), (24, 0));
    }

    #[test]
    fn constant_labeling_report() {
        let mesh = shapes::cube(1);
        let l = Labeling::constant(mesh.triangle_count(), Label::NEG_X);
        let g = LabelingGraph::build(&mesh, &l, &TurningPointParams::default());
        let r = compute_report(&mesh, &l, &g, &ValidityConfig::default(), Durations::default());
        assert_eq!(r.status, Status::Invalid);
        assert_eq!(r.components.charts, 1);
    }
}
