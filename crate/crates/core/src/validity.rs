//! Validity criteria for charts, boundaries and corners.

use alloc::vec::Vec;

use crate::graph::LabelingGraph;
use crate::labeling::Axis;
use crate::mesh::SurfaceMesh;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum CornerRule {
    /// Exactly three incident boundaries with three distinct axes.
    Legacy,
    /// An XYZ trio, or incident axes that group in pairs.
    #[default]
    Improved,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidityConfig {
    /// Admit boundaries between opposite labels along reflex edges.
    pub allow_opposite_labels: bool,
    /// Fraction of reflex edges required along such a boundary, in [0, 1].
    pub reflex_fraction: f64,
    pub corner_rule: CornerRule,
}

impl Default for ValidityConfig {
    fn default() -> Self {
        ValidityConfig { allow_opposite_labels: true, reflex_fraction: 1.0, corner_rule: CornerRule::Improved }
    }
}

impl ValidityConfig {
    /// Criteria without the reflex exception and with the legacy corner rule.
    pub fn legacy() -> Self {
        ValidityConfig { allow_opposite_labels: false, reflex_fraction: 1.0, corner_rule: CornerRule::Legacy }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidityReport {
    pub invalid_charts: Vec<usize>,
    pub invalid_boundaries: Vec<usize>,
    pub invalid_corners: Vec<usize>,
    pub is_valid: bool,
    pub charts: usize,
    pub boundaries: usize,
    pub corners: usize,
    pub turning_points: usize,
}

/// `(#charts, #boundaries, #corners, #invalid charts, #invalid boundaries,
/// #invalid corners, #turning-points)`.
pub type StateTuple = [usize; 7];

impl ValidityReport {
    pub fn state(&self) -> StateTuple {
        [
            self.charts,
            self.boundaries,
            self.corners,
            self.invalid_charts.len(),
            self.invalid_boundaries.len(),
            self.invalid_corners.len(),
            self.turning_points,
        ]
    }

    pub fn invalid_count(&self) -> usize {
        self.invalid_charts.len() + self.invalid_boundaries.len() + self.invalid_corners.len()
    }
}

pub fn chart_valid(graph: &LabelingGraph, chart: usize) -> bool {
    graph.charts[chart].valence() >= 4
}

/// Share of the boundary's edges whose interior dihedral exceeds π.
pub fn reflex_fraction(mesh: &SurfaceMesh, graph: &LabelingGraph, boundary: usize) -> f64 {
    let edges = &graph.boundaries[boundary].edges;
    if edges.is_empty() {
        return 0.0;
    }
    let reflex = edges.iter().filter(|&&e| mesh.dihedral(e).is_reflex()).count();
    reflex as f64 / edges.len() as f64
}

pub fn boundary_valid(mesh: &SurfaceMesh, graph: &LabelingGraph, boundary: usize, config: &ValidityConfig) -> bool {
    let b = &graph.boundaries[boundary];
    let (l, r) = (graph.charts[b.left_chart].label, graph.charts[b.right_chart].label);
    if l.axis() != r.axis() {
        return true;
    }
    config.allow_opposite_labels && reflex_fraction(mesh, graph, boundary) >= config.reflex_fraction
}

/// Corner rule on the incident boundary axes; `None` (same-axis boundary)
/// makes the corner invalid.
pub fn corner_axes_valid(axes: &[Option<Axis>], rule: CornerRule) -> bool {
    let mut counts = [0usize; 3];
    for a in axes {
        match a {
            Some(a) => counts[a.index()] += 1,
            None => return false,
        }
    }
    let trio = axes.len() == 3 && counts == [1, 1, 1];
    match rule {
        CornerRule::Legacy => trio,
        CornerRule::Improved => {
            trio || (counts.iter().all(|c| c % 2 == 0) && counts.iter().filter(|&&c| c > 0).count() >= 2)
        }
    }
}

pub fn corner_axes(graph: &LabelingGraph, corner: usize) -> Vec<Option<Axis>> {
    graph.corners[corner].boundaries.iter().map(|&b| graph.boundaries[b].axis).collect()
}

pub fn corner_valid(graph: &LabelingGraph, corner: usize, config: &ValidityConfig) -> bool {
    corner_axes_valid(&corner_axes(graph, corner), config.corner_rule)
}

pub fn validate_labeling(mesh: &SurfaceMesh, graph: &LabelingGraph, config: &ValidityConfig) -> ValidityReport {
    let invalid_charts: Vec<usize> = (0..graph.charts.len()).filter(|&c| !chart_valid(graph, c)).collect();
    let invalid_boundaries: Vec<usize> =
        (0..graph.boundaries.len()).filter(|&b| !boundary_valid(mesh, graph, b, config)).collect();
    let invalid_corners: Vec<usize> = (0..graph.corners.len()).filter(|&c| !corner_valid(graph, c, config)).collect();
    let is_valid = invalid_charts.is_empty() && invalid_boundaries.is_empty() && invalid_corners.is_empty();
    ValidityReport {
        invalid_charts,
        invalid_boundaries,
        invalid_corners,
        is_valid,
        charts: graph.charts.len(),
        boundaries: graph.boundaries.len(),
        corners: graph.corners.len(),
        turning_points: graph.turning_point_count(),
    }
}
