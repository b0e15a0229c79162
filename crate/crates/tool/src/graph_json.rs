//! JSON dump of a labeling graph.

use polycube_core::{LabelingGraph, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartEntry {
    pub id: usize,
    /// Label value, `0..=5` for `+X, -X, +Y, -Y, +Z, -Z`.
    pub label: u8,
    pub label_name: String,
    pub size: usize,
    pub valence: usize,
    pub surrounded_by_feature_edges: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEntry {
    pub id: usize,
    /// `X`, `Y`, `Z`, or null when the two charts share an axis.
    pub axis: Option<String>,
    /// Number of mesh edges.
    pub length: usize,
    pub charts: [usize; 2],
    pub start_corner: Option<usize>,
    pub end_corner: Option<usize>,
    pub on_feature_edges: bool,
    pub turning_points: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CornerEntry {
    pub id: usize,
    pub vertex: usize,
    pub valence: usize,
    pub boundaries: Vec<usize>,
    pub boundary_axes: Vec<Option<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDump {
    pub schema_version: u32,
    pub charts: Vec<ChartEntry>,
    pub boundaries: Vec<BoundaryEntry>,
    pub corners: Vec<CornerEntry>,
}

impl GraphDump {
    pub fn new(graph: &LabelingGraph) -> GraphDump {
        let axis = |b: usize| graph.boundaries[b].axis.map(|a| a.name().to_string());
        GraphDump {
            schema_version: SCHEMA_VERSION,
            charts: graph
                .charts
                .iter()
                .map(|c| ChartEntry {
                    id: c.id,
                    label: c.label.value(),
                    label_name: c.label.to_string(),
                    size: c.triangles.len(),
                    valence: c.valence(),
                    surrounded_by_feature_edges: c.surrounded_by_feature_edges,
                })
                .collect(),
            boundaries: graph
                .boundaries
                .iter()
                .map(|b| BoundaryEntry {
                    id: b.id,
                    axis: axis(b.id),
                    length: b.edges.len(),
                    charts: [b.left_chart, b.right_chart],
                    start_corner: b.start_corner,
                    end_corner: b.end_corner,
                    on_feature_edges: b.on_feature_edges,
                    turning_points: b.turning_points.len(),
                })
                .collect(),
            corners: graph
                .corners
                .iter()
                .map(|c| CornerEntry {
                    id: c.id,
                    vertex: c.vertex,
                    valence: c.valence(),
                    boundaries: c.boundaries.clone(),
                    boundary_axes: c.boundaries.iter().map(|&b| axis(b)).collect(),
                })
                .collect(),
        }
    }
}
