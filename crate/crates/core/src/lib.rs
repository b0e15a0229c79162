//! Polycube labeling of closed triangle meshes.
//!
//! A labeling assigns every triangle one of the six signed axes. This crate
//! builds the chart / boundary / corner graph of a labeling, checks it
//! against polycube validity criteria, computes initial labelings with a
//! tie-aware graph-cut, and repairs labelings with a set of operators driven
//! by a validity routine followed by a monotonicity routine.
//!
//! The crate is `no_std` (it needs `alloc`); file formats and the CLI live
//! in `polycube-tool`.

#![no_std]

extern crate alloc;

pub mod geom;
pub mod graph;
pub mod labeling;
pub mod maxflow;
pub mod mesh;
pub mod operators;
pub mod optimizer;
pub mod pipeline;
pub mod report;
pub mod shapes;
pub mod validity;

pub use geom::Vec3;
pub use graph::{build_labeling_graph, Boundary, Chart, Corner, LabelingGraph, TurningPointParams};
pub use labeling::{
    feature_edge_metrics, fidelity, naive_labeling, nearest_label, Axis, FeatureEdgeStats, FidelityStats, Label, LabelError,
    LabelSet, Labeling,
};
pub use mesh::{interior_dihedral, DihedralInfo, MeshError, SurfaceMesh};
pub use optimizer::{alpha_expansion, tweaked_graphcut_labeling, EnergyProblem, GraphCutParams, SmoothnessMode};
pub use operators::{OperatorError, OperatorKind, OperatorOutcome};
pub use pipeline::{
    apply_operator, routine_monotonicity, routine_validity, run_pipeline, Clock, InitialLabeling, LogEntry, NoClock,
    PipelineOutput, PipelineParams, PipelineState, Routine,
};
pub use report::{compute_report, Durations, MetricsReport, Status, SCHEMA_VERSION};
pub use validity::{validate_labeling, CornerRule, ValidityConfig, ValidityReport};
