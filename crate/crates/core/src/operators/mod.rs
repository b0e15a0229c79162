//! Labeling repair operators.
//!
//! Every operator takes the mesh, a labeling and its graph plus a target,
//! and returns a new labeling. The graph is not updated; callers rebuild it.

mod straighten;
mod turning;
mod valence;
mod validity_ops;

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::geom::Vec3;
use crate::graph::LabelingGraph;
use crate::labeling::{triangle_fidelity, Label, Labeling};
use crate::mesh::SurfaceMesh;
use crate::optimizer::OptimizeError;

pub use straighten::straighten_boundary;
pub use turning::{join_turning_points_pair, lost_feature_path, move_boundary_near_turning_point, pull_closest_corner};
pub use valence::increase_chart_valence;
pub use validity_ops::{fix_invalid_boundary, fix_invalid_corner, remove_chart};

/// Default width of inserted charts, in triangle rings.
pub const DEFAULT_WIDTH: usize = 3;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum OperatorError {
    #[error("{kind} {id} does not exist")]
    UnknownTarget { kind: &'static str, id: usize },
    #[error("{0} takes two targets")]
    SecondTargetMissing(OperatorKind),
    #[error("radius exceeds adjacent charts")]
    RadiusExceedsCharts,
    #[error("width and radius must be at least 1")]
    ZeroWidth,
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum OperatorKind {
    IncreaseChartValence,
    FixInvalidBoundary,
    FixInvalidCorner,
    RemoveChart,
    JoinTurningPointsPair,
    PullClosestCorner,
    MoveBoundaryNearTurningPoint,
    StraightenBoundary,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 8] = [
        OperatorKind::IncreaseChartValence,
        OperatorKind::FixInvalidBoundary,
        OperatorKind::FixInvalidCorner,
        OperatorKind::RemoveChart,
        OperatorKind::JoinTurningPointsPair,
        OperatorKind::PullClosestCorner,
        OperatorKind::MoveBoundaryNearTurningPoint,
        OperatorKind::StraightenBoundary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::IncreaseChartValence => "increase-chart-valence",
            OperatorKind::FixInvalidBoundary => "fix-invalid-boundary",
            OperatorKind::FixInvalidCorner => "fix-invalid-corner",
            OperatorKind::RemoveChart => "remove-chart",
            OperatorKind::JoinTurningPointsPair => "join-turning-points-pair",
            OperatorKind::PullClosestCorner => "pull-closest-corner",
            OperatorKind::MoveBoundaryNearTurningPoint => "move-boundary-near-turning-point",
            OperatorKind::StraightenBoundary => "straighten-boundary",
        }
    }

    pub fn from_name(name: &str) -> Option<OperatorKind> {
        OperatorKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl core::fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorOutcome {
    pub labeling: Labeling,
    /// Sorted triangles whose label changed.
    pub changed: Vec<usize>,
    pub applied: bool,
}

impl OperatorOutcome {
    pub fn unchanged(labeling: &Labeling) -> Self {
        OperatorOutcome { labeling: labeling.clone(), changed: Vec::new(), applied: false }
    }

    /// Outcome of replacing `before` by `after`; not applied when equal.
    pub fn between(before: &Labeling, after: Labeling) -> Self {
        let changed = before.diff(&after);
        let applied = !changed.is_empty();
        OperatorOutcome { labeling: after, changed, applied }
    }

    /// Relabel `triangles` to `label`.
    pub fn relabel(before: &Labeling, triangles: &[usize], label: Label) -> Self {
        let mut after = before.clone();
        for &t in triangles {
            after[t] = label;
        }
        OperatorOutcome::between(before, after)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Termination {
    HitCorner,
    HitBoundary,
    HitTurningPoint,
    HitFeatureEdge,
    MaxSteps,
    /// No admissible edge progresses toward the goal.
    DeadEnd,
}

/// Vertex path traced on the mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct TracedPath {
    /// `edges.len() + 1` vertices.
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub termination: Termination,
}

impl TracedPath {
    pub fn end(&self) -> usize {
        *self.vertices.last().unwrap()
    }

    /// Ended on existing structure rather than running out of room.
    pub fn reached_terminus(&self) -> bool {
        !matches!(self.termination, Termination::MaxSteps | Termination::DeadEnd) && !self.edges.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct TraceOptions {
    pub stop_at_features: bool,
}

/// Bonus that keeps a trace on existing boundary or feature paths.
const REUSE_BONUS: f64 = 0.1;

/// Greedy edge-by-edge walk from `start` along `dir`. Each step takes the
/// admissible edge to an unvisited vertex with the best alignment to `dir`;
/// boundary and feature edges get a small bonus so existing paths are
/// reused. The walk stops at corners, turning-points, or when it reaches a
/// boundary vertex through a non-boundary edge.
pub(crate) fn trace_path(
    mesh: &SurfaceMesh,
    graph: &LabelingGraph,
    start: usize,
    dir: Vec3,
    admissible: &dyn Fn(usize) -> bool,
    options: TraceOptions,
) -> TracedPath {
    let tps: BTreeSet<usize> = graph.turning_points().into_iter().map(|(_, v)| v).collect();
    let mut path = TracedPath { vertices: vec![start], edges: Vec::new(), termination: Termination::MaxSteps };
    let mut visited = BTreeSet::from([start]);
    let mut cur = start;
    for _ in 0..mesh.edge_count() {
        let p = mesh.vertex(cur);
        let mut best: Option<(f64, usize, usize)> = None;
        for e in mesh.vertex_edges(cur) {
            let w = mesh.edge(e).other_vertex(cur);
            if visited.contains(&w) || !admissible(e) {
                continue;
            }
            let Some(u) = (mesh.vertex(w) - p).normalized() else { continue };
            let align = u.dot(dir);
            if align <= 0.0 {
                continue;
            }
            let on_path = graph.boundary_of_edge(e).is_some() || mesh.is_feature_edge(e);
            let score = align + if on_path && align > 0.9 { REUSE_BONUS } else { 0.0 };
            if best.is_none_or(|(s, _, _)| score > s) {
                best = Some((score, e, w));
            }
        }
        let Some((_, e, w)) = best else {
            path.termination = Termination::DeadEnd;
            return path;
        };
        path.edges.push(e);
        path.vertices.push(w);
        visited.insert(w);
        cur = w;
        let along_boundary = graph.boundary_of_edge(e).is_some();
        if graph.corner_at(w).is_some() {
            path.termination = Termination::HitCorner;
            return path;
        }
        if tps.contains(&w) {
            path.termination = Termination::HitTurningPoint;
            return path;
        }
        if !along_boundary && graph.is_on_boundary(w) {
            path.termination = Termination::HitBoundary;
            return path;
        }
        if options.stop_at_features && !mesh.is_feature_edge(e) && mesh.is_on_feature(w) {
            path.termination = Termination::HitFeatureEdge;
            return path;
        }
    }
    path
}

/// Triangles reachable from `seeds` through edges not in `barrier`,
/// staying inside `inside`. Sorted.
pub(crate) fn flood_fill(
    mesh: &SurfaceMesh,
    seeds: &[usize],
    inside: &dyn Fn(usize) -> bool,
    barrier: &BTreeSet<usize>,
) -> Vec<usize> {
    let mut seen = vec![false; mesh.triangle_count()];
    let mut queue = VecDeque::new();
    for &s in seeds {
        if inside(s) && !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(t) = queue.pop_front() {
        for k in 0..3 {
            let nb = mesh.triangle_adjacency(t)[k];
            if !seen[nb] && inside(nb) && !barrier.contains(&mesh.triangle_edges(t)[k]) {
                seen[nb] = true;
                queue.push_back(nb);
            }
        }
    }
    (0..mesh.triangle_count()).filter(|&t| seen[t]).collect()
}

/// Triangles within `rings` vertex rings of `seed_vertices`, restricted to
/// `inside`. Ring 1 is the triangles incident to the seeds. Sorted.
pub(crate) fn vertex_rings(
    mesh: &SurfaceMesh,
    seed_vertices: &[usize],
    rings: usize,
    inside: &dyn Fn(usize) -> bool,
) -> Vec<usize> {
    let mut in_region = vec![false; mesh.triangle_count()];
    let mut seen_vertex = vec![false; mesh.vertex_count()];
    let mut frontier: Vec<usize> = Vec::new();
    for &v in seed_vertices {
        if !seen_vertex[v] {
            seen_vertex[v] = true;
            frontier.push(v);
        }
    }
    for _ in 0..rings {
        let mut next = Vec::new();
        for &v in &frontier {
            for &t in mesh.vertex_fan(v) {
                if in_region[t] || !inside(t) {
                    continue;
                }
                in_region[t] = true;
                for w in mesh.triangle(t) {
                    if !seen_vertex[w] {
                        seen_vertex[w] = true;
                        next.push(w);
                    }
                }
            }
        }
        frontier = next;
    }
    (0..mesh.triangle_count()).filter(|&t| in_region[t]).collect()
}

/// Candidate with the best fidelity to the average normal of `triangles`;
/// ties go to the lowest encoding.
pub(crate) fn best_label(
    mesh: &SurfaceMesh,
    triangles: &[usize],
    candidates: impl IntoIterator<Item = Label>,
) -> Option<Label> {
    let n = mesh.average_normal(triangles);
    let mut best: Option<(f64, Label)> = None;
    for l in candidates {
        let f = triangle_fidelity(n, l);
        if best.is_none_or(|(bf, _)| f > bf + 1e-12) {
            best = Some((f, l));
        }
    }
    best.map(|(_, l)| l)
}

/// Labels of the triangles around `v`.
pub(crate) fn labels_around(mesh: &SurfaceMesh, labeling: &Labeling, v: usize) -> BTreeSet<Label> {
    mesh.vertex_fan(v).iter().map(|&t| labeling[t]).collect()
}

pub(crate) fn check_chart(graph: &LabelingGraph, c: usize) -> Result<(), OperatorError> {
    if c < graph.charts.len() {
        Ok(())
    } else {
        Err(OperatorError::UnknownTarget { kind: "chart", id: c })
    }
}

pub(crate) fn check_boundary(graph: &LabelingGraph, b: usize) -> Result<(), OperatorError> {
    if b < graph.boundaries.len() {
        Ok(())
    } else {
        Err(OperatorError::UnknownTarget { kind: "boundary", id: b })
    }
}

pub(crate) fn check_vertex(mesh: &SurfaceMesh, v: usize) -> Result<(), OperatorError> {
    if v < mesh.vertex_count() {
        Ok(())
    } else {
        Err(OperatorError::UnknownTarget { kind: "vertex", id: v })
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use crate::graph::TurningPointParams;

    pub fn graph(mesh: &SurfaceMesh, l: &Labeling) -> LabelingGraph {
        LabelingGraph::build(mesh, l, &TurningPointParams::default())
    }

    /// Cube(16) with a +X mushroom painted on the +Z face: the stem touches
    /// the x = 1 cube edge and the cap overhangs it, giving four
    /// turning-points on one boundary.
    pub fn mushroom() -> (SurfaceMesh, Labeling) {
        let mesh = crate::shapes::cube(16);
        let mut l = crate::labeling::naive_labeling(&mesh);
        for t in 0..mesh.triangle_count() {
            let c = mesh.centroid(t);
            let stem = c.x > 0.75 && c.y > 0.4375 && c.y < 0.5625;
            let cap = c.x > 0.5 && c.x < 0.75 && c.y > 0.25 && c.y < 0.75;
            if l[t] == Label::POS_Z && (stem || cap) {
                l[t] = Label::POS_X;
            }
        }
        (mesh, l)
    }

    pub fn vertex_at(mesh: &SurfaceMesh, x: f64, y: f64, z: f64) -> usize {
        (0..mesh.vertex_count()).find(|&v| mesh.vertex(v) == crate::geom::Vec3::new(x, y, z)).unwrap()
    }

    /// Output differs from input exactly on `changed`.
    pub fn assert_contract(before: &Labeling, out: &OperatorOutcome) {
        assert_eq!(before.diff(&out.labeling), out.changed);
        assert_eq!(out.applied, !out.changed.is_empty());
    }
}
