//! Initial labeling followed by the validity routine and the monotonicity
//! routine.

use alloc::collections::BTreeSet;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::graph::{LabelingGraph, TurningPointParams};
use crate::labeling::{naive_labeling, Labeling};
use crate::mesh::SurfaceMesh;
use crate::operators::{
    fix_invalid_boundary, fix_invalid_corner, increase_chart_valence, join_turning_points_pair, lost_feature_path,
    move_boundary_near_turning_point, pull_closest_corner, remove_chart, straighten_boundary, OperatorError,
    OperatorKind, OperatorOutcome, DEFAULT_WIDTH,
};
use crate::optimizer::{tweaked_graphcut_labeling, GraphCutParams};
use crate::report::{compute_report, Durations, MetricsReport, Status};
use crate::validity::{validate_labeling, StateTuple, ValidityConfig, ValidityReport};

/// Source of wall-clock time in seconds. The std crate provides a real one.
pub trait Clock {
    fn now(&self) -> f64;
}

/// Clock that always reads zero.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> f64 {
        0.0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum InitialLabeling {
    #[default]
    Tweaked,
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PipelineParams {
    pub graphcut: GraphCutParams,
    pub validity: ValidityConfig,
    pub turning_points: TurningPointParams,
    pub initial: InitialLabeling,
    /// Outer iterations of the validity routine.
    pub max_iterations: usize,
    /// Rings of triangles in strips inserted along invalid boundaries.
    pub width: usize,
    /// Rings of triangles in disks inserted at invalid corners and in local
    /// boundary moves.
    pub radius: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            graphcut: GraphCutParams::default(),
            validity: ValidityConfig::default(),
            turning_points: TurningPointParams::default(),
            initial: InitialLabeling::Tweaked,
            max_iterations: 10,
            width: DEFAULT_WIDTH,
            radius: DEFAULT_WIDTH,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Routine {
    Validity,
    Monotonicity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogEntry {
    pub routine: Routine,
    pub operator: OperatorKind,
    /// Chart, boundary or corner id, or vertex id for turning-points.
    pub target: usize,
    pub changed: usize,
    /// False when the result failed its postcondition and was rolled back.
    pub accepted: bool,
}

impl core::fmt::Display for LogEntry {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let routine = match self.routine {
            Routine::Validity => "validity",
            Routine::Monotonicity => "monotonicity",
        };
        let verdict = if self.accepted { "accepted" } else { "rolled-back" };
        write!(f, "{routine} {} target={} changed={} {verdict}", self.operator, self.target, self.changed)
    }
}

/// Labeling under repair with its graph and validity report kept current.
#[derive(Clone, Debug)]
pub struct PipelineState {
    pub labeling: Labeling,
    pub graph: LabelingGraph,
    pub report: ValidityReport,
    /// Outer iterations run by the validity routine.
    pub iterations: usize,
    pub log: Vec<LogEntry>,
}

struct Candidate {
    labeling: Labeling,
    graph: LabelingGraph,
    report: ValidityReport,
}

impl PipelineState {
    pub fn new(mesh: &SurfaceMesh, labeling: Labeling, params: &PipelineParams) -> Self {
        let graph = LabelingGraph::build(mesh, &labeling, &params.turning_points);
        let report = validate_labeling(mesh, &graph, &params.validity);
        PipelineState { labeling, graph, report, iterations: 0, log: Vec::new() }
    }

    pub fn is_valid(&self) -> bool {
        self.report.is_valid
    }

    pub fn is_all_monotone(&self) -> bool {
        self.graph.is_all_monotone()
    }

    pub fn operators_applied(&self) -> usize {
        self.log.iter().filter(|e| e.accepted).count()
    }

    /// Rebuild around an operator result and keep it if `accept` agrees.
    /// Returns whether the state changed.
    fn attempt(
        &mut self,
        mesh: &SurfaceMesh,
        params: &PipelineParams,
        routine: Routine,
        operator: OperatorKind,
        target: usize,
        outcome: Result<OperatorOutcome, OperatorError>,
        accept: impl FnOnce(&PipelineState, &Candidate) -> bool,
    ) -> bool {
        let Ok(outcome) = outcome else { return false };
        if !outcome.applied {
            return false;
        }
        let graph = LabelingGraph::build(mesh, &outcome.labeling, &params.turning_points);
        let report = validate_labeling(mesh, &graph, &params.validity);
        let candidate = Candidate { labeling: outcome.labeling, graph, report };
        let accepted = accept(self, &candidate);
        self.log.push(LogEntry { routine, operator, target, changed: outcome.changed.len(), accepted });
        if accepted {
            self.labeling = candidate.labeling;
            self.graph = candidate.graph;
            self.report = candidate.report;
        }
        accepted
    }
}

/// Upper bound on applications inside one "repeat until none processed"
/// loop.
const REPEAT_CAP: usize = 256;

/// Chart removal on every invalid chart not surrounded by feature edges.
/// Returns whether anything changed.
fn remove_invalid_charts(mesh: &SurfaceMesh, state: &mut PipelineState, params: &PipelineParams) -> bool {
    let mut changed = false;
    let mut failed = BTreeSet::new();
    for _ in 0..REPEAT_CAP {
        let target = state.report.invalid_charts.iter().copied().find(|&c| {
            let chart = &state.graph.charts[c];
            !chart.surrounded_by_feature_edges && !failed.contains(&chart.triangles[0])
        });
        let Some(c) = target else { break };
        let key = state.graph.charts[c].triangles[0];
        let out = remove_chart(mesh, &state.labeling, &state.graph, c, &params.graphcut);
        let (tris, label) = (state.graph.charts[c].triangles.clone(), state.graph.charts[c].label);
        let ok = state.attempt(mesh, params, Routine::Validity, OperatorKind::RemoveChart, c, out, |_, cand| {
            tris.iter().all(|&t| cand.labeling[t] != label)
        });
        if ok {
            changed = true;
            if state.is_valid() {
                break;
            }
        } else {
            failed.insert(key);
        }
    }
    changed
}

/// Chart removal on both charts of every invalid boundary.
fn remove_charts_around_invalid_boundaries(mesh: &SurfaceMesh, state: &mut PipelineState, params: &PipelineParams) -> bool {
    let seeds: Vec<usize> = state
        .report
        .invalid_boundaries
        .iter()
        .flat_map(|&b| {
            let bd = &state.graph.boundaries[b];
            [bd.left_chart, bd.right_chart].map(|c| state.graph.charts[c].triangles[0])
        })
        .collect();
    let mut changed = false;
    let mut done = BTreeSet::new();
    for t in seeds {
        let c = state.graph.chart_of_triangle(t);
        if !done.insert(state.graph.charts[c].triangles[0]) {
            continue;
        }
        let out = remove_chart(mesh, &state.labeling, &state.graph, c, &params.graphcut);
        changed |= state.attempt(mesh, params, Routine::Validity, OperatorKind::RemoveChart, c, out, |_, _| true);
    }
    changed
}

/// Validity-oriented routine: insert charts at low-valence charts, invalid
/// boundaries and invalid corners, then remove charts, watching the
/// component counts for cycles.
pub fn routine_validity(mesh: &SurfaceMesh, state: &mut PipelineState, params: &PipelineParams) {
    while !state.is_valid() && state.iterations < params.max_iterations {
        state.iterations += 1;

        let mut failed = BTreeSet::new();
        for _ in 0..REPEAT_CAP {
            let target = state.report.invalid_charts.iter().copied().find(|&c| {
                let chart = &state.graph.charts[c];
                chart.surrounded_by_feature_edges && !failed.contains(&chart.triangles[0])
            });
            let Some(c) = target else { break };
            let (key, valence) = (state.graph.charts[c].triangles[0], state.graph.charts[c].valence());
            let out = increase_chart_valence(mesh, &state.labeling, &state.graph, c);
            let ok = state.attempt(mesh, params, Routine::Validity, OperatorKind::IncreaseChartValence, c, out, |_, cand| {
                cand.graph.charts[cand.graph.chart_of_triangle(key)].valence() > valence
            });
            if !ok {
                failed.insert(key);
            }
        }
        if state.is_valid() {
            return;
        }

        let mut failed = BTreeSet::new();
        for _ in 0..REPEAT_CAP {
            let target = state
                .report
                .invalid_boundaries
                .iter()
                .copied()
                .find(|&b| !failed.contains(&state.graph.boundaries[b].edges[0]));
            let Some(b) = target else { break };
            let edges = state.graph.boundaries[b].edges.clone();
            let out = fix_invalid_boundary(mesh, &state.labeling, &state.graph, b, params.width);
            let ok = state.attempt(mesh, params, Routine::Validity, OperatorKind::FixInvalidBoundary, b, out, |_, cand| {
                edges.iter().all(|&e| {
                    let [t0, t1] = mesh.edge(e).triangles;
                    let (a, b) = (cand.labeling[t0], cand.labeling[t1]);
                    a == b || a.axis() != b.axis()
                })
            });
            if !ok {
                failed.insert(edges[0]);
            }
        }
        if state.is_valid() {
            return;
        }

        let mut failed = BTreeSet::new();
        for _ in 0..REPEAT_CAP {
            let target = state
                .report
                .invalid_corners
                .iter()
                .copied()
                .find(|&c| !failed.contains(&state.graph.corners[c].vertex));
            let Some(c) = target else { break };
            let v = state.graph.corners[c].vertex;
            // Shrink the disk until it fits inside the incident charts.
            let mut out = Err(OperatorError::RadiusExceedsCharts);
            for r in (1..=params.radius).rev() {
                out = fix_invalid_corner(mesh, &state.labeling, &state.graph, c, r, &params.validity);
                if out != Err(OperatorError::RadiusExceedsCharts) {
                    break;
                }
            }
            let ok = state.attempt(mesh, params, Routine::Validity, OperatorKind::FixInvalidCorner, c, out, |_, cand| {
                cand.graph.corner_at(v).is_none()
            });
            if !ok {
                failed.insert(v);
            }
        }
        if state.is_valid() {
            return;
        }

        let mut seen: BTreeSet<StateTuple> = BTreeSet::new();
        seen.insert(state.report.state());
        for _ in 0..params.max_iterations {
            let removed = remove_invalid_charts(mesh, state, params);
            if state.is_valid() {
                return;
            }
            let s = state.report.state();
            let escaped = if seen.contains(&s) {
                remove_charts_around_invalid_boundaries(mesh, state, params)
            } else {
                seen.insert(s);
                false
            };
            if state.is_valid() {
                return;
            }
            if !removed && !escaped {
                break;
            }
        }
    }
}

/// Monotonicity-oriented routine. Every operator result that breaks
/// validity or fails to lower the turning-point count is rolled back.
pub fn routine_monotonicity(mesh: &SurfaceMesh, state: &mut PipelineState, params: &PipelineParams) {
    if state.is_all_monotone() || !state.is_valid() {
        return;
    }
    let reduces = |s: &PipelineState, c: &Candidate| c.report.is_valid && c.report.turning_points < s.report.turning_points;

    let mut failed = BTreeSet::new();
    for _ in 0..REPEAT_CAP {
        let tps: Vec<usize> = state.graph.turning_points().into_iter().map(|(_, v)| v).collect();
        let mut pair = None;
        'search: for (i, &t1) in tps.iter().enumerate() {
            for &t2 in &tps[i + 1..] {
                if t1 != t2 && !failed.contains(&(t1, t2)) && lost_feature_path(mesh, &state.labeling, t1, t2).is_some() {
                    pair = Some((t1, t2));
                    break 'search;
                }
            }
        }
        let Some((t1, t2)) = pair else { break };
        let out = join_turning_points_pair(mesh, &state.labeling, &state.graph, t1, t2);
        if !state.attempt(mesh, params, Routine::Monotonicity, OperatorKind::JoinTurningPointsPair, t1, out, reduces) {
            failed.insert((t1, t2));
        }
    }
    if state.is_all_monotone() {
        return;
    }

    let mut failed = BTreeSet::new();
    for _ in 0..REPEAT_CAP {
        let target = state
            .graph
            .turning_points()
            .into_iter()
            .map(|(_, v)| v)
            .find(|&v| mesh.is_on_feature(v) && !failed.contains(&v));
        let Some(tp) = target else { break };
        let out = pull_closest_corner(mesh, &state.labeling, &state.graph, tp);
        if !state.attempt(mesh, params, Routine::Monotonicity, OperatorKind::PullClosestCorner, tp, out, reduces) {
            failed.insert(tp);
        }
    }
    if state.is_all_monotone() {
        return;
    }

    let smooth: Vec<usize> =
        state.graph.turning_points().into_iter().map(|(_, v)| v).filter(|&v| !mesh.is_on_feature(v)).collect();
    for tp in smooth {
        if !state.graph.turning_points().iter().any(|&(_, v)| v == tp) {
            continue;
        }
        let out = move_boundary_near_turning_point(mesh, &state.labeling, &state.graph, tp, params.radius);
        state.attempt(mesh, params, Routine::Monotonicity, OperatorKind::MoveBoundaryNearTurningPoint, tp, out, reduces);
        if state.is_all_monotone() {
            return;
        }
    }

    let keys: Vec<usize> =
        state.graph.boundaries.iter().filter(|b| !b.on_feature_edges && !b.is_closed()).map(|b| b.edges[0]).collect();
    for e in keys {
        let Some(b) = state.graph.boundary_of_edge(e) else { continue };
        let out = straighten_boundary(mesh, &state.labeling, &state.graph, b);
        state.attempt(mesh, params, Routine::Monotonicity, OperatorKind::StraightenBoundary, b, out, |s, c| {
            c.report.is_valid && c.report.turning_points <= s.report.turning_points
        });
        if state.is_all_monotone() {
            return;
        }
    }
}

/// Run one operator by kind. `target` is a chart, boundary, corner or
/// vertex id depending on the operator; only the turning-point pair join
/// reads `second`.
pub fn apply_operator(
    mesh: &SurfaceMesh,
    labeling: &Labeling,
    graph: &LabelingGraph,
    kind: OperatorKind,
    target: usize,
    second: Option<usize>,
    params: &PipelineParams,
) -> Result<OperatorOutcome, OperatorError> {
    match kind {
        OperatorKind::IncreaseChartValence => increase_chart_valence(mesh, labeling, graph, target),
        OperatorKind::FixInvalidBoundary => fix_invalid_boundary(mesh, labeling, graph, target, params.width),
        OperatorKind::FixInvalidCorner => {
            fix_invalid_corner(mesh, labeling, graph, target, params.radius, &params.validity)
        }
        OperatorKind::RemoveChart => remove_chart(mesh, labeling, graph, target, &params.graphcut),
        OperatorKind::JoinTurningPointsPair => {
            let t2 = second.ok_or(OperatorError::SecondTargetMissing(kind))?;
            join_turning_points_pair(mesh, labeling, graph, target, t2)
        }
        OperatorKind::PullClosestCorner => pull_closest_corner(mesh, labeling, graph, target),
        OperatorKind::MoveBoundaryNearTurningPoint => {
            move_boundary_near_turning_point(mesh, labeling, graph, target, params.radius)
        }
        OperatorKind::StraightenBoundary => straighten_boundary(mesh, labeling, graph, target),
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub labeling: Labeling,
    pub report: MetricsReport,
    pub log: Vec<LogEntry>,
}

/// Initial labeling, validity routine, then (if valid) monotonicity
/// routine, and the final report.
pub fn run_pipeline(mesh: &SurfaceMesh, params: &PipelineParams, clock: &dyn Clock) -> PipelineOutput {
    let t0 = clock.now();
    let initial = match params.initial {
        InitialLabeling::Naive => Ok(naive_labeling(mesh)),
        InitialLabeling::Tweaked => tweaked_graphcut_labeling(mesh, &params.graphcut),
    };
    let initial = match initial {
        Ok(l) => l,
        Err(e) => {
            let labeling = naive_labeling(mesh);
            let graph = LabelingGraph::build(mesh, &labeling, &params.turning_points);
            let mut report = compute_report(mesh, &labeling, &graph, &params.validity, Durations::default());
            report.status = Status::Failed;
            report.error = Some(e.to_string());
            return PipelineOutput { labeling, report, log: Vec::new() };
        }
    };
    let t1 = clock.now();
    let mut state = PipelineState::new(mesh, initial, params);
    routine_validity(mesh, &mut state, params);
    let t2 = clock.now();
    if state.is_valid() {
        routine_monotonicity(mesh, &mut state, params);
    }
    let t3 = clock.now();
    let durations =
        Durations { initial_labeling: t1 - t0, validity_routine: t2 - t1, monotonicity_routine: t3 - t2, total: t3 - t0 };
    let mut report = compute_report(mesh, &state.labeling, &state.graph, &params.validity, durations);
    report.operators_applied = state.operators_applied();
    PipelineOutput { labeling: state.labeling, report, log: state.log }
}
