//! Chart insertion next to a low-valence chart.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use super::{best_label, check_chart, flood_fill, trace_path, OperatorError, OperatorOutcome, TraceOptions};
use crate::geom::{angle_between, Vec3};
use crate::graph::{chart_contour, ContourCycle, LabelingGraph};
use crate::labeling::{Axis, Label, Labeling};
use crate::mesh::SurfaceMesh;

/// Insert a chart next to `chart` so that its valence grows.
///
/// The operator looks for a contour vertex `v` where the two contour edges
/// map to the same axis and meet at an acute angle. The contour polyedges
/// leaving `v` are split between their current axis and a new axis `a` at
/// their equilibrium points, and the base chart across that stretch is cut
/// by two paths traced along the chart's own axis.
pub fn increase_chart_valence(
    mesh: &SurfaceMesh,
    labeling: &Labeling,
    graph: &LabelingGraph,
    chart: usize,
) -> Result<OperatorOutcome, OperatorError> {
    check_chart(graph, chart)?;
    for cycle in chart_contour(mesh, graph, chart) {
        let n = cycle.vertices.len();
        for i in 0..n {
            let e_in = cycle.edges[(i + n - 1) % n];
            let e_out = cycle.edges[i];
            let axis_of = |e: usize| graph.boundary_of_edge(e).and_then(|b| graph.boundaries[b].axis);
            let (Some(a1), Some(a2)) = (axis_of(e_in), axis_of(e_out)) else { continue };
            if a1 != a2 {
                continue;
            }
            let v = cycle.vertices[i];
            let p = mesh.vertex(v);
            let d1 = mesh.vertex(cycle.vertices[(i + n - 1) % n]) - p;
            let d2 = mesh.vertex(cycle.vertices[(i + 1) % n]) - p;
            if angle_between(d1, d2) >= FRAC_PI_2 {
                continue;
            }
            if let Some(out) = insert_at(mesh, labeling, graph, chart, &cycle, i, a1) {
                return Ok(out);
            }
        }
    }
    Ok(OperatorOutcome::unchanged(labeling))
}

/// Contour walk from position `i` in direction `step` (±1) to the next
/// corner: `(vertices, edges)`.
fn polyedge(graph: &LabelingGraph, cycle: &ContourCycle, i: usize, forward: bool) -> (Vec<usize>, Vec<usize>) {
    let n = cycle.vertices.len();
    let mut vertices = alloc::vec![cycle.vertices[i]];
    let mut edges = Vec::new();
    let mut j = i;
    for _ in 0..n {
        let (e, next) = if forward {
            (cycle.edges[j], (j + 1) % n)
        } else {
            let prev = (j + n - 1) % n;
            (cycle.edges[prev], prev)
        };
        edges.push(e);
        vertices.push(cycle.vertices[next]);
        j = next;
        if graph.corner_at(cycle.vertices[j]).is_some() || j == i {
            break;
        }
    }
    (vertices, edges)
}

/// Angle between an edge and an axis line, in [0, π/2].
fn axis_cost(mesh: &SurfaceMesh, a: usize, b: usize, axis: Axis) -> f64 {
    let d = mesh.vertex(b) - mesh.vertex(a);
    let u = axis.unit();
    let ang = angle_between(d, u);
    ang.min(core::f64::consts::PI - ang)
}

/// Split index `k` where the cost of axis `a` accumulated from `v` meets
/// the cost of the current axis accumulated from the far end. Ties go to
/// the index nearer `v`.
fn equilibrium(mesh: &SurfaceMesh, vertices: &[usize], a: Axis, current: Axis) -> usize {
    let m = vertices.len() - 1;
    let ca: Vec<f64> = (0..m).map(|k| axis_cost(mesh, vertices[k], vertices[k + 1], a)).collect();
    let cc: Vec<f64> = (0..m).map(|k| axis_cost(mesh, vertices[k], vertices[k + 1], current)).collect();
    let mut best = (f64::INFINITY, 0);
    let mut acc_a = 0.0;
    let mut acc_c: f64 = cc.iter().sum();
    for k in 0..=m {
        let diff = libm::fabs(acc_a - acc_c);
        if diff < best.0 - 1e-12 {
            best = (diff, k);
        }
        if k < m {
            acc_a += ca[k];
            acc_c -= cc[k];
        }
    }
    best.1
}

fn path_length(mesh: &SurfaceMesh, vertices: &[usize]) -> f64 {
    vertices.windows(2).map(|w| mesh.vertex(w[0]).distance(mesh.vertex(w[1]))).sum()
}

fn insert_at(
    mesh: &SurfaceMesh,
    labeling: &Labeling,
    graph: &LabelingGraph,
    chart: usize,
    cycle: &ContourCycle,
    i: usize,
    current: Axis,
) -> Option<OperatorOutcome> {
    let ci = &graph.charts[chart];
    let chart_axis = ci.label.axis();
    let a = Axis::third(chart_axis, current)?;
    let v = cycle.vertices[i];
    let (po_v, po_e) = polyedge(graph, cycle, i, true);
    let (ps_v, ps_e) = polyedge(graph, cycle, i, false);
    let mut ko = equilibrium(mesh, &po_v, a, current);
    let mut ks = equilibrium(mesh, &ps_v, a, current);
    if ko != 0 && ks != 0 {
        if path_length(mesh, &po_v[..=ko]) <= path_length(mesh, &ps_v[..=ks]) {
            ko = 0;
        } else {
            ks = 0;
        }
    }
    let segment: Vec<usize> = po_e[..ko].iter().chain(&ps_e[..ks]).copied().collect();
    let first = *segment.first()?;
    let across = |e: usize| {
        let [t0, t1] = mesh.edge(e).triangles;
        if graph.chart_of_triangle(t0) == chart {
            t1
        } else {
            t0
        }
    };
    let cj = graph.chart_of_triangle(across(first));

    // Trace direction: the chart's own axis, signed by the edges at v.
    let axis_dir = chart_axis.unit();
    let mut reach = [f64::NEG_INFINITY; 2];
    for e in mesh.vertex_edges(v) {
        let [t0, t1] = mesh.edge(e).triangles;
        if graph.chart_of_triangle(t0) == chart && graph.chart_of_triangle(t1) == chart {
            continue;
        }
        if let Some(u) = (mesh.vertex(mesh.edge(e).other_vertex(v)) - mesh.vertex(v)).normalized() {
            reach[0] = reach[0].max(u.dot(axis_dir));
            reach[1] = reach[1].max(-u.dot(axis_dir));
        }
    }
    let away = -ci.label.sign();
    let sign = if reach[0] > reach[1] + 1e-9 {
        1.0
    } else if reach[1] > reach[0] + 1e-9 {
        -1.0
    } else {
        away
    };
    let dir: Vec3 = axis_dir * sign;

    let in_cj = |t: usize| graph.chart_of_triangle(t) == cj;
    let admissible = |e: usize| mesh.edge(e).triangles.iter().any(|&t| in_cj(t));
    let mut barrier = BTreeSet::new();
    for start in [po_v[ko], ps_v[ks]] {
        let path = trace_path(mesh, graph, start, dir, &admissible, TraceOptions::default());
        if !path.reached_terminus() {
            return None;
        }
        barrier.extend(path.edges);
    }
    let seeds: Vec<usize> = segment.iter().map(|&e| across(e)).filter(|&t| in_cj(t)).collect();
    let region = flood_fill(mesh, &seeds, &in_cj, &barrier);
    if region.is_empty() || region.len() == graph.charts[cj].triangles.len() {
        return None;
    }
    let cj_axis = graph.charts[cj].label.axis();
    let candidates = Label::ALL.into_iter().filter(|l| l.axis() != chart_axis && l.axis() != cj_axis);
    let label = best_label(mesh, &region, candidates)?;
    Some(OperatorOutcome::relabel(labeling, &region, label))
}
