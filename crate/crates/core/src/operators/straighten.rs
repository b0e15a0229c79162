//! Greedy re-drawing of a boundary between its two corners.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::{check_boundary, flood_fill, OperatorError, OperatorOutcome};
use crate::graph::LabelingGraph;
use crate::labeling::Labeling;
use crate::mesh::SurfaceMesh;

/// Greedy path from `from` to `to` through vertices interior to the region
/// `inside`, each step taking the neighbor closest to `to`.
pub(crate) fn greedy_path(
    mesh: &SurfaceMesh,
    from: usize,
    to: usize,
    inside: &dyn Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let goal = mesh.vertex(to);
    let interior = |v: usize| mesh.vertex_fan(v).iter().all(|&t| inside(t));
    let mut path = vec![from];
    let mut visited = BTreeSet::from([from]);
    let mut cur = from;
    for _ in 0..mesh.edge_count() {
        if cur == to {
            return Some(path);
        }
        let mut best: Option<(f64, usize)> = None;
        for e in mesh.vertex_edges(cur) {
            let [a, b] = mesh.edge(e).triangles;
            if !inside(a) || !inside(b) {
                continue;
            }
            let w = mesh.edge(e).other_vertex(cur);
            if visited.contains(&w) || (w != to && !interior(w)) {
                continue;
            }
            let d = mesh.vertex(w).distance(goal);
            if best.is_none_or(|(bd, bw)| d < bd - 1e-12 || (libm::fabs(d - bd) <= 1e-12 && w < bw)) {
                best = Some((d, w));
            }
        }
        let (_, w) = best?;
        visited.insert(w);
        path.push(w);
        cur = w;
    }
    None
}

/// Re-draw a corner-to-corner boundary off feature edges with a greedy
/// path toward its end corner, when that path is shorter in edges.
pub fn straighten_boundary(
    mesh: &SurfaceMesh,
    labeling: &Labeling,
    graph: &LabelingGraph,
    boundary: usize,
) -> Result<OperatorOutcome, OperatorError> {
    check_boundary(graph, boundary)?;
    let b = &graph.boundaries[boundary];
    if b.is_closed() || b.on_feature_edges {
        return Ok(OperatorOutcome::unchanged(labeling));
    }
    let (l, r) = (b.left_chart, b.right_chart);
    let inside = |t: usize| {
        let c = graph.chart_of_triangle(t);
        c == l || c == r
    };
    let (from, to) = (b.vertices[0], *b.vertices.last().unwrap());
    let Some(path) = greedy_path(mesh, from, to, &inside) else {
        return Ok(OperatorOutcome::unchanged(labeling));
    };
    if path.len() >= b.vertices.len() {
        return Ok(OperatorOutcome::unchanged(labeling));
    }
    let edges: BTreeSet<usize> = path.windows(2).map(|w| mesh.edge_between(w[0], w[1]).unwrap()).collect();
    let left_seeds: Vec<usize> = path.windows(2).map(|w| mesh.left_triangle(w[0], w[1]).unwrap()).collect();
    let right_seeds: Vec<usize> = path.windows(2).map(|w| mesh.left_triangle(w[1], w[0]).unwrap()).collect();
    let left = flood_fill(mesh, &left_seeds, &inside, &edges);
    let left_set: BTreeSet<usize> = left.iter().copied().collect();
    if right_seeds.iter().any(|t| left_set.contains(t)) {
        return Ok(OperatorOutcome::unchanged(labeling));
    }
    let (ll, rl) = (graph.charts[l].label, graph.charts[r].label);
    let mut out = labeling.clone();
    for t in graph.charts[l].triangles.iter().chain(&graph.charts[r].triangles) {
        out[*t] = if left_set.contains(t) { ll } else { rl };
    }
    Ok(OperatorOutcome::between(labeling, out))
}
