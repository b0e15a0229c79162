//! Turning-point removal: chart insertion along lost feature edges, corner
//! pulling and local boundary moves.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;

use super::{
    best_label, check_vertex, flood_fill, labels_around, trace_path, vertex_rings, OperatorError, OperatorOutcome,
    TraceOptions,
};
use crate::geom::Vec3;
use crate::graph::LabelingGraph;
use crate::labeling::{triangle_fidelity, Label, Labeling};
use crate::mesh::SurfaceMesh;

/// Shortest vertex path from `t1` to `t2` over lost feature edges (feature
/// edges whose two triangles share a label).
pub fn lost_feature_path(mesh: &SurfaceMesh, labeling: &Labeling, t1: usize, t2: usize) -> Option<Vec<usize>> {
    if t1 == t2 {
        return None;
    }
    let lost = |e: usize| {
        let [a, b] = mesh.edge(e).triangles;
        mesh.is_feature_edge(e) && labeling[a] == labeling[b]
    };
    let mut prev: BTreeMap<usize, usize> = BTreeMap::from([(t1, t1)]);
    let mut queue = VecDeque::from([t1]);
    while let Some(v) = queue.pop_front() {
        if v == t2 {
            let mut path = alloc::vec![t2];
            let mut cur = t2;
            while cur != t1 {
                cur = prev[&cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for e in mesh.vertex_edges(v) {
            let w = mesh.edge(e).other_vertex(v);
            if lost(e) && !prev.contains_key(&w) {
                prev.insert(w, v);
                queue.push_back(w);
            }
        }
    }
    None
}

fn boundary_with_turning_point(graph: &LabelingGraph, tp: usize) -> Option<usize> {
    graph.boundaries.iter().find(|b| b.turning_points.contains(&tp)).map(|b| b.id)
}

/// Area-weighted mean fidelity of `triangles` under `label`.
fn side_fidelity(mesh: &SurfaceMesh, triangles: &[usize], label: Label) -> f64 {
    let area: f64 = triangles.iter().map(|&t| mesh.area(t)).sum();
    if area <= 0.0 {
        return 0.0;
    }
    triangles.iter().map(|&t| mesh.area(t) * triangle_fidelity(mesh.normal(t), label)).sum::<f64>() / area
}

/// Bond two turning-points joined by a lost feature path with a new chart
/// on one side of the path.
pub fn join_turning_points_pair(
    mesh: &SurfaceMesh,
    labeling: &Labeling,
    graph: &LabelingGraph,
    t1: usize,
    t2: usize,
) -> Result<OperatorOutcome, OperatorError> {
    check_vertex(mesh, t1)?;
    check_vertex(mesh, t2)?;
    let Some(path) = lost_feature_path(mesh, labeling, t1, t2) else {
        return Ok(OperatorOutcome::unchanged(labeling));
    };
    let mut left = BTreeSet::new();
    let mut right = BTreeSet::new();
    let mut path_edges = BTreeSet::new();
    for w in path.windows(2) {
        let e = mesh.edge_between(w[0], w[1]).expect("path edge");
        let lt = mesh.left_triangle(w[0], w[1]).expect("path edge");
        left.insert(lt);
        right.insert(mesh.edge(e).other_triangle(lt));
        path_edges.insert(e);
    }
    let excluded: BTreeSet<Label> = labels_around(mesh, labeling, t1).union(&labels_around(mesh, labeling, t2)).copied().collect();
    let both: Vec<usize> = left.union(&right).copied().collect();
    let Some(label) = best_label(mesh, &both, Label::ALL.into_iter().filter(|l| !excluded.contains(l))) else {
        return Ok(OperatorOutcome::unchanged(labeling));
    };
    let left: Vec<usize> = left.into_iter().collect();
    let right: Vec<usize> = right.into_iter().collect();
    let side = if side_fidelity(mesh, &right, label) > side_fidelity(mesh, &left, label) + 1e-12 { right } else { left };
    // Extend over the same chart up to feature edges.
    let chart = graph.chart_of_triangle(side[0]);
    let mut barrier: BTreeSet<usize> = mesh.features().sharp_edges().collect();
    barrier.extend(path_edges);
    let region = flood_fill(mesh, &side, &|t| graph.chart_of_triangle(t) == chart, &barrier);
    Ok(OperatorOutcome::relabel(labeling, &region, label))
}

/// Direction of boundary `b` leaving corner vertex `cv`.
fn leaving_direction(mesh: &SurfaceMesh, graph: &LabelingGraph, b: usize, cv: usize) -> Option<Vec3> {
    let bd = &graph.boundaries[b];
    let next = if bd.vertices[0] == cv {
        bd.vertices[1]
    } else if *bd.vertices.last()? == cv {
        bd.vertices[bd.vertices.len() - 2]
    } else {
        return None;
    };
    let raw = (mesh.vertex(next) - mesh.vertex(cv)).normalized()?;
    Some(match bd.axis {
        Some(a) => {
            let u = a.unit();
            if raw.dot(u) >= 0.0 {
                u
            } else {
                -u
            }
        }
        None => raw,
    })
}

/// Move the corner nearest to a turning-point onto it by re-tracing one of
/// the corner's other boundaries from the turning-point.
pub fn pull_closest_corner(
    mesh: &SurfaceMesh,
    labeling: &Labeling,
    graph: &LabelingGraph,
    tp: usize,
) -> Result<OperatorOutcome, OperatorError> {
    check_vertex(mesh, tp)?;
    let Some(b) = boundary_with_turning_point(graph, tp) else {
        return Ok(OperatorOutcome::unchanged(labeling));
    };
    let bd = &graph.boundaries[b];
    if bd.is_closed() {
        return Ok(OperatorOutcome::unchanged(labeling));
    }
    let i = bd.vertices.iter().position(|&v| v == tp).expect("turning-point on boundary");
    let length = |vs: &[usize]| -> f64 { vs.windows(2).map(|w| mesh.vertex(w[0]).distance(mesh.vertex(w[1]))).sum() };
    let (corner, to_tp): (usize, Vec<usize>) = if length(&bd.vertices[..=i]) <= length(&bd.vertices[i..]) {
        (bd.start_corner.unwrap(), bd.vertices[..=i].to_vec())
    } else {
        (bd.end_corner.unwrap(), bd.vertices[i..].iter().rev().copied().collect())
    };
    let cv = graph.corners[corner].vertex;
    let offset = match (mesh.vertex(tp) - mesh.vertex(cv)).normalized() {
        Some(u) => u,
        None => return Ok(OperatorOutcome::unchanged(labeling)),
    };

    let mut candidates: Vec<(f64, usize, usize, Vec3)> = Vec::new();
    let incident: BTreeSet<usize> = graph.corners[corner].boundaries.iter().copied().collect();
    for &s in &incident {
        if s == b {
            continue;
        }
        let sb = &graph.boundaries[s];
        let Some(shared) = sb.charts().into_iter().find(|c| bd.charts().contains(c)) else { continue };
        let Some(d) = leaving_direction(mesh, graph, s, cv) else { continue };
        candidates.push((libm::fabs(d.dot(offset)), s, shared, d));
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let segment: Vec<usize> = to_tp.windows(2).map(|w| mesh.edge_between(w[0], w[1]).unwrap()).collect();
    for (_, s, shared, d) in candidates {
        let in_k = |t: usize| graph.chart_of_triangle(t) == shared;
        let admissible = |e: usize| mesh.edge(e).triangles.iter().any(|&t| in_k(t));
        let path = trace_path(mesh, graph, tp, d, &admissible, TraceOptions::default());
        if !path.reached_terminus() {
            continue;
        }
        let barrier: BTreeSet<usize> = path.edges.iter().copied().collect();
        let seeds: Vec<usize> =
            segment.iter().flat_map(|&e| mesh.edge(e).triangles).filter(|&t| in_k(t)).collect();
        let region = flood_fill(mesh, &seeds, &in_k, &barrier);
        if region.is_empty() || region.len() == graph.charts[shared].triangles.len() {
            continue;
        }
        let sb_edges: BTreeSet<usize> = graph.boundaries[s].edges.iter().copied().collect();
        let touches = region.iter().any(|&t| mesh.triangle_edges(t).iter().any(|e| sb_edges.contains(e)));
        if !touches {
            continue;
        }
        let target = graph.charts[graph.boundaries[s].other_chart(shared)].label;
        return Ok(OperatorOutcome::relabel(labeling, &region, target));
    }
    Ok(OperatorOutcome::unchanged(labeling))
}

/// Propagate, around a turning-point off feature edges, the adjacent label
/// with the larger sum of corner angles at the vertex.
pub fn move_boundary_near_turning_point(
    mesh: &SurfaceMesh,
    labeling: &Labeling,
    graph: &LabelingGraph,
    tp: usize,
    radius: usize,
) -> Result<OperatorOutcome, OperatorError> {
    check_vertex(mesh, tp)?;
    if radius == 0 {
        return Err(OperatorError::ZeroWidth);
    }
    if mesh.is_on_feature(tp) {
        return Ok(OperatorOutcome::unchanged(labeling));
    }
    let Some(b) = boundary_with_turning_point(graph, tp) else {
        return Ok(OperatorOutcome::unchanged(labeling));
    };
    let bd = &graph.boundaries[b];
    let (l, r) = (bd.left_chart, bd.right_chart);
    let mut sums = [0.0f64; 2];
    for &t in mesh.vertex_fan(tp) {
        let c = graph.chart_of_triangle(t);
        if c == l {
            sums[0] += mesh.corner_angle(t, tp);
        } else if c == r {
            sums[1] += mesh.corner_angle(t, tp);
        }
    }
    let (ll, rl) = (graph.charts[l].label, graph.charts[r].label);
    let left_wins = if libm::fabs(sums[0] - sums[1]) <= 1e-12 { ll < rl } else { sums[0] > sums[1] };
    let (winner, loser) = if left_wins { (ll, r) } else { (rl, l) };
    let region = vertex_rings(mesh, &[tp], radius, &|t| graph.chart_of_triangle(t) == loser);
    Ok(OperatorOutcome::relabel(labeling, &region, winner))
}

#[cfg(test)]
mod tests {
    use super::super::testing::{assert_contract, graph, mushroom, vertex_at};
    use super::*;
    use crate::labeling::{feature_edge_metrics, naive_labeling};
    use crate::shapes;
    use crate::validity::{validate_labeling, ValidityConfig};

    fn tp_count(mesh: &SurfaceMesh, l: &Labeling) -> usize {
        graph(mesh, l).turning_point_count()
    }

    #[test]
    fn mushroom_fixture() {
        let (mesh, l) = mushroom();
        let g = graph(&mesh, &l);
        assert_eq!(g.turning_point_count(), 4);
        assert!(validate_labeling(&mesh, &g, &ValidityConfig::default()).is_valid);
    }

    #[test]
    fn join_restores_lost_feature_edges() {
        let (mesh, l) = mushroom();
        let g = graph(&mesh, &l);
        let a = vertex_at(&mesh, 1.0, 0.4375, 1.0);
        let b = vertex_at(&mesh, 1.0, 0.5625, 1.0);
        assert_eq!(lost_feature_path(&mesh, &l, a, b).unwrap().len(), 3);
        let out = join_turning_points_pair(&mesh, &l, &g, a, b).unwrap();
        assert!(out.applied);
        assert_contract(&l, &out);
        let new = out.labeling[out.changed[0]];
        assert!(out.changed.iter().all(|&t| out.labeling[t] == new));
        assert!(!labels_around(&mesh, &l, a).contains(&new));
        assert_eq!(feature_edge_metrics(&mesh, &l).lost, 2);
        assert_eq!(feature_edge_metrics(&mesh, &out.labeling).lost, 0);
        assert!(tp_count(&mesh, &out.labeling) < 4);
    }

    #[test]
    fn pull_removes_feature_turning_point() {
        let (mesh, l) = mushroom();
        let g = graph(&mesh, &l);
        let tp = vertex_at(&mesh, 1.0, 0.4375, 1.0);
        assert!(g.turning_points().iter().any(|&(_, v)| v == tp));
        let out = pull_closest_corner(&mesh, &l, &g, tp).unwrap();
        assert!(out.applied);
        assert_contract(&l, &out);
        let g2 = graph(&mesh, &out.labeling);
        assert!(validate_labeling(&mesh, &g2, &ValidityConfig::default()).is_valid);
        assert_eq!(g2.turning_point_count(), 3);
    }

    #[test]
    fn move_acts_near_smooth_turning_point() {
        let (mesh, l) = mushroom();
        let g = graph(&mesh, &l);
        let tp = vertex_at(&mesh, 0.75, 0.25, 1.0);
        let out = move_boundary_near_turning_point(&mesh, &l, &g, tp, 3).unwrap();
        assert!(out.applied);
        assert_contract(&l, &out);
        // Only the two charts of the boundary trade triangles.
        for &t in &out.changed {
            assert!(matches!((l[t], out.labeling[t]), (Label::POS_X, Label::POS_Z) | (Label::POS_Z, Label::POS_X)));
        }
        assert_eq!(move_boundary_near_turning_point(&mesh, &l, &g, tp, 3).unwrap(), out);
    }

    #[test]
    fn wide_move_clears_cap_corner() {
        // The cap overhangs the stem by four cells; a disk of four rings
        // swallows the overhang.
        let (mesh, l) = mushroom();
        let g = graph(&mesh, &l);
        let tp = vertex_at(&mesh, 0.75, 0.5625, 1.0);
        let out = move_boundary_near_turning_point(&mesh, &l, &g, tp, 4).unwrap();
        assert_contract(&l, &out);
        let g2 = graph(&mesh, &out.labeling);
        assert_eq!(g2.turning_point_count(), 2);
        assert!(validate_labeling(&mesh, &g2, &ValidityConfig::default()).is_valid);
    }

    #[test]
    fn degenerate_pair() {
        let mesh = shapes::cube(2);
        let l = naive_labeling(&mesh);
        let g = graph(&mesh, &l);
        let out = join_turning_points_pair(&mesh, &l, &g, 3, 3).unwrap();
        assert!(!out.applied);
        assert_eq!(out.labeling, l);
    }

    #[test]
    fn lost_path_on_cube_edge() {
        let mesh = shapes::cube(2);
        let mut l = naive_labeling(&mesh);
        // Merge the +Z face into +X: the shared cube edge becomes lost.
        for t in 0..mesh.triangle_count() {
            if l[t] == Label::POS_Z {
                l[t] = Label::POS_X;
            }
        }
        let ends: Vec<usize> = (0..mesh.vertex_count())
            .filter(|&v| {
                let p = mesh.vertex(v);
                p.x == 1.0 && p.z == 1.0 && (p.y == 0.0 || p.y == 1.0)
            })
            .collect();
        let path = lost_feature_path(&mesh, &l, ends[0], ends[1]).unwrap();
        assert_eq!(path.len(), 3);
        assert!(lost_feature_path(&mesh, &naive_labeling(&mesh), ends[0], ends[1]).is_none());
    }

    #[test]
    fn move_is_noop_on_features() {
        let mesh = shapes::cube(2);
        let l = naive_labeling(&mesh);
        let g = graph(&mesh, &l);
        let out = move_boundary_near_turning_point(&mesh, &l, &g, 0, 2).unwrap();
        assert!(!out.applied);
        assert_contract(&l, &out);
    }
}
