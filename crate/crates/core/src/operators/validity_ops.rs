//! Chart insertion along invalid boundaries and at invalid corners, and
//! chart removal by restricted graph-cut.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::{best_label, check_boundary, check_chart, vertex_rings, OperatorError, OperatorOutcome};
use crate::graph::LabelingGraph;
use crate::labeling::{Label, LabelSet, Labeling};
use crate::mesh::SurfaceMesh;
use crate::optimizer::{restricted_relabel, GraphCutParams};
use crate::validity::{corner_valid, ValidityConfig};

/// Insert a strip chart of `width` rings along a boundary between two
/// same-axis charts.
pub fn fix_invalid_boundary(
    mesh: &SurfaceMesh,
    labeling: &Labeling,
    graph: &LabelingGraph,
    boundary: usize,
    width: usize,
) -> Result<OperatorOutcome, OperatorError> {
    check_boundary(graph, boundary)?;
    if width == 0 {
        return Err(OperatorError::ZeroWidth);
    }
    let b = &graph.boundaries[boundary];
    let axis = graph.charts[b.left_chart].label.axis();
    if graph.charts[b.right_chart].label.axis() != axis {
        return Ok(OperatorOutcome::unchanged(labeling));
    }
    let (l, r) = (b.left_chart, b.right_chart);
    let strip = vertex_rings(mesh, &b.vertices, width, &|t| {
        let c = graph.chart_of_triangle(t);
        c == l || c == r
    });
    let label = best_label(mesh, &strip, Label::ALL.into_iter().filter(|x| x.axis() != axis))
        .expect("four candidates");
    Ok(OperatorOutcome::relabel(labeling, &strip, label))
}

/// Insert a disk chart of `radius` rings centered on an invalid corner.
pub fn fix_invalid_corner(
    mesh: &SurfaceMesh,
    labeling: &Labeling,
    graph: &LabelingGraph,
    corner: usize,
    radius: usize,
    config: &ValidityConfig,
) -> Result<OperatorOutcome, OperatorError> {
    if corner >= graph.corners.len() {
        return Err(OperatorError::UnknownTarget { kind: "corner", id: corner });
    }
    if radius == 0 {
        return Err(OperatorError::ZeroWidth);
    }
    if corner_valid(graph, corner, config) {
        return Ok(OperatorOutcome::unchanged(labeling));
    }
    let v = graph.corners[corner].vertex;
    let disk = vertex_rings(mesh, &[v], radius, &|_| true);
    let in_disk: BTreeSet<usize> = disk.iter().copied().collect();
    let incident: BTreeSet<usize> = mesh.vertex_fan(v).iter().map(|&t| graph.chart_of_triangle(t)).collect();
    for &c in &incident {
        if graph.charts[c].triangles.iter().all(|t| in_disk.contains(t)) {
            return Err(OperatorError::RadiusExceedsCharts);
        }
    }
    let present: BTreeSet<Label> = incident.iter().map(|&c| graph.charts[c].label).collect();
    let mut candidates: Vec<Label> =
        Label::ALL.into_iter().filter(|l| present.iter().all(|p| p.axis() != l.axis())).collect();
    if candidates.is_empty() {
        candidates = Label::ALL.into_iter().filter(|l| !present.contains(l)).collect();
    }
    match best_label(mesh, &disk, candidates) {
        Some(label) => Ok(OperatorOutcome::relabel(labeling, &disk, label)),
        None => Ok(OperatorOutcome::unchanged(labeling)),
    }
}

/// Re-optimize a chart's triangles allowing only its neighbors' labels.
pub fn remove_chart(
    mesh: &SurfaceMesh,
    labeling: &Labeling,
    graph: &LabelingGraph,
    chart: usize,
    params: &GraphCutParams,
) -> Result<OperatorOutcome, OperatorError> {
    check_chart(graph, chart)?;
    let c = &graph.charts[chart];
    let mut mask: LabelSet = c.neighbors.iter().map(|&n| graph.charts[n].label).collect();
    mask.remove(c.label);
    if mask.is_empty() {
        return Ok(OperatorOutcome::unchanged(labeling));
    }
    let masks = vec![mask; c.triangles.len()];
    let out = restricted_relabel(mesh, labeling, &c.triangles, &masks, params)?;
    Ok(OperatorOutcome::between(labeling, out))
}

#[cfg(test)]
mod tests {
    use super::super::testing::{assert_contract, graph};
    use super::*;
    use crate::labeling::naive_labeling;
    use crate::shapes;
    use crate::validity::validate_labeling;

    #[test]
    fn strip_separates_opposite_charts() {
        let mesh = shapes::wedge(6);
        let l = naive_labeling(&mesh);
        let g = graph(&mesh, &l);
        let r = validate_labeling(&mesh, &g, &ValidityConfig::default());
        let b = r.invalid_boundaries[0];
        let out = fix_invalid_boundary(&mesh, &l, &g, b, 2).unwrap();
        assert!(out.applied);
        assert_contract(&l, &out);
        for &e in &g.boundaries[b].edges {
            let [t0, t1] = mesh.edge(e).triangles;
            let (a, b) = (out.labeling[t0], out.labeling[t1]);
            assert!(a == b || a.axis() != b.axis());
        }
        let g2 = graph(&mesh, &out.labeling);
        assert!(validate_labeling(&mesh, &g2, &ValidityConfig::default()).invalid_boundaries.is_empty());
        // Deterministic.
        assert_eq!(fix_invalid_boundary(&mesh, &l, &g, b, 2).unwrap(), out);
    }

    #[test]
    fn orthogonal_boundary_is_left_alone() {
        let mesh = shapes::cube(2);
        let l = naive_labeling(&mesh);
        let g = graph(&mesh, &l);
        let out = fix_invalid_boundary(&mesh, &l, &g, 0, 3).unwrap();
        assert!(!out.applied);
        assert_eq!(out.labeling, l);
    }

    #[test]
    fn apex_disk() {
        let mesh = shapes::pyramid(4, 1.5);
        let l = naive_labeling(&mesh);
        let g = graph(&mesh, &l);
        let cfg = ValidityConfig::default();
        let apex = g.corners.iter().find(|c| mesh.vertex(c.vertex).z > 1.0).unwrap();
        let out = fix_invalid_corner(&mesh, &l, &g, apex.id, 1, &cfg).unwrap();
        assert!(out.applied);
        assert_contract(&l, &out);
        assert!(out.changed.iter().all(|&t| out.labeling[t] == Label::POS_Z));
        let g2 = graph(&mesh, &out.labeling);
        assert!(g2.corner_at(apex.vertex).is_none());
        let r = validate_labeling(&mesh, &g2, &cfg);
        assert!(r.invalid_corners.is_empty(), "{:?}", r);

        // A valid corner is not a target.
        let base = g.corners.iter().find(|c| corner_valid(&g, c.id, &cfg)).unwrap();
        assert!(!fix_invalid_corner(&mesh, &l, &g, base.id, 1, &cfg).unwrap().applied);
        // Disk larger than the charts.
        assert_eq!(fix_invalid_corner(&mesh, &l, &g, apex.id, 50, &cfg), Err(OperatorError::RadiusExceedsCharts));
    }

    #[test]
    fn sliver_is_absorbed() {
        let mesh = shapes::cube(3);
        let mut l = naive_labeling(&mesh);
        let t = (0..mesh.triangle_count()).find(|&t| l[t] == Label::POS_Y && mesh.centroid(t).x > 0.4 && mesh.centroid(t).x < 0.6 && mesh.centroid(t).z > 0.4 && mesh.centroid(t).z < 0.6).unwrap();
        l[t] = Label::POS_X;
        let g = graph(&mesh, &l);
        let c = g.chart_of_triangle(t);
        let out = remove_chart(&mesh, &l, &g, c, &GraphCutParams::default()).unwrap();
        assert_contract(&l, &out);
        assert_eq!(out.changed, vec![t]);
        assert_eq!(out.labeling, naive_labeling(&mesh));
    }

    #[test]
    fn whole_mesh_chart_is_kept() {
        let mesh = shapes::cube(1);
        let l = Labeling::constant(mesh.triangle_count(), Label::POS_Z);
        let g = graph(&mesh, &l);
        assert!(!remove_chart(&mesh, &l, &g, 0, &GraphCutParams::default()).unwrap().applied);
    }
}
