//! Charts, boundaries and corners induced by a labeling, and turning-points
//! along boundaries.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::labeling::{Axis, Label, Labeling};
use crate::mesh::SurfaceMesh;

/// Maximal edge-connected set of same-label triangles.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub id: usize,
    pub label: Label,
    /// Sorted triangle ids.
    pub triangles: Vec<usize>,
    /// Sorted ids of edge-adjacent charts.
    pub neighbors: Vec<usize>,
    /// Every contour edge is a sharp feature edge.
    pub surrounded_by_feature_edges: bool,
}

impl Chart {
    pub fn valence(&self) -> usize {
        self.neighbors.len()
    }
}

/// Ordered edge path separating two charts.
#[derive(Clone, Debug, PartialEq)]
pub struct Boundary {
    pub id: usize,
    /// Path vertices; `edges.len() + 1` entries. Closed boundaries repeat
    /// their first vertex at the end.
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    /// Chart on the left of the traversal (outside view).
    pub left_chart: usize,
    pub right_chart: usize,
    pub start_corner: Option<usize>,
    pub end_corner: Option<usize>,
    /// Axis of the boundary in the polycube; `None` between same-axis charts.
    pub axis: Option<Axis>,
    /// Every edge of the path is a sharp feature edge.
    pub on_feature_edges: bool,
    /// Turning-point vertices in traversal order.
    pub turning_points: Vec<usize>,
}

impl Boundary {
    pub fn is_closed(&self) -> bool {
        self.start_corner.is_none()
    }

    pub fn is_monotone(&self) -> bool {
        self.turning_points.is_empty()
    }

    pub fn charts(&self) -> [usize; 2] {
        [self.left_chart, self.right_chart]
    }

    pub fn other_chart(&self, c: usize) -> usize {
        if self.left_chart == c {
            self.right_chart
        } else {
            self.left_chart
        }
    }
}

/// Vertex where three or more boundaries meet.
#[derive(Clone, Debug, PartialEq)]
pub struct Corner {
    pub id: usize,
    pub vertex: usize,
    /// Incident boundaries in CCW order, one entry per incident boundary
    /// edge (a loop returning to its own corner appears twice).
    pub boundaries: Vec<usize>,
}

impl Corner {
    pub fn valence(&self) -> usize {
        self.boundaries.len()
    }
}

/// Cyclic contour of a chart, chart on the left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContourCycle {
    /// `vertices[i] -> vertices[(i + 1) % n]` runs along `edges[i]`.
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

/// Parameters of turning-point detection.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TurningPointParams {
    /// Cost of one direction flip between consecutive boundary edges.
    pub flip_penalty: f64,
}

impl Default for TurningPointParams {
    fn default() -> Self {
        TurningPointParams { flip_penalty: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabelingGraph {
    pub charts: Vec<Chart>,
    pub boundaries: Vec<Boundary>,
    pub corners: Vec<Corner>,
    triangle_chart: Vec<usize>,
    edge_boundary: Vec<Option<usize>>,
    vertex_corner: Vec<Option<usize>>,
    vertex_degree: Vec<u16>,
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the lowest index as root.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Charts by union-find, then boundaries traced corner to corner.
/// Turning-points are left empty; see [`detect_turning_points`].
pub fn build_labeling_graph(mesh: &SurfaceMesh, labeling: &Labeling) -> LabelingGraph {
    assert_eq!(labeling.len(), mesh.triangle_count(), "labeling does not match mesh");
    let nt = mesh.triangle_count();
    let mut ds = DisjointSet::new(nt);
    for edge in mesh.edges() {
        let [a, b] = edge.triangles;
        if labeling[a] == labeling[b] {
            ds.union(a, b);
        }
    }

    let mut root_chart = vec![usize::MAX; nt];
    let mut triangle_chart = vec![0; nt];
    let mut charts: Vec<Chart> = Vec::new();
    for t in 0..nt {
        let r = ds.find(t);
        if root_chart[r] == usize::MAX {
            root_chart[r] = charts.len();
            charts.push(Chart {
                id: charts.len(),
                label: labeling[t],
                triangles: Vec::new(),
                neighbors: Vec::new(),
                surrounded_by_feature_edges: true,
            });
        }
        triangle_chart[t] = root_chart[r];
        charts[root_chart[r]].triangles.push(t);
    }

    let ne = mesh.edge_count();
    let mut is_cut = vec![false; ne];
    let mut vertex_degree = vec![0u16; mesh.vertex_count()];
    let mut neighbor_sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); charts.len()];
    for (e, edge) in mesh.edges().iter().enumerate() {
        let [a, b] = edge.triangles.map(|t| triangle_chart[t]);
        if a != b {
            is_cut[e] = true;
            vertex_degree[edge.vertices[0]] += 1;
            vertex_degree[edge.vertices[1]] += 1;
            neighbor_sets[a].insert(b);
            neighbor_sets[b].insert(a);
            if !mesh.is_feature_edge(e) {
                charts[a].surrounded_by_feature_edges = false;
                charts[b].surrounded_by_feature_edges = false;
            }
        }
    }
    for (c, set) in neighbor_sets.into_iter().enumerate() {
        charts[c].neighbors = set.into_iter().collect();
        if charts[c].neighbors.is_empty() {
            charts[c].surrounded_by_feature_edges = false;
        }
    }

    let mut vertex_corner = vec![None; mesh.vertex_count()];
    let mut corners = Vec::new();
    for v in 0..mesh.vertex_count() {
        if vertex_degree[v] >= 3 {
            vertex_corner[v] = Some(corners.len());
            corners.push(Corner { id: corners.len(), vertex: v, boundaries: Vec::new() });
        }
    }

    let mut edge_boundary: Vec<Option<usize>> = vec![None; ne];
    let mut boundaries = Vec::new();
    let trace = |start: usize, first_edge: usize, edge_boundary: &mut Vec<Option<usize>>, id: usize| {
        let mut vertices = vec![start];
        let mut edges = Vec::new();
        let (mut cur, mut e) = (start, first_edge);
        loop {
            edge_boundary[e] = Some(id);
            edges.push(e);
            let next = mesh.edge(e).other_vertex(cur);
            vertices.push(next);
            if vertex_corner[next].is_some() || next == start {
                break;
            }
            let cont = mesh.vertex_edges(next).into_iter().find(|&f| f != e && is_cut[f] && edge_boundary[f].is_none());
            match cont {
                Some(f) => {
                    cur = next;
                    e = f;
                }
                None => break,
            }
        }
        (vertices, edges)
    };
    let make = |id: usize, vertices: Vec<usize>, edges: Vec<usize>| {
        let left_t = mesh.left_triangle(vertices[0], vertices[1]).expect("path edge exists");
        let right_t = mesh.edge(edges[0]).other_triangle(left_t);
        let (left_chart, right_chart) = (triangle_chart[left_t], triangle_chart[right_t]);
        let axis = Axis::third(charts[left_chart].label.axis(), charts[right_chart].label.axis());
        let on_feature_edges = edges.iter().all(|&e| mesh.is_feature_edge(e));
        let start_corner = vertex_corner[vertices[0]];
        let end_corner = vertex_corner[*vertices.last().unwrap()];
        Boundary {
            id,
            vertices,
            edges,
            left_chart,
            right_chart,
            start_corner,
            end_corner,
            axis,
            on_feature_edges,
            turning_points: Vec::new(),
        }
    };

    for c in 0..corners.len() {
        let v = corners[c].vertex;
        for e in mesh.vertex_edges(v) {
            if is_cut[e] && edge_boundary[e].is_none() {
                let id = boundaries.len();
                let (vertices, edges) = trace(v, e, &mut edge_boundary, id);
                boundaries.push(make(id, vertices, edges));
            }
        }
    }
    for e in 0..ne {
        if is_cut[e] && edge_boundary[e].is_none() {
            let id = boundaries.len();
            let start = mesh.edge(e).vertices[0];
            let (vertices, edges) = trace(start, e, &mut edge_boundary, id);
            boundaries.push(make(id, vertices, edges));
        }
    }

    for corner in &mut corners {
        corner.boundaries = mesh
            .vertex_edges(corner.vertex)
            .into_iter()
            .filter_map(|e| if is_cut[e] { edge_boundary[e] } else { None })
            .collect();
    }

    LabelingGraph { charts, boundaries, corners, triangle_chart, edge_boundary, vertex_corner, vertex_degree }
}

impl LabelingGraph {
    /// Structure plus turning-points.
    pub fn build(mesh: &SurfaceMesh, labeling: &Labeling, params: &TurningPointParams) -> Self {
        let mut g = build_labeling_graph(mesh, labeling);
        detect_turning_points(mesh, &mut g, params);
        g
    }

    pub fn chart_of_triangle(&self, t: usize) -> usize {
        self.triangle_chart[t]
    }

    pub fn boundary_of_edge(&self, e: usize) -> Option<usize> {
        self.edge_boundary[e]
    }

    pub fn corner_at(&self, v: usize) -> Option<usize> {
        self.vertex_corner[v]
    }

    /// Number of boundary edges incident to `v`.
    pub fn boundary_degree(&self, v: usize) -> usize {
        self.vertex_degree[v] as usize
    }

    pub fn is_on_boundary(&self, v: usize) -> bool {
        self.vertex_degree[v] > 0
    }

    pub fn turning_point_count(&self) -> usize {
        self.boundaries.iter().map(|b| b.turning_points.len()).sum()
    }

    /// `(boundary id, vertex)` for every turning-point, sorted by vertex.
    pub fn turning_points(&self) -> Vec<(usize, usize)> {
        let mut tps: Vec<(usize, usize)> =
            self.boundaries.iter().flat_map(|b| b.turning_points.iter().map(move |&v| (b.id, v))).collect();
        tps.sort_by_key(|&(b, v)| (v, b));
        tps
    }

    pub fn is_all_monotone(&self) -> bool {
        self.boundaries.iter().all(Boundary::is_monotone)
    }

    /// `#charts - #boundaries + #corners`.
    pub fn euler_characteristic(&self) -> i64 {
        self.charts.len() as i64 - self.boundaries.len() as i64 + self.corners.len() as i64
    }

    /// Euler characteristic of the triangles of chart `c` (1 for a disk).
    pub fn chart_euler_characteristic(&self, mesh: &SurfaceMesh, c: usize) -> i64 {
        let tris = &self.charts[c].triangles;
        let mut verts = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for &t in tris {
            verts.extend(mesh.triangle(t));
            edges.extend(mesh.triangle_edges(t));
        }
        verts.len() as i64 - edges.len() as i64 + tris.len() as i64
    }

    /// Every chart is a disk and every boundary runs between corners.
    pub fn is_disk_layout(&self, mesh: &SurfaceMesh) -> bool {
        (0..self.charts.len()).all(|c| self.chart_euler_characteristic(mesh, c) == 1)
            && self.boundaries.iter().all(|b| !b.is_closed())
    }
}

/// Contour cycles of `chart`, each oriented with the chart on its left.
pub fn chart_contour(mesh: &SurfaceMesh, graph: &LabelingGraph, chart: usize) -> Vec<ContourCycle> {
    let inside = |t: usize| graph.chart_of_triangle(t) == chart;
    // Directed contour edges keyed by start vertex.
    let mut directed: Vec<(usize, usize, usize)> = Vec::new();
    for &t in &graph.charts[chart].triangles {
        let tri = mesh.triangle(t);
        for i in 0..3 {
            if !inside(mesh.triangle_adjacency(t)[i]) {
                directed.push((tri[i], tri[(i + 1) % 3], mesh.triangle_edges(t)[i]));
            }
        }
    }
    directed.sort_unstable_by_key(|&(_, _, e)| e);
    let mut used = BTreeSet::new();
    let mut cycles = Vec::new();
    for &(a0, b0, e0) in &directed {
        if used.contains(&e0) {
            continue;
        }
        let mut cycle = ContourCycle { vertices: Vec::new(), edges: Vec::new() };
        let (mut a, mut b, mut e) = (a0, b0, e0);
        loop {
            used.insert(e);
            cycle.vertices.push(a);
            cycle.edges.push(e);
            // Rotate clockwise around b inside the chart to the outgoing edge.
            let mut t = mesh.left_triangle(a, b).expect("contour edge");
            let (next, next_edge) = loop {
                let i = crate::mesh::local_index(&mesh.triangle(t), b);
                let nb = mesh.triangle_adjacency(t)[i];
                if !inside(nb) {
                    break (mesh.triangle(t)[(i + 1) % 3], mesh.triangle_edges(t)[i]);
                }
                t = nb;
            };
            a = b;
            b = next;
            e = next_edge;
            if e == e0 || used.contains(&e) {
                break;
            }
        }
        cycles.push(cycle);
    }
    cycles
}

/// Unary costs `(+, -)` of an edge whose traversal direction has dot
/// product `score` with the boundary axis.
fn unary(score: f64) -> [f64; 2] {
    [(1.0 - score) / 2.0, (1.0 + score) / 2.0]
}

/// Energy of a binary chain labeling (`true` = along the axis).
pub fn chain_energy(scores: &[f64], labels: &[bool], flip_penalty: f64, cyclic: bool) -> f64 {
    let mut e: f64 = scores.iter().zip(labels).map(|(&s, &l)| unary(s)[usize::from(!l)]).sum();
    for w in labels.windows(2) {
        if w[0] != w[1] {
            e += flip_penalty;
        }
    }
    if cyclic && labels.len() > 1 && labels[0] != labels[labels.len() - 1] {
        e += flip_penalty;
    }
    e
}

/// Exact minimum of [`chain_energy`] by dynamic programming. Ties prefer
/// `true`, and for cyclic chains a `true` first edge.
pub fn optimal_chain_labels(scores: &[f64], flip_penalty: f64, cyclic: bool) -> Vec<bool> {
    if scores.is_empty() {
        return Vec::new();
    }
    if !cyclic {
        return chain_dp(scores, flip_penalty, None).0;
    }
    let (a, ea) = chain_dp(scores, flip_penalty, Some(true));
    let (b, eb) = chain_dp(scores, flip_penalty, Some(false));
    if eb < ea - 1e-12 {
        b
    } else {
        a
    }
}

/// Viterbi over two states. With `first = Some(x)` the first label is fixed
/// and the wrap-around flip is charged.
fn chain_dp(scores: &[f64], flip: f64, first: Option<bool>) -> (Vec<bool>, f64) {
    let n = scores.len();
    // state 0 = true (+), 1 = false (-)
    let mut cost = [0.0f64; 2];
    let mut back: Vec<[usize; 2]> = Vec::with_capacity(n);
    for s in 0..2 {
        let u = unary(scores[0])[s];
        cost[s] = match first {
            Some(f) if usize::from(!f) != s => f64::INFINITY,
            _ => u,
        };
    }
    back.push([0, 1]);
    for &score in &scores[1..] {
        let u = unary(score);
        let mut next = [0.0; 2];
        let mut from = [0usize; 2];
        for s in 0..2 {
            let stay = cost[s];
            let switch = cost[1 - s] + flip;
            if stay <= switch {
                next[s] = stay + u[s];
                from[s] = s;
            } else {
                next[s] = switch + u[s];
                from[s] = 1 - s;
            }
        }
        cost = next;
        back.push(from);
    }
    if let Some(f) = first {
        let fs = usize::from(!f);
        if n > 1 {
            cost[1 - fs] += flip;
        }
    }
    let mut s = if cost[0] <= cost[1] { 0 } else { 1 };
    let energy = cost[s];
    let mut labels = vec![false; n];
    for i in (0..n).rev() {
        labels[i] = s == 0;
        s = back[i][s];
    }
    (labels, energy)
}

/// Fill `turning_points` of every boundary with a defined axis.
pub fn detect_turning_points(mesh: &SurfaceMesh, graph: &mut LabelingGraph, params: &TurningPointParams) {
    for b in &mut graph.boundaries {
        b.turning_points.clear();
        let Some(axis) = b.axis else { continue };
        let dir = axis.unit();
        let scores: Vec<f64> = b
            .vertices
            .windows(2)
            .map(|w| (mesh.vertex(w[1]) - mesh.vertex(w[0])).normalized().map_or(0.0, |u| u.dot(dir)))
            .collect();
        let closed = b.is_closed();
        let labels = optimal_chain_labels(&scores, params.flip_penalty, closed);
        for i in 1..labels.len() {
            if labels[i] != labels[i - 1] {
                b.turning_points.push(b.vertices[i]);
            }
        }
        if closed && labels.len() > 1 && labels[0] != labels[labels.len() - 1] {
            b.turning_points.push(b.vertices[0]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::naive_labeling;
    use crate::shapes;

    #[test]
    fn naive_cube_graph() {
        let mesh = shapes::cube(3);
        let g = LabelingGraph::build(&mesh, &naive_labeling(&mesh), &TurningPointParams::default());
        assert_eq!((g.charts.len(), g.boundaries.len(), g.corners.len()), (6, 12, 8));
        assert!(g.charts.iter().all(|c| c.valence() == 4 && c.surrounded_by_feature_edges));
        assert!(g.corners.iter().all(|c| c.valence() == 3));
        assert!(g.boundaries.iter().all(|b| b.axis.is_some() && b.edges.len() == 3 && b.on_feature_edges));
        assert_eq!(g.turning_point_count(), 0);
        assert_eq!(g.euler_characteristic(), 2);
        assert!(g.is_disk_layout(&mesh));
    }

    #[test]
    fn constant_labeling_is_one_chart() {
        let mesh = shapes::cube(2);
        let g = build_labeling_graph(&mesh, &Labeling::constant(mesh.triangle_count(), Label::POS_Z));
        assert_eq!((g.charts.len(), g.boundaries.len(), g.corners.len()), (1, 0, 0));
        assert!(!g.charts[0].surrounded_by_feature_edges);
    }

    #[test]
    fn boundary_paths_are_consistent() {
        let mesh = shapes::icosphere(3);
        let l = naive_labeling(&mesh);
        let g = build_labeling_graph(&mesh, &l);
        let mut covered = 0;
        for b in &g.boundaries {
            assert_eq!(b.vertices.len(), b.edges.len() + 1);
            for (i, &e) in b.edges.iter().enumerate() {
                let edge = mesh.edge(e);
                assert!(edge.has_vertex(b.vertices[i]) && edge.has_vertex(b.vertices[i + 1]));
                assert_eq!(g.boundary_of_edge(e), Some(b.id));
                let [t0, t1] = edge.triangles;
                let charts = [g.chart_of_triangle(t0), g.chart_of_triangle(t1)];
                assert!(charts.contains(&b.left_chart) && charts.contains(&b.right_chart));
            }
            let lt = mesh.left_triangle(b.vertices[0], b.vertices[1]).unwrap();
            assert_eq!(g.chart_of_triangle(lt), b.left_chart);
            covered += b.edges.len();
        }
        let cut = mesh.edges().iter().filter(|e| l[e.triangles[0]] != l[e.triangles[1]]).count();
        assert_eq!(covered, cut);
        assert_eq!(g.charts.iter().map(|c| c.triangles.len()).sum::<usize>(), mesh.triangle_count());
    }

    #[test]
    fn split_cylinder_wall() {
        let mesh = shapes::cylinder(16, 2, 1.0, 2.0);
        // Caps ±Z; wall split into +X / -X halves by the sign of x.
        let labels = (0..mesh.triangle_count())
            .map(|t| {
                let n = mesh.normal(t);
                if n.z > 0.5 {
                    Label::POS_Z
                } else if n.z < -0.5 {
                    Label::NEG_Z
                } else if mesh.centroid(t).x > 0.0 {
                    Label::POS_X
                } else {
                    Label::NEG_X
                }
            })
            .collect();
        let g = LabelingGraph::build(&mesh, &Labeling::new(labels), &TurningPointParams::default());
        assert_eq!(g.charts.len(), 4);
        // Where the wall split meets each cap rim: 2 corners per cap.
        assert_eq!(g.corners.len(), 4);
        assert!(g.corners.iter().all(|c| c.valence() == 3));
        // Each cap rim splits into 2 arcs, plus the 2 vertical wall seams.
        assert_eq!(g.boundaries.len(), 6);
        assert!(g.boundaries.iter().all(|b| !b.is_closed()));
    }

    #[test]
    fn contours() {
        let mesh = shapes::cube(2);
        let g = build_labeling_graph(&mesh, &naive_labeling(&mesh));
        for c in 0..g.charts.len() {
            let cycles = chart_contour(&mesh, &g, c);
            assert_eq!(cycles.len(), 1);
            assert_eq!(cycles[0].edges.len(), 8);
            let corners = cycles[0].vertices.iter().filter(|&&v| g.corner_at(v).is_some()).count();
            assert_eq!(corners, 4);
            for (i, &v) in cycles[0].vertices.iter().enumerate() {
                let w = cycles[0].vertices[(i + 1) % cycles[0].vertices.len()];
                assert_eq!(g.chart_of_triangle(mesh.left_triangle(v, w).unwrap()), c);
            }
        }
        // Annular wall of a cylinder whose wall is one chart.
        let cyl = shapes::cylinder(12, 2, 1.0, 1.0);
        let labels = (0..cyl.triangle_count())
            .map(|t| if cyl.normal(t).z.abs() > 0.5 { Label::POS_Z } else { Label::POS_X })
            .collect();
        let g = build_labeling_graph(&cyl, &Labeling::new(labels));
        let wall = g.charts.iter().find(|c| c.label == Label::POS_X).unwrap().id;
        assert_eq!(chart_contour(&cyl, &g, wall).len(), 2);
        // Single triangle chart.
        let mut l = naive_labeling(&mesh);
        l[0] = l[0].opposite();
        let g = build_labeling_graph(&mesh, &l);
        let c = g.chart_of_triangle(0);
        let cycles = chart_contour(&mesh, &g, c);
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].edges.len(), 3);
    }

    #[test]
    fn chain_dp_basics() {
        assert_eq!(optimal_chain_labels(&[1.0; 5], 1.0, false), vec![true; 5]);
        assert_eq!(optimal_chain_labels(&[-1.0; 5], 1.0, false), vec![false; 5]);
        // Go up three edges then down three: one flip.
        let l = optimal_chain_labels(&[1.0, 1.0, 1.0, -1.0, -1.0, -1.0], 1.0, false);
        assert_eq!(l, vec![true, true, true, false, false, false]);
        // Zigzag with a large flip penalty stays uniform.
        let z: Vec<f64> = (0..9).map(|i| if i % 2 == 0 { 0.6 } else { -0.4 }).collect();
        let l = optimal_chain_labels(&z, 5.0, false);
        assert!(l.iter().all(|&x| x));
    }
}
