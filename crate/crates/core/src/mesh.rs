//! Indexed closed triangle surface with adjacency, geometry and feature edges.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI};

use crate::geom::{angle_between, Vec3};

/// Dihedral deviations below this are considered flat.
pub const FLAT_TOLERANCE: f64 = 1e-9;

/// Default sharpness threshold for feature edges (deviation from flat).
pub const DEFAULT_FEATURE_THRESHOLD: f64 = FRAC_PI_4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("mesh has no triangles")]
    Empty,
    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFiniteCoordinate { vertex: usize },
    #[error("triangle {triangle} references vertex {vertex} which does not exist")]
    VertexOutOfRange { triangle: usize, vertex: usize },
    #[error("triangle {triangle} repeats a vertex")]
    RepeatedVertex { triangle: usize },
    #[error("triangle {triangle} is degenerate (area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("non-manifold edge ({0}, {1}) is shared by {2} triangles")]
    NonManifoldEdge(usize, usize, usize),
    #[error("open boundary: edge ({0}, {1}) has a single incident triangle")]
    OpenBoundary(usize, usize),
    #[error("inconsistent orientation across edge ({0}, {1})")]
    InconsistentOrientation(usize, usize),
    #[error("non-manifold vertex {0}")]
    NonManifoldVertex(usize),
    #[error("feature edge ({0}, {1}) is not an edge of the mesh")]
    UnknownFeatureEdge(usize, usize),
}

/// An undirected mesh edge. `vertices` is sorted; `triangles[0]` is the
/// triangle traversing `vertices[0] -> vertices[1]` in its CCW order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub triangles: [usize; 2],
}

impl Edge {
    pub fn other_vertex(&self, v: usize) -> usize {
        if self.vertices[0] == v {
            self.vertices[1]
        } else {
            self.vertices[0]
        }
    }

    pub fn other_triangle(&self, t: usize) -> usize {
        if self.triangles[0] == t {
            self.triangles[1]
        } else {
            self.triangles[0]
        }
    }

    pub fn has_vertex(&self, v: usize) -> bool {
        self.vertices[0] == v || self.vertices[1] == v
    }
}

/// Interior dihedral angle of an edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DihedralInfo {
    /// Interior angle in `(0, 2π)`; π for flat edges.
    pub interior_angle: f64,
}

impl DihedralInfo {
    /// Unsigned deviation from flat, `|θ - π|`.
    pub fn deviation(&self) -> f64 {
        (self.interior_angle - PI).abs()
    }

    pub fn is_flat(&self) -> bool {
        self.deviation() <= FLAT_TOLERANCE
    }

    pub fn is_convex(&self) -> bool {
        self.interior_angle < PI - FLAT_TOLERANCE
    }

    pub fn is_reflex(&self) -> bool {
        self.interior_angle > PI + FLAT_TOLERANCE
    }
}

/// Sharp (feature) edges plus supplied edges that were too flat to count.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureEdges {
    pub threshold: f64,
    sharp: Vec<bool>,
    ignored: Vec<usize>,
}

impl FeatureEdges {
    pub fn is_sharp(&self, edge: usize) -> bool {
        self.sharp[edge]
    }

    pub fn sharp_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.sharp.iter().enumerate().filter(|(_, &s)| s).map(|(e, _)| e)
    }

    pub fn sharp_count(&self) -> usize {
        self.sharp.iter().filter(|&&s| s).count()
    }

    /// Supplied CAD edges whose dihedral deviation is below the threshold.
    pub fn ignored(&self) -> &[usize] {
        &self.ignored
    }
}

/// Immutable, fully indexed closed 2-manifold triangle mesh.
#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    adjacency: Vec<[usize; 3]>,
    triangle_edges: Vec<[usize; 3]>,
    normals: Vec<Vec3>,
    areas: Vec<f64>,
    edges: Vec<Edge>,
    edge_lookup: BTreeMap<(usize, usize), usize>,
    vertex_fans: Vec<Vec<usize>>,
    dihedrals: Vec<DihedralInfo>,
    features: FeatureEdges,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl SurfaceMesh {
    /// Index a closed triangle mesh. Triangles are CCW seen from outside.
    /// Feature edges are detected with [`DEFAULT_FEATURE_THRESHOLD`].
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        if let Some(v) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(MeshError::NonFiniteCoordinate { vertex: v });
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= vertices.len()) {
                return Err(MeshError::VertexOutOfRange { triangle: t, vertex: v });
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::RepeatedVertex { triangle: t });
            }
        }

        let diag2 = bbox_diagonal_squared(&vertices);
        let mut normals = Vec::with_capacity(triangles.len());
        let mut areas = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|v| vertices[v]);
            let n = (b - a).cross(c - a);
            let area = 0.5 * n.norm();
            if area < 1e-12 * diag2 {
                return Err(MeshError::DegenerateTriangle { triangle: t, area });
            }
            normals.push(n / (2.0 * area));
            areas.push(area);
        }

        // Half-edges grouped by undirected key.
        let mut half: BTreeMap<(usize, usize), Vec<(usize, usize, usize)>> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                half.entry(key(a, b)).or_default().push((a, t, i));
            }
        }

        let mut edges = Vec::with_capacity(half.len());
        let mut edge_lookup = BTreeMap::new();
        let mut adjacency = vec![[usize::MAX; 3]; triangles.len()];
        let mut triangle_edges = vec![[usize::MAX; 3]; triangles.len()];
        for (&(lo, hi), hs) in &half {
            match hs.len() {
                1 => return Err(MeshError::OpenBoundary(lo, hi)),
                2 => {}
                n => return Err(MeshError::NonManifoldEdge(lo, hi, n)),
            }
            let (s0, t0, i0) = hs[0];
            let (s1, t1, i1) = hs[1];
            if s0 == s1 {
                return Err(MeshError::InconsistentOrientation(lo, hi));
            }
            let id = edges.len();
            let tris = if s0 == lo { [t0, t1] } else { [t1, t0] };
            edges.push(Edge { vertices: [lo, hi], triangles: tris });
            edge_lookup.insert((lo, hi), id);
            adjacency[t0][i0] = t1;
            adjacency[t1][i1] = t0;
            triangle_edges[t0][i0] = id;
            triangle_edges[t1][i1] = id;
        }

        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                incident[v].push(t);
            }
        }
        let mut vertex_fans = Vec::with_capacity(vertices.len());
        for (v, inc) in incident.iter().enumerate() {
            let Some(&first) = inc.first() else {
                vertex_fans.push(Vec::new());
                continue;
            };
            let mut fan = Vec::with_capacity(inc.len());
            let mut t = first;
            loop {
                fan.push(t);
                let i = local_index(&triangles[t], v);
                t = adjacency[t][(i + 2) % 3];
                if t == first || fan.len() > inc.len() {
                    break;
                }
            }
            if fan.len() != inc.len() {
                return Err(MeshError::NonManifoldVertex(v));
            }
            vertex_fans.push(fan);
        }

        let mut mesh = SurfaceMesh {
            vertices,
            triangles,
            adjacency,
            triangle_edges,
            normals,
            areas,
            edges,
            edge_lookup,
            vertex_fans,
            dihedrals: Vec::new(),
            features: FeatureEdges { threshold: DEFAULT_FEATURE_THRESHOLD, sharp: Vec::new(), ignored: Vec::new() },
        };
        mesh.dihedrals = (0..mesh.edges.len()).map(|e| mesh.compute_dihedral(e)).collect();
        mesh.features.sharp = mesh.detect_sharp_mask(DEFAULT_FEATURE_THRESHOLD);
        Ok(mesh)
    }

    /// Re-detect feature edges from dihedral angles with `threshold` (radians).
    pub fn with_feature_threshold(mut self, threshold: f64) -> Self {
        self.features = FeatureEdges { threshold, sharp: self.detect_sharp_mask(threshold), ignored: Vec::new() };
        self
    }

    /// Use an explicit list of CAD feature edges (vertex pairs). Edges below
    /// `threshold` are kept aside as "ignored".
    pub fn with_supplied_features(mut self, pairs: &[(usize, usize)], threshold: f64) -> Result<Self, MeshError> {
        let mut sharp = vec![false; self.edges.len()];
        let mut ignored = Vec::new();
        for &(a, b) in pairs {
            let e = self.edge_between(a, b).ok_or(MeshError::UnknownFeatureEdge(a, b))?;
            if self.is_sharp_at(e, threshold) {
                sharp[e] = true;
            } else {
                ignored.push(e);
            }
        }
        ignored.sort_unstable();
        ignored.dedup();
        self.features = FeatureEdges { threshold, sharp, ignored };
        Ok(self)
    }

    /// Edges whose dihedral deviation from flat is at least `threshold`.
    pub fn detect_feature_edges(&self, threshold: f64) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.is_sharp_at(e, threshold)).collect()
    }

    fn is_sharp_at(&self, e: usize, threshold: f64) -> bool {
        let d = self.dihedrals[e].deviation();
        d > FLAT_TOLERANCE && d >= threshold
    }

    fn detect_sharp_mask(&self, threshold: f64) -> Vec<bool> {
        (0..self.edges.len()).map(|e| self.is_sharp_at(e, threshold)).collect()
    }

    fn compute_dihedral(&self, e: usize) -> DihedralInfo {
        let edge = &self.edges[e];
        let [a, b] = edge.vertices;
        let n0 = self.normals[edge.triangles[0]];
        let n1 = self.normals[edge.triangles[1]];
        let dir = (self.vertices[b] - self.vertices[a]).normalized().unwrap_or(Vec3::ZERO);
        // triangles[0] runs a -> b, so a positive turn about a -> b folds inward.
        let cross = n0.cross(n1);
        let signed = libm::atan2(cross.dot(dir), n0.dot(n1));
        DihedralInfo { interior_angle: PI - signed }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Vec3 {
        self.vertices[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    /// Neighbor triangles across local edges `(v0,v1)`, `(v1,v2)`, `(v2,v0)`.
    pub fn triangle_adjacency(&self, t: usize) -> [usize; 3] {
        self.adjacency[t]
    }

    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn normal(&self, t: usize) -> Vec3 {
        self.normals[t]
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&key(a, b)).copied()
    }

    /// The triangle traversing `a -> b` in CCW order (on the left of `a -> b`).
    pub fn left_triangle(&self, a: usize, b: usize) -> Option<usize> {
        let e = self.edge_between(a, b)?;
        let edge = &self.edges[e];
        Some(if edge.vertices[0] == a { edge.triangles[0] } else { edge.triangles[1] })
    }

    /// Triangles around `v` in CCW order seen from outside.
    pub fn vertex_fan(&self, v: usize) -> &[usize] {
        &self.vertex_fans[v]
    }

    /// Edges incident to `v`, CCW ordered; edge `i` lies between fan
    /// triangles `i - 1` and `i`.
    pub fn vertex_edges(&self, v: usize) -> Vec<usize> {
        self.vertex_fans[v]
            .iter()
            .map(|&t| {
                let i = local_index(&self.triangles[t], v);
                self.triangle_edges[t][i]
            })
            .collect()
    }

    pub fn vertex_neighbors(&self, v: usize) -> Vec<usize> {
        self.vertex_edges(v).into_iter().map(|e| self.edges[e].other_vertex(v)).collect()
    }

    /// Interior angle of triangle `t` at its vertex `v`.
    pub fn corner_angle(&self, t: usize, v: usize) -> f64 {
        let tri = self.triangles[t];
        let i = local_index(&tri, v);
        let p = self.vertices[v];
        let a = self.vertices[tri[(i + 1) % 3]] - p;
        let b = self.vertices[tri[(i + 2) % 3]] - p;
        angle_between(a, b)
    }

    pub fn dihedral(&self, e: usize) -> DihedralInfo {
        self.dihedrals[e]
    }

    pub fn features(&self) -> &FeatureEdges {
        &self.features
    }

    pub fn is_feature_edge(&self, e: usize) -> bool {
        self.features.sharp[e]
    }

    pub fn is_on_feature(&self, v: usize) -> bool {
        self.vertex_edges(v).into_iter().any(|e| self.features.sharp[e])
    }

    pub fn centroid(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        (a + b + c) / 3.0
    }

    pub fn bbox_diagonal(&self) -> f64 {
        libm::sqrt(bbox_diagonal_squared(&self.vertices))
    }

    /// Euler characteristic V - E + F over referenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        let v = self.vertex_fans.iter().filter(|f| !f.is_empty()).count() as i64;
        v - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Area-weighted mean of normals over `triangles`.
    pub fn average_normal(&self, triangles: &[usize]) -> Vec3 {
        let mut sum = Vec3::ZERO;
        for &t in triangles {
            sum += self.normals[t] * self.areas[t];
        }
        sum.normalized().unwrap_or(Vec3::ZERO)
    }
}

/// Interior dihedral angle of `edge`, or `None` for an unknown edge id.
pub fn interior_dihedral(mesh: &SurfaceMesh, edge: usize) -> Option<DihedralInfo> {
    (edge < mesh.edge_count()).then(|| mesh.dihedral(edge))
}

pub(crate) fn local_index(tri: &[usize; 3], v: usize) -> usize {
    tri.iter().position(|&x| x == v).expect("vertex not in triangle")
}

fn bbox_diagonal_squared(vertices: &[Vec3]) -> f64 {
    let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    for p in vertices {
        lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    if vertices.is_empty() {
        0.0
    } else {
        (hi - lo).norm_squared()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use core::f64::consts::FRAC_PI_2;

    #[test]
    fn cube_combinatorics() {
        let mesh = shapes::unit_cube();
        assert_eq!(mesh.vertex_count(), 8);
        assert_eq!(mesh.triangle_count(), 12);
        assert_eq!(mesh.edge_count(), 18);
        assert_eq!(mesh.euler_characteristic(), 2);
        for e in mesh.edges() {
            assert_ne!(e.triangles[0], e.triangles[1]);
        }
    }

    #[test]
    fn adjacency_is_symmetric() {
        let mesh = shapes::icosphere(2);
        for t in 0..mesh.triangle_count() {
            for (i, &n) in mesh.triangle_adjacency(t).iter().enumerate() {
                let e = mesh.triangle_edges(t)[i];
                let back = mesh.triangle_adjacency(n).iter().position(|&m| m == t).unwrap();
                assert_eq!(mesh.triangle_edges(n)[back], e);
            }
        }
    }

    #[test]
    fn cube_dihedrals() {
        let mesh = shapes::unit_cube();
        let mut right = 0;
        let mut flat = 0;
        for e in 0..mesh.edge_count() {
            let d = mesh.dihedral(e);
            if d.is_flat() {
                flat += 1;
                assert!((d.interior_angle - PI).abs() < 1e-12);
            } else {
                right += 1;
                assert!((d.interior_angle - FRAC_PI_2).abs() < 1e-12);
                assert!(d.is_convex());
            }
        }
        assert_eq!((right, flat), (12, 6));
        assert_eq!(mesh.features().sharp_count(), 12);
    }

    #[test]
    fn l_prism_reentrant_edge_is_reflex() {
        let mesh = shapes::l_prism(1);
        let reflex: Vec<_> = (0..mesh.edge_count()).filter(|&e| mesh.dihedral(e).is_reflex()).collect();
        assert!(!reflex.is_empty());
        for e in reflex {
            assert!((mesh.dihedral(e).interior_angle - 1.5 * PI).abs() < 1e-12);
            let [a, b] = mesh.edge(e).vertices;
            // The reentrant edge is vertical at x = y = 1.
            let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
            assert!((pa.x - 1.0).abs() < 1e-12 && (pa.y - 1.0).abs() < 1e-12);
            assert!((pb.x - 1.0).abs() < 1e-12 && (pb.y - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dihedral_is_orientation_independent() {
        let mesh = shapes::l_prism(2);
        for e in 0..mesh.edge_count() {
            let edge = mesh.edge(e);
            let [a, b] = edge.vertices;
            let (n0, n1) = (mesh.normal(edge.triangles[0]), mesh.normal(edge.triangles[1]));
            // Same formula evaluated from the other triangle's side.
            let dir = (mesh.vertex(a) - mesh.vertex(b)).normalized().unwrap();
            let swapped = PI - libm::atan2(n1.cross(n0).dot(dir), n1.dot(n0));
            assert!((swapped - mesh.dihedral(e).interior_angle).abs() < 1e-12);
        }
    }

    #[test]
    fn icosphere_has_no_features() {
        let mesh = shapes::icosphere(3);
        assert_eq!(2 * mesh.edge_count(), 3 * mesh.triangle_count());
        assert!(mesh.detect_feature_edges(FRAC_PI_4).is_empty());
        assert_eq!(mesh.features().sharp_count(), 0);
    }

    #[test]
    fn zero_threshold_marks_every_non_flat_edge() {
        let mesh = shapes::unit_cube();
        assert_eq!(mesh.detect_feature_edges(0.0).len(), 12);
        let sphere = shapes::icosphere(1);
        assert_eq!(sphere.detect_feature_edges(0.0).len(), sphere.edge_count());
    }

    #[test]
    fn area_weighted_normals_cancel() {
        for mesh in [shapes::unit_cube(), shapes::icosphere(2), shapes::torus(16, 8, 1.0, 0.4)] {
            let mut sum = Vec3::ZERO;
            for t in 0..mesh.triangle_count() {
                sum += mesh.normal(t) * mesh.area(t);
            }
            assert!(sum.norm() < 1e-6 * mesh.total_area());
        }
    }

    #[test]
    fn euler_relation_per_genus() {
        assert_eq!(shapes::icosphere(2).euler_characteristic(), 2);
        assert_eq!(shapes::torus(16, 8, 1.0, 0.4).euler_characteristic(), 0);
        assert_eq!(shapes::cylinder(24, 3, 1.0, 2.0).euler_characteristic(), 2);
    }

    #[test]
    fn supplied_features_split_ignored() {
        let mesh = shapes::unit_cube();
        // One sharp cube edge and one flat diagonal.
        let sharp = mesh.edges().iter().position(|e| !mesh.dihedral(mesh.edge_between(e.vertices[0], e.vertices[1]).unwrap()).is_flat()).unwrap();
        let flat = (0..mesh.edge_count()).find(|&e| mesh.dihedral(e).is_flat()).unwrap();
        let pairs = [
            (mesh.edge(sharp).vertices[0], mesh.edge(sharp).vertices[1]),
            (mesh.edge(flat).vertices[1], mesh.edge(flat).vertices[0]),
        ];
        let mesh = mesh.with_supplied_features(&pairs, FRAC_PI_4).unwrap();
        assert_eq!(mesh.features().sharp_count(), 1);
        assert!(mesh.is_feature_edge(sharp));
        assert_eq!(mesh.features().ignored(), &[flat]);
    }

    #[test]
    fn rejects_open_and_non_manifold_input() {
        let v = vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
        let open = SurfaceMesh::new(v.clone(), vec![[0, 2, 1], [0, 1, 3]]);
        assert!(matches!(open, Err(MeshError::OpenBoundary(..))));

        let mut tris = vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]];
        assert!(SurfaceMesh::new(v.clone(), tris.clone()).is_ok());
        tris.push([0, 1, 2]);
        assert!(matches!(SurfaceMesh::new(v.clone(), tris), Err(MeshError::NonManifoldEdge(..))));

        let flipped = SurfaceMesh::new(v.clone(), vec![[0, 1, 2], [0, 1, 3], [1, 2, 3], [0, 3, 2]]);
        assert!(matches!(flipped, Err(MeshError::InconsistentOrientation(..))));

        let degenerate = vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
        assert!(matches!(
            SurfaceMesh::new(degenerate, vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]]),
            Err(MeshError::DegenerateTriangle { .. })
        ));
    }

    #[test]
    fn fans_are_ccw_cycles() {
        let mesh = shapes::unit_cube();
        for v in 0..mesh.vertex_count() {
            let fan = mesh.vertex_fan(v);
            let edges = mesh.vertex_edges(v);
            assert_eq!(fan.len(), edges.len());
            for i in 0..fan.len() {
                let prev = fan[(i + fan.len() - 1) % fan.len()];
                let e = mesh.edge(edges[i]);
                assert!(e.triangles.contains(&prev) && e.triangles.contains(&fan[i]));
            }
        }
    }
}
