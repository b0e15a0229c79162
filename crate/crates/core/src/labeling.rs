//! Signed-axis labels, labelings and the quality metrics defined on them.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use crate::geom::Vec3;
use crate::mesh::SurfaceMesh;

/// Principal axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Axis {
        Axis::ALL[i]
    }

    pub fn unit(self) -> Vec3 {
        match self {
            Axis::X => Vec3::new(1.0, 0.0, 0.0),
            Axis::Y => Vec3::new(0.0, 1.0, 0.0),
            Axis::Z => Vec3::new(0.0, 0.0, 1.0),
        }
    }

    /// The axis orthogonal to two distinct axes.
    pub fn third(a: Axis, b: Axis) -> Option<Axis> {
        (a != b).then(|| Axis::from_index(3 - a.index() - b.index()))
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LabelError {
    #[error("label value {0} is outside 0..=5")]
    OutOfRange(u32),
    #[error("cannot label a zero-length normal")]
    ZeroNormal,
    #[error("labeling has {labels} entries but the mesh has {triangles} triangles")]
    LengthMismatch { labels: usize, triangles: usize },
}

/// One of the six signed axes, encoded `+X, -X, +Y, -Y, +Z, -Z` = `0..=5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(u8);

impl Label {
    pub const POS_X: Label = Label(0);
    pub const NEG_X: Label = Label(1);
    pub const POS_Y: Label = Label(2);
    pub const NEG_Y: Label = Label(3);
    pub const POS_Z: Label = Label(4);
    pub const NEG_Z: Label = Label(5);

    pub const ALL: [Label; 6] = [Label(0), Label(1), Label(2), Label(3), Label(4), Label(5)];

    pub fn new(value: u32) -> Result<Label, LabelError> {
        if value < 6 {
            Ok(Label(value as u8))
        } else {
            Err(LabelError::OutOfRange(value))
        }
    }

    pub fn from_axis(axis: Axis, positive: bool) -> Label {
        Label(axis.index() as u8 * 2 + u8::from(!positive))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn axis(self) -> Axis {
        Axis::from_index(self.index() / 2)
    }

    pub fn is_positive(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn sign(self) -> f64 {
        if self.is_positive() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn opposite(self) -> Label {
        Label(self.0 ^ 1)
    }

    pub fn direction(self) -> Vec3 {
        self.axis().unit() * self.sign()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.is_positive() { '+' } else { '-' };
        write!(f, "{s}{}", self.axis().name())
    }
}

/// Small set of labels as a 6-bit mask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct LabelSet(u8);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);
    pub const FULL: LabelSet = LabelSet(0b11_1111);

    pub fn single(l: Label) -> Self {
        LabelSet(1 << l.0)
    }

    pub fn contains(self, l: Label) -> bool {
        self.0 & (1 << l.0) != 0
    }

    pub fn insert(&mut self, l: Label) {
        self.0 |= 1 << l.0;
    }

    pub fn remove(&mut self, l: Label) {
        self.0 &= !(1 << l.0);
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Label> {
        Label::ALL.into_iter().filter(move |&l| self.contains(l))
    }
}

impl FromIterator<Label> for LabelSet {
    fn from_iter<I: IntoIterator<Item = Label>>(iter: I) -> Self {
        let mut s = LabelSet::EMPTY;
        for l in iter {
            s.insert(l);
        }
        s
    }
}

/// Per-triangle label assignment.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Labeling(Vec<Label>);

impl Labeling {
    pub fn new(labels: Vec<Label>) -> Self {
        Labeling(labels)
    }

    pub fn constant(len: usize, label: Label) -> Self {
        Labeling(alloc::vec![label; len])
    }

    pub fn from_values(values: &[u32]) -> Result<Self, LabelError> {
        values.iter().map(|&v| Label::new(v)).collect::<Result<Vec<_>, _>>().map(Labeling)
    }

    pub fn check_matches(&self, mesh: &SurfaceMesh) -> Result<(), LabelError> {
        if self.0.len() == mesh.triangle_count() {
            Ok(())
        } else {
            Err(LabelError::LengthMismatch { labels: self.0.len(), triangles: mesh.triangle_count() })
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Label] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Label> + '_ {
        self.0.iter().copied()
    }

    /// Triangles whose label differs from `other`.
    pub fn diff(&self, other: &Labeling) -> Vec<usize> {
        self.0.iter().zip(&other.0).enumerate().filter(|(_, (a, b))| a != b).map(|(i, _)| i).collect()
    }

    /// Apply a global signed-axis permutation to every label.
    pub fn remapped(&self, map: impl Fn(Label) -> Label) -> Labeling {
        Labeling(self.0.iter().map(|&l| map(l)).collect())
    }
}

impl Index<usize> for Labeling {
    type Output = Label;
    fn index(&self, t: usize) -> &Label {
        &self.0[t]
    }
}

impl IndexMut<usize> for Labeling {
    fn index_mut(&mut self, t: usize) -> &mut Label {
        &mut self.0[t]
    }
}

/// Label whose direction has the largest dot product with `normal`;
/// exact ties go to the lowest encoding.
pub fn nearest_label(normal: Vec3) -> Result<Label, LabelError> {
    if !(normal.norm() > 1e-12) {
        return Err(LabelError::ZeroNormal);
    }
    Ok(nearest_label_unchecked(normal))
}

pub(crate) fn nearest_label_unchecked(normal: Vec3) -> Label {
    let mut best = Label::POS_X;
    let mut best_dot = f64::NEG_INFINITY;
    for l in Label::ALL {
        let d = normal.dot(l.direction());
        if d > best_dot {
            best = l;
            best_dot = d;
        }
    }
    best
}

/// Per-triangle nearest label.
pub fn naive_labeling(mesh: &SurfaceMesh) -> Labeling {
    Labeling(mesh.normals().iter().map(|&n| nearest_label_unchecked(n)).collect())
}

/// Alignment of a unit normal with a label direction in `[0, 1]`.
pub fn triangle_fidelity(normal: Vec3, label: Label) -> f64 {
    ((1.0 + normal.dot(label.direction())) / 2.0).clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FidelityStats {
    #[cfg_attr(feature = "serde", serde(skip))]
    pub per_triangle: Vec<f64>,
    pub min: f64,
    /// Area-weighted mean.
    pub area_weighted: f64,
    /// Plain mean over triangles.
    pub uniform: f64,
}

pub fn fidelity(mesh: &SurfaceMesh, labeling: &Labeling) -> FidelityStats {
    let per_triangle: Vec<f64> =
        (0..mesh.triangle_count()).map(|t| triangle_fidelity(mesh.normal(t), labeling[t])).collect();
    let min = per_triangle.iter().copied().fold(f64::INFINITY, f64::min);
    let total_area = mesh.total_area();
    let area_weighted = per_triangle.iter().zip(mesh.areas()).map(|(f, a)| f * a).sum::<f64>() / total_area;
    let uniform = per_triangle.iter().sum::<f64>() / per_triangle.len() as f64;
    FidelityStats { per_triangle, min, area_weighted, uniform }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureEdgeStats {
    pub preserved: usize,
    pub lost: usize,
    pub ignored: usize,
    pub preserved_ratio: f64,
    pub lost_ratio: f64,
    pub ignored_ratio: f64,
}

/// Preserved / lost counts over sharp feature edges, plus the ignored ones.
pub fn feature_edge_metrics(mesh: &SurfaceMesh, labeling: &Labeling) -> FeatureEdgeStats {
    let mut preserved = 0;
    let mut lost = 0;
    for e in mesh.features().sharp_edges() {
        let [t0, t1] = mesh.edge(e).triangles;
        if labeling[t0] != labeling[t1] {
            preserved += 1;
        } else {
            lost += 1;
        }
    }
    let ignored = mesh.features().ignored().len();
    let total = (preserved + lost + ignored) as f64;
    let ratio = |n: usize| if total > 0.0 { n as f64 / total } else { 0.0 };
    FeatureEdgeStats {
        preserved,
        lost,
        ignored,
        preserved_ratio: ratio(preserved),
        lost_ratio: ratio(lost),
        ignored_ratio: ratio(ignored),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use core::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn label_encoding() {
        assert_eq!(Label::POS_Y.axis(), Axis::Y);
        assert_eq!(Label::NEG_Z.opposite(), Label::POS_Z);
        for l in Label::ALL {
            assert_eq!(l.axis(), l.opposite().axis());
            assert_eq!(Label::from_axis(l.axis(), l.is_positive()), l);
        }
        assert!(Label::new(6).is_err());
        assert_eq!(Label::NEG_X.direction(), Vec3::new(-1.0, 0.0, 0.0));
    }

    #[test]
    fn nearest_label_examples() {
        assert_eq!(nearest_label(Vec3::new(1.0, 0.0, 0.0)).unwrap(), Label::POS_X);
        let n = Vec3::new(-0.1, 0.9, 0.3).normalized().unwrap();
        assert_eq!(nearest_label(n).unwrap(), Label::POS_Y);
        let tie = Vec3::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0);
        assert_eq!(tie.dot(Label::POS_X.direction()), tie.dot(Label::POS_Y.direction()));
        assert_eq!(nearest_label(tie).unwrap(), Label::POS_X);
        assert_eq!(nearest_label(Vec3::ZERO), Err(LabelError::ZeroNormal));
    }

    #[test]
    fn naive_cube_labels_each_face() {
        let mesh = shapes::unit_cube();
        let l = naive_labeling(&mesh);
        let mut counts = [0; 6];
        for t in 0..mesh.triangle_count() {
            counts[l[t].index()] += 1;
            assert!(mesh.normal(t).dot(l[t].direction()) > 0.999);
        }
        assert_eq!(counts, [2; 6]);
        let f = fidelity(&mesh, &l);
        assert_eq!(f.area_weighted, 1.0);
        assert_eq!(f.min, 1.0);
    }

    #[test]
    fn fidelity_of_orthogonal_label_is_half() {
        assert_eq!(triangle_fidelity(Vec3::new(0.0, 0.0, 1.0), Label::POS_X), 0.5);
        let n = Vec3::new(0.3, -0.4, 0.5).normalized().unwrap();
        for l in Label::ALL {
            let s = triangle_fidelity(n, l) + triangle_fidelity(n, l.opposite());
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rotated_cube_keeps_chart_structure() {
        let rot = crate::geom::Mat3::rotation_z(10f64.to_radians());
        let mesh = shapes::transformed(&shapes::unit_cube(), &rot);
        // No normal is within 10° of a tie plane, so labels match the unrotated cube.
        assert_eq!(naive_labeling(&mesh), naive_labeling(&shapes::unit_cube()));
    }

    #[test]
    fn feature_metrics_on_cube() {
        let mesh = shapes::unit_cube();
        let s = feature_edge_metrics(&mesh, &naive_labeling(&mesh));
        assert_eq!((s.preserved, s.lost, s.ignored), (12, 0, 0));
        let c = feature_edge_metrics(&mesh, &Labeling::constant(12, Label::POS_X));
        assert_eq!((c.preserved, c.lost), (0, 12));
    }

    /// Brute-force scan of the L-prism's sharp edges.
    #[test]
    fn feature_metrics_on_l_prism() {
        let mesh = shapes::l_prism(2);
        let l = naive_labeling(&mesh);
        let mut preserved = 0;
        let mut lost = 0;
        for (e, edge) in mesh.edges().iter().enumerate() {
            if mesh.dihedral(e).deviation() >= core::f64::consts::FRAC_PI_4 {
                if l[edge.triangles[0]] != l[edge.triangles[1]] {
                    preserved += 1;
                } else {
                    lost += 1;
                }
            }
        }
        let s = feature_edge_metrics(&mesh, &l);
        assert_eq!((s.preserved, s.lost), (preserved, lost));
        assert_eq!(lost, 0);
        // The reentrant edge (2 segments at subdiv 2) is preserved.
        let reflex = (0..mesh.edge_count()).filter(|&e| mesh.dihedral(e).is_reflex()).collect::<Vec<_>>();
        assert_eq!(reflex.len(), 2);
        for e in reflex {
            let [a, b] = mesh.edge(e).triangles;
            assert_ne!(l[a], l[b]);
        }
    }
}
