//! Multi-label Potts energy minimization by α-expansion, and the graph-cut
//! labelings built on it.

use alloc::vec;
use alloc::vec::Vec;

use crate::geom::{angle_between, Mat3, Vec3};
use crate::labeling::{nearest_label_unchecked, Label, LabelSet, Labeling};
use crate::maxflow::FlowNetwork;
use crate::mesh::SurfaceMesh;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizeError {
    #[error("node {0} has no allowed label")]
    EmptyMask(usize),
    #[error("initial label of node {0} is not allowed")]
    InitOutsideMask(usize),
    #[error("expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid graph-cut parameter: {0}")]
    InvalidParams(&'static str),
}

/// Unary costs per node and label plus weighted Potts edges.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyProblem {
    data_cost: Vec<[f64; 6]>,
    allowed: Vec<LabelSet>,
    edges: Vec<(usize, usize, f64)>,
}

impl EnergyProblem {
    /// `nodes` nodes, all labels allowed, zero costs, no edges.
    pub fn new(nodes: usize) -> Self {
        EnergyProblem { data_cost: vec![[0.0; 6]; nodes], allowed: vec![LabelSet::FULL; nodes], edges: Vec::new() }
    }

    pub fn node_count(&self) -> usize {
        self.data_cost.len()
    }

    pub fn set_data_cost(&mut self, node: usize, label: Label, cost: f64) {
        self.data_cost[node][label.index()] = cost;
    }

    pub fn add_data_cost(&mut self, node: usize, label: Label, cost: f64) {
        self.data_cost[node][label.index()] += cost;
    }

    pub fn data_cost(&self, node: usize, label: Label) -> f64 {
        if self.allowed[node].contains(label) {
            self.data_cost[node][label.index()]
        } else {
            f64::INFINITY
        }
    }

    pub fn set_allowed(&mut self, node: usize, mask: LabelSet) {
        self.allowed[node] = mask;
    }

    pub fn allowed(&self, node: usize) -> LabelSet {
        self.allowed[node]
    }

    /// Potts edge: costs `weight` when the endpoint labels differ.
    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64) {
        self.edges.push((u, v, weight.max(0.0)));
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn energy(&self, labels: &[Label]) -> f64 {
        let unary: f64 = labels.iter().enumerate().map(|(p, &l)| self.data_cost(p, l)).sum();
        let pairwise: f64 = self.edges.iter().filter(|&&(u, v, _)| labels[u] != labels[v]).map(|&(_, _, w)| w).sum();
        unary + pairwise
    }

    /// Cheapest allowed label per node, ignoring smoothness.
    pub fn unary_argmin(&self) -> Result<Vec<Label>, OptimizeError> {
        (0..self.node_count())
            .map(|p| {
                let mut best: Option<(Label, f64)> = None;
                for l in self.allowed[p].iter() {
                    let c = self.data_cost[p][l.index()];
                    if best.is_none_or(|(_, b)| c < b) {
                        best = Some((l, c));
                    }
                }
                best.map(|(l, _)| l).ok_or(OptimizeError::EmptyMask(p))
            })
            .collect()
    }

    fn check(&self, init: &[Label]) -> Result<(), OptimizeError> {
        if init.len() != self.node_count() {
            return Err(OptimizeError::LengthMismatch { expected: self.node_count(), actual: init.len() });
        }
        if let Some(p) = self.allowed.iter().position(|m| m.is_empty()) {
            return Err(OptimizeError::EmptyMask(p));
        }
        if let Some(p) = init.iter().enumerate().position(|(p, &l)| !self.allowed[p].contains(l)) {
            return Err(OptimizeError::InitOutsideMask(p));
        }
        Ok(())
    }
}

/// Best labeling reachable by one α-expansion move from `current`.
fn expansion_move(problem: &EnergyProblem, current: &[Label], alpha: Label) -> Vec<Label> {
    let n = problem.node_count();
    // x_p = 0 keeps the current label (source side), x_p = 1 switches to α.
    let mut unary = vec![[0.0f64; 2]; n];
    for p in 0..n {
        unary[p][0] = problem.data_cost(p, current[p]);
        unary[p][1] = problem.data_cost(p, alpha);
    }
    let (s, t) = (n, n + 1);
    let mut g = FlowNetwork::new(n + 2);
    for &(p, q, w) in problem.edges() {
        if w == 0.0 {
            continue;
        }
        let cost = |a: Label, b: Label| if a != b { w } else { 0.0 };
        let e00 = cost(current[p], current[q]);
        let e01 = cost(current[p], alpha);
        let e10 = cost(alpha, current[q]);
        // E(x_p, x_q) = e00 + (e10 - e00) x_p + (e11 - e10) x_q + k (1 - x_p) x_q, e11 = 0.
        unary[p][1] += e10 - e00;
        unary[q][1] -= e10;
        let k = e01 + e10 - e00;
        if k > 0.0 {
            g.add_arc(p, q, k);
        }
    }
    for (p, u) in unary.iter().enumerate() {
        let d = u[1] - u[0];
        if d > 0.0 {
            g.add_arc(s, p, d);
        } else if d < 0.0 {
            g.add_arc(p, t, -d);
        }
    }
    let cut = g.min_cut(s, t);
    (0..n).map(|p| if cut.source_side[p] { current[p] } else { alpha }).collect()
}

/// Minimize the Potts energy from `init` with α-expansion. Sweeps labels
/// `0..=5` until a full sweep brings no improvement.
pub fn alpha_expansion(problem: &EnergyProblem, init: &[Label]) -> Result<Vec<Label>, OptimizeError> {
    problem.check(init)?;
    let mut labels = init.to_vec();
    let mut energy = problem.energy(&labels);
    for _sweep in 0..64 {
        let mut improved = false;
        for alpha in Label::ALL {
            if !(0..problem.node_count()).any(|p| problem.allowed(p).contains(alpha) && labels[p] != alpha) {
                continue;
            }
            let candidate = expansion_move(problem, &labels, alpha);
            let e = problem.energy(&candidate);
            let tol = 1e-9 * energy.abs().max(1.0);
            // Keeping every label is a feasible cut, so a move never increases energy.
            debug_assert!(e <= energy + tol, "expansion increased energy: {energy} -> {e}");
            if e < energy - 1e-12 * energy.abs().max(1.0) {
                labels = candidate;
                energy = e;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(labels)
}

/// How the compactness weight of a mesh edge depends on its geometry.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SmoothnessMode {
    /// Constant `λ_c` per edge.
    #[default]
    UniformPotts,
    /// `λ_c · θ` with θ the angle between the incident normals.
    AngleProportional,
    /// `λ_c · exp(-(θ/σ)²)`, σ = 0.25 rad: cheap cuts along creases.
    CreaseDiscount,
}

const CREASE_SIGMA: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GraphCutParams {
    pub compactness: f64,
    pub fidelity: f64,
    /// Triangles whose two best label alignments differ by less are tilted.
    pub sensitivity: f64,
    /// Rotation angle (radians) about X, Y then Z applied to tilted normals.
    pub tilt_angle: f64,
    pub smoothness: SmoothnessMode,
}

impl Default for GraphCutParams {
    fn default() -> Self {
        GraphCutParams {
            compactness: 1.0,
            fidelity: 3.0,
            sensitivity: 1e-10,
            tilt_angle: 0.05,
            smoothness: SmoothnessMode::UniformPotts,
        }
    }
}

impl GraphCutParams {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        if !(self.compactness >= 0.0 && self.compactness.is_finite()) {
            return Err(OptimizeError::InvalidParams("compactness must be finite and non-negative"));
        }
        if !(self.fidelity > 0.0 && self.fidelity.is_finite()) {
            return Err(OptimizeError::InvalidParams("fidelity must be finite and positive"));
        }
        if !(self.sensitivity > 0.0) {
            return Err(OptimizeError::InvalidParams("sensitivity must be positive"));
        }
        if !(self.tilt_angle > 0.0 && self.tilt_angle < core::f64::consts::PI / 8.0) {
            return Err(OptimizeError::InvalidParams("tilt angle must lie in (0, π/8)"));
        }
        Ok(())
    }

    pub fn tilt_rotation(&self) -> Mat3 {
        Mat3::tilt(self.tilt_angle)
    }
}

/// Compactness weight of the mesh edge `e`.
pub fn edge_weight(mesh: &SurfaceMesh, params: &GraphCutParams, e: usize) -> f64 {
    let [t0, t1] = mesh.edge(e).triangles;
    let theta = angle_between(mesh.normal(t0), mesh.normal(t1));
    match params.smoothness {
        SmoothnessMode::UniformPotts => params.compactness,
        SmoothnessMode::AngleProportional => params.compactness * theta,
        SmoothnessMode::CreaseDiscount => {
            let r = theta / CREASE_SIGMA;
            params.compactness * libm::exp(-r * r)
        }
    }
}

/// Fidelity cost of giving `label` to a triangle with unit normal `normal`.
pub fn label_cost(params: &GraphCutParams, normal: Vec3, label: Label) -> f64 {
    params.fidelity * libm::acos(normal.dot(label.direction()).clamp(-1.0, 1.0))
}

/// Energy over all triangles; `tilt[t]` rotates triangle `t`'s normal
/// by the global tilt rotation before costing.
pub fn build_labeling_problem(mesh: &SurfaceMesh, params: &GraphCutParams, tilt: &[bool]) -> EnergyProblem {
    let rot = params.tilt_rotation();
    let mut problem = EnergyProblem::new(mesh.triangle_count());
    for t in 0..mesh.triangle_count() {
        let n = if tilt.get(t).copied().unwrap_or(false) { rot.apply(mesh.normal(t)) } else { mesh.normal(t) };
        for l in Label::ALL {
            problem.set_data_cost(t, l, label_cost(params, n, l));
        }
    }
    for e in 0..mesh.edge_count() {
        let [t0, t1] = mesh.edge(e).triangles;
        problem.add_edge(t0, t1, edge_weight(mesh, params, e));
    }
    problem
}

/// Gap between the best and second-best label alignment of `normal`.
pub fn alignment_gap(normal: Vec3) -> f64 {
    let mut dots: [f64; 6] = Label::ALL.map(|l| normal.dot(l.direction()));
    dots.sort_by(|a, b| b.total_cmp(a));
    dots[0] - dots[1]
}

/// Triangles whose two closest labels are within `sensitivity` of each other.
pub fn detect_tilt_candidates(mesh: &SurfaceMesh, sensitivity: f64) -> Vec<usize> {
    (0..mesh.triangle_count()).filter(|&t| alignment_gap(mesh.normal(t)) < sensitivity).collect()
}

/// Graph-cut labeling with tie regions tilted by one global rotation.
pub fn tweaked_graphcut_labeling(mesh: &SurfaceMesh, params: &GraphCutParams) -> Result<Labeling, OptimizeError> {
    tweaked_graphcut_labeling_masked(mesh, params, None)
}

/// As [`tweaked_graphcut_labeling`], with optional per-triangle label masks.
pub fn tweaked_graphcut_labeling_masked(
    mesh: &SurfaceMesh,
    params: &GraphCutParams,
    masks: Option<&[LabelSet]>,
) -> Result<Labeling, OptimizeError> {
    params.validate()?;
    let mut tilt = vec![false; mesh.triangle_count()];
    for t in detect_tilt_candidates(mesh, params.sensitivity) {
        tilt[t] = true;
    }
    let mut problem = build_labeling_problem(mesh, params, &tilt);
    if let Some(masks) = masks {
        if masks.len() != mesh.triangle_count() {
            return Err(OptimizeError::LengthMismatch { expected: mesh.triangle_count(), actual: masks.len() });
        }
        for (t, &m) in masks.iter().enumerate() {
            problem.set_allowed(t, m);
        }
    }
    let rot = params.tilt_rotation();
    let init: Vec<Label> = match masks {
        // Nearest label of the (tilted) normal.
        None => (0..mesh.triangle_count())
            .map(|t| nearest_label_unchecked(if tilt[t] { rot.apply(mesh.normal(t)) } else { mesh.normal(t) }))
            .collect(),
        Some(_) => problem.unary_argmin()?,
    };
    alpha_expansion(&problem, &init).map(Labeling::new)
}

/// Re-optimize the labels of `triangles` (each restricted to the matching
/// entry of `allowed`) with every other triangle held fixed.
pub fn restricted_relabel(
    mesh: &SurfaceMesh,
    labeling: &Labeling,
    triangles: &[usize],
    allowed: &[LabelSet],
    params: &GraphCutParams,
) -> Result<Labeling, OptimizeError> {
    if triangles.len() != allowed.len() {
        return Err(OptimizeError::LengthMismatch { expected: triangles.len(), actual: allowed.len() });
    }
    if let Some(i) = allowed.iter().position(|m| m.is_empty()) {
        return Err(OptimizeError::EmptyMask(triangles[i]));
    }
    let mut local = vec![usize::MAX; mesh.triangle_count()];
    for (i, &t) in triangles.iter().enumerate() {
        local[t] = i;
    }
    let mut problem = EnergyProblem::new(triangles.len());
    for (i, &t) in triangles.iter().enumerate() {
        for l in Label::ALL {
            problem.set_data_cost(i, l, label_cost(params, mesh.normal(t), l));
        }
        problem.set_allowed(i, allowed[i]);
        for (k, &nb) in mesh.triangle_adjacency(t).iter().enumerate() {
            let w = edge_weight(mesh, params, mesh.triangle_edges(t)[k]);
            if local[nb] == usize::MAX {
                // Fixed exterior neighbor: pay w for every label but its own.
                for l in Label::ALL {
                    if l != labeling[nb] {
                        problem.add_data_cost(i, l, w);
                    }
                }
            } else if t < nb {
                problem.add_edge(i, local[nb], w);
            }
        }
    }
    let argmin = problem.unary_argmin()?;
    let init: Vec<Label> = triangles
        .iter()
        .enumerate()
        .map(|(i, &t)| if allowed[i].contains(labeling[t]) { labeling[t] } else { argmin[i] })
        .collect();
    let result = alpha_expansion(&problem, &init)?;
    let mut out = labeling.clone();
    for (i, &t) in triangles.iter().enumerate() {
        out[t] = result[i];
    }
    Ok(out)
}
