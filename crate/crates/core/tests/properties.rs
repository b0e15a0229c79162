//! Property tests over random shapes and labelings.

use std::collections::BTreeMap;

use polycube_core::graph::optimal_chain_labels;
use polycube_core::labeling::triangle_fidelity;
use polycube_core::optimizer::detect_tilt_candidates;
use polycube_core::validity::{corner_axes_valid, validate_labeling};
use polycube_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_shape(i: usize) -> SurfaceMesh {
    match i % 5 {
        0 => shapes::cube(3),
        1 => shapes::l_prism(2),
        2 => shapes::wedge(4),
        3 => shapes::icosphere(1),
        _ => shapes::notched_cube(2),
    }
}

fn jittered(i: usize, seed: u64) -> SurfaceMesh {
    shapes::perturbed(&small_shape(i), 1e-3, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Naive labeling with a few random blobs repainted.
fn random_labeling(mesh: &SurfaceMesh, seed: u64) -> Labeling {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut l = naive_labeling(mesh);
    for _ in 0..rng.gen_range(0..4) {
        let label = Label::ALL[rng.gen_range(0..6)];
        let mut t = rng.gen_range(0..mesh.triangle_count());
        for _ in 0..rng.gen_range(1..8) {
            l[t] = label;
            t = mesh.triangle_adjacency(t)[rng.gen_range(0..3)];
        }
    }
    l
}

/// The 48 signed permutations of the axes, as label maps.
fn signed_axis_maps() -> Vec<impl Fn(Label) -> Label> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut maps = Vec::new();
    for p in perms {
        for flips in 0..8u8 {
            maps.push(move |l: Label| {
                let a = l.axis().index();
                let flip = flips & (1 << a) != 0;
                Label::from_axis(Axis::from_index(p[a]), l.is_positive() != flip)
            });
        }
    }
    maps
}

fn graph(mesh: &SurfaceMesh, l: &Labeling) -> LabelingGraph {
    LabelingGraph::build(mesh, l, &TurningPointParams::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_surface_normals_cancel(i in 0usize..5, seed in any::<u64>()) {
        let m = jittered(i, seed);
        let sum = (0..m.triangle_count()).fold(Vec3::ZERO, |acc, t| acc + m.normal(t) * m.area(t));
        prop_assert!(sum.norm() <= 1e-6 * m.total_area());
        prop_assert_eq!(m.euler_characteristic(), 2);
    }

    #[test]
    fn dihedral_ignores_triangle_order(i in 0usize..5, seed in any::<u64>()) {
        let m = jittered(i, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut tris: Vec<[usize; 3]> = m.triangles().to_vec();
        for k in (1..tris.len()).rev() {
            tris.swap(k, rng.gen_range(0..=k));
        }
        for t in &mut tris {
            t.rotate_left(rng.gen_range(0..3));
        }
        let shuffled = SurfaceMesh::new(m.vertices().to_vec(), tris).unwrap();
        for e in 0..m.edge_count() {
            let [a, b] = m.edge(e).vertices;
            let f = shuffled.edge_between(a, b).unwrap();
            let (x, y) = (m.dihedral(e).interior_angle, shuffled.dihedral(f).interior_angle);
            prop_assert!((x - y).abs() < 1e-12, "edge ({}, {}): {} vs {}", a, b, x, y);
        }
    }

    #[test]
    fn naive_maximizes_fidelity(i in 0usize..5, seed in any::<u64>()) {
        let m = jittered(i, seed);
        let best = fidelity(&m, &naive_labeling(&m));
        let other = fidelity(&m, &random_labeling(&m, seed));
        prop_assert!(other.area_weighted <= best.area_weighted + 1e-12);
        prop_assert!(other.uniform <= best.uniform + 1e-12);
        prop_assert!((0.0..=1.0).contains(&other.min) && other.area_weighted <= 1.0);
    }

    #[test]
    fn opposite_fidelity_complements(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, k in 0usize..6) {
        let Some(n) = Vec3::new(x, y, z).normalized() else { return Ok(()) };
        let l = Label::ALL[k];
        let (f, g) = (triangle_fidelity(n, l), triangle_fidelity(n, l.opposite()));
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f + g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn feature_metrics_ignore_axis_permutations(i in 0usize..5, seed in any::<u64>(), k in 0usize..48) {
        let m = small_shape(i);
        let l = random_labeling(&m, seed);
        let map = &signed_axis_maps()[k];
        prop_assert_eq!(feature_edge_metrics(&m, &l), feature_edge_metrics(&m, &l.remapped(map)));
    }

    #[test]
    fn graph_partitions_the_mesh(i in 0usize..5, seed in any::<u64>()) {
        let m = small_shape(i);
        let l = random_labeling(&m, seed);
        let g = graph(&m, &l);
        prop_assert_eq!(&g, &graph(&m, &l));
        prop_assert_eq!(g.charts.iter().map(|c| c.triangles.len()).sum::<usize>(), m.triangle_count());
        let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
        for b in &g.boundaries {
            for &e in &b.edges {
                prop_assert!(owner.insert(e, b.id).is_none(), "edge {} in two boundaries", e);
            }
        }
        for e in 0..m.edge_count() {
            let [a, b] = m.edge(e).triangles;
            prop_assert_eq!(owner.contains_key(&e), l[a] != l[b]);
        }
        if g.is_disk_layout(&m) {
            prop_assert_eq!(g.euler_characteristic(), 2);
        }
    }

    #[test]
    fn turning_points_are_chain_flips(i in 0usize..5, seed in any::<u64>()) {
        let m = jittered(i, seed);
        let l = random_labeling(&m, seed);
        let g = graph(&m, &l);
        for b in g.boundaries.iter().filter(|b| !b.is_closed()) {
            let Some(axis) = b.axis else {
                prop_assert!(b.turning_points.is_empty());
                continue;
            };
            let scores: Vec<f64> = b.vertices.windows(2)
                .map(|w| (m.vertex(w[1]) - m.vertex(w[0])).normalized().unwrap().dot(axis.unit()))
                .collect();
            let labels = optimal_chain_labels(&scores, 1.0, false);
            let flips = labels.windows(2).filter(|w| w[0] != w[1]).count();
            prop_assert_eq!(b.turning_points.len(), flips);
            prop_assert_eq!(b.is_monotone(), flips == 0);
        }
    }

    #[test]
    fn corner_rules(axes in prop::collection::vec(0usize..4, 3..8), seed in any::<u64>()) {
        let axes: Vec<Option<Axis>> = axes.into_iter().map(|a| (a < 3).then(|| Axis::from_index(a))).collect();
        let legacy = corner_axes_valid(&axes, CornerRule::Legacy);
        let improved = corner_axes_valid(&axes, CornerRule::Improved);
        prop_assert!(!legacy || improved);
        let mut shuffled = axes.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in (1..shuffled.len()).rev() {
            shuffled.swap(k, rng.gen_range(0..=k));
        }
        prop_assert_eq!(corner_axes_valid(&shuffled, CornerRule::Improved), improved);
        let perm = [1, 2, 0];
        let rotated: Vec<Option<Axis>> = axes.iter().map(|a| a.map(|a| Axis::from_index(perm[a.index()]))).collect();
        prop_assert_eq!(corner_axes_valid(&rotated, CornerRule::Improved), improved);
        prop_assert_eq!(corner_axes_valid(&rotated, CornerRule::Legacy), legacy);
    }

    #[test]
    fn validity_ignores_axis_permutations(i in 0usize..5, seed in any::<u64>(), k in 0usize..48) {
        let m = small_shape(i);
        let l = random_labeling(&m, seed);
        let map = &signed_axis_maps()[k];
        for cfg in [ValidityConfig::default(), ValidityConfig::legacy()] {
            let a = validate_labeling(&m, &graph(&m, &l), &cfg);
            let b = validate_labeling(&m, &graph(&m, &l.remapped(map)), &cfg);
            prop_assert_eq!(
                (&a.invalid_charts, &a.invalid_boundaries, &a.invalid_corners, a.is_valid),
                (&b.invalid_charts, &b.invalid_boundaries, &b.invalid_corners, b.is_valid)
            );
        }
    }

    #[test]
    fn expansion_never_raises_energy(n in 2usize..12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = EnergyProblem::new(n);
        for i in 0..n {
            for l in Label::ALL {
                p.set_data_cost(i, l, rng.gen_range(0.0..5.0));
            }
        }
        let lambda = rng.gen_range(0.0..3.0);
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(0.3) {
                    p.add_edge(u, v, lambda);
                }
            }
        }
        let init: Vec<Label> = (0..n).map(|_| Label::ALL[rng.gen_range(0..6)]).collect();
        let out = alpha_expansion(&p, &init).unwrap();
        prop_assert!(p.energy(&out) <= p.energy(&init) + 1e-9);
        prop_assert_eq!(out, alpha_expansion(&p, &init).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn zero_compactness_is_naive(i in 0usize..5, seed in any::<u64>()) {
        let m = jittered(i, seed);
        let params = GraphCutParams { compactness: 0.0, ..GraphCutParams::default() };
        prop_assume!(detect_tilt_candidates(&m, params.sensitivity).is_empty());
        let l = tweaked_graphcut_labeling(&m, &params).unwrap();
        prop_assert_eq!(&l, &naive_labeling(&m));
        prop_assert_eq!(l, tweaked_graphcut_labeling(&m, &params).unwrap());
    }

    #[test]
    fn operators_keep_their_contract(i in 0usize..5, seed in any::<u64>(), k in 0usize..8, pick in any::<u64>()) {
        let m = small_shape(i);
        let l = random_labeling(&m, seed);
        let g = graph(&m, &l);
        let kind = OperatorKind::ALL[k];
        let pool = match kind {
            OperatorKind::IncreaseChartValence | OperatorKind::RemoveChart => g.charts.len(),
            OperatorKind::FixInvalidBoundary | OperatorKind::StraightenBoundary => g.boundaries.len(),
            OperatorKind::FixInvalidCorner => g.corners.len(),
            _ => m.vertex_count(),
        };
        prop_assume!(pool > 0);
        let target = (pick % pool as u64) as usize;
        let second = Some(((pick >> 32) % m.vertex_count() as u64) as usize);
        let params = PipelineParams::default();
        let Ok(out) = apply_operator(&m, &l, &g, kind, target, second, &params) else { return Ok(()) };
        prop_assert_eq!(out.labeling.len(), l.len());
        prop_assert_eq!(l.diff(&out.labeling), out.changed.clone());
        prop_assert_eq!(out.applied, !out.changed.is_empty());
        prop_assert!(out.labeling.iter().all(|x| x.index() < 6));
        prop_assert_eq!(Ok(out), apply_operator(&m, &l, &g, kind, target, second, &params));
    }

    #[test]
    fn pipeline_is_deterministic_and_honest(i in 0usize..5, seed in any::<u64>()) {
        let m = jittered(i, seed);
        let params = PipelineParams::default();
        let a = run_pipeline(&m, &params, &NoClock);
        let b = run_pipeline(&m, &params, &NoClock);
        prop_assert_eq!(&a.labeling, &b.labeling);
        prop_assert_eq!(&a.report, &b.report);
        prop_assert_eq!(&a.log, &b.log);
        let again = validate_labeling(&m, &graph(&m, &a.labeling), &params.validity);
        prop_assert_eq!(again.is_valid, a.report.status.is_valid());
    }

    #[test]
    fn monotonicity_keeps_validity(i in 0usize..5, seed in any::<u64>()) {
        let m = jittered(i, seed);
        let params = PipelineParams::default();
        let mut state = PipelineState::new(&m, random_labeling(&m, seed), &params);
        routine_validity(&m, &mut state, &params);
        prop_assume!(state.is_valid());
        let before = state.report.turning_points;
        routine_monotonicity(&m, &mut state, &params);
        prop_assert!(state.is_valid());
        prop_assert!(state.report.turning_points <= before);
        prop_assert!(validate_labeling(&m, &graph(&m, &state.labeling), &params.validity).is_valid);
    }
}

#[test]
fn naive_cube_survives_every_axis_map() {
    let m = shapes::cube(2);
    let l = naive_labeling(&m);
    for map in signed_axis_maps() {
        let r = validate_labeling(&m, &graph(&m, &l.remapped(map)), &ValidityConfig::default());
        assert!(r.is_valid);
        assert_eq!(r.state(), [6, 12, 8, 0, 0, 0, 0]);
    }
}
