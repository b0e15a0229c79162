//! Procedural closed meshes: a small CAD-like test corpus.
//!
//! All generators produce consistently oriented (outward) closed meshes.
//! Coincident vertices are welded on a 1e-9 lattice while building.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI, TAU};

use rand::Rng;

use crate::geom::{Mat3, Vec3};
use crate::mesh::SurfaceMesh;

/// Incremental triangle soup with vertex welding.
#[derive(Default)]
pub struct MeshBuilder {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    index: BTreeMap<(i64, i64, i64), usize>,
}

impl MeshBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, p: Vec3) -> usize {
        let q = |x: f64| libm::round(x * 1e9) as i64;
        let k = (q(p.x), q(p.y), q(p.z));
        if let Some(&i) = self.index.get(&k) {
            return i;
        }
        self.vertices.push(p);
        self.index.insert(k, self.vertices.len() - 1);
        self.vertices.len() - 1
    }

    pub fn triangle(&mut self, a: Vec3, b: Vec3, c: Vec3) {
        let t = [self.vertex(a), self.vertex(b), self.vertex(c)];
        self.triangles.push(t);
    }

    /// Parallelogram `origin + s*u + t*v`, `s, t ∈ [0,1]`, split into
    /// `nu x nv` cells of two triangles; outward side is `u x v`.
    pub fn grid(&mut self, origin: Vec3, u: Vec3, v: Vec3, nu: usize, nv: usize) {
        let p = |i: usize, j: usize| origin + u * (i as f64 / nu as f64) + v * (j as f64 / nv as f64);
        for i in 0..nu {
            for j in 0..nv {
                let (a, b, c, d) = (p(i, j), p(i + 1, j), p(i + 1, j + 1), p(i, j + 1));
                self.triangle(a, b, c);
                self.triangle(a, c, d);
            }
        }
    }

    /// Triangle `abc` (CCW) subdivided into `n^2` triangles.
    pub fn triangle_grid(&mut self, a: Vec3, b: Vec3, c: Vec3, n: usize) {
        let p = |i: usize, j: usize| a + (b - a) * (i as f64 / n as f64) + (c - a) * (j as f64 / n as f64);
        for j in 0..n {
            for i in 0..n - j {
                self.triangle(p(i, j), p(i + 1, j), p(i, j + 1));
                if i + j + 1 < n {
                    self.triangle(p(i + 1, j), p(i + 1, j + 1), p(i, j + 1));
                }
            }
        }
    }

    pub fn build(self) -> SurfaceMesh {
        SurfaceMesh::new(self.vertices, self.triangles).expect("generated mesh is a closed manifold")
    }

    pub fn into_parts(self) -> (Vec<Vec3>, Vec<[usize; 3]>) {
        (self.vertices, self.triangles)
    }
}

const AXES: [Vec3; 3] = [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];

/// Boundary surface of a union of unit voxels, each exposed face split into
/// `subdiv x subdiv` cells.
pub fn voxel_surface(voxels: &[[i32; 3]], subdiv: usize) -> SurfaceMesh {
    let filled: alloc::collections::BTreeSet<[i32; 3]> = voxels.iter().copied().collect();
    let mut b = MeshBuilder::new();
    for &vox in &filled {
        let base = Vec3::new(vox[0] as f64, vox[1] as f64, vox[2] as f64);
        for axis in 0..3 {
            for positive in [false, true] {
                let mut nb = vox;
                nb[axis] += if positive { 1 } else { -1 };
                if filled.contains(&nb) {
                    continue;
                }
                let u = AXES[(axis + 1) % 3];
                let v = AXES[(axis + 2) % 3];
                if positive {
                    b.grid(base + AXES[axis], u, v, subdiv, subdiv);
                } else {
                    b.grid(base, v, u, subdiv, subdiv);
                }
            }
        }
    }
    b.build()
}

/// Axis-aligned unit cube: 8 vertices, 12 triangles.
pub fn unit_cube() -> SurfaceMesh {
    voxel_surface(&[[0, 0, 0]], 1)
}

pub fn cube(subdiv: usize) -> SurfaceMesh {
    voxel_surface(&[[0, 0, 0]], subdiv)
}

/// 3 x 2 x 1 box.
pub fn cuboid(subdiv: usize) -> SurfaceMesh {
    let mut v = Vec::new();
    for x in 0..3 {
        for y in 0..2 {
            v.push([x, y, 0]);
        }
    }
    voxel_surface(&v, subdiv)
}

/// L-shaped cross-section in XY extruded one unit along Z; the reentrant
/// edge is the vertical line `x = y = 1`.
pub fn l_prism(subdiv: usize) -> SurfaceMesh {
    voxel_surface(&[[0, 0, 0], [1, 0, 0], [0, 1, 0]], subdiv)
}

pub fn t_prism(subdiv: usize) -> SurfaceMesh {
    voxel_surface(&[[0, 0, 0], [1, 0, 0], [2, 0, 0], [1, 1, 0]], subdiv)
}

/// Three-step staircase in XZ, one unit thick along Y.
pub fn staircase(subdiv: usize) -> SurfaceMesh {
    voxel_surface(&[[0, 0, 0], [1, 0, 0], [2, 0, 0], [1, 0, 1], [2, 0, 1], [2, 0, 2]], subdiv)
}

/// 2x2x2 block with one corner voxel removed.
pub fn notched_cube(subdiv: usize) -> SurfaceMesh {
    let mut v = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                if [x, y, z] != [1, 1, 1] {
                    v.push([x, y, z]);
                }
            }
        }
    }
    voxel_surface(&v, subdiv)
}

/// Triangular prism: right triangle `(0,0), (1,0), (0,1)` in XZ extruded
/// along Y. The slope has normal `(1, 0, 1)/√2`.
pub fn wedge(subdiv: usize) -> SurfaceMesh {
    let mut b = MeshBuilder::new();
    let (x, y, z) = (AXES[0], AXES[1], AXES[2]);
    let o = Vec3::ZERO;
    // Bottom (-Z): u x v must point down.
    b.grid(o, y, x, subdiv, subdiv);
    // Back (-X).
    b.grid(o, z, y, subdiv, subdiv);
    // Slope from (1,*,0) to (0,*,1).
    b.grid(x, y, z - x, subdiv, subdiv);
    // Ends: -Y at y = 0, +Y at y = 1.
    b.triangle_grid(o, x, z, subdiv);
    b.triangle_grid(y, y + z, y + x, subdiv);
    b.build()
}

/// Square pyramid over `[-1,1]^2` with apex at height `height`.
pub fn pyramid(subdiv: usize, height: f64) -> SurfaceMesh {
    let mut b = MeshBuilder::new();
    let apex = Vec3::new(0.0, 0.0, height);
    let c = [Vec3::new(-1.0, -1.0, 0.0), Vec3::new(1.0, -1.0, 0.0), Vec3::new(1.0, 1.0, 0.0), Vec3::new(-1.0, 1.0, 0.0)];
    b.grid(c[0], AXES[1] * 2.0, AXES[0] * 2.0, subdiv, subdiv);
    for i in 0..4 {
        b.triangle_grid(c[i], c[(i + 1) % 4], apex, subdiv);
    }
    b.build()
}

/// Closed cylinder along Z with fan caps.
pub fn cylinder(segments: usize, rings: usize, radius: f64, height: f64) -> SurfaceMesh {
    let mut b = MeshBuilder::new();
    let p = |i: usize, z: f64| {
        let a = TAU * (i % segments) as f64 / segments as f64;
        Vec3::new(radius * libm::cos(a), radius * libm::sin(a), z)
    };
    let caps = rings.max(1);
    for k in 0..caps {
        // Concentric cap rings so cap triangles stay well shaped.
        let (r0, r1) = (k as f64 / caps as f64, (k + 1) as f64 / caps as f64);
        for i in 0..segments {
            for (z, up) in [(height, true), (0.0, false)] {
                let (a0, a1) = (p(i, z), p(i + 1, z));
                let center = Vec3::new(0.0, 0.0, z);
                let q = |pt: Vec3, r: f64| center + (pt - center) * r;
                let (i0, i1, o0, o1) = (q(a0, r0), q(a1, r0), q(a0, r1), q(a1, r1));
                if up {
                    if k > 0 {
                        b.triangle(i0, o0, o1);
                        b.triangle(i0, o1, i1);
                    } else {
                        b.triangle(center, o0, o1);
                    }
                } else if k > 0 {
                    b.triangle(i0, o1, o0);
                    b.triangle(i0, i1, o1);
                } else {
                    b.triangle(center, o1, o0);
                }
            }
        }
    }
    for j in 0..rings {
        let (z0, z1) = (height * j as f64 / rings as f64, height * (j + 1) as f64 / rings as f64);
        for i in 0..segments {
            let (a, bb, c, d) = (p(i, z0), p(i + 1, z0), p(i + 1, z1), p(i, z1));
            b.triangle(a, bb, c);
            b.triangle(a, c, d);
        }
    }
    b.build()
}

/// Unit sphere from a subdivided icosahedron.
pub fn icosphere(level: usize) -> SurfaceMesh {
    let t = (1.0 + libm::sqrt(5.0)) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalized().unwrap())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
            let k = if a < b { (a, b) } else { (b, a) };
            *mid.entry(k).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalized().unwrap());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    SurfaceMesh::new(verts, faces).expect("icosphere is closed")
}

/// Torus around Z with major radius `major` and tube radius `minor`.
pub fn torus(major_segments: usize, minor_segments: usize, major: f64, minor: f64) -> SurfaceMesh {
    let p = |i: usize, j: usize| {
        let u = TAU * (i % major_segments) as f64 / major_segments as f64;
        let v = TAU * (j % minor_segments) as f64 / minor_segments as f64;
        let r = major + minor * libm::cos(v);
        Vec3::new(r * libm::cos(u), r * libm::sin(u), minor * libm::sin(v))
    };
    let mut verts = Vec::new();
    for i in 0..major_segments {
        for j in 0..minor_segments {
            verts.push(p(i, j));
        }
    }
    let id = |i: usize, j: usize| (i % major_segments) * minor_segments + (j % minor_segments);
    let mut tris = Vec::new();
    for i in 0..major_segments {
        for j in 0..minor_segments {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    SurfaceMesh::new(verts, tris).expect("torus is closed")
}

/// Square ring of eight voxels around an empty center (a genus-1 polycube).
pub fn voxel_ring(subdiv: usize) -> SurfaceMesh {
    let mut v = Vec::new();
    for x in 0..3 {
        for y in 0..3 {
            if (x, y) != (1, 1) {
                v.push([x, y, 0]);
            }
        }
    }
    voxel_surface(&v, subdiv)
}

/// Unit square prism of height 1 rotated about Z by `angle`.
pub fn rotated_prism(subdiv: usize, angle: f64) -> SurfaceMesh {
    transformed(&cube(subdiv), &Mat3::rotation_z(angle))
}

/// The 45°-rotated square prism.
pub fn diagonal_prism(subdiv: usize) -> SurfaceMesh {
    rotated_prism(subdiv, FRAC_PI_4)
}

/// Copy of `mesh` with every vertex mapped through `m` (about the origin).
pub fn transformed(mesh: &SurfaceMesh, m: &Mat3) -> SurfaceMesh {
    let verts = mesh.vertices().iter().map(|&p| m.apply(p)).collect();
    SurfaceMesh::new(verts, mesh.triangles().to_vec()).expect("rigid motion keeps the mesh valid")
}

/// Copy of `mesh` with every coordinate displaced uniformly in
/// `[-amplitude, amplitude]`.
pub fn perturbed<R: Rng>(mesh: &SurfaceMesh, amplitude: f64, rng: &mut R) -> SurfaceMesh {
    let verts = mesh
        .vertices()
        .iter()
        .map(|&p| {
            let mut d = || rng.gen_range(-amplitude..=amplitude);
            p + Vec3::new(d(), d(), d())
        })
        .collect();
    SurfaceMesh::new(verts, mesh.triangles().to_vec()).expect("small perturbation keeps the mesh valid")
}

/// A named corpus shape with its genus.
pub struct CorpusShape {
    pub name: &'static str,
    pub mesh: SurfaceMesh,
    pub genus: i64,
}

/// The CAD-like synthetic corpus used for end-to-end checks.
pub fn corpus() -> Vec<CorpusShape> {
    let s = |name, mesh, genus| CorpusShape { name, mesh, genus };
    vec![
        s("cube", cube(4), 0),
        s("cuboid", cuboid(3), 0),
        s("l-prism", l_prism(3), 0),
        s("t-prism", t_prism(3), 0),
        s("staircase", staircase(3), 0),
        s("notched-cube", notched_cube(3), 0),
        s("wedge", wedge(6), 0),
        s("cylinder", cylinder(32, 4, 1.0, 2.0), 0),
        s("sphere", icosphere(3), 0),
        s("torus", torus(32, 16, 2.0, 0.6), 1),
        s("rotated-prism", diagonal_prism(4), 0),
    ]
}

/// Rotation by `PI` about Z, handy for symmetry checks.
pub fn half_turn() -> Mat3 {
    Mat3::rotation_z(PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_meshes_are_closed_with_expected_genus() {
        for shape in corpus() {
            assert_eq!(shape.mesh.euler_characteristic(), 2 - 2 * shape.genus, "{}", shape.name);
        }
        assert_eq!(voxel_ring(2).euler_characteristic(), 0);
        assert_eq!(pyramid(3, 3.0).euler_characteristic(), 2);
    }

    #[test]
    fn voxel_cube_sizes() {
        let m = cube(3);
        assert_eq!(m.triangle_count(), 6 * 9 * 2);
        assert_eq!(m.vertex_count(), 6 * 4 + 12 * 2 + 8);
    }

    #[test]
    fn wedge_normals_point_outward() {
        let m = wedge(2);
        let center = Vec3::new(1.0 / 3.0, 0.5, 1.0 / 3.0);
        for t in 0..m.triangle_count() {
            assert!(m.normal(t).dot(m.centroid(t) - center) > 0.0);
        }
    }
}
