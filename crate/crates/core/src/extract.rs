//! Zero-level-set extraction: marching squares in 2-D, marching cubes in
//! 3-D, both at isovalue 0 with linear interpolation along grid edges.
//!
//! The cube triangulations come from a 256-case table built once at
//! startup. Each case is constructed by pairing the crossing edges on
//! every cube face (ambiguous faces always join the negative corners) and
//! fanning the resulting cycles. Because the pairing rule is a function
//! of the face's corner signs alone, adjacent cells always agree on the
//! shared face, so closed input surfaces extract to watertight meshes.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::grid::ScalarField;

/// Segment soup of the 2-D zero set; vertices are welded per grid edge.
#[derive(Debug, Clone, Default)]
pub struct LineSet {
    pub vertices: Vec<[f64; 2]>,
    pub segments: Vec<[usize; 2]>,
}

/// Triangle soup of the 3-D zero set; vertices are welded per grid edge.
#[derive(Debug, Clone, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

/// Extraction output: a curve in 2-D, a surface in 3-D.
#[derive(Debug, Clone)]
pub enum ZeroSet {
    Curve(LineSet),
    Surface(TriangleMesh),
}

impl ZeroSet {
    pub fn is_empty(&self) -> bool {
        match self {
            ZeroSet::Curve(c) => c.segments.is_empty(),
            ZeroSet::Surface(s) => s.triangles.is_empty(),
        }
    }

    /// Vertex coordinates as dimension-agnostic rows.
    pub fn vertex_rows(&self) -> Vec<Vec<f64>> {
        match self {
            ZeroSet::Curve(c) => c.vertices.iter().map(|v| v.to_vec()).collect(),
            ZeroSet::Surface(s) => s.vertices.iter().map(|v| v.to_vec()).collect(),
        }
    }

    pub fn as_curve(&self) -> Option<&LineSet> {
        match self {
            ZeroSet::Curve(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_surface(&self) -> Option<&TriangleMesh> {
        match self {
            ZeroSet::Surface(s) => Some(s),
            _ => None,
        }
    }
}

impl LineSet {
    /// Number of connected components of the segment graph.
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for seg in &self.segments {
            let (a, b) = (find(&mut parent, seg[0]), find(&mut parent, seg[1]));
            if a != b {
                parent[a] = b;
            }
        }
        let mut used: Vec<bool> = vec![false; self.vertices.len()];
        for seg in &self.segments {
            used[seg[0]] = true;
            used[seg[1]] = true;
        }
        let mut roots = std::collections::HashSet::new();
        for v in 0..self.vertices.len() {
            if used[v] {
                roots.insert(find(&mut parent, v));
            }
        }
        roots.len()
    }

    /// Total polyline length.
    pub fn total_length(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| {
                let (a, b) = (self.vertices[s[0]], self.vertices[s[1]]);
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            })
            .sum()
    }
}

impl TriangleMesh {
    fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let key = (a.min(b), a.max(b));
                *counts.entry(key).or_insert(0) += 1;
            }
        }
        counts
    }

    /// True when every undirected edge is shared by exactly two triangles.
    pub fn is_watertight(&self) -> bool {
        !self.triangles.is_empty() && self.edge_counts().values().all(|&c| c == 2)
    }

    /// `V − E + F` over the welded mesh.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.vertices.len()];
        for t in &self.triangles {
            for &v in t {
                used[v] = true;
            }
        }
        let v = used.iter().filter(|&&u| u).count() as i64;
        let e = self.edge_counts().len() as i64;
        let f = self.triangles.len() as i64;
        v - e + f
    }
}

/// Extracts the zero level set of `field`. All-positive or all-negative
/// fields produce an empty output.
pub fn extract_zero_set(field: &ScalarField) -> ZeroSet {
    match field.grid().ndim() {
        2 => ZeroSet::Curve(marching_squares(field)),
        _ => ZeroSet::Surface(marching_cubes(field)),
    }
}

#[inline]
fn interp_t(a: f64, b: f64) -> f64 {
    // Signs differ strictly, so the denominator is nonzero.
    a / (a - b)
}

fn marching_squares(field: &ScalarField) -> LineSet {
    let dims = field.grid().dims().to_vec();
    let (nx, ny) = (dims[0], dims[1]);
    let at = |i: usize, j: usize| field.values()[i * ny + j];

    let mut out = LineSet::default();
    // Welding key: (flat index of lower node, axis of the crossed edge).
    let mut weld: HashMap<(usize, u8), usize> = HashMap::new();

    let mut vertex_on_edge = |i: usize, j: usize, axis: u8, out: &mut LineSet| -> usize {
        let key = (i * ny + j, axis);
        if let Some(&id) = weld.get(&key) {
            return id;
        }
        let (a, b) = if axis == 0 {
            (at(i, j), at(i + 1, j))
        } else {
            (at(i, j), at(i, j + 1))
        };
        let t = interp_t(a, b);
        let pos = if axis == 0 {
            [i as f64 + t, j as f64]
        } else {
            [i as f64, j as f64 + t]
        };
        let id = out.vertices.len();
        out.vertices.push(pos);
        weld.insert(key, id);
        id
    };

    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            // Cell corners in cyclic order with their sign bits.
            let corners = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let mut config = 0u8;
            for (k, &c) in corners.iter().enumerate() {
                if c < 0.0 {
                    config |= 1 << k;
                }
            }
            if config == 0 || config == 0b1111 {
                continue;
            }
            // Cell edges in cyclic order: bottom, right, top, left, as
            // (lower-node, axis) pairs.
            let edges = [
                (i, j, 0u8),     // c0-c1
                (i + 1, j, 1u8), // c1-c2
                (i, j + 1, 0u8), // c3-c2
                (i, j, 1u8),     // c0-c3
            ];
            let crossing: Vec<usize> = (0..4usize)
                .filter(|&e| {
                    let (a, b) = match e {
                        0 => (0, 1),
                        1 => (1, 2),
                        2 => (3, 2),
                        _ => (0, 3),
                    };
                    (corners[a] < 0.0) != (corners[b] < 0.0)
                })
                .collect();

            let pairs: Vec<[usize; 2]> = match crossing.len() {
                2 => vec![[crossing[0], crossing[1]]],
                4 => {
                    // Ambiguous cell: join the negative corners, i.e. cut
                    // off each positive corner by the pair of edges
                    // incident to it.
                    if config == 0b0101 {
                        // negatives at c0, c2; positives c1 (e0, e1), c3 (e2, e3)
                        vec![[0, 1], [2, 3]]
                    } else {
                        // config 0b1010: positives c0 (e0, e3), c2 (e1, e2)
                        vec![[0, 3], [1, 2]]
                    }
                }
                _ => vec![],
            };
            for [ea, eb] in pairs {
                let (ia, ja, aa) = edges[ea];
                let (ib, jb, ab) = edges[eb];
                let va = vertex_on_edge(ia, ja, aa, &mut out);
                let vb = vertex_on_edge(ib, jb, ab, &mut out);
                out.segments.push([va, vb]);
            }
        }
    }
    out
}

/// Cube edges as (corner, corner) pairs; corner bit k is the offset along
/// axis k. Edges 0-3 run along axis 0, 4-7 along axis 1, 8-11 along axis 2.
const CUBE_EDGES: [(u8, u8); 12] = [
    (0, 1),
    (2, 3),
    (4, 5),
    (6, 7),
    (0, 2),
    (1, 3),
    (4, 6),
    (5, 7),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

fn edge_axis(e: usize) -> usize {
    e / 4
}

/// Triangles for one sign configuration, as triples of cube-edge ids.
type CaseTriangles = Vec<[u8; 3]>;

fn build_case(config: u8) -> CaseTriangles {
    let inside = |v: u8| config & (1 << v) != 0;
    let crossing: Vec<usize> = (0..12)
        .filter(|&e| inside(CUBE_EDGES[e].0) != inside(CUBE_EDGES[e].1))
        .collect();
    if crossing.is_empty() {
        return Vec::new();
    }

    // Pair crossing edges on every face. Two pairings per crossing edge
    // (one per adjacent face) close the boundary cycles.
    let mut partners: Vec<Vec<usize>> = vec![Vec::new(); 12];
    for axis in 0..3u8 {
        for side in 0..2u8 {
            let on_face = |v: u8| (v >> axis) & 1 == side;
            let face_edges: Vec<usize> = (0..12)
                .filter(|&e| {
                    let (a, b) = CUBE_EDGES[e];
                    on_face(a) && on_face(b)
                })
                .collect();
            let face_crossing: Vec<usize> = face_edges
                .iter()
                .copied()
                .filter(|e| crossing.contains(e))
                .collect();
            match face_crossing.len() {
                2 => {
                    partners[face_crossing[0]].push(face_crossing[1]);
                    partners[face_crossing[1]].push(face_crossing[0]);
                }
                4 => {
                    // Ambiguous face: connect the negative corners, so the
                    // two arcs cut off the positive corners.
                    let positives: Vec<u8> = (0..8)
                        .filter(|&v| on_face(v) && !inside(v))
                        .collect();
                    debug_assert_eq!(positives.len(), 2);
                    for &p in &positives {
                        let incident: Vec<usize> = face_crossing
                            .iter()
                            .copied()
                            .filter(|&e| CUBE_EDGES[e].0 == p || CUBE_EDGES[e].1 == p)
                            .collect();
                        debug_assert_eq!(incident.len(), 2);
                        partners[incident[0]].push(incident[1]);
                        partners[incident[1]].push(incident[0]);
                    }
                }
                _ => {}
            }
        }
    }

    // Walk the cycles.
    let corner_pos = |v: u8| -> [f64; 3] {
        [(v & 1) as f64, ((v >> 1) & 1) as f64, ((v >> 2) & 1) as f64]
    };
    let midpoint = |e: usize| -> [f64; 3] {
        let (a, b) = CUBE_EDGES[e];
        let (pa, pb) = (corner_pos(a), corner_pos(b));
        [
            0.5 * (pa[0] + pb[0]),
            0.5 * (pa[1] + pb[1]),
            0.5 * (pa[2] + pb[2]),
        ]
    };

    let mut visited = [false; 12];
    let mut triangles = Vec::new();
    for &start in &crossing {
        if visited[start] {
            continue;
        }
        let mut cycle = vec![start];
        visited[start] = true;
        let mut prev = start;
        let mut cur = partners[start][0];
        while cur != start {
            visited[cur] = true;
            cycle.push(cur);
            let next = if partners[cur][0] == prev {
                partners[cur][1]
            } else {
                partners[cur][0]
            };
            prev = cur;
            cur = next;
        }

        // Orient the cycle so triangle normals point from the negative
        // region toward the positive one.
        let pts: Vec<[f64; 3]> = cycle.iter().map(|&e| midpoint(e)).collect();
        let mut normal = [0.0f64; 3];
        for i in 0..pts.len() {
            let p = pts[i];
            let q = pts[(i + 1) % pts.len()];
            normal[0] += (p[1] - q[1]) * (p[2] + q[2]);
            normal[1] += (p[2] - q[2]) * (p[0] + q[0]);
            normal[2] += (p[0] - q[0]) * (p[1] + q[1]);
        }
        let mut hint = [0.0f64; 3];
        for &e in &cycle {
            let (a, b) = CUBE_EDGES[e];
            let (neg, pos) = if inside(a) { (a, b) } else { (b, a) };
            let (pn, pp) = (corner_pos(neg), corner_pos(pos));
            for k in 0..3 {
                hint[k] += pp[k] - pn[k];
            }
        }
        let dot: f64 = normal.iter().zip(&hint).map(|(n, h)| n * h).sum();
        let ordered: Vec<usize> = if dot < 0.0 {
            cycle.iter().rev().copied().collect()
        } else {
            cycle
        };

        for i in 1..ordered.len() - 1 {
            triangles.push([
                ordered[0] as u8,
                ordered[i] as u8,
                ordered[i + 1] as u8,
            ]);
        }
    }
    triangles
}

fn case_table() -> &'static Vec<CaseTriangles> {
    static TABLE: OnceLock<Vec<CaseTriangles>> = OnceLock::new();
    TABLE.get_or_init(|| (0..=255u8).map(build_case).collect())
}

fn marching_cubes(field: &ScalarField) -> TriangleMesh {
    let dims = field.grid().dims().to_vec();
    let (nx, ny, nz) = (dims[0], dims[1], dims[2]);
    let at = |i: usize, j: usize, k: usize| field.values()[(i * ny + j) * nz + k];
    let table = case_table();

    let mut mesh = TriangleMesh::default();
    let mut weld: HashMap<(usize, u8), usize> = HashMap::new();

    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            for k in 0..nz - 1 {
                let corner_value = |v: u8| {
                    at(
                        i + (v & 1) as usize,
                        j + ((v >> 1) & 1) as usize,
                        k + ((v >> 2) & 1) as usize,
                    )
                };
                let mut config = 0u8;
                for v in 0..8u8 {
                    if corner_value(v) < 0.0 {
                        config |= 1 << v;
                    }
                }
                if table[config as usize].is_empty() {
                    continue;
                }

                let mut edge_vertex = |e: usize| -> usize {
                    let (a, b) = CUBE_EDGES[e];
                    let axis = edge_axis(e);
                    let base = (
                        i + (a & 1) as usize,
                        j + ((a >> 1) & 1) as usize,
                        k + ((a >> 2) & 1) as usize,
                    );
                    let flat = (base.0 * ny + base.1) * nz + base.2;
                    let key = (flat, axis as u8);
                    if let Some(&id) = weld.get(&key) {
                        return id;
                    }
                    let t = interp_t(corner_value(a), corner_value(b));
                    let mut pos = [base.0 as f64, base.1 as f64, base.2 as f64];
                    pos[axis] += t;
                    let id = mesh.vertices.len();
                    mesh.vertices.push(pos);
                    weld.insert(key, id);
                    id
                };

                for tri in &table[config as usize] {
                    let v0 = edge_vertex(tri[0] as usize);
                    let v1 = edge_vertex(tri[1] as usize);
                    let v2 = edge_vertex(tri[2] as usize);
                    mesh.triangles.push([v0, v1, v2]);
                }
            }
        }
    }
    mesh
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::levelset::init_sphere;

    #[test]
    fn case_table_is_consistent() {
        let table = case_table();
        assert_eq!(table.len(), 256);
        assert!(table[0].is_empty());
        assert!(table[255].is_empty());
        // One negative corner cuts a single triangle.
        assert_eq!(table[1].len(), 1);
        // Complementary configs triangulate the same set of crossing
        // edges (fan roots may differ).
        for c in 0..=255u8 {
            let mut a: Vec<u8> = table[c as usize].iter().flatten().copied().collect();
            let mut b: Vec<u8> = table[!c as usize].iter().flatten().copied().collect();
            a.sort_unstable();
            a.dedup();
            b.sort_unstable();
            b.dedup();
            assert_eq!(a, b, "config {c}");
        }
    }

    #[test]
    fn empty_when_no_sign_change() {
        let g = Grid::new(&[8, 8]).unwrap();
        let f = ScalarField::constant(&g, 2.0);
        assert!(extract_zero_set(&f).is_empty());

        let g3 = Grid::new(&[8, 8, 8]).unwrap();
        let f3 = ScalarField::constant(&g3, -1.0);
        assert!(extract_zero_set(&f3).is_empty());
    }

    #[test]
    fn circle_vertices_on_radius() {
        let g = Grid::new(&[64, 64]).unwrap();
        let phi = init_sphere(&g, &[32.0, 32.0], 10.0).unwrap();
        let zs = extract_zero_set(&phi);
        let curve = zs.as_curve().unwrap();
        assert!(!curve.segments.is_empty());
        for v in &curve.vertices {
            let r = ((v[0] - 32.0).powi(2) + (v[1] - 32.0).powi(2)).sqrt();
            assert!((r - 10.0).abs() <= 0.5, "vertex at radius {r}");
        }
        assert_eq!(curve.component_count(), 1);
        // A closed curve visits every vertex twice.
        let mut degree = vec![0usize; curve.vertices.len()];
        for s in &curve.segments {
            degree[s[0]] += 1;
            degree[s[1]] += 1;
        }
        assert!(degree.iter().all(|&d| d == 2));
    }

    #[test]
    fn ambiguous_cell_produces_two_segments() {
        let g = Grid::new(&[4, 4]).unwrap();
        // Checkerboard signs in one cell: c0, c2 negative.
        let mut f = ScalarField::constant(&g, 1.0);
        f.set(&[0, 0], -1.0);
        f.set(&[1, 1], -1.0);
        let zs = extract_zero_set(&f);
        let curve = zs.as_curve().unwrap();
        // Cell (0,0) contributes two disjoint arcs; neighbors add theirs.
        assert!(curve.segments.len() >= 2);
    }

    #[test]
    fn sphere_mesh_is_watertight() {
        let g = Grid::new(&[32, 32, 32]).unwrap();
        let phi = init_sphere(&g, &[16.0, 16.0, 16.0], 9.0).unwrap();
        let zs = extract_zero_set(&phi);
        let mesh = zs.as_surface().unwrap();
        assert!(!mesh.triangles.is_empty());
        assert!(mesh.is_watertight());
        assert_eq!(mesh.euler_characteristic(), 2);
        for v in &mesh.vertices {
            let r = ((v[0] - 16.0).powi(2) + (v[1] - 16.0).powi(2) + (v[2] - 16.0).powi(2)).sqrt();
            assert!((r - 9.0).abs() <= 0.5);
        }
    }

    #[test]
    fn torus_mesh_has_genus_one() {
        let g = Grid::new(&[50, 50, 50]).unwrap();
        let (cx, cy, cz) = (25.0, 25.0, 25.0);
        let (major, minor) = (12.0, 5.0);
        let phi = ScalarField::from_fn(&g, |idx| {
            let (x, y, z) = (idx[0] as f64 - cx, idx[1] as f64 - cy, idx[2] as f64 - cz);
            let ring = (x * x + y * y).sqrt() - major;
            (ring * ring + z * z).sqrt() - minor
        });
        let zs = extract_zero_set(&phi);
        let mesh = zs.as_surface().unwrap();
        assert!(mesh.is_watertight());
        assert_eq!(mesh.euler_characteristic(), 0);
    }

    #[test]
    fn random_smooth_fields_stay_watertight() {
        // Superpositions of a few lattice waves exercise many cube
        // configurations, including ambiguous faces.
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let g = Grid::new(&[14, 14, 14]).unwrap();
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let waves: Vec<(f64, f64, f64, f64)> = (0..4)
                .map(|_| {
                    (
                        rng.gen_range(0.3..1.2),
                        rng.gen_range(0.2..0.9),
                        rng.gen_range(0.2..0.9),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                    )
                })
                .collect();
            let phi = ScalarField::from_fn(&g, |idx| {
                waves
                    .iter()
                    .map(|(a, kx, ky, ph)| {
                        a * (kx * idx[0] as f64 + ky * idx[1] as f64 + ph).sin()
                            * (0.7 * idx[2] as f64 + ph).cos()
                    })
                    .sum::<f64>()
                    + 0.05
            });
            let zs = extract_zero_set(&phi);
            if let Some(mesh) = zs.as_surface() {
                if mesh.triangles.is_empty() {
                    continue;
                }
                // Interior cells only produce closed surfaces when the zero
                // set does not leave the box; clip by testing edge counts
                // are never above 2 (no non-manifold junctions) and that
                // boundary-open edges only occur on the box boundary.
                for ((a, b), count) in mesh.edge_counts() {
                    assert!(count <= 2, "edge ({a},{b}) shared by {count}");
                    if count == 1 {
                        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                        let on_boundary = |p: [f64; 3]| {
                            p.iter().any(|&x| x <= 0.0 + 1e-12 || x >= 13.0 - 1e-12)
                        };
                        assert!(
                            on_boundary(pa) && on_boundary(pb),
                            "open edge in the interior"
                        );
                    }
                }
            }
        }
    }
}
