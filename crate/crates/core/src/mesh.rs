//! Flat triangulated source domains with P1 gradient operators.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use thiserror::Error;

use crate::geometry::AmbientVector;

/// Triangles with area at or below this are rejected.
pub const MIN_TRIANGLE_AREA: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),
    #[error(
        "triangle {index} has area {area:e} (must exceed {MIN_TRIANGLE_AREA:e} with counterclockwise orientation)"
    )]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("triangle {triangle} references vertex {vertex} out of range")]
    IndexOutOfRange { triangle: usize, vertex: usize },
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("vertex {0} lies on a boundary edge but is not flagged as boundary")]
    BoundaryMismatch(usize),
    #[error("boundary is not a single closed loop")]
    BoundaryNotSingleLoop,
    #[error("mesh file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Immutable triangulation of a flat 2-D domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    is_boundary: Vec<bool>,
    boundary_vertices: Vec<usize>,
    triangle_areas: Vec<f64>,
    /// Per triangle, the gradients of the three barycentric hat functions.
    gradient_coefficients: Vec<[[f64; 2]; 3]>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl DomainMesh {
    /// Build from raw data with explicit boundary flags. Every vertex on an
    /// edge owned by a single triangle must be flagged.
    pub fn new(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, is_boundary: Vec<bool>) -> Result<Self, MeshError> {
        if is_boundary.len() != vertices.len() {
            return Err(MeshError::InvalidParameter(format!(
                "{} boundary flags for {} vertices",
                is_boundary.len(),
                vertices.len()
            )));
        }
        let mut triangle_areas = Vec::with_capacity(triangles.len());
        let mut gradient_coefficients = Vec::with_capacity(triangles.len());
        for (index, tri) in triangles.iter().enumerate() {
            if let Some(&vertex) = tri.iter().find(|&&v| v >= vertices.len()) {
                return Err(MeshError::IndexOutOfRange { triangle: index, vertex });
            }
            let [p0, p1, p2] = tri.map(|v| vertices[v]);
            let twice_area = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            let area = 0.5 * twice_area;
            if area.is_nan() || area <= MIN_TRIANGLE_AREA {
                return Err(MeshError::DegenerateTriangle { index, area });
            }
            gradient_coefficients.push([
                [(p1[1] - p2[1]) / twice_area, (p2[0] - p1[0]) / twice_area],
                [(p2[1] - p0[1]) / twice_area, (p0[0] - p2[0]) / twice_area],
                [(p0[1] - p1[1]) / twice_area, (p1[0] - p0[0]) / twice_area],
            ]);
            triangle_areas.push(area);
        }

        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &triangles {
            for k in 0..3 {
                *edge_count.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_default() += 1;
            }
        }
        let mut edges: Vec<_> = edge_count.into_iter().collect();
        edges.sort_unstable();
        for ((a, b), count) in edges {
            if count > 2 {
                return Err(MeshError::NonManifoldEdge(a, b));
            }
            if count == 1 {
                for v in [a, b] {
                    if !is_boundary[v] {
                        return Err(MeshError::BoundaryMismatch(v));
                    }
                }
            }
        }

        let boundary_vertices = (0..vertices.len()).filter(|&v| is_boundary[v]).collect();
        Ok(Self { vertices, triangles, is_boundary, boundary_vertices, triangle_areas, gradient_coefficients })
    }

    /// Build with boundary flags derived from the edges owned by one triangle.
    pub fn from_triangles(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for (index, tri) in triangles.iter().enumerate() {
            if let Some(&vertex) = tri.iter().find(|&&v| v >= vertices.len()) {
                return Err(MeshError::IndexOutOfRange { triangle: index, vertex });
            }
            for k in 0..3 {
                *edge_count.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_default() += 1;
            }
        }
        let mut is_boundary = vec![false; vertices.len()];
        for ((a, b), count) in edge_count {
            if count == 1 {
                is_boundary[a] = true;
                is_boundary[b] = true;
            }
        }
        Self::new(vertices, triangles, is_boundary)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_boundary(&self, vertex: usize) -> bool {
        self.is_boundary[vertex]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.is_boundary
    }

    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(move |&v| !self.is_boundary[v])
    }

    pub fn num_interior(&self) -> usize {
        self.vertices.len() - self.boundary_vertices.len()
    }

    pub fn triangle_areas(&self) -> &[f64] {
        &self.triangle_areas
    }

    pub fn total_area(&self) -> f64 {
        crate::summation::compensated_sum(self.triangle_areas.iter().copied())
    }

    /// Gradients of the three hat functions on triangle `t`.
    pub fn gradient_coefficients(&self, t: usize) -> &[[f64; 2]; 3] {
        &self.gradient_coefficients[t]
    }

    /// Constant gradient of the affine interpolant of scalar vertex values.
    /// Uses edge differences, so constant values give an exact zero.
    pub fn triangle_gradient(&self, t: usize, values: [f64; 3]) -> [f64; 2] {
        let c = &self.gradient_coefficients[t];
        let (d1, d2) = (values[1] - values[0], values[2] - values[0]);
        [c[1][0] * d1 + c[2][0] * d2, c[1][1] * d1 + c[2][1] * d2]
    }

    /// Gradient of a vector-valued P1 field on triangle `t`, as the two
    /// partial derivatives `[d/dx, d/dy]`.
    pub fn map_gradient(&self, t: usize, values: &[AmbientVector]) -> [AmbientVector; 2] {
        let [a, b, c] = self.triangles[t];
        let k = &self.gradient_coefficients[t];
        let d1 = values[b] - values[a];
        let d2 = values[c] - values[a];
        [d1 * k[1][0] + d2 * k[2][0], d1 * k[1][1] + d2 * k[2][1]]
    }

    /// Boundary vertices in loop order: counterclockwise around the domain,
    /// starting at the smallest boundary-edge vertex index.
    pub fn boundary_loop(&self) -> Result<Vec<usize>, MeshError> {
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                *edge_count.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_default() += 1;
            }
        }
        let mut next: BTreeMap<usize, usize> = BTreeMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if edge_count[&edge_key(a, b)] == 1 && next.insert(a, b).is_some() {
                    return Err(MeshError::BoundaryNotSingleLoop);
                }
            }
        }
        let Some((&start, _)) = next.iter().next() else {
            return Err(MeshError::BoundaryNotSingleLoop);
        };
        let mut order = vec![start];
        let mut current = next[&start];
        while current != start {
            if order.len() > next.len() {
                return Err(MeshError::BoundaryNotSingleLoop);
            }
            order.push(current);
            current = *next.get(&current).ok_or(MeshError::BoundaryNotSingleLoop)?;
        }
        if order.len() != next.len() {
            return Err(MeshError::BoundaryNotSingleLoop);
        }
        Ok(order)
    }

    /// Pairs of triangles sharing an interior edge.
    pub fn interior_edge_pairs(&self) -> Vec<(usize, usize)> {
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        let mut pairs = Vec::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let key = edge_key(tri[k], tri[(k + 1) % 3]);
                if let Some(first) = owner.insert(key, t) {
                    pairs.push((first, t));
                }
            }
        }
        pairs.sort_unstable();
        pairs
    }

    /// P1 stiffness matrix, one sorted sparse row per vertex.
    pub fn stiffness_rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            let c = &self.gradient_coefficients[t];
            let area = self.triangle_areas[t];
            for i in 0..3 {
                for j in 0..3 {
                    let value = area * (c[i][0] * c[j][0] + c[i][1] * c[j][1]);
                    *rows[tri[i]].entry(tri[j]).or_default() += value;
                }
            }
        }
        rows.into_iter().map(|r| r.into_iter().collect()).collect()
    }
}

/// Unit square split into `n x n` cells, each cut along its rising diagonal.
pub fn build_unit_square_grid(n_per_side: usize) -> Result<DomainMesh, MeshError> {
    if n_per_side < 2 {
        return Err(MeshError::InvalidParameter(format!(
            "unit square grid needs at least 2 cells per side, got {n_per_side}"
        )));
    }
    let n = n_per_side;
    let h = 1.0 / n as f64;
    let index = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let x = if i == n { 1.0 } else { i as f64 * h };
            let y = if j == n { 1.0 } else { j as f64 * h };
            vertices.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (index(i, j), index(i + 1, j), index(i + 1, j + 1), index(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    DomainMesh::from_triangles(vertices, triangles)
}

/// Unit disk from `refinement` concentric rings; ring `j` carries `6j`
/// vertices at radius `j / refinement`.
pub fn build_unit_disk_mesh(refinement: usize) -> Result<DomainMesh, MeshError> {
    if refinement < 1 {
        return Err(MeshError::InvalidParameter("disk refinement must be at least 1".into()));
    }
    let ring_start = |j: usize| if j == 0 { 0 } else { 1 + 3 * j * (j - 1) };
    let ring_len = |j: usize| if j == 0 { 1 } else { 6 * j };

    let mut vertices = vec![[0.0, 0.0]];
    for j in 1..=refinement {
        let radius = j as f64 / refinement as f64;
        let count = ring_len(j);
        for k in 0..count {
            let angle = 2.0 * PI * k as f64 / count as f64;
            vertices.push([radius * angle.cos(), radius * angle.sin()]);
        }
    }

    let mut triangles = Vec::with_capacity(6 * refinement * refinement);
    for k in 0..6 {
        triangles.push([0, 1 + k, 1 + (k + 1) % 6]);
    }
    for j in 2..=refinement {
        let (inner0, n_in) = (ring_start(j - 1), ring_len(j - 1));
        let (outer0, n_out) = (ring_start(j), ring_len(j));
        let inner = |i: usize| inner0 + i % n_in;
        let outer = |k: usize| outer0 + k % n_out;
        let (mut i, mut k) = (0, 0);
        while i < n_in || k < n_out {
            // Compare the angles of the next inner and outer vertices exactly.
            let advance_inner = k == n_out || (i < n_in && (i + 1) * n_out < (k + 1) * n_in);
            if advance_inner {
                triangles.push([inner(i), outer(k), inner(i + 1)]);
                i += 1;
            } else {
                triangles.push([inner(i), outer(k), outer(k + 1)]);
                k += 1;
            }
        }
    }
    DomainMesh::from_triangles(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn square_grid_counts() {
        assert!(build_unit_square_grid(1).is_err());
        let m = build_unit_square_grid(2).unwrap();
        assert_eq!(m.num_vertices(), 9);
        assert_eq!(m.num_triangles(), 8);
        assert_eq!(m.boundary_vertices().len(), 8);
        assert_eq!(m.interior_vertices().collect::<Vec<_>>(), vec![4]);
        for n in [2, 3, 7, 16] {
            let m = build_unit_square_grid(n).unwrap();
            assert_eq!(m.num_vertices(), (n + 1) * (n + 1));
            assert_eq!(m.num_triangles(), 2 * n * n);
            assert_abs_diff_eq!(m.total_area(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn disk_mesh_construction() {
        let fan = build_unit_disk_mesh(1).unwrap();
        assert_eq!(fan.num_vertices(), 7);
        assert_eq!(fan.num_triangles(), 6);
        assert!(fan.triangles().iter().all(|t| t[0] == 0));
        assert_eq!(fan.interior_vertices().collect::<Vec<_>>(), vec![0]);

        for refinement in 1..=8 {
            let m = build_unit_disk_mesh(refinement).unwrap();
            assert_eq!(m.num_triangles(), 6 * refinement * refinement);
            let rim = 6 * refinement;
            assert_eq!(m.boundary_vertices().len(), rim);
            for &b in m.boundary_vertices() {
                let [x, y] = m.vertices()[b];
                assert_abs_diff_eq!(x.hypot(y), 1.0, epsilon = 1e-12);
            }
            // Inscribed regular polygon area.
            let polygon = 0.5 * rim as f64 * (2.0 * PI / rim as f64).sin();
            assert_abs_diff_eq!(m.total_area(), polygon, epsilon = 1e-12);
        }
        let area4 = build_unit_disk_mesh(4).unwrap().total_area();
        assert!((PI - area4) / PI < 0.03);
        let area6 = build_unit_disk_mesh(6).unwrap().total_area();
        assert!((PI - area6) / PI < 0.01);
    }

    #[test]
    fn triangle_gradient_reproduces_affine_functions() {
        let m = build_unit_disk_mesh(3).unwrap();
        for t in 0..m.num_triangles() {
            let tri = m.triangles()[t];
            let at = |f: &dyn Fn(f64, f64) -> f64| tri.map(|v| f(m.vertices()[v][0], m.vertices()[v][1]));
            let g = m.triangle_gradient(t, [2.5; 3]);
            assert!(g[0].abs() < 1e-12 && g[1].abs() < 1e-12);
            let g = m.triangle_gradient(t, at(&|x, _| x));
            assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-12);
            let g = m.triangle_gradient(t, at(&|x, y| 3.0 * x + 5.0 * y));
            assert_abs_diff_eq!(g[0], 3.0, epsilon = 1e-12);
            assert_abs_diff_eq!(g[1], 5.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn boundary_loop_is_counterclockwise() {
        let m = build_unit_disk_mesh(3).unwrap();
        let order = m.boundary_loop().unwrap();
        assert_eq!(order.len(), 18);
        let angles: Vec<f64> =
            order.iter().map(|&v| m.vertices()[v][1].atan2(m.vertices()[v][0]).rem_euclid(2.0 * PI)).collect();
        assert_abs_diff_eq!(angles[0], 0.0, epsilon = 1e-12);
        assert!(angles.windows(2).all(|w| w[1] > w[0]));

        let sq = build_unit_square_grid(3).unwrap();
        assert_eq!(sq.boundary_loop().unwrap(), vec![0, 1, 2, 3, 7, 11, 15, 14, 13, 12, 8, 4]);
    }

    #[test]
    fn degenerate_and_inconsistent_meshes_are_rejected() {
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(
            DomainMesh::from_triangles(verts, vec![[0, 1, 2]]),
            Err(MeshError::DegenerateTriangle { .. })
        ));
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(
            DomainMesh::from_triangles(verts.clone(), vec![[0, 2, 1]]),
            Err(MeshError::DegenerateTriangle { .. })
        ));
        assert!(matches!(
            DomainMesh::new(verts, vec![[0, 1, 2]], vec![true, true, false]),
            Err(MeshError::BoundaryMismatch(2))
        ));
    }

    #[test]
    fn stiffness_rows_annihilate_constants() {
        let m = build_unit_square_grid(4).unwrap();
        for row in m.stiffness_rows() {
            let sum: f64 = row.iter().map(|(_, v)| v).sum();
            assert_abs_diff_eq!(sum, 0.0, epsilon = 1e-12);
        }
    }
}
