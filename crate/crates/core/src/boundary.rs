//! Dirichlet data on the boundary vertices of a mesh.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use thiserror::Error;

use crate::energy::ManifoldMap;
use crate::geometry::{AmbientVector, GeodesicBall, GeometryError, ManifoldKind, TargetManifold};
use crate::mesh::{DomainMesh, MeshError};

#[derive(Debug, Error)]
pub enum BoundaryError {
    #[error("boundary vertex {0} has no prescribed value")]
    MissingVertex(usize),
    #[error("vertex {0} is not a boundary vertex")]
    NotBoundary(usize),
    #[error("boundary vertex {vertex}: {source}")]
    OffManifold {
        vertex: usize,
        #[source]
        source: GeometryError,
    },
    #[error("boundary vertex {vertex} lies at geodesic distance {distance} outside the ball of radius {radius}")]
    OutsideBall { vertex: usize, distance: f64, radius: f64 },
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Prescribed values `u = v` on the boundary vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub values: BTreeMap<usize, AmbientVector>,
}

impl BoundaryData {
    pub fn new(values: BTreeMap<usize, AmbientVector>) -> Self {
        Self { values }
    }

    /// Restrict a full map to the mesh's boundary vertices.
    pub fn from_map(mesh: &DomainMesh, map: &ManifoldMap) -> Result<Self, BoundaryError> {
        let values = mesh
            .boundary_vertices()
            .iter()
            .map(|&b| map.values.get(b).map(|v| (b, *v)).ok_or(BoundaryError::MissingVertex(b)))
            .collect::<Result<_, _>>()?;
        Ok(Self { values })
    }

    pub fn get(&self, vertex: usize) -> Option<&AmbientVector> {
        self.values.get(&vertex)
    }

    /// Every boundary vertex covered, values on `N`, and inside `ball` when given.
    pub fn validate(
        &self,
        mesh: &DomainMesh,
        target: &TargetManifold,
        ball: Option<&GeodesicBall>,
    ) -> Result<(), BoundaryError> {
        if let Some(&v) = self.values.keys().find(|&&v| v >= mesh.num_vertices() || !mesh.is_boundary(v)) {
            return Err(BoundaryError::NotBoundary(v));
        }
        for &b in mesh.boundary_vertices() {
            let y = self.values.get(&b).ok_or(BoundaryError::MissingVertex(b))?;
            target.check_on_manifold(y).map_err(|source| BoundaryError::OffManifold { vertex: b, source })?;
            if let Some(ball) = ball {
                let distance = target.geodesic_distance(&ball.center, y)?;
                if distance > ball.radius {
                    return Err(BoundaryError::OutsideBall { vertex: b, distance, radius: ball.radius });
                }
            }
        }
        Ok(())
    }
}

/// Orthonormal frame of `T_center N` used to lay out boundary circles.
pub fn cap_frame(target: &TargetManifold, center: &AmbientVector) -> [AmbientVector; 2] {
    let n = target.unit_normal(center);
    let axis = if n.cross(&AmbientVector::x()).norm() > 1e-8 { AmbientVector::x() } else { AmbientVector::y() };
    let e1 = (axis - n * n.dot(&axis)).normalize();
    [e1, n.cross(&e1)]
}

/// Boundary traversed once around the geodesic circle of radius `rho`
/// about `center`, at angle proportional to boundary arc length.
pub fn polar_cap(
    mesh: &DomainMesh,
    target: &TargetManifold,
    center: &AmbientVector,
    rho: f64,
) -> Result<BoundaryData, BoundaryError> {
    if !target.is_sphere() {
        return Err(GeometryError::UnsupportedTarget("polar-cap boundary data").into());
    }
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(BoundaryError::ParamOutOfRange(format!("cap radius {rho} must be nonnegative")));
    }
    target.check_on_manifold(center)?;
    let order = mesh.boundary_loop()?;
    let vertices = mesh.vertices();
    let mut arc = Vec::with_capacity(order.len());
    let mut length = 0.0;
    for k in 0..order.len() {
        arc.push(length);
        let [x0, y0] = vertices[order[k]];
        let [x1, y1] = vertices[order[(k + 1) % order.len()]];
        length += (x1 - x0).hypot(y1 - y0);
    }
    let [e1, e2] = cap_frame(target, center);
    let mut values = BTreeMap::new();
    for (k, &v) in order.iter().enumerate() {
        let angle = 2.0 * PI * arc[k] / length;
        let tangent = (e1 * angle.cos() + e2 * angle.sin()) * rho;
        values.insert(v, target.exp_map(center, &tangent)?);
    }
    Ok(BoundaryData { values })
}

/// The great circle orthogonal to `center`: a polar cap of radius `pi R / 2`.
pub fn equator(
    mesh: &DomainMesh,
    target: &TargetManifold,
    center: &AmbientVector,
) -> Result<BoundaryData, BoundaryError> {
    let ManifoldKind::Sphere { radius } = target.kind() else {
        return Err(GeometryError::UnsupportedTarget("equator boundary data").into());
    };
    polar_cap(mesh, target, center, 0.5 * PI * radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_unit_disk_mesh;

    #[test]
    fn cap_examples() {
        let mesh = build_unit_disk_mesh(4).unwrap();
        let s = TargetManifold::unit_sphere();
        let north = AmbientVector::z();
        let flat = polar_cap(&mesh, &s, &north, 0.0).unwrap();
        assert!(flat.values.values().all(|v| *v == north));
        assert_eq!(flat.values.len(), mesh.boundary_vertices().len());

        let cap = polar_cap(&mesh, &s, &north, 0.3).unwrap();
        for v in cap.values.values() {
            assert!((s.geodesic_distance(&north, v).unwrap() - 0.3).abs() < 1e-12);
        }
        let ball = GeodesicBall::new(&s, north, 0.5).unwrap();
        cap.validate(&mesh, &s, Some(&ball)).unwrap();
        let tight = GeodesicBall::new(&s, north, 0.2).unwrap();
        assert!(matches!(cap.validate(&mesh, &s, Some(&tight)), Err(BoundaryError::OutsideBall { .. })));

        let eq = equator(&mesh, &s, &north).unwrap();
        for v in eq.values.values() {
            assert!(v.dot(&north).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_follows_boundary_angle_on_the_disk() {
        let mesh = build_unit_disk_mesh(3).unwrap();
        let s = TargetManifold::unit_sphere();
        let cap = polar_cap(&mesh, &s, &AmbientVector::z(), 0.3).unwrap();
        for (&v, y) in &cap.values {
            let [x, z] = mesh.vertices()[v];
            let expected = z.atan2(x);
            let got = y.y.atan2(y.x);
            let diff = (expected - got).rem_euclid(2.0 * PI);
            assert!(diff.min(2.0 * PI - diff) < 1e-12);
        }
    }

    #[test]
    fn incomplete_data_is_rejected() {
        let mesh = build_unit_disk_mesh(2).unwrap();
        let s = TargetManifold::unit_sphere();
        let mut cap = polar_cap(&mesh, &s, &AmbientVector::z(), 0.3).unwrap();
        let first = *cap.values.keys().next().unwrap();
        cap.values.remove(&first);
        assert!(matches!(cap.validate(&mesh, &s, None), Err(BoundaryError::MissingVertex(_))));
        cap.values.insert(0, AmbientVector::z());
        assert!(matches!(cap.validate(&mesh, &s, None), Err(BoundaryError::NotBoundary(0))));
        let torus = TargetManifold::torus(2.0, 1.0).unwrap();
        assert!(polar_cap(&mesh, &torus, &AmbientVector::new(3.0, 0.0, 0.0), 0.1).is_err());
    }
}
