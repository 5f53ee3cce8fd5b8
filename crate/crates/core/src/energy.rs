//! Discrete p-energy of P1 maps, its Riemannian gradient, and the weak
//! Euler-Lagrange defect of `-div(|∇u|^{p-2} ∇u) = |∇u|^{p-2} A(u)(∇u, ∇u)`.
//!
//! Gradients of P1 maps are constant per triangle, so the energy
//! `(1/p) Σ_T area(T) (|∇u|_T^2 + eps^2)^{p/2}` is exact for `eps = 0`.

use thiserror::Error;

use crate::geometry::{AmbientVector, GeodesicBall, GeometryError, TargetManifold};
use crate::mesh::DomainMesh;
use crate::summation::compensated_sum;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("exponent p = {0} must be finite and at least 2")]
    InvalidExponent(f64),
    #[error("regularization eps = {0} must be finite and nonnegative")]
    InvalidRegularization(f64),
    #[error("field has {found} values for a mesh with {expected} vertices")]
    SizeMismatch { expected: usize, found: usize },
    #[error("vertex {vertex}: {source}")]
    Geometry {
        vertex: usize,
        #[source]
        source: GeometryError,
    },
    #[error("triangle {triangle}: projected barycenter undefined: {source}")]
    Barycenter {
        triangle: usize,
        #[source]
        source: GeometryError,
    },
    #[error("test field is nonzero at boundary vertex {0}")]
    TestFieldOnBoundary(usize),
}

/// Per-vertex values of a discrete map `u: M -> N ⊂ R^3`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldMap {
    pub values: Vec<AmbientVector>,
}

impl ManifoldMap {
    pub fn new(values: Vec<AmbientVector>) -> Self {
        Self { values }
    }

    pub fn constant(num_vertices: usize, point: AmbientVector) -> Self {
        Self { values: vec![point; num_vertices] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Check the vertex count and that every value lies on `N`.
    pub fn validate(&self, mesh: &DomainMesh, target: &TargetManifold) -> Result<(), EnergyError> {
        check_len(mesh, &self.values)?;
        for (vertex, y) in self.values.iter().enumerate() {
            target.check_on_manifold(y).map_err(|source| EnergyError::Geometry { vertex, source })?;
        }
        Ok(())
    }

    /// Largest ambient distance between corresponding vertex values.
    pub fn sup_distance(&self, other: &ManifoldMap) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Summary of a map's energetic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub p_energy: f64,
    /// Norm of the Riemannian gradient divided by `sqrt(#interior vertices)`.
    pub riemannian_gradient_norm: f64,
    pub el_residual_norm: f64,
    pub max_triangle_gradient: f64,
    /// Largest geodesic distance from the ball center; zero without a ball.
    pub range_radius: f64,
}

fn check_len(mesh: &DomainMesh, values: &[AmbientVector]) -> Result<(), EnergyError> {
    if values.len() == mesh.num_vertices() {
        Ok(())
    } else {
        Err(EnergyError::SizeMismatch { expected: mesh.num_vertices(), found: values.len() })
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<(), EnergyError> {
    if p.is_finite() && p >= 2.0 {
        Ok(())
    } else {
        Err(EnergyError::InvalidExponent(p))
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<(), EnergyError> {
    if eps.is_finite() && eps >= 0.0 {
        Ok(())
    } else {
        Err(EnergyError::InvalidRegularization(eps))
    }
}

fn squared_norm(g: &[AmbientVector; 2]) -> f64 {
    g[0].norm_squared() + g[1].norm_squared()
}

/// Discrete regularized p-energy. Assumes validated inputs.
pub(crate) fn energy_unchecked(mesh: &DomainMesh, values: &[AmbientVector], p: f64, eps: f64) -> f64 {
    let eps2 = eps * eps;
    let half_p = 0.5 * p;
    let total = compensated_sum((0..mesh.num_triangles()).map(|t| {
        let g = mesh.map_gradient(t, values);
        mesh.triangle_areas()[t] * (squared_norm(&g) + eps2).powf(half_p)
    }));
    total / p
}

/// `E(new) - E(old)` assembled per triangle, so the result keeps its
/// relative accuracy when it is tiny compared with either energy.
pub(crate) fn energy_difference_unchecked(
    mesh: &DomainMesh,
    old: &[AmbientVector],
    new: &[AmbientVector],
    p: f64,
    eps: f64,
) -> f64 {
    let eps2 = eps * eps;
    let half_p = 0.5 * p;
    let total = compensated_sum((0..mesh.num_triangles()).map(|t| {
        let g0 = mesh.map_gradient(t, old);
        let g1 = mesh.map_gradient(t, new);
        let b = squared_norm(&g0) + eps2;
        let delta = (g1[0] - g0[0]).dot(&(g1[0] + g0[0])) + (g1[1] - g0[1]).dot(&(g1[1] + g0[1]));
        let area = mesh.triangle_areas()[t];
        if delta.abs() < 0.5 * b {
            area * b.powf(half_p) * (half_p * (delta / b).ln_1p()).exp_m1()
        } else {
            area * ((squared_norm(&g1) + eps2).powf(half_p) - b.powf(half_p))
        }
    }));
    total / p
}

/// `(1/p) Σ_T area(T) (|∇u|_T^2 + eps^2)^{p/2}`.
pub fn p_energy(mesh: &DomainMesh, u: &ManifoldMap, p: f64, eps: f64) -> Result<f64, EnergyError> {
    check_exponent(p)?;
    check_eps(eps)?;
    check_len(mesh, &u.values)?;
    Ok(energy_unchecked(mesh, &u.values, p, eps))
}

/// Euclidean gradient of the regularized energy with respect to every
/// vertex position.
pub(crate) fn euclidean_gradient(mesh: &DomainMesh, values: &[AmbientVector], p: f64, eps: f64) -> Vec<AmbientVector> {
    let eps2 = eps * eps;
    let exponent = 0.5 * p - 1.0;
    let mut grad = vec![AmbientVector::zeros(); values.len()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let g = mesh.map_gradient(t, values);
        let weight = mesh.triangle_areas()[t] * (squared_norm(&g) + eps2).powf(exponent);
        let c = mesh.gradient_coefficients(t);
        for k in 0..3 {
            grad[tri[k]] += (g[0] * c[k][0] + g[1] * c[k][1]) * weight;
        }
    }
    grad
}

pub(crate) fn riemannian_gradient_unchecked(
    mesh: &DomainMesh,
    target: &TargetManifold,
    values: &[AmbientVector],
    p: f64,
    eps: f64,
) -> Vec<AmbientVector> {
    let mut grad = euclidean_gradient(mesh, values, p, eps);
    for (i, g) in grad.iter_mut().enumerate() {
        *g = if mesh.is_boundary(i) { AmbientVector::zeros() } else { target.tangent_part(&values[i], g) };
    }
    grad
}

/// Riemannian gradient of the regularized energy: the Euclidean vertex
/// gradient projected onto `T_{u_i} N`, zero on boundary vertices.
pub fn energy_gradient(
    mesh: &DomainMesh,
    target: &TargetManifold,
    u: &ManifoldMap,
    p: f64,
    eps: f64,
) -> Result<Vec<AmbientVector>, EnergyError> {
    check_exponent(p)?;
    check_eps(eps)?;
    u.validate(mesh, target)?;
    Ok(riemannian_gradient_unchecked(mesh, target, &u.values, p, eps))
}

/// `sqrt(Σ_i |g_i|^2 / #interior)`, the solver's convergence metric.
pub fn normalized_gradient_norm(mesh: &DomainMesh, grad: &[AmbientVector]) -> f64 {
    let sum = compensated_sum(grad.iter().map(|g| g.norm_squared()));
    (sum / mesh.num_interior().max(1) as f64).sqrt()
}

/// Per-triangle `|∇u|^{p-2} Σ_α A(ū_T)(∂_α u, ∂_α u)` with `ū_T` the
/// projected barycenter and the partials projected onto `T_{ū_T} N`.
fn curvature_terms(
    mesh: &DomainMesh,
    target: &TargetManifold,
    values: &[AmbientVector],
    p: f64,
) -> Result<Vec<([AmbientVector; 2], f64, AmbientVector)>, EnergyError> {
    (0..mesh.num_triangles())
        .map(|t| {
            let tri = mesh.triangles()[t];
            let g = mesh.map_gradient(t, values);
            let weight = squared_norm(&g).powf(0.5 * p - 1.0);
            let bary = (values[tri[0]] + values[tri[1]] + values[tri[2]]) / 3.0;
            let center =
                target.nearest_point(&bary).map_err(|source| EnergyError::Barycenter { triangle: t, source })?;
            let dx = target.tangent_part(&center, &g[0]);
            let dy = target.tangent_part(&center, &g[1]);
            let a = target.sff_unchecked(&center, &dx, &dx) + target.sff_unchecked(&center, &dy, &dy);
            Ok((g, weight, a))
        })
        .collect()
}

/// Weak-form defect
/// `Σ_T area (|∇u|^{p-2} ∇u·∇φ − |∇u|^{p-2} A(u)(∇u,∇u)·φ(barycenter))`
/// for a P1 test field vanishing on the boundary.
pub fn el_residual(
    mesh: &DomainMesh,
    target: &TargetManifold,
    u: &ManifoldMap,
    p: f64,
    phi: &[AmbientVector],
) -> Result<f64, EnergyError> {
    check_exponent(p)?;
    u.validate(mesh, target)?;
    check_len(mesh, phi)?;
    if let Some(&b) = mesh.boundary_vertices().iter().find(|&&b| phi[b] != AmbientVector::zeros()) {
        return Err(EnergyError::TestFieldOnBoundary(b));
    }
    let terms = curvature_terms(mesh, target, &u.values, p)?;
    Ok(compensated_sum(terms.iter().enumerate().map(|(t, (g, weight, a))| {
        let tri = mesh.triangles()[t];
        let gphi = mesh.map_gradient(t, phi);
        let phi_bar = (phi[tri[0]] + phi[tri[1]] + phi[tri[2]]) / 3.0;
        let flux = g[0].dot(&gphi[0]) + g[1].dot(&gphi[1]);
        mesh.triangle_areas()[t] * weight * (flux - a.dot(&phi_bar))
    })))
}

/// `(Σ_T area |φ(bary)|^p + Σ_T area |∇φ|^p)^{1/p}` for a P1 field.
pub fn w1p_norm(mesh: &DomainMesh, phi: &[AmbientVector], p: f64) -> f64 {
    let total = compensated_sum((0..mesh.num_triangles()).map(|t| {
        let tri = mesh.triangles()[t];
        let bar = (phi[tri[0]] + phi[tri[1]] + phi[tri[2]]) / 3.0;
        let g = mesh.map_gradient(t, phi);
        mesh.triangle_areas()[t] * (bar.norm().powf(p) + squared_norm(&g).powf(0.5 * p))
    }));
    total.powf(1.0 / p)
}

/// Largest normalized defect over unit tangent test fields `e·λ_i` at
/// interior vertices, each divided by the hat function's W^{1,p} norm.
pub fn el_residual_norm(
    mesh: &DomainMesh,
    target: &TargetManifold,
    u: &ManifoldMap,
    p: f64,
) -> Result<f64, EnergyError> {
    check_exponent(p)?;
    u.validate(mesh, target)?;
    let terms = curvature_terms(mesh, target, &u.values, p)?;
    let n = mesh.num_vertices();
    let mut residual = vec![AmbientVector::zeros(); n];
    let mut hat_power = vec![0.0f64; n];
    let third_p = (1.0f64 / 3.0).powf(p);
    for (t, (g, weight, a)) in terms.iter().enumerate() {
        let tri = mesh.triangles()[t];
        let c = mesh.gradient_coefficients(t);
        let area = mesh.triangle_areas()[t];
        for k in 0..3 {
            let flux = g[0] * c[k][0] + g[1] * c[k][1];
            residual[tri[k]] += (flux - a / 3.0) * (area * weight);
            let grad_hat = c[k][0].hypot(c[k][1]);
            hat_power[tri[k]] += area * (third_p + grad_hat.powf(p));
        }
    }
    Ok(mesh
        .interior_vertices()
        .map(|i| target.tangent_part(&u.values[i], &residual[i]).norm() / hat_power[i].powf(1.0 / p))
        .fold(0.0, f64::max))
}

/// Largest `|∇u|` over triangles.
pub fn max_triangle_gradient(mesh: &DomainMesh, u: &ManifoldMap) -> f64 {
    (0..mesh.num_triangles()).map(|t| squared_norm(&mesh.map_gradient(t, &u.values)).sqrt()).fold(0.0, f64::max)
}

/// Jumps of the piecewise-constant gradient across interior edges. Emitted
/// as a continuity diagnostic only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientContinuity {
    pub max_jump: f64,
    pub mean_jump: f64,
}

pub fn gradient_continuity(mesh: &DomainMesh, u: &ManifoldMap) -> GradientContinuity {
    let pairs = mesh.interior_edge_pairs();
    let jumps: Vec<f64> = pairs
        .iter()
        .map(|&(a, b)| {
            let ga = mesh.map_gradient(a, &u.values);
            let gb = mesh.map_gradient(b, &u.values);
            squared_norm(&[ga[0] - gb[0], ga[1] - gb[1]]).sqrt()
        })
        .collect();
    GradientContinuity {
        max_jump: jumps.iter().copied().fold(0.0, f64::max),
        mean_jump: compensated_sum(jumps.iter().copied()) / jumps.len().max(1) as f64,
    }
}

/// Largest geodesic distance of the map's values from `center`.
pub fn range_radius(target: &TargetManifold, u: &ManifoldMap, center: &AmbientVector) -> Result<f64, EnergyError> {
    u.values.iter().enumerate().try_fold(0.0f64, |acc, (vertex, y)| {
        target
            .geodesic_distance(center, y)
            .map(|d| acc.max(d))
            .map_err(|source| EnergyError::Geometry { vertex, source })
    })
}

/// Energy, gradient norm (at `eps`), residual norm (unregularized) and
/// range of `u`.
pub fn energy_report(
    mesh: &DomainMesh,
    target: &TargetManifold,
    u: &ManifoldMap,
    p: f64,
    eps: f64,
    ball: Option<&GeodesicBall>,
) -> Result<EnergyReport, EnergyError> {
    let grad = energy_gradient(mesh, target, u, p, eps)?;
    Ok(EnergyReport {
        p_energy: energy_unchecked(mesh, &u.values, p, 0.0),
        riemannian_gradient_norm: normalized_gradient_norm(mesh, &grad),
        el_residual_norm: el_residual_norm(mesh, target, u, p)?,
        max_triangle_gradient: max_triangle_gradient(mesh, u),
        range_radius: match ball {
            Some(ball) => range_radius(target, u, &ball.center)?,
            None => 0.0,
        },
    })
}
