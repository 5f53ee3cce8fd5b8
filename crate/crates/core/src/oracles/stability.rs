//! `∫ |∇u|^p |φ|^2 <= 16 r^2 ∫ |∇u|^{p-2} |∇φ|^2` for maps with range in the
//! Euclidean ball `B(P0, r) ⊂ R^3`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{InequalityMargin, OracleError};
use crate::energy::{check_exponent, w1p_norm, EnergyError, ManifoldMap};
use crate::geometry::AmbientVector;
use crate::mesh::DomainMesh;
use crate::summation::compensated_sum;

pub const STABILITY_FACTOR: f64 = 16.0;

/// Largest Euclidean distance of the map's values from `center`.
pub fn euclidean_range_radius(u: &ManifoldMap, center: &AmbientVector) -> f64 {
    u.values.iter().map(|y| (y - center).norm()).fold(0.0, f64::max)
}

fn check_field(mesh: &DomainMesh, values: &[AmbientVector]) -> Result<(), EnergyError> {
    if values.len() != mesh.num_vertices() {
        return Err(EnergyError::SizeMismatch { expected: mesh.num_vertices(), found: values.len() });
    }
    Ok(())
}

/// Both sides of the inequality for one test field `phi` (zero on the
/// boundary); `|φ|^2` is sampled at triangle barycenters.
pub fn stability_margin(
    mesh: &DomainMesh,
    u: &ManifoldMap,
    p: f64,
    r: f64,
    phi: &[AmbientVector],
) -> Result<InequalityMargin, OracleError> {
    check_exponent(p)?;
    check_field(mesh, &u.values)?;
    check_field(mesh, phi)?;
    if let Some(&b) = mesh.boundary_vertices().iter().find(|&&b| phi[b] != AmbientVector::zeros()) {
        return Err(EnergyError::TestFieldOnBoundary(b).into());
    }
    let mut lhs_terms = Vec::with_capacity(mesh.num_triangles());
    let mut rhs_terms = Vec::with_capacity(mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_areas()[t];
        let gu = mesh.map_gradient(t, &u.values);
        let du2 = gu[0].norm_squared() + gu[1].norm_squared();
        let gphi = mesh.map_gradient(t, phi);
        let bar = (phi[tri[0]] + phi[tri[1]] + phi[tri[2]]) / 3.0;
        lhs_terms.push(area * du2.powf(0.5 * p) * bar.norm_squared());
        let weight = if p == 2.0 { 1.0 } else { du2.powf(0.5 * p - 1.0) };
        rhs_terms.push(area * weight * (gphi[0].norm_squared() + gphi[1].norm_squared()));
    }
    let lhs = compensated_sum(lhs_terms);
    let rhs = STABILITY_FACTOR * r * r * compensated_sum(rhs_terms);
    Ok(InequalityMargin::new(lhs, rhs, phi.iter().flat_map(|v| [v.x, v.y, v.z]).collect(), 0))
}

/// Gaussian bumps on interior vertices, one Jacobi averaging pass over the
/// vertex neighborhoods (boundary held at zero), scaled to unit W^{1,p} norm.
pub fn random_test_field(mesh: &DomainMesh, p: f64, rng: &mut ChaCha8Rng) -> Vec<AmbientVector> {
    let n = mesh.num_vertices();
    let mut raw = vec![AmbientVector::zeros(); n];
    for i in mesh.interior_vertices() {
        raw[i] = AmbientVector::from_fn(|_, _| StandardNormal.sample(rng));
    }
    let rows = mesh.stiffness_rows();
    let mut smooth = vec![AmbientVector::zeros(); n];
    for i in mesh.interior_vertices() {
        let neighbors: Vec<usize> = rows[i].iter().map(|&(j, _)| j).filter(|&j| j != i).collect();
        let sum = neighbors.iter().fold(raw[i], |acc, &j| acc + raw[j]);
        smooth[i] = sum / (neighbors.len() + 1) as f64;
    }
    let norm = w1p_norm(mesh, &smooth, p);
    if norm > 0.0 {
        for v in &mut smooth {
            *v /= norm;
        }
    }
    smooth
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub radius: f64,
    pub margins: Vec<InequalityMargin>,
}

impl StabilityReport {
    /// The trial with the smallest margin.
    pub fn worst(&self) -> Option<&InequalityMargin> {
        self.margins.iter().min_by(|a, b| a.margin.total_cmp(&b.margin))
    }

    /// Largest observed `lhs / rhs`.
    pub fn max_ratio(&self) -> f64 {
        self.margins.iter().filter(|m| m.rhs > 0.0).map(|m| m.lhs / m.rhs).fold(0.0, f64::max)
    }
}

/// Run `trials` random test fields drawn from `seed` against `u`, with
/// `r` the Euclidean radius about `center` (defaults to the map's own
/// Euclidean range radius).
pub fn stability_check(
    mesh: &DomainMesh,
    u: &ManifoldMap,
    center: &AmbientVector,
    r: Option<f64>,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<StabilityReport, OracleError> {
    let range = euclidean_range_radius(u, center);
    let radius = r.unwrap_or(range);
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(OracleError::InvalidParameter(format!("radius {radius} must be nonnegative")));
    }
    if range > radius {
        return Err(OracleError::NotSmallRange { range, radius });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margins = (0..trials)
        .map(|_| {
            let phi = random_test_field(mesh, p, &mut rng);
            stability_margin(mesh, u, p, radius, &phi).map(|mut m| {
                m.seed = seed;
                m
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(StabilityReport { radius, margins })
}
