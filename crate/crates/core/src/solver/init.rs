//! Feasible starting maps for the descent.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SolverConfig, SolverError};
use crate::boundary::{cap_frame, BoundaryData};
use crate::energy::ManifoldMap;
use crate::geometry::{AmbientVector, GeometryError, TargetManifold};
use crate::mesh::DomainMesh;

const CG_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitMode {
    /// Componentwise discrete harmonic extension, projected to `N` and
    /// then to the ball.
    HarmonicExtension,
    /// Interior values drawn uniformly in normal-coordinate radius from the
    /// configured ball, using `config.seed`.
    RandomInBall,
    Constant(AmbientVector),
}

/// Componentwise P1 harmonic extension of the boundary data into R^3
/// (conjugate gradients on the interior stiffness block).
pub fn linear_harmonic_extension(
    mesh: &DomainMesh,
    boundary: &BoundaryData,
) -> Result<Vec<AmbientVector>, SolverError> {
    let n = mesh.num_vertices();
    let mut values = vec![AmbientVector::zeros(); n];
    for &b in mesh.boundary_vertices() {
        values[b] = *boundary.get(b).ok_or(SolverError::InfeasibleBoundary(format!("vertex {b} has no value")))?;
    }
    let rows = mesh.stiffness_rows();
    let interior: Vec<usize> = mesh.interior_vertices().collect();
    if interior.is_empty() {
        return Ok(values);
    }
    let mut slot = vec![usize::MAX; n];
    for (k, &i) in interior.iter().enumerate() {
        slot[i] = k;
    }
    let apply = |x: &[AmbientVector]| -> Vec<AmbientVector> {
        interior
            .iter()
            .map(|&i| {
                rows[i]
                    .iter()
                    .filter(|(j, _)| slot[*j] != usize::MAX)
                    .fold(AmbientVector::zeros(), |acc, &(j, k)| acc + x[slot[j]] * k)
            })
            .collect()
    };
    let rhs: Vec<AmbientVector> = interior
        .iter()
        .map(|&i| {
            rows[i]
                .iter()
                .filter(|(j, _)| mesh.is_boundary(*j))
                .fold(AmbientVector::zeros(), |acc, &(j, k)| acc - values[j] * k)
        })
        .collect();
    let dot = |a: &[AmbientVector], b: &[AmbientVector]| -> f64 {
        crate::summation::compensated_sum(a.iter().zip(b).map(|(x, y)| x.dot(y)))
    };

    let mut x = vec![AmbientVector::zeros(); interior.len()];
    let mut r = rhs.clone();
    let mut d = r.clone();
    let mut rr = dot(&r, &r);
    let target = CG_TOLERANCE * CG_TOLERANCE * dot(&rhs, &rhs).max(f64::MIN_POSITIVE);
    for _ in 0..10 * interior.len() + 10 {
        if rr <= target {
            break;
        }
        let kd = apply(&d);
        let alpha = rr / dot(&d, &kd);
        for k in 0..x.len() {
            x[k] += d[k] * alpha;
            r[k] -= kd[k] * alpha;
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        for k in 0..d.len() {
            d[k] = r[k] + d[k] * beta;
        }
        rr = rr_next;
    }
    for (k, &i) in interior.iter().enumerate() {
        values[i] = x[k];
    }
    Ok(values)
}

/// Build a feasible starting map: boundary copied exactly, interior on `N`
/// and inside the ball when one is configured.
pub fn initialize_map(
    mesh: &DomainMesh,
    boundary: &BoundaryData,
    target: &TargetManifold,
    config: &SolverConfig,
    mode: InitMode,
) -> Result<ManifoldMap, SolverError> {
    boundary
        .validate(mesh, target, config.ball.as_ref())
        .map_err(|e| SolverError::InfeasibleBoundary(e.to_string()))?;

    let mut values = vec![AmbientVector::zeros(); mesh.num_vertices()];
    match mode {
        InitMode::Constant(point) => {
            target.check_on_manifold(&point)?;
            if let Some(ball) = &config.ball {
                if !ball.contains(target, &point, 0.0) {
                    return Err(SolverError::InfeasibleInit("constant initial value lies outside the ball".into()));
                }
            }
            for i in mesh.interior_vertices() {
                values[i] = point;
            }
        }
        InitMode::HarmonicExtension => {
            let linear = linear_harmonic_extension(mesh, boundary)?;
            for i in mesh.interior_vertices() {
                let y = target
                    .nearest_point(&linear[i])
                    .map_err(|e| SolverError::InfeasibleInit(format!("harmonic extension at vertex {i}: {e}")))?;
                values[i] = match &config.ball {
                    Some(ball) => target.project_to_geodesic_ball(ball, &y)?,
                    None => y,
                };
            }
        }
        InitMode::RandomInBall => {
            let ball = config.ball.as_ref().ok_or(SolverError::MissingBall)?;
            if !target.is_sphere() {
                return Err(GeometryError::UnsupportedTarget("random_in_ball initialization").into());
            }
            let [e1, e2] = cap_frame(target, &ball.center);
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            for i in mesh.interior_vertices() {
                let radius = ball.radius * rng.random::<f64>();
                let angle = 2.0 * PI * rng.random::<f64>();
                let tangent = (e1 * angle.cos() + e2 * angle.sin()) * radius;
                values[i] = target.exp_map(&ball.center, &tangent)?;
            }
        }
    }
    for &b in mesh.boundary_vertices() {
        values[b] = boundary.values[&b];
    }
    Ok(ManifoldMap::new(values))
}
