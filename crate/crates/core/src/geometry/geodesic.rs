//! Geodesic distance on non-spherical targets by shooting.
//!
//! Geodesics of an embedded surface satisfy `c'' = A(c)(c', c')`. The
//! initial velocity `V ∈ T_y N` is corrected by Gauss-Newton until
//! `exp_y(V) = z`; the distance is then `|V|`.

use nalgebra::{Matrix2, Vector2};

use super::{surface, AmbientVector, GeometryError, TargetManifold};

const RK_STEPS: usize = 400;
const SHOOTING_TOLERANCE: f64 = 1e-10;
const SHOOTING_MAX_ITERATIONS: usize = 30;
const JACOBIAN_STEP: f64 = 1e-6;

fn acceleration(m: &TargetManifold, c: &AmbientVector, v: &AmbientVector) -> AmbientVector {
    let g = surface::level_gradient(&m.kind, c);
    let h = surface::level_hessian(&m.kind, c);
    g * (-v.dot(&(h * v)) / g.norm_squared())
}

/// Endpoint at time 1 of the geodesic leaving `y` with velocity `v` (RK4).
fn shoot(m: &TargetManifold, y: &AmbientVector, v: &AmbientVector) -> AmbientVector {
    let dt = 1.0 / RK_STEPS as f64;
    let (mut c, mut w) = (*y, *v);
    for _ in 0..RK_STEPS {
        let k1c = w;
        let k1w = acceleration(m, &c, &w);
        let k2c = w + k1w * (0.5 * dt);
        let k2w = acceleration(m, &(c + k1c * (0.5 * dt)), &k2c);
        let k3c = w + k2w * (0.5 * dt);
        let k3w = acceleration(m, &(c + k2c * (0.5 * dt)), &k3c);
        let k4c = w + k3w * dt;
        let k4w = acceleration(m, &(c + k3c * dt), &k4c);
        c += (k1c + k2c * 2.0 + k3c * 2.0 + k4c) * (dt / 6.0);
        w += (k1w + k2w * 2.0 + k3w * 2.0 + k4w) * (dt / 6.0);
    }
    c
}

pub(crate) fn shooting_distance(
    m: &TargetManifold,
    y: &AmbientVector,
    z: &AmbientVector,
) -> Result<f64, GeometryError> {
    let chord = (z - y).norm();
    if chord == 0.0 {
        return Ok(0.0);
    }
    let limit = m.tubular_width();
    if chord > limit {
        return Err(GeometryError::DistanceNotComputable(format!(
            "chord {chord:e} exceeds the supported radius {limit:e}"
        )));
    }
    let [e1, e2] = m.tangent_basis(y);
    let lift = |a: &Vector2<f64>| e1 * a.x + e2 * a.y;
    let t0 = m.tangent_part(y, &(z - y));
    let mut coords = Vector2::new(t0.dot(&e1), t0.dot(&e2));

    for _ in 0..SHOOTING_MAX_ITERATIONS {
        let r = shoot(m, y, &lift(&coords)) - z;
        if r.norm() <= SHOOTING_TOLERANCE * chord.max(1.0) {
            return Ok(lift(&coords).norm());
        }
        let mut jac = nalgebra::Matrix3x2::zeros();
        for k in 0..2 {
            let mut d = Vector2::zeros();
            d[k] = JACOBIAN_STEP;
            let col = (shoot(m, y, &lift(&(coords + d))) - shoot(m, y, &lift(&(coords - d)))) / (2.0 * JACOBIAN_STEP);
            jac.set_column(k, &col);
        }
        let normal: Matrix2<f64> = jac.transpose() * jac;
        let Some(step) = normal.lu().solve(&(-(jac.transpose() * r))) else {
            break;
        };
        coords += step;
    }
    Err(GeometryError::DistanceNotComputable("geodesic shooting did not converge".into()))
}
