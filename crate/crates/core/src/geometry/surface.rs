//! Level-set descriptions of the supported target surfaces.
//!
//! Every target is a regular level set `{F = 0}` in R^3. The normal,
//! the shape operator and the second fundamental form are all read off
//! `grad F` and `Hess F`.

use nalgebra::{Matrix3, Vector3};

use super::ManifoldKind;

pub(crate) fn level(kind: &ManifoldKind, x: &Vector3<f64>) -> f64 {
    match *kind {
        ManifoldKind::Sphere { radius } => (x.norm_squared() - radius * radius) / (2.0 * radius),
        ManifoldKind::Ellipsoid { semi_axes: [a, b, c] } => {
            0.5 * (x.x * x.x / (a * a) + x.y * x.y / (b * b) + x.z * x.z / (c * c) - 1.0)
        }
        ManifoldKind::Torus { major_radius, minor_radius } => {
            let rho = x.x.hypot(x.y);
            0.5 * ((rho - major_radius).powi(2) + x.z * x.z - minor_radius * minor_radius)
        }
    }
}

pub(crate) fn level_gradient(kind: &ManifoldKind, x: &Vector3<f64>) -> Vector3<f64> {
    match *kind {
        ManifoldKind::Sphere { radius } => x / radius,
        ManifoldKind::Ellipsoid { semi_axes: [a, b, c] } => Vector3::new(x.x / (a * a), x.y / (b * b), x.z / (c * c)),
        ManifoldKind::Torus { major_radius, .. } => {
            let rho = x.x.hypot(x.y);
            let s = (rho - major_radius) / rho;
            Vector3::new(s * x.x, s * x.y, x.z)
        }
    }
}

pub(crate) fn level_hessian(kind: &ManifoldKind, x: &Vector3<f64>) -> Matrix3<f64> {
    match *kind {
        ManifoldKind::Sphere { radius } => Matrix3::identity() / radius,
        ManifoldKind::Ellipsoid { semi_axes: [a, b, c] } => {
            Matrix3::from_diagonal(&Vector3::new(1.0 / (a * a), 1.0 / (b * b), 1.0 / (c * c)))
        }
        ManifoldKind::Torus { major_radius, .. } => {
            let rho = x.x.hypot(x.y);
            let rho3 = rho * rho * rho;
            let base = 1.0 - major_radius / rho;
            let xx = base + major_radius * x.x * x.x / rho3;
            let yy = base + major_radius * x.y * x.y / rho3;
            let xy = major_radius * x.x * x.y / rho3;
            Matrix3::new(xx, xy, 0.0, xy, yy, 0.0, 0.0, 0.0, 1.0)
        }
    }
}

/// Point of the surface at parameters `(u, v)`; `u` is the azimuth in
/// `[0, 2pi)`, `v` the polar angle in `[0, pi]` (sphere, ellipsoid) or the
/// tube angle in `[0, 2pi)` (torus).
pub(crate) fn point_at(kind: &ManifoldKind, u: f64, v: f64) -> Vector3<f64> {
    match *kind {
        ManifoldKind::Sphere { radius } => Vector3::new(v.sin() * u.cos(), v.sin() * u.sin(), v.cos()) * radius,
        ManifoldKind::Ellipsoid { semi_axes: [a, b, c] } => {
            Vector3::new(a * v.sin() * u.cos(), b * v.sin() * u.sin(), c * v.cos())
        }
        ManifoldKind::Torus { major_radius, minor_radius } => {
            let ring = major_radius + minor_radius * v.cos();
            Vector3::new(ring * u.cos(), ring * u.sin(), minor_radius * v.sin())
        }
    }
}

/// Upper end of the second parameter range.
pub(crate) fn v_extent(kind: &ManifoldKind) -> f64 {
    match kind {
        ManifoldKind::Torus { .. } => 2.0 * std::f64::consts::PI,
        _ => std::f64::consts::PI,
    }
}

/// Grid sample closest to `x`, used to seed the Newton projection.
pub(crate) fn nearest_grid_point(kind: &ManifoldKind, x: &Vector3<f64>) -> Vector3<f64> {
    const NU: usize = 48;
    const NV: usize = 24;
    let du = 2.0 * std::f64::consts::PI / NU as f64;
    let (dv, v0) = match kind {
        ManifoldKind::Torus { .. } => (2.0 * std::f64::consts::PI / NV as f64, 0.0),
        _ => (std::f64::consts::PI / NV as f64, 0.5 * std::f64::consts::PI / NV as f64),
    };
    let mut best = point_at(kind, 0.0, v0);
    let mut best_d2 = (best - x).norm_squared();
    for i in 0..NU {
        for j in 0..NV {
            let p = point_at(kind, i as f64 * du, v0 + j as f64 * dv);
            let d2 = (p - x).norm_squared();
            if d2 < best_d2 {
                best_d2 = d2;
                best = p;
            }
        }
    }
    best
}
