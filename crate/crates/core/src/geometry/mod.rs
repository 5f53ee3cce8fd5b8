//! Embedded target surfaces `N ⊂ R^3` and the pointwise geometry the
//! energy, solver and oracles consume: nearest-point projection, tangent
//! projection, second fundamental form, geodesic distance and the
//! small-range radius `r_N = min(i_N, pi / (2 sqrt K))`.

mod geodesic;
mod surface;

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector3, Vector4};
use thiserror::Error;

/// A point of R^3, or a tangent/normal vector attached to one.
pub type AmbientVector = Vector3<f64>;

/// Tolerance for deciding that a vector is tangent, relative to its length.
const TANGENCY_TOLERANCE: f64 = 1e-8;
const NEWTON_TOLERANCE: f64 = 1e-12;
const NEWTON_MAX_ITERATIONS: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(
        "point at distance {distance:e} from the manifold lies outside the tubular neighborhood of width {width:e}"
    )]
    OutsideTubularNeighborhood { distance: f64, width: f64 },
    #[error("point has on-manifold defect {defect:e}, above tolerance {tolerance:e}")]
    PointNotOnManifold { defect: f64, tolerance: f64 },
    #[error("input vector has normal component {normal_component:e}")]
    NonTangentInput { normal_component: f64 },
    #[error("geodesic distance not computable: {0}")]
    DistanceNotComputable(String),
    #[error("`{0}` is only implemented for sphere targets")]
    UnsupportedTarget(&'static str),
    #[error("nearest-point projection is undefined or did not converge at this point")]
    ProjectionUndefined,
    #[error("minimizing geodesic from the ball center is not unique")]
    AmbiguousGeodesic,
    #[error("invalid manifold parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ManifoldKind {
    Sphere { radius: f64 },
    Ellipsoid { semi_axes: [f64; 3] },
    Torus { major_radius: f64, minor_radius: f64 },
}

/// An embedded compact surface together with its curvature constants.
///
/// `curvature_bound` is an upper bound `K` of the sectional curvature;
/// `curvature_term_length = pi / (2 sqrt K)` is kept in length units so
/// that the unit sphere yields `pi / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetManifold {
    kind: ManifoldKind,
    injectivity_radius: f64,
    curvature_bound: f64,
    curvature_term_length: f64,
    projection_tolerance: f64,
}

pub const DEFAULT_PROJECTION_TOLERANCE: f64 = 1e-10;

fn positive(name: &str, value: f64) -> Result<f64, GeometryError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(GeometryError::InvalidParameter(format!("{name} must be positive and finite, got {value}")))
    }
}

fn curvature_term(bound: f64) -> f64 {
    if bound > 0.0 {
        PI / (2.0 * bound.sqrt())
    } else {
        f64::INFINITY
    }
}

impl TargetManifold {
    fn from_kind(kind: ManifoldKind, injectivity_radius: f64, curvature_bound: f64) -> Self {
        Self {
            kind,
            injectivity_radius,
            curvature_bound,
            curvature_term_length: curvature_term(curvature_bound),
            projection_tolerance: DEFAULT_PROJECTION_TOLERANCE,
        }
    }

    /// Round sphere of radius `R`: `i_N = pi R`, `K = 1 / R^2`.
    pub fn sphere(radius: f64) -> Result<Self, GeometryError> {
        let radius = positive("sphere radius", radius)?;
        Ok(Self::from_kind(ManifoldKind::Sphere { radius }, PI * radius, 1.0 / (radius * radius)))
    }

    /// Ellipsoid `x^2/a^2 + y^2/b^2 + z^2/c^2 = 1`.
    ///
    /// The Gaussian curvature peaks at the tips of the longest axis, where it
    /// equals `a_max^4 / (abc)^2`. The injectivity radius is not computed
    /// exactly; the conservative value `pi / sqrt(K)` is used.
    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self, GeometryError> {
        let a = positive("semi-axis a", a)?;
        let b = positive("semi-axis b", b)?;
        let c = positive("semi-axis c", c)?;
        let longest = a.max(b).max(c);
        let bound = longest.powi(4) / (a * b * c).powi(2);
        Ok(Self::from_kind(ManifoldKind::Ellipsoid { semi_axes: [a, b, c] }, PI / bound.sqrt(), bound))
    }

    /// Torus of revolution about the z axis with tube radius `minor < major`.
    ///
    /// `K = 1 / (r (R + r))` (outer equator). The injectivity radius is taken
    /// as half the shorter of the meridian and the inner equator.
    pub fn torus(major_radius: f64, minor_radius: f64) -> Result<Self, GeometryError> {
        let major_radius = positive("major radius", major_radius)?;
        let minor_radius = positive("minor radius", minor_radius)?;
        if minor_radius >= major_radius {
            return Err(GeometryError::InvalidParameter(format!(
                "minor radius {minor_radius} must be below major radius {major_radius}"
            )));
        }
        Ok(Self::from_kind(
            ManifoldKind::Torus { major_radius, minor_radius },
            PI * minor_radius.min(major_radius - minor_radius),
            1.0 / (minor_radius * (major_radius + minor_radius)),
        ))
    }

    pub fn unit_sphere() -> Self {
        Self::sphere(1.0).expect("unit radius is valid")
    }

    pub fn with_projection_tolerance(mut self, tolerance: f64) -> Result<Self, GeometryError> {
        self.projection_tolerance = positive("projection tolerance", tolerance)?;
        Ok(self)
    }

    /// Replace the curvature constants, e.g. with sharper bounds known for a
    /// particular target.
    pub fn with_constants(mut self, injectivity_radius: f64, curvature_bound: f64) -> Result<Self, GeometryError> {
        self.injectivity_radius = positive("injectivity radius", injectivity_radius)?;
        if !(curvature_bound.is_finite() && curvature_bound >= 0.0) {
            return Err(GeometryError::InvalidParameter(format!(
                "curvature bound must be finite and nonnegative, got {curvature_bound}"
            )));
        }
        self.curvature_bound = curvature_bound;
        self.curvature_term_length = curvature_term(curvature_bound);
        Ok(self)
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn ambient_dim(&self) -> usize {
        3
    }

    pub fn intrinsic_dim(&self) -> usize {
        2
    }

    pub fn injectivity_radius(&self) -> f64 {
        self.injectivity_radius
    }

    pub fn curvature_bound(&self) -> f64 {
        self.curvature_bound
    }

    pub fn curvature_term_length(&self) -> f64 {
        self.curvature_term_length
    }

    pub fn projection_tolerance(&self) -> f64 {
        self.projection_tolerance
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self.kind, ManifoldKind::Sphere { .. })
    }

    /// Width of the tubular neighborhood on which projection is accepted.
    pub fn tubular_width(&self) -> f64 {
        match self.kind {
            ManifoldKind::Sphere { radius } => 0.5 * radius,
            ManifoldKind::Ellipsoid { semi_axes: [a, b, c] } => 0.5 * a.min(b).min(c),
            ManifoldKind::Torus { minor_radius, .. } => 0.5 * minor_radius,
        }
    }

    /// `r_N = min(i_N, pi / (2 sqrt K))`.
    pub fn small_range_radius(&self) -> f64 {
        self.injectivity_radius.min(self.curvature_term_length)
    }

    /// First-order distance from `x` to the manifold.
    pub fn defect(&self, x: &AmbientVector) -> f64 {
        match self.kind {
            ManifoldKind::Sphere { radius } => (x.norm() - radius).abs(),
            _ => {
                let g = surface::level_gradient(&self.kind, x);
                surface::level(&self.kind, x).abs() / g.norm()
            }
        }
    }

    pub fn contains(&self, x: &AmbientVector) -> bool {
        self.defect(x) <= self.projection_tolerance
    }

    pub(crate) fn check_on_manifold(&self, y: &AmbientVector) -> Result<(), GeometryError> {
        let defect = self.defect(y);
        if defect <= self.projection_tolerance && defect.is_finite() {
            Ok(())
        } else {
            Err(GeometryError::PointNotOnManifold { defect, tolerance: self.projection_tolerance })
        }
    }

    /// Outward unit normal at a point of (or near) the manifold.
    pub fn unit_normal(&self, y: &AmbientVector) -> AmbientVector {
        surface::level_gradient(&self.kind, y).normalize()
    }

    /// Nearest point of the manifold to `x`, without the tubular-neighborhood
    /// restriction. Fails on the medial axis (e.g. the sphere's center).
    pub fn nearest_point(&self, x: &AmbientVector) -> Result<AmbientVector, GeometryError> {
        if !x.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::ProjectionUndefined);
        }
        match self.kind {
            ManifoldKind::Sphere { radius } => {
                let norm = x.norm();
                if norm <= 1e-12 * radius {
                    return Err(GeometryError::ProjectionUndefined);
                }
                Ok(x * (radius / norm))
            }
            _ => self.newton_projection(x),
        }
    }

    /// Nearest-point projection from the tubular neighborhood onto `N`.
    pub fn project_to_manifold(&self, x: &AmbientVector) -> Result<AmbientVector, GeometryError> {
        let width = self.tubular_width();
        if let ManifoldKind::Sphere { radius } = self.kind {
            let distance = (x.norm() - radius).abs();
            if distance.is_nan() || distance >= width {
                return Err(GeometryError::OutsideTubularNeighborhood { distance, width });
            }
        }
        let y = self.nearest_point(x)?;
        let distance = (x - y).norm();
        if distance < width {
            Ok(y)
        } else {
            Err(GeometryError::OutsideTubularNeighborhood { distance, width })
        }
    }

    /// Damped Newton on the Lagrange system `y - x + lambda grad F(y) = 0`,
    /// `F(y) = 0`, seeded from the closest parameter-grid sample.
    fn newton_projection(&self, x: &AmbientVector) -> Result<AmbientVector, GeometryError> {
        let kind = &self.kind;
        let residual = |y: &AmbientVector, lambda: f64| -> Vector4<f64> {
            let g = surface::level_gradient(kind, y);
            let r = y - x + g * lambda;
            Vector4::new(r.x, r.y, r.z, surface::level(kind, y))
        };
        let tolerance = NEWTON_TOLERANCE * x.norm().max(1.0);

        let mut y = surface::nearest_grid_point(kind, x);
        let g0 = surface::level_gradient(kind, &y);
        let mut lambda = (x - y).dot(&g0) / g0.norm_squared();
        let mut r = residual(&y, lambda);

        for _ in 0..NEWTON_MAX_ITERATIONS {
            if r.norm() <= tolerance {
                break;
            }
            let g = surface::level_gradient(kind, &y);
            let h = surface::level_hessian(kind, &y);
            let block = nalgebra::Matrix3::identity() + h * lambda;
            let mut jac = Matrix4::zeros();
            jac.fixed_view_mut::<3, 3>(0, 0).copy_from(&block);
            jac.fixed_view_mut::<3, 1>(0, 3).copy_from(&g);
            jac.fixed_view_mut::<1, 3>(3, 0).copy_from(&g.transpose());
            let step = match jac.lu().solve(&(-r)) {
                Some(step) => step,
                None => return Err(GeometryError::ProjectionUndefined),
            };
            let dy = step.fixed_rows::<3>(0).into_owned();
            let mut t = 1.0;
            loop {
                let y_try = y + dy * t;
                let lambda_try = lambda + step[3] * t;
                let r_try = residual(&y_try, lambda_try);
                if r_try.norm() <= (1.0 - 1e-4 * t) * r.norm() || t < 1e-6 {
                    y = y_try;
                    lambda = lambda_try;
                    r = r_try;
                    break;
                }
                t *= 0.5;
            }
        }
        if r.norm() <= 1e3 * tolerance {
            Ok(y)
        } else {
            Err(GeometryError::ProjectionUndefined)
        }
    }

    /// Orthogonal projection of `v` onto `T_y N`.
    pub fn tangent_project(&self, y: &AmbientVector, v: &AmbientVector) -> Result<AmbientVector, GeometryError> {
        self.check_on_manifold(y)?;
        Ok(self.tangent_part(y, v))
    }

    pub(crate) fn tangent_part(&self, y: &AmbientVector, v: &AmbientVector) -> AmbientVector {
        let n = self.unit_normal(y);
        v - n * n.dot(v)
    }

    /// An orthonormal basis of `T_y N`.
    pub fn tangent_basis(&self, y: &AmbientVector) -> [AmbientVector; 2] {
        let n = self.unit_normal(y);
        let axis = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
            Vector3::x()
        } else if n.y.abs() <= n.z.abs() {
            Vector3::y()
        } else {
            Vector3::z()
        };
        let e1 = (axis - n * n.dot(&axis)).normalize();
        let e2 = n.cross(&e1);
        [e1, e2]
    }

    /// `A(y)(Y, Z) = -(Y^T Hess F Z) / |grad F| * nu`, a normal vector at `y`.
    pub fn second_fundamental_form(
        &self,
        y: &AmbientVector,
        tangent_y: &AmbientVector,
        tangent_z: &AmbientVector,
    ) -> Result<AmbientVector, GeometryError> {
        self.check_on_manifold(y)?;
        let n = self.unit_normal(y);
        for v in [tangent_y, tangent_z] {
            let normal_component = n.dot(v);
            if normal_component.abs() > TANGENCY_TOLERANCE * v.norm().max(1.0) {
                return Err(GeometryError::NonTangentInput { normal_component });
            }
        }
        Ok(self.sff_unchecked(y, tangent_y, tangent_z))
    }

    pub(crate) fn sff_unchecked(
        &self,
        y: &AmbientVector,
        tangent_y: &AmbientVector,
        tangent_z: &AmbientVector,
    ) -> AmbientVector {
        match self.kind {
            ManifoldKind::Sphere { radius } => y * (-tangent_y.dot(tangent_z) / (radius * radius)),
            _ => {
                let g = surface::level_gradient(&self.kind, y);
                let h = surface::level_hessian(&self.kind, y);
                let form = tangent_y.dot(&(h * tangent_z));
                g * (-form / g.norm_squared())
            }
        }
    }

    /// Intrinsic distance on `N`. Closed form on the sphere; geodesic shooting
    /// elsewhere, restricted to pairs closer than the tubular width.
    pub fn geodesic_distance(&self, y: &AmbientVector, z: &AmbientVector) -> Result<f64, GeometryError> {
        self.check_on_manifold(y)?;
        self.check_on_manifold(z)?;
        match self.kind {
            ManifoldKind::Sphere { radius } => Ok(radius * y.cross(z).norm().atan2(y.dot(z))),
            _ => geodesic::shooting_distance(self, y, z),
        }
    }

    /// Sphere exponential map `exp_p(v)` for `v ∈ T_p N`.
    pub fn exp_map(&self, base: &AmbientVector, v: &AmbientVector) -> Result<AmbientVector, GeometryError> {
        let ManifoldKind::Sphere { radius } = self.kind else {
            return Err(GeometryError::UnsupportedTarget("exp_map"));
        };
        self.check_on_manifold(base)?;
        let len = v.norm();
        if len == 0.0 {
            return Ok(*base);
        }
        let angle = len / radius;
        Ok(base * angle.cos() + v * (radius * angle.sin() / len))
    }

    /// Closest point of the closed geodesic ball to `y`: the identity inside
    /// the ball, otherwise the point at arc length `radius` on the great
    /// circle from the center toward `y`.
    pub fn project_to_geodesic_ball(
        &self,
        ball: &GeodesicBall,
        y: &AmbientVector,
    ) -> Result<AmbientVector, GeometryError> {
        let ManifoldKind::Sphere { radius: big_r } = self.kind else {
            return Err(GeometryError::UnsupportedTarget("project_to_geodesic_ball"));
        };
        self.check_on_manifold(y)?;
        let center = ball.center;
        let distance = self.geodesic_distance(&center, y)?;
        if distance <= ball.radius {
            return Ok(*y);
        }
        let w = y - center * (y.dot(&center) / (big_r * big_r));
        let w_norm = w.norm();
        if w_norm <= 1e-14 * big_r {
            return Err(GeometryError::AmbiguousGeodesic);
        }
        let angle = ball.radius / big_r;
        Ok(center * angle.cos() + w * (big_r * angle.sin() / w_norm))
    }

    /// Surface point at parameters `(u, v)`.
    pub fn point_at(&self, u: f64, v: f64) -> AmbientVector {
        surface::point_at(&self.kind, u, v)
    }

    /// Range of the second surface parameter, `[0, v_extent]`.
    pub fn v_extent(&self) -> f64 {
        surface::v_extent(&self.kind)
    }
}

/// Closed geodesic ball `B(P0, r)` of the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicBall {
    pub center: AmbientVector,
    pub radius: f64,
}

impl GeodesicBall {
    pub fn new(target: &TargetManifold, center: AmbientVector, radius: f64) -> Result<Self, GeometryError> {
        target.check_on_manifold(&center)?;
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(GeometryError::InvalidParameter(format!(
                "ball radius must be finite and nonnegative, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, target: &TargetManifold, y: &AmbientVector, slack: f64) -> bool {
        target.geodesic_distance(&self.center, y).map(|d| d <= self.radius + slack).unwrap_or(false)
    }
}
