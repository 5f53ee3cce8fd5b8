//! Turning a configuration into meshes, targets, boundary data and solver
//! settings.

use std::path::Path;

use super::config::{field_error, BoundarySection, ManifoldSection, MeshSection, RunConfig};
use super::CliError;
use crate::boundary::{equator, polar_cap, BoundaryData, BoundaryError};
use crate::geometry::{AmbientVector, GeodesicBall, TargetManifold};
use crate::io;
use crate::mesh::{build_unit_disk_mesh, build_unit_square_grid, DomainMesh};
use crate::solver::{ArmijoParams, InitMode, SolverConfig};

fn required<T: Copy>(value: Option<T>, field: &str) -> Result<T, CliError> {
    value.ok_or_else(|| field_error(field, "missing").into())
}

pub fn build_target(m: &ManifoldSection) -> Result<TargetManifold, CliError> {
    let kind = m.kind.as_deref().unwrap_or("sphere");
    let target = match kind {
        "sphere" => TargetManifold::sphere(m.radius.unwrap_or(1.0)),
        "ellipsoid" => {
            let [a, b, c] = required(m.semi_axes, "manifold.semi_axes")?;
            TargetManifold::ellipsoid(a, b, c)
        }
        "torus" => TargetManifold::torus(
            required(m.major_radius, "manifold.major_radius")?,
            required(m.minor_radius, "manifold.minor_radius")?,
        ),
        other => return Err(field_error("manifold.kind", format!("unknown manifold `{other}`")).into()),
    };
    target.map_err(|e| field_error("manifold", e.to_string()).into())
}

pub fn build_mesh(m: &MeshSection, base: &Path) -> Result<DomainMesh, CliError> {
    match m.builder.as_deref().unwrap_or("disk") {
        "disk" => build_unit_disk_mesh(m.refinement.unwrap_or(4))
            .map_err(|e| field_error("mesh.refinement", e.to_string()).into()),
        "square" => build_unit_square_grid(m.n.unwrap_or(16)).map_err(|e| field_error("mesh.n", e.to_string()).into()),
        "file" => {
            let path = m.path.as_ref().ok_or_else(|| field_error("mesh.path", "missing"))?;
            Ok(io::read_mesh(&base.join(path))?)
        }
        other => Err(field_error("mesh.builder", format!("unknown builder `{other}`")).into()),
    }
}

pub fn point_on_target(target: &TargetManifold, p: [f64; 3], field: &str) -> Result<AmbientVector, CliError> {
    let y = AmbientVector::from(p);
    if !target.contains(&y) {
        return Err(field_error(field, format!("point {p:?} is not on the target manifold")).into());
    }
    Ok(y)
}

/// Boundary data from a named generator: `polar_cap`, `equator` or
/// `custom` (a map file whose boundary-vertex values are kept).
pub fn boundary_generator(
    name: &str,
    params: &BoundarySection,
    mesh: &DomainMesh,
    target: &TargetManifold,
    ball: Option<&GeodesicBall>,
    base: &Path,
) -> Result<BoundaryData, CliError> {
    let center = || -> Result<AmbientVector, CliError> {
        let default = target.point_at(0.0, 0.0);
        match params.center {
            Some(p) => point_on_target(target, p, "boundary.center"),
            None => Ok(default),
        }
    };
    match name {
        "polar_cap" => {
            let rho = required(params.radius, "boundary.radius")?;
            if ball.is_some() && rho >= target.small_range_radius() {
                return Err(BoundaryError::ParamOutOfRange(format!(
                    "cap radius {rho} must be below the small-range radius {}",
                    target.small_range_radius()
                ))
                .into());
            }
            Ok(polar_cap(mesh, target, &center()?, rho)?)
        }
        "equator" => Ok(equator(mesh, target, &center()?)?),
        "custom" => {
            let path = params.path.as_ref().ok_or_else(|| field_error("boundary.path", "missing"))?;
            let map = io::read_map(&base.join(path))?;
            if map.len() != mesh.num_vertices() {
                return Err(field_error(
                    "boundary.path",
                    format!("map has {} values for a mesh with {} vertices", map.len(), mesh.num_vertices()),
                )
                .into());
            }
            Ok(BoundaryData::from_map(mesh, &map)?)
        }
        other => Err(CliError::UnknownGenerator(other.to_string())),
    }
}

pub fn build_solver_config(config: &RunConfig, target: &TargetManifold) -> Result<SolverConfig, CliError> {
    let s = config
        .solver
        .as_ref()
        .ok_or_else(|| field_error("solver", "section [solver] with at least `p` is required"))?;
    let defaults = ArmijoParams::default();
    let armijo = s.armijo.clone().unwrap_or_default();
    let ball = match &s.ball {
        Some(b) => {
            let center = point_on_target(target, required(b.center, "solver.ball.center")?, "solver.ball.center")?;
            let radius = b.radius.unwrap_or(0.5 * target.small_range_radius());
            Some(GeodesicBall::new(target, center, radius).map_err(|e| field_error("solver.ball", e.to_string()))?)
        }
        None => None,
    };
    let solver = SolverConfig {
        p: s.p,
        ball,
        eps_schedule: s.eps_schedule.clone().unwrap_or_else(|| SolverConfig::DEFAULT_EPS_SCHEDULE.to_vec()),
        grad_tolerance: s.grad_tolerance.unwrap_or(SolverConfig::DEFAULT_GRAD_TOLERANCE),
        max_iterations: s.max_iterations.unwrap_or(SolverConfig::DEFAULT_MAX_ITERATIONS),
        armijo: ArmijoParams {
            initial_step: armijo.initial_step.unwrap_or(defaults.initial_step),
            shrink: armijo.shrink.unwrap_or(defaults.shrink),
            slope: armijo.slope.unwrap_or(defaults.slope),
        },
        seed: s.seed.unwrap_or(0),
        record_trace: s.trace.unwrap_or(true),
    };
    solver.validate(target).map_err(|e| field_error("solver", e.to_string()))?;
    Ok(solver)
}

pub fn init_mode(config: &RunConfig, target: &TargetManifold) -> Result<InitMode, CliError> {
    let e = &config.experiment;
    match e.init.as_deref().unwrap_or("harmonic_extension") {
        "harmonic_extension" => Ok(InitMode::HarmonicExtension),
        "random_in_ball" => Ok(InitMode::RandomInBall),
        "constant" => {
            let p = required(e.init_point, "experiment.init_point")?;
            Ok(InitMode::Constant(point_on_target(target, p, "experiment.init_point")?))
        }
        other => Err(field_error("experiment.init", format!("unknown init mode `{other}`")).into()),
    }
}

/// Everything a solve-type command needs.
pub struct Scenario {
    pub target: TargetManifold,
    pub mesh: DomainMesh,
    pub boundary: BoundaryData,
    pub solver: SolverConfig,
}

pub fn scenario(config: &RunConfig, base: &Path) -> Result<Scenario, CliError> {
    let target = build_target(&config.manifold)?;
    let mesh = build_mesh(&config.mesh, base)?;
    let solver = build_solver_config(config, &target)?;
    let generator = config.boundary.generator.as_deref().unwrap_or("polar_cap");
    let boundary = boundary_generator(generator, &config.boundary, &mesh, &target, solver.ball.as_ref(), base)?;
    boundary.validate(&mesh, &target, solver.ball.as_ref())?;
    Ok(Scenario { target, mesh, boundary, solver })
}
