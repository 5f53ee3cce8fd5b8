//! Projected descent for the Dirichlet problem with an optional
//! geodesic-ball range constraint.
//!
//! Each iteration moves interior vertices against the Riemannian gradient,
//! retracts onto `N` by nearest-point projection and then onto the closed
//! ball, and backtracks until the Armijo condition holds on the regularized
//! energy. The regularization `eps` runs through a decreasing schedule.

mod experiment;
mod init;

use thiserror::Error;

use crate::boundary::BoundaryData;
use crate::energy::{
    self, check_eps, check_exponent, energy_difference_unchecked, energy_unchecked, normalized_gradient_norm,
    riemannian_gradient_unchecked, EnergyError, EnergyReport, ManifoldMap,
};
use crate::geometry::{AmbientVector, GeodesicBall, GeometryError, TargetManifold};
use crate::mesh::DomainMesh;
use crate::summation::compensated_sum;

pub use experiment::{
    pairwise_sup_distances, run_experiment, uniqueness_experiment, ExperimentReport, TrialInit, TrialSummary,
};
pub use init::{initialize_map, linear_harmonic_extension, InitMode};

/// Steps below this length end the line search.
pub const MIN_STEP: f64 = 1e-14;
/// Slack allowed on membership checks of the ball after retraction.
const BALL_SLACK: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("infeasible boundary data: {0}")]
    InfeasibleBoundary(String),
    #[error("infeasible initial map: {0}")]
    InfeasibleInit(String),
    #[error("random_in_ball initialization needs a ball constraint")]
    MissingBall,
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmijoParams {
    pub initial_step: f64,
    pub shrink: f64,
    pub slope: f64,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        Self { initial_step: 1.0, shrink: 0.5, slope: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub p: f64,
    pub ball: Option<GeodesicBall>,
    pub eps_schedule: Vec<f64>,
    pub grad_tolerance: f64,
    /// Total iteration budget across all stages of the schedule.
    pub max_iterations: usize,
    pub armijo: ArmijoParams,
    pub seed: u64,
    pub record_trace: bool,
}

impl SolverConfig {
    pub const DEFAULT_EPS_SCHEDULE: [f64; 4] = [1e-1, 1e-2, 1e-3, 0.0];
    pub const DEFAULT_GRAD_TOLERANCE: f64 = 1e-8;
    pub const DEFAULT_MAX_ITERATIONS: usize = 20_000;

    pub fn new(p: f64) -> Self {
        Self {
            p,
            ball: None,
            eps_schedule: Self::DEFAULT_EPS_SCHEDULE.to_vec(),
            grad_tolerance: Self::DEFAULT_GRAD_TOLERANCE,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            armijo: ArmijoParams::default(),
            seed: 0,
            record_trace: false,
        }
    }

    pub fn with_ball(mut self, ball: GeodesicBall) -> Self {
        self.ball = Some(ball);
        self
    }

    pub fn validate(&self, target: &TargetManifold) -> Result<(), SolverError> {
        let invalid = |m: String| Err(SolverError::InvalidConfig(m));
        check_exponent(self.p)?;
        if self.eps_schedule.is_empty() {
            return invalid("eps_schedule must not be empty".into());
        }
        for &eps in &self.eps_schedule {
            check_eps(eps)?;
        }
        if self.eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
            return invalid("eps_schedule must be strictly decreasing".into());
        }
        if !(self.grad_tolerance.is_finite() && self.grad_tolerance > 0.0) {
            return invalid(format!("grad_tolerance must be positive, got {}", self.grad_tolerance));
        }
        let a = &self.armijo;
        if !(a.initial_step.is_finite() && a.initial_step > 0.0) {
            return invalid(format!("armijo.initial_step must be positive, got {}", a.initial_step));
        }
        if !(a.shrink > 0.0 && a.shrink < 1.0) {
            return invalid(format!("armijo.shrink must lie in (0, 1), got {}", a.shrink));
        }
        if !(a.slope > 0.0 && a.slope < 1.0) {
            return invalid(format!("armijo.slope must lie in (0, 1), got {}", a.slope));
        }
        if let Some(ball) = &self.ball {
            if !target.is_sphere() {
                return Err(GeometryError::UnsupportedTarget("ball constraint").into());
            }
            target.check_on_manifold(&ball.center)?;
            let r_n = target.small_range_radius();
            if !(ball.radius > 0.0 && ball.radius < r_n) {
                return invalid(format!("ball radius {} must lie in (0, {r_n}), the small-range radius", ball.radius));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    LineSearchStalled,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iterations",
            Termination::LineSearchStalled => "line_search_stalled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub eps: f64,
    pub energy: f64,
    pub grad_norm: f64,
    /// Accepted step length; zero on the row that ends a stage.
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub map: ManifoldMap,
    pub report: EnergyReport,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    pub eps_final: f64,
    /// Interior vertices moved by the ball projection on the last accepted step.
    pub constraint_active_count: usize,
    pub trace: Vec<TraceRow>,
}

/// One accepted descent step, as seen by [`solve_observed`].
#[derive(Debug)]
pub struct StepEvent<'a> {
    pub iteration: usize,
    pub eps: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    pub step: f64,
    pub map: &'a ManifoldMap,
}

pub fn solve(
    mesh: &DomainMesh,
    boundary: &BoundaryData,
    target: &TargetManifold,
    config: &SolverConfig,
    init: ManifoldMap,
) -> Result<SolveResult, SolverError> {
    solve_observed(mesh, boundary, target, config, init, |_| {})
}

fn check_init(
    mesh: &DomainMesh,
    boundary: &BoundaryData,
    target: &TargetManifold,
    config: &SolverConfig,
    init: &ManifoldMap,
) -> Result<(), SolverError> {
    boundary
        .validate(mesh, target, config.ball.as_ref())
        .map_err(|e| SolverError::InfeasibleBoundary(e.to_string()))?;
    init.validate(mesh, target).map_err(|e| SolverError::InfeasibleInit(e.to_string()))?;
    for (&b, y) in &boundary.values {
        if init.values[b] != *y {
            return Err(SolverError::InfeasibleInit(format!("boundary vertex {b} differs from the boundary data")));
        }
    }
    if let Some(ball) = &config.ball {
        if let Some(i) = mesh.interior_vertices().find(|&i| !ball.contains(target, &init.values[i], BALL_SLACK)) {
            return Err(SolverError::InfeasibleInit(format!("vertex {i} lies outside the ball")));
        }
    }
    Ok(())
}

struct Candidate {
    values: Vec<AmbientVector>,
    active: usize,
}

fn retract(
    mesh: &DomainMesh,
    target: &TargetManifold,
    ball: Option<&GeodesicBall>,
    values: &[AmbientVector],
    grad: &[AmbientVector],
    tau: f64,
) -> Option<Candidate> {
    let mut next = values.to_vec();
    let mut active = 0;
    for i in mesh.interior_vertices() {
        let y = target.project_to_manifold(&(values[i] - grad[i] * tau)).ok()?;
        next[i] = match ball {
            Some(ball) => {
                let z = target.project_to_geodesic_ball(ball, &y).ok()?;
                if z != y {
                    active += 1;
                }
                z
            }
            None => y,
        };
    }
    Some(Candidate { values: next, active })
}

/// [`solve`], calling `observer` after every accepted step.
pub fn solve_observed(
    mesh: &DomainMesh,
    boundary: &BoundaryData,
    target: &TargetManifold,
    config: &SolverConfig,
    init: ManifoldMap,
    mut observer: impl FnMut(&StepEvent<'_>),
) -> Result<SolveResult, SolverError> {
    config.validate(target)?;
    check_init(mesh, boundary, target, config, &init)?;
    let p = config.p;
    let ball = config.ball.as_ref();
    let armijo = config.armijo;
    let last_stage = config.eps_schedule.len() - 1;

    let mut map = init;
    let mut iterations = 0;
    let mut trace = Vec::new();
    let mut active = 0;
    let mut termination = Termination::MaxIterations;
    let mut eps_final = config.eps_schedule[0];

    'stages: for (stage, &eps) in config.eps_schedule.iter().enumerate() {
        eps_final = eps;
        let tolerance = if stage == last_stage { config.grad_tolerance } else { config.grad_tolerance.max(1e-2 * eps) };
        let mut energy = energy_unchecked(mesh, &map.values, p, eps);
        loop {
            let grad = riemannian_gradient_unchecked(mesh, target, &map.values, p, eps);
            let grad_norm = normalized_gradient_norm(mesh, &grad);
            if grad_norm <= tolerance {
                if config.record_trace {
                    trace.push(TraceRow { iteration: iterations, eps, energy, grad_norm, step: 0.0 });
                }
                if stage == last_stage {
                    termination = Termination::Converged;
                }
                continue 'stages;
            }
            if iterations >= config.max_iterations {
                termination = Termination::MaxIterations;
                break 'stages;
            }

            let mut tau = armijo.initial_step;
            let accepted = loop {
                if tau < MIN_STEP {
                    break None;
                }
                if let Some(c) = retract(mesh, target, ball, &map.values, &grad, tau) {
                    let moved = compensated_sum(c.values.iter().zip(&map.values).map(|(a, b)| (a - b).norm_squared()));
                    let change = energy_difference_unchecked(mesh, &map.values, &c.values, p, eps);
                    if moved > 0.0 && change <= -armijo.slope * moved / tau {
                        break Some((c, energy + change));
                    }
                }
                tau *= armijo.shrink;
            };
            let Some((candidate, next_energy)) = accepted else {
                termination = Termination::LineSearchStalled;
                break 'stages;
            };

            iterations += 1;
            active = candidate.active;
            map.values = candidate.values;
            if config.record_trace {
                trace.push(TraceRow { iteration: iterations, eps, energy, grad_norm, step: tau });
            }
            observer(&StepEvent {
                iteration: iterations,
                eps,
                energy_before: energy,
                energy_after: next_energy,
                step: tau,
                map: &map,
            });
            energy = next_energy;
        }
    }

    let report = energy::energy_report(mesh, target, &map, p, eps_final, ball)?;
    Ok(SolveResult {
        map,
        report,
        iterations,
        converged: termination == Termination::Converged,
        termination,
        eps_final,
        constraint_active_count: active,
        trace,
    })
}
