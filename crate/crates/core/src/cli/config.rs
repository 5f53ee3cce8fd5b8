//! Run configuration: a TOML file with named sections.
//!
//! ```toml
//! command = "uniqueness"            # optional; the CLI command wins
//! output_dir = "runs/cap"           # optional; --outdir wins
//!
//! [manifold]
//! kind = "sphere"                   # sphere | ellipsoid | torus
//! radius = 1.0                      # sphere
//! # semi_axes = [2.0, 1.0, 1.0]     # ellipsoid
//! # major_radius = 1.0              # torus
//! # minor_radius = 0.4
//!
//! [mesh]
//! builder = "disk"                  # disk | square | file
//! refinement = 4                    # disk
//! # n = 16                          # square: vertices per side
//! # path = "mesh.txt"               # file
//!
//! [boundary]
//! generator = "polar_cap"           # polar_cap | equator | custom
//! radius = 0.3                      # polar_cap
//! center = [0.0, 0.0, 1.0]
//! # path = "boundary_map.txt"       # custom: a map file
//!
//! [solver]
//! p = 3.0                           # required
//! eps_schedule = [0.1, 0.01, 0.001, 0.0]
//! grad_tolerance = 1e-8
//! max_iterations = 20000
//! seed = 0
//! trace = true
//! [solver.armijo]
//! initial_step = 1.0
//! shrink = 0.5
//! slope = 1e-4
//! [solver.ball]                     # presence enables the constraint
//! center = [0.0, 0.0, 1.0]          # default: boundary center
//! radius = 0.5                      # default: half the small-range radius
//!
//! [experiment]
//! init = "harmonic_extension"       # solve: harmonic_extension | random_in_ball | constant
//! # init_point = [0.0, 0.0, 1.0]    # for init = "constant"
//! trials = 10                       # uniqueness: random starts
//! init_points = [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]   # nonuniqueness-demo
//! distance_threshold = 1e-5
//! energy_threshold = 1e-8
//! separation_threshold = 1.0
//! stability_trials = 0
//! stability_seed = 0
//!
//! [oracles]
//! samples = 100000
//! seed = 0
//! dims = [1, 2, 3, 8]
//! exponents = [0.0, 0.5, 1.0, 2.0, 6.0]
//! sff_samples = 100000
//! sff_estimate_seed = 1
//! sff_check_seed = 2
//!
//! [sweep]
//! p_values = [2.0, 3.0, 4.0]
//! cap_radii = [0.1, 0.2, 0.3, 0.4]
//! trials = 4
//! ```
//!
//! The canonical form written next to every run is the TOML serialization
//! of the configuration with every default filled in.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracles::{SWEEP_DIMS, SWEEP_EXPONENTS};
use crate::solver::SolverConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("configuration field `{field}`: {message}")]
    Field { field: String, message: String },
}

pub(crate) fn field_error(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Uniqueness,
    NonuniquenessDemo,
    Oracles,
    Sweep,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Solve => "solve",
            Command::Uniqueness => "uniqueness",
            Command::NonuniquenessDemo => "nonuniqueness-demo",
            Command::Oracles => "oracles",
            Command::Sweep => "sweep",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub manifold: ManifoldSection,
    #[serde(default)]
    pub mesh: MeshSection,
    #[serde(default)]
    pub boundary: BoundarySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub oracles: OracleSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semi_axes: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub major_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minor_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builder: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_schedule: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub armijo: Option<ArmijoSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball: Option<BallSection>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmijoSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shrink: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_point: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_points: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability_trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sff_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sff_estimate_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sff_check_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

fn fill<T>(slot: &mut Option<T>, value: T) {
    if slot.is_none() {
        *slot = Some(value);
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_canonical_string(&self) -> String {
        toml::to_string(self).expect("configuration values are always representable")
    }

    /// A copy with `command` set and every default written out. Values
    /// that depend on the target (sphere radius, ball radius) are resolved
    /// too, so the canonical form fully determines the run.
    pub fn with_defaults(&self, command: Command) -> Self {
        let mut c = self.clone();
        c.command = Some(command);

        let m = &mut c.manifold;
        fill(&mut m.kind, "sphere".into());
        if m.kind.as_deref() == Some("sphere") {
            fill(&mut m.radius, 1.0);
        }
        let sphere_radius = m.radius.unwrap_or(1.0);

        let mesh = &mut c.mesh;
        fill(&mut mesh.builder, "disk".into());
        match mesh.builder.as_deref() {
            Some("disk") => fill(&mut mesh.refinement, 4),
            Some("square") => fill(&mut mesh.n, 16),
            _ => {}
        }

        let b = &mut c.boundary;
        let default_generator = if command == Command::NonuniquenessDemo { "equator" } else { "polar_cap" };
        fill(&mut b.generator, default_generator.into());
        match b.generator.as_deref() {
            Some("polar_cap") => {
                fill(&mut b.radius, 0.3);
                fill(&mut b.center, [0.0, 0.0, sphere_radius]);
            }
            Some("equator") => fill(&mut b.center, [0.0, 0.0, sphere_radius]),
            _ => {}
        }
        let boundary_center = b.center.unwrap_or([0.0, 0.0, sphere_radius]);

        if let Some(s) = &mut c.solver {
            fill(&mut s.eps_schedule, SolverConfig::DEFAULT_EPS_SCHEDULE.to_vec());
            fill(&mut s.grad_tolerance, SolverConfig::DEFAULT_GRAD_TOLERANCE);
            fill(&mut s.max_iterations, SolverConfig::DEFAULT_MAX_ITERATIONS);
            fill(&mut s.seed, 0);
            fill(&mut s.trace, true);
            let a = s.armijo.get_or_insert_with(Default::default);
            let defaults = crate::solver::ArmijoParams::default();
            fill(&mut a.initial_step, defaults.initial_step);
            fill(&mut a.shrink, defaults.shrink);
            fill(&mut a.slope, defaults.slope);
            if let Some(ball) = &mut s.ball {
                fill(&mut ball.center, boundary_center);
                if c.manifold.kind.as_deref() == Some("sphere") {
                    // Half of r_N = min(pi R, pi R / 2).
                    fill(&mut ball.radius, 0.25 * std::f64::consts::PI * sphere_radius);
                }
            }
        }

        let e = &mut c.experiment;
        fill(&mut e.init, "harmonic_extension".into());
        if e.init.as_deref() == Some("constant") {
            fill(&mut e.init_point, boundary_center);
        }
        fill(&mut e.trials, 10);
        let [x, y, z] = boundary_center;
        fill(&mut e.init_points, vec![[x, y, z], [0.0 - x, 0.0 - y, 0.0 - z]]);
        fill(&mut e.distance_threshold, 1e-5);
        fill(&mut e.energy_threshold, 1e-8);
        fill(&mut e.separation_threshold, 1.0);
        fill(&mut e.stability_trials, 0);
        fill(&mut e.stability_seed, 0);

        let o = &mut c.oracles;
        fill(&mut o.samples, 100_000);
        fill(&mut o.seed, 0);
        fill(&mut o.dims, SWEEP_DIMS.to_vec());
        fill(&mut o.exponents, SWEEP_EXPONENTS.to_vec());
        fill(&mut o.sff_samples, 100_000);
        fill(&mut o.sff_estimate_seed, 1);
        fill(&mut o.sff_check_seed, 2);

        let s = &mut c.sweep;
        fill(&mut s.p_values, vec![2.0, 3.0, 4.0]);
        fill(&mut s.cap_radii, vec![0.1, 0.2, 0.3, 0.4]);
        fill(&mut s.trials, 4);
        c
    }
}
