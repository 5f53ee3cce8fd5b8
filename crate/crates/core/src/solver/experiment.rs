//! Repeated solves from different starting maps.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::{initialize_map, solve, InitMode, SolveResult, SolverConfig, SolverError};
use crate::boundary::BoundaryData;
use crate::geometry::TargetManifold;
use crate::mesh::DomainMesh;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialInit {
    pub mode: InitMode,
    /// Seed for `RandomInBall`; replaces `config.seed` for this trial.
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct TrialSummary {
    pub init: TrialInit,
    pub result: SolveResult,
    pub wall_clock: Duration,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub trials: Vec<TrialSummary>,
    /// Symmetric matrix of sup vertex distances between trial maps.
    pub distances: Vec<Vec<f64>>,
    /// Over converged trials only.
    pub max_pairwise_sup_distance: f64,
    pub energy_spread: f64,
    pub converged_trials: usize,
}

/// Sup-over-vertices ambient distance between every pair of results.
pub fn pairwise_sup_distances(results: &[&SolveResult]) -> Vec<Vec<f64>> {
    let n = results.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = results[i].map.sup_distance(&results[j].map);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

/// Solve once per entry of `inits`, concurrently; results keep input order.
pub fn run_experiment(
    mesh: &DomainMesh,
    boundary: &BoundaryData,
    target: &TargetManifold,
    config: &SolverConfig,
    inits: &[TrialInit],
) -> Result<ExperimentReport, SolverError> {
    let trials = inits
        .par_iter()
        .map(|&init| {
            let start = Instant::now();
            let trial_config = SolverConfig { seed: init.seed, ..config.clone() };
            let u0 = initialize_map(mesh, boundary, target, &trial_config, init.mode)?;
            let result = solve(mesh, boundary, target, &trial_config, u0)?;
            Ok(TrialSummary { init, result, wall_clock: start.elapsed() })
        })
        .collect::<Result<Vec<_>, SolverError>>()?;

    let results: Vec<&SolveResult> = trials.iter().map(|t| &t.result).collect();
    let distances = pairwise_sup_distances(&results);
    let converged: Vec<usize> = (0..trials.len()).filter(|&i| results[i].converged).collect();
    let mut max_distance = 0.0f64;
    for (a, &i) in converged.iter().enumerate() {
        for &j in &converged[a + 1..] {
            max_distance = max_distance.max(distances[i][j]);
        }
    }
    let energies = converged.iter().map(|&i| results[i].report.p_energy);
    let (lo, hi) = energies.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e), hi.max(e)));
    Ok(ExperimentReport {
        max_pairwise_sup_distance: max_distance,
        energy_spread: if converged.is_empty() { 0.0 } else { hi - lo },
        converged_trials: converged.len(),
        distances,
        trials,
    })
}

/// `trials` random starts in the ball (seeds `config.seed + k`) followed by
/// one harmonic-extension start.
pub fn uniqueness_experiment(
    mesh: &DomainMesh,
    boundary: &BoundaryData,
    target: &TargetManifold,
    config: &SolverConfig,
    trials: usize,
) -> Result<ExperimentReport, SolverError> {
    if config.ball.is_none() {
        return Err(SolverError::MissingBall);
    }
    if trials < 2 {
        return Err(SolverError::InvalidConfig(format!("need at least 2 trials, got {trials}")));
    }
    let mut inits: Vec<TrialInit> = (0..trials as u64)
        .map(|k| TrialInit { mode: InitMode::RandomInBall, seed: config.seed.wrapping_add(k) })
        .collect();
    inits.push(TrialInit { mode: InitMode::HarmonicExtension, seed: config.seed });
    run_experiment(mesh, boundary, target, config, &inits)
}
