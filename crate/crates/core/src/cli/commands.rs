//! The five commands.

use std::path::Path;

use super::config::{field_error, Command, RunConfig};
use super::report::{oracle_row, write_rows, write_trace, TidyReport, ORACLE_HEADER};
use super::setup::{build_target, point_on_target, scenario, Scenario};
use super::{io_error, CliError, Outcome};
use crate::energy::gradient_continuity;
use crate::io::{self, fmt_real};
use crate::oracles::{check_sff_inequality, estimate_sff_constant, stability_check, sweep_vector_inequalities};
use crate::solver::{run_experiment, uniqueness_experiment, ExperimentReport, InitMode, TrialInit};

pub fn execute(command: Command, config: &RunConfig, base: &Path, outdir: &Path) -> Result<Outcome, CliError> {
    match command {
        Command::Solve => solve(config, base, outdir),
        Command::Uniqueness => uniqueness(config, base, outdir),
        Command::NonuniquenessDemo => nonuniqueness(config, base, outdir),
        Command::Oracles => oracles(config, outdir),
        Command::Sweep => sweep(config, base, outdir),
    }
}

fn mode_name(mode: InitMode) -> &'static str {
    match mode {
        InitMode::HarmonicExtension => "harmonic_extension",
        InitMode::RandomInBall => "random_in_ball",
        InitMode::Constant(_) => "constant",
    }
}

fn write_mesh(s: &Scenario, outdir: &Path) -> Result<(), CliError> {
    let path = outdir.join("mesh.txt");
    io::write_mesh(&path, &s.mesh).map_err(io_error(&path))
}

/// Maps, traces, timing and the per-trial and experiment rows of the report.
fn write_experiment(
    s: &Scenario,
    exp: &ExperimentReport,
    outdir: &Path,
    report: &mut TidyReport,
) -> Result<(), CliError> {
    let mut timing = Vec::new();
    for (i, t) in exp.trials.iter().enumerate() {
        let r = &t.result;
        let path = outdir.join(format!("map_trial_{i}.txt"));
        io::write_map(&path, &r.map).map_err(io_error(&path))?;
        if s.solver.record_trace {
            write_trace(&outdir.join(format!("trace_trial_{i}.csv")), &r.trace)?;
        }
        timing.push(vec![i.to_string(), fmt_real(t.wall_clock.as_secs_f64())]);

        let scope = format!("trial_{i}");
        report.text(&scope, "init", mode_name(t.init.mode));
        report.text(&scope, "seed", t.init.seed);
        report.text(&scope, "converged", r.converged);
        report.text(&scope, "termination", r.termination.as_str());
        report.text(&scope, "iterations", r.iterations);
        report.real(&scope, "eps_final", r.eps_final);
        report.real(&scope, "p_energy", r.report.p_energy);
        report.real(&scope, "riemannian_gradient_norm", r.report.riemannian_gradient_norm);
        report.real(&scope, "el_residual_norm", r.report.el_residual_norm);
        report.real(&scope, "max_triangle_gradient", r.report.max_triangle_gradient);
        report.real(&scope, "range_radius", r.report.range_radius);
        report.text(&scope, "constraint_active_count", r.constraint_active_count);
        let jumps = gradient_continuity(&s.mesh, &r.map);
        report.real(&scope, "gradient_jump_max", jumps.max_jump);
        report.real(&scope, "gradient_jump_mean", jumps.mean_jump);
    }
    write_rows(&outdir.join("timing.csv"), &["trial", "wall_clock_seconds"], &timing)?;

    report.text("experiment", "trials", exp.trials.len());
    report.text("experiment", "converged_trials", exp.converged_trials);
    report.real("experiment", "max_pairwise_sup_distance", exp.max_pairwise_sup_distance);
    report.real("experiment", "energy_spread", exp.energy_spread);
    for i in 0..exp.trials.len() {
        for j in i + 1..exp.trials.len() {
            report.real(&format!("pair_{i}_{j}"), "sup_distance", exp.distances[i][j]);
        }
    }
    Ok(())
}

fn stability_rows(
    s: &Scenario,
    config: &RunConfig,
    exp: &ExperimentReport,
    report: &mut TidyReport,
) -> Result<(), CliError> {
    let trials = config.experiment.stability_trials.unwrap_or(0);
    let (Some(ball), true) = (s.solver.ball.as_ref(), trials > 0) else {
        return Ok(());
    };
    let seed = config.experiment.stability_seed.unwrap_or(0);
    for (i, t) in exp.trials.iter().enumerate().filter(|(_, t)| t.result.converged) {
        let st = stability_check(&s.mesh, &t.result.map, &ball.center, None, s.solver.p, trials, seed)?;
        let scope = format!("trial_{i}");
        report.real(&scope, "stability_radius", st.radius);
        if let Some(w) = st.worst() {
            report.real(&scope, "stability_worst_margin", w.margin);
        }
        report.real(&scope, "stability_max_ratio", st.max_ratio());
    }
    Ok(())
}

fn all_converged(exp: &ExperimentReport) -> bool {
    exp.converged_trials == exp.trials.len()
}

fn solve(config: &RunConfig, base: &Path, outdir: &Path) -> Result<Outcome, CliError> {
    let s = scenario(config, base)?;
    write_mesh(&s, outdir)?;
    let mode = super::setup::init_mode(config, &s.target)?;
    let init = TrialInit { mode, seed: s.solver.seed };
    let exp = run_experiment(&s.mesh, &s.boundary, &s.target, &s.solver, &[init])?;
    let mut report = TidyReport::default();
    write_experiment(&s, &exp, outdir, &mut report)?;
    report.write(&outdir.join("report.csv"))?;
    let r = &exp.trials[0].result;
    Ok(Outcome {
        summary: format!(
            "solve: {} after {} iterations, energy {}",
            r.termination.as_str(),
            r.iterations,
            fmt_real(r.report.p_energy)
        ),
        all_converged: r.converged,
    })
}

fn uniqueness(config: &RunConfig, base: &Path, outdir: &Path) -> Result<Outcome, CliError> {
    let s = scenario(config, base)?;
    if s.solver.ball.is_none() {
        return Err(field_error("solver.ball", "the uniqueness experiment needs a ball constraint").into());
    }
    write_mesh(&s, outdir)?;
    let e = &config.experiment;
    let trials = e.trials.unwrap_or(10);
    let exp = uniqueness_experiment(&s.mesh, &s.boundary, &s.target, &s.solver, trials)?;
    let mut report = TidyReport::default();
    write_experiment(&s, &exp, outdir, &mut report)?;
    stability_rows(&s, config, &exp, &mut report)?;
    let dist_tol = e.distance_threshold.unwrap_or(1e-5);
    let energy_tol = e.energy_threshold.unwrap_or(1e-8);
    let unique = all_converged(&exp) && exp.max_pairwise_sup_distance <= dist_tol && exp.energy_spread <= energy_tol;
    report.real("experiment", "distance_threshold", dist_tol);
    report.real("experiment", "energy_threshold", energy_tol);
    report.text("experiment", "unique", unique);
    report.write(&outdir.join("report.csv"))?;
    Ok(Outcome {
        summary: format!(
            "uniqueness: {}/{} converged, max pairwise distance {}, energy spread {}, unique = {unique}",
            exp.converged_trials,
            exp.trials.len(),
            fmt_real(exp.max_pairwise_sup_distance),
            fmt_real(exp.energy_spread)
        ),
        all_converged: all_converged(&exp),
    })
}

fn nonuniqueness(config: &RunConfig, base: &Path, outdir: &Path) -> Result<Outcome, CliError> {
    let s = scenario(config, base)?;
    write_mesh(&s, outdir)?;
    let e = &config.experiment;
    let points = e.init_points.clone().unwrap_or_default();
    if points.len() < 2 {
        return Err(field_error("experiment.init_points", "need at least two starting points").into());
    }
    let inits = points
        .iter()
        .map(|&p| {
            let y = point_on_target(&s.target, p, "experiment.init_points")?;
            Ok(TrialInit { mode: InitMode::Constant(y), seed: s.solver.seed })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let exp = run_experiment(&s.mesh, &s.boundary, &s.target, &s.solver, &inits)?;
    let mut report = TidyReport::default();
    write_experiment(&s, &exp, outdir, &mut report)?;
    let separation = e.separation_threshold.unwrap_or(1.0);
    let distinct = all_converged(&exp) && exp.max_pairwise_sup_distance >= separation;
    report.real("experiment", "separation_threshold", separation);
    report.text("experiment", "distinct_solutions", distinct);
    report.write(&outdir.join("report.csv"))?;
    Ok(Outcome {
        summary: format!(
            "nonuniqueness-demo: {}/{} converged, max pairwise distance {}, energy spread {}, distinct = {distinct}",
            exp.converged_trials,
            exp.trials.len(),
            fmt_real(exp.max_pairwise_sup_distance),
            fmt_real(exp.energy_spread)
        ),
        all_converged: all_converged(&exp),
    })
}

fn oracles(config: &RunConfig, outdir: &Path) -> Result<Outcome, CliError> {
    let o = &config.oracles;
    let samples = o.samples.unwrap_or(100_000);
    let dims = o.dims.clone().unwrap_or_default();
    let exponents = o.exponents.clone().unwrap_or_default();
    if dims.contains(&0) {
        return Err(field_error("oracles.dims", "dimensions must be positive").into());
    }
    if exponents.iter().any(|&q| !(q.is_finite() && q >= 0.0)) {
        return Err(field_error("oracles.exponents", "exponents must be finite and nonnegative").into());
    }
    let mut rows = Vec::new();
    let mut failures = 0;
    for cell in sweep_vector_inequalities(&dims, &exponents, samples, o.seed.unwrap_or(0)) {
        failures += cell.failures;
        let name = format!("{}_dim{}_q{}", cell.inequality.name(), cell.dim, cell.q);
        rows.push(oracle_row(&name, cell.samples, &cell.worst));
    }

    let target = build_target(&config.manifold)?;
    let sff_samples = o.sff_samples.unwrap_or(100_000);
    let estimate_seed = o.sff_estimate_seed.unwrap_or(1);
    let c = estimate_sff_constant(&target, sff_samples, estimate_seed)?;
    rows.push(vec![
        "sff_constant_estimate".into(),
        estimate_seed.to_string(),
        sff_samples.to_string(),
        String::new(),
        fmt_real(c),
        String::new(),
        String::new(),
    ]);
    let worst = check_sff_inequality(&target, c, sff_samples, o.sff_check_seed.unwrap_or(2))?;
    if worst.margin < 0.0 {
        failures += 1;
    }
    rows.push(oracle_row("sff_inequality", sff_samples, &worst));
    let path = outdir.join("report.csv");
    write_rows(&path, &ORACLE_HEADER, &rows)?;
    Ok(Outcome {
        summary: format!("oracles: {} checks, {failures} violations, estimated constant {}", rows.len(), fmt_real(c)),
        all_converged: true,
    })
}

fn sweep(config: &RunConfig, base: &Path, outdir: &Path) -> Result<Outcome, CliError> {
    let sw = &config.sweep;
    let trials = sw.trials.unwrap_or(4);
    let tol = config.experiment.distance_threshold.unwrap_or(1e-5);
    let mut rows = Vec::new();
    let mut converged = true;
    let mut mesh_written = false;
    for &p in sw.p_values.as_deref().unwrap_or_default() {
        for &rho in sw.cap_radii.as_deref().unwrap_or_default() {
            let mut c = config.clone();
            c.boundary.generator = Some("polar_cap".into());
            c.boundary.radius = Some(rho);
            if let Some(solver) = &mut c.solver {
                solver.p = p;
                solver.trace = Some(false);
            }
            let s = scenario(&c, base)?;
            if s.solver.ball.is_none() {
                return Err(field_error("solver.ball", "the sweep needs a ball constraint").into());
            }
            if !mesh_written {
                write_mesh(&s, outdir)?;
                mesh_written = true;
            }
            let exp = uniqueness_experiment(&s.mesh, &s.boundary, &s.target, &s.solver, trials)?;
            converged &= all_converged(&exp);
            let max_range = exp.trials.iter().map(|t| t.result.report.range_radius).fold(0.0, f64::max);
            let max_active = exp.trials.iter().map(|t| t.result.constraint_active_count).max().unwrap_or(0);
            rows.push(vec![
                fmt_real(p),
                fmt_real(rho),
                fmt_real(s.solver.ball.as_ref().map_or(0.0, |b| b.radius)),
                exp.trials.len().to_string(),
                exp.converged_trials.to_string(),
                fmt_real(exp.max_pairwise_sup_distance),
                fmt_real(exp.energy_spread),
                fmt_real(max_range),
                max_active.to_string(),
                (all_converged(&exp) && exp.max_pairwise_sup_distance <= tol).to_string(),
            ]);
        }
    }
    write_rows(
        &outdir.join("report.csv"),
        &[
            "p",
            "cap_radius",
            "ball_radius",
            "trials",
            "converged_trials",
            "max_pairwise_sup_distance",
            "energy_spread",
            "max_range_radius",
            "max_constraint_active",
            "unique",
        ],
        &rows,
    )?;
    Ok(Outcome { summary: format!("sweep: {} cells", rows.len()), all_converged: converged })
}
