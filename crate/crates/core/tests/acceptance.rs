//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use pharmap::boundary::{equator, polar_cap};
use pharmap::cli::{self, Args, Command};
use pharmap::energy::{energy_gradient, p_energy, ManifoldMap};
use pharmap::mesh::{build_unit_disk_mesh, build_unit_square_grid};
use pharmap::oracles::{
    check_sff_inequality, estimate_sff_constant, stability_check, sweep_vector_inequalities, SWEEP_DIMS,
    SWEEP_EXPONENTS,
};
use pharmap::solver::{run_experiment, uniqueness_experiment, ExperimentReport, InitMode, SolverConfig, TrialInit};
use pharmap::{AmbientVector, GeodesicBall, TargetManifold};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn north() -> AmbientVector {
    AmbientVector::z()
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let cells = sweep_vector_inequalities(&SWEEP_DIMS, &SWEEP_EXPONENTS, 100_000, 20_240_601);
    let elapsed = start.elapsed();
    let failures: usize = cells.iter().map(|c| c.failures).sum();
    let worst = cells.iter().map(|c| c.worst.relative_margin()).fold(f64::INFINITY, f64::min);
    verdict(
        failures == 0 && cells.len() == 40 && within(elapsed, 10),
        format!(
            "{} cells x 1e5 samples, {failures} violations, worst margin/scale {worst:.3e}, {elapsed:.2?}",
            cells.len()
        ),
    )
}

/// A(y)(Y, Z) on the unit sphere from second differences of the curve
/// t -> (y + tV)/|y + tV|, polarized.
fn sphere_sff_fd(y: &AmbientVector, a: &AmbientVector, b: &AmbientVector, h: f64) -> AmbientVector {
    let second = |v: AmbientVector| {
        let c = |t: f64| (y + v * t).normalize();
        (c(h) - c(0.0) * 2.0 + c(-h)) / (h * h)
    };
    (second(a + b) - second(a - b)) / 4.0
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let sphere = TargetManifold::unit_sphere();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut err_coarse, mut err_fine) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let y = AmbientVector::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal)).normalize();
        let tangent = |rng: &mut ChaCha8Rng| {
            let v = AmbientVector::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
            v - y * y.dot(&v)
        };
        let (a, b) = (tangent(&mut rng), tangent(&mut rng));
        let exact = sphere.second_fundamental_form(&y, &a, &b).unwrap();
        err_coarse = err_coarse.max((sphere_sff_fd(&y, &a, &b, 1e-2) - exact).norm());
        err_fine = err_fine.max((sphere_sff_fd(&y, &a, &b, 1e-3) - exact).norm());
    }
    let order = (err_coarse / err_fine).log10();

    let mut lines = vec![format!("finite-difference order {order:.3}")];
    let mut pass = order >= 1.8;
    for (name, target) in [
        ("sphere", TargetManifold::unit_sphere()),
        ("ellipsoid(2,1,1)", TargetManifold::ellipsoid(2.0, 1.0, 1.0).unwrap()),
    ] {
        let c = estimate_sff_constant(&target, 100_000, 11).unwrap();
        let worst = check_sff_inequality(&target, c, 100_000, 12).unwrap();
        pass &= worst.margin >= 0.0;
        lines.push(format!("{name}: C = {c:.6}, worst margin {:.3e}", worst.margin));
    }
    let elapsed = start.elapsed();
    pass &= within(elapsed, 30);
    lines.push(format!("{elapsed:.2?}"));
    verdict(pass, lines.join("; "))
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let mesh = build_unit_square_grid(16).unwrap();
    let target = TargetManifold::unit_sphere();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let eps = 1e-3;
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for p in [2.0, 3.0, 4.0] {
        for _ in 0..100 {
            let values: Vec<AmbientVector> = (0..mesh.num_vertices())
                .map(|_| {
                    (north() + AmbientVector::from_fn(|_, _| 0.3 * rng.sample::<f64, _>(StandardNormal))).normalize()
                })
                .collect();
            let u = ManifoldMap::new(values);
            let delta: Vec<AmbientVector> = (0..mesh.num_vertices())
                .map(|i| {
                    if mesh.is_boundary(i) {
                        return AmbientVector::zeros();
                    }
                    let v = AmbientVector::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
                    v - u.values[i] * u.values[i].dot(&v)
                })
                .collect();
            let grad = energy_gradient(&mesh, &target, &u, p, eps).unwrap();
            let analytic: f64 = grad.iter().zip(&delta).map(|(g, d)| g.dot(d)).sum();
            let h = 1e-5;
            let shifted = |t: f64| ManifoldMap::new(u.values.iter().zip(&delta).map(|(y, d)| y + d * t).collect());
            let fd = (p_energy(&mesh, &shifted(h), p, eps).unwrap() - p_energy(&mesh, &shifted(-h), p, eps).unwrap())
                / (2.0 * h);
            worst = worst.max((fd - analytic).abs() / analytic.abs());
            pairs += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-5 && within(elapsed, 60),
        format!("{pairs} pairs, max relative error {worst:.3e}, {elapsed:.2?}"),
    )
}

fn criterion_4() -> Verdict {
    let mesh = build_unit_square_grid(32).unwrap();
    let u = ManifoldMap::new(mesh.vertices().iter().map(|&[x, _]| AmbientVector::new(x.sin(), 0.0, x.cos())).collect());
    let e2 = p_energy(&mesh, &u, 2.0, 0.0).unwrap();
    let e4 = p_energy(&mesh, &u, 4.0, 0.0).unwrap();
    verdict(
        (e2 - 0.5).abs() <= 1e-3 && (e4 - 0.25).abs() <= 1e-3,
        format!("E_2 = {e2:.9} (|err| {:.2e}), E_4 = {e4:.9} (|err| {:.2e})", (e2 - 0.5).abs(), (e4 - 0.25).abs()),
    )
}

fn cap_experiment(p: f64) -> (ExperimentReport, GeodesicBall, pharmap::DomainMesh) {
    let mesh = build_unit_disk_mesh(4).unwrap();
    let target = TargetManifold::unit_sphere();
    let boundary = polar_cap(&mesh, &target, &north(), 0.3).unwrap();
    let ball = GeodesicBall::new(&target, north(), 0.5).unwrap();
    let config = SolverConfig::new(p).with_ball(ball);
    let report = uniqueness_experiment(&mesh, &boundary, &target, &config, 10).unwrap();
    (report, ball, mesh)
}

fn criterion_5(runs: &[(f64, ExperimentReport, GeodesicBall, pharmap::DomainMesh)], elapsed: Duration) -> Verdict {
    let mut pass = within(elapsed, 600);
    let mut parts = Vec::new();
    for (p, report, _, _) in runs {
        let ok = report.converged_trials == 11
            && report.trials.len() == 11
            && report.max_pairwise_sup_distance <= 1e-5
            && report.energy_spread <= 1e-8;
        pass &= ok;
        parts.push(format!(
            "p={p}: {}/11 converged, distance {:.3e}, spread {:.3e}",
            report.converged_trials, report.max_pairwise_sup_distance, report.energy_spread
        ));
    }
    parts.push(format!("{elapsed:.2?}"));
    verdict(pass, parts.join("; "))
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let mesh = build_unit_disk_mesh(4).unwrap();
    let target = TargetManifold::unit_sphere();
    let boundary = equator(&mesh, &target, &north()).unwrap();
    let config = SolverConfig::new(2.0);
    let inits = [
        TrialInit { mode: InitMode::Constant(north()), seed: 0 },
        TrialInit { mode: InitMode::Constant(-north()), seed: 0 },
    ];
    let report = run_experiment(&mesh, &boundary, &target, &config, &inits).unwrap();
    let elapsed = start.elapsed();
    verdict(
        report.converged_trials == 2
            && report.max_pairwise_sup_distance >= 1.0
            && report.energy_spread <= 1e-4
            && within(elapsed, 120),
        format!(
            "{}/2 converged, sup distance {:.6}, energy gap {:.3e}, {elapsed:.2?}",
            report.converged_trials, report.max_pairwise_sup_distance, report.energy_spread
        ),
    )
}

fn criterion_7(runs: &[(f64, ExperimentReport, GeodesicBall, pharmap::DomainMesh)]) -> Verdict {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    let mut checks = 0;
    let mut pass = true;
    for (p, report, ball, mesh) in runs {
        for (i, trial) in report.trials.iter().enumerate() {
            if !trial.result.converged {
                pass = false;
                continue;
            }
            let st = stability_check(mesh, &trial.result.map, &ball.center, None, *p, 100, 1000 + i as u64).unwrap();
            checks += st.margins.len();
            worst = worst.min(st.worst().map_or(f64::INFINITY, |m| m.margin));
            max_ratio = max_ratio.max(st.max_ratio());
        }
    }
    let elapsed = start.elapsed();
    pass &= worst >= 0.0 && within(elapsed, 60);
    verdict(pass, format!("{checks} test fields, worst margin {worst:.3e}, max lhs/rhs {max_ratio:.3e}, {elapsed:.2?}"))
}

fn criterion_8(runs: &[(f64, ExperimentReport, GeodesicBall, pharmap::DomainMesh)]) -> Verdict {
    let mut max_active = 0;
    let mut max_range = 0.0f64;
    for (_, report, _, _) in runs {
        for t in &report.trials {
            max_active = max_active.max(t.result.constraint_active_count);
            max_range = max_range.max(t.result.report.range_radius);
        }
    }
    verdict(
        max_active == 0 && max_range < 0.5 - 1e-3,
        format!("max constraint_active_count {max_active}, max range_radius {max_range:.6} (bound {})", 0.5 - 1e-3),
    )
}

fn run_cli(config: &Path, outdir: &Path, threads: Option<usize>) -> Vec<u8> {
    let args = Args {
        command: Command::Uniqueness,
        config: config.to_path_buf(),
        outdir: Some(outdir.to_path_buf()),
        strict: true,
        threads,
    };
    cli::run(&args).unwrap();
    fs::read(outdir.join("report.csv")).unwrap()
}

fn criterion_9() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut identical = true;
    let mut parts = Vec::new();
    for p in [2, 3, 4] {
        let config = dir.path().join(format!("p{p}.toml"));
        fs::write(
            &config,
            format!(
                "[mesh]\nbuilder = \"disk\"\nrefinement = 4\n\
                 [boundary]\ngenerator = \"polar_cap\"\nradius = 0.3\n\
                 [solver]\np = {p}.0\n[solver.ball]\nradius = 0.5\n\
                 [experiment]\ntrials = 10\n"
            ),
        )
        .unwrap();
        let a = run_cli(&config, &dir.path().join(format!("a{p}")), None);
        let b = run_cli(&config, &dir.path().join(format!("b{p}")), Some(1));
        identical &= a == b;
        parts.push(format!("p={p}: {} bytes, identical = {}", a.len(), a == b));
    }
    verdict(identical, parts.join("; "))
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Verdict)> = vec![
        (1, "vector inequalities", criterion_1()),
        (2, "second fundamental form", criterion_2()),
        (3, "energy gradient", criterion_3()),
        (4, "band-map energies", criterion_4()),
    ];

    let start = Instant::now();
    let runs: Vec<_> = [2.0, 3.0, 4.0]
        .into_iter()
        .map(|p| {
            let (report, ball, mesh) = cap_experiment(p);
            (p, report, ball, mesh)
        })
        .collect();
    let elapsed = start.elapsed();
    results.push((5, "uniqueness under small range", criterion_5(&runs, elapsed)));
    results.push((6, "two hemispheres on equator data", criterion_6()));
    results.push((7, "stability inequality", criterion_7(&runs)));
    results.push((8, "interior range", criterion_8(&runs)));
    results.push((9, "determinism", criterion_9()));

    let mut failed = 0;
    for (n, name, v) in &results {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} [{tag}] {name}: {}", v.detail);
        failed += usize::from(!v.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
