use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pharmap::cli::config::{BallSection, SolverSection};
use pharmap::cli::{Command, RunConfig};
use pharmap::energy::{energy_gradient, p_energy, ManifoldMap};
use pharmap::io::{parse_map, parse_mesh, write_map_string, write_mesh_string};
use pharmap::mesh::{build_unit_disk_mesh, build_unit_square_grid};
use pharmap::oracles::{
    check_lipschitz_inequality, check_monotonicity_inequality, random_test_field, stability_margin,
};
use pharmap::{AmbientVector, GeodesicBall, TargetManifold};

fn targets() -> Vec<TargetManifold> {
    vec![
        TargetManifold::unit_sphere(),
        TargetManifold::sphere(2.5).unwrap(),
        TargetManifold::ellipsoid(2.0, 1.0, 1.0).unwrap(),
        TargetManifold::ellipsoid(1.0, 1.5, 0.7).unwrap(),
        TargetManifold::torus(1.0, 0.4).unwrap(),
    ]
}

fn surface_point(target: &TargetManifold, u: f64, v: f64) -> AmbientVector {
    // Stay away from the poles of the sphere-like parametrizations.
    let v = if target.v_extent() < 2.0 * PI { 0.05 + v * (PI - 0.1) / PI } else { 2.0 * v };
    target.point_at(u, v)
}

fn tangent(target: &TargetManifold, y: &AmbientVector, a: f64, b: f64) -> AmbientVector {
    let [e1, e2] = target.tangent_basis(y);
    e1 * a + e2 * b
}

fn unit_vector() -> impl Strategy<Value = AmbientVector> {
    (0.0..2.0 * PI, -1.0f64..1.0).prop_map(|(phi, z)| {
        let s = (1.0 - z * z).sqrt();
        AmbientVector::new(s * phi.cos(), s * phi.sin(), z)
    })
}

fn vector_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..9).prop_flat_map(|d| (prop::collection::vec(-10.0f64..10.0, d), prop::collection::vec(-10.0f64..10.0, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn monotonicity_inequality_holds((x, y) in vector_pair(), q in 0.0f64..8.0) {
        let m = check_monotonicity_inequality(&x, &y, q);
        prop_assert!(m.holds(), "{m:?}");
    }

    #[test]
    fn lipschitz_inequality_holds((x, y) in vector_pair(), q in 0.0f64..8.0) {
        let m = check_lipschitz_inequality(&x, &y, q);
        prop_assert!(m.holds(), "{m:?}");
    }

    #[test]
    fn projection_is_idempotent(k in 0usize..5, u in 0.0..2.0 * PI, v in 0.0..PI, s in -0.9f64..0.9) {
        let target = targets()[k];
        let y = surface_point(&target, u, v);
        let x = y + target.unit_normal(&y) * (s * target.tubular_width());
        let once = target.project_to_manifold(&x).unwrap();
        let twice = target.project_to_manifold(&once).unwrap();
        prop_assert!(target.contains(&once));
        prop_assert!((twice - once).norm() <= 2.0 * target.projection_tolerance());
    }

    #[test]
    fn sff_is_symmetric_bilinear_and_normal(
        k in 0usize..5, u in 0.0..2.0 * PI, v in 0.0..PI,
        a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0, scale in -3.0f64..3.0,
    ) {
        let target = targets()[k];
        let y = surface_point(&target, u, v);
        let (ty, tz) = (tangent(&target, &y, a, b), tangent(&target, &y, c, d));
        let yz = target.second_fundamental_form(&y, &ty, &tz).unwrap();
        let zy = target.second_fundamental_form(&y, &tz, &ty).unwrap();
        let size = yz.norm().max(1e-300);
        prop_assert!((yz - zy).norm() <= 1e-10 * size.max(1.0));
        let scaled = target.second_fundamental_form(&y, &(ty * scale), &tz).unwrap();
        prop_assert!((scaled - yz * scale).norm() <= 1e-10 * (scale.abs() * size).max(1e-12));
        prop_assert!(target.tangent_project(&y, &yz).unwrap().norm() <= 1e-8);
    }

    #[test]
    fn sphere_distance_satisfies_triangle_inequality(a in unit_vector(), b in unit_vector(), c in unit_vector()) {
        let s = TargetManifold::unit_sphere();
        let ab = s.geodesic_distance(&a, &b).unwrap();
        let bc = s.geodesic_distance(&b, &c).unwrap();
        let ac = s.geodesic_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-10);
        prop_assert!((ab - s.geodesic_distance(&b, &a).unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn ball_projection_lands_in_ball(y in unit_vector(), radius in 0.05f64..1.5) {
        let s = TargetManifold::unit_sphere();
        let ball = GeodesicBall::new(&s, AmbientVector::z(), radius).unwrap();
        prop_assume!(y.z > -1.0 + 1e-6);
        let z = s.project_to_geodesic_ball(&ball, &y).unwrap();
        prop_assert!(s.contains(&z));
        prop_assert!(ball.contains(&s, &z, 1e-12));
        if ball.contains(&s, &y, 0.0) {
            prop_assert_eq!(z, y);
        }
    }

    #[test]
    fn config_round_trips(
        p in 2.0f64..8.0, seed in 0u64..1 << 40, radius in 0.01f64..1.0,
        tol in 1e-12f64..1e-4, iters in 1usize..100_000, trace in any::<bool>(), ball in any::<bool>(),
        eps in prop::collection::vec(1e-6f64..1.0, 0..4), refinement in 1usize..20,
        command in prop::sample::select(vec![
            Command::Solve, Command::Uniqueness, Command::NonuniquenessDemo, Command::Oracles, Command::Sweep,
        ]),
    ) {
        let mut eps = eps;
        eps.sort_by(|a, b| b.total_cmp(a));
        eps.dedup();
        eps.push(0.0);
        let mut config = RunConfig::default();
        config.mesh.refinement = Some(refinement);
        config.boundary.radius = Some(radius);
        config.solver = Some(SolverSection {
            p,
            eps_schedule: Some(eps),
            grad_tolerance: Some(tol),
            max_iterations: Some(iters),
            seed: Some(seed),
            trace: Some(trace),
            armijo: None,
            ball: ball.then_some(BallSection { center: None, radius: Some(radius + 0.1) }),
        });
        let raw = RunConfig::parse(&config.to_canonical_string()).unwrap();
        prop_assert_eq!(&raw, &config);
        let full = config.with_defaults(command);
        let back = RunConfig::parse(&full.to_canonical_string()).unwrap();
        prop_assert_eq!(&back, &full);
        prop_assert_eq!(back.with_defaults(command), full);
    }

    #[test]
    fn map_files_round_trip(values in prop::collection::vec(prop::array::uniform3(-1e3f64..1e3), 0..50)) {
        let map = ManifoldMap::new(values.into_iter().map(AmbientVector::from).collect());
        prop_assert_eq!(parse_map(&write_map_string(&map)).unwrap(), map);
    }

    #[test]
    fn mesh_files_round_trip(n in 2usize..12) {
        let mesh = build_unit_square_grid(n).unwrap();
        prop_assert_eq!(parse_mesh(&write_mesh_string(&mesh)).unwrap(), mesh);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regularization_only_increases_energy(seed in any::<u64>(), p in 2.0f64..6.0, eps in 0.0f64..1.0) {
        let mesh = build_unit_square_grid(6).unwrap();
        let u = random_map(mesh.num_vertices(), seed);
        prop_assert!(p_energy(&mesh, &u, p, eps).unwrap() >= p_energy(&mesh, &u, p, 0.0).unwrap());
    }

    #[test]
    fn gradient_is_tangent_and_zero_on_boundary(seed in any::<u64>(), p in 2.0f64..6.0, eps in 0.0f64..0.1) {
        let mesh = build_unit_square_grid(6).unwrap();
        let target = TargetManifold::unit_sphere();
        let u = random_map(mesh.num_vertices(), seed);
        let g = energy_gradient(&mesh, &target, &u, p, eps).unwrap();
        for (i, gi) in g.iter().enumerate() {
            if mesh.is_boundary(i) {
                prop_assert_eq!(gi.norm(), 0.0);
            } else {
                prop_assert!(gi.dot(&u.values[i]).abs() <= 1e-8 * gi.norm().max(1.0));
            }
        }
    }

    #[test]
    fn stability_margin_sign_is_scale_invariant(seed in any::<u64>(), r in 0.001f64..1.0, p in 2.0f64..5.0) {
        let mesh = build_unit_disk_mesh(3).unwrap();
        let u = random_map(mesh.num_vertices(), seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = random_test_field(&mesh, p, &mut rng);
        let base = stability_margin(&mesh, &u, p, r, &phi).unwrap();
        for lambda in [0.1, 10.0] {
            let scaled: Vec<_> = phi.iter().map(|v| v * lambda).collect();
            let m = stability_margin(&mesh, &u, p, r, &scaled).unwrap();
            prop_assert_eq!(m.margin >= 0.0, base.margin >= 0.0);
            prop_assert!((m.margin - lambda * lambda * base.margin).abs() <= 1e-10 * m.scale);
        }
    }
}

fn random_map(n: usize, seed: u64) -> ManifoldMap {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ManifoldMap::new(
        (0..n)
            .map(|_| {
                let v = AmbientVector::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), 1.0);
                v.normalize()
            })
            .collect(),
    )
}
