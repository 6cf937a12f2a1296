use hypequil::geometry::dist;
use hypequil::harness::{catalog, default_region, nonspreading_slack};
use hypequil::resolvent::{certification_grid, merit, oracle_resolve, resolve, resolve_on};
use hypequil::{Bifunction, ConvexRegion, HPoint, SolverKind, SolverOptions};
use proptest::prelude::*;

fn point_in_disk(radius: f64) -> impl Strategy<Value = HPoint> {
    (0.0..radius, 0.0..std::f64::consts::TAU).prop_map(|(r, a)| HPoint::from_polar(r, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn resolvent_is_firmly_nonspreading(entry in 0usize..5, x1 in point_in_disk(3.5), x2 in point_in_disk(3.5)) {
        let f = &catalog()[entry].f;
        let k = default_region();
        let opts = SolverOptions::default();
        let z1 = resolve(f, &k, &x1, &opts).unwrap().z;
        let z2 = resolve(f, &k, &x2, &opts).unwrap().z;
        prop_assert!(k.contains(&z1, 1e-9) && k.contains(&z2, 1e-9));
        prop_assert!(nonspreading_slack(&x1, &z1, &x2, &z2) >= -1e-6);
        // Firmly nonspreading maps are nonexpansive in this sense as well.
        prop_assert!(dist(&z1, &z2) <= dist(&x1, &x2) + 1e-6);
    }

    #[test]
    fn resolvent_points_are_certified(entry in 0usize..5, x in point_in_disk(3.0)) {
        let f = &catalog()[entry].f;
        let k = default_region();
        let opts = SolverOptions::default();
        let grid = certification_grid(&k, &opts).unwrap();
        let out = resolve_on(f, &k, &x, &opts, &grid).unwrap();
        prop_assert!(out.merit <= merit(f, &x, &oracle_resolve(f, &k, &x, &grid), &grid).unwrap() + 1e-6);
    }
}

#[test]
fn points_far_outside_the_ball_converge_quickly() {
    let k = default_region();
    let opts = SolverOptions::default();
    let grid = certification_grid(&k, &opts).unwrap();
    let cases = [
        ("cosh-sum", HPoint::from_spatial(&[20.0, -18.5]).coords().to_vec()),
        ("cosh-max", vec![4.380419128497977, 2.029149707475444, 3.7510829377612143]),
        ("gain-weighted", vec![7.870592184058837, -6.459988075040432, 4.383466139723617]),
    ];
    for (name, coords) in cases {
        let e = catalog().into_iter().find(|e| e.name == name).unwrap();
        let x = HPoint::new(coords).unwrap();
        let out = resolve_on(&e.f, &k, &x, &opts, &grid).unwrap();
        assert!(out.iterations < 2_000, "{name}: {} iterations", out.iterations);
        let oracle = oracle_resolve(&e.f, &k, &x, &grid);
        assert!(dist(&out.z, &oracle) <= opts.grid_spacing, "{name}");
    }
}

#[test]
fn projection_onto_an_intersection_in_three_dimensions() {
    let ball = ConvexRegion::ball(HPoint::from_spatial(&[0.2, 0.0, -0.1]), 1.0).unwrap();
    let hs = ConvexRegion::half_space(vec![0.0, 0.0, 1.0, 0.2]).unwrap();
    let k = ConvexRegion::intersection(vec![ball, hs]).unwrap();
    let opts = SolverOptions { grid_spacing: 0.1, ..SolverOptions::default() };
    for spatial in [[1.5, 0.5, 0.3], [-0.4, 2.0, -1.0], [0.1, 0.0, 0.0]] {
        let x = HPoint::from_spatial(&spatial);
        let out = resolve(&Bifunction::zero(), &k, &x, &opts).unwrap();
        assert_eq!(out.solver, SolverKind::Descent);
        assert!(k.contains(&out.z, 1e-9));
        assert!(dist(&out.z, &k.project(&x).unwrap()) < 1e-6, "{spatial:?}");
        let dz = dist(&x, &out.z);
        for y in k.sample(1, 3000, 2.0).unwrap() {
            assert!(dist(&x, &y) >= dz - 1e-7, "{spatial:?}");
        }
    }
}

#[test]
fn cosh_sum_in_three_dimensions_matches_the_oracle() {
    let g = hypequil::Objective::sum(vec![
        hypequil::Term::cosh(1.0, HPoint::from_spatial(&[0.5, 0.2, 0.0])).unwrap(),
        hypequil::Term::cosh(0.4, HPoint::from_spatial(&[-0.3, 0.6, 0.4])).unwrap(),
    ]);
    let f = hypequil::bifunction::make_optimization_bifunction(g);
    let k = ConvexRegion::ball(HPoint::origin(3), 1.0).unwrap();
    let opts = SolverOptions { grid_spacing: 0.1, ..SolverOptions::default() };
    let grid = certification_grid(&k, &opts).unwrap();
    for spatial in [[1.0, 1.0, 1.0], [0.0, -0.3, 0.2]] {
        let x = HPoint::from_spatial(&spatial);
        let out = resolve_on(&f, &k, &x, &opts, &grid).unwrap();
        let oracle = oracle_resolve(&f, &k, &x, &grid);
        assert!(dist(&out.z, &oracle) <= opts.grid_spacing, "{spatial:?}");
    }
}
