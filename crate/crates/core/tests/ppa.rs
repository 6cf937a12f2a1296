use hypequil::bifunction::make_optimization_bifunction;
use hypequil::geometry::dist;
use hypequil::ppa::{equilibrium_residual, run_ppa};
use hypequil::resolvent::certification_grid;
use hypequil::{ConvexRegion, HPoint, LambdaSchedule, Objective, SolverOptions, Term, TraceStatus};

fn cosh_pair_3d() -> Objective {
    Objective::sum(vec![
        Term::cosh(1.0, HPoint::from_spatial(&[0.4, -0.2, 0.3])).unwrap(),
        Term::cosh(0.6, HPoint::from_spatial(&[-0.5, 0.5, 0.1])).unwrap(),
    ])
}

#[test]
fn geometric_schedule_in_three_dimensions() {
    let g = cosh_pair_3d();
    let p = g.known_minimizer().unwrap();
    let f = make_optimization_bifunction(g);
    let k = ConvexRegion::ball(HPoint::origin(3), 1.5).unwrap();
    let opts = SolverOptions { grid_spacing: 0.15, ..SolverOptions::default() };
    let x0 = HPoint::from_spatial(&[1.2, 1.0, -0.8]);
    let sched = LambdaSchedule::Geometric { initial: 0.2, ratio: 1.5 };
    let t = run_ppa(&f, &k, &x0, &sched, 1e-12, 100, &opts).unwrap();
    assert_eq!(t.status, TraceStatus::Converged);
    let mut prev = dist(&x0, &p);
    for x in &t.iterates {
        let d = dist(x, &p);
        assert!(d <= prev + 1e-6);
        prev = d;
    }
    assert!(prev < 1e-6, "{prev}");
}

#[test]
fn constrained_minimizer_is_reached_on_a_boundary() {
    // The unconstrained minimizer lies outside the half-space, so the limit
    // sits on its boundary and is an equilibrium of the restricted problem.
    let g = Objective::sum(vec![Term::cosh(1.0, HPoint::from_polar(1.0, 0.0)).unwrap()]);
    let f = make_optimization_bifunction(g.clone());
    let ball = ConvexRegion::ball(HPoint::origin(2), 2.0).unwrap();
    let hs = ConvexRegion::half_space(vec![0.0, 1.0, 0.0]).unwrap();
    let k = ConvexRegion::intersection(vec![ball, hs]).unwrap();
    let opts = SolverOptions::default();
    let x0 = HPoint::from_polar(1.5, 2.5);
    let t = run_ppa(&f, &k, &x0, &LambdaSchedule::default(), 1e-12, 200, &opts).unwrap();
    let z = t.last();
    // The minimizer of cosh d(a, .) on {x_1 <= 0} is the foot of a on the line x_1 = 0.
    assert!(z.coords()[1].abs() < 1e-8, "{z:?}");
    assert!(z.coords()[2].abs() < 1e-6, "{z:?}");
    let grid = certification_grid(&k, &opts).unwrap();
    assert!(equilibrium_residual(&f, &k, z, &grid).unwrap() >= -1e-9);
    assert!(t.residuals.last().unwrap() >= &-1e-9);
}

#[test]
fn csv_round_trips_every_iterate() {
    let g = cosh_pair_3d();
    let f = make_optimization_bifunction(g);
    let k = ConvexRegion::ball(HPoint::origin(3), 1.5).unwrap();
    let opts = SolverOptions { grid_spacing: 0.2, ..SolverOptions::default() };
    let t = run_ppa(&f, &k, &HPoint::from_spatial(&[0.9, 0.0, 0.0]), &LambdaSchedule::default(), 1e-12, 20, &opts)
        .unwrap();
    let mut buf = Vec::new();
    t.write_csv(&mut buf, true).unwrap();
    let text = String::from_utf8(buf).unwrap();
    for (line, x) in text.lines().skip(1).zip(&t.iterates) {
        let cols: Vec<&str> = line.split(',').collect();
        let coords: Vec<f64> = cols[1..5].iter().map(|c| c.parse().unwrap()).collect();
        assert_eq!(coords, x.coords());
    }
}
