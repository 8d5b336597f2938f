#![allow(clippy::needless_range_loop)]

use pathwise_core::grid_paths::{generate_colored_fbm, generate_fbm, HurstSpec, SampledPath, TimeGrid};
use pathwise_core::occupation::{DriftSpec, SpatialBins};
use pathwise_core::pde::{
    audit_assumptions, contraction_audit, driver_increment, h5_diagnostic, h6_diagnostic, solve, DriverOperator,
    GelfandDiscretization, Psi, SolveOptions, SpaceGrid,
};
use pathwise_core::sewing::SewOptions;
use proptest::prelude::*;

fn colored_noise(seed: u64, space: &SpaceGrid, grid: TimeGrid, modes: usize) -> SampledPath {
    let ip = space.l2();
    let basis = space.sine_basis(&ip, modes);
    let coloring: Vec<f64> = (1..=modes).map(|k| 1.0 / k as f64).collect();
    let spec = HurstSpec::new(0.75, coloring).unwrap();
    generate_colored_fbm(seed, &spec, grid, &basis, &ip).unwrap()
}

#[test]
fn shipped_operators_pass_their_audits() {
    let mut tris = Vec::new();
    for p in [1.8, 3.0, 4.0] {
        tris.push(GelfandDiscretization::p_laplace(32, p).unwrap());
    }
    for m in [2.0, 3.0] {
        tris.push(GelfandDiscretization::porous_medium(32, Psi::power(m).unwrap()).unwrap());
    }
    for tri in &tris {
        let rep = audit_assumptions(tri, 200, 17);
        assert!(rep.passed(), "{}: {:?}", tri.name(), rep.violations.first());
        assert!(rep.conditions.iter().all(|c| c.checked > 0), "{}", tri.name());
    }
}

#[test]
fn linear_porous_medium_pairs_to_negative_l2() {
    let tri = GelfandDiscretization::porous_medium(20, Psi::identity()).unwrap();
    let dx = tri.space().dx();
    let u: Vec<f64> = (0..20).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
    let l2 = dx * u.iter().map(|x| x * x).sum::<f64>();
    let a = tri.apply_vec(0.0, &u);
    assert!((tri.duality(&a, &u) + l2).abs() < 1e-10 * l2);
    assert!((tri.pair(0.0, &u, &u) + l2).abs() < 1e-12 * l2);
}

#[test]
fn implicit_heat_step_on_eigenvector() {
    let d = 31;
    let tri = GelfandDiscretization::p_laplace(d, 2.0).unwrap();
    let grid = TimeGrid::new(0.0, 0.1, 200).unwrap();
    let u0 = tri.space().eigenvector(1);
    let lam = tri.space().eigenvalue(1);
    let rep = solve(
        &tri,
        &DriverOperator::zero(grid, d),
        &u0,
        &grid,
        SolveOptions::default(),
    )
    .unwrap();
    for k in [1usize, 50, 200] {
        let factor = (1.0 + grid.dt() * lam).powi(-(k as i32));
        for (a, b) in rep.solution.row(k).iter().zip(&u0) {
            assert!((a - factor * b).abs() < 1e-10);
        }
    }
    // Continuous decay e^{-π²t} is approached to first order in Δt.
    let cont = (-std::f64::consts::PI.powi(2) * 0.1).exp();
    let mid = rep.solution.row(200)[d / 2] / u0[d / 2];
    assert!((mid - cont).abs() < 0.02, "{mid} vs {cont}");
}

#[test]
fn zero_operator_reproduces_additive_noise() {
    let space = SpaceGrid::new(16).unwrap();
    let grid = TimeGrid::unit(512).unwrap();
    let z = colored_noise(3, &space, grid, 8);
    let tri = GelfandDiscretization::zero(16).unwrap();
    let drv = DriverOperator::additive(z.clone(), 0.7, 10.0).unwrap();
    let u0: Vec<f64> = space.eigenvector(2);
    let rep = solve(&tri, &drv, &u0, &grid, SolveOptions::default()).unwrap();
    for k in 0..=512 {
        for i in 0..16 {
            let want = u0[i] + z.row(k)[i] - z.row(0)[i];
            assert!((rep.solution.row(k)[i] - want).abs() < 1e-12);
        }
    }
}

#[test]
fn identical_data_gives_zero_difference() {
    let space = SpaceGrid::new(32).unwrap();
    let grid = TimeGrid::new(0.0, 0.5, 256).unwrap();
    let tri = GelfandDiscretization::p_laplace(32, 3.0).unwrap();
    let drv = DriverOperator::additive(colored_noise(1, &space, grid, 8), 0.7, 10.0).unwrap();
    let u0 = space.eigenvector(1);
    let (audit, _, _) = contraction_audit(&tri, &drv, &u0, &u0, &grid, SolveOptions::default(), None).unwrap();
    assert!(audit.diff_trace.iter().all(|x| *x == 0.0));
    assert!(audit.nonincreasing());
}

#[test]
fn p_laplace_additive_noise_contracts() {
    let space = SpaceGrid::new(32).unwrap();
    let grid = TimeGrid::new(0.0, 0.5, 1024).unwrap();
    let tri = GelfandDiscretization::p_laplace(32, 3.0).unwrap();
    for seed in 0..2 {
        let drv = DriverOperator::additive(colored_noise(seed, &space, grid, 8), 0.7, 10.0).unwrap();
        let u0 = space.eigenvector(1);
        let v0: Vec<f64> = space
            .nodes()
            .zip(&u0)
            .map(|(x, u)| u + (-(x - 0.5).powi(2) / 0.01).exp())
            .collect();
        let (audit, ru, rv) = contraction_audit(&tri, &drv, &u0, &v0, &grid, SolveOptions::default(), None).unwrap();
        assert!(
            audit.nonincreasing(),
            "seed {seed}: first increase at {:?}",
            audit.first_increase
        );
        assert!(audit.within_tolerance);
        assert!(ru.energy_inequality_holds() && rv.energy_inequality_holds());
        assert!(ru.traces_finite() && ru.bound_audit.finite);
    }
}

#[test]
fn porous_medium_energy_inequality_under_noise() {
    let space = SpaceGrid::new(24).unwrap();
    let grid = TimeGrid::new(0.0, 0.2, 512).unwrap();
    let tri = GelfandDiscretization::porous_medium(24, Psi::power(2.0).unwrap()).unwrap();
    let drv = DriverOperator::additive(colored_noise(4, &space, grid, 6).scaled(0.1), 0.7, 10.0).unwrap();
    let u0: Vec<f64> = space.nodes().map(|x| (std::f64::consts::PI * x).sin()).collect();
    let rep = solve(&tri, &drv, &u0, &grid, SolveOptions::default()).unwrap();
    assert!(rep.energy_inequality_holds(), "{:?}", rep.energy_violations);
    assert!(rep.traces_finite());
    assert_eq!(rep.newton.fallbacks, 0);
}

#[test]
fn driver_increment_examples() {
    let d = 4;
    let grid = TimeGrid::unit(256).unwrap();
    let hist = SampledPath::from_fn(grid, d, |t, r| {
        for (i, v) in r.iter_mut().enumerate() {
            *v = (1.0 + i as f64) * (1.0 - t);
        }
    })
    .unwrap();

    let z = SampledPath::from_fn(grid, d, |t, r| {
        for (i, v) in r.iter_mut().enumerate() {
            *v = (t * (i + 2) as f64).sin();
        }
    })
    .unwrap();
    let add = DriverOperator::additive(z.clone(), 0.9, 10.0).unwrap();
    let inc = driver_increment(&add, &hist, 10, 90).unwrap();
    for i in 0..d {
        assert!((inc[i] - (z.row(90)[i] - z.row(10)[i])).abs() < 1e-15);
    }

    let beta = generate_fbm(2, 0.8, grid).unwrap();
    let c = [0.5, -2.0, 1.0, 3.0];
    let constant = SampledPath::constant(grid, &c).unwrap();
    let mult = DriverOperator::linear_multiplicative(beta.clone(), 0.75, 10.0).unwrap();
    let inc = driver_increment(&mult, &constant, 30, 200).unwrap();
    let db = beta.row(200)[0] - beta.row(30)[0];
    for i in 0..d {
        assert!((inc[i] - c[i] * db).abs() < 1e-8);
    }

    let w = generate_fbm(5, 0.4, grid).unwrap();
    let b = |x: f64| (2.0 * x).cos();
    let drift = DriverOperator::regularized_drift(
        DriftSpec::new(2.0, b),
        w.clone(),
        SpatialBins::covering(&w, 4096, 0.01).unwrap(),
        0.9,
        10.0,
    )
    .unwrap();
    let inc = driver_increment(&drift, &constant, 0, 256).unwrap();
    for i in 0..d {
        let direct: f64 = (0..256).map(|k| grid.dt() * b(c[i] - w.row(k)[0])).sum();
        assert!((inc[i] - direct).abs() < 1e-3, "{} vs {direct}", inc[i]);
    }
}

#[test]
fn additive_window_lhs_ignores_state() {
    let space = SpaceGrid::new(8).unwrap();
    let grid = TimeGrid::unit(256).unwrap();
    let ip = space.l2();
    let drv = DriverOperator::additive(colored_noise(6, &space, grid, 4), 0.7, 10.0).unwrap();
    let u1 = SampledPath::zeros(grid, 8).map(8, |t, _, o| o.fill(t)).unwrap();
    let u2 = SampledPath::constant(grid, &[3.0; 8]).unwrap();
    let windows = [256, 64, 16];
    let a = h5_diagnostic(&drv, &u1, &ip, &windows, SewOptions::default()).unwrap();
    let b = h5_diagnostic(&drv, &u2, &ip, &windows, SewOptions::default()).unwrap();
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.lhs, y.lhs);
    }
    assert!((a.rows[0].lhs - a.global_seminorm.powi(2)).abs() <= 1e-12 * a.rows[0].lhs);
}

#[test]
fn continuity_diagnostic_examples() {
    let d = 6;
    let grid = TimeGrid::unit(256).unwrap();
    let ip = SpaceGrid::new(d).unwrap().l2();
    let opts = SewOptions::default();
    let u = SampledPath::from_fn(grid, d, |t, r| {
        for (i, v) in r.iter_mut().enumerate() {
            *v = (t + i as f64).sin();
        }
    })
    .unwrap();

    let zero = DriverOperator::zero(grid, d);
    let seq = vec![u.clone(), u.scaled(2.0)];
    let table = h6_diagnostic(&zero, &seq, &[None, None], &u, 0.6, &ip, opts).unwrap();
    assert!(table.rows.iter().all(|r| r.gap == 0.0));

    let beta = generate_fbm(9, 0.95, grid).unwrap();
    let mult = DriverOperator::linear_multiplicative(beta, 0.92, 10.0).unwrap();
    let pert = SampledPath::from_fn(grid, d, |t, r| r.fill((5.0 * t).cos())).unwrap();
    let seq: Vec<SampledPath> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|n| u.add(&pert.scaled(1.0 / n)).unwrap())
        .collect();
    let table = h6_diagnostic(&mult, &seq, &[None; 4], &u, 0.6, &ip, opts).unwrap();
    assert!(table.gaps_decreasing(), "{:?}", table.rows);
    assert!(table.final_gap() < 0.2 * table.rows[0].gap);
}

#[test]
fn inadmissible_driver_is_refused_by_the_solver() {
    let grid = TimeGrid::unit(32).unwrap();
    let tri = GelfandDiscretization::p_laplace(4, 2.0).unwrap();
    let drv = DriverOperator::additive(SampledPath::zeros(grid, 4), 0.6, 4.0).unwrap();
    let err = solve(&tri, &drv, &[0.0; 4], &grid, SolveOptions::default()).unwrap_err();
    assert!(err.to_string().contains("γ > 1/2 + 1/q"), "{err}");
}

fn vector(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn p_laplace_summation_by_parts(u in vector(12), v in vector(12), p in 1.5f64..4.0) {
        let tri = GelfandDiscretization::p_laplace(12, p).unwrap();
        let a = tri.apply_vec(0.0, &u);
        let via_h = tri.duality(&a, &v);
        let flux = tri.pair(0.0, &u, &v);
        prop_assert!((via_h - flux).abs() <= 1e-9 * (1.0 + flux.abs()));
    }

    #[test]
    fn porous_medium_gelfand_compatibility(u in vector(12), v in vector(12), m in 1.5f64..4.0) {
        let tri = GelfandDiscretization::porous_medium(12, Psi::power(m).unwrap()).unwrap();
        let a = tri.apply_vec(0.0, &u);
        let via_h = tri.duality(&a, &v);
        let flux = tri.pair(0.0, &u, &v);
        prop_assert!((via_h - flux).abs() <= 1e-9 * (1.0 + flux.abs()));
    }

    #[test]
    fn monotonicity_of_the_operator(u in vector(10), v in vector(10), p in 1.5f64..4.0) {
        let tri = GelfandDiscretization::p_laplace(10, p).unwrap();
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
        let lhs = tri.pair(0.0, &u, &w) - tri.pair(0.0, &v, &w);
        prop_assert!(lhs <= 1e-9 * (1.0 + tri.pair(0.0, &u, &u).abs() + tri.pair(0.0, &v, &v).abs()));
    }
}
