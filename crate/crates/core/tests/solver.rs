use aggdiff_core::monitor::VerdictTag;
use aggdiff_core::{
    boundedness_verdict, init_profile, DensityField, Grid, PotentialParams, ProfileKind, SimConfig, Solver, Termination,
};

fn weak_params() -> PotentialParams {
    PotentialParams::new(2.0, 1.0, 1.0, 2).unwrap()
}

#[test]
fn flat_state_is_fixed_without_interaction() {
    let grid = Grid::square(16, 1.0).unwrap();
    let flat = DensityField::constant(grid, 0.7).unwrap();
    let solver = Solver::new(grid, None, SimConfig::new(2.0, 0.1)).unwrap();
    let (next, _) = solver.step(&flat, 0.0, 1.0).unwrap();
    assert_eq!(next.values(), flat.values());

    let zero = DensityField::zeros(grid);
    let solver = Solver::new(grid, Some(weak_params()), SimConfig::new(1.5, 0.1)).unwrap();
    let (next, report) = solver.step(&zero, 0.0, 0.01).unwrap();
    assert!(next.values().iter().all(|&v| v == 0.0));
    assert_eq!(report.mass, 0.0);
}

#[test]
fn mass_is_conserved_to_roundoff() {
    let grid = Grid::square(48, 3.0).unwrap();
    let init = init_profile(&ProfileKind::UniformRandom { radius: 1.5, seed: 7 }, grid, 4.0).unwrap().field;
    let solver = Solver::new(grid, Some(weak_params()), SimConfig::new(1.5, 1.0)).unwrap();
    let m0 = init.mass();
    let mut state = init;
    let mut t = 0.0;
    for _ in 0..300 {
        let (next, report) = solver.step(&state, t, 1.0).unwrap();
        assert!(report.min_value >= 0.0);
        t = report.t;
        state = next;
    }
    assert!((state.mass() - m0).abs() / m0 < 1e-12);
}

#[test]
fn heat_flow_obeys_maximum_principle_in_1d() {
    let grid = Grid::new(1, 128, 2.0).unwrap();
    let init = init_profile(&ProfileKind::TwoBumps { radius: 0.4, separation: 1.0 }, grid, 1.0).unwrap().field;
    let solver = Solver::new(grid, None, SimConfig::new(1.0, 0.2)).unwrap();
    let (mut hi, mut lo) = (init.max(), init.min());
    let mut state = init;
    let mut t = 0.0;
    for _ in 0..500 {
        let (next, report) = solver.step(&state, t, 1.0).unwrap();
        assert!(next.max() <= hi * (1.0 + 1e-14));
        assert!(next.min() >= lo);
        hi = next.max();
        lo = next.min();
        t = report.t;
        state = next;
    }
}

#[test]
fn zero_horizon_returns_initial_state() {
    let grid = Grid::square(16, 2.0).unwrap();
    let init = init_profile(&ProfileKind::Gaussian { sigma: 0.3 }, grid, 1.0).unwrap().field;
    let mut cfg = SimConfig::new(1.5, 0.0);
    cfg.dt_min = 1e-14;
    let solver = Solver::new(grid, Some(weak_params()), cfg).unwrap();
    let out = solver.run(&init).unwrap();
    assert_eq!(out.final_state, init);
    assert_eq!(out.steps, 0);
    assert_eq!(out.series.len(), 1);
    assert_eq!(out.termination, Termination::Completed);
}

#[test]
fn whole_cell_shifts_commute_with_the_flow() {
    let grid = Grid::square(64, 4.0).unwrap();
    let base = init_profile(&ProfileKind::Bump { radius: 1.0 }, grid, 3.0).unwrap().field;
    let shifted = base.shifted([5, -3]).unwrap();
    let solver = Solver::new(grid, Some(weak_params()), SimConfig::new(1.5, 1.0)).unwrap();
    let (mut a, mut b) = (base, shifted);
    let dt = 2e-4;
    for k in 0..40 {
        a = solver.step(&a, k as f64 * dt, dt).unwrap().0;
        b = solver.step(&b, k as f64 * dt, dt).unwrap().0;
    }
    let a_moved = a.shifted([5, -3]).unwrap();
    let scale = a.max();
    for (x, y) in a_moved.values().iter().zip(b.values()) {
        assert!((x - y).abs() <= 1e-10 * scale, "{x} vs {y}");
    }
}

#[test]
fn output_times_are_hit_exactly() {
    let grid = Grid::square(24, 2.0).unwrap();
    let init = init_profile(&ProfileKind::Gaussian { sigma: 0.4 }, grid, 2.0).unwrap().field;
    let mut cfg = SimConfig::new(2.0, 0.05);
    cfg.output_every = 0.01;
    let solver = Solver::new(grid, Some(weak_params()), cfg).unwrap();
    let out = solver.run(&init).unwrap();
    let want: Vec<f64> = (0..=5).map(|k| (k as f64 * 0.01).min(0.05)).collect();
    assert_eq!(out.series.times.len(), want.len());
    for (t, w) in out.series.times.iter().zip(&want) {
        assert!((t - w).abs() < 1e-15, "{t} vs {w}");
    }
    out.series.check().unwrap();
    assert!(out.series.mass_drift() < 1e-12);
    assert_eq!(out.t_final, 0.05);
}

#[test]
fn monitored_norms_are_consistent() {
    let grid = Grid::square(32, 2.0).unwrap();
    let init = init_profile(&ProfileKind::Gaussian { sigma: 0.5 }, grid, 5.0).unwrap().field;
    let mut cfg = SimConfig::new(1.5, 0.02);
    cfg.monitored_p = vec![1.0, 2.0, 64.0];
    let solver = Solver::new(grid, Some(weak_params()), cfg).unwrap();
    let out = solver.run(&init).unwrap();
    let s = &out.series;
    for i in 0..s.len() {
        assert_eq!(s.lp[0][i], s.mass[i]);
        assert!((s.lp[2][i] - s.linf[i]).abs() / s.linf[i] <= 0.2);
    }
    assert!(s.residuals_pass());
}

/// Porous-medium flow in 1D from a smooth bump: halving `h` must cut the
/// `L¹` distance to a fine reference by the first-order factor.
#[test]
fn first_order_convergence_in_1d() {
    let t_end = 0.05;
    let run = |cells: usize| {
        let grid = Grid::new(1, cells, 2.0).unwrap();
        let init = DensityField::from_fn(grid, |x| (-(x[0] * x[0]) / 0.1).exp()).unwrap();
        let solver = Solver::new(grid, None, SimConfig::new(2.0, t_end)).unwrap();
        solver.run(&init).unwrap().final_state
    };
    let reference = run(1024);
    let error = |coarse: &DensityField| {
        let ratio = 1024 / coarse.grid().cells_per_axis();
        let h = coarse.grid().spacing();
        coarse
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let avg: f64 = reference.values()[i * ratio..(i + 1) * ratio].iter().sum::<f64>() / ratio as f64;
                (v - avg).abs() * h
            })
            .sum::<f64>()
    };
    let e64 = error(&run(64));
    let e128 = error(&run(128));
    assert!(e64 / e128 >= 1.7, "ratio {}", e64 / e128);
}

#[test]
fn pure_diffusion_spreads_and_is_bounded() {
    let grid = Grid::square(32, 4.0).unwrap();
    let init = init_profile(&ProfileKind::Gaussian { sigma: 0.5 }, grid, 1.0).unwrap().field;
    let solver = Solver::new(grid, None, SimConfig::new(2.0, 1.0)).unwrap();
    let out = solver.run(&init).unwrap();
    assert!(out.final_state.max() < init.max());
    let v = boundedness_verdict(&out.series, out.termination).unwrap();
    assert_eq!(v.tag, VerdictTag::Bounded);
}

#[test]
fn rejects_bad_configuration() {
    let grid = Grid::square(16, 1.0).unwrap();
    let mut cfg = SimConfig::new(1.0, 1.0);
    cfg.cfl = 1.5;
    assert!(Solver::new(grid, None, cfg).is_err());
    let mut cfg = SimConfig::new(1.0, 1.0);
    cfg.monitored_p = vec![0.5];
    assert!(Solver::new(grid, None, cfg).is_err());
    let other = Grid::square(32, 1.0).unwrap();
    let solver = Solver::new(grid, None, SimConfig::new(1.0, 1.0)).unwrap();
    assert!(solver.step(&DensityField::zeros(other), 0.0, 1.0).is_err());
}
