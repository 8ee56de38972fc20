use diraclab_core::criteria::{classify_initial, ClassifierTolerances, FateTag};
use diraclab_core::hjlimit::hj_simulate;
use diraclab_core::model::{InitialCondition, Mass, TraitGrid};
use diraclab_core::scenarios::{preset, sweep_member, SweepSettings};

/// fig1-extinction on a coarse grid: classified as extinction, drops, then recovers.
#[test]
fn coarse_extinction_and_rescue() {
    let mut p = preset("fig1-extinction").unwrap();
    p.solver.grid = TraitGrid::new(-3.0, 3.0, 1501).unwrap();
    p.solver.eps = 4e-3;
    p.solver.dt = 5e-4;
    p.solver.t_end = 4.0;
    let verdict = classify_initial(&p.ic, &p.models[0], &p.solver.grid, &ClassifierTolerances::default());
    assert_eq!(verdict.tag, FateTag::ExtinctionInterval);

    let traj = p.run().unwrap();
    let low = traj.rho.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(low < 1e-2, "min rho {low}");
    // the stationary mass is 0.25 - eps sqrt(g)
    let end = *traj.rho.last().unwrap();
    assert!((end - (0.25 - 4e-3)).abs() < 2e-3, "rho(4) = {end}");
    assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    assert!(traj.rho.iter().zip(&traj.i_level).all(|(r, i)| r == i));
}

#[test]
fn coarse_pde_follows_the_limit_trait() {
    let mut p = preset("fig1-extinction").unwrap();
    p.solver.grid = TraitGrid::new(-3.0, 3.0, 3001).unwrap();
    p.solver.eps = 2e-3;
    p.solver.dt = 2e-4;
    p.solver.t_end = 3.0;
    p.ic = InitialCondition::Gaussian { center: -0.65, mass: Mass::Fixed(0.2) };
    let pde = p.run().unwrap();
    let hj = hj_simulate(&p.models, &p.schedule, -0.65, 1.0, 3.0, 1e-3).unwrap();
    for s in &hj.states {
        let k = pde.index_at(s.t);
        assert!((pde.xbar[k] - s.xbar).abs() < 0.03, "t = {}: {} vs {}", s.t, pde.xbar[k], s.xbar);
    }
}

#[test]
fn sweep_member_reports_one_period() {
    let mut p = preset("fig5-fast").unwrap();
    p.solver.grid = TraitGrid::new(-3.0, 3.0, 601).unwrap();
    p.solver.eps = 1e-2;
    p.solver.dt = 1e-3;
    let settings = SweepSettings { min_burn_in: 2.0, burn_in_periods: 5, ..SweepSettings::default() };
    let row = sweep_member(&p, &settings, 0.2).unwrap();
    assert_eq!(row.period, 0.2);
    assert!(row.min_rho <= row.mean_rho && row.min_rho > 0.0);
    assert!(!row.extinct);
}
