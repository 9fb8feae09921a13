use nlwave_core::experiments::{
    composite_distance, discrete_energy, energy_report, fit_order, self_convergence, tau_sweep,
};
use nlwave_core::solver::{solve_linear, solve_nonlinear, PicardOptions};
use nlwave_core::spectral::eigenpairs;
use nlwave_core::{Domain, InitialData, NonlinearityMode, ScenarioConfig, ScenarioTag};

fn smooth(d: Domain) -> InitialData {
    InitialData::from_amplitudes(d, &[1.0, 0.0, 0.2], &[0.3], &[]).unwrap()
}

#[test]
fn gfe3_near_one_matches_jmgt() {
    let d = Domain::interval(1.0, 8).unwrap();
    let run = |tag, alpha| {
        let mut cfg = ScenarioConfig::named(tag, alpha, d).unwrap();
        cfg.tau = 0.05;
        cfg.delta = 0.3;
        cfg.final_time = 0.5;
        solve_linear(&cfg, &smooth(d)).unwrap()
    };
    let near = run(ScenarioTag::GfeIii, 0.999);
    let jmgt = run(ScenarioTag::Jmgt, 0.5);
    let gap = near
        .snapshots
        .iter()
        .zip(&jmgt.snapshots)
        .map(|(p, q)| p.x.iter().zip(&q.x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    assert!(gap <= 0.05 * jmgt.peak_displacement(), "gap {gap}");
}

#[test]
fn gfe3_self_convergence() {
    let d = Domain::interval(1.0, 8).unwrap();
    let mut cfg = ScenarioConfig::named(ScenarioTag::GfeIii, 0.75, d).unwrap();
    cfg.tau = 0.05;
    cfg.delta = 0.3;
    cfg.final_time = 0.5;
    let report = self_convergence(&cfg, &smooth(d), &[4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4]).unwrap();
    let order = report.order.clone().unwrap();
    assert!(order.slope >= 0.8, "{report:?}");
}

#[test]
fn undamped_wave_energy_conserved() {
    let d = Domain::interval(1.0, 1).unwrap();
    let mut cfg = ScenarioConfig::named(ScenarioTag::Jmgt, 0.5, d).unwrap();
    cfg.final_time = 1.0;
    let data = InitialData::from_amplitudes(d, &[1.0], &[0.5], &[]).unwrap();
    let traj = solve_linear(&cfg, &data).unwrap();
    let records = energy_report(&cfg, &traj).unwrap();
    let e0 = records[0].wave_energy;
    for r in &records {
        assert!((r.wave_energy - e0).abs() <= 1e-2 * e0, "t={} {}", r.time, r.wave_energy);
    }
}

fn wb(tag: ScenarioTag) -> (ScenarioConfig, InitialData) {
    let d = Domain::interval(1.0, 6).unwrap();
    let mut cfg = ScenarioConfig::named(tag, 0.5, d).unwrap();
    cfg.delta = 0.5;
    cfg.final_time = 0.5;
    cfg.step = 1e-3;
    cfg.mode = NonlinearityMode::Wb;
    cfg.k1 = 1.0;
    cfg.k2 = 1.0;
    cfg.k3 = 1.0;
    let data = InitialData::from_amplitudes(d, &[1e-3, 5e-4], &[], &[]).unwrap();
    (cfg, data)
}

#[test]
fn wb_energy_uniform_in_tau() {
    let (cfg, data) = wb(ScenarioTag::Gfe);
    let sweep = tau_sweep(&cfg, &data, &[1e-1, 1e-2, 1e-3, 1e-4]).unwrap();
    assert_eq!(sweep.failures(), 0);
    assert!(sweep.energy_spread() <= 10.0, "{}", sweep.energy_spread());
    let largest = sweep.entries[0].peak_energy.unwrap();
    assert!(sweep.entries.iter().all(|e| e.peak_energy.unwrap() <= 10.0 * largest));
}

#[test]
fn wb_limit_consistent_with_tau_runs() {
    let (cfg, data) = wb(ScenarioTag::Jmgt);
    let sweep = tau_sweep(&cfg, &data, &[1e-1, 3e-2, 1e-2, 3e-3, 1e-3]).unwrap();
    let fit = fit_order(&sweep.pairs()).unwrap();
    assert!((fit.slope - 1.0).abs() <= 0.3, "{fit:?}");
}

#[test]
fn linear_errors_monotone_over_decades() {
    let d = Domain::interval(1.0, 4).unwrap();
    let mut cfg = ScenarioConfig::named(ScenarioTag::Gfe, 0.5, d).unwrap();
    cfg.delta = 0.5;
    cfg.final_time = 0.5;
    cfg.step = 5e-4;
    let data = InitialData::from_amplitudes(d, &[1.0], &[], &[]).unwrap();
    let sweep = tau_sweep(&cfg, &data, &[1e-1, 1e-2, 1e-3, 1e-4]).unwrap();
    let errs: Vec<f64> = sweep.pairs().iter().map(|p| p.1).collect();
    assert!(errs.windows(2).all(|p| p[1] <= p[0]), "{errs:?}");
    assert!(errs.iter().all(|e| e.is_finite()));
}

#[test]
fn picard_fixed_point_is_consistent() {
    let (mut cfg, data) = wb(ScenarioTag::Jmgt);
    cfg.tau = 0.01;
    let (traj, log) = solve_nonlinear(&cfg, &data, PicardOptions { tol: 1e-12, max_iter: 30 }).unwrap();
    assert!(log.iterations <= 30);
    let ratios = log.ratios();
    assert!(ratios.iter().skip(1).all(|&r| r < 0.9), "{ratios:?}");
    let lambda = eigenpairs(&cfg.domain).eigenvalues;
    let linear = solve_linear(&cfg, &data).unwrap();
    let shift = composite_distance(&traj, &linear, &lambda).unwrap();
    // the nonlinear correction is quadratic in the amplitude
    assert!(shift > 0.0 && shift <= 1e-3 * discrete_energy(&linear, &lambda).sqrt(), "{shift}");
}
