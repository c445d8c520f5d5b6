use liability_core::model::Encounter;
use liability_core::scenarios::{
    av_related_loss_at, default_p_grid, endogenous_fixed_points, exclusive_lane_sweep, heterogeneous_mc,
    penetration_sweep, step_grid, HeterogeneityConfig, KPolicy, SweepRecord,
};
use liability_core::{Params, Solver};

fn base_sweep(grid: &[f64]) -> Vec<SweepRecord<f64>> {
    penetration_sweep(grid, KPolicy::Fixed(1.0), &Params::base(), &Solver::default()).unwrap()
}

#[test]
fn records_satisfy_their_identities() {
    let par = Params::base();
    for r in base_sweep(&default_p_grid()) {
        let rep = &r.report;
        let dist: f64 = rep.scenarios.iter().map(|m| m.encounter_probability).sum();
        assert!((dist - 1.0).abs() < 1e-14);
        let tr: f64 = rep.scenarios.iter().map(|m| m.crash_rate).sum();
        assert!((tr - rep.total_rate).abs() < 1e-14);
        let tl: f64 = rep.scenarios.iter().map(|m| m.encounter_probability * m.loss).sum();
        assert!((tl - rep.total_loss).abs() < 1e-13);
        let sc = par.w_l * rep.total_cost + (1.0 - par.w_l) * rep.total_loss;
        assert!((sc - rep.social_cost).abs() < 1e-13);
        assert!(!rep.diagnostics.severity_clamped);
    }
}

#[test]
fn pure_av_baseline_is_constant() {
    let recs = base_sweep(&step_grid(0.1, 0.9, 0.1).unwrap());
    assert!(recs.windows(2).all(|w| w[0].pure_av == w[1].pure_av));
}

#[test]
fn moral_hazard_flags_ignore_evaluation_order() {
    let grid = step_grid(0.05, 0.95, 0.05).unwrap();
    let together = base_sweep(&grid);
    for (i, &p) in grid.iter().enumerate().rev() {
        let alone = base_sweep(&[p]);
        assert_eq!(alone[0].moral_hazard, together[i].moral_hazard, "p = {p}");
    }
    assert!(together[9].moral_hazard.flag, "p = 0.5");
}

#[test]
fn sensor_heavy_manufacturer_removes_moral_hazard_at_low_penetration() {
    let par = Params {
        w_a_sen: 0.67,
        w_a_loss: 0.16,
        ..Params::base()
    };
    let recs = penetration_sweep(&step_grid(0.05, 0.5, 0.05).unwrap(), KPolicy::Fixed(1.0), &par, &Solver::default())
        .unwrap();
    for r in &recs {
        assert!(!r.moral_hazard.flag, "p = {}", r.report.p);
        assert!(r.report.profile.c_a < r.report.profile.c_h_ah);
    }
}

#[test]
fn human_care_against_avs_has_an_interior_trough() {
    let recs = base_sweep(&default_p_grid());
    let c: Vec<f64> = recs.iter().map(|r| r.report.profile.c_h_ah).collect();
    let i = (0..c.len()).min_by(|&a, &b| c[a].total_cmp(&c[b])).unwrap();
    assert!(i > 0 && i < c.len() - 1);
    assert!(c[..=i].windows(2).all(|w| w[1] <= w[0]));
    assert!(c[i..].windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn exclusive_lanes_crash_more_at_low_penetration() {
    let (par, s) = (Params::base(), Solver::default());
    let grid = step_grid(0.1, 0.5, 0.1).unwrap();
    let mixed = base_sweep(&grid);
    let lanes = exclusive_lane_sweep(&grid, &par, &s).unwrap();
    for (m, e) in mixed.iter().zip(&lanes) {
        assert!(e.report.total_rate > m.report.total_rate, "p = {}", m.report.p);
        assert_eq!(e.report.scenario(Encounter::AvHv).encounter_probability, 0.0);
    }
}

#[test]
fn fixed_points_reproduce_themselves() {
    let (par, s) = (Params::base(), Solver::default());
    for eta in [0.5, 2.0] {
        let res = endogenous_fixed_points(eta, KPolicy::Fixed(1.0), &par, &s, 49).unwrap();
        assert!(!res.roots.is_empty());
        for root in &res.roots {
            assert!(root.residual.abs() <= 1e-3, "eta = {eta}: residual {}", root.residual);
            let again = 1.0 - eta * av_related_loss_at(root.p, KPolicy::Fixed(1.0), &par, &s).unwrap();
            assert!((again - root.p).abs() <= 1e-3, "eta = {eta}: {again} vs {}", root.p);
        }
    }
}

fn mc(samples: usize, seed: u64, std_dev: f64) -> (f64, f64, f64) {
    let cfg = HeterogeneityConfig {
        samples,
        seed,
        std_dev,
        ..HeterogeneityConfig::default()
    };
    let r = heterogeneous_mc(&cfg, &[0.5], &Params::base(), &Solver::default()).unwrap();
    let pt = r.points[0];
    (pt.share_loss_mean, pt.share_loss_se, pt.c_a)
}

#[test]
fn monte_carlo_is_seeded_and_converges() {
    let (m1, se1, c1) = mc(500, 42, 0.1);
    let (m1b, _, c1b) = mc(500, 42, 0.1);
    assert_eq!((m1, c1), (m1b, c1b));
    let (m2, se2, _) = mc(1000, 42, 0.1);
    assert!((m2 - m1).abs() < 3.0 * se1.max(se2), "{m1} vs {m2}");
    let (m3, se3, _) = mc(500, 7, 0.1);
    assert!((m3 - m1).abs() < 3.0 * (se1 * se1 + se3 * se3).sqrt(), "{m1} vs {m3}");
}

#[test]
fn degenerate_population_is_the_homogeneous_driver() {
    let cfg = HeterogeneityConfig {
        std_dev: 0.0,
        samples: 5,
        ..HeterogeneityConfig::default()
    };
    let r = heterogeneous_mc(&cfg, &[0.2, 0.8], &Params::base(), &Solver::default()).unwrap();
    for pt in &r.points {
        assert_eq!(pt.c_a, pt.c_a_homogeneous);
        assert_eq!(pt.c_h_mean, pt.c_h_homogeneous);
        assert_eq!(pt.c_h_std, 0.0);
    }
}
