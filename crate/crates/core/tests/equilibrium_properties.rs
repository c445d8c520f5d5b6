use liability_core::equilibrium::{
    av_hv_deviation, best_response_hv_ah, exclusive_lanes_equilibrium, grid_oracle_equilibrium, hv_hv_deviation,
    nash_hh, pure_av_optimum, single_deviation, stackelberg_ah, OracleGame,
};
use liability_core::numeric::{central_diff, linspace};
use liability_core::{Params, Solver};
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = Params> {
    (
        0.4..0.6f64,
        0.75..1.0f64,
        8.0..14.0f64,
        8.0..14.0f64,
        15.0..25.0f64,
        3.0..7.0f64,
        3.0..7.0f64,
        0.3..0.7f64,
        (0.05..0.2f64, 0.15..0.35f64, 0.1..0.3f64),
    )
        .prop_map(|(beta, ratio, a, h, m, s, t, w_h, (sen, loss, w_l))| Params {
            alpha: beta * ratio,
            beta,
            av_env: a,
            hv_env: h,
            max_severity: m,
            av_severity_slope: s,
            hv_severity_slope: t,
            w_h,
            w_a_sen: sen,
            w_a_loss: loss,
            w_l,
            ..Params::base()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn stackelberg_admits_no_profitable_deviation(p in 0.05..0.95f64, k in 0.2..5.0f64, seed in any::<u64>()) {
        let (par, s) = (Params::base(), Solver::default());
        let sol = stackelberg_ah(k, p, &par, &s).unwrap();
        let (follower, leader) = av_hv_deviation(&sol, k, p, &par, &s, 1000, seed).unwrap();
        prop_assert!(follower.passed(), "follower gains {}", follower.best_gain);
        prop_assert!(leader.passed(), "leader gains {}", leader.best_gain);
    }

    #[test]
    fn nash_is_symmetric_and_stable(par in params_strategy(), seed in any::<u64>()) {
        let s = Solver::default();
        let n = nash_hh(&par, &s).unwrap();
        prop_assert!((n.c1 - n.c2).abs() <= s.care_tolerance);
        prop_assert!(hv_hv_deviation(&n, &par, &s, 1000, seed).unwrap().passed());
    }

    #[test]
    fn manufacturer_only_problems_admit_no_deviation(p in 0.05..0.95f64, seed in any::<u64>()) {
        let (par, s) = (Params::base(), Solver::default());
        let av = pure_av_optimum(&par, &s).unwrap();
        let d = single_deviation(av.x, par.av_search_interval(), &s, 1000, seed, |c| par.pure_av_cost(c)).unwrap();
        prop_assert!(d.passed());
        let ex = exclusive_lanes_equilibrium(p, &par, &s).unwrap();
        let d = single_deviation(ex.av.x, par.av_search_interval(), &s, 1000, seed, |c| par.exclusive_lane_cost(c, p)).unwrap();
        prop_assert!(d.passed());
    }

    #[test]
    fn solvers_match_oracle_on_random_configurations(par in params_strategy(), p in 0.1..0.9f64, k in 0.5..2.0f64) {
        let s = Solver::default();
        let n = nash_hh(&par, &s).unwrap();
        let o = grid_oracle_equilibrium(OracleGame::HvHv, &par, 1000).unwrap();
        prop_assert!((n.c1 - o.c_h.unwrap()).abs() <= o.cell.1);
        let st = stackelberg_ah(k, p, &par, &s).unwrap();
        let o = grid_oracle_equilibrium(OracleGame::AvHv { k, p }, &par, 1000).unwrap();
        prop_assert!((st.c_a - o.c_a.unwrap()).abs() <= o.cell.0);
        prop_assert!((st.c_h - o.c_h.unwrap()).abs() <= o.cell.1);
        let av = pure_av_optimum(&par, &s).unwrap();
        let o = grid_oracle_equilibrium(OracleGame::PureAv, &par, 1000).unwrap();
        prop_assert!((av.x - o.c_a.unwrap()).abs() <= o.cell.0);
        let ex = exclusive_lanes_equilibrium(p, &par, &s).unwrap();
        let o = grid_oracle_equilibrium(OracleGame::ExclusiveLanes { p }, &par, 1000).unwrap();
        prop_assert!((ex.av.x - o.c_a.unwrap()).abs() <= o.cell.0);
    }

    #[test]
    fn follower_map_is_deterministic(c_a in 0.05..2.4f64, k in 0.1..10.0f64) {
        let (par, s) = (Params::base(), Solver::default());
        let a = best_response_hv_ah(c_a, k, &par, &s).unwrap();
        let b = best_response_hv_ah(c_a, k, &par, &s).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn cost_slopes_match_finite_differences(c_h in 0.05..1.9f64, c_a in 0.05..2.4f64, k in 0.1..5.0f64) {
        let par = Params::base();
        let j = par.hv_cost_ah_jet(c_h, c_a, k, par.w_h);
        let fd = central_diff(|x| par.hv_cost_ah(x, c_a, k), c_h, 1e-6);
        prop_assert!((fd - j.d1).abs() <= 1e-4 * j.d1.abs().max(1e-3));
        let j = par.hv_cost_hh_jet(c_h, c_a.min(1.9));
        let fd = central_diff(|x| par.hv_cost_hh(x, c_a.min(1.9)), c_h, 1e-6);
        prop_assert!((fd - j.d1).abs() <= 1e-4 * j.d1.abs().max(1e-3));
    }
}

#[test]
fn follower_matches_fine_exhaustive_scan() {
    let (par, s) = (Params::base(), Solver::default());
    let got = best_response_hv_ah(1.0, 1.0, &par, &s).unwrap();
    let (lo, hi) = par.hv_search_interval();
    let grid = linspace(lo, hi, 10_000);
    let best = grid
        .iter()
        .copied()
        .min_by(|a, b| par.hv_cost_ah(*a, 1.0, 1.0).total_cmp(&par.hv_cost_ah(*b, 1.0, 1.0)))
        .unwrap();
    assert!((got.x - best).abs() <= (hi - lo) / 9_999.0);
}

#[test]
fn more_av_care_weakly_lowers_human_care() {
    let (par, s) = (Params::base(), Solver::default());
    let hi = par.av_search_interval().1;
    // below c_A ~ 0.33 the share effect dominates and the response rises
    let resp: Vec<f64> = linspace(0.5, hi - 0.01, 200)
        .into_iter()
        .map(|c| best_response_hv_ah(c, 1.0, &par, &s).unwrap().x)
        .collect();
    assert!(resp.windows(2).all(|w| w[1] <= w[0] + s.care_tolerance));
}

#[test]
fn costlier_sensors_lower_pure_av_care() {
    let s = Solver::default();
    let cares: Vec<f64> = [0.25, 0.3, 0.35, 0.4, 0.45, 0.5]
        .iter()
        .map(|&alpha| pure_av_optimum(&Params { alpha, ..Params::base() }, &s).unwrap().x)
        .collect();
    assert!(cares.windows(2).all(|w| w[1] <= w[0]), "{cares:?}");
}

#[test]
fn exclusive_lanes_need_less_av_care() {
    let (par, s) = (Params::base(), Solver::default());
    for p in linspace(0.05, 0.95, 19) {
        let ex = exclusive_lanes_equilibrium(p, &par, &s).unwrap();
        let mixed = stackelberg_ah(1.0, p, &par, &s).unwrap();
        assert!(ex.av.x <= mixed.c_a, "p = {p}");
    }
}

#[test]
fn oracle_refinement_is_consistent() {
    let par = Params::base();
    for game in [
        OracleGame::HvHv,
        OracleGame::AvHv { k: 1.0, p: 0.5 },
        OracleGame::PureAv,
        OracleGame::ExclusiveLanes { p: 0.5 },
    ] {
        let coarse = grid_oracle_equilibrium(game, &par, 500).unwrap();
        let fine = grid_oracle_equilibrium(game, &par, 1000).unwrap();
        let near = |a: Option<f64>, b: Option<f64>, cell: f64| match (a, b) {
            (Some(a), Some(b)) => (a - b).abs() <= cell,
            (None, None) => true,
            _ => false,
        };
        assert!(near(coarse.c_a, fine.c_a, coarse.cell.0), "{game:?}");
        assert!(near(coarse.c_h, fine.c_h, coarse.cell.1), "{game:?}");
    }
}
