//! Lower-level games: the HV-HV Nash game, the manufacturer/HV Stackelberg
//! game and the manufacturer-only problems.

use crate::equilibrium::config::SolverConfig;
use crate::equilibrium::search::{minimize_by_slope, minimize_scanned, Optimum};
use crate::error::{domain, Error, Result};
use crate::model::ModelParams;
use crate::Scalar;

/// HV best response to an AV with care `c_a` under ratio `k`.
pub fn best_response_hv_ah<S: Scalar>(
    c_a: S,
    k: S,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
) -> Result<Optimum<S>> {
    best_response_hv_ah_weighted(c_a, k, params.w_h, params, solver)
}

/// As [`best_response_hv_ah`] for a driver with trade-off weight `w_h`.
pub fn best_response_hv_ah_weighted<S: Scalar>(
    c_a: S,
    k: S,
    w_h: S,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
) -> Result<Optimum<S>> {
    let (a_lo, a_hi) = (S::zero(), params.av_care_max());
    if !(c_a > a_lo && c_a < a_hi) {
        return Err(domain("c_a", c_a, "in (0, c_a_max)"));
    }
    if !(k > S::zero()) {
        return Err(domain("k", k, "> 0"));
    }
    let (lo, hi) = params.hv_search_interval();
    minimize_by_slope(
        "HV best response in AV-HV encounters",
        |c_h| {
            let j = params.hv_cost_ah_jet(c_h, c_a, k, w_h);
            (j.v, j.d1)
        },
        lo,
        hi,
        solver.follower_scan(),
        solver.root_tolerance(),
    )
}

/// HV best response to another HV with care `c_other`.
pub fn best_response_hv_hh<S: Scalar>(
    c_other: S,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
) -> Result<Optimum<S>> {
    let (lo, hi) = params.hv_search_interval();
    minimize_by_slope(
        "HV best response in HV-HV encounters",
        |c| {
            let j = params.hv_cost_hh_jet(c, c_other);
            (j.v, j.d1)
        },
        lo,
        hi,
        solver.follower_scan(),
        solver.root_tolerance(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NashSolution<S> {
    pub c1: S,
    pub c2: S,
    pub iterations: usize,
    pub residual: S,
    pub boundary: bool,
}

/// Symmetric Nash equilibrium of the HV-HV game by alternating best responses.
///
/// Each sweep updates player 2 against player 1 and then player 1 against the
/// new player 2. When the residual grows the update is damped by halving the
/// step.
pub fn nash_hh<S: Scalar>(params: &ModelParams<S>, solver: &SolverConfig<S>) -> Result<NashSolution<S>> {
    params.validate()?;
    let (lo, hi) = params.hv_search_interval();
    let mut c1 = (lo + hi) * S::half();
    let mut c2 = c1;
    let mut step = S::one();
    let mut prev = S::infinity();
    let mut boundary = false;
    let mut residual = S::infinity();
    for it in 1..=solver.max_iterations {
        let b2 = best_response_hv_hh(c1, params, solver)?;
        let n2 = c2 + step * (b2.x - c2);
        let b1 = best_response_hv_hh(n2, params, solver)?;
        let n1 = c1 + step * (b1.x - c1);
        boundary = b1.boundary || b2.boundary;
        residual = (n1 - c1).abs().max((n2 - c2).abs()) / step;
        c1 = n1;
        c2 = n2;
        if residual <= solver.care_tolerance && (c1 - c2).abs() <= solver.care_tolerance {
            return Ok(NashSolution {
                c1,
                c2,
                iterations: it,
                residual,
                boundary,
            });
        }
        if residual > prev {
            step = step * S::half();
        }
        prev = residual;
    }
    let _ = boundary;
    Err(Error::NotConverged {
        which: "HV-HV best-response iteration",
        iterations: solver.max_iterations,
        last: c1.as_f64(),
        residual: residual.as_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackelbergSolution<S> {
    pub c_a: S,
    pub c_h: S,
    /// Manufacturer cost at the equilibrium.
    pub leader_cost: S,
    pub leader: Optimum<S>,
    pub follower: Optimum<S>,
}

/// Manufacturer-led Stackelberg equilibrium of the AV-HV game at ratio `k`
/// and penetration `p` in `(0, 1)`.
pub fn stackelberg_ah<S: Scalar>(
    k: S,
    p: S,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
) -> Result<StackelbergSolution<S>> {
    if !(p > S::zero() && p < S::one()) {
        return Err(domain("p", p, "in (0, 1) for the mixed market"));
    }
    if !(k > S::zero() && k <= params.k_max) {
        return Err(domain("k", k, "in (0, k_max]"));
    }
    let (lo, hi) = params.av_search_interval();
    let leader = minimize_scanned(
        |c_a| {
            let f = best_response_hv_ah(c_a, k, params, solver)?;
            Ok(params.manufacturer_cost(c_a, f.x, k, p))
        },
        lo,
        hi,
        solver.grid_resolution,
        solver.care_tolerance * S::lit(1e-3),
    )?;
    let follower = best_response_hv_ah(leader.x, k, params, solver)?;
    Ok(StackelbergSolution {
        c_a: leader.x,
        c_h: follower.x,
        leader_cost: leader.value,
        leader,
        follower,
    })
}

/// Manufacturer optimum in a pure AV market.
pub fn pure_av_optimum<S: Scalar>(params: &ModelParams<S>, solver: &SolverConfig<S>) -> Result<Optimum<S>> {
    let (lo, hi) = params.av_search_interval();
    minimize_scanned(
        |c_a| Ok(params.pure_av_cost(c_a)),
        lo,
        hi,
        solver.grid_resolution,
        solver.care_tolerance * S::lit(1e-3),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExclusiveLaneSolution<S> {
    pub av: Optimum<S>,
    pub hh: NashSolution<S>,
}

/// Equilibrium when AVs and HVs never meet: the manufacturer weighs the AV-AV
/// loss by `p^2 / (p^2 + (1-p)^2)` and HVs play the unchanged HV-HV game.
pub fn exclusive_lanes_equilibrium<S: Scalar>(
    p: S,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
) -> Result<ExclusiveLaneSolution<S>> {
    if !(p > S::zero() && p <= S::one()) {
        return Err(domain("p", p, "in (0, 1]"));
    }
    let hh = nash_hh(params, solver)?;
    let (lo, hi) = params.av_search_interval();
    let av = minimize_scanned(
        |c_a| Ok(params.exclusive_lane_cost(c_a, p)),
        lo,
        hi,
        solver.grid_resolution,
        solver.care_tolerance * S::lit(1e-3),
    )?;
    Ok(ExclusiveLaneSolution { av, hh })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> (ModelParams<f64>, SolverConfig<f64>) {
        (ModelParams::base(), SolverConfig::default())
    }

    #[test]
    fn follower_small_ratio_goes_to_lower_bound() {
        let (p, s) = base();
        let r = best_response_hv_ah(1.0, 1e-9, &p, &s).unwrap();
        assert!(r.boundary);
        assert!(r.x < 1e-3);
    }

    #[test]
    fn follower_out_of_domain() {
        let (p, s) = base();
        assert!(best_response_hv_ah(0.0, 1.0, &p, &s).is_err());
        assert!(best_response_hv_ah(2.5, 1.0, &p, &s).is_err());
    }

    #[test]
    fn follower_is_deterministic() {
        let (p, s) = base();
        let a = best_response_hv_ah(1.1, 0.8, &p, &s).unwrap();
        let b = best_response_hv_ah(1.1, 0.8, &p, &s).unwrap();
        assert_eq!(a.x.to_bits(), b.x.to_bits());
    }

    #[test]
    fn nash_is_symmetric_and_interior() {
        let (p, s) = base();
        let n = nash_hh(&p, &s).unwrap();
        assert!((n.c1 - n.c2).abs() <= s.care_tolerance);
        assert!(!n.boundary);
        assert!(n.c1 > 0.1 && n.c1 < 1.9);
    }

    #[test]
    fn stackelberg_rejects_boundary_markets() {
        let (p, s) = base();
        assert!(stackelberg_ah(1.0, 0.0, &p, &s).is_err());
        assert!(stackelberg_ah(1.0, 1.0, &p, &s).is_err());
        assert!(stackelberg_ah(11.0, 0.5, &p, &s).is_err());
    }

    #[test]
    fn pure_av_without_loss_weight_goes_to_lower_bound() {
        let (p, s) = base();
        let q = ModelParams {
            w_a_loss: 1e-12,
            ..p
        };
        let o = pure_av_optimum(&q, &s).unwrap();
        assert!(o.boundary);
        assert!(o.x < 0.01);
    }

    #[test]
    fn exclusive_at_full_penetration_is_pure_av() {
        let (p, s) = base();
        let e = exclusive_lanes_equilibrium(1.0, &p, &s).unwrap();
        let pure = pure_av_optimum(&p, &s).unwrap();
        assert!((e.av.x - pure.x).abs() < 1e-9);
    }
}
