//! Unilateral-deviation checks of solved equilibria against random alternatives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibrium::config::SolverConfig;
use crate::equilibrium::games::{best_response_hv_ah, NashSolution, StackelbergSolution};
use crate::error::Result;
use crate::model::ModelParams;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationCheck<S> {
    pub samples: usize,
    /// Largest cost reduction any alternative achieved (negative when none did).
    pub best_gain: S,
    pub best_alternative: S,
    /// Gain allowed before the check fails.
    pub slack: S,
}

impl<S: Scalar> DeviationCheck<S> {
    pub fn passed(&self) -> bool {
        self.best_gain <= self.slack
    }
}

fn slack<S: Scalar>(cost: S, solver: &SolverConfig<S>) -> S {
    S::lit(10.0) * solver.care_tolerance * cost.abs().max(S::one())
}

fn uniform_samples<S: Scalar>(lo: S, hi: S, n: usize, seed: u64) -> Vec<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (lo.as_f64(), hi.as_f64());
    (0..n).map(|_| S::lit(rng.random_range(lo..hi))).collect()
}

fn check<S: Scalar>(
    at: S,
    cost: S,
    alternatives: &[S],
    solver: &SolverConfig<S>,
    mut cost_of: impl FnMut(S) -> Result<S>,
) -> Result<DeviationCheck<S>> {
    let mut best_gain = S::neg_infinity();
    let mut best_alternative = at;
    for &c in alternatives {
        let gain = cost - cost_of(c)?;
        if gain > best_gain {
            best_gain = gain;
            best_alternative = c;
        }
    }
    Ok(DeviationCheck {
        samples: alternatives.len(),
        best_gain,
        best_alternative,
        slack: slack(cost, solver),
    })
}

/// Player 1 of the HV-HV game deviating from `nash` (the game is symmetric,
/// so this covers player 2 as well).
pub fn hv_hv_deviation<S: Scalar>(
    nash: &NashSolution<S>,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
    samples: usize,
    seed: u64,
) -> Result<DeviationCheck<S>> {
    let (lo, hi) = params.hv_search_interval();
    let alt = uniform_samples(lo, hi, samples, seed);
    let cost = params.hv_cost_hh(nash.c1, nash.c2);
    check(nash.c1, cost, &alt, solver, |c| Ok(params.hv_cost_hh(c, nash.c2)))
}

/// Follower and leader deviations from a Stackelberg pair. The leader's
/// alternatives are evaluated against the follower's response to them.
pub fn av_hv_deviation<S: Scalar>(
    sol: &StackelbergSolution<S>,
    k: S,
    p: S,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
    samples: usize,
    seed: u64,
) -> Result<(DeviationCheck<S>, DeviationCheck<S>)> {
    let (h_lo, h_hi) = params.hv_search_interval();
    let (a_lo, a_hi) = params.av_search_interval();
    let follower_cost = params.hv_cost_ah(sol.c_h, sol.c_a, k);
    let follower = check(
        sol.c_h,
        follower_cost,
        &uniform_samples(h_lo, h_hi, samples, seed),
        solver,
        |c| Ok(params.hv_cost_ah(c, sol.c_a, k)),
    )?;
    let leader_cost = params.manufacturer_cost(sol.c_a, sol.c_h, k, p);
    let leader = check(
        sol.c_a,
        leader_cost,
        &uniform_samples(a_lo, a_hi, samples, seed.wrapping_add(1)),
        solver,
        |c| {
            let m = best_response_hv_ah(c, k, params, solver)?;
            Ok(params.manufacturer_cost(c, m.x, k, p))
        },
    )?;
    Ok((follower, leader))
}

/// Deviations of a single optimiser with objective `cost_of`.
pub fn single_deviation<S: Scalar>(
    at: S,
    bounds: (S, S),
    solver: &SolverConfig<S>,
    samples: usize,
    seed: u64,
    mut cost_of: impl FnMut(S) -> S,
) -> Result<DeviationCheck<S>> {
    let cost = cost_of(at);
    let alt = uniform_samples(bounds.0, bounds.1, samples, seed);
    check(at, cost, &alt, solver, |c| Ok(cost_of(c)))
}
