//! Lawmaker level: social cost as a function of the standard ratio `k`, the
//! Frank-Wolfe descent on `k`, and `k` sweeps.

use crate::equilibrium::{nash_hh, stackelberg_ah, NashSolution, SolverConfig, StackelbergSolution};
use crate::error::{domain, Error, Result};
use crate::model::{BoundaryFlags, CareProfile, Diagnostics, EquilibriumReport, ModelParams};
use crate::numeric::grid_argmin;
use crate::Scalar;

/// Settings of the descent on `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrankWolfeConfig<S> {
    /// Stop once `|k_{n+1} - k_n|` falls to this.
    pub tolerance: S,
    pub max_iterations: usize,
    /// Gradient step is `max(min_step, relative_step * k)`.
    pub min_step: S,
    pub relative_step: S,
}

impl<S: Scalar> Default for FrankWolfeConfig<S> {
    fn default() -> Self {
        Self {
            tolerance: S::lit(1e-4),
            max_iterations: 10_000,
            min_step: S::lit(1e-4),
            relative_step: S::lit(1e-4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawmakerStep<S> {
    pub iteration: usize,
    pub k: S,
    pub social_cost: S,
    pub gradient: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawmakerTrace<S> {
    /// One entry per gradient evaluation, in iteration order.
    pub steps: Vec<LawmakerStep<S>>,
    pub k_star: S,
    pub social_cost: S,
    pub converged: bool,
    /// The final iterate sits on a bound of the feasible interval.
    pub boundary: bool,
}

impl<S> LawmakerTrace<S> {
    /// Number of gradient iterations taken.
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }
}

fn tag<T>(k: f64, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::AtRatio { .. } => e,
        other => Error::AtRatio {
            k,
            source: Box::new(other),
        },
    })
}

fn check_market<S: Scalar>(k: S, p: S, params: &ModelParams<S>) -> Result<()> {
    if !(p > S::zero() && p < S::one()) {
        return Err(domain("p", p, "in (0, 1) for the mixed market"));
    }
    if !(k > S::zero() && k <= params.k_max) {
        return Err(domain("k", k, "in (0, k_max]"));
    }
    Ok(())
}

/// Assembles the full report from solved lower games.
pub fn report_from_games<S: Scalar>(
    hh: &NashSolution<S>,
    ah: &StackelbergSolution<S>,
    k: S,
    p: S,
    params: &ModelParams<S>,
) -> Result<EquilibriumReport<S>> {
    let profile = CareProfile {
        c_h1_hh: hh.c1,
        c_h2_hh: hh.c2,
        c_h_ah: ah.c_h,
        c_a: ah.c_a,
        k,
    };
    let diagnostics = Diagnostics {
        hh_iterations: hh.iterations,
        hh_residual: hh.residual.as_f64(),
        leader_evaluations: ah.leader.evaluations,
        follower_residual: ah.follower.residual.as_f64(),
        boundary: BoundaryFlags {
            hv_hh: hh.boundary,
            hv_ah: ah.follower.boundary,
            av: ah.leader.boundary,
        },
        leader_tie: ah.leader.tie,
        ..Diagnostics::default()
    };
    EquilibriumReport::assemble(profile, p, params, diagnostics)
}

/// Lower-level equilibrium at ratio `k` with an already solved HV-HV game.
pub fn lower_equilibrium_with<S: Scalar>(
    hh: &NashSolution<S>,
    k: S,
    p: S,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
) -> Result<EquilibriumReport<S>> {
    tag(k.as_f64(), check_market(k, p, params))?;
    let ah = tag(k.as_f64(), stackelberg_ah(k, p, params, solver))?;
    report_from_games(hh, &ah, k, p, params)
}

/// Lower-level equilibrium (both HV-HV and AV-HV games) at ratio `k`.
pub fn lower_equilibrium<S: Scalar>(
    k: S,
    p: S,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
) -> Result<EquilibriumReport<S>> {
    let hh = tag(k.as_f64(), nash_hh(params, solver))?;
    lower_equilibrium_with(&hh, k, p, params, solver)
}

pub fn social_cost_of_k<S: Scalar>(
    k: S,
    p: S,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
) -> Result<S> {
    lower_equilibrium(k, p, params, solver).map(|r| r.social_cost)
}

/// Projected descent `k <- clamp(k - gamma_n * dSC/dk, lo, hi)` with
/// `gamma_n = 2 / (n + 2)` on an arbitrary objective.
pub fn frank_wolfe<S: Scalar, F: FnMut(S) -> Result<S>>(
    mut objective: F,
    k0: S,
    bounds: (S, S),
    config: &FrankWolfeConfig<S>,
) -> Result<LawmakerTrace<S>> {
    let (lo, hi) = bounds;
    if !(k0 >= lo && k0 <= hi) {
        return Err(domain("k_0", k0, "inside the feasible ratio interval"));
    }
    let mut steps = Vec::new();
    let mut k = k0;
    let mut converged = false;
    for n in 0..config.max_iterations {
        let h = config.min_step.max(config.relative_step * k);
        // One-sided near the bounds so the objective is never asked for an
        // infeasible ratio.
        let (a, b) = ((k - h).max(lo), (k + h).min(hi));
        let f_a = tag(a.as_f64(), objective(a))?;
        let f_b = tag(b.as_f64(), objective(b))?;
        let gradient = (f_b - f_a) / (b - a);
        let value = tag(k.as_f64(), objective(k))?;
        steps.push(LawmakerStep {
            iteration: n,
            k,
            social_cost: value,
            gradient,
        });
        let gamma = S::two() / S::from_usize(n + 2).unwrap_or_else(S::one);
        let next = (k - gamma * gradient).max(lo).min(hi);
        let moved = (next - k).abs();
        k = next;
        if moved <= config.tolerance {
            converged = true;
            break;
        }
    }
    let social_cost = tag(k.as_f64(), objective(k))?;
    let boundary = k <= lo || k >= hi;
    Ok(LawmakerTrace {
        steps,
        k_star: k,
        social_cost,
        converged,
        boundary,
    })
}

/// Lawmaker optimum over `k` at penetration `p`, starting from `k0`.
pub fn optimize_k_frank_wolfe<S: Scalar>(
    p: S,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
    k0: S,
) -> Result<LawmakerTrace<S>> {
    optimize_k_frank_wolfe_with(p, params, solver, k0, &FrankWolfeConfig::default())
}

pub fn optimize_k_frank_wolfe_with<S: Scalar>(
    p: S,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
    k0: S,
    config: &FrankWolfeConfig<S>,
) -> Result<LawmakerTrace<S>> {
    if !(k0 > S::zero() && k0 <= params.k_max) {
        return Err(domain("k_0", k0, "in (0, k_max]"));
    }
    if !(p > S::zero() && p < S::one()) {
        return Err(domain("p", p, "in (0, 1) for the mixed market"));
    }
    let hh = nash_hh(params, solver)?;
    let (lo, _) = params.ratio_search_interval();
    frank_wolfe(
        |k| lower_equilibrium_with(&hh, k, p, params, solver).map(|r| r.social_cost),
        k0,
        (lo, params.k_max),
        config,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSweep<S> {
    /// One report per grid ratio, in grid order.
    pub reports: Vec<EquilibriumReport<S>>,
    pub argmin: usize,
}

impl<S: Scalar> KSweep<S> {
    pub fn k_star(&self) -> S {
        self.reports[self.argmin].profile.k
    }
}

/// Social cost over a grid of ratios at penetration `p`.
pub fn k_sweep<S: Scalar>(
    p: S,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
    k_grid: &[S],
) -> Result<KSweep<S>> {
    if k_grid.is_empty() {
        return Err(Error::Config("k grid is empty".into()));
    }
    let hh = nash_hh(params, solver)?;
    let reports = k_grid
        .iter()
        .map(|&k| lower_equilibrium_with(&hh, k, p, params, solver))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<S> = reports.iter().map(|r| r.social_cost).collect();
    let m = grid_argmin(k_grid, &values, S::zero());
    Ok(KSweep {
        reports,
        argmin: m.index,
    })
}
