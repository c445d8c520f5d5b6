//! Experiment suite: penetration sweeps, sensitivity analyses, exclusive
//! lanes, heterogeneous drivers and endogenous penetration.

mod endogenous;
mod montecarlo;

pub use endogenous::{
    av_related_loss_at, endogenous_fixed_points, EndogenousResult, FixedPoint, ETA_PRESET_NARRATED,
    ETA_PRESET_TABLE,
};
pub use montecarlo::{
    heterogeneous_mc, sample_weights, HeterogeneityConfig, HeterogeneityResult, HeterogeneousPoint,
    HistogramBin,
};

use crate::equilibrium::{
    exclusive_lanes_equilibrium, nash_hh, pure_av_optimum, NashSolution, SolverConfig,
};
use crate::error::{domain, Error, Result};
use crate::hierarchy::{lower_equilibrium_with, optimize_k_frank_wolfe, LawmakerTrace};
use crate::model::{
    BoundaryFlags, CareProfile, Diagnostics, EncounterWeights, Encounter, EquilibriumReport,
    ModelParams,
};
use crate::numeric::linspace;
use crate::Scalar;

/// How the lawmaker picks `k` at each market.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KPolicy<S> {
    Fixed(S),
    /// Frank-Wolfe descent from `k0`, solved independently per market.
    Strategic { k0: S },
}

impl<S: Scalar> KPolicy<S> {
    pub fn strategic() -> Self {
        KPolicy::Strategic { k0: S::one() }
    }
}

/// Summary of the lawmaker descent behind a strategic record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawmakerSummary<S> {
    pub k_star: S,
    pub iterations: usize,
    pub converged: bool,
    pub boundary: bool,
}

impl<S: Scalar> From<&LawmakerTrace<S>> for LawmakerSummary<S> {
    fn from(t: &LawmakerTrace<S>) -> Self {
        Self {
            k_star: t.k_star,
            iterations: t.iterations(),
            converged: t.converged,
            boundary: t.boundary,
        }
    }
}

/// Measures of the pure AV market, used as constant comparison lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureAvBaseline<S> {
    pub c_a: S,
    pub social_cost: S,
    pub total_rate: S,
    pub total_loss: S,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoralHazard<S> {
    pub flag: bool,
    /// `c_H^HH - c_H^AH`.
    pub margin: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord<S> {
    pub variable: &'static str,
    pub value: S,
    pub report: EquilibriumReport<S>,
    pub pure_av: PureAvBaseline<S>,
    pub moral_hazard: MoralHazard<S>,
    pub lawmaker: Option<LawmakerSummary<S>>,
}

/// `{0.01, 0.02, ..., 0.99}`.
pub fn default_p_grid<S: Scalar>() -> Vec<S> {
    (1..=99).map(|i| S::lit(i as f64 / 100.0)).collect()
}

/// Inclusive grid `start, start + step, ...` up to `stop` (with a small
/// allowance for rounding of the last point). Points are snapped to 12
/// decimals so `0.1:0.5:0.1` prints as written.
pub fn step_grid<S: Scalar>(start: S, stop: S, step: S) -> Result<Vec<S>> {
    if !(step > S::zero()) || !(stop >= start) {
        return Err(Error::Config(format!(
            "grid {start}:{stop}:{step} needs step > 0 and stop >= start"
        )));
    }
    let n = ((stop - start) / step + S::lit(1e-9)).floor().to_usize().unwrap_or(0);
    let snap = S::lit(1e12);
    Ok((0..=n)
        .map(|i| start + step * S::from_usize(i).unwrap_or_else(S::zero))
        .map(|x| (x * snap).round() / snap)
        .collect())
}

/// Moral hazard: the HV takes less care facing an AV than facing an HV.
pub fn detect_moral_hazard<S: Scalar>(report: &EquilibriumReport<S>, tolerance: S) -> MoralHazard<S> {
    let margin = report.profile.c_h1_hh - report.profile.c_h_ah;
    MoralHazard {
        flag: report.profile.c_h_ah < report.profile.c_h1_hh - tolerance,
        margin,
    }
}

/// Pure AV market evaluated at `p = 1`.
pub fn pure_av_baseline<S: Scalar>(params: &ModelParams<S>, solver: &SolverConfig<S>) -> Result<PureAvBaseline<S>> {
    let opt = pure_av_optimum(params, solver)?;
    let report = EquilibriumReport::assemble(
        CareProfile::uniform(opt.x, S::one()),
        S::one(),
        params,
        Diagnostics::default(),
    )?;
    Ok(PureAvBaseline {
        c_a: opt.x,
        social_cost: report.social_cost,
        total_rate: report.total_rate,
        total_loss: report.total_loss,
    })
}

pub(crate) fn check_grid<S: Scalar>(grid: &[S]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("p grid is empty".into()));
    }
    for &p in grid {
        if !(p > S::zero() && p < S::one()) {
            return Err(domain("p", p, "in (0, 1) for the mixed market"));
        }
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("p grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Lower equilibrium at one market under `policy`, with the HV-HV game
/// already solved.
pub fn solve_market<S: Scalar>(
    hh: &NashSolution<S>,
    p: S,
    policy: KPolicy<S>,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
) -> Result<(EquilibriumReport<S>, Option<LawmakerSummary<S>>)> {
    match policy {
        KPolicy::Fixed(k) => Ok((lower_equilibrium_with(hh, k, p, params, solver)?, None)),
        KPolicy::Strategic { k0 } => {
            let trace = optimize_k_frank_wolfe(p, params, solver, k0)?;
            let report = lower_equilibrium_with(hh, trace.k_star, p, params, solver)?;
            Ok((report, Some(LawmakerSummary::from(&trace))))
        }
    }
}

/// Mixed-market equilibrium at every `p` of the grid.
pub fn penetration_sweep<S: Scalar>(
    p_grid: &[S],
    policy: KPolicy<S>,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
) -> Result<Vec<SweepRecord<S>>> {
    let mut out = Vec::with_capacity(p_grid.len());
    penetration_sweep_into(p_grid, policy, params, solver, &mut out)?;
    Ok(out)
}

/// As [`penetration_sweep`], appending to `out` so the records solved before a
/// failure remain available to the caller.
pub fn penetration_sweep_into<S: Scalar>(
    p_grid: &[S],
    policy: KPolicy<S>,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
    out: &mut Vec<SweepRecord<S>>,
) -> Result<()> {
    params.validate()?;
    solver.validate()?;
    check_grid(p_grid)?;
    let hh = nash_hh(params, solver)?;
    let pure_av = pure_av_baseline(params, solver)?;
    for &p in p_grid {
        let (report, lawmaker) = solve_market(&hh, p, policy, params, solver)?;
        out.push(SweepRecord {
            variable: "p",
            value: p,
            moral_hazard: detect_moral_hazard(&report, solver.care_tolerance),
            report,
            pure_av,
            lawmaker,
        });
    }
    Ok(())
}

/// Parameters a sensitivity sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SensitivityParameter {
    Alpha,
    AvEnv,
    HvEnv,
    WaSen,
    WaLoss,
}

impl SensitivityParameter {
    pub const ALL: [SensitivityParameter; 5] = [
        SensitivityParameter::Alpha,
        SensitivityParameter::AvEnv,
        SensitivityParameter::HvEnv,
        SensitivityParameter::WaSen,
        SensitivityParameter::WaLoss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SensitivityParameter::Alpha => "alpha",
            SensitivityParameter::AvEnv => "a",
            SensitivityParameter::HvEnv => "h",
            SensitivityParameter::WaSen => "w_a_sen",
            SensitivityParameter::WaLoss => "w_a_loss",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Copy of `params` with this parameter set to `value`.
    pub fn apply<S: Scalar>(self, params: &ModelParams<S>, value: S) -> ModelParams<S> {
        let mut q = *params;
        match self {
            SensitivityParameter::Alpha => q.alpha = value,
            SensitivityParameter::AvEnv => q.av_env = value,
            SensitivityParameter::HvEnv => q.hv_env = value,
            SensitivityParameter::WaSen => q.w_a_sen = value,
            SensitivityParameter::WaLoss => q.w_a_loss = value,
        }
        q
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityCurve<S> {
    pub parameter: SensitivityParameter,
    pub value: S,
    pub records: Vec<SweepRecord<S>>,
}

/// One penetration sweep per value of `parameter`.
pub fn sensitivity_sweep<S: Scalar>(
    parameter: SensitivityParameter,
    values: &[S],
    p_grid: &[S],
    policy: KPolicy<S>,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
) -> Result<Vec<SensitivityCurve<S>>> {
    values
        .iter()
        .map(|&v| {
            let q = parameter.apply(params, v);
            Ok(SensitivityCurve {
                parameter,
                value: v,
                records: penetration_sweep(p_grid, policy, &q, solver)?,
            })
        })
        .collect()
}

/// Exclusive-lane equilibrium at every `p`. The AV-HV encounter is absent, so
/// its loss, precaution cost and crash rate carry zero weight.
pub fn exclusive_lane_sweep<S: Scalar>(
    p_grid: &[S],
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
) -> Result<Vec<SweepRecord<S>>> {
    params.validate()?;
    solver.validate()?;
    check_grid(p_grid)?;
    let pure_av = pure_av_baseline(params, solver)?;
    p_grid
        .iter()
        .map(|&p| {
            let sol = exclusive_lanes_equilibrium(p, params, solver)?;
            let profile = CareProfile {
                c_h1_hh: sol.hh.c1,
                c_h2_hh: sol.hh.c2,
                // No AV-HV encounters: the HV keeps its HV-HV care.
                c_h_ah: sol.hh.c1,
                c_a: sol.av.x,
                k: S::one(),
            };
            let diagnostics = Diagnostics {
                hh_iterations: sol.hh.iterations,
                hh_residual: sol.hh.residual.as_f64(),
                leader_evaluations: sol.av.evaluations,
                boundary: BoundaryFlags {
                    hv_hh: sol.hh.boundary,
                    hv_ah: false,
                    av: sol.av.boundary,
                },
                leader_tie: sol.av.tie,
                ..Diagnostics::default()
            };
            let report = EquilibriumReport::assemble_weighted(
                profile,
                p,
                EncounterWeights::exclusive_lanes(p)?,
                params,
                diagnostics,
            )?;
            Ok(SweepRecord {
                variable: "p",
                value: p,
                moral_hazard: MoralHazard {
                    flag: false,
                    margin: S::zero(),
                },
                report,
                pure_av,
                lawmaker: None,
            })
        })
        .collect()
}

/// Per-record crash rate of an encounter type.
pub fn crash_rate<S: Scalar>(record: &SweepRecord<S>, enc: Encounter) -> S {
    record.report.scenario(enc).crash_rate
}

/// Evenly spaced interior grid of `n` points on `(0, 1)`.
pub(crate) fn open_unit_grid<S: Scalar>(n: usize) -> Vec<S> {
    let step = S::one() / S::from_usize(n + 1).unwrap_or_else(S::one);
    linspace(step, S::one() - step, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = default_p_grid::<f64>();
        assert_eq!(g.len(), 99);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[98], 0.99);
    }

    #[test]
    fn step_grid_includes_stop() {
        let g = step_grid(0.1f64, 0.3, 0.1).unwrap();
        assert_eq!(g, vec![0.1, 0.2, 0.3]);
        assert_eq!(g.len(), 3);
        assert!((g[2] - 0.3).abs() < 1e-12);
        assert!(step_grid(0.1, 0.3, 0.0).is_err());
        assert!(step_grid(0.3, 0.1, 0.1).is_err());
    }

    #[test]
    fn identical_cares_have_no_moral_hazard() {
        let par = ModelParams::<f64>::base();
        let r = EquilibriumReport::assemble(CareProfile::uniform(0.7, 1.0), 0.5, &par, Diagnostics::default())
            .unwrap();
        let m = detect_moral_hazard(&r, 1e-6);
        assert!(!m.flag);
        assert_eq!(m.margin, 0.0);
    }

    #[test]
    fn single_point_sweep() {
        let par = ModelParams::<f64>::base();
        let s = SolverConfig::default();
        let r = penetration_sweep(&[0.5], KPolicy::Fixed(1.0), &par, &s).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].moral_hazard.flag);
    }

    #[test]
    fn sweep_rejects_closed_endpoints() {
        let par = ModelParams::<f64>::base();
        let s = SolverConfig::default();
        assert!(penetration_sweep(&[0.0, 0.5], KPolicy::Fixed(1.0), &par, &s).is_err());
        assert!(penetration_sweep(&[0.5, 1.0], KPolicy::Fixed(1.0), &par, &s).is_err());
        assert!(penetration_sweep(&[], KPolicy::Fixed(1.0), &par, &s).is_err());
    }

    #[test]
    fn sensitivity_parameter_roundtrip() {
        for p in SensitivityParameter::ALL {
            assert_eq!(SensitivityParameter::parse(p.name()), Some(p));
        }
        let par = ModelParams::<f64>::base();
        assert_eq!(SensitivityParameter::AvEnv.apply(&par, 15.0).av_env, 15.0);
    }

    #[test]
    fn exclusive_lanes_have_no_mixed_rate() {
        let par = ModelParams::<f64>::base();
        let s = SolverConfig::default();
        let r = exclusive_lane_sweep(&[0.4], &par, &s).unwrap();
        assert_eq!(crash_rate(&r[0], Encounter::AvHv), 0.0);
    }

    #[test]
    fn open_unit_grid_is_interior() {
        let g = open_unit_grid::<f64>(9);
        assert_eq!(g.len(), 9);
        assert!((g[0] - 0.1).abs() < 1e-12 && (g[8] - 0.9).abs() < 1e-12);
    }
}
