//! Fixed points of the endogenous market `p = 1 - eta * L_AV(p)`.

use crate::equilibrium::{nash_hh, NashSolution, SolverConfig};
use crate::error::{domain, Error, Result};
use crate::model::{CareProfile, Diagnostics, EquilibriumReport, ModelParams};
use crate::numeric::bisect;
use crate::scenarios::{open_unit_grid, pure_av_baseline, solve_market, KPolicy, LawmakerSummary};
use crate::Scalar;

/// Sensitivities narrated alongside the fixed-point results.
pub const ETA_PRESET_NARRATED: [f64; 2] = [0.5, 2.0];
/// Sensitivities listed with the parameter settings.
pub const ETA_PRESET_TABLE: [f64; 3] = [1.67, 2.0, 2.86];

const ROOT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint<S> {
    pub p: S,
    /// `g(p*) = p* + eta L_AV(p*) - 1`.
    pub residual: S,
    /// Bracket the root was refined in, with `g` at either end.
    pub bracket: (S, S),
    pub bracket_residuals: (S, S),
    /// `dg/dp` at the root; positive means the adoption map is locally stable.
    pub slope: S,
    pub stable: bool,
    pub report: EquilibriumReport<S>,
    pub lawmaker: Option<LawmakerSummary<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndogenousResult<S> {
    pub eta: S,
    pub roots: Vec<FixedPoint<S>>,
    /// `(p, g(p))` on the scan grid.
    pub scan: Vec<(S, S)>,
}

struct Evaluator<'a, S: Scalar> {
    hh: NashSolution<S>,
    policy: KPolicy<S>,
    params: &'a ModelParams<S>,
    solver: &'a SolverConfig<S>,
}

impl<S: Scalar> Evaluator<'_, S> {
    fn report(&self, p: S) -> Result<(EquilibriumReport<S>, Option<LawmakerSummary<S>>)> {
        if p >= S::one() {
            let base = pure_av_baseline(self.params, self.solver)?;
            let profile = CareProfile {
                c_h1_hh: self.hh.c1,
                c_h2_hh: self.hh.c2,
                c_h_ah: self.hh.c1,
                c_a: base.c_a,
                k: match self.policy {
                    KPolicy::Fixed(k) => k,
                    KPolicy::Strategic { k0 } => k0,
                },
            };
            let r = EquilibriumReport::assemble(profile, S::one(), self.params, Diagnostics::default())?;
            return Ok((r, None));
        }
        solve_market(&self.hh, p, self.policy, self.params, self.solver)
    }

    fn residual(&self, p: S, eta: S) -> Result<S> {
        let (r, _) = self.report(p)?;
        Ok(p + eta * r.av_related_loss() - S::one())
    }
}

/// `L_AV = p^2 L_AA + 2p(1-p) L_AH` at the equilibrium of market `p`.
pub fn av_related_loss_at<S: Scalar>(
    p: S,
    policy: KPolicy<S>,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
) -> Result<S> {
    let ev = Evaluator {
        hh: nash_hh(params, solver)?,
        policy,
        params,
        solver,
    };
    Ok(ev.report(p)?.0.av_related_loss())
}

/// Every market share `p*` in `(0, 1]` consistent with its own AV-related
/// loss, found by scanning `g(p) = p + eta L_AV(p) - 1` on `scan_resolution`
/// interior points plus `p = 1` and bisecting each sign change.
pub fn endogenous_fixed_points<S: Scalar>(
    eta: S,
    policy: KPolicy<S>,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
    scan_resolution: usize,
) -> Result<EndogenousResult<S>> {
    if !(eta >= S::zero() && eta.is_finite()) {
        return Err(domain("eta", eta, ">= 0"));
    }
    if scan_resolution < 2 {
        return Err(Error::Config("endogenous scan needs at least 2 points".into()));
    }
    params.validate()?;
    solver.validate()?;
    let ev = Evaluator {
        hh: nash_hh(params, solver)?,
        policy,
        params,
        solver,
    };
    let mut grid = open_unit_grid::<S>(scan_resolution);
    grid.push(S::one());
    let scan = grid
        .iter()
        .map(|&p| Ok((p, ev.residual(p, eta)?)))
        .collect::<Result<Vec<_>>>()?;

    let tol = S::lit(ROOT_TOLERANCE);
    let mut roots = Vec::new();
    for (i, w) in scan.windows(2).enumerate() {
        let ((p0, g0), (p1, g1)) = (w[0], w[1]);
        // Exact zeros on the grid are claimed by the window that starts there,
        // plus the final point.
        let last = i + 2 == scan.len();
        let (root, bracket) = if g0 == S::zero() {
            (p0, (p0, p0))
        } else if last && g1 == S::zero() {
            (p1, (p1, p1))
        } else if (g0 < S::zero()) != (g1 < S::zero()) && g1 != S::zero() {
            let mut err = None;
            let (x, _) = bisect(
                |p| match ev.residual(p, eta) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        S::zero()
                    }
                },
                p0,
                p1,
                tol,
                200,
            );
            if let Some(e) = err {
                return Err(e);
            }
            (x, (p0, p1))
        } else {
            continue;
        };
        let (report, lawmaker) = ev.report(root)?;
        let residual = root + eta * report.av_related_loss() - S::one();
        let slope = if bracket.1 > bracket.0 {
            (g1 - g0) / (p1 - p0)
        } else {
            // Zero on a grid point: use the neighbouring scan values.
            let j = if root == p0 { i } else { i + 1 };
            let lo = scan[j.saturating_sub(1)];
            let hi = scan[(j + 1).min(scan.len() - 1)];
            if hi.0 > lo.0 {
                (hi.1 - lo.1) / (hi.0 - lo.0)
            } else {
                S::zero()
            }
        };
        roots.push(FixedPoint {
            p: root,
            residual,
            bracket,
            bracket_residuals: (g0, g1),
            slope,
            stable: slope > S::zero(),
            report,
            lawmaker,
        });
    }
    Ok(EndogenousResult { eta, roots, scan })
}
