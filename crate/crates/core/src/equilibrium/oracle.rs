//! Brute-force enumeration over discretised feasible sets.
//!
//! Used to cross-check the continuous solvers; nothing here shares code with
//! them beyond the closed-form model kernels.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numeric::linspace;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleGame<S> {
    /// Symmetric HV-HV Nash game.
    HvHv,
    /// Manufacturer-led AV-HV game.
    AvHv { k: S, p: S },
    /// Pure AV market.
    PureAv,
    /// Exclusive lanes at penetration `p`.
    ExclusiveLanes { p: S },
}

/// Enumerated equilibrium; fields not relevant to the game are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCare<S> {
    pub c_a: Option<S>,
    pub c_h: Option<S>,
    /// Grid cell width of the AV axis (index 0) and HV axis (index 1).
    pub cell: (S, S),
}

fn argmin_first<S: Scalar>(values: impl Iterator<Item = S>) -> (usize, S) {
    let mut best = (0, S::infinity());
    for (i, v) in values.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best
}

/// Follower argmin by enumeration: the grid, then a second grid of the same
/// size spanning the two cells around the first argmin. The second pass keeps
/// the follower's discretisation error from leaking into the leader objective.
pub(crate) fn follower_enumeration<S: Scalar, F: Fn(S) -> S>(grid: &[S], cost: F) -> S {
    let (i, v) = argmin_first(grid.iter().map(|&c| cost(c)));
    if grid.len() < 3 {
        return grid[i];
    }
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    let fine = linspace(lo, hi, grid.len());
    let (j, w) = argmin_first(fine.iter().map(|&c| cost(c)));
    if w < v {
        fine[j]
    } else {
        grid[i]
    }
}

fn cell<S: Scalar>(grid: &[S]) -> S {
    if grid.len() < 2 {
        S::zero()
    } else {
        grid[1] - grid[0]
    }
}

pub fn grid_oracle_equilibrium<S: Scalar>(
    game: OracleGame<S>,
    params: &ModelParams<S>,
    resolution: usize,
) -> Result<OracleCare<S>> {
    if resolution == 0 {
        return Err(Error::Config("oracle resolution must be >= 1".into()));
    }
    let (h_lo, h_hi) = params.hv_search_interval();
    let (a_lo, a_hi) = params.av_search_interval();
    let hv = linspace(h_lo, h_hi, resolution);
    let av = linspace(a_lo, a_hi, resolution);
    let cells = (cell(&av), cell(&hv));
    match game {
        OracleGame::HvHv => {
            // discrete best response of every grid point, then the grid point
            // closest to being its own best response
            let mut best: Option<(usize, usize)> = None;
            for (j, &c_other) in hv.iter().enumerate() {
                let (i, _) = argmin_first(hv.iter().map(|&c| params.hv_cost_hh(c, c_other)));
                let gap = i.abs_diff(j);
                if best.is_none_or(|(_, g)| gap < g) {
                    best = Some((j, gap));
                }
            }
            let (j, _) = best.expect("non-empty grid");
            Ok(OracleCare {
                c_a: None,
                c_h: Some(hv[j]),
                cell: cells,
            })
        }
        OracleGame::AvHv { k, p } => {
            let mut best = (0, S::infinity(), hv[0]);
            for (i, &c_a) in av.iter().enumerate() {
                let c_h = follower_enumeration(&hv, |c_h| params.hv_cost_ah(c_h, c_a, k));
                let v = params.manufacturer_cost(c_a, c_h, k, p);
                if v < best.1 {
                    best = (i, v, c_h);
                }
            }
            Ok(OracleCare {
                c_a: Some(av[best.0]),
                c_h: Some(best.2),
                cell: cells,
            })
        }
        OracleGame::PureAv => {
            let (i, _) = argmin_first(av.iter().map(|&c| params.pure_av_cost(c)));
            Ok(OracleCare {
                c_a: Some(av[i]),
                c_h: None,
                cell: cells,
            })
        }
        OracleGame::ExclusiveLanes { p } => {
            let (i, _) = argmin_first(av.iter().map(|&c| params.exclusive_lane_cost(c, p)));
            Ok(OracleCare {
                c_a: Some(av[i]),
                c_h: None,
                cell: cells,
            })
        }
    }
}
