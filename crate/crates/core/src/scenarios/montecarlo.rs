//! Heterogeneous human drivers: trade-off weights drawn from a truncated
//! normal, one best response per sampled driver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::equilibrium::search::minimize_scanned;
use crate::equilibrium::{best_response_hv_ah_weighted, stackelberg_ah, SolverConfig};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scenarios::check_grid;
use crate::Scalar;

/// Draws per sample before the truncation is declared unsatisfiable.
const MAX_REJECTIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeterogeneityConfig<S> {
    pub mean: S,
    pub std_dev: S,
    /// Samples outside the open interval `(lower, upper)` are rejected.
    pub lower: S,
    pub upper: S,
    pub samples: usize,
    pub seed: u64,
    /// Ratio at which the games are solved.
    pub k: S,
}

impl<S: Scalar> Default for HeterogeneityConfig<S> {
    fn default() -> Self {
        Self {
            mean: S::half(),
            std_dev: S::lit(0.1),
            lower: S::zero(),
            upper: S::one(),
            samples: 1000,
            seed: 42,
            k: S::one(),
        }
    }
}

impl<S: Scalar> HeterogeneityConfig<S> {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.lower >= S::zero() && self.upper <= S::one() && self.lower < self.upper) {
            bad.push(format!(
                "truncation ({}, {}) must lie in [0, 1] with lower < upper",
                self.lower, self.upper
            ));
        }
        if !(self.std_dev >= S::zero() && self.std_dev.is_finite()) {
            bad.push(format!("std_dev = {} must be >= 0", self.std_dev));
        }
        if !self.mean.is_finite() {
            bad.push(format!("mean = {} must be finite", self.mean));
        }
        if self.samples == 0 {
            bad.push("samples must be >= 1".into());
        }
        if !(self.k > S::zero()) {
            bad.push(format!("k = {} must be > 0", self.k));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }
}

/// Sample `i` is drawn from its own stream seeded with `seed + i`, so the
/// draws do not depend on evaluation order.
pub fn sample_weights<S: Scalar>(config: &HeterogeneityConfig<S>) -> Result<Vec<S>> {
    config.validate()?;
    let normal = Normal::new(config.mean.as_f64(), config.std_dev.as_f64())
        .map_err(|e| Error::Config(format!("normal distribution: {e}")))?;
    let (lo, hi) = (config.lower.as_f64(), config.upper.as_f64());
    (0..config.samples)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(i as u64));
            for _ in 0..MAX_REJECTIONS {
                let w = normal.sample(&mut rng);
                if w > lo && w < hi {
                    return Ok(S::lit(w));
                }
            }
            Err(Error::Config(format!(
                "no sample of N({}, {}) accepted in ({lo}, {hi})",
                config.mean, config.std_dev
            )))
        })
        .collect()
}

/// Mean that is exact when every value is equal.
fn stable_mean<S: Scalar>(v: &[S]) -> S {
    let x0 = v[0];
    let n = S::from_usize(v.len()).unwrap_or_else(S::one);
    x0 + v.iter().fold(S::zero(), |acc, &x| acc + (x - x0)) / n
}

fn std_dev<S: Scalar>(v: &[S], mean: S) -> S {
    if v.len() < 2 {
        return S::zero();
    }
    let n = S::from_usize(v.len() - 1).unwrap_or_else(S::one);
    (v.iter().fold(S::zero(), |acc, &x| acc + (x - mean) * (x - mean)) / n).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeterogeneousPoint<S> {
    pub p: S,
    pub c_a: S,
    pub c_a_homogeneous: S,
    /// Mean and sample standard deviation of the sampled HVs' AV-HV care.
    pub c_h_mean: S,
    pub c_h_std: S,
    pub c_h_homogeneous: S,
    /// `E[L_AH s_A]` over the sampled drivers at the equilibrium `c_A`.
    pub share_loss_mean: S,
    /// Standard error of `share_loss_mean`.
    pub share_loss_se: S,
}

impl<S: Scalar> HeterogeneousPoint<S> {
    /// `|c_A^het / c_A^hom - 1|`.
    pub fn relative_deviation(&self) -> S {
        (self.c_a / self.c_a_homogeneous - S::one()).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin<S> {
    pub lower: S,
    pub upper: S,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeterogeneityResult<S> {
    pub points: Vec<HeterogeneousPoint<S>>,
    pub weights: Vec<S>,
    pub histogram: Vec<HistogramBin<S>>,
}

fn histogram<S: Scalar>(v: &[S], lo: S, hi: S, bins: usize) -> Vec<HistogramBin<S>> {
    let width = (hi - lo) / S::from_usize(bins).unwrap_or_else(S::one);
    let mut out: Vec<HistogramBin<S>> = (0..bins)
        .map(|i| {
            let i = S::from_usize(i).unwrap_or_else(S::zero);
            HistogramBin {
                lower: lo + width * i,
                upper: lo + width * (i + S::one()),
                count: 0,
            }
        })
        .collect();
    for &x in v {
        let b = ((x - lo) / width).floor().to_usize().unwrap_or(0).min(bins - 1);
        out[b].count += 1;
    }
    out
}

/// Follower responses of every sampled driver to `c_a`.
fn responses<S: Scalar>(
    c_a: S,
    k: S,
    weights: &[S],
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
) -> Result<Vec<S>> {
    weights
        .iter()
        .map(|&w| best_response_hv_ah_weighted(c_a, k, w, params, solver).map(|o| o.x))
        .collect()
}

/// Manufacturer optimum against a population of heterogeneous drivers at
/// every `p` of the grid, with the homogeneous solution alongside.
pub fn heterogeneous_mc<S: Scalar>(
    config: &HeterogeneityConfig<S>,
    p_grid: &[S],
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
) -> Result<HeterogeneityResult<S>> {
    params.validate()?;
    solver.validate()?;
    check_grid(p_grid)?;
    let weights = sample_weights(config)?;
    let k = config.k;
    let mut points = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let hom = stackelberg_ah(k, p, params, solver)?;
        let (lo, hi) = params.av_search_interval();
        let leader = minimize_scanned(
            |c_a| {
                let cs = responses(c_a, k, &weights, params, solver)?;
                let share: Vec<S> = cs.iter().map(|&c_h| params.av_mixed_loss_share(c_a, c_h, k)).collect();
                Ok(params.manufacturer_cost_with_share(c_a, stable_mean(&share), p))
            },
            lo,
            hi,
            solver.grid_resolution,
            solver.care_tolerance * S::lit(1e-3),
        )?;
        let cs = responses(leader.x, k, &weights, params, solver)?;
        let share: Vec<S> = cs.iter().map(|&c_h| params.av_mixed_loss_share(leader.x, c_h, k)).collect();
        let c_h_mean = stable_mean(&cs);
        let share_loss_mean = stable_mean(&share);
        let n = S::from_usize(share.len()).unwrap_or_else(S::one);
        points.push(HeterogeneousPoint {
            p,
            c_a: leader.x,
            c_a_homogeneous: hom.c_a,
            c_h_mean,
            c_h_std: std_dev(&cs, c_h_mean),
            c_h_homogeneous: hom.c_h,
            share_loss_mean,
            share_loss_se: std_dev(&share, share_loss_mean) / n.sqrt(),
        });
    }
    let histogram = histogram(&weights, config.lower, config.upper, 20);
    Ok(HeterogeneityResult {
        points,
        weights,
        histogram,
    })
}
