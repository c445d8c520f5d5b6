//! Numerical verification of the sufficient conditions for existence and
//! uniqueness of the hierarchical equilibrium.
//!
//! Every condition is a sign check of a second derivative (or of the smallest
//! eigenvalue of a symmetrised Jacobian) evaluated by central finite
//! differences on sampled points. A condition passes when it is positive at
//! every sample that could be evaluated.

use crate::equilibrium::config::SolverConfig;
use crate::equilibrium::games::{best_response_hv_ah, nash_hh, stackelberg_ah};
use crate::error::{domain, Result};
use crate::model::{social_cost, CareProfile, ModelParams};
use crate::numeric::{linspace, min_eigen_sym2, second_diff};
use crate::Scalar;

/// Where the conditions are sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SseSampling<S> {
    /// Points per care axis.
    pub care_points: usize,
    /// Points on the ratio axis.
    pub ratio_points: usize,
    /// Fraction of each care interval kept clear of either end.
    pub edge_fraction: S,
    /// Ratio samples span `[k / ratio_span, k * ratio_span]` (clipped to the
    /// feasible interval).
    pub ratio_span: S,
}

impl<S: Scalar> Default for SseSampling<S> {
    fn default() -> Self {
        Self {
            care_points: 25,
            ratio_points: 9,
            edge_fraction: S::lit(0.02),
            ratio_span: S::two(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck<S> {
    pub name: &'static str,
    pub passed: bool,
    /// Smallest second derivative or eigenvalue seen; infinite if no sample
    /// could be evaluated.
    pub min_value: S,
    /// Care (or ratio) coordinates of the minimum.
    pub argmin: (S, S),
    pub samples: usize,
    /// Samples whose evaluation failed; these count against `passed`.
    pub failures: Vec<String>,
}

impl<S: Scalar> ConditionCheck<S> {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            passed: false,
            min_value: S::infinity(),
            argmin: (S::nan(), S::nan()),
            samples: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, value: S, at: (S, S)) {
        self.samples += 1;
        if !(value >= self.min_value) {
            self.min_value = value;
            self.argmin = at;
        }
    }

    fn finish(mut self) -> Self {
        self.passed = self.failures.is_empty() && self.samples > 0 && self.min_value > S::zero();
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SseReport<S> {
    pub k: S,
    pub p: S,
    /// Follower convexity, leader convexity along the follower response,
    /// lawmaker convexity along the chain, HV-HV monotonicity.
    pub conditions: [ConditionCheck<S>; 4],
}

impl<S: Scalar> SseReport<S> {
    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn flags(&self) -> [bool; 4] {
        [0, 1, 2, 3].map(|i| self.conditions[i].passed)
    }
}

fn interior<S: Scalar>(lo: S, hi: S, n: usize, edge: S) -> Vec<S> {
    let gap = (hi - lo) * edge;
    linspace(lo + gap, hi - gap, n)
}

/// Checks all four conditions at ratio `k` and penetration `p` with the
/// default sampling.
pub fn check_sse_conditions<S: Scalar>(
    k: S,
    p: S,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
) -> Result<SseReport<S>> {
    check_sse_conditions_sampled(k, p, params, solver, &SseSampling::default())
}

pub fn check_sse_conditions_sampled<S: Scalar>(
    k: S,
    p: S,
    params: &ModelParams<S>,
    solver: &SolverConfig<S>,
    sampling: &SseSampling<S>,
) -> Result<SseReport<S>> {
    params.validate()?;
    solver.validate()?;
    if !(p > S::zero() && p < S::one()) {
        return Err(domain("p", p, "in (0, 1)"));
    }
    if !(k > S::zero() && k <= params.k_max) {
        return Err(domain("k", k, "in (0, k_max]"));
    }
    let h = solver.fd_step;
    // Responses are only accurate to the solver tolerance, so chained
    // derivatives use a wider step to keep the truncation noise small.
    let h_chain = h * S::lit(10.0);
    let (h_lo, h_hi) = params.hv_search_interval();
    let (a_lo, a_hi) = params.av_search_interval();
    let hv = interior(h_lo, h_hi, sampling.care_points, sampling.edge_fraction);
    let av = interior(a_lo, a_hi, sampling.care_points, sampling.edge_fraction);

    let mut c1 = ConditionCheck::new("follower convexity d2 C_H^AH / dc_H^2 > 0");
    for &c_a in &av {
        for &c_h in &hv {
            let d2 = second_diff(|x| params.hv_cost_ah(x, c_a, k), c_h, h);
            c1.record(d2, (c_h, c_a));
        }
    }

    let mut c2 = ConditionCheck::new("leader convexity d2 C_A(c_A, m(c_A)) / dc_A^2 > 0");
    for &c_a in &av {
        let eval = |x: S| -> Result<S> {
            let f = best_response_hv_ah(x, k, params, solver)?;
            Ok(params.manufacturer_cost(x, f.x, k, p))
        };
        match (eval(c_a - h_chain), eval(c_a), eval(c_a + h_chain)) {
            (Ok(m), Ok(c), Ok(pl)) => c2.record((pl - S::two() * c + m) / (h_chain * h_chain), (c_a, k)),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => c2.failures.push(format!("c_A={c_a}: {e}")),
        }
    }

    let mut c3 = ConditionCheck::new("lawmaker convexity d2 SC / dk^2 > 0");
    let hh = nash_hh(params, solver);
    match hh {
        Ok(hh) => {
            // SC is only accurate to the leader tolerance; a second difference
            // needs a ratio step far above that noise floor.
            let h_ratio = h * S::lit(100.0);
            let (k_lo, k_hi) = params.ratio_search_interval();
            let lo = (k / sampling.ratio_span).max(k_lo + h_ratio);
            let hi = (k * sampling.ratio_span).min(k_hi * (S::one() - h_ratio) - h_ratio);
            let ks = if sampling.ratio_points <= 1 || hi <= lo {
                vec![k.max(lo).min(hi.max(lo))]
            } else {
                linspace(lo, hi, sampling.ratio_points)
            };
            let sc_of = |kk: S| -> Result<S> {
                let st = stackelberg_ah(kk, p, params, solver)?;
                let profile = CareProfile {
                    c_h1_hh: hh.c1,
                    c_h2_hh: hh.c2,
                    c_h_ah: st.c_h,
                    c_a: st.c_a,
                    k: kk,
                };
                social_cost(&profile, p, params)
            };
            for &kk in &ks {
                let step = h_ratio * kk.max(S::one());
                match (sc_of(kk - step), sc_of(kk), sc_of(kk + step)) {
                    (Ok(m), Ok(c), Ok(pl)) => c3.record((pl - S::two() * c + m) / (step * step), (kk, S::zero())),
                    (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => c3.failures.push(format!("k={kk}: {e}")),
                }
            }
        }
        Err(e) => c3.failures.push(format!("HV-HV game: {e}")),
    }

    let mut c4 = ConditionCheck::new("HV-HV monotonicity min eig(J + J^T) > 0");
    for &x in &hv {
        for &y in &hv {
            // J_ij = d/dc_j (dC_i/dc_i); the game is symmetric so C_2(x, y) = C_1(y, x).
            let d11 = second_diff(|c| params.hv_cost_hh(c, y), x, h);
            let d22 = second_diff(|c| params.hv_cost_hh(c, x), y, h);
            let d12 = mixed_diff(|a, b| params.hv_cost_hh(a, b), x, y, h);
            let d21 = mixed_diff(|a, b| params.hv_cost_hh(a, b), y, x, h);
            let off = (d12 + d21) * S::half();
            c4.record(min_eigen_sym2(S::two() * d11, S::two() * off, S::two() * d22), (x, y));
        }
    }

    Ok(SseReport {
        k,
        p,
        conditions: [c1.finish(), c2.finish(), c3.finish(), c4.finish()],
    })
}

/// Central estimate of `d2 f / dx dy`.
fn mixed_diff<S: Scalar, F: Fn(S, S) -> S>(f: F, x: S, y: S, h: S) -> S {
    (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (S::lit(4.0) * h * h)
}
