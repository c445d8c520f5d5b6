//! Closed-form model functions.
//!
//! The free functions validate their arguments. The `ModelParams` methods in
//! this module are the unchecked kernels the solvers call inside their search
//! intervals.

use crate::error::{domain, Result};
use crate::model::params::{check_penetration, Encounter, ModelParams};
use crate::Scalar;

/// Loss share of either AV in an AV-AV crash.
pub const SHARE_AA: f64 = 0.5;

/// Crash severity together with the pre-clamp value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Severity<S> {
    pub value: S,
    pub raw: S,
    pub clamped: bool,
}

/// Value with first and second derivative in a single variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<S> {
    pub v: S,
    pub d1: S,
    pub d2: S,
}

impl<S: Scalar> Jet<S> {
    pub fn constant(v: S) -> Self {
        Self {
            v,
            d1: S::zero(),
            d2: S::zero(),
        }
    }

    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }

    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + S::two() * self.d1 * o.d1 + self.v * o.d2,
        }
    }

    fn scale(self, c: S) -> Self {
        Self {
            v: self.v * c,
            d1: self.d1 * c,
            d2: self.d2 * c,
        }
    }
}

#[inline]
fn share_kernel<S: Scalar>(c_i: S, c_j: S, sigma_i: S, sigma_j: S) -> S {
    let num = sigma_i / c_i;
    num / (num + sigma_j / c_j)
}

impl<S: Scalar> ModelParams<S> {
    #[inline]
    fn prob_coeffs(&self, enc: Encounter) -> (S, S) {
        match enc {
            Encounter::HvHv => (self.hv_env, self.hv_env),
            Encounter::AvHv => (self.av_env, self.hv_env),
            Encounter::AvAv => (self.av_env, self.av_env),
        }
    }

    #[inline]
    fn severity_coeffs(&self, enc: Encounter) -> (S, S) {
        match enc {
            Encounter::HvHv => (self.hv_severity_slope, self.hv_severity_slope),
            Encounter::AvHv => (self.av_severity_slope, self.hv_severity_slope),
            Encounter::AvAv => (self.av_severity_slope, self.av_severity_slope),
        }
    }

    #[inline]
    pub fn prob(&self, enc: Encounter, c1: S, c2: S) -> S {
        let (x, y) = self.prob_coeffs(enc);
        S::one() / (x * c1 + y * c2 + S::one())
    }

    #[inline]
    pub fn severity(&self, enc: Encounter, c1: S, c2: S) -> Severity<S> {
        let (u, v) = self.severity_coeffs(enc);
        let raw = self.max_severity - u * c1 - v * c2;
        let clamped = raw < S::zero();
        Severity {
            value: if clamped { S::zero() } else { raw },
            raw,
            clamped,
        }
    }

    #[inline]
    pub fn loss(&self, enc: Encounter, c1: S, c2: S) -> S {
        self.prob(enc, c1, c2) * self.severity(enc, c1, c2).value
    }

    #[inline]
    pub fn hv_precaution(&self, c_h: S) -> S {
        S::one() / (S::one() - self.beta * c_h) - S::one()
    }

    #[inline]
    pub fn av_sensor(&self, c_a: S, p: S) -> S {
        (S::one() / (S::one() - self.alpha * c_a) - S::one()) / p.sqrt()
    }

    /// Cost of the HV whose care is `c_own` when meeting an HV with `c_other`.
    #[inline]
    pub fn hv_cost_hh(&self, c_own: S, c_other: S) -> S {
        let share = share_kernel(c_own, c_other, S::one(), S::one());
        self.w_h * self.hv_precaution(c_own)
            + (S::one() - self.w_h) * self.loss(Encounter::HvHv, c_own, c_other) * share
    }

    #[inline]
    pub fn hv_cost_ah_weighted(&self, c_h: S, c_a: S, k: S, w_h: S) -> S {
        let share = share_kernel(c_h, c_a, k, S::one());
        w_h * self.hv_precaution(c_h)
            + (S::one() - w_h) * self.loss(Encounter::AvHv, c_a, c_h) * share
    }

    #[inline]
    pub fn hv_cost_ah(&self, c_h: S, c_a: S, k: S) -> S {
        self.hv_cost_ah_weighted(c_h, c_a, k, self.w_h)
    }

    /// AV's apportioned AV-HV loss, `L_AH * s_A`.
    #[inline]
    pub fn av_mixed_loss_share(&self, c_a: S, c_h: S, k: S) -> S {
        self.loss(Encounter::AvHv, c_a, c_h) * share_kernel(c_a, c_h, S::one(), k)
    }

    /// Manufacturer cost with the AV-HV loss share supplied by the caller.
    #[inline]
    pub fn manufacturer_cost_with_share(&self, c_a: S, mixed_share_loss: S, p: S) -> S {
        let q = S::one() - p;
        let mut cost = self.w_a_sen * p * self.av_sensor(c_a, p)
            + self.w_a_loss * p * p * self.loss(Encounter::AvAv, c_a, c_a);
        if q > S::zero() {
            cost = cost + self.w_a_mixed() * S::two() * p * q * mixed_share_loss;
        }
        cost
    }

    #[inline]
    pub fn manufacturer_cost(&self, c_a: S, c_h: S, k: S, p: S) -> S {
        let share_loss = if p < S::one() {
            self.av_mixed_loss_share(c_a, c_h, k)
        } else {
            S::zero()
        };
        self.manufacturer_cost_with_share(c_a, share_loss, p)
    }

    /// Pure-AV market objective.
    #[inline]
    pub fn pure_av_cost(&self, c_a: S) -> S {
        self.w_a_sen * self.av_sensor(c_a, S::one())
            + self.w_a_loss * self.loss(Encounter::AvAv, c_a, c_a)
    }

    /// Manufacturer objective when AVs run on exclusive lanes.
    #[inline]
    pub fn exclusive_lane_cost(&self, c_a: S, p: S) -> S {
        let q = S::one() - p;
        let aa_weight = p * p / (p * p + q * q);
        self.w_a_sen * p * self.av_sensor(c_a, p)
            + self.w_a_loss * aa_weight * self.loss(Encounter::AvAv, c_a, c_a)
    }

    fn precaution_jet(&self, c_h: S) -> Jet<S> {
        let g = S::one() - self.beta * c_h;
        Jet {
            v: S::one() / g - S::one(),
            d1: self.beta / (g * g),
            d2: S::two() * self.beta * self.beta / (g * g * g),
        }
    }

    /// Loss jet in the second care argument of `enc`, the first held fixed.
    fn loss_jet_second(&self, enc: Encounter, c1: S, c2: S) -> Jet<S> {
        let (x, y) = self.prob_coeffs(enc);
        let (u, v) = self.severity_coeffs(enc);
        let d = x * c1 + y * c2 + S::one();
        let prob = Jet {
            v: S::one() / d,
            d1: -y / (d * d),
            d2: S::two() * y * y / (d * d * d),
        };
        let raw = self.max_severity - u * c1 - v * c2;
        let sev = if raw < S::zero() {
            Jet::constant(S::zero())
        } else {
            Jet {
                v: raw,
                d1: -v,
                d2: S::zero(),
            }
        };
        prob.mul(sev)
    }

    /// Share jet of player `i` in its own care: `sigma_i c_j / (sigma_i c_j + sigma_j c_i)`.
    fn share_jet_own(c_i: S, c_j: S, sigma_i: S, sigma_j: S) -> Jet<S> {
        let a = sigma_i * c_j;
        let b = sigma_j;
        let d = a + b * c_i;
        Jet {
            v: a / d,
            d1: -a * b / (d * d),
            d2: S::two() * a * b * b / (d * d * d),
        }
    }

    /// Analytic value, slope and curvature of the AV-HV human cost in `c_h`.
    pub fn hv_cost_ah_jet(&self, c_h: S, c_a: S, k: S, w_h: S) -> Jet<S> {
        let loss = self.loss_jet_second(Encounter::AvHv, c_a, c_h);
        let share = Self::share_jet_own(c_h, c_a, k, S::one());
        self.precaution_jet(c_h)
            .scale(w_h)
            .add(loss.mul(share).scale(S::one() - w_h))
    }

    /// Analytic value, slope and curvature of the HV-HV cost in own care.
    pub fn hv_cost_hh_jet(&self, c_own: S, c_other: S) -> Jet<S> {
        let loss = self.loss_jet_second(Encounter::HvHv, c_other, c_own);
        let share = Self::share_jet_own(c_own, c_other, S::one(), S::one());
        self.precaution_jet(c_own)
            .scale(self.w_h)
            .add(loss.mul(share).scale(S::one() - self.w_h))
    }
}

fn check_care<S: Scalar>(what: &'static str, c: S) -> Result<()> {
    if c.is_finite() && c > S::zero() {
        Ok(())
    } else {
        Err(domain(what, c, "> 0"))
    }
}

/// Encounter probabilities `(HH, AH, AA)` at penetration `p`.
pub fn encounter_probabilities<S: Scalar>(p: S) -> Result<(S, S, S)> {
    check_penetration(p)?;
    let q = S::one() - p;
    Ok((q * q, S::two() * p * q, p * p))
}

/// Comparative-negligence share of party `i`.
pub fn share<S: Scalar>(c_i: S, c_j: S, sigma_i: S, sigma_j: S) -> Result<S> {
    check_care("c_i", c_i)?;
    check_care("c_j", c_j)?;
    check_care("sigma_i", sigma_i)?;
    check_care("sigma_j", sigma_j)?;
    Ok(share_kernel(c_i, c_j, sigma_i, sigma_j))
}

/// Share of the HV with care `c_own` in an HV-HV crash; the common standard cancels.
pub fn share_hh<S: Scalar>(c_own: S, c_other: S) -> Result<S> {
    share(c_own, c_other, S::one(), S::one())
}

/// `(s_H, s_A)` in an AV-HV crash at ratio `k`.
pub fn share_ah<S: Scalar>(c_h: S, c_a: S, k: S) -> Result<(S, S)> {
    let s_h = share(c_h, c_a, k, S::one())?;
    Ok((s_h, share_kernel(c_a, c_h, S::one(), k)))
}

/// Share of either AV in an AV-AV crash. Independent of care and ratio.
pub fn share_aa<S: Scalar>(c_a: S) -> Result<S> {
    check_care("c_a", c_a)?;
    Ok(S::lit(SHARE_AA))
}

pub fn crash_probability<S: Scalar>(
    enc: Encounter,
    c1: S,
    c2: S,
    params: &ModelParams<S>,
) -> Result<S> {
    check_care("c_1", c1)?;
    check_care("c_2", c2)?;
    Ok(params.prob(enc, c1, c2))
}

/// Severity, clamped at zero. Accepts zero care (the no-care limit).
pub fn crash_severity<S: Scalar>(
    enc: Encounter,
    c1: S,
    c2: S,
    params: &ModelParams<S>,
) -> Result<Severity<S>> {
    for (what, c) in [("c_1", c1), ("c_2", c2)] {
        if !(c.is_finite() && c >= S::zero()) {
            return Err(domain(what, c, ">= 0"));
        }
    }
    Ok(params.severity(enc, c1, c2))
}

pub fn crash_loss<S: Scalar>(enc: Encounter, c1: S, c2: S, params: &ModelParams<S>) -> Result<S> {
    let prob = crash_probability(enc, c1, c2, params)?;
    Ok(prob * crash_severity(enc, c1, c2, params)?.value)
}

/// HV precaution cost `-(beta c - 1)^-1 - 1`.
pub fn precaution_cost_hv<S: Scalar>(c_h: S, params: &ModelParams<S>) -> Result<S> {
    if !(c_h >= S::zero()) {
        return Err(domain("c_h", c_h, ">= 0"));
    }
    if c_h >= S::one() / params.beta {
        return Err(domain("c_h", c_h, "< 1/beta"));
    }
    Ok(params.hv_precaution(c_h))
}

/// AV sensor cost `((1 - alpha c)^-1 - 1) p^-1/2`.
pub fn sensor_cost_av<S: Scalar>(c_a: S, p: S, params: &ModelParams<S>) -> Result<S> {
    if !(c_a >= S::zero()) {
        return Err(domain("c_a", c_a, ">= 0"));
    }
    if c_a >= S::one() / params.alpha {
        return Err(domain("c_a", c_a, "< 1/alpha"));
    }
    if !(p > S::zero() && p <= S::one()) {
        return Err(domain("p", p, "in (0, 1]"));
    }
    Ok(params.av_sensor(c_a, p))
}

/// Cost of the HV with care `c_own` against an HV with `c_other`.
/// The other player's cost is `cost_hv_hh(c_other, c_own, ..)`.
pub fn cost_hv_hh<S: Scalar>(c_own: S, c_other: S, params: &ModelParams<S>) -> Result<S> {
    check_care("c_own", c_own)?;
    check_care("c_other", c_other)?;
    precaution_cost_hv(c_own, params)?;
    Ok(params.hv_cost_hh(c_own, c_other))
}

pub fn cost_hv_ah<S: Scalar>(c_h: S, c_a: S, k: S, params: &ModelParams<S>) -> Result<S> {
    check_care("c_h", c_h)?;
    check_care("c_a", c_a)?;
    check_care("k", k)?;
    precaution_cost_hv(c_h, params)?;
    Ok(params.hv_cost_ah(c_h, c_a, k))
}

pub fn cost_manufacturer<S: Scalar>(
    c_a: S,
    c_h_ah: S,
    k: S,
    p: S,
    params: &ModelParams<S>,
) -> Result<S> {
    check_care("c_a", c_a)?;
    check_care("c_h_ah", c_h_ah)?;
    check_care("k", k)?;
    if p == S::zero() {
        return Err(domain("p", p, "manufacturer undefined outside the market"));
    }
    sensor_cost_av(c_a, p, params)?;
    Ok(params.manufacturer_cost(c_a, c_h_ah, k, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ModelParams<f64> {
        ModelParams::base()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn encounter_boundaries() {
        assert_eq!(encounter_probabilities(0.0).unwrap(), (1.0, 0.0, 0.0));
        assert_eq!(encounter_probabilities(1.0).unwrap(), (0.0, 0.0, 1.0));
        assert_eq!(encounter_probabilities(0.5).unwrap(), (0.25, 0.5, 0.25));
        assert!(encounter_probabilities(1.01).is_err());
        assert!(encounter_probabilities(f64::NAN).is_err());
    }

    #[test]
    fn share_examples() {
        assert_eq!(share(1.0, 1.0, 1.0, 1.0).unwrap(), 0.5);
        assert!(close(share(1.0, 2.0, 1.0, 1.0).unwrap(), 2.0 / 3.0, 1e-15));
        let (s_h, s_a) = share_ah(1.0, 1.0, 2.0).unwrap();
        assert!(close(s_h, 2.0 / 3.0, 1e-15));
        assert!(close(s_a, 1.0 / 3.0, 1e-15));
        assert!(share(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(share(1.0, 1.0, -1.0, 1.0).is_err());
        assert_eq!(share_aa(1.7).unwrap(), 0.5);
    }

    #[test]
    fn probability_examples() {
        let p = base();
        assert!(close(
            crash_probability(Encounter::AvAv, 1.0, 1.0, &p).unwrap(),
            1.0 / 21.0,
            1e-15
        ));
        assert_eq!(
            crash_probability(Encounter::AvHv, 1.0, 0.5, &p).unwrap(),
            0.0625
        );
        let hi = crash_probability(Encounter::HvHv, 2.0 - 2e-6, 2.0 - 2e-6, &p).unwrap();
        let lo = crash_probability(Encounter::HvHv, 1e-6, 1e-6, &p).unwrap();
        assert!(hi < lo);
        assert!(crash_probability(Encounter::HvHv, 0.0, 1.0, &p).is_err());
    }

    #[test]
    fn severity_examples() {
        let p = base();
        let s = crash_severity(Encounter::AvAv, 1.0, 1.0, &p).unwrap();
        assert_eq!((s.value, s.clamped), (10.0, false));
        let s = crash_severity(Encounter::AvHv, 2.5, 2.0, &p).unwrap();
        assert_eq!(s.raw, -2.5);
        assert_eq!(s.value, 0.0);
        assert!(s.clamped);
        let s = crash_severity(Encounter::HvHv, 0.0, 0.0, &p).unwrap();
        assert_eq!(s.value, 20.0);
    }

    #[test]
    fn loss_examples() {
        let p = base();
        assert!(close(
            crash_loss(Encounter::AvAv, 1.0, 1.0, &p).unwrap(),
            10.0 / 21.0,
            1e-15
        ));
        assert!(close(
            crash_loss(Encounter::HvHv, 1.0, 1.0, &p).unwrap(),
            10.0 / 21.0,
            1e-15
        ));
        assert_eq!(crash_loss(Encounter::AvHv, 2.5, 2.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn precaution_examples() {
        let p = base();
        assert_eq!(precaution_cost_hv(0.0, &p).unwrap(), 0.0);
        assert!(close(precaution_cost_hv(1.0, &p).unwrap(), 1.0, 1e-15));
        assert!(close(precaution_cost_hv(1.8, &p).unwrap(), 9.0, 1e-12));
        assert!(precaution_cost_hv(2.0, &p).is_err());
        assert!(precaution_cost_hv(1.9999, &p).unwrap() > 1e4);
    }

    #[test]
    fn sensor_examples() {
        let p = base();
        assert!(close(sensor_cost_av(1.0, 1.0, &p).unwrap(), 2.0 / 3.0, 1e-15));
        assert!(close(sensor_cost_av(1.0, 0.25, &p).unwrap(), 4.0 / 3.0, 1e-15));
        assert_eq!(sensor_cost_av(0.0, 0.5, &p).unwrap(), 0.0);
        assert!(sensor_cost_av(2.5, 1.0, &p).is_err());
        assert!(sensor_cost_av(1.0, 0.0, &p).is_err());
    }

    #[test]
    fn hv_cost_examples() {
        let p = base();
        let expected = 0.5 * 1.0 + 0.5 * (10.0 / 21.0) * 0.5;
        assert!(close(cost_hv_hh(1.0, 1.0, &p).unwrap(), expected, 1e-14));
        assert!(close(cost_hv_ah(1.0, 1.0, 1.0, &p).unwrap(), expected, 1e-14));
        // k -> 0: the loss share vanishes
        let tiny = cost_hv_ah(1.0, 1.0, 1e-12, &p).unwrap();
        assert!(close(tiny, 0.5, 1e-10));
        let share1 = share_hh(1e-9, 1.0).unwrap();
        assert!(share1 > 1.0 - 1e-8);
        assert_eq!(
            cost_hv_hh(0.7, 0.7, &p).unwrap(),
            cost_hv_hh(0.7, 0.7, &p).unwrap()
        );
        let mut last = 0.0;
        for i in 1..50 {
            let c = cost_hv_ah(0.8, 1.2, i as f64 * 0.2, &p).unwrap();
            assert!(c > last);
            last = c;
        }
    }

    #[test]
    fn manufacturer_examples() {
        let p = base();
        let pure = cost_manufacturer(1.0, 1.0, 1.0, 1.0, &p).unwrap();
        let expected = 0.125 * sensor_cost_av(1.0, 1.0, &p).unwrap()
            + 0.25 * crash_loss(Encounter::AvAv, 1.0, 1.0, &p).unwrap();
        assert!(close(pure, expected, 1e-15));
        assert_eq!(pure, p.pure_av_cost(1.0));
        assert!(cost_manufacturer(1.0, 1.0, 1.0, 0.0, &p).is_err());
        let a = cost_manufacturer(1.0, 1.0, 1.0, 0.5, &p).unwrap();
        let b = cost_manufacturer(1.1, 1.0, 1.0, 0.5, &p).unwrap();
        assert!(a.is_finite() && b.is_finite());
    }

    #[test]
    fn jets_match_values() {
        let p = base();
        let j = p.hv_cost_ah_jet(0.7, 1.2, 1.3, p.w_h);
        assert!(close(j.v, p.hv_cost_ah(0.7, 1.2, 1.3), 1e-14));
        let j = p.hv_cost_hh_jet(0.7, 0.9);
        assert!(close(j.v, p.hv_cost_hh(0.7, 0.9), 1e-14));
    }

    #[test]
    fn generic_over_f32() {
        let p = ModelParams::<f32>::base();
        let l = crash_loss(Encounter::AvAv, 1.0f32, 1.0, &p).unwrap();
        assert!((l - 10.0 / 21.0).abs() < 1e-6);
    }
}
