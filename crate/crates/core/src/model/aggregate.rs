//! System-level measures: total loss, precaution cost, social cost, crash rates.

use crate::error::Result;
use crate::model::params::{check_penetration, CareProfile, Encounter, ModelParams};
use crate::Scalar;

/// Weight of each encounter type in the system aggregates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncounterWeights<S> {
    pub hh: S,
    pub ah: S,
    pub aa: S,
}

impl<S: Scalar> EncounterWeights<S> {
    /// Random pairing in a mixed market: `((1-p)^2, 2p(1-p), p^2)`.
    pub fn mixed(p: S) -> Result<Self> {
        check_penetration(p)?;
        let q = S::one() - p;
        Ok(Self {
            hh: q * q,
            ah: S::two() * p * q,
            aa: p * p,
        })
    }

    /// Separated lanes: the AV-HV encounters are removed and the remaining
    /// same-type encounters renormalised.
    pub fn exclusive_lanes(p: S) -> Result<Self> {
        check_penetration(p)?;
        let q = S::one() - p;
        let same = p * p + q * q;
        Ok(Self {
            hh: q * q / same,
            ah: S::zero(),
            aa: p * p / same,
        })
    }

    pub fn get(&self, enc: Encounter) -> S {
        match enc {
            Encounter::HvHv => self.hh,
            Encounter::AvHv => self.ah,
            Encounter::AvAv => self.aa,
        }
    }

    pub fn sum(&self) -> S {
        self.hh + self.ah + self.aa
    }
}

/// Per-encounter crash rates and their total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrashRates<S> {
    pub hh: S,
    pub ah: S,
    pub aa: S,
    pub total: S,
}

/// Care arguments `(c_1, c_2)` of each encounter in a profile.
pub(crate) fn encounter_cares<S: Scalar>(profile: &CareProfile<S>, enc: Encounter) -> (S, S) {
    match enc {
        Encounter::HvHv => (profile.c_h1_hh, profile.c_h2_hh),
        Encounter::AvHv => (profile.c_a, profile.c_h_ah),
        Encounter::AvAv => (profile.c_a, profile.c_a),
    }
}

pub(crate) fn weighted_loss<S: Scalar>(
    profile: &CareProfile<S>,
    w: &EncounterWeights<S>,
    params: &ModelParams<S>,
) -> S {
    Encounter::ALL
        .iter()
        .filter(|&&enc| w.get(enc) > S::zero())
        .map(|&enc| {
            let (c1, c2) = encounter_cares(profile, enc);
            w.get(enc) * params.loss(enc, c1, c2)
        })
        .fold(S::zero(), |a, b| a + b)
}

/// Precaution cost; `p` sets the sensor-cost scale and is only evaluated
/// when an AV term carries weight.
pub(crate) fn weighted_precaution<S: Scalar>(
    profile: &CareProfile<S>,
    p: S,
    w: &EncounterWeights<S>,
    params: &ModelParams<S>,
) -> S {
    let mut total = S::zero();
    if w.hh > S::zero() {
        total = total
            + w.hh * (params.hv_precaution(profile.c_h1_hh) + params.hv_precaution(profile.c_h2_hh));
    }
    let av_weight = w.ah + S::two() * w.aa;
    if av_weight > S::zero() {
        total = total + av_weight * params.av_sensor(profile.c_a, p);
    }
    if w.ah > S::zero() {
        total = total + w.ah * params.hv_precaution(profile.c_h_ah);
    }
    total
}

pub(crate) fn weighted_rates<S: Scalar>(
    profile: &CareProfile<S>,
    w: &EncounterWeights<S>,
    params: &ModelParams<S>,
) -> CrashRates<S> {
    let rate = |enc| {
        let weight = w.get(enc);
        if weight > S::zero() {
            let (c1, c2) = encounter_cares(profile, enc);
            weight * params.prob(enc, c1, c2)
        } else {
            S::zero()
        }
    };
    let (hh, ah, aa) = (
        rate(Encounter::HvHv),
        rate(Encounter::AvHv),
        rate(Encounter::AvAv),
    );
    CrashRates {
        hh,
        ah,
        aa,
        total: hh + ah + aa,
    }
}

/// Total crash loss `TL`.
pub fn total_loss<S: Scalar>(profile: &CareProfile<S>, p: S, params: &ModelParams<S>) -> Result<S> {
    Ok(weighted_loss(profile, &EncounterWeights::mixed(p)?, params))
}

/// Total precaution cost `TC`. The AV-AV term counts both vehicles.
pub fn total_precaution_cost<S: Scalar>(
    profile: &CareProfile<S>,
    p: S,
    params: &ModelParams<S>,
) -> Result<S> {
    Ok(weighted_precaution(
        profile,
        p,
        &EncounterWeights::mixed(p)?,
        params,
    ))
}

/// Social cost `w_l TC + (1 - w_l) TL`.
pub fn social_cost<S: Scalar>(profile: &CareProfile<S>, p: S, params: &ModelParams<S>) -> Result<S> {
    let tc = total_precaution_cost(profile, p, params)?;
    let tl = total_loss(profile, p, params)?;
    Ok(params.w_l * tc + (S::one() - params.w_l) * tl)
}

pub fn crash_rates<S: Scalar>(
    profile: &CareProfile<S>,
    p: S,
    params: &ModelParams<S>,
) -> Result<CrashRates<S>> {
    Ok(weighted_rates(profile, &EncounterWeights::mixed(p)?, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::functions::{crash_loss, precaution_cost_hv, sensor_cost_av};

    fn base() -> ModelParams<f64> {
        ModelParams::base()
    }

    fn profile() -> CareProfile<f64> {
        CareProfile {
            c_h1_hh: 0.6,
            c_h2_hh: 0.6,
            c_h_ah: 0.45,
            c_a: 1.2,
            k: 1.0,
        }
    }

    #[test]
    fn boundary_losses() {
        let (pr, par) = (profile(), base());
        let hh = crash_loss(Encounter::HvHv, 0.6, 0.6, &par).unwrap();
        let aa = crash_loss(Encounter::AvAv, 1.2, 1.2, &par).unwrap();
        assert_eq!(total_loss(&pr, 0.0, &par).unwrap(), hh);
        assert_eq!(total_loss(&pr, 1.0, &par).unwrap(), aa);
    }

    #[test]
    fn equal_cares_give_equal_loss() {
        let par = base();
        let pr = CareProfile::uniform(0.9, 1.0);
        let l = crash_loss(Encounter::HvHv, 0.9, 0.9, &par).unwrap();
        assert!((total_loss(&pr, 0.5, &par).unwrap() - l).abs() < 1e-14);
    }

    #[test]
    fn boundary_costs() {
        let (pr, par) = (profile(), base());
        let s_h = precaution_cost_hv(0.6, &par).unwrap();
        assert_eq!(total_precaution_cost(&pr, 0.0, &par).unwrap(), 2.0 * s_h);
        let s_a = sensor_cost_av(1.2, 1.0, &par).unwrap();
        assert_eq!(total_precaution_cost(&pr, 1.0, &par).unwrap(), 2.0 * s_a);
        let z = CareProfile::uniform(1e-12, 1.0);
        assert!(total_precaution_cost(&z, 0.5, &par).unwrap() < 1e-10);
    }

    #[test]
    fn degenerate_lawmaker_weights() {
        let pr = profile();
        let lo = ModelParams { w_l: 0.0, ..base() };
        let hi = ModelParams { w_l: 1.0, ..base() };
        assert_eq!(
            social_cost(&pr, 0.4, &lo).unwrap(),
            total_loss(&pr, 0.4, &lo).unwrap()
        );
        assert_eq!(
            social_cost(&pr, 0.4, &hi).unwrap(),
            total_precaution_cost(&pr, 0.4, &hi).unwrap()
        );
    }

    #[test]
    fn rate_boundaries() {
        let (pr, par) = (profile(), base());
        let r0 = crash_rates(&pr, 0.0, &par).unwrap();
        assert_eq!(r0.total, par.prob(Encounter::HvHv, 0.6, 0.6));
        let r1 = crash_rates(&pr, 1.0, &par).unwrap();
        assert_eq!(r1.total, par.prob(Encounter::AvAv, 1.2, 1.2));
        for i in 0..=20 {
            let r = crash_rates(&pr, i as f64 / 20.0, &par).unwrap();
            for v in [r.hh, r.ah, r.aa, r.total] {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn exclusive_weights() {
        let w = EncounterWeights::exclusive_lanes(0.3f64).unwrap();
        assert_eq!(w.ah, 0.0);
        assert!((w.sum() - 1.0).abs() < 1e-15);
        let w1 = EncounterWeights::exclusive_lanes(1.0f64).unwrap();
        assert_eq!(w1.aa, 1.0);
    }
}
