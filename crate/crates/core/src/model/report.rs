use crate::error::Result;
use crate::model::aggregate::{
    encounter_cares, weighted_loss, weighted_precaution, weighted_rates, EncounterWeights,
};
use crate::model::params::{CareProfile, Encounter, ModelParams};
use crate::Scalar;

/// Quantities of one encounter type at an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioMeasures<S> {
    pub encounter: Encounter,
    pub encounter_probability: S,
    pub crash_probability: S,
    pub severity: S,
    pub loss: S,
    pub crash_rate: S,
    pub severity_clamped: bool,
}

/// Which care bound an optimum landed on, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoundaryFlags {
    pub hv_hh: bool,
    pub hv_ah: bool,
    pub av: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub hh_iterations: usize,
    pub hh_residual: f64,
    pub leader_evaluations: usize,
    pub follower_residual: f64,
    pub boundary: BoundaryFlags,
    /// Leader objective was flat within tolerance over several grid points.
    pub leader_tie: bool,
    /// Some encounter severity hit the zero clamp.
    pub severity_clamped: bool,
    /// Results of the existence/uniqueness checks when they were run.
    pub sse_flags: Option<[bool; 4]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport<S> {
    pub profile: CareProfile<S>,
    pub p: S,
    /// Indexed HH, AH, AA.
    pub scenarios: [ScenarioMeasures<S>; 3],
    pub total_loss: S,
    pub total_cost: S,
    pub social_cost: S,
    pub total_rate: S,
    pub diagnostics: Diagnostics,
}

impl<S: Scalar> EquilibriumReport<S> {
    /// Evaluates every measure of `profile` in a randomly mixing market.
    pub fn assemble(
        profile: CareProfile<S>,
        p: S,
        params: &ModelParams<S>,
        diagnostics: Diagnostics,
    ) -> Result<Self> {
        Self::assemble_weighted(profile, p, EncounterWeights::mixed(p)?, params, diagnostics)
    }

    pub fn assemble_weighted(
        profile: CareProfile<S>,
        p: S,
        weights: EncounterWeights<S>,
        params: &ModelParams<S>,
        mut diagnostics: Diagnostics,
    ) -> Result<Self> {
        let rates = weighted_rates(&profile, &weights, params);
        let scenarios = Encounter::ALL.map(|enc| {
            let (c1, c2) = encounter_cares(&profile, enc);
            let sev = params.severity(enc, c1, c2);
            let prob = params.prob(enc, c1, c2);
            ScenarioMeasures {
                encounter: enc,
                encounter_probability: weights.get(enc),
                crash_probability: prob,
                severity: sev.value,
                loss: prob * sev.value,
                crash_rate: match enc {
                    Encounter::HvHv => rates.hh,
                    Encounter::AvHv => rates.ah,
                    Encounter::AvAv => rates.aa,
                },
                severity_clamped: sev.clamped,
            }
        });
        diagnostics.severity_clamped = scenarios
            .iter()
            .any(|s| s.severity_clamped && s.encounter_probability > S::zero());
        let total_loss = weighted_loss(&profile, &weights, params);
        let total_cost = weighted_precaution(&profile, p, &weights, params);
        Ok(Self {
            profile,
            p,
            scenarios,
            total_loss,
            total_cost,
            social_cost: params.w_l * total_cost + (S::one() - params.w_l) * total_loss,
            total_rate: rates.total,
            diagnostics,
        })
    }

    pub fn scenario(&self, enc: Encounter) -> &ScenarioMeasures<S> {
        match enc {
            Encounter::HvHv => &self.scenarios[0],
            Encounter::AvHv => &self.scenarios[1],
            Encounter::AvAv => &self.scenarios[2],
        }
    }

    /// AV-related crash loss `p^2 L_AA + 2p(1-p) L_AH`.
    pub fn av_related_loss(&self) -> S {
        let aa = self.scenario(Encounter::AvAv);
        let ah = self.scenario(Encounter::AvHv);
        aa.encounter_probability * aa.loss + ah.encounter_probability * ah.loss
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_hold() {
        let par = ModelParams::<f64>::base();
        let pr = CareProfile {
            c_h1_hh: 0.6,
            c_h2_hh: 0.6,
            c_h_ah: 0.42,
            c_a: 1.23,
            k: 1.0,
        };
        for i in 0..=10 {
            let p = i as f64 / 10.0;
            let r = EquilibriumReport::assemble(pr, p, &par, Diagnostics::default()).unwrap();
            let sum: f64 = r.scenarios.iter().map(|s| s.encounter_probability).sum();
            assert!((sum - 1.0).abs() < 1e-15);
            let rates: f64 = r.scenarios.iter().map(|s| s.crash_rate).sum();
            assert!((rates - r.total_rate).abs() < 1e-15);
            let sc = 0.16 * r.total_cost + 0.84 * r.total_loss;
            assert!((sc - r.social_cost).abs() < 1e-14);
            assert!(r.social_cost.is_finite());
            assert!(!r.diagnostics.severity_clamped);
        }
    }
}
