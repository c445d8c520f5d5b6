use crate::error::{domain, Error, Result, Violation};
use crate::Scalar;

/// Gap kept between a solver's search interval and the open feasible set.
pub const FEASIBILITY_MARGIN: f64 = 1e-6;

/// Default upper bound of the liability ratio.
pub const DEFAULT_K_MAX: f64 = 10.0;

/// Exogenous coefficients of the liability game.
///
/// The care bounds are optional: when unset they default to the cost pole
/// minus [`FEASIBILITY_MARGIN`], so changing `alpha` or `beta` moves them too.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<S> {
    /// Sensor-cost curvature; the AV cost has its pole at `1 / alpha`.
    pub alpha: S,
    /// Human precaution-cost curvature; pole at `1 / beta`.
    pub beta: S,
    /// Environment coefficient of AV care in the crash probability.
    pub av_env: S,
    /// Environment coefficient of HV care in the crash probability.
    pub hv_env: S,
    /// Crash severity at zero care.
    pub max_severity: S,
    /// Severity reduction per unit of AV care.
    pub av_severity_slope: S,
    /// Severity reduction per unit of HV care.
    pub hv_severity_slope: S,
    /// Human weight on precaution cost (the rest goes to the loss share).
    pub w_h: S,
    /// Manufacturer weight on sensor cost.
    pub w_a_sen: S,
    /// Manufacturer weight on AV-AV crash loss.
    pub w_a_loss: S,
    /// Lawmaker weight on total precaution cost.
    pub w_l: S,
    pub c_h_max: Option<S>,
    pub c_a_max: Option<S>,
    pub k_max: S,
}

impl<S: Scalar> ModelParams<S> {
    /// The base configuration used throughout the numerical experiments.
    pub fn base() -> Self {
        Self {
            alpha: S::lit(0.4),
            beta: S::lit(0.5),
            av_env: S::lit(10.0),
            hv_env: S::lit(10.0),
            max_severity: S::lit(20.0),
            av_severity_slope: S::lit(5.0),
            hv_severity_slope: S::lit(5.0),
            w_h: S::lit(0.5),
            w_a_sen: S::lit(0.125),
            w_a_loss: S::lit(0.25),
            w_l: S::lit(0.16),
            c_h_max: None,
            c_a_max: None,
            k_max: S::lit(DEFAULT_K_MAX),
        }
    }

    pub fn margin() -> S {
        S::lit(FEASIBILITY_MARGIN)
    }

    /// Upper bound of the HV care level.
    pub fn hv_care_max(&self) -> S {
        self.c_h_max
            .unwrap_or_else(|| S::one() / self.beta - Self::margin())
    }

    /// Upper bound of the AV care level.
    pub fn av_care_max(&self) -> S {
        self.c_a_max
            .unwrap_or_else(|| S::one() / self.alpha - Self::margin())
    }

    /// Closed search interval for HV care.
    pub fn hv_search_interval(&self) -> (S, S) {
        (Self::margin(), self.hv_care_max() - Self::margin())
    }

    /// Closed search interval for AV care.
    pub fn av_search_interval(&self) -> (S, S) {
        (Self::margin(), self.av_care_max() - Self::margin())
    }

    /// Closed search interval for the liability ratio.
    pub fn ratio_search_interval(&self) -> (S, S) {
        (Self::margin(), self.k_max)
    }

    /// Manufacturer weight on its share of AV-HV crash loss.
    pub fn w_a_mixed(&self) -> S {
        S::one() - self.w_a_sen - self.w_a_loss
    }

    /// Checks every parameter invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let zero = S::zero();
        let one = S::one();
        let mut check = |ok: bool, key: &'static str, value: S, rule: &'static str| {
            if !ok {
                bad.push(Violation {
                    key,
                    value: value.as_f64(),
                    rule,
                });
            }
        };
        let positive = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("a", self.av_env),
            ("h", self.hv_env),
            ("max_severity", self.max_severity),
            ("s", self.av_severity_slope),
            ("t", self.hv_severity_slope),
            ("k_max", self.k_max),
        ];
        for (key, v) in positive {
            check(v.is_finite() && v > zero, key, v, "> 0");
        }
        let unit = |v: S| v.is_finite() && v > zero && v < one;
        check(unit(self.w_h), "w_h", self.w_h, "in (0, 1)");
        check(unit(self.w_l), "w_l", self.w_l, "in (0, 1)");
        check(self.w_a_sen > zero, "w_a_sen", self.w_a_sen, "> 0");
        check(self.w_a_loss > zero, "w_a_loss", self.w_a_loss, "> 0");
        let w_sum = self.w_a_sen + self.w_a_loss;
        check(w_sum < one, "w_a_sen + w_a_loss", w_sum, "< 1");

        if self.beta > zero {
            let c_h = self.hv_care_max();
            check(
                c_h > zero && c_h < one / self.beta,
                "c_h_max",
                c_h,
                "in (0, 1/beta)",
            );
        }
        if self.alpha > zero {
            let c_a = self.av_care_max();
            check(
                c_a > zero && c_a < one / self.alpha,
                "c_a_max",
                c_a,
                "in (0, 1/alpha)",
            );
        }
        if self.alpha > zero && self.beta > zero {
            let (c_a, c_h) = (self.av_care_max(), self.hv_care_max());
            check(c_a >= c_h, "c_a_max", c_a, ">= c_h_max");
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(bad))
        }
    }

    /// Converts to another scalar type.
    pub fn cast<T: Scalar>(&self) -> ModelParams<T> {
        let c = |v: S| T::lit(v.as_f64());
        ModelParams {
            alpha: c(self.alpha),
            beta: c(self.beta),
            av_env: c(self.av_env),
            hv_env: c(self.hv_env),
            max_severity: c(self.max_severity),
            av_severity_slope: c(self.av_severity_slope),
            hv_severity_slope: c(self.hv_severity_slope),
            w_h: c(self.w_h),
            w_a_sen: c(self.w_a_sen),
            w_a_loss: c(self.w_a_loss),
            w_l: c(self.w_l),
            c_h_max: self.c_h_max.map(c),
            c_a_max: self.c_a_max.map(c),
            k_max: c(self.k_max),
        }
    }
}

impl<S: Scalar> Default for ModelParams<S> {
    fn default() -> Self {
        Self::base()
    }
}

/// The lawmaker's standard ratio `k = sigma_H / sigma_A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiabilityRule<S> {
    k: S,
}

impl<S: Scalar> LiabilityRule<S> {
    pub fn new(k: S, params: &ModelParams<S>) -> Result<Self> {
        if !(k > S::zero() && k <= params.k_max) {
            return Err(domain("k", k, "in (0, k_max]"));
        }
        Ok(Self { k })
    }

    pub fn equal_standards() -> Self {
        Self { k: S::one() }
    }

    pub fn k(&self) -> S {
        self.k
    }

    /// Standards `(sigma_H, sigma_A)` normalised so that `sigma_A = 1`.
    pub fn standards(&self) -> (S, S) {
        (self.k, S::one())
    }
}

/// AV market penetration, optionally with an endogenous sensitivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Market<S> {
    p: S,
    eta: Option<S>,
}

impl<S: Scalar> Market<S> {
    pub fn new(p: S) -> Result<Self> {
        check_penetration(p)?;
        Ok(Self { p, eta: None })
    }

    pub fn endogenous(p: S, eta: S) -> Result<Self> {
        check_penetration(p)?;
        if !(eta >= S::zero()) {
            return Err(domain("eta", eta, ">= 0"));
        }
        Ok(Self { p, eta: Some(eta) })
    }

    pub fn p(&self) -> S {
        self.p
    }

    pub fn eta(&self) -> Option<S> {
        self.eta
    }
}

pub(crate) fn check_penetration<S: Scalar>(p: S) -> Result<()> {
    if p >= S::zero() && p <= S::one() {
        Ok(())
    } else {
        Err(domain("p", p, "in [0, 1]"))
    }
}

/// Equilibrium care levels of every road user plus the ratio they were solved at.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CareProfile<S> {
    pub c_h1_hh: S,
    pub c_h2_hh: S,
    pub c_h_ah: S,
    pub c_a: S,
    pub k: S,
}

impl<S: Scalar> CareProfile<S> {
    /// Every care level set to `c`, with ratio `k`.
    pub fn uniform(c: S, k: S) -> Self {
        Self {
            c_h1_hh: c,
            c_h2_hh: c,
            c_h_ah: c,
            c_a: c,
            k,
        }
    }
}

/// Vehicle encounter type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Encounter {
    /// Two human-driven vehicles.
    HvHv,
    /// An AV (first care argument) meets an HV (second).
    AvHv,
    /// Two AVs.
    AvAv,
}

impl Encounter {
    pub const ALL: [Encounter; 3] = [Encounter::HvHv, Encounter::AvHv, Encounter::AvAv];

    pub fn label(self) -> &'static str {
        match self {
            Encounter::HvHv => "HH",
            Encounter::AvHv => "AH",
            Encounter::AvAv => "AA",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_is_valid() {
        ModelParams::<f64>::base().validate().unwrap();
        ModelParams::<f32>::base().validate().unwrap();
    }

    #[test]
    fn default_bounds_follow_poles() {
        let p = ModelParams::<f64>::base();
        assert!((p.hv_care_max() - (2.0 - 1e-6)).abs() < 1e-15);
        assert!((p.av_care_max() - (2.5 - 1e-6)).abs() < 1e-15);
        let q = ModelParams { alpha: 0.3, ..p };
        assert!(q.av_care_max() > 3.33);
    }

    #[test]
    fn validation_collects_all_violations() {
        let p = ModelParams {
            w_h: 1.5,
            w_l: 0.0,
            ..ModelParams::<f64>::base()
        };
        match p.validate() {
            Err(Error::InvalidParams(v)) => {
                let keys: Vec<_> = v.iter().map(|x| x.key).collect();
                assert_eq!(keys, vec!["w_h", "w_l"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn weights_must_leave_room_for_mixed_term() {
        let p = ModelParams {
            w_a_sen: 0.6,
            w_a_loss: 0.4,
            ..ModelParams::<f64>::base()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn explicit_bound_past_pole_rejected() {
        let p = ModelParams {
            c_h_max: Some(2.0),
            ..ModelParams::<f64>::base()
        };
        assert!(p.validate().is_err());
        let q = ModelParams {
            c_a_max: Some(1.5),
            ..ModelParams::<f64>::base()
        };
        // below c_h_max
        assert!(q.validate().is_err());
    }

    #[test]
    fn ratio_and_market_bounds() {
        let p = ModelParams::<f64>::base();
        assert!(LiabilityRule::new(0.0, &p).is_err());
        assert!(LiabilityRule::new(10.0, &p).is_ok());
        assert!(LiabilityRule::new(10.5, &p).is_err());
        assert!(Market::new(-0.1f64).is_err());
        assert!(Market::new(1.0f64).is_ok());
        assert!(Market::endogenous(0.5f64, -1.0).is_err());
    }
}
