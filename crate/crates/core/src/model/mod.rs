//! Domain types and the closed-form functions of the liability game.

pub mod aggregate;
pub mod functions;
pub mod params;
pub mod report;

pub use aggregate::{
    crash_rates, social_cost, total_loss, total_precaution_cost, CrashRates, EncounterWeights,
};
pub use functions::{
    cost_hv_ah, cost_hv_hh, cost_manufacturer, crash_loss, crash_probability, crash_severity,
    encounter_probabilities, precaution_cost_hv, sensor_cost_av, share, share_aa, share_ah,
    share_hh, Jet, Severity, SHARE_AA,
};
pub use params::{
    CareProfile, Encounter, LiabilityRule, Market, ModelParams, DEFAULT_K_MAX, FEASIBILITY_MARGIN,
};
pub use report::{BoundaryFlags, Diagnostics, EquilibriumReport, ScenarioMeasures};
