//! Solvers for the lower games and checks of the existence/uniqueness conditions.

pub mod config;
pub mod games;
pub mod oracle;
pub mod search;
pub mod sse;
pub mod verify;

pub use config::SolverConfig;
pub use games::{
    best_response_hv_ah, best_response_hv_ah_weighted, best_response_hv_hh,
    exclusive_lanes_equilibrium, nash_hh, pure_av_optimum, stackelberg_ah,
    ExclusiveLaneSolution, NashSolution, StackelbergSolution,
};
pub use oracle::{grid_oracle_equilibrium, OracleCare, OracleGame};
pub use search::Optimum;
pub use sse::{check_sse_conditions, check_sse_conditions_sampled, ConditionCheck, SseReport, SseSampling};
pub use verify::{av_hv_deviation, hv_hv_deviation, single_deviation, DeviationCheck};
