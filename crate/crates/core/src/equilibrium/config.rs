use crate::error::{Error, Result};
use crate::Scalar;

/// Numerical settings shared by every solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<S> {
    /// Absolute convergence tolerance on care levels.
    pub care_tolerance: S,
    /// Points per care axis for scans and the grid oracle.
    pub grid_resolution: usize,
    /// Cap on best-response iterations.
    pub max_iterations: usize,
    /// Step for finite-difference derivative checks.
    pub fd_step: S,
}

impl<S: Scalar> Default for SolverConfig<S> {
    fn default() -> Self {
        Self {
            care_tolerance: S::lit(1e-6),
            grid_resolution: 1000,
            max_iterations: 200,
            fd_step: S::lit(1e-4),
        }
    }
}

impl<S: Scalar> SolverConfig<S> {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.care_tolerance > S::zero()) {
            bad.push(format!("care_tolerance = {} must be > 0", self.care_tolerance));
        }
        if self.grid_resolution < 100 {
            bad.push(format!(
                "grid_resolution = {} must be >= 100",
                self.grid_resolution
            ));
        }
        if self.max_iterations < 1 {
            bad.push("max_iterations must be >= 1".to_string());
        }
        if !(self.fd_step > S::zero()) {
            bad.push(format!("fd_step = {} must be > 0", self.fd_step));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }

    /// Points of the slope scan that brackets a follower's first-order condition
    /// and detects non-unimodal objectives.
    pub(crate) fn follower_scan(&self) -> usize {
        (self.grid_resolution / 8).clamp(100, 1000)
    }

    /// Bracket width the FOC bisection refines to.
    pub(crate) fn root_tolerance(&self) -> S {
        self.care_tolerance * S::lit(1e-9)
    }
}
